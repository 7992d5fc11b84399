//! Undirected multigraphs with loops, the configuration-model matcher and
//! traversal primitives.
//!
//! Degree convention: a non-loop edge contributes 1 to each endpoint, an
//! ordinary loop contributes 2 and a special loop (the leftover clone of an
//! odd Poisson-cloning draw) contributes 1.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance reported for vertices not reachable from the source.
pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub special: bool,
}

impl Edge {
    /// Ordinary edge with endpoints normalised so that `u <= v`.
    pub fn new(a: usize, b: usize) -> Self {
        Edge {
            u: a.min(b),
            v: a.max(b),
            special: false,
        }
    }

    pub fn special_loop(u: usize) -> Self {
        Edge {
            u,
            v: u,
            special: true,
        }
    }

    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multigraph {
    n: usize,
    edges: Vec<Edge>,
}

impl Multigraph {
    pub fn new(n: usize) -> Self {
        Multigraph {
            n,
            edges: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, edges: usize) -> Self {
        Multigraph {
            n,
            edges: Vec::with_capacity(edges),
        }
    }

    /// Graph on `n` vertices from ordinary `(u, v)` pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut g = Multigraph::with_capacity(n, pairs.len());
        for &(a, b) in pairs {
            g.try_add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Adds vertices and returns the id of the first new one.
    pub fn add_vertices(&mut self, count: usize) -> usize {
        let first = self.n;
        self.n += count;
        first
    }

    /// Adds an ordinary edge; panics on out-of-range endpoints.
    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(
            a < self.n && b < self.n,
            "edge ({a}, {b}) out of range for n = {}",
            self.n
        );
        self.edges.push(Edge::new(a, b));
    }

    pub fn try_add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if a >= self.n || b >= self.n {
            return Err(Error::domain(format!(
                "edge ({a}, {b}) out of range for n = {}",
                self.n
            )));
        }
        self.edges.push(Edge::new(a, b));
        Ok(())
    }

    pub fn add_special_loop(&mut self, u: usize) {
        assert!(u < self.n, "vertex {u} out of range for n = {}", self.n);
        self.edges.push(Edge::special_loop(u));
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            if e.special {
                deg[e.u] += 1;
            } else {
                deg[e.u] += 1;
                deg[e.v] += 1;
            }
        }
        deg
    }

    pub fn degree_sum(&self) -> usize {
        self.edges
            .iter()
            .map(|e| if e.special { 1 } else { 2 })
            .sum()
    }

    pub fn special_loop_count(&self) -> usize {
        self.edges.iter().filter(|e| e.special).count()
    }

    /// Half-edge adjacency; see [`Adjacency`].
    pub fn adjacency(&self) -> Adjacency {
        Adjacency::build(self, true)
    }

    /// Half-edge adjacency ignoring special loops.
    pub fn ordinary_adjacency(&self) -> Adjacency {
        Adjacency::build(self, false)
    }

    /// Subgraph induced by `vertices`, relabelled densely in the given order.
    /// Special loops on kept vertices are retained.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Multigraph {
        let mut label = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            label[v] = i;
        }
        let mut sub = Multigraph::new(vertices.len());
        for e in &self.edges {
            let (a, b) = (label[e.u], label[e.v]);
            if a != usize::MAX && b != usize::MAX {
                sub.edges.push(Edge {
                    u: a.min(b),
                    v: a.max(b),
                    special: e.special,
                });
            }
        }
        sub
    }

    /// Whether the graph has neither loops nor parallel edges.
    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.edges.len());
        self.edges
            .iter()
            .all(|e| !e.is_loop() && seen.insert((e.u, e.v)))
    }
}

/// Compressed half-edge adjacency.
///
/// Vertex `v` owns one entry per unit of degree: a non-loop edge appears
/// once at each endpoint, an ordinary loop twice at its vertex and a special
/// loop once. Each entry records the neighbour and the edge index, so
/// parallel edges stay distinguishable.
#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    edge_ids: Vec<usize>,
}

impl Adjacency {
    fn build(g: &Multigraph, with_special: bool) -> Self {
        let n = g.n;
        let mut counts = vec![0usize; n + 1];
        for e in &g.edges {
            if e.special {
                if with_special {
                    counts[e.u + 1] += 1;
                }
            } else {
                counts[e.u + 1] += 1;
                counts[e.v + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let total = counts[n];
        let mut fill = counts.clone();
        let mut targets = vec![0; total];
        let mut edge_ids = vec![0; total];
        for (id, e) in g.edges.iter().enumerate() {
            if e.special {
                if with_special {
                    targets[fill[e.u]] = e.u;
                    edge_ids[fill[e.u]] = id;
                    fill[e.u] += 1;
                }
                continue;
            }
            targets[fill[e.u]] = e.v;
            edge_ids[fill[e.u]] = id;
            fill[e.u] += 1;
            targets[fill[e.v]] = e.u;
            edge_ids[fill[e.v]] = id;
            fill[e.v] += 1;
        }
        Adjacency {
            offsets: counts,
            targets,
            edge_ids,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// `(neighbour, edge id)` pairs for each half-edge at `v`.
    pub fn half_edges(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.edge_ids[range].iter().copied())
    }

    /// BFS distances from `source` into `dist`, reusing `queue`. Returns
    /// the eccentricity of `source` within its component and the last
    /// vertex dequeued (a farthest vertex).
    pub fn bfs_into(
        &self,
        source: usize,
        dist: &mut [u32],
        queue: &mut VecDeque<usize>,
    ) -> (u32, usize) {
        dist.fill(UNREACHABLE);
        queue.clear();
        dist[source] = 0;
        queue.push_back(source);
        let mut last = source;
        while let Some(v) = queue.pop_front() {
            last = v;
            let next = dist[v] + 1;
            for &w in self.neighbors(v) {
                if dist[w] == UNREACHABLE {
                    dist[w] = next;
                    queue.push_back(w);
                }
            }
        }
        (dist[last], last)
    }

    pub fn bfs(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.vertex_count()];
        self.bfs_into(source, &mut dist, &mut VecDeque::new());
        dist
    }
}

/// Uniform random perfect matching of half-edges, contracted into edges.
///
/// Vertex `v` owns `degrees[v]` half-edges; the half-edge array is shuffled
/// once and consecutive entries are paired.
pub fn configuration_match<R: Rng + ?Sized>(degrees: &[usize], rng: &mut R) -> Result<Multigraph> {
    let total: usize = degrees.iter().sum();
    if total % 2 == 1 {
        return Err(Error::Parity(total as u64));
    }
    let mut points = Vec::with_capacity(total);
    for (v, &d) in degrees.iter().enumerate() {
        points.extend(std::iter::repeat_n(v, d));
    }
    points.shuffle(rng);
    let mut g = Multigraph::with_capacity(degrees.len(), total / 2);
    for pair in points.chunks_exact(2) {
        g.edges.push(Edge::new(pair[0], pair[1]));
    }
    Ok(g)
}

/// Unweighted distances from `source`; multiplicities and loops are ignored.
pub fn bfs_distances(g: &Multigraph, source: usize) -> Result<Vec<u32>> {
    if source >= g.n {
        return Err(Error::domain(format!(
            "source {source} out of range for n = {}",
            g.n
        )));
    }
    Ok(g.adjacency().bfs(source))
}

/// Component label per vertex; labels are numbered by smallest member.
pub fn connected_components(g: &Multigraph) -> Vec<usize> {
    let adj = g.adjacency();
    let mut label = vec![usize::MAX; g.n];
    let mut queue = VecDeque::new();
    let mut next = 0;
    for s in 0..g.n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &w in adj.neighbors(v) {
                if label[w] == usize::MAX {
                    label[w] = next;
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    label
}

/// Sorted vertex set of the largest component; ties go to the component
/// holding the smallest vertex id.
pub fn largest_component(g: &Multigraph) -> Vec<usize> {
    if g.n == 0 {
        return Vec::new();
    }
    let label = connected_components(g);
    let count = label.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; count];
    for &l in &label {
        sizes[l] += 1;
    }
    // labels follow smallest member, so the first maximum wins ties
    let best = (0..count).fold(0, |best, l| if sizes[l] > sizes[best] { l } else { best });
    (0..g.n).filter(|&v| label[v] == best).collect()
}

/// Writes the edge-list format: `n m`, then one `u v` line per edge with
/// `u <= v`, special loops marked `u u s`.
pub fn serialize<W: Write>(g: &Multigraph, sink: &mut W) -> Result<()> {
    writeln!(sink, "{} {}", g.n, g.edges.len())?;
    for e in &g.edges {
        if e.special {
            writeln!(sink, "{} {} s", e.u, e.v)?;
        } else {
            writeln!(sink, "{} {}", e.u, e.v)?;
        }
    }
    Ok(())
}

pub fn to_edge_list_string(g: &Multigraph) -> String {
    let mut buf = Vec::new();
    serialize(g, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("edge list is ASCII")
}

pub fn deserialize<R: BufRead>(source: R) -> Result<Multigraph> {
    let mut lines = source.lines().enumerate().map(|(i, l)| (i + 1, l));
    let parse_err = |line: usize, message: String| Error::Parse { line, message };

    let (line_no, header) = loop {
        match lines.next() {
            Some((i, l)) => {
                let l = l?;
                if !l.trim().is_empty() {
                    break (i, l);
                }
            }
            None => return Err(parse_err(1, "missing header line \"n m\"".into())),
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(parse_err(
            line_no,
            format!("expected header \"n m\", got {header:?}"),
        ));
    }
    let parse_num = |s: &str, line: usize, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| parse_err(line, format!("invalid {what} {s:?}")))
    };
    let n = parse_num(fields[0], line_no, "vertex count")?;
    let m = parse_num(fields[1], line_no, "edge count")?;

    let mut g = Multigraph::with_capacity(n, m);
    for (i, l) in lines.by_ref() {
        let l = l?;
        let trimmed = l.trim();
        if trimmed.is_empty() {
            continue;
        }
        let f: Vec<&str> = trimmed.split_whitespace().collect();
        let (u, v, special) = match f.as_slice() {
            [a, b] => (
                parse_num(a, i, "vertex")?,
                parse_num(b, i, "vertex")?,
                false,
            ),
            [a, b, "s"] => (parse_num(a, i, "vertex")?, parse_num(b, i, "vertex")?, true),
            _ => {
                return Err(parse_err(
                    i,
                    format!("expected \"u v\" or \"u u s\", got {trimmed:?}"),
                ))
            }
        };
        if u >= n || v >= n {
            return Err(parse_err(i, format!("vertex out of range for n = {n}")));
        }
        if special {
            if u != v {
                return Err(parse_err(
                    i,
                    "special marker is only valid on a loop".into(),
                ));
            }
            g.edges.push(Edge::special_loop(u));
        } else {
            g.edges.push(Edge::new(u, v));
        }
        if g.edges.len() > m {
            return Err(parse_err(i, format!("more than the declared {m} edges")));
        }
    }
    if g.edges.len() != m {
        return Err(parse_err(
            line_no,
            format!("header declares {m} edges but {} were read", g.edges.len()),
        ));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream;

    #[test]
    fn degree_convention() {
        let mut g = Multigraph::new(5);
        g.add_edge(0, 1);
        g.add_edge(4, 4);
        g.add_special_loop(3);
        assert_eq!(g.degrees(), vec![1, 1, 0, 1, 2]);
        assert_eq!(g.degree_sum(), 5);
        let adj = g.adjacency();
        for v in 0..5 {
            assert_eq!(adj.degree(v), g.degrees()[v]);
        }
        assert_eq!(g.ordinary_adjacency().degree(3), 0);
    }

    #[test]
    fn trivial_matchings() {
        let mut rng = stream::seeded(0);
        let g = configuration_match(&[1, 1], &mut rng).unwrap();
        assert_eq!(g.edges(), &[Edge::new(0, 1)]);
        let g = configuration_match(&[2], &mut rng).unwrap();
        assert_eq!(g.edges(), &[Edge::new(0, 0)]);
        assert!(matches!(
            configuration_match(&[1, 2], &mut rng),
            Err(Error::Parity(3))
        ));
        assert_eq!(configuration_match(&[], &mut rng).unwrap().edge_count(), 0);
    }

    #[test]
    fn matching_conserves_degrees() {
        let mut rng = stream::seeded(1);
        let degrees = [3, 1, 4, 0, 2, 2];
        for _ in 0..100 {
            let g = configuration_match(&degrees, &mut rng).unwrap();
            assert_eq!(g.degrees(), degrees);
        }
    }

    #[test]
    fn bfs_on_path_and_isolated_vertex() {
        let g = Multigraph::from_pairs(5, &[(0, 1), (1, 2), (2, 3), (1, 2), (3, 3)]).unwrap();
        let d = bfs_distances(&g, 0).unwrap();
        assert_eq!(&d[..4], &[0, 1, 2, 3]);
        assert_eq!(d[4], UNREACHABLE);
        assert!(bfs_distances(&g, 5).is_err());
    }

    #[test]
    fn largest_component_tie_breaks() {
        let g = Multigraph::new(5);
        assert_eq!(connected_components(&g), vec![0, 1, 2, 3, 4]);
        assert_eq!(largest_component(&g), vec![0]);
        let g =
            Multigraph::from_pairs(6, &[(3, 4), (4, 5), (5, 3), (0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(largest_component(&g), vec![0, 1, 2]);
        assert!(largest_component(&Multigraph::new(0)).is_empty());
    }

    #[test]
    fn edge_list_round_trips() {
        let g = Multigraph::new(0);
        assert_eq!(to_edge_list_string(&g), "0 0\n");
        assert_eq!(deserialize("0 0\n".as_bytes()).unwrap(), g);

        let text = "5 3\n4 4\n4 4 s\n1 3\n";
        let g = deserialize(text.as_bytes()).unwrap();
        assert_eq!(g.degrees()[4], 3);
        assert_eq!(to_edge_list_string(&g), text);
        // endpoints are normalised on read
        let g = deserialize("3 1\n2 0\n".as_bytes()).unwrap();
        assert_eq!(to_edge_list_string(&g), "3 1\n0 2\n");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let line_of = |text: &str| match deserialize(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(line_of(""), 1);
        assert_eq!(line_of("3\n"), 1);
        assert_eq!(line_of("3 2\n0 1\n0 x\n"), 3);
        assert_eq!(line_of("3 1\n0 5\n"), 2);
        assert_eq!(line_of("3 1\n0 1 s\n"), 2);
        assert_eq!(line_of("3 1\n0 1\n1 2\n"), 3);
        assert_eq!(line_of("3 2\n0 1\n"), 1);
    }

    #[test]
    fn induced_subgraph_relabels() {
        let mut g = Multigraph::from_pairs(4, &[(0, 1), (1, 2), (2, 3), (3, 3)]).unwrap();
        g.add_special_loop(2);
        let sub = g.induced_subgraph(&[3, 2]);
        assert_eq!(sub.vertex_count(), 2);
        let mut edges = sub.edges().to_vec();
        edges.sort();
        assert_eq!(
            edges,
            vec![Edge::new(0, 0), Edge::new(0, 1), Edge::special_loop(1)]
        );
    }
}
