//! Measurements on decomposed graphs: 2-paths, distances, expansion and
//! lazy-walk mixing.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decompose::{Bush, CoreDecomposition};
use crate::error::{Error, Result};
use crate::multigraph::{largest_component, Adjacency, Multigraph, UNREACHABLE};
use crate::stats::quantile_sorted;

/// Largest kernel handled by the exhaustive isoperimetric search.
pub const ISOPERIMETRIC_MAX_VERTICES: usize = 22;
/// Largest graph accepted by [`mixing_time_exact`].
pub const MIXING_MAX_VERTICES: usize = 5000;
/// Above this size mixing starts are subsampled.
pub const MIXING_ALL_STARTS_MAX: usize = 500;
pub const MIXING_RANDOM_STARTS: usize = 16;
pub const MIXING_STEP_CAP: u64 = 5_000_000;
pub const DEFAULT_DISTANCE_PAIRS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub component_size: usize,
    pub core_size: usize,
    pub stripped_cycle_vertex_count: usize,
    pub kernel_vertices: usize,
    pub kernel_edges: usize,
    /// 0 when the kernel has no edges.
    pub max_two_path: usize,
    pub diameter: Option<u32>,
    /// Set when `diameter` came from the double-sweep lower bound.
    pub diameter_lower_bound: bool,
    pub typical_kernel_distance_mean: Option<f64>,
    pub kernel_max_distance: Option<u32>,
    pub isoperimetric_number: Option<f64>,
    pub mixing_time: Option<u64>,
    /// Set when `mixing_time` used the worst-start subsample.
    pub mixing_time_lower_bound: bool,
    pub bush_size_max: usize,
    /// Core vertices of core-degree exactly 2.
    pub core_degree_two: usize,
}

/// Metric names accepted by the harness, in record order.
pub const METRICS: [&str; 13] = [
    "component_size",
    "core_size",
    "stripped_cycle_vertex_count",
    "kernel_vertices",
    "kernel_edges",
    "max_two_path",
    "diameter",
    "typical_kernel_distance_mean",
    "kernel_max_distance",
    "isoperimetric_number",
    "mixing_time",
    "bush_size_max",
    "core_degree_two",
];

pub fn is_metric(name: &str) -> bool {
    METRICS.contains(&name)
}

impl ObservableRecord {
    pub const CSV_HEADER: &'static str = "component_size,core_size,stripped_cycle_vertex_count,kernel_vertices,\
kernel_edges,max_two_path,diameter,diameter_lower_bound,typical_kernel_distance_mean,kernel_max_distance,\
isoperimetric_number,mixing_time,mixing_time_lower_bound,bush_size_max,core_degree_two";

    /// Value of a named metric, `None` if it was not measured.
    pub fn metric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "component_size" => self.component_size as f64,
            "core_size" => self.core_size as f64,
            "stripped_cycle_vertex_count" => self.stripped_cycle_vertex_count as f64,
            "kernel_vertices" => self.kernel_vertices as f64,
            "kernel_edges" => self.kernel_edges as f64,
            "max_two_path" => self.max_two_path as f64,
            "diameter" => f64::from(self.diameter?),
            "typical_kernel_distance_mean" => self.typical_kernel_distance_mean?,
            "kernel_max_distance" => f64::from(self.kernel_max_distance?),
            "isoperimetric_number" => self.isoperimetric_number?,
            "mixing_time" => self.mixing_time? as f64,
            "bush_size_max" => self.bush_size_max as f64,
            "core_degree_two" => self.core_degree_two as f64,
            _ => return None,
        })
    }

    pub fn csv_row(&self) -> String {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let mut s = String::new();
        write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.component_size,
            self.core_size,
            self.stripped_cycle_vertex_count,
            self.kernel_vertices,
            self.kernel_edges,
            self.max_two_path,
            opt(self.diameter),
            self.diameter_lower_bound,
            opt(self.typical_kernel_distance_mean),
            opt(self.kernel_max_distance),
            opt(self.isoperimetric_number),
            opt(self.mixing_time),
            self.mixing_time_lower_bound,
            self.bush_size_max,
            self.core_degree_two
        )
        .expect("writing to a String cannot fail");
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiameterMode {
    #[default]
    Off,
    Exact,
    Fast,
}

/// Which of the costlier observables to compute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserveOptions {
    pub diameter: DiameterMode,
    pub typical_distance_pairs: Option<usize>,
    pub kernel_max_distance: bool,
    pub isoperimetric: bool,
    pub mixing: bool,
}

impl Default for ObserveOptions {
    fn default() -> Self {
        ObserveOptions {
            diameter: DiameterMode::Off,
            typical_distance_pairs: None,
            kernel_max_distance: false,
            isoperimetric: false,
            mixing: false,
        }
    }
}

impl ObserveOptions {
    /// Options covering the named metrics.
    pub fn for_metrics<S: AsRef<str>>(metrics: &[S]) -> Self {
        let has = |m: &str| metrics.iter().any(|x| x.as_ref() == m);
        ObserveOptions {
            diameter: if has("diameter") {
                DiameterMode::Exact
            } else {
                DiameterMode::Off
            },
            typical_distance_pairs: has("typical_kernel_distance_mean")
                .then_some(DEFAULT_DISTANCE_PAIRS),
            kernel_max_distance: has("kernel_max_distance"),
            isoperimetric: has("isoperimetric_number"),
            mixing: has("mixing_time"),
        }
    }

    pub fn all() -> Self {
        ObserveOptions {
            diameter: DiameterMode::Exact,
            typical_distance_pairs: Some(DEFAULT_DISTANCE_PAIRS),
            kernel_max_distance: true,
            isoperimetric: true,
            mixing: true,
        }
    }
}

/// Measures `g` given its decomposition `d`.
///
/// Distance observables are taken inside the largest component of `g` (the
/// whole graph whenever it is connected). Isoperimetric numbers are only
/// computed for kernels of at most 22 vertices and mixing times for graphs
/// of at most 5000 vertices; otherwise those fields stay empty.
pub fn observe<R: Rng + ?Sized>(
    g: &Multigraph,
    d: &CoreDecomposition,
    options: &ObserveOptions,
    rng: &mut R,
) -> Result<ObservableRecord> {
    let mut record = ObservableRecord {
        component_size: g.vertex_count(),
        core_size: d.core_vertices.len(),
        stripped_cycle_vertex_count: d.stripped_cycle_vertex_count(),
        kernel_vertices: d.kernel.vertex_count(),
        kernel_edges: d.kernel.edge_count(),
        max_two_path: d.path_lengths.iter().copied().max().unwrap_or(0),
        diameter: None,
        diameter_lower_bound: false,
        typical_kernel_distance_mean: None,
        kernel_max_distance: None,
        isoperimetric_number: None,
        mixing_time: None,
        mixing_time_lower_bound: false,
        bush_size_max: d.bushes.iter().map(Bush::size).max().unwrap_or(0),
        core_degree_two: d.core_degree_two_count(),
    };
    let needs_distance = options.diameter != DiameterMode::Off
        || options.typical_distance_pairs.is_some()
        || options.kernel_max_distance;
    if needs_distance && g.vertex_count() > 0 {
        let (giant, connected) = connected_part(g);
        match options.diameter {
            DiameterMode::Off => {}
            DiameterMode::Exact => record.diameter = Some(diameter(&giant)?),
            DiameterMode::Fast => {
                record.diameter = Some(diameter_double_sweep(&giant)?);
                record.diameter_lower_bound = true;
            }
        }
        let (core, kernel) = reachable_kernel(d, connected.as_deref());
        if let Some(pairs) = options.typical_distance_pairs {
            if kernel.len() >= 2 {
                let t = typical_kernel_distance_in(&core, &kernel, pairs, rng)?;
                record.typical_kernel_distance_mean = Some(t.mean);
            }
        }
        if options.kernel_max_distance && kernel.len() >= 2 {
            let kmax = kernel_max_distance_in(&core, &kernel)?;
            record.kernel_max_distance = Some(kmax);
            let core_adj = core.ordinary_adjacency();
            let core_diam = diameter_adj(&core_adj)?;
            if core_diam < kmax || core_diam > kmax + 2 * record.max_two_path as u32 {
                return Err(Error::Structure(format!(
                    "core diameter {core_diam} outside [{kmax}, {kmax} + 2*{}]",
                    record.max_two_path
                )));
            }
        }
        if let Some(diam) = record.diameter {
            if !record.diameter_lower_bound && diam < record.max_two_path.div_ceil(2) as u32 {
                return Err(Error::Structure(format!(
                    "diameter {diam} below half the longest 2-path {}",
                    record.max_two_path
                )));
            }
        }
    }
    if options.isoperimetric
        && d.kernel.vertex_count() <= ISOPERIMETRIC_MAX_VERTICES
        && d.kernel.edge_count() > 0
    {
        record.isoperimetric_number = Some(isoperimetric_number(&d.kernel)?);
    }
    if options.mixing && g.vertex_count() <= MIXING_MAX_VERTICES && g.vertex_count() > 0 {
        let (giant, _) = connected_part(g);
        let m = mixing_time_exact(&giant, 0.25, rng)?;
        record.mixing_time = Some(m.steps);
        record.mixing_time_lower_bound = m.subsampled;
    }
    Ok(record)
}

/// Largest component of `g` and, if `g` was disconnected, its vertex set.
fn connected_part(g: &Multigraph) -> (std::borrow::Cow<'_, Multigraph>, Option<Vec<usize>>) {
    let comp = largest_component(g);
    if comp.len() == g.vertex_count() {
        (std::borrow::Cow::Borrowed(g), None)
    } else {
        let sub = g.induced_subgraph(&comp);
        (std::borrow::Cow::Owned(sub), Some(comp))
    }
}

/// Core restricted to the core component with the most kernel vertices
/// inside `within` (all of the graph when `None`), plus those kernel
/// vertices as labels of the returned core.
fn reachable_kernel(d: &CoreDecomposition, within: Option<&[usize]>) -> (Multigraph, Vec<usize>) {
    let labels = d.kernel_core_labels();
    let core_adj = d.core.ordinary_adjacency();
    let in_scope = |core_label: usize| {
        within.is_none_or(|set| set.binary_search(&d.core_vertices[core_label]).is_ok())
    };
    let n = d.core.vertex_count();
    let mut comp = vec![usize::MAX; n];
    let mut best: Option<(usize, usize)> = None;
    let mut queue = VecDeque::new();
    for &s in &labels {
        if comp[s] != usize::MAX || !in_scope(s) {
            continue;
        }
        comp[s] = s;
        queue.push_back(s);
        let mut count = 0;
        while let Some(v) = queue.pop_front() {
            for &w in core_adj.neighbors(v) {
                if comp[w] == usize::MAX {
                    comp[w] = s;
                    queue.push_back(w);
                }
            }
        }
        for &k in &labels {
            if comp[k] == s {
                count += 1;
            }
        }
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((s, count));
        }
    }
    let Some((root, _)) = best else {
        return (Multigraph::new(0), Vec::new());
    };
    if labels.iter().all(|&k| comp[k] == root) && (0..n).all(|v| comp[v] == root) {
        return (d.core.clone(), labels);
    }
    let keep: Vec<usize> = (0..n).filter(|&v| comp[v] == root).collect();
    let sub = d.core.induced_subgraph(&keep);
    let kernel = labels
        .iter()
        .filter(|&&k| comp[k] == root)
        .map(|&k| keep.binary_search(&k).expect("kernel vertex kept"))
        .collect();
    (sub, kernel)
}

/// Longest 2-path behind a kernel edge.
pub fn max_two_path(d: &CoreDecomposition) -> Result<usize> {
    d.path_lengths
        .iter()
        .copied()
        .max()
        .ok_or(Error::EmptyKernel)
}

/// Number and total length of the disjoint cycles stripped from the core.
pub fn cycle_census(d: &CoreDecomposition) -> (usize, usize) {
    (d.stripped_cycles.len(), d.stripped_cycle_vertex_count())
}

fn check_connected(adj: &Adjacency) -> Result<()> {
    if adj.vertex_count() == 0 {
        return Ok(());
    }
    if adj.bfs(0).contains(&UNREACHABLE) {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// BFS recording parents; returns (dist, parent, farthest vertex).
fn bfs_tree(adj: &Adjacency, source: usize) -> (Vec<u32>, Vec<usize>, usize) {
    let n = adj.vertex_count();
    let mut dist = vec![UNREACHABLE; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    let mut last = source;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &w in adj.neighbors(v) {
            if dist[w] == UNREACHABLE {
                dist[w] = dist[v] + 1;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    (dist, parent, last)
}

/// Midpoint of the BFS-tree path from the source to `end`.
fn path_middle(dist: &[u32], parent: &[usize], end: usize) -> usize {
    let mut v = end;
    for _ in 0..dist[end].div_ceil(2) {
        v = parent[v];
    }
    v
}

/// Exact diameter of a connected graph.
///
/// Hanging trees are folded into pendant paths, then the iterative fringe
/// upper bound scheme runs on what is left: BFS from a central vertex
/// picked by a 4-sweep, then eccentricities of the BFS levels from the
/// outside in until the lower bound certifies the answer.
pub fn diameter(g: &Multigraph) -> Result<u32> {
    diameter_adj(&g.ordinary_adjacency())
}

fn diameter_adj(adj: &Adjacency) -> Result<u32> {
    let n = adj.vertex_count();
    if n == 0 {
        return Ok(0);
    }
    check_connected(adj)?;
    // Peel the hanging trees, keeping for each vertex the height of what
    // was peeled into it and the longest path seen inside a tree.
    let mut deg: Vec<usize> = (0..n).map(|v| adj.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut height = vec![0u32; n];
    let mut tree_best = 0;
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    while let Some(x) = queue.pop_front() {
        removed[x] = true;
        for &w in adj.neighbors(x) {
            if !removed[w] {
                tree_best = tree_best.max(height[w] + height[x] + 1);
                height[w] = height[w].max(height[x] + 1);
                deg[w] -= 1;
                if deg[w] == 1 {
                    queue.push_back(w);
                }
            }
        }
    }
    let core: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    if core.is_empty() {
        return Ok(tree_best);
    }
    // Paths leaving a tree pass through its root, so each tree can be
    // replaced by a pendant path as long as its height.
    let mut label = vec![usize::MAX; n];
    for (i, &v) in core.iter().enumerate() {
        label[v] = i;
    }
    let mut reduced = Multigraph::new(core.len());
    for &v in &core {
        for &w in adj.neighbors(v) {
            if label[w] != usize::MAX && w > v {
                reduced.add_edge(label[v], label[w]);
            }
        }
        let mut prev = label[v];
        for _ in 0..height[v] {
            let t = reduced.add_vertices(1);
            reduced.add_edge(prev, t);
            prev = t;
        }
    }
    Ok(tree_best.max(ifub(&reduced.ordinary_adjacency())))
}

/// Iterative fringe upper bound on a connected graph.
fn ifub(adj: &Adjacency) -> u32 {
    let n = adj.vertex_count();
    let start = (0..n)
        .max_by_key(|&v| (adj.degree(v), std::cmp::Reverse(v)))
        .expect("n > 0");
    let mut lb = 0;
    let (_, _, a1) = bfs_tree(adj, start);
    let (d1, p1, b1) = bfs_tree(adj, a1);
    lb = lb.max(d1[b1]);
    let r2 = path_middle(&d1, &p1, b1);
    let (_, _, a2) = bfs_tree(adj, r2);
    let (d2, p2, b2) = bfs_tree(adj, a2);
    lb = lb.max(d2[b2]);
    let center = path_middle(&d2, &p2, b2);

    let (dist, _, far) = bfs_tree(adj, center);
    let mut i = dist[far];
    lb = lb.max(i);
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); i as usize + 1];
    for v in 0..n {
        levels[dist[v] as usize].push(v);
    }
    let mut scratch = vec![UNREACHABLE; n];
    let mut queue = VecDeque::new();
    while i > 0 && 2 * i > lb {
        let mut bi = 0;
        for &v in &levels[i as usize] {
            let (ecc, _) = adj.bfs_into(v, &mut scratch, &mut queue);
            bi = bi.max(ecc);
        }
        lb = lb.max(bi);
        if lb > 2 * (i - 1) {
            return lb;
        }
        i -= 1;
    }
    lb
}

/// Diameter as the maximum eccentricity over every BFS source.
pub fn diameter_all_pairs(g: &Multigraph) -> Result<u32> {
    let adj = g.ordinary_adjacency();
    check_connected(&adj)?;
    let mut dist = vec![UNREACHABLE; adj.vertex_count()];
    let mut queue = VecDeque::new();
    Ok((0..adj.vertex_count())
        .map(|s| adj.bfs_into(s, &mut dist, &mut queue).0)
        .max()
        .unwrap_or(0))
}

/// Double-sweep lower bound on the diameter.
pub fn diameter_double_sweep(g: &Multigraph) -> Result<u32> {
    let adj = g.ordinary_adjacency();
    if adj.vertex_count() == 0 {
        return Ok(0);
    }
    check_connected(&adj)?;
    let (_, _, a) = bfs_tree(&adj, 0);
    let (d, _, b) = bfs_tree(&adj, a);
    Ok(d[b])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSample {
    pub pairs: usize,
    pub mean: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

/// Distances in the 2-core between `pairs` uniform pairs of distinct
/// kernel vertices.
pub fn typical_kernel_distance<R: Rng + ?Sized>(
    d: &CoreDecomposition,
    pairs: usize,
    rng: &mut R,
) -> Result<DistanceSample> {
    typical_kernel_distance_in(&d.core, &d.kernel_core_labels(), pairs, rng)
}

fn typical_kernel_distance_in<R: Rng + ?Sized>(
    core: &Multigraph,
    kernel: &[usize],
    pairs: usize,
    rng: &mut R,
) -> Result<DistanceSample> {
    if kernel.len() < 2 {
        return Err(Error::Size(format!(
            "need two kernel vertices, have {}",
            kernel.len()
        )));
    }
    if pairs == 0 {
        return Err(Error::domain("pair count must be positive"));
    }
    let k = kernel.len();
    let mut sampled: Vec<(usize, usize)> = (0..pairs)
        .map(|_| {
            let a = rng.random_range(0..k);
            let mut b = rng.random_range(0..k - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        })
        .collect();
    sampled.sort_unstable();
    let adj = core.ordinary_adjacency();
    let mut dist = vec![UNREACHABLE; adj.vertex_count()];
    let mut queue = VecDeque::new();
    let mut values = Vec::with_capacity(pairs);
    let mut current = usize::MAX;
    for (a, b) in sampled {
        if a != current {
            adj.bfs_into(kernel[a], &mut dist, &mut queue);
            current = a;
        }
        let x = dist[kernel[b]];
        if x == UNREACHABLE {
            return Err(Error::Disconnected);
        }
        values.push(f64::from(x));
    }
    values.sort_by(f64::total_cmp);
    Ok(DistanceSample {
        pairs,
        mean: values.iter().sum::<f64>() / values.len() as f64,
        q25: quantile_sorted(&values, 0.25),
        median: quantile_sorted(&values, 0.5),
        q75: quantile_sorted(&values, 0.75),
    })
}

/// Largest 2-core distance between two kernel vertices.
pub fn kernel_max_distance(d: &CoreDecomposition) -> Result<u32> {
    kernel_max_distance_in(&d.core, &d.kernel_core_labels())
}

fn kernel_max_distance_in(core: &Multigraph, kernel: &[usize]) -> Result<u32> {
    if kernel.len() < 2 {
        return Err(Error::Size(format!(
            "need two kernel vertices, have {}",
            kernel.len()
        )));
    }
    let adj = core.ordinary_adjacency();
    let mut dist = vec![UNREACHABLE; adj.vertex_count()];
    let mut queue = VecDeque::new();
    let mut best = 0;
    for &s in kernel {
        adj.bfs_into(s, &mut dist, &mut queue);
        for &t in kernel {
            if dist[t] == UNREACHABLE {
                return Err(Error::Disconnected);
            }
            best = best.max(dist[t]);
        }
    }
    Ok(best)
}

/// Exact isoperimetric number by Gray-code enumeration of vertex subsets.
///
/// Volume is the degree sum (an ordinary loop adds 2, a special loop 1);
/// loops never cross the boundary. Subsets of zero volume are skipped. A
/// disconnected graph yields 0.
pub fn isoperimetric_number(k: &Multigraph) -> Result<f64> {
    let n = k.vertex_count();
    if n > ISOPERIMETRIC_MAX_VERTICES {
        return Err(Error::Size(format!(
            "isoperimetric search is limited to {ISOPERIMETRIC_MAX_VERTICES} vertices, got {n}"
        )));
    }
    if k.edge_count() == 0 {
        return Err(Error::EmptyKernel);
    }
    let deg = k.degrees();
    let half_volume = k.degree_sum() as f64 / 2.0;
    let mut mult = vec![vec![0i64; n]; n];
    for e in k.edges().iter().filter(|e| !e.is_loop()) {
        mult[e.u][e.v] += 1;
        mult[e.v][e.u] += 1;
    }
    let mut inside = vec![false; n];
    let mut volume = 0i64;
    let mut boundary = 0i64;
    let mut best = f64::INFINITY;
    for step in 1u64..(1u64 << n) {
        let v = step.trailing_zeros() as usize;
        let sign = if inside[v] { -1 } else { 1 };
        let (mut to_in, mut to_out) = (0i64, 0i64);
        for w in 0..n {
            if w != v {
                if inside[w] {
                    to_in += mult[v][w];
                } else {
                    to_out += mult[v][w];
                }
            }
        }
        // adding v: its edges into S leave the boundary, edges out join it
        boundary += sign * (to_out - to_in);
        volume += sign * deg[v] as i64;
        inside[v] = !inside[v];
        if volume > 0 && volume as f64 <= half_volume {
            best = best.min(boundary as f64 / volume as f64);
        }
    }
    Ok(if best.is_finite() { best } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixingTime {
    pub steps: u64,
    /// True when only a subsample of starting vertices was examined, which
    /// makes `steps` a lower bound.
    pub subsampled: bool,
}

/// Lazy random walk mixing time by exact distribution evolution.
///
/// The walk holds with probability 1/2 and otherwise follows a uniform
/// half-edge, so multiplicities count and a loop adds holding mass; the
/// stationary law is proportional to degree. Graphs above 500 vertices use
/// the double-sweep far vertex plus 16 random starts.
pub fn mixing_time_exact<R: Rng + ?Sized>(
    g: &Multigraph,
    tv_threshold: f64,
    rng: &mut R,
) -> Result<MixingTime> {
    let n = g.vertex_count();
    if n > MIXING_MAX_VERTICES {
        return Err(Error::Size(format!(
            "mixing time is limited to {MIXING_MAX_VERTICES} vertices, got {n}"
        )));
    }
    if !(tv_threshold > 0.0 && tv_threshold < 1.0) {
        return Err(Error::domain(format!(
            "TV threshold must lie in (0, 1), got {tv_threshold}"
        )));
    }
    if n <= 1 {
        return Ok(MixingTime {
            steps: 0,
            subsampled: false,
        });
    }
    let adj = g.adjacency();
    check_connected(&adj)?;
    let total = g.degree_sum() as f64;
    let pi: Vec<f64> = (0..n).map(|v| adj.degree(v) as f64 / total).collect();
    let (starts, subsampled) = if n <= MIXING_ALL_STARTS_MAX {
        ((0..n).collect::<Vec<_>>(), false)
    } else {
        let (_, _, a) = bfs_tree(&adj, 0);
        let (_, _, far) = bfs_tree(&adj, a);
        let mut s = vec![far];
        s.extend((0..MIXING_RANDOM_STARTS).map(|_| rng.random_range(0..n)));
        (s, true)
    };
    let mut steps = 0;
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for s in starts {
        x.fill(0.0);
        x[s] = 1.0;
        let mut t = 0u64;
        while tv(&x, &pi) > tv_threshold {
            if t >= MIXING_STEP_CAP {
                return Err(Error::Resource(format!(
                    "mixing not reached within {MIXING_STEP_CAP} steps"
                )));
            }
            lazy_step(&adj, &x, &mut y);
            std::mem::swap(&mut x, &mut y);
            t += 1;
        }
        steps = steps.max(t);
    }
    Ok(MixingTime { steps, subsampled })
}

pub(crate) fn lazy_step(adj: &Adjacency, x: &[f64], y: &mut [f64]) {
    for (v, out) in y.iter_mut().enumerate() {
        *out = 0.5 * x[v];
    }
    for (v, &mass) in x.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let share = 0.5 * mass / adj.degree(v) as f64;
        for &w in adj.neighbors(v) {
            y[w] += share;
        }
    }
}

/// Total variation distance, half the L1 norm.
pub fn tv(x: &[f64], y: &[f64]) -> f64 {
    0.5 * x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::stream;

    fn theta(lengths: &[usize]) -> Multigraph {
        let mut g = Multigraph::new(2);
        for &len in lengths {
            let mut prev = 0;
            for _ in 1..len {
                let v = g.add_vertices(1);
                g.add_edge(prev, v);
                prev = v;
            }
            g.add_edge(prev, 1);
        }
        g
    }

    fn path(n: usize) -> Multigraph {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Multigraph::from_pairs(n, &pairs).unwrap()
    }

    fn cycle(n: usize) -> Multigraph {
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Multigraph::from_pairs(n, &pairs).unwrap()
    }

    #[test]
    fn two_paths() {
        let d = decompose(&theta(&[2, 3, 4])).unwrap();
        assert_eq!(max_two_path(&d).unwrap(), 4);
        let d = decompose(&theta(&[1, 1, 1])).unwrap();
        assert_eq!(max_two_path(&d).unwrap(), 1);
        let d = decompose(&cycle(5)).unwrap();
        assert!(matches!(max_two_path(&d), Err(Error::EmptyKernel)));
        assert_eq!(cycle_census(&d), (1, 5));
        assert_eq!(
            cycle_census(&decompose(&theta(&[2, 3, 4])).unwrap()),
            (0, 0)
        );
    }

    #[test]
    fn diameters() {
        assert_eq!(diameter(&path(5)).unwrap(), 4);
        assert_eq!(diameter(&cycle(6)).unwrap(), 3);
        assert_eq!(diameter_all_pairs(&cycle(7)).unwrap(), 3);
        assert_eq!(diameter_double_sweep(&path(9)).unwrap(), 8);
        let split = Multigraph::from_pairs(3, &[(0, 1)]).unwrap();
        assert!(matches!(diameter(&split), Err(Error::Disconnected)));
        assert_eq!(diameter(&Multigraph::new(1)).unwrap(), 0);
    }

    #[test]
    fn kernel_distances() {
        let d = decompose(&theta(&[2, 3, 4])).unwrap();
        let t = typical_kernel_distance(&d, 50, &mut stream::seeded(1)).unwrap();
        assert_eq!(t.mean, 2.0);
        assert_eq!(kernel_max_distance(&d).unwrap(), 2);
        let d = decompose(&theta(&[7, 3, 9])).unwrap();
        assert_eq!(
            typical_kernel_distance(&d, 10, &mut stream::seeded(1))
                .unwrap()
                .median,
            3.0
        );
        let d = decompose(&theta(&[5, 9, 11])).unwrap();
        assert_eq!(kernel_max_distance(&d).unwrap(), 5);
    }

    #[test]
    fn isoperimetric_examples() {
        let k2 = Multigraph::from_pairs(2, &[(0, 1)]).unwrap();
        assert_eq!(isoperimetric_number(&k2).unwrap(), 1.0);
        let triple = Multigraph::from_pairs(2, &[(0, 1), (0, 1), (0, 1)]).unwrap();
        assert_eq!(isoperimetric_number(&triple).unwrap(), 1.0);
        let k4 =
            Multigraph::from_pairs(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert!((isoperimetric_number(&k4).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let split = Multigraph::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(isoperimetric_number(&split).unwrap(), 0.0);
        let looped = Multigraph::from_pairs(2, &[(0, 1), (0, 0)]).unwrap();
        // {1}: boundary 1, volume 1
        assert_eq!(isoperimetric_number(&looped).unwrap(), 1.0);
        assert!(matches!(
            isoperimetric_number(&Multigraph::new(23)),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn mixing_examples() {
        let mut rng = stream::seeded(0);
        let k2 = Multigraph::from_pairs(2, &[(0, 1)]).unwrap();
        assert_eq!(mixing_time_exact(&k2, 0.25, &mut rng).unwrap().steps, 1);
        let a = mixing_time_exact(&cycle(16), 0.25, &mut rng).unwrap().steps as f64;
        let b = mixing_time_exact(&cycle(32), 0.25, &mut rng).unwrap().steps as f64;
        assert!((3.0..=5.0).contains(&(b / a)), "{a} {b}");
        let loose = mixing_time_exact(&cycle(20), 0.4, &mut rng).unwrap().steps;
        let tight = mixing_time_exact(&cycle(20), 0.1, &mut rng).unwrap().steps;
        assert!(loose <= tight);
        let split = Multigraph::from_pairs(3, &[(0, 1)]).unwrap();
        assert!(matches!(
            mixing_time_exact(&split, 0.25, &mut rng),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn record_round_trip() {
        let g = theta(&[2, 3, 4]);
        let d = decompose(&g).unwrap();
        let r = observe(&g, &d, &ObserveOptions::all(), &mut stream::seeded(4)).unwrap();
        assert_eq!(r.kernel_vertices, 2);
        assert_eq!(r.kernel_edges, 3);
        assert_eq!(r.max_two_path, 4);
        assert_eq!(r.diameter, Some(3));
        assert_eq!(r.kernel_max_distance, Some(2));
        assert_eq!(r.core_degree_two, 6);
        assert_eq!(r.isoperimetric_number, Some(1.0));
        assert!(r.mixing_time.is_some());
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ObservableRecord>(&json).unwrap(), r);
        let header_cols = ObservableRecord::CSV_HEADER.split(',').count();
        assert_eq!(r.csv_row().split(',').count(), header_cols);
        assert_eq!(r.metric("kernel_edges"), Some(3.0));
        assert_eq!(r.metric("nope"), None);
    }
}
