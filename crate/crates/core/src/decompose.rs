//! 2-core peeling, disjoint-cycle stripping, kernel contraction and bush
//! extraction.
//!
//! All structural operations work on ordinary edges only. A special loop is
//! a single dangling half-edge: it never closes a cycle, so it can neither
//! keep a vertex in the 2-core nor extend a 2-path.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::analytic::RootedTree;
use crate::error::{Error, Result};
use crate::multigraph::{connected_components, Multigraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeelOrder {
    Fifo,
    Lifo,
}

/// Tree hanging off a 2-core vertex. `vertices[i]` is the graph id of tree
/// node `i`; node 0 is the core vertex itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bush {
    pub vertices: Vec<usize>,
    pub tree: RootedTree,
}

impl Bush {
    pub fn root(&self) -> usize {
        self.vertices[0]
    }

    pub fn size(&self) -> usize {
        self.vertices.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoreDecomposition {
    /// 2-core vertex ids in the analysed graph, ascending.
    pub core_vertices: Vec<usize>,
    /// Induced 2-core; vertex `i` is `core_vertices[i]`.
    pub core: Multigraph,
    pub stripped_cycles: Vec<usize>,
    pub kernel: Multigraph,
    /// Graph id of each kernel vertex.
    pub kernel_vertices: Vec<usize>,
    /// Length of the 2-path behind each kernel edge, parallel to `kernel.edges()`.
    pub path_lengths: Vec<usize>,
    /// One bush per core vertex, parallel to `core_vertices`.
    pub bushes: Vec<Bush>,
}

/// JSON summary of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub core_size: usize,
    pub stripped_cycle_lengths: Vec<usize>,
    pub kernel_vertices: usize,
    pub kernel_edges: usize,
    pub path_lengths: Vec<usize>,
    pub bush_sizes: Vec<usize>,
}

impl CoreDecomposition {
    pub fn summary(&self) -> DecompositionSummary {
        DecompositionSummary {
            core_size: self.core_vertices.len(),
            stripped_cycle_lengths: self.stripped_cycles.clone(),
            kernel_vertices: self.kernel.vertex_count(),
            kernel_edges: self.kernel.edge_count(),
            path_lengths: self.path_lengths.clone(),
            bush_sizes: self.bushes.iter().map(Bush::size).collect(),
        }
    }

    /// Position of a graph vertex inside `core`, if it is a core vertex.
    pub fn core_label(&self, vertex: usize) -> Option<usize> {
        self.core_vertices.binary_search(&vertex).ok()
    }

    /// Core labels of the kernel vertices.
    pub fn kernel_core_labels(&self) -> Vec<usize> {
        self.kernel_vertices
            .iter()
            .map(|&v| self.core_label(v).expect("kernel vertex lies in the core"))
            .collect()
    }

    pub fn stripped_cycle_vertex_count(&self) -> usize {
        self.stripped_cycles.iter().sum()
    }

    /// Number of core vertices of core-degree exactly 2.
    pub fn core_degree_two_count(&self) -> usize {
        self.core.degrees().iter().filter(|&&d| d == 2).count()
    }

    /// Checks the structural invariants against the analysed graph.
    pub fn verify(&self, g: &Multigraph) -> Result<()> {
        let fail = |msg: String| Err(Error::Structure(msg));
        if let Some(d) = self.kernel.degrees().iter().find(|&&d| d < 3) {
            return fail(format!("kernel vertex of degree {d}"));
        }
        if self.path_lengths.len() != self.kernel.edge_count() {
            return fail("path_lengths is not parallel to kernel edges".into());
        }
        if self.path_lengths.contains(&0) {
            return fail("zero-length 2-path".into());
        }
        let cycle_vertices = self.stripped_cycle_vertex_count();
        let stripped_edges = self.core.edge_count() as isize - cycle_vertices as isize;
        let path_total: usize = self.path_lengths.iter().sum();
        if path_total as isize != stripped_edges {
            return fail(format!(
                "2-path lengths sum to {path_total}, stripped core has {stripped_edges} edges"
            ));
        }
        let stripped_vertices = self.core_vertices.len() - cycle_vertices;
        let expanded =
            self.kernel.vertex_count() + self.path_lengths.iter().map(|l| l - 1).sum::<usize>();
        if expanded != stripped_vertices {
            return fail(format!(
                "kernel re-expands to {expanded} vertices, stripped core has {stripped_vertices}"
            ));
        }
        if self.bushes.len() != self.core_vertices.len() {
            return fail("one bush per core vertex expected".into());
        }
        for (bush, &root) in self.bushes.iter().zip(&self.core_vertices) {
            if bush.root() != root {
                return fail(format!(
                    "bush rooted at {} listed for core vertex {root}",
                    bush.root()
                ));
            }
        }
        let label = connected_components(g);
        let mut with_core = vec![false; g.vertex_count()];
        for &v in &self.core_vertices {
            with_core[label[v]] = true;
        }
        let covered = label.iter().filter(|&&l| with_core[l]).count();
        let bush_total: usize = self.bushes.iter().map(Bush::size).sum();
        if bush_total != covered {
            return fail(format!(
                "bushes cover {bush_total} vertices, core components hold {covered}"
            ));
        }
        Ok(())
    }
}

/// Membership mask of the 2-core under a chosen peeling discipline.
pub fn two_core_mask_with(g: &Multigraph, order: PeelOrder) -> Vec<bool> {
    let adj = g.ordinary_adjacency();
    let n = g.vertex_count();
    let mut deg: Vec<usize> = (0..n).map(|v| adj.degree(v)).collect();
    let mut alive = vec![true; n];
    let mut queued = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for v in 0..n {
        if deg[v] < 2 {
            queued[v] = true;
            queue.push_back(v);
        }
    }
    loop {
        let v = match order {
            PeelOrder::Fifo => queue.pop_front(),
            PeelOrder::Lifo => queue.pop_back(),
        };
        let Some(v) = v else { break };
        alive[v] = false;
        for &w in adj.neighbors(v) {
            if w != v && alive[w] {
                deg[w] -= 1;
                if deg[w] < 2 && !queued[w] {
                    queued[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    alive
}

pub fn two_core_mask(g: &Multigraph) -> Vec<bool> {
    two_core_mask_with(g, PeelOrder::Fifo)
}

/// Vertex set of the 2-core, ascending.
pub fn two_core(g: &Multigraph) -> Vec<usize> {
    mask_to_set(&two_core_mask(g))
}

fn mask_to_set(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(v, &keep)| keep.then_some(v))
        .collect()
}

/// Result of removing bare-cycle components from a 2-core.
#[derive(Debug, Clone, PartialEq)]
pub struct StrippedCore {
    pub graph: Multigraph,
    /// Input label of each vertex of `graph`.
    pub kept: Vec<usize>,
    pub cycle_lengths: Vec<usize>,
}

/// Removes every component in which all vertices have degree exactly 2.
pub fn strip_disjoint_cycles(core: &Multigraph) -> StrippedCore {
    let adj = core.ordinary_adjacency();
    let label = connected_components(core);
    let count = label.iter().max().map_or(0, |m| m + 1);
    let mut is_cycle = vec![true; count];
    let mut sizes = vec![0usize; count];
    for v in 0..core.vertex_count() {
        sizes[label[v]] += 1;
        if adj.degree(v) != 2 {
            is_cycle[label[v]] = false;
        }
    }
    let cycle_lengths = (0..count)
        .filter(|&c| is_cycle[c])
        .map(|c| sizes[c])
        .collect();
    let kept: Vec<usize> = (0..core.vertex_count())
        .filter(|&v| !is_cycle[label[v]])
        .collect();
    let mut graph = core.induced_subgraph(&kept);
    graph = without_special_loops(&graph);
    StrippedCore {
        graph,
        kept,
        cycle_lengths,
    }
}

fn without_special_loops(g: &Multigraph) -> Multigraph {
    if g.special_loop_count() == 0 {
        return g.clone();
    }
    let mut out = Multigraph::with_capacity(g.vertex_count(), g.edge_count());
    for e in g.edges().iter().filter(|e| !e.special) {
        out.add_edge(e.u, e.v);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelContraction {
    pub kernel: Multigraph,
    pub path_lengths: Vec<usize>,
    /// Input label of each kernel vertex.
    pub vertex_map: Vec<usize>,
}

/// Contracts every maximal 2-path of a stripped core into one kernel edge.
pub fn contract_to_kernel(stripped: &Multigraph) -> Result<KernelContraction> {
    let adj = stripped.ordinary_adjacency();
    let n = stripped.vertex_count();
    let mut kernel_id = vec![usize::MAX; n];
    let mut vertex_map = Vec::new();
    for v in 0..n {
        match adj.degree(v) {
            0 | 1 => {
                return Err(Error::Structure(format!(
                    "vertex {v} has degree {} in a 2-core",
                    adj.degree(v)
                )))
            }
            2 => {}
            _ => {
                kernel_id[v] = vertex_map.len();
                vertex_map.push(v);
            }
        }
    }
    let mut kernel = Multigraph::new(vertex_map.len());
    let mut path_lengths = Vec::new();
    let mut used = vec![false; stripped.edge_count()];
    let mut interior_seen = 0usize;
    for (k, &start) in vertex_map.iter().enumerate() {
        for (first, edge) in adj.half_edges(start) {
            if used[edge] {
                continue;
            }
            used[edge] = true;
            let mut length = 1;
            let mut current = first;
            let mut via = edge;
            while kernel_id[current] == usize::MAX {
                interior_seen += 1;
                let (next, next_edge) = adj
                    .half_edges(current)
                    .find(|&(_, e)| e != via)
                    .expect("degree-2 vertex has a second half-edge");
                used[next_edge] = true;
                length += 1;
                current = next;
                via = next_edge;
            }
            kernel.add_edge(k, kernel_id[current]);
            path_lengths.push(length);
        }
    }
    let interior_total = n - vertex_map.len();
    if interior_seen != interior_total {
        return Err(Error::Structure(format!(
            "{} degree-2 vertices lie on bare cycles; strip them before contracting",
            interior_total - interior_seen
        )));
    }
    Ok(KernelContraction {
        kernel,
        path_lengths,
        vertex_map,
    })
}

/// Trees attached to each core vertex, in `core_mask` order.
pub fn extract_bushes(g: &Multigraph, core_mask: &[bool]) -> Result<Vec<Bush>> {
    let adj = g.ordinary_adjacency();
    let mut owner = vec![usize::MAX; g.vertex_count()];
    let mut bushes = Vec::new();
    for root in (0..g.vertex_count()).filter(|&v| core_mask[v]) {
        let mut vertices = vec![root];
        let mut parents = vec![None];
        let mut parent_edge = vec![usize::MAX];
        owner[root] = root;
        let mut next = 0;
        while next < vertices.len() {
            let x = vertices[next];
            for (w, e) in adj.half_edges(x) {
                if e == parent_edge[next] {
                    continue;
                }
                if next == 0 && core_mask[w] {
                    continue;
                }
                if owner[w] != usize::MAX || core_mask[w] {
                    return Err(Error::Structure(format!(
                        "vertex {w} is reachable from core vertex {root} outside the core along a cycle or from another bush"
                    )));
                }
                owner[w] = root;
                vertices.push(w);
                parents.push(Some(next));
                parent_edge.push(e);
            }
            next += 1;
        }
        bushes.push(Bush {
            vertices,
            tree: RootedTree::from_parents(parents)?,
        });
    }
    Ok(bushes)
}

/// Full dissection of `g`: 2-core, stripped cycles, kernel and bushes.
pub fn decompose(g: &Multigraph) -> Result<CoreDecomposition> {
    let mask = two_core_mask(g);
    let core_vertices = mask_to_set(&mask);
    let core = without_special_loops(&g.induced_subgraph(&core_vertices));
    let stripped = strip_disjoint_cycles(&core);
    let contraction = contract_to_kernel(&stripped.graph)?;
    let kernel_vertices = contraction
        .vertex_map
        .iter()
        .map(|&s| core_vertices[stripped.kept[s]])
        .collect();
    let bushes = extract_bushes(g, &mask)?;
    Ok(CoreDecomposition {
        core_vertices,
        core,
        stripped_cycles: stripped.cycle_lengths,
        kernel: contraction.kernel,
        kernel_vertices,
        path_lengths: contraction.path_lengths,
        bushes,
    })
}
