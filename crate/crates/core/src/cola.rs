//! Poisson λ-cells and the cut-off line algorithm.
//!
//! A cell assigns every vertex a Po(λ) number of clones with i.i.d.
//! uniform coordinates in `[0, λ)`. The algorithm sweeps a vertical line
//! leftwards from λ: the clone on top of the stack of light clones is
//! matched to the next unmatched clone the line hits. The line position
//! when the stack first runs dry is Λ_C; the vertices still holding at
//! least two unmatched clones at that moment form the 2-core of the
//! resulting multigraph.
//!
//! Phase `j` runs while the line is in `[(1−β)^j λ, (1−β)^{j−1} λ)`. Phase
//! boundaries only affect the active/passive labels, which are consulted
//! after Λ_C, so Λ_C does not depend on β.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{sample_poisson, theta_lambda};
use crate::error::{Error, Result};
use crate::multigraph::Multigraph;

/// Random tries for an active clone before falling back to a full scan.
const ACTIVE_REJECTION_TRIES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaCell {
    lambda: f64,
    offsets: Vec<usize>,
    /// Clone coordinates, grouped by vertex, descending within a vertex.
    coords: Vec<f64>,
}

impl LambdaCell {
    /// Builds a cell from per-vertex clone coordinates.
    pub fn from_positions(lambda: f64, positions: Vec<Vec<f64>>) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::domain(format!(
                "cell width must be finite and >= 0, got {lambda}"
            )));
        }
        let mut offsets = Vec::with_capacity(positions.len() + 1);
        let mut coords = Vec::new();
        offsets.push(0);
        for mut clones in positions {
            if let Some(x) = clones.iter().find(|x| !(**x >= 0.0 && **x < lambda)) {
                return Err(Error::domain(format!(
                    "clone coordinate {x} outside [0, {lambda})"
                )));
            }
            clones.sort_by(|a, b| b.total_cmp(a));
            coords.extend(clones);
            offsets.push(coords.len());
        }
        Ok(LambdaCell {
            lambda,
            offsets,
            coords,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn clone_count(&self) -> usize {
        self.coords.len()
    }

    /// Clone coordinates of `v`, descending.
    pub fn positions(&self, v: usize) -> &[f64] {
        &self.coords[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Global ids of the clones of `v`.
    pub fn clones_of(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    pub fn coordinate(&self, clone: usize) -> f64 {
        self.coords[clone]
    }

    pub fn owners(&self) -> Vec<usize> {
        let mut owner = vec![0; self.coords.len()];
        for v in 0..self.vertex_count() {
            owner[self.clones_of(v)].fill(v);
        }
        owner
    }
}

/// Poisson λ-cell on `n` vertices.
pub fn generate_cell<R: Rng + ?Sized>(n: usize, lambda: f64, rng: &mut R) -> Result<LambdaCell> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::domain(format!(
            "cell width must be finite and >= 0, got {lambda}"
        )));
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut coords = Vec::new();
    offsets.push(0);
    for _ in 0..n {
        let count = sample_poisson(lambda, rng)? as usize;
        let start = coords.len();
        coords.extend((0..count).map(|_| rng.random::<f64>() * lambda));
        coords[start..].sort_by(|a, b| b.total_cmp(a));
        offsets.push(coords.len());
    }
    Ok(LambdaCell {
        lambda,
        offsets,
        coords,
    })
}

/// β bracket `[(1−θ_λ)/3, (1−θ_λ)/2]` for λ > 1.
pub fn beta_bracket(lambda: f64) -> Result<(f64, f64)> {
    let theta = theta_lambda(lambda)?;
    Ok(((1.0 - theta) / 3.0, (1.0 - theta) / 2.0))
}

/// Lower end of the β bracket, or 1/3 when λ ≤ 1.
pub fn default_beta(lambda: f64) -> f64 {
    beta_bracket(lambda).map_or(1.0 / 3.0, |(lo, _)| lo)
}

/// Per-phase counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub phase: usize,
    /// Line position at which the phase ends, (1−β)^j λ.
    pub boundary: f64,
    /// Active unmatched clones at phase start (N_j).
    pub active: usize,
    /// N_j minus the heavy-clone upper bound H_j; a lower bound on the light clones.
    pub light_lower: i64,
    /// Active clones matched during the phase (M_j).
    pub matched_active: usize,
    /// Whether the phase ended with a passive clone on top of the stack.
    pub ended_on_passive: bool,
    /// Vertices with exactly two clones left of the end boundary and at
    /// least one inside the phase interval (B_j).
    pub transitions: usize,
    pub stack_depth_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColaResult {
    pub lambda: f64,
    pub beta: f64,
    pub lambda_c: f64,
    /// Matched clone pairs in the order they were formed.
    pub matching: Vec<(usize, usize)>,
    /// Line position at each match, parallel to `matching`.
    pub match_positions: Vec<f64>,
    /// Clone turned into a special loop when the clone count is odd.
    pub special: Option<usize>,
    pub phase_trace: Vec<PhaseRecord>,
    /// Unmatched clones at the moment the stack first ran dry.
    pub unmatched_at_lambda_c: Vec<usize>,
    /// Phase in which the stack first ran dry.
    pub lambda_c_phase: usize,
    /// Whether the run went on to match every clone.
    pub completed: bool,
    /// Times the active-clone choice found only passive clones left.
    pub passive_fallbacks: usize,
}

impl ColaResult {
    /// Vertices with at least two unmatched clones at Λ_C.
    pub fn core_at_lambda_c(&self, cell: &LambdaCell) -> Vec<usize> {
        let owner = cell.owners();
        let mut count = vec![0usize; cell.vertex_count()];
        for &c in &self.unmatched_at_lambda_c {
            count[owner[c]] += 1;
        }
        (0..cell.vertex_count())
            .filter(|&v| count[v] >= 2)
            .collect()
    }

    /// Contracts the matching into a multigraph; the special clone becomes
    /// a special loop.
    pub fn to_multigraph(&self, cell: &LambdaCell) -> Multigraph {
        let owner = cell.owners();
        let mut g = Multigraph::with_capacity(cell.vertex_count(), self.matching.len() + 1);
        for &(a, b) in &self.matching {
            g.add_edge(owner[a], owner[b]);
        }
        if let Some(s) = self.special {
            g.add_special_loop(owner[s]);
        }
        g
    }

    /// Trace as CSV with a header line.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("phase,boundary,N_j,L_j_lower,M_j,B_j,stack_depth_max\n");
        for r in &self.phase_trace {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.phase,
                r.boundary,
                r.active,
                r.light_lower,
                r.matched_active,
                r.transitions,
                r.stack_depth_max
            )
            .expect("writing to a String cannot fail");
        }
        out
    }
}

/// "Next unmatched rank at or after i" with path compression.
struct NextUnmatched {
    next: Vec<usize>,
}

impl NextUnmatched {
    fn new(len: usize) -> Self {
        NextUnmatched {
            next: (0..=len).collect(),
        }
    }

    fn remove(&mut self, rank: usize) {
        self.next[rank] = rank + 1;
    }

    fn find(&mut self, rank: usize) -> usize {
        let mut root = rank;
        while self.next[root] != root {
            root = self.next[root];
        }
        let mut i = rank;
        while self.next[i] != root {
            let up = self.next[i];
            self.next[i] = root;
            i = up;
        }
        root
    }
}

/// Unmatched clone set with O(1) removal and uniform access.
struct UnmatchedPool {
    items: Vec<usize>,
    slot: Vec<usize>,
}

impl UnmatchedPool {
    fn new(total: usize) -> Self {
        UnmatchedPool {
            items: (0..total).collect(),
            slot: (0..total).collect(),
        }
    }

    fn remove(&mut self, clone: usize) {
        let i = self.slot[clone];
        let last = *self.items.last().expect("removing from a non-empty pool");
        self.items.swap_remove(i);
        if last != clone {
            self.slot[last] = i;
        }
        self.slot[clone] = usize::MAX;
    }
}

struct Sweep<'a> {
    cell: &'a LambdaCell,
    beta: f64,
    special: Option<usize>,
    owner: Vec<usize>,
    order: Vec<usize>,
    rank: Vec<usize>,
    matched: Vec<bool>,
    unmatched_per_vertex: Vec<usize>,
    next: NextUnmatched,
    pool: UnmatchedPool,
    stack: Vec<usize>,
    line: f64,
    phase: usize,
    passive: Vec<bool>,
    record: PhaseRecord,
    trace: Vec<PhaseRecord>,
    matching: Vec<(usize, usize)>,
    match_positions: Vec<f64>,
}

impl<'a> Sweep<'a> {
    fn new(cell: &'a LambdaCell, beta: f64, special: Option<usize>) -> Self {
        let total = cell.clone_count();
        let owner = cell.owners();
        let mut order: Vec<usize> = (0..total).collect();
        order.sort_by(|&a, &b| cell.coords[b].total_cmp(&cell.coords[a]).then(a.cmp(&b)));
        let mut rank = vec![0; total];
        for (r, &c) in order.iter().enumerate() {
            rank[c] = r;
        }
        let mut unmatched_per_vertex: Vec<usize> = (0..cell.vertex_count())
            .map(|v| cell.clones_of(v).len())
            .collect();
        let mut sweep = Sweep {
            cell,
            beta,
            special,
            owner,
            order,
            rank,
            matched: vec![false; total],
            unmatched_per_vertex: Vec::new(),
            next: NextUnmatched::new(total),
            pool: UnmatchedPool::new(total),
            stack: Vec::new(),
            line: cell.lambda,
            phase: 0,
            passive: vec![false; cell.vertex_count()],
            record: PhaseRecord {
                phase: 0,
                boundary: cell.lambda,
                active: 0,
                light_lower: 0,
                matched_active: 0,
                ended_on_passive: false,
                transitions: 0,
                stack_depth_max: 0,
            },
            trace: Vec::new(),
            matching: Vec::new(),
            match_positions: Vec::new(),
        };
        if let Some(s) = special {
            sweep.retire(s);
            unmatched_per_vertex[sweep.owner[s]] -= 1;
        }
        sweep.unmatched_per_vertex = unmatched_per_vertex;
        // value-oblivious initial order: (vertex id, clone index)
        for v in 0..cell.vertex_count() {
            if sweep.unmatched_per_vertex[v] == 1 {
                let c = sweep.remaining_clone(v);
                sweep.stack.push(c);
            }
        }
        sweep.start_phase();
        sweep
    }

    fn retire(&mut self, clone: usize) {
        self.matched[clone] = true;
        self.next.remove(self.rank[clone]);
        self.pool.remove(clone);
    }

    fn remaining_clone(&self, v: usize) -> usize {
        self.cell
            .clones_of(v)
            .find(|&c| !self.matched[c])
            .expect("vertex has an unmatched clone")
    }

    fn end_boundary(&self) -> f64 {
        self.cell.lambda * (1.0 - self.beta).powi(self.phase as i32)
    }

    /// Opens the next phase with the line at its start boundary.
    fn start_phase(&mut self) {
        self.phase += 1;
        let start = self.line;
        let end = self.end_boundary();
        let mut active = 0usize;
        let mut heavy_bound = 0i64;
        let mut transitions = 0usize;
        for v in 0..self.cell.vertex_count() {
            let mut left = 0usize;
            let mut left_unmatched = 0usize;
            let mut below_end = 0usize;
            let mut inside = 0usize;
            for c in self.cell.clones_of(v) {
                if self.special == Some(c) {
                    continue;
                }
                let x = self.cell.coords[c];
                if x < start {
                    left += 1;
                    if !self.matched[c] {
                        left_unmatched += 1;
                    }
                    if x < end {
                        below_end += 1;
                    } else {
                        inside += 1;
                    }
                }
            }
            let passive = left == 2 && left_unmatched == 2;
            self.passive[v] = passive;
            if !passive {
                active += self.unmatched_per_vertex[v];
            }
            if left > 2 {
                heavy_bound += left as i64;
            }
            if below_end == 2 && inside >= 1 {
                transitions += 1;
            }
        }
        self.record = PhaseRecord {
            phase: self.phase,
            boundary: end,
            active,
            light_lower: active as i64 - heavy_bound,
            matched_active: 0,
            ended_on_passive: false,
            transitions,
            stack_depth_max: self.stack.len(),
        };
    }

    fn close_phase(&mut self, top: Option<usize>) {
        self.record.ended_on_passive = top.is_some_and(|c| self.passive[self.owner[c]]);
        self.trace.push(self.record.clone());
    }

    fn note_depth(&mut self, extra: usize) {
        self.record.stack_depth_max = self.record.stack_depth_max.max(self.stack.len() + extra);
    }

    /// Matches `top` with the next unmatched clone the line hits; returns
    /// false if no partner exists.
    fn step(&mut self, top: usize) -> bool {
        let mut r = self.next.find(0);
        if r < self.order.len() && self.order[r] == top {
            r = self.next.find(r + 1);
        }
        if r >= self.order.len() {
            return false;
        }
        let hit = self.order[r];
        let x = self.cell.coords[hit];
        while x < self.end_boundary() {
            self.close_phase(Some(top));
            self.line = self.end_boundary();
            self.start_phase();
            self.note_depth(1);
        }
        for c in [top, hit] {
            if !self.passive[self.owner[c]] {
                self.record.matched_active += 1;
            }
        }
        self.line = x;
        self.retire(top);
        self.retire(hit);
        self.matching.push((top, hit));
        self.match_positions.push(x);
        let (u, v) = (self.owner[top], self.owner[hit]);
        self.unmatched_per_vertex[u] -= 1;
        self.unmatched_per_vertex[v] -= 1;
        if self.unmatched_per_vertex[u] == 1 {
            let c = self.remaining_clone(u);
            self.stack.push(c);
        }
        if v != u && self.unmatched_per_vertex[v] == 1 {
            let c = self.remaining_clone(v);
            self.stack.push(c);
        }
        self.note_depth(0);
        true
    }

    fn pop_unmatched(&mut self) -> Option<usize> {
        while let Some(c) = self.stack.pop() {
            if !self.matched[c] {
                return Some(c);
            }
        }
        None
    }

    /// Uniform active unmatched clone; falls back to any unmatched clone
    /// when only passive ones are left.
    fn choose_active<R: Rng + ?Sized>(&self, rng: &mut R, fallbacks: &mut usize) -> Option<usize> {
        let items = &self.pool.items;
        if items.is_empty() {
            return None;
        }
        for _ in 0..ACTIVE_REJECTION_TRIES {
            let c = items[rng.random_range(0..items.len())];
            if !self.passive[self.owner[c]] {
                return Some(c);
            }
        }
        let active: Vec<usize> = items
            .iter()
            .copied()
            .filter(|&c| !self.passive[self.owner[c]])
            .collect();
        if active.is_empty() {
            *fallbacks += 1;
            return Some(items[rng.random_range(0..items.len())]);
        }
        Some(active[rng.random_range(0..active.len())])
    }
}

/// Runs the cut-off line algorithm on `cell` with phase ratio `beta`.
///
/// `rng` first decides the special clone (odd clone count) and afterwards
/// only feeds the active-clone choices made once the stack has run dry, so
/// Λ_C is a function of the cell and the special clone alone.
pub fn run_cola<R: Rng + ?Sized>(
    cell: &LambdaCell,
    beta: f64,
    stop_at_lambda_c: bool,
    rng: &mut R,
) -> Result<ColaResult> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    let total = cell.clone_count();
    let special = (total % 2 == 1).then(|| rng.random_range(0..total));
    let mut sweep = Sweep::new(cell, beta, special);

    let mut lambda_c = None;
    let mut unmatched_at_lambda_c = Vec::new();
    let mut lambda_c_phase = 0;
    let mut passive_fallbacks = 0;
    let completed = loop {
        let top = match sweep.pop_unmatched() {
            Some(c) => c,
            None => {
                if lambda_c.is_none() {
                    lambda_c = Some(sweep.line);
                    lambda_c_phase = sweep.phase;
                    unmatched_at_lambda_c = sweep.pool.items.clone();
                    unmatched_at_lambda_c.sort_unstable();
                    if stop_at_lambda_c {
                        break sweep.pool.items.is_empty();
                    }
                }
                match sweep.choose_active(rng, &mut passive_fallbacks) {
                    Some(c) => {
                        sweep.note_depth(1);
                        c
                    }
                    None => break true,
                }
            }
        };
        if !sweep.step(top) {
            return Err(Error::Structure(format!("clone {top} has no partner left")));
        }
    };
    sweep.close_phase(None);
    Ok(ColaResult {
        lambda: cell.lambda,
        beta,
        lambda_c: lambda_c.expect("stack runs dry before the sweep ends"),
        matching: sweep.matching,
        match_positions: sweep.match_positions,
        special,
        phase_trace: sweep.trace,
        unmatched_at_lambda_c,
        lambda_c_phase,
        completed,
        passive_fallbacks,
    })
}

/// Whether Λ_C agrees exactly across `betas` when each run replays the
/// stream seeded with `seed`.
pub fn lambda_c_invariance_check(cell: &LambdaCell, betas: &[f64], seed: u64) -> Result<bool> {
    let mut first = None;
    for &beta in betas {
        let mut rng = crate::stream::seeded(seed);
        let lc = run_cola(cell, beta, true, &mut rng)?.lambda_c;
        match first {
            None => first = Some(lc),
            Some(f) if f.to_bits() != lc.to_bits() => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(true)
}
