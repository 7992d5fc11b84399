//! Exhaustive-oracle suites run by `giant selftest`.
//!
//! A fault can be injected to show that a suite notices it: with
//! [`Fault::Peeling`] the 2-core check runs against a peeling that only
//! strips isolated vertices, which the subset oracle rejects.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decompose::{contract_to_kernel, strip_disjoint_cycles, two_core};
use crate::error::Result;
use crate::models::sample_poisson_cloning_rate;
use crate::multigraph::{configuration_match, Multigraph};
use crate::observables::{diameter, diameter_all_pairs, mixing_time_exact};
use crate::oracle;
use crate::stats::ks_two_sample;
use crate::stream::{self, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    Peeling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub fault: Option<Fault>,
    pub suites: Vec<SuiteOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<22} {:>7}  {:<4}  detail", "suite", "cases", "ok").unwrap();
        for s in &self.suites {
            let mark = if s.passed { "pass" } else { "FAIL" };
            writeln!(
                out,
                "{:<22} {:>7}  {:<4}  {}",
                s.name, s.cases, mark, s.detail
            )
            .unwrap();
        }
        out
    }
}

/// Runs every suite with streams derived from `seed`.
pub fn run_selftest(seed: u64, fault: Option<Fault>) -> Result<SelftestReport> {
    let suites = vec![
        core_vs_subsets(&mut stream::derive(seed, "selftest-core", 0), 200, fault)?,
        diameter_vs_floyd(&mut stream::derive(seed, "selftest-diameter", 0), 200)?,
        matching_law(&mut stream::derive(seed, "selftest-matching", 0), 150_000)?,
        kernel_round_trip(&mut stream::derive(seed, "selftest-kernel", 0), 100)?,
        ks_uniformity(&mut stream::derive(seed, "selftest-ks", 0), 1000)?,
        mixing_vs_dense(&mut stream::derive(seed, "selftest-mixing", 0), 30)?,
    ];
    Ok(SelftestReport {
        seed,
        fault,
        suites,
    })
}

/// Random multigraph on at most `max_n` vertices with loops, parallel
/// edges and the odd special loop.
pub fn random_small_multigraph(rng: &mut StreamRng, max_n: usize) -> Multigraph {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(0..=2 * n);
    let mut g = Multigraph::new(n);
    for _ in 0..m {
        g.add_edge(rng.random_range(0..n), rng.random_range(0..n));
    }
    if rng.random_bool(0.2) {
        g.add_special_loop(rng.random_range(0..n));
    }
    g
}

/// Random connected graph: a random recursive tree plus a few chords.
pub fn random_connected_graph(rng: &mut StreamRng, max_n: usize) -> Multigraph {
    let n = rng.random_range(1..=max_n);
    let mut g = Multigraph::new(n);
    for v in 1..n {
        g.add_edge(rng.random_range(0..v), v);
    }
    let chords = rng.random_range(0..=n / 4 + 1);
    for _ in 0..chords {
        g.add_edge(rng.random_range(0..n), rng.random_range(0..n));
    }
    g
}

/// Peeling that forgets degree-1 vertices.
fn faulty_two_core(g: &Multigraph) -> Vec<usize> {
    let deg = g.ordinary_adjacency();
    (0..g.vertex_count())
        .filter(|&v| deg.degree(v) > 0)
        .collect()
}

fn core_vs_subsets(
    rng: &mut StreamRng,
    cases: usize,
    fault: Option<Fault>,
) -> Result<SuiteOutcome> {
    let mut mismatches = 0;
    for _ in 0..cases {
        let g = random_small_multigraph(rng, 12);
        let got = match fault {
            Some(Fault::Peeling) => faulty_two_core(&g),
            None => two_core(&g),
        };
        if got != oracle::exhaustive_two_core(&g)? {
            mismatches += 1;
        }
    }
    Ok(SuiteOutcome {
        name: "two_core_vs_subsets".into(),
        cases,
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches"),
    })
}

fn diameter_vs_floyd(rng: &mut StreamRng, cases: usize) -> Result<SuiteOutcome> {
    let mut mismatches = 0;
    for _ in 0..cases {
        let g = random_connected_graph(rng, 100);
        let expect = oracle::floyd_warshall_diameter(&g);
        if Some(diameter(&g)?) != expect || Some(diameter_all_pairs(&g)?) != expect {
            mismatches += 1;
        }
    }
    Ok(SuiteOutcome {
        name: "diameter_vs_floyd".into(),
        cases,
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches"),
    })
}

fn matching_law(rng: &mut StreamRng, samples: usize) -> Result<SuiteOutcome> {
    let degrees = [3, 3];
    let law = oracle::matching_outcome_distribution(&degrees)?;
    let mut counts: BTreeMap<Vec<(usize, usize)>, usize> = BTreeMap::new();
    for _ in 0..samples {
        *counts
            .entry(oracle::canonical_edges(&configuration_match(
                &degrees, rng,
            )?))
            .or_default() += 1;
    }
    let mut worst: f64 = 0.0;
    for (k, p) in &law {
        let freq = counts.get(k).copied().unwrap_or(0) as f64 / samples as f64;
        worst = worst.max((freq - p).abs());
    }
    let unexpected = counts.keys().filter(|k| !law.contains_key(*k)).count();
    Ok(SuiteOutcome {
        name: "matching_law".into(),
        cases: samples,
        passed: worst <= 0.01 && unexpected == 0,
        detail: format!("max |freq - p| = {worst:.4}"),
    })
}

fn kernel_triples(kernel: &Multigraph, lengths: &[usize]) -> Vec<(usize, usize, usize)> {
    let mut t: Vec<_> = kernel
        .edges()
        .iter()
        .zip(lengths)
        .map(|(e, &l)| (e.u, e.v, l))
        .collect();
    t.sort_unstable();
    t
}

fn kernel_round_trip(rng: &mut StreamRng, cases: usize) -> Result<SuiteOutcome> {
    let mut failures = 0;
    let mut done = 0;
    while done < cases {
        let g = sample_poisson_cloning_rate(
            rng.random_range(200..2000),
            rng.random_range(1.2..2.0),
            rng,
        )?;
        let core_vertices = two_core(&g);
        let core = g.induced_subgraph(&core_vertices);
        let stripped = strip_disjoint_cycles(&core);
        if stripped.graph.vertex_count() == 0 {
            continue;
        }
        done += 1;
        let first = contract_to_kernel(&stripped.graph)?;
        let expanded = oracle::subdivide(&first.kernel, &first.path_lengths)?;
        let second = contract_to_kernel(&expanded)?;
        let mut deg_a = stripped.graph.degrees();
        let mut deg_b = expanded.degrees();
        deg_a.sort_unstable();
        deg_b.sort_unstable();
        let same = deg_a == deg_b
            && expanded.edge_count() == stripped.graph.edge_count()
            && kernel_triples(&first.kernel, &first.path_lengths)
                == kernel_triples(&second.kernel, &second.path_lengths);
        if !same {
            failures += 1;
        }
    }
    Ok(SuiteOutcome {
        name: "kernel_round_trip".into(),
        cases,
        passed: failures == 0,
        detail: format!("{failures} failures"),
    })
}

fn ks_uniformity(rng: &mut StreamRng, trials: usize) -> Result<SuiteOutcome> {
    let mut low = 0;
    for _ in 0..trials {
        let xs: Vec<f64> = (0..50).map(|_| rng.random()).collect();
        let ys: Vec<f64> = (0..50).map(|_| rng.random()).collect();
        if ks_two_sample(&xs, &ys)?.p < 0.05 {
            low += 1;
        }
    }
    let frac = low as f64 / trials as f64;
    Ok(SuiteOutcome {
        name: "ks_null_uniformity".into(),
        cases: trials,
        passed: (0.02..=0.09).contains(&frac),
        detail: format!("fraction p < 0.05 = {frac:.3}"),
    })
}

fn mixing_vs_dense(rng: &mut StreamRng, cases: usize) -> Result<SuiteOutcome> {
    let mut mismatches = 0;
    for _ in 0..cases {
        let g = random_connected_graph(rng, 30);
        if mixing_time_exact(&g, 0.25, rng)?.steps != oracle::dense_mixing_time(&g, 0.25)? {
            mismatches += 1;
        }
    }
    Ok(SuiteOutcome {
        name: "mixing_vs_dense".into(),
        cases,
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injected_fault_is_caught() {
        let mut rng = stream::seeded(1);
        let outcome = core_vs_subsets(&mut rng, 50, Some(Fault::Peeling)).unwrap();
        assert!(!outcome.passed);
        let mut rng = stream::seeded(1);
        assert!(core_vs_subsets(&mut rng, 50, None).unwrap().passed);
    }
}
