//! Analytic constants of the near-critical regime and the scalar samplers
//! used by every model.
//!
//! Both fixed points are solved in reparametrised forms that stay well
//! conditioned as λ → 1: the survival probability through `x = λθ` with
//! `λ = x / (1 − e^{−x})`, and the conjugate through `δ = 1 − μ` with
//! `log1p(−δ) + δ = log1p(ε) − ε`.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Smallest admissible distance of λ above 1.
pub const MIN_SUPERCRITICALITY: f64 = 1e-9;

/// Default node cap for Galton–Watson trees.
pub const DEFAULT_TREE_CAP: usize = 100_000_000;

/// Analytic constants shared by all models for a given `(n, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub eps: f64,
    pub lambda: f64,
    pub p: f64,
    pub mu: f64,
    pub theta: f64,
}

impl ModelParams {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        if !eps.is_finite() || eps < MIN_SUPERCRITICALITY {
            return Err(Error::domain(format!(
                "eps must be a finite value >= {MIN_SUPERCRITICALITY}, got {eps}"
            )));
        }
        let lambda = 1.0 + eps;
        Ok(ModelParams {
            n,
            eps,
            lambda,
            p: lambda / n as f64,
            mu: conjugate_mu(lambda)?,
            theta: theta_lambda(lambda)?,
        })
    }

    /// Parameters from an edge probability, using ε = np − 1.
    pub fn from_p(n: usize, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        ModelParams::new(n, n as f64 * p - 1.0)
    }

    /// ε³n, the effective size of the supercritical regime.
    pub fn eps3n(&self) -> f64 {
        self.eps.powi(3) * self.n as f64
    }

    /// Scale (1/ε)·log(ε³n) of 2-path and distance statistics.
    pub fn distance_scale(&self) -> f64 {
        self.eps3n().ln() / self.eps
    }
}

fn check_supercritical(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda - 1.0 < MIN_SUPERCRITICALITY {
        return Err(Error::domain(format!(
            "lambda must exceed 1 by at least {MIN_SUPERCRITICALITY}, got {lambda}"
        )));
    }
    Ok(())
}

/// `log(1 + y) − y`, accurate for small `|y|`.
fn log1p_minus(y: f64) -> f64 {
    if y.abs() < 1e-3 {
        // alternating series −y²/2 + y³/3 − …
        let mut term = -y * y / 2.0;
        let mut sum = 0.0;
        let mut k = 2.0;
        while term.abs() > 1e-40 && k < 40.0 {
            sum += term;
            term *= -y * k / (k + 1.0);
            k += 1.0;
        }
        sum
    } else {
        y.ln_1p() - y
    }
}

/// Bisection on an increasing function over `[lo, hi]`, followed by a
/// bracketed Newton polish.
fn solve_increasing(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let slope = df(x);
        if slope <= 0.0 || !slope.is_finite() {
            break;
        }
        let next = x - f(x) / slope;
        if !(lo..=hi).contains(&next) {
            break;
        }
        x = next;
    }
    x
}

/// The conjugate μ < 1 of λ > 1: the other root of `μe^{−μ} = λe^{−λ}`.
pub fn conjugate_mu(lambda: f64) -> Result<f64> {
    check_supercritical(lambda)?;
    let target = log1p_minus(lambda - 1.0);
    // δ = 1 − μ; g(δ) = log1p(−δ) + δ − target is decreasing in δ.
    let g = |delta: f64| target - log1p_minus(-delta);
    let dg = |delta: f64| delta / (1.0 - delta);
    let delta = solve_increasing(g, dg, 0.0, 1.0 - f64::MIN_POSITIVE);
    Ok(1.0 - delta)
}

/// Survival probability θ_λ, the positive root of `θ = 1 − e^{−θλ}`.
pub fn theta_lambda(lambda: f64) -> Result<f64> {
    check_supercritical(lambda)?;
    // x = λθ solves x / (1 − e^{−x}) = λ; the left side increases from 1.
    let phi = |x: f64| {
        if x < 1e-8 {
            1.0 + x / 2.0 + x * x / 12.0
        } else {
            x / -(-x).exp_m1()
        }
    };
    let dphi = |x: f64| {
        if x < 1e-8 {
            0.5 + x / 6.0
        } else {
            let e = (-x).exp();
            let d = -(-x).exp_m1();
            (d - x * e) / (d * d)
        }
    };
    let x = solve_increasing(|x| phi(x) - lambda, dphi, 0.0, lambda);
    Ok(x / lambda)
}

/// Borel(γ) pmf: probability that a Poisson(γ) Galton–Watson tree has `t` nodes.
pub fn borel_pmf(gamma: f64, t: u64) -> Result<f64> {
    Ok(borel_log_pmf(gamma, t)?.exp())
}

pub fn borel_log_pmf(gamma: f64, t: u64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::domain(format!(
            "Borel parameter must lie in (0, 1], got {gamma}"
        )));
    }
    if t == 0 {
        return Err(Error::domain("Borel support starts at 1"));
    }
    let tf = t as f64;
    Ok((tf - 1.0) * tf.ln() - gamma.ln() - ln_gamma(tf + 1.0) + tf * (gamma.ln() - gamma))
}

/// A rooted tree stored as a parent map; node 0 is the root and nodes are
/// numbered in breadth-first order, so every parent precedes its children.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTree {
    parent: Vec<Option<usize>>,
}

impl RootedTree {
    pub fn singleton() -> Self {
        RootedTree { parent: vec![None] }
    }

    /// Builds a tree from a parent map, checking the breadth-first layout.
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self> {
        if parent.first() != Some(&None) {
            return Err(Error::Structure("node 0 must be the unique root".into()));
        }
        for (i, p) in parent.iter().enumerate().skip(1) {
            match p {
                Some(q) if *q < i => {}
                _ => {
                    return Err(Error::Structure(format!(
                        "node {i} must have a parent with a smaller index"
                    )))
                }
            }
        }
        Ok(RootedTree { parent })
    }

    pub fn size(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// Height of the tree (0 for a single node).
    pub fn height(&self) -> usize {
        let mut depth = vec![0usize; self.parent.len()];
        let mut height = 0;
        for i in 1..self.parent.len() {
            let p = self.parent[i].expect("non-root node has a parent");
            depth[i] = depth[p] + 1;
            height = height.max(depth[i]);
        }
        height
    }

    fn push_child(&mut self, parent: usize) {
        self.parent.push(Some(parent));
    }
}

/// Family tree of a Galton–Watson process with Poisson(γ) offspring.
pub fn sample_pgw_tree<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> Result<RootedTree> {
    sample_pgw_tree_capped(gamma, DEFAULT_TREE_CAP, rng)
}

pub fn sample_pgw_tree_capped<R: Rng + ?Sized>(
    gamma: f64,
    cap: usize,
    rng: &mut R,
) -> Result<RootedTree> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::domain(format!(
            "offspring mean must lie in [0, 1), got {gamma}"
        )));
    }
    let mut tree = RootedTree::singleton();
    let mut next = 0;
    while next < tree.size() {
        let children = sample_poisson(gamma, rng)? as usize;
        if tree.size() + children > cap {
            return Err(Error::Resource(format!(
                "Galton-Watson tree exceeded {cap} nodes"
            )));
        }
        for _ in 0..children {
            tree.push_child(next);
        }
        next += 1;
    }
    Ok(tree)
}

/// Geometric variable on {1, 2, …} with success probability `q`.
pub fn sample_geometric<R: Rng + ?Sized>(q: f64, rng: &mut R) -> Result<u64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!(
            "geometric parameter must lie in (0, 1), got {q}"
        )));
    }
    let u = 1.0 - rng.random::<f64>();
    let k = (u.ln() / (-q).ln_1p()).floor();
    Ok(if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        1 + k as u64
    })
}

/// Poisson variable; exact inversion for means up to 30.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(Error::domain(format!(
            "Poisson mean must be finite and >= 0, got {mean}"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    if mean <= 30.0 {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut pk = (-mean).exp();
        let mut cdf = pk;
        while u > cdf {
            k += 1;
            pk *= mean / k as f64;
            if pk == 0.0 {
                // cdf stalled at 1 − O(ulp); u sits in the rounding gap
                break;
            }
            cdf += pk;
        }
        return Ok(k);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::domain(e.to_string()))?;
    Ok(dist.sample(rng) as u64)
}

pub fn sample_normal<R: Rng + ?Sized>(mean: f64, var: f64, rng: &mut R) -> Result<f64> {
    if !var.is_finite() || var < 0.0 || !mean.is_finite() {
        return Err(Error::domain(format!(
            "invalid normal parameters ({mean}, {var})"
        )));
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(mean + var.sqrt() * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream;

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        // plain bisection oracle, sign change assumed f(lo) < 0 < f(hi)
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn conjugate_matches_bisection_oracle() {
        for lambda in [1.1_f64, 2.0, 3.5] {
            let c = lambda * (-lambda).exp();
            let oracle = bisect(|m| m * (-m).exp() - c, 1e-12, 1.0);
            assert!((conjugate_mu(lambda).unwrap() - oracle).abs() < 1e-12);
        }
        assert!((conjugate_mu(1.1).unwrap() - 0.906_252_442_005_01).abs() < 1e-12);
        assert!((conjugate_mu(2.0).unwrap() - 0.406_375_739_959_959_4).abs() < 1e-12);
    }

    #[test]
    fn conjugate_near_taylor_expansion() {
        let mu = conjugate_mu(1.1).unwrap();
        let taylor = 1.0 - 0.1 + (2.0 / 3.0) * 0.01;
        assert!((mu - taylor).abs() < 1e-3, "{mu} vs {taylor}");
    }

    #[test]
    fn theta_matches_bisection_oracle() {
        for (lambda, expect) in [(1.1, 0.176_14), (2.0, 0.796_81)] {
            let oracle = bisect(|t| t - 1.0 + (-lambda * t).exp(), 1e-9, 1.0);
            let theta = theta_lambda(lambda).unwrap();
            assert!((theta - oracle).abs() < 1e-12);
            assert!((theta - expect).abs() < 1e-5, "{theta}");
        }
        let theta = theta_lambda(1.01).unwrap();
        assert!((theta - 0.02).abs() / 0.02 < 0.15);
    }

    #[test]
    fn solvers_reject_subcritical() {
        assert!(matches!(conjugate_mu(1.0), Err(Error::Domain(_))));
        assert!(matches!(theta_lambda(0.5), Err(Error::Domain(_))));
        assert!(conjugate_mu(1.0 + 1e-10).is_err());
        assert!(conjugate_mu(f64::NAN).is_err());
    }

    #[test]
    fn borel_small_values() {
        for g in [0.1, 0.5, 1.0] {
            assert!((borel_pmf(g, 1).unwrap() - (-g).exp()).abs() < 1e-15);
        }
        // size 2: root has one child, the child is childless
        let expect = 0.5 * (-0.5f64).exp() * (-0.5f64).exp();
        assert!((borel_pmf(0.5, 2).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.183_939_7).abs() < 1e-7);
        assert!(borel_pmf(0.0, 1).is_err());
        assert!(borel_pmf(1.5, 1).is_err());
        assert!(borel_pmf(0.5, 0).is_err());
    }

    #[test]
    fn borel_mass_sums_to_one() {
        let total: f64 = (1..=1_000_000).map(|t| borel_pmf(0.9, t).unwrap()).sum();
        assert!((0.999..=1.0 + 1e-9).contains(&total), "{total}");
        assert!(borel_pmf(1.0, 1_000_000).unwrap().is_finite());
    }

    #[test]
    fn pgw_tree_layout_and_edge_cases() {
        let mut rng = stream::seeded(1);
        let t = sample_pgw_tree(0.0, &mut rng).unwrap();
        assert_eq!(t.size(), 1);
        assert_eq!(t.height(), 0);
        let t = sample_pgw_tree(0.9, &mut rng).unwrap();
        for i in 1..t.size() {
            assert!(t.parent(i).unwrap() < i);
        }
        assert!(sample_pgw_tree(1.0, &mut rng).is_err());
        let capped = (0..200).find_map(|_| sample_pgw_tree_capped(0.99, 3, &mut rng).err());
        assert!(matches!(capped, Some(Error::Resource(_))));
    }

    #[test]
    fn pgw_childless_root_frequency() {
        let mut rng = stream::seeded(2);
        let trials = 100_000;
        let singles = (0..trials)
            .filter(|_| sample_pgw_tree(0.5, &mut rng).unwrap().size() == 1)
            .count();
        let freq = singles as f64 / trials as f64;
        assert!((freq - (-0.5f64).exp()).abs() < 0.01, "{freq}");
    }

    #[test]
    fn geometric_moments_and_tail() {
        let mut rng = stream::seeded(3);
        let draws = 1_000_000;
        let mean = (0..draws)
            .map(|_| sample_geometric(0.5, &mut rng).unwrap())
            .sum::<u64>() as f64
            / draws as f64;
        assert!((mean - 2.0).abs() < 0.01, "{mean}");
        let tail = (0..draws)
            .filter(|_| sample_geometric(0.1, &mut rng).unwrap() > 23)
            .count() as f64
            / draws as f64;
        assert!((tail - 0.9f64.powi(23)).abs() < 0.003, "{tail}");
        assert!((0..1000).all(|_| sample_geometric(0.999_999, &mut rng).unwrap() <= 2));
        assert!(sample_geometric(0.0, &mut rng).is_err());
        assert!(sample_geometric(1.0, &mut rng).is_err());
    }

    #[test]
    fn poisson_and_normal_samplers() {
        let mut rng = stream::seeded(4);
        assert!((0..100).all(|_| sample_poisson(0.0, &mut rng).unwrap() == 0));
        let draws = 1_000_000;
        let zeros = (0..draws)
            .filter(|_| sample_poisson(2.0, &mut rng).unwrap() == 0)
            .count();
        assert!((zeros as f64 / draws as f64 - (-2.0f64).exp()).abs() < 0.005);
        let big: f64 = (0..10_000)
            .map(|_| sample_poisson(100.0, &mut rng).unwrap() as f64)
            .sum::<f64>()
            / 10_000.0;
        assert!((big - 100.0).abs() < 0.5);
        let xs: Vec<f64> = (0..draws)
            .map(|_| sample_normal(0.0, 1.0, &mut rng).unwrap())
            .collect();
        let m = xs.iter().sum::<f64>() / draws as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / draws as f64;
        assert!(m.abs() < 0.01 && (v - 1.0).abs() < 0.02, "{m} {v}");
        assert!(sample_poisson(-1.0, &mut rng).is_err());
        assert!(sample_normal(0.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn params_echo_constants() {
        let p = ModelParams::new(1_000_000, 0.05).unwrap();
        assert!((p.lambda - 1.05).abs() < 1e-15);
        assert!((p.mu - p.lambda * (1.0 - p.theta)).abs() < 1e-10);
        assert!((p.eps3n() - 125.0).abs() < 1e-9);
        let q = ModelParams::from_p(1000, 2.0 / 1000.0).unwrap();
        assert!((q.eps - 1.0).abs() < 1e-12);
        assert!(ModelParams::new(10, 0.0).is_err());
        assert!(ModelParams::new(0, 0.1).is_err());
    }
}
