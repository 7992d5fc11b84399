//! Samplers for G(n, p), Poisson cloning, the Poisson-configuration and
//! Poisson-geometric models, and both contiguous giant-component models.
//!
//! The models that only describe a component (Poisson-configuration,
//! Poisson-geometric and the two C̃₁ variants) output graphs on just the
//! vertices they construct, labelled densely: kernel vertices first, then
//! 2-path interiors, then bush vertices.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    sample_geometric, sample_normal, sample_pgw_tree, sample_poisson, ModelParams,
};
use crate::decompose::{Bush, CoreDecomposition};
use crate::error::{Error, Result};
use crate::multigraph::{configuration_match, Multigraph};

/// Redraws of Λ allowed before giving up on a non-positive rate.
pub const LAMBDA_REDRAW_CAP: usize = 100;
/// Redraws allowed for parity or size conditioning.
pub const REJECTION_CAP: usize = 10_000;
/// ε⁴n above which the simple model is outside its regime.
pub const C1_SIMPLE_WARN_EPS4N: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gnp,
    PoissonCloning,
    PoissonConfiguration,
    PoissonGeometric,
    C1General,
    C1Simple,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Gnp,
        ModelKind::PoissonCloning,
        ModelKind::PoissonConfiguration,
        ModelKind::PoissonGeometric,
        ModelKind::C1General,
        ModelKind::C1Simple,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Gnp => "gnp",
            ModelKind::PoissonCloning => "poisson_cloning",
            ModelKind::PoissonConfiguration => "poisson_configuration",
            ModelKind::PoissonGeometric => "poisson_geometric",
            ModelKind::C1General => "c1_general",
            ModelKind::C1Simple => "c1_simple",
        }
    }

    /// Whether the sampler produces a whole random graph whose giant
    /// component still has to be extracted.
    pub fn is_whole_graph(self) -> bool {
        matches!(self, ModelKind::Gnp | ModelKind::PoissonCloning)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ModelKind::ALL.iter().map(|k| k.as_str()).collect();
                Error::Config(format!(
                    "unknown model {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// A model with its size and supercriticality; `p = (1 + eps) / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub n: usize,
    pub eps: f64,
}

/// A sampled graph, with the decomposition known from construction for
/// models that build their own kernel.
#[derive(Debug, Clone)]
pub struct Sample {
    pub graph: Multigraph,
    pub construction: Option<CoreDecomposition>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, n: usize, eps: f64) -> Self {
        ModelSpec { kind, n, eps }
    }

    pub fn with_p(kind: ModelKind, n: usize, p: f64) -> Self {
        ModelSpec {
            kind,
            n,
            eps: n as f64 * p - 1.0,
        }
    }

    pub fn p(&self) -> f64 {
        (1.0 + self.eps) / self.n as f64
    }

    pub fn lambda(&self) -> f64 {
        1.0 + self.eps
    }

    /// Analytic constants; requires ε > 0.
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.n, self.eps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.kind.is_whole_graph() {
            let p = self.p();
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::Config(format!(
                    "edge probability {p} outside [0, 1]"
                )));
            }
            Ok(())
        } else {
            self.params()
                .map(|_| ())
                .map_err(|e| Error::Config(e.to_string()))
        }
    }

    /// Regime warnings for parameters outside a model's intended range.
    pub fn warnings(&self) -> Vec<String> {
        let e3n = self.eps.powi(3) * self.n as f64;
        let mut out = Vec::new();
        match self.kind {
            ModelKind::C1Simple => {
                let e4n = self.eps * e3n;
                if e4n > C1_SIMPLE_WARN_EPS4N {
                    out.push(format!("c1_simple: eps^4 n = {e4n:.3} exceeds {C1_SIMPLE_WARN_EPS4N}; outside the eps = o(n^-1/4) regime"));
                }
            }
            ModelKind::C1General if e3n < 10.0 => {
                out.push(format!("c1_general: eps^3 n = {e3n:.3} is below 10"));
            }
            ModelKind::PoissonConfiguration | ModelKind::PoissonGeometric if e3n < 1.0 => {
                out.push(format!("{}: eps^3 n = {e3n:.3} is below 1", self.kind));
            }
            _ => {}
        }
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Sample> {
        self.validate()?;
        let whole = |graph| {
            Ok(Sample {
                graph,
                construction: None,
            })
        };
        match self.kind {
            ModelKind::Gnp => whole(sample_gnp_p(self.n, self.p(), rng)),
            ModelKind::PoissonCloning => {
                whole(sample_poisson_cloning_rate(self.n, self.lambda(), rng)?)
            }
            ModelKind::PoissonConfiguration => {
                whole(sample_poisson_configuration(&self.params()?, rng)?)
            }
            ModelKind::PoissonGeometric => {
                let (graph, d) = sample_poisson_geometric(&self.params()?, rng)?;
                Ok(Sample {
                    graph,
                    construction: Some(d),
                })
            }
            ModelKind::C1General => {
                let (graph, d) = sample_c1_general(&self.params()?, rng)?;
                Ok(Sample {
                    graph,
                    construction: Some(d),
                })
            }
            ModelKind::C1Simple => {
                let (graph, d) = sample_c1_simple(&self.params()?, rng)?;
                Ok(Sample {
                    graph,
                    construction: Some(d),
                })
            }
        }
    }
}

/// G(n, p) by geometric skipping over the C(n, 2) vertex pairs.
pub fn sample_gnp_p<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Multigraph {
    let mut g = Multigraph::new(n);
    if p <= 0.0 || n < 2 {
        return g;
    }
    if p >= 1.0 {
        for v in 1..n {
            for w in 0..v {
                g.add_edge(w, v);
            }
        }
        return g;
    }
    let log_q = (-p).ln_1p();
    let n = n as i64;
    let (mut v, mut w) = (1i64, -1i64);
    while v < n {
        let r: f64 = rng.random();
        let skip = ((1.0 - r).ln() / log_q).floor();
        w = w
            .saturating_add(1)
            .saturating_add(if skip >= i64::MAX as f64 {
                i64::MAX
            } else {
                skip as i64
            });
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v < n {
            g.add_edge(w as usize, v as usize);
        }
    }
    g
}

pub fn sample_gnp<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<Multigraph> {
    if !(params.p > 0.0 && params.p < 1.0) {
        return Err(Error::domain(format!(
            "edge probability {} outside (0, 1)",
            params.p
        )));
    }
    Ok(sample_gnp_p(params.n, params.p, rng))
}

/// Chooses an index with probability proportional to `weights[i]`.
fn weighted_index<R: Rng + ?Sized>(weights: &[usize], total: usize, rng: &mut R) -> usize {
    let mut r = rng.random_range(0..total);
    for (i, &w) in weights.iter().enumerate() {
        if r < w {
            return i;
        }
        r -= w;
    }
    unreachable!("weights sum to total")
}

/// Poisson cloning with rate `lambda`: i.i.d. Po(λ) clone counts, an odd
/// leftover clone turned into a special loop, the rest uniformly matched.
pub fn sample_poisson_cloning_rate<R: Rng + ?Sized>(
    n: usize,
    lambda: f64,
    rng: &mut R,
) -> Result<Multigraph> {
    let mut degrees = Vec::with_capacity(n);
    for _ in 0..n {
        degrees.push(sample_poisson(lambda, rng)? as usize);
    }
    let total: usize = degrees.iter().sum();
    let special = if total % 2 == 1 {
        let v = weighted_index(&degrees, total, rng);
        degrees[v] -= 1;
        Some(v)
    } else {
        None
    };
    let mut g = configuration_match(&degrees, rng)?;
    if let Some(v) = special {
        g.add_special_loop(v);
    }
    Ok(g)
}

pub fn sample_poisson_cloning<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<Multigraph> {
    sample_poisson_cloning_rate(params.n, params.lambda, rng)
}

/// A draw of the random rate Λ and the i.i.d. Po(Λ) vertex degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDraw {
    pub lambda: f64,
    pub degrees: Vec<usize>,
}

impl DegreeDraw {
    /// Degrees of the vertices with `D_u >= min_degree`, in vertex order.
    pub fn retained(&self, min_degree: usize) -> Vec<usize> {
        self.degrees
            .iter()
            .copied()
            .filter(|&d| d >= min_degree)
            .collect()
    }
}

/// Λ ~ N(1 + ε − μ, 1/(εn)), redrawn while non-positive.
pub fn draw_rate<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<f64> {
    let mean = params.lambda - params.mu;
    let var = 1.0 / (params.eps * params.n as f64);
    for _ in 0..LAMBDA_REDRAW_CAP {
        let lambda = sample_normal(mean, var, rng)?;
        if lambda > 0.0 {
            return Ok(lambda);
        }
    }
    Err(Error::Rejection(format!(
        "rate stayed non-positive over {LAMBDA_REDRAW_CAP} draws (mean {mean}, variance {var})"
    )))
}

pub fn draw_degrees<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<DegreeDraw> {
    let lambda = draw_rate(params, rng)?;
    let mut degrees = Vec::with_capacity(params.n);
    for _ in 0..params.n {
        degrees.push(sample_poisson(lambda, rng)? as usize);
    }
    Ok(DegreeDraw { lambda, degrees })
}

/// Uniform multigraph on the retained degrees; if their sum is odd, a
/// vertex chosen proportionally to its degree keeps one half-edge fewer
/// and receives an ordinary loop.
pub fn match_with_parity_loop<R: Rng + ?Sized>(
    degrees: &[usize],
    rng: &mut R,
) -> Result<Multigraph> {
    let total: usize = degrees.iter().sum();
    if total.is_multiple_of(2) {
        return configuration_match(degrees, rng);
    }
    let v = weighted_index(degrees, total, rng);
    let mut adjusted = degrees.to_vec();
    adjusted[v] -= 1;
    let mut g = configuration_match(&adjusted, rng)?;
    g.add_edge(v, v);
    Ok(g)
}

pub fn poisson_configuration_from_draw<R: Rng + ?Sized>(
    draw: &DegreeDraw,
    rng: &mut R,
) -> Result<Multigraph> {
    match_with_parity_loop(&draw.retained(2), rng)
}

pub fn sample_poisson_configuration<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<Multigraph> {
    let draw = draw_degrees(params, rng)?;
    poisson_configuration_from_draw(&draw, rng)
}

/// Subdivides each kernel edge into a 2-path of Geom(`path_q`) length and,
/// when `bush_mean` is set, attaches a Poisson Galton–Watson tree to every
/// resulting 2-core vertex.
pub fn grow_from_kernel<R: Rng + ?Sized>(
    kernel: Multigraph,
    path_q: f64,
    bush_mean: Option<f64>,
    rng: &mut R,
) -> Result<(Multigraph, CoreDecomposition)> {
    let k = kernel.vertex_count();
    let mut path_lengths = Vec::with_capacity(kernel.edge_count());
    let mut g = Multigraph::new(k);
    for e in kernel.edges() {
        let len = usize::try_from(sample_geometric(path_q, rng)?)
            .map_err(|_| Error::Resource("2-path length overflow".into()))?;
        path_lengths.push(len);
        let mut prev = e.u;
        if len > 1 {
            let first = g.add_vertices(len - 1);
            for v in first..first + len - 1 {
                g.add_edge(prev, v);
                prev = v;
            }
        }
        g.add_edge(prev, e.v);
    }
    let core = g.clone();
    let core_size = g.vertex_count();
    let mut bushes = Vec::with_capacity(core_size);
    for root in 0..core_size {
        let tree = match bush_mean {
            Some(mean) => sample_pgw_tree(mean, rng)?,
            None => crate::analytic::RootedTree::singleton(),
        };
        let first = g.add_vertices(tree.size() - 1);
        let mut vertices = Vec::with_capacity(tree.size());
        vertices.push(root);
        vertices.extend(first..first + tree.size() - 1);
        for node in 1..tree.size() {
            let parent = tree.parent(node).expect("non-root node has a parent");
            g.add_edge(vertices[parent], vertices[node]);
        }
        bushes.push(Bush { vertices, tree });
    }
    let decomposition = CoreDecomposition {
        core_vertices: (0..core_size).collect(),
        core,
        stripped_cycles: Vec::new(),
        kernel_vertices: (0..k).collect(),
        kernel,
        path_lengths,
        bushes,
    };
    Ok((g, decomposition))
}

/// Kernel on the degree-≥3 vertices with Geom(1 − μ) 2-paths and no bushes.
pub fn poisson_geometric_from_draw<R: Rng + ?Sized>(
    params: &ModelParams,
    draw: &DegreeDraw,
    rng: &mut R,
) -> Result<(Multigraph, CoreDecomposition)> {
    let kernel = match_with_parity_loop(&draw.retained(3), rng)?;
    grow_from_kernel(kernel, 1.0 - params.mu, None, rng)
}

pub fn sample_poisson_geometric<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<(Multigraph, CoreDecomposition)> {
    let draw = draw_degrees(params, rng)?;
    poisson_geometric_from_draw(params, &draw, rng)
}

/// Draws (Λ, D) until the degree-≥3 sum is even.
pub fn draw_even_kernel_degrees<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<DegreeDraw> {
    for _ in 0..REJECTION_CAP {
        let draw = draw_degrees(params, rng)?;
        if draw.retained(3).iter().sum::<usize>() % 2 == 0 {
            return Ok(draw);
        }
    }
    Err(Error::Rejection(format!(
        "no even kernel degree sum in {REJECTION_CAP} draws"
    )))
}

/// General contiguous model: Poisson(Λ) kernel degrees, Geom(1 − μ)
/// 2-paths, Poisson(μ) Galton–Watson bushes.
pub fn sample_c1_general<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<(Multigraph, CoreDecomposition)> {
    let draw = draw_even_kernel_degrees(params, rng)?;
    let kernel = configuration_match(&draw.retained(3), rng)?;
    grow_from_kernel(kernel, 1.0 - params.mu, Some(params.mu), rng)
}

/// Kernel size N = 2⌊Z⌋ with Z ~ N((2/3)ε³n, ε³n), redrawn until N ≥ 2.
pub fn draw_cubic_kernel_size<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<usize> {
    let e3n = params.eps3n();
    for _ in 0..REJECTION_CAP {
        let z = sample_normal(2.0 / 3.0 * e3n, e3n, rng)?;
        if z >= 1.0 {
            let half = z.floor();
            if half > (usize::MAX / 4) as f64 {
                return Err(Error::Resource(format!("kernel size 2*{half} too large")));
            }
            return Ok(2 * half as usize);
        }
    }
    Err(Error::Rejection(format!(
        "kernel size stayed below 2 over {REJECTION_CAP} draws"
    )))
}

/// Simple contiguous model: random cubic kernel, Geom(ε) 2-paths,
/// Poisson(1 − ε) Galton–Watson bushes.
pub fn sample_c1_simple<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<(Multigraph, CoreDecomposition)> {
    if params.eps >= 1.0 {
        return Err(Error::domain("c1_simple needs eps < 1"));
    }
    let size = draw_cubic_kernel_size(params, rng)?;
    let kernel = configuration_match(&vec![3; size], rng)?;
    grow_from_kernel(kernel, params.eps, Some(1.0 - params.eps), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::stream;

    #[test]
    fn model_names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
            assert_eq!(
                serde_json::to_string(&k).unwrap(),
                format!("\"{}\"", k.as_str())
            );
        }
        assert!("er".parse::<ModelKind>().is_err());
    }

    #[test]
    fn gnp_extremes() {
        let mut rng = stream::seeded(0);
        assert_eq!(sample_gnp_p(10, 0.0, &mut rng).edge_count(), 0);
        assert_eq!(sample_gnp_p(10, 1.0, &mut rng).edge_count(), 45);
        let g = sample_gnp_p(200, 0.3, &mut rng);
        assert!(g.is_simple());
    }

    #[test]
    fn gnp_edge_count_mean() {
        let mut rng = stream::seeded(1);
        let n = 10_000;
        let p = 1e-4;
        let reps = 100;
        let mean = (0..reps)
            .map(|_| sample_gnp_p(n, p, &mut rng).edge_count() as f64)
            .sum::<f64>()
            / reps as f64;
        let pairs = (n * (n - 1) / 2) as f64;
        let sd_of_mean = (pairs * p * (1.0 - p)).sqrt() / (reps as f64).sqrt();
        assert!((mean - pairs * p).abs() < 3.0 * sd_of_mean, "{mean}");
    }

    #[test]
    fn poisson_cloning_degree_sum() {
        let mut rng = stream::seeded(2);
        assert_eq!(
            sample_poisson_cloning_rate(50, 0.0, &mut rng)
                .unwrap()
                .edge_count(),
            0
        );
        let n = 100_000;
        let g = sample_poisson_cloning_rate(n, 1.1, &mut rng).unwrap();
        let total = g.degree_sum() as f64;
        let mean = n as f64 * 1.1;
        assert!((total - mean).abs() < 3.0 * mean.sqrt());
        assert!(g.special_loop_count() <= 1);
        assert_eq!(g.special_loop_count(), g.degree_sum() % 2);
    }

    #[test]
    fn poisson_configuration_conserves_drawn_degrees() {
        let params = ModelParams::new(20_000, 0.2).unwrap();
        let mut rng = stream::seeded(3);
        for _ in 0..20 {
            let draw = draw_degrees(&params, &mut rng).unwrap();
            let kept = draw.retained(2);
            let g = poisson_configuration_from_draw(&draw, &mut rng).unwrap();
            let out = g.degrees();
            assert_eq!(out.len(), kept.len());
            let total: usize = kept.iter().sum();
            let bumped: Vec<usize> = (0..kept.len()).filter(|&i| out[i] != kept[i]).collect();
            if total.is_multiple_of(2) {
                assert!(bumped.is_empty());
            } else {
                assert_eq!(bumped.len(), 1);
                assert_eq!(out[bumped[0]], kept[bumped[0]] + 1);
            }
        }
    }

    #[test]
    fn c1_general_construction_matches_decomposition() {
        let params = ModelParams::new(200_000, 0.1).unwrap();
        let mut rng = stream::seeded(4);
        for _ in 0..5 {
            let (g, built) = sample_c1_general(&params, &mut rng).unwrap();
            built.verify(&g).unwrap();
            assert!(built.kernel.degrees().iter().all(|&d| d >= 3));
            let found = decompose(&g).unwrap();
            assert_eq!(found.kernel.edge_count(), built.kernel.edge_count());
            assert_eq!(found.core_vertices, built.core_vertices);
            let mut a = found.path_lengths.clone();
            let mut b = built.path_lengths.clone();
            a.sort();
            b.sort();
            assert_eq!(a, b);
            let sizes = |d: &CoreDecomposition| d.bushes.iter().map(Bush::size).collect::<Vec<_>>();
            assert_eq!(sizes(&found), sizes(&built));
        }
    }

    #[test]
    fn c1_simple_kernel_is_cubic() {
        let params = ModelParams::new(1_000_000, 0.03).unwrap();
        let mut rng = stream::seeded(5);
        for _ in 0..5 {
            let (g, built) = sample_c1_simple(&params, &mut rng).unwrap();
            let k = built.kernel.vertex_count();
            assert!(k >= 2 && k % 2 == 0);
            assert!(built.kernel.degrees().iter().all(|&d| d == 3));
            assert_eq!(built.kernel.edge_count(), 3 * k / 2);
            built.verify(&g).unwrap();
        }
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::with_p(ModelKind::Gnp, 10, 0.0)
            .validate()
            .is_ok());
        assert!(ModelSpec::with_p(ModelKind::Gnp, 10, 1.5)
            .validate()
            .is_err());
        assert!(ModelSpec::new(ModelKind::C1General, 10, -0.5)
            .validate()
            .is_err());
        assert!(
            ModelSpec::new(ModelKind::C1Simple, 10_000_000, 0.1)
                .warnings()
                .len()
                == 1
        );
        assert!(ModelSpec::new(ModelKind::C1Simple, 10_000_000, 0.02)
            .warnings()
            .is_empty());
    }

    #[test]
    fn rate_redraw_cap() {
        // mean 1 + eps − mu > 0 always; a huge variance makes non-positive draws common
        let params = ModelParams::new(1, 1e-6).unwrap();
        let mut rng = stream::seeded(6);
        let outcomes: Vec<bool> = (0..50)
            .map(|_| draw_rate(&params, &mut rng).is_ok())
            .collect();
        assert!(outcomes.iter().all(|&ok| ok));
    }
}
