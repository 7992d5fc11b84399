//! Two-sample KS, Pearson chi-square and replicate summaries.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Smallest sample accepted by [`ks_two_sample`].
pub const KS_MIN_SAMPLE: usize = 5;

/// Bins with smaller expected count are merged into their neighbour.
pub const CHI_SQUARE_MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    #[serde(rename = "D")]
    pub d: f64,
    pub p: f64,
    /// Set when the pooled sample has ties, which makes the asymptotic p
    /// conservative.
    pub approx_ties: bool,
}

/// Two-sample Kolmogorov–Smirnov test.
///
/// Equal values are consumed together before the ECDF gap is measured, so
/// ties never inflate D. The p-value uses the Kolmogorov series with the
/// Stephens small-sample correction.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsOutcome> {
    if xs.len() < KS_MIN_SAMPLE || ys.len() < KS_MIN_SAMPLE {
        return Err(Error::Size(format!(
            "KS needs at least {KS_MIN_SAMPLE} values per sample, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::domain("KS sample contains NaN"));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    let mut ties = false;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        let (i0, j0) = (i, j);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        if (i - i0) + (j - j0) > 1 {
            ties = true;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let sq = ne.sqrt();
    let p = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d);
    Ok(KsOutcome {
        d,
        p,
        approx_ties: ties,
    })
}

/// Upper tail of the Kolmogorov distribution, Q(t) = 2 Σ (−1)^{k−1} e^{−2k²t²}.
pub fn kolmogorov_sf(t: f64) -> f64 {
    if t < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * t * t).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareOutcome {
    pub stat: f64,
    pub p: f64,
    /// Bins left after tail merging.
    pub bins: usize,
}

/// Pearson goodness-of-fit test with `bins − 1` degrees of freedom.
///
/// Trailing bins whose expected count is below 5 are folded into the last
/// adequate bin; a leading low bin is folded forward.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquareOutcome> {
    if observed.len() != expected.len() {
        return Err(Error::Size(format!(
            "{} observed bins against {} expected bins",
            observed.len(),
            expected.len()
        )));
    }
    if expected.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
        return Err(Error::domain(
            "expected counts must be finite and non-negative",
        ));
    }
    let total_obs: f64 = observed.iter().map(|&o| o as f64).sum();
    let total_exp: f64 = expected.iter().sum();
    if (total_obs - total_exp).abs() > 0.5 {
        return Err(Error::domain(format!(
            "observed total {total_obs} differs from expected total {total_exp}"
        )));
    }
    let mut bins: Vec<(f64, f64)> = Vec::with_capacity(observed.len());
    let mut carry = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        carry.0 += o as f64;
        carry.1 += e;
        if carry.1 >= CHI_SQUARE_MIN_EXPECTED {
            bins.push(carry);
            carry = (0.0, 0.0);
        }
    }
    if carry.1 > 0.0 || carry.0 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += carry.0;
                last.1 += carry.1;
            }
            None => bins.push(carry),
        }
    }
    if bins.len() < 2 {
        return Err(Error::Size(format!(
            "need two bins with expected count >= {CHI_SQUARE_MIN_EXPECTED} after merging"
        )));
    }
    let stat: f64 = bins.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dist =
        ChiSquared::new((bins.len() - 1) as f64).map_err(|e| Error::domain(e.to_string()))?;
    let p = if stat == 0.0 { 1.0 } else { dist.sf(stat) };
    Ok(ChiSquareOutcome {
        stat,
        p,
        bins: bins.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Summary statistics; `None` for an empty sample. The sd uses n − 1.
pub fn summarize(xs: &[f64]) -> Option<Summary> {
    if xs.is_empty() {
        return None;
    }
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let m = mean(&s);
    let sd = if s.len() > 1 {
        (s.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (s.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(Summary {
        count: s.len(),
        mean: m,
        sd,
        min: s[0],
        max: s[s.len() - 1],
        q05: quantile_sorted(&s, 0.05),
        q25: quantile_sorted(&s, 0.25),
        median: quantile_sorted(&s, 0.5),
        q75: quantile_sorted(&s, 0.75),
        q95: quantile_sorted(&s, 0.95),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream;
    use rand::Rng;

    #[test]
    fn ks_identical_and_disjoint() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = ks_two_sample(&xs, &xs).unwrap();
        assert_eq!(r.d, 0.0);
        assert_eq!(r.p, 1.0);
        assert!(r.approx_ties);
        let r = ks_two_sample(&[1.0, 2.0, 3.0, 4.0, 5.0], &[6.0, 7.0, 8.0, 9.0, 10.0]).unwrap();
        assert_eq!(r.d, 1.0);
        assert!(!r.approx_ties);
        assert!(r.p < 0.01);
    }

    #[test]
    fn ks_small_sample_rejected() {
        assert!(matches!(
            ks_two_sample(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]),
            Err(Error::Size(_))
        ));
    }

    fn ecdf_oracle(xs: &[f64], ys: &[f64]) -> f64 {
        let f = |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64;
        xs.iter()
            .chain(ys)
            .map(|&t| (f(xs, t) - f(ys, t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn ks_matches_ecdf_oracle_with_ties() {
        let mut rng = stream::seeded(9);
        for _ in 0..50 {
            let xs: Vec<f64> = (0..30).map(|_| rng.random_range(0..8) as f64).collect();
            let ys: Vec<f64> = (0..17).map(|_| rng.random_range(1..10) as f64).collect();
            assert_eq!(ks_two_sample(&xs, &ys).unwrap().d, ecdf_oracle(&xs, &ys));
        }
    }

    #[test]
    fn ks_shifted_uniforms() {
        let mut rng = stream::seeded(2);
        let mut total = 0.0;
        for _ in 0..20 {
            let xs: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
            let ys: Vec<f64> = (0..100).map(|_| rng.random::<f64>() + 0.5).collect();
            let r = ks_two_sample(&xs, &ys).unwrap();
            assert_eq!(r.d, ecdf_oracle(&xs, &ys));
            total += r.d;
        }
        let d = total / 20.0;
        assert!((d - 0.5).abs() <= 0.1, "mean D = {d}");
    }

    #[test]
    fn kolmogorov_values() {
        // Q(1.36) ~ 0.049, Q(1.63) ~ 0.0098
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 1e-3);
        assert!((kolmogorov_sf(1.63) - 0.0098).abs() < 5e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn chi_square_examples() {
        let r = chi_square_gof(&[10, 20, 30], &[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(r.stat, 0.0);
        assert_eq!(r.p, 1.0);
        let r = chi_square_gof(&[60, 40], &[50.0, 50.0]).unwrap();
        assert!((r.stat - 4.0).abs() < 1e-12);
        assert!((r.p - 0.0455).abs() < 1e-3);
    }

    #[test]
    fn chi_square_merges_tail() {
        let r = chi_square_gof(&[50, 45, 3, 2], &[50.0, 45.0, 3.0, 2.0]).unwrap();
        assert_eq!(r.bins, 3);
        assert!(matches!(
            chi_square_gof(&[3, 2], &[3.0, 2.0]),
            Err(Error::Size(_))
        ));
        assert!(chi_square_gof(&[3, 2], &[30.0, 2.0]).is_err());
    }

    #[test]
    fn summary_basics() {
        let s = summarize(&[3.0]).unwrap();
        assert_eq!(
            (s.mean, s.sd, s.min, s.max, s.median),
            (3.0, 0.0, 3.0, 3.0, 3.0)
        );
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert!((s.sd - 1.2909944487358056).abs() < 1e-12);
        assert!(summarize(&[]).is_none());
    }
}
