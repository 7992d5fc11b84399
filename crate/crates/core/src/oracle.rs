//! Slow reference implementations used by the self-test and the test suites.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::multigraph::Multigraph;

/// Largest vertex set whose induced subgraph has minimum degree 2, found by
/// checking every subset. Special loops are ignored, ordinary loops add 2.
pub fn exhaustive_two_core(g: &Multigraph) -> Result<Vec<usize>> {
    let n = g.vertex_count();
    if n > 20 {
        return Err(Error::Size(format!(
            "exhaustive 2-core is limited to 20 vertices, got {n}"
        )));
    }
    let mut best: u64 = 0;
    let mut deg = vec![0usize; n];
    for mask in 1u64..(1u64 << n) {
        if mask.count_ones() <= best.count_ones() {
            continue;
        }
        deg.fill(0);
        for e in g.edges().iter().filter(|e| !e.special) {
            if mask >> e.u & 1 == 1 && mask >> e.v & 1 == 1 {
                deg[e.u] += 1;
                deg[e.v] += 1;
            }
        }
        if (0..n).all(|v| mask >> v & 1 == 0 || deg[v] >= 2) {
            best = mask;
        }
    }
    Ok((0..n).filter(|&v| best >> v & 1 == 1).collect())
}

/// All-pairs distances by Floyd–Warshall; `None` marks unreachable pairs.
pub fn floyd_warshall(g: &Multigraph) -> Vec<Vec<Option<u32>>> {
    let n = g.vertex_count();
    const INF: u32 = u32::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for e in g.edges().iter().filter(|e| !e.is_loop()) {
        d[e.u][e.v] = 1;
        d[e.v][e.u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            if dik == INF {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d.into_iter()
        .map(|row| row.into_iter().map(|x| (x < INF).then_some(x)).collect())
        .collect()
}

/// Diameter from Floyd–Warshall, `None` if disconnected.
pub fn floyd_warshall_diameter(g: &Multigraph) -> Option<u32> {
    let d = floyd_warshall(g);
    let mut best = 0;
    for row in &d {
        for x in row {
            best = best.max((*x)?);
        }
    }
    Some(best)
}

/// Canonical form of a multigraph: its sorted edge list.
pub fn canonical_edges(g: &Multigraph) -> Vec<(usize, usize)> {
    let mut edges: Vec<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    edges.sort_unstable();
    edges
}

/// Exact law of the contracted configuration-model multigraph, by
/// enumerating every perfect matching of the half-edges.
pub fn matching_outcome_distribution(
    degrees: &[usize],
) -> Result<BTreeMap<Vec<(usize, usize)>, f64>> {
    let points: Vec<usize> = degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v, d))
        .collect();
    if points.len() % 2 == 1 {
        return Err(Error::Parity(points.len() as u64));
    }
    if points.len() > 14 {
        return Err(Error::Size(format!(
            "matching enumeration is limited to 14 half-edges, got {}",
            points.len()
        )));
    }
    let mut counts: BTreeMap<Vec<(usize, usize)>, u64> = BTreeMap::new();
    let mut free = vec![true; points.len()];
    let mut pairs = Vec::new();
    enumerate_matchings(&points, &mut free, &mut pairs, &mut counts);
    let total: u64 = counts.values().sum();
    Ok(counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / total as f64))
        .collect())
}

fn enumerate_matchings(
    points: &[usize],
    free: &mut [bool],
    pairs: &mut Vec<(usize, usize)>,
    counts: &mut BTreeMap<Vec<(usize, usize)>, u64>,
) {
    let Some(first) = free.iter().position(|&f| f) else {
        let mut key: Vec<_> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        key.sort_unstable();
        *counts.entry(key).or_default() += 1;
        return;
    };
    free[first] = false;
    for second in first + 1..points.len() {
        if free[second] {
            free[second] = false;
            pairs.push((points[first], points[second]));
            enumerate_matchings(points, free, pairs, counts);
            pairs.pop();
            free[second] = true;
        }
    }
    free[first] = true;
}

/// Replaces kernel edge `i` by a path of `path_lengths[i]` edges; new
/// interior vertices are appended after the kernel vertices.
pub fn subdivide(kernel: &Multigraph, path_lengths: &[usize]) -> Result<Multigraph> {
    if path_lengths.len() != kernel.edge_count() {
        return Err(Error::Size(
            "path_lengths must be parallel to kernel edges".into(),
        ));
    }
    let mut g = Multigraph::new(kernel.vertex_count());
    for (e, &len) in kernel.edges().iter().zip(path_lengths) {
        if len == 0 {
            return Err(Error::domain("path length must be at least 1"));
        }
        let mut prev = e.u;
        for _ in 1..len {
            let v = g.add_vertices(1);
            g.add_edge(prev, v);
            prev = v;
        }
        g.add_edge(prev, e.v);
    }
    Ok(g)
}

/// Dense lazy-walk mixing time from every start; matrix form of
/// [`crate::observables::mixing_time_exact`].
pub fn dense_mixing_time(g: &Multigraph, tv_threshold: f64) -> Result<u64> {
    let n = g.vertex_count();
    if n > 200 {
        return Err(Error::Size(format!(
            "dense mixing oracle is limited to 200 vertices, got {n}"
        )));
    }
    let deg = g.degrees();
    if deg.contains(&0) && n > 1 {
        return Err(Error::Disconnected);
    }
    let total: f64 = deg.iter().sum::<usize>() as f64;
    let mut p = vec![vec![0.0; n]; n];
    for (v, row) in p.iter_mut().enumerate() {
        row[v] += 0.5;
    }
    for e in g.edges() {
        if e.special {
            p[e.u][e.u] += 0.5 / deg[e.u] as f64;
        } else if e.u == e.v {
            p[e.u][e.u] += 1.0 / deg[e.u] as f64;
        } else {
            p[e.u][e.v] += 0.5 / deg[e.u] as f64;
            p[e.v][e.u] += 0.5 / deg[e.v] as f64;
        }
    }
    let pi: Vec<f64> = deg.iter().map(|&d| d as f64 / total).collect();
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|s| (0..n).map(|v| if v == s { 1.0 } else { 0.0 }).collect())
        .collect();
    let worst = |rows: &[Vec<f64>]| {
        rows.iter()
            .map(|r| 0.5 * r.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let mut t = 0;
    while worst(&rows) > tv_threshold {
        if t > 1_000_000 {
            return Err(Error::Resource("dense mixing did not converge".into()));
        }
        rows = rows
            .iter()
            .map(|r| {
                let mut out = vec![0.0; n];
                for (i, &ri) in r.iter().enumerate() {
                    if ri != 0.0 {
                        for (j, &pij) in p[i].iter().enumerate() {
                            out[j] += ri * pij;
                        }
                    }
                }
                out
            })
            .collect();
        t += 1;
    }
    Ok(t)
}

/// Two-sample KS statistic straight from the empirical CDFs.
pub fn ecdf_ks_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let f = |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64;
    xs.iter()
        .chain(ys)
        .map(|&t| (f(xs, t) - f(ys, t)).abs())
        .fold(0.0, f64::max)
}
