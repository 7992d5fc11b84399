use proptest::prelude::*;

use giant::cola::{generate_cell, run_cola};
use giant::decompose::{decompose, two_core};
use giant::multigraph::{deserialize, largest_component, to_edge_list_string};
use giant::observables::{diameter, diameter_all_pairs, diameter_double_sweep};
use giant::oracle::{ecdf_ks_statistic, exhaustive_two_core, floyd_warshall_diameter};
use giant::stats::{chi_square_gof, ks_two_sample, summarize};
use giant::{stream, Multigraph};

fn multigraph(max_n: usize, max_m: usize) -> impl Strategy<Value = Multigraph> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n), 0..=max_m)
            .prop_map(move |pairs| Multigraph::from_pairs(n, &pairs).unwrap())
    })
}

/// Random recursive tree with extra chords; always connected.
fn connected(max_n: usize) -> impl Strategy<Value = Multigraph> {
    (2..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<prop::sample::Index>(), n - 1),
            prop::collection::vec((0..n, 0..n), 0..n / 3 + 2),
        )
            .prop_map(move |(parents, chords)| {
                let mut g = Multigraph::new(n);
                for (v, p) in parents.iter().enumerate() {
                    g.add_edge(p.index(v + 1), v + 1);
                }
                for (a, b) in chords {
                    g.add_edge(a, b);
                }
                g
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn peeling_matches_subset_oracle(g in multigraph(12, 20)) {
        prop_assert_eq!(two_core(&g), exhaustive_two_core(&g).unwrap());
    }

    #[test]
    fn decomposition_accounts_for_the_core(g in multigraph(60, 90)) {
        let d = decompose(&g).unwrap();
        d.verify(&g).unwrap();
        let s = d.summary();
        let core_edges = d.core.edge_count();
        prop_assert_eq!(s.path_lengths.iter().sum::<usize>() + s.stripped_cycle_lengths.iter().sum::<usize>(), core_edges);
        for v in 0..d.kernel.vertex_count() {
            prop_assert!(d.kernel.degrees()[v] >= 3);
        }
        prop_assert_eq!(d.bushes.len(), d.core_vertices.len());
        let in_bushes: usize = s.bush_sizes.iter().sum();
        prop_assert!(in_bushes <= g.vertex_count());
        prop_assert_eq!(d.core_degree_two_count() + d.kernel.vertex_count(), d.core_vertices.len());
    }

    #[test]
    fn edge_list_round_trip(g in multigraph(40, 80)) {
        let text = to_edge_list_string(&g);
        let back = deserialize(text.as_bytes()).unwrap();
        prop_assert_eq!(back.vertex_count(), g.vertex_count());
        prop_assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn diameter_agrees_with_oracles(g in connected(80)) {
        let exact = diameter(&g).unwrap();
        prop_assert_eq!(Some(exact), floyd_warshall_diameter(&g));
        prop_assert_eq!(exact, diameter_all_pairs(&g).unwrap());
        prop_assert!(diameter_double_sweep(&g).unwrap() <= exact);
    }

    #[test]
    fn ks_statistic_matches_ecdf(xs in prop::collection::vec(0u8..20, 5..40), ys in prop::collection::vec(0u8..20, 5..40)) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let ys: Vec<f64> = ys.into_iter().map(f64::from).collect();
        let out = ks_two_sample(&xs, &ys).unwrap();
        prop_assert!((out.d - ecdf_ks_statistic(&xs, &ys)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&out.p));
        let rev = ks_two_sample(&ys, &xs).unwrap();
        prop_assert_eq!(out.d, rev.d);
    }

    #[test]
    fn summary_is_ordered(xs in prop::collection::vec(-1e6f64..1e6, 1..60)) {
        let s = summarize(&xs).unwrap();
        prop_assert!(s.min <= s.q05 && s.q05 <= s.q25 && s.q25 <= s.median);
        prop_assert!(s.median <= s.q75 && s.q75 <= s.q95 && s.q95 <= s.max);
        prop_assert!(s.min <= s.mean && s.mean <= s.max);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cola_matches_every_clone_once(n in 1usize..400, lambda in 0.2f64..3.0, beta in 0.05f64..0.95, seed in any::<u64>()) {
        let cell = generate_cell(n, lambda, &mut stream::derive(seed, "cell", 0)).unwrap();
        let r = run_cola(&cell, beta, false, &mut stream::derive(seed, "run", 0)).unwrap();
        prop_assert!(r.completed);
        let mut seen = vec![0u8; cell.clone_count()];
        for &(a, b) in &r.matching {
            seen[a] += 1;
            seen[b] += 1;
        }
        if let Some(s) = r.special {
            seen[s] += 1;
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert!(r.lambda_c >= 0.0 && r.lambda_c <= lambda);
        prop_assert_eq!(r.core_at_lambda_c(&cell), two_core(&r.to_multigraph(&cell)));
    }

    #[test]
    fn chi_square_of_exact_expectation_is_zero(counts in prop::collection::vec(5u64..50, 2..12)) {
        let expected: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let out = chi_square_gof(&counts, &expected).unwrap();
        prop_assert!(out.stat.abs() < 1e-9);
        prop_assert!(out.p > 0.999);
    }
}

#[test]
fn giant_of_gnp_is_found() {
    let g = giant::models::sample_gnp_p(5000, 1.5 / 5000.0, &mut stream::seeded(3));
    let comp = largest_component(&g);
    assert!(comp.len() > 1000, "{}", comp.len());
    let sub = g.induced_subgraph(&comp);
    assert_eq!(largest_component(&sub).len(), sub.vertex_count());
}
