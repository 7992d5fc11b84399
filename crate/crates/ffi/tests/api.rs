use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use giant_ffi::*;
use GiantStatus::*;

fn last_error() -> String {
    let p = giant_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn analytic_values() {
    let mut mu = 0.0;
    assert_eq!(unsafe { giant_conjugate_mu(2.0, &mut mu) }, GIANT_OK);
    assert!((mu - 0.406_375_739_959_959_4).abs() < 1e-12);
    let mut theta = 0.0;
    assert_eq!(unsafe { giant_theta_lambda(2.0, &mut theta) }, GIANT_OK);
    assert!((theta - (1.0 - (-2.0 * theta).exp())).abs() < 1e-12);
    assert_eq!(
        unsafe { giant_conjugate_mu(-1.0, &mut mu) },
        GIANT_ERR_DOMAIN
    );
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { giant_conjugate_mu(2.0, ptr::null_mut()) },
        GIANT_ERR_NULL
    );
    assert!(last_error().contains("NULL"));
}

#[test]
fn theta_graph_round_trip() {
    // two hubs joined by paths of length 1, 2 and 3, plus a pendant vertex
    let us = [0usize, 0, 2, 0, 3, 4, 1];
    let vs = [1usize, 2, 1, 3, 4, 1, 5];
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { giant_graph_from_edges(6, us.as_ptr(), vs.as_ptr(), 7, &mut g) },
        GIANT_OK
    );
    unsafe {
        assert_eq!(giant_graph_vertex_count(g), 6);
        assert_eq!(giant_graph_edge_count(g), 7);
        let mut diam = 0;
        assert_eq!(giant_graph_diameter(g, &mut diam), GIANT_OK);
        assert_eq!(diam, 3);

        let mut d = ptr::null_mut();
        assert_eq!(giant_decompose(g, &mut d), GIANT_OK);
        let mut s = GiantSummary::default();
        assert_eq!(giant_decomposition_summary(d, &mut s), GIANT_OK);
        assert_eq!(s.core_size, 5);
        assert_eq!(s.kernel_vertices, 2);
        assert_eq!(s.kernel_edges, 3);
        assert_eq!(s.max_two_path, 3);
        let mut len = 0;
        assert_eq!(
            giant_decomposition_path_lengths(d, ptr::null_mut(), 0, &mut len),
            GIANT_OK
        );
        assert_eq!(len, 3);
        let mut buf = vec![0usize; len];
        assert_eq!(
            giant_decomposition_path_lengths(d, buf.as_mut_ptr(), len, &mut len),
            GIANT_OK
        );
        buf.sort_unstable();
        assert_eq!(buf, vec![1, 2, 3]);
        giant_decomposition_free(d);

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("g.txt").to_str().unwrap()).unwrap();
        assert_eq!(giant_graph_write(g, path.as_ptr()), GIANT_OK);
        let mut h = ptr::null_mut();
        assert_eq!(giant_graph_read(path.as_ptr(), &mut h), GIANT_OK);
        assert_eq!(giant_graph_edge_count(h), 7);
        giant_graph_free(h);
        giant_graph_free(g);
    }
}

#[test]
fn bad_inputs() {
    let mut g = ptr::null_mut();
    let us = [0usize];
    let vs = [9usize];
    unsafe {
        assert_ne!(
            giant_graph_from_edges(2, us.as_ptr(), vs.as_ptr(), 1, &mut g),
            GIANT_OK
        );
        assert!(g.is_null());
        let missing = CString::new("/nonexistent/graph.txt").unwrap();
        assert_eq!(giant_graph_read(missing.as_ptr(), &mut g), GIANT_ERR_IO);
        let model = CString::new("no_such_model").unwrap();
        assert_ne!(
            giant_graph_sample(model.as_ptr(), 100, 0.1, 0, &mut g),
            GIANT_OK
        );
        assert_eq!(
            giant_graph_sample(ptr::null(), 100, 0.1, 0, &mut g),
            GIANT_ERR_NULL
        );
        assert_eq!(giant_graph_vertex_count(ptr::null()), 0);
        giant_graph_free(ptr::null_mut());
        giant_decomposition_free(ptr::null_mut());
    }
}

#[test]
fn sample_is_deterministic() {
    let model = CString::new("gnp").unwrap();
    let mut counts = Vec::new();
    for _ in 0..2 {
        let mut g = ptr::null_mut();
        let mut giant = ptr::null_mut();
        unsafe {
            assert_eq!(
                giant_graph_sample(model.as_ptr(), 20_000, 0.2, 7, &mut g),
                GIANT_OK
            );
            assert_eq!(giant_graph_largest_component(g, &mut giant), GIANT_OK);
            counts.push((giant_graph_edge_count(g), giant_graph_vertex_count(giant)));
            giant_graph_free(giant);
            giant_graph_free(g);
        }
    }
    assert_eq!(counts[0], counts[1]);
    assert!(counts[0].1 > 1000);
}

#[test]
fn cola_lambda_c_in_range() {
    let mut lc = 0.0;
    assert_eq!(
        unsafe { giant_cola_lambda_c(2000, 1.5, 0.3, 3, &mut lc) },
        GIANT_OK
    );
    assert!(lc > 0.0 && lc < 1.5, "{lc}");
    assert_eq!(
        unsafe { giant_cola_lambda_c(2000, 1.5, 1.5, 3, &mut lc) },
        GIANT_ERR_DOMAIN
    );
}

#[test]
fn header_is_generated_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/giant.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "giant_last_error",
        "giant_conjugate_mu",
        "giant_graph_sample",
        "giant_graph_free",
        "giant_decompose",
        "giant_decomposition_summary",
        "giant_cola_lambda_c",
        "GIANT_ERR_PANIC",
        "typedef struct GiantGraph GiantGraph",
    ] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    if let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c"])
        .arg(&header)
        .output()
    {
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
