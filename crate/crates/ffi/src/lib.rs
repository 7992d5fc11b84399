//! C interface to the `giant` crate.
//!
//! Graphs and decompositions are handed out as opaque pointers that must
//! be released with the matching `*_free` function. Every fallible call
//! returns a [`GiantStatus`]; on failure, [`giant_last_error`] describes
//! the most recent error on the calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use giant::cola::{generate_cell, run_cola};
use giant::decompose::{decompose, CoreDecomposition};
use giant::multigraph::{deserialize, largest_component, serialize, Multigraph};
use giant::observables::diameter;
use giant::{analytic, stream, Error, ModelKind, ModelSpec};

#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GiantStatus {
    GIANT_OK = 0,
    GIANT_ERR_NULL = 1,
    GIANT_ERR_DOMAIN = 2,
    GIANT_ERR_CONFIG = 3,
    GIANT_ERR_PARSE = 4,
    GIANT_ERR_IO = 5,
    GIANT_ERR_STRUCTURE = 6,
    GIANT_ERR_DISCONNECTED = 7,
    GIANT_ERR_RUNTIME = 8,
    GIANT_ERR_UTF8 = 9,
    GIANT_ERR_PANIC = 10,
}

use GiantStatus::*;

/// Opaque multigraph handle.
pub struct GiantGraph(Multigraph);

/// Opaque decomposition handle.
pub struct GiantDecomposition(CoreDecomposition);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GiantSummary {
    pub core_size: usize,
    pub stripped_cycle_count: usize,
    pub stripped_cycle_vertex_count: usize,
    pub kernel_vertices: usize,
    pub kernel_edges: usize,
    pub max_two_path: usize,
    pub bush_size_max: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GiantStatus {
    match e {
        Error::Domain(_) | Error::Parity(_) | Error::Size(_) => GIANT_ERR_DOMAIN,
        Error::Config(_) => GIANT_ERR_CONFIG,
        Error::Parse { .. } => GIANT_ERR_PARSE,
        Error::Io(_) => GIANT_ERR_IO,
        Error::Structure(_) | Error::EmptyKernel => GIANT_ERR_STRUCTURE,
        Error::Disconnected => GIANT_ERR_DISCONNECTED,
        _ => GIANT_ERR_RUNTIME,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), GiantStatus>) -> GiantStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GIANT_OK,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            GIANT_ERR_PANIC
        }
    }
}

fn fail(e: Error) -> GiantStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> GiantStatus {
    set_error(format!("{what} is NULL"));
    GIANT_ERR_NULL
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, GiantStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        GIANT_ERR_UTF8
    })
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, GiantStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn graph_arg<'a>(g: *const GiantGraph) -> Result<&'a Multigraph, GiantStatus> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| null("graph"))
}

/// Message of the last failed call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn giant_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Conjugate μ < 1 with μe^{−μ} = λe^{−λ}.
#[no_mangle]
pub unsafe extern "C" fn giant_conjugate_mu(lambda: f64, out: *mut f64) -> GiantStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = analytic::conjugate_mu(lambda).map_err(fail)?;
        Ok(())
    })
}

/// Survival probability θ with θ = 1 − e^{−θλ}.
#[no_mangle]
pub unsafe extern "C" fn giant_theta_lambda(lambda: f64, out: *mut f64) -> GiantStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = analytic::theta_lambda(lambda).map_err(fail)?;
        Ok(())
    })
}

/// Samples `model` (e.g. "gnp", "c1_general") on `n` vertices with
/// p = (1 + eps) / n.
#[no_mangle]
pub unsafe extern "C" fn giant_graph_sample(
    model: *const c_char,
    n: usize,
    eps: f64,
    seed: u64,
    out: *mut *mut GiantGraph,
) -> GiantStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let kind: ModelKind = str_arg(model, "model")?.parse().map_err(fail)?;
        let spec = ModelSpec::new(kind, n, eps);
        let mut rng = stream::derive(seed, kind.as_str(), 0);
        let sample = spec.sample(&mut rng).map_err(fail)?;
        *out = Box::into_raw(Box::new(GiantGraph(sample.graph)));
        Ok(())
    })
}

/// Builds a graph from `m` edges `(us[i], vs[i])`.
#[no_mangle]
pub unsafe extern "C" fn giant_graph_from_edges(
    n: usize,
    us: *const usize,
    vs: *const usize,
    m: usize,
    out: *mut *mut GiantGraph,
) -> GiantStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if m > 0 && (us.is_null() || vs.is_null()) {
            return Err(null("edge array"));
        }
        let mut g = Multigraph::with_capacity(n, m);
        if m > 0 {
            let us = std::slice::from_raw_parts(us, m);
            let vs = std::slice::from_raw_parts(vs, m);
            for (&u, &v) in us.iter().zip(vs) {
                g.try_add_edge(u, v).map_err(fail)?;
            }
        }
        *out = Box::into_raw(Box::new(GiantGraph(g)));
        Ok(())
    })
}

/// Reads an edge-list file.
#[no_mangle]
pub unsafe extern "C" fn giant_graph_read(
    path: *const c_char,
    out: *mut *mut GiantGraph,
) -> GiantStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let file = File::open(path).map_err(|e| fail(e.into()))?;
        let g = deserialize(BufReader::new(file)).map_err(fail)?;
        *out = Box::into_raw(Box::new(GiantGraph(g)));
        Ok(())
    })
}

/// Writes `graph` as an edge-list file.
#[no_mangle]
pub unsafe extern "C" fn giant_graph_write(
    graph: *const GiantGraph,
    path: *const c_char,
) -> GiantStatus {
    guard(|| {
        let g = graph_arg(graph)?;
        let path = str_arg(path, "path")?;
        let mut file = File::create(path).map_err(|e| fail(e.into()))?;
        serialize(g, &mut file).map_err(fail)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn giant_graph_vertex_count(graph: *const GiantGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.vertex_count())
}

#[no_mangle]
pub unsafe extern "C" fn giant_graph_edge_count(graph: *const GiantGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Induced subgraph on the largest component, relabelled in vertex order.
#[no_mangle]
pub unsafe extern "C" fn giant_graph_largest_component(
    graph: *const GiantGraph,
    out: *mut *mut GiantGraph,
) -> GiantStatus {
    guard(|| {
        let g = graph_arg(graph)?;
        let out = out_arg(out, "out")?;
        let sub = g.induced_subgraph(&largest_component(g));
        *out = Box::into_raw(Box::new(GiantGraph(sub)));
        Ok(())
    })
}

/// Exact diameter of a connected graph.
#[no_mangle]
pub unsafe extern "C" fn giant_graph_diameter(
    graph: *const GiantGraph,
    out: *mut u32,
) -> GiantStatus {
    guard(|| {
        let g = graph_arg(graph)?;
        let out = out_arg(out, "out")?;
        *out = diameter(g).map_err(fail)?;
        Ok(())
    })
}

/// Releases a graph; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn giant_graph_free(graph: *mut GiantGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// 2-core, kernel and bush decomposition of the whole graph.
#[no_mangle]
pub unsafe extern "C" fn giant_decompose(
    graph: *const GiantGraph,
    out: *mut *mut GiantDecomposition,
) -> GiantStatus {
    guard(|| {
        let g = graph_arg(graph)?;
        let out = out_arg(out, "out")?;
        let d = decompose(g).map_err(fail)?;
        *out = Box::into_raw(Box::new(GiantDecomposition(d)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn giant_decomposition_summary(
    d: *const GiantDecomposition,
    out: *mut GiantSummary,
) -> GiantStatus {
    guard(|| {
        let d = &d.as_ref().ok_or_else(|| null("decomposition"))?.0;
        let out = out_arg(out, "out")?;
        *out = GiantSummary {
            core_size: d.core_vertices.len(),
            stripped_cycle_count: d.stripped_cycles.len(),
            stripped_cycle_vertex_count: d.stripped_cycle_vertex_count(),
            kernel_vertices: d.kernel.vertex_count(),
            kernel_edges: d.kernel.edge_count(),
            max_two_path: d.path_lengths.iter().copied().max().unwrap_or(0),
            bush_size_max: d.bushes.iter().map(|b| b.size()).max().unwrap_or(0),
        };
        Ok(())
    })
}

/// Copies up to `cap` kernel path lengths into `buf`; `*len` receives the
/// full count, so a call with `cap = 0` sizes the buffer.
#[no_mangle]
pub unsafe extern "C" fn giant_decomposition_path_lengths(
    d: *const GiantDecomposition,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> GiantStatus {
    guard(|| {
        let d = &d.as_ref().ok_or_else(|| null("decomposition"))?.0;
        let len = out_arg(len, "len")?;
        *len = d.path_lengths.len();
        let k = cap.min(d.path_lengths.len());
        if k > 0 {
            if buf.is_null() {
                return Err(null("buf"));
            }
            std::slice::from_raw_parts_mut(buf, k).copy_from_slice(&d.path_lengths[..k]);
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn giant_decomposition_free(d: *mut GiantDecomposition) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Λ_C of a random Poisson λ-cell on `n` vertices with phase ratio `beta`.
#[no_mangle]
pub unsafe extern "C" fn giant_cola_lambda_c(
    n: usize,
    lambda: f64,
    beta: f64,
    seed: u64,
    out: *mut f64,
) -> GiantStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cell =
            generate_cell(n, lambda, &mut stream::derive(seed, "cola-cell", 0)).map_err(fail)?;
        let mut rng = stream::derive(seed, "cola-run", 0);
        *out = run_cola(&cell, beta, true, &mut rng)
            .map_err(fail)?
            .lambda_c;
        Ok(())
    })
}
