//! C ABI for `hbdiff`.
//!
//! Graphs and biased systems are opaque handles created by `hbd_*_new`-style
//! calls and released with the matching `*_free`. Every fallible call returns
//! an [`HbdStatus`]; on failure `hbd_last_error` describes the problem for the
//! calling thread. Output vectors are written into caller-owned buffers whose
//! length is passed alongside.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hbdiff::diffusion::{self, RunOptions};
use hbdiff::io::{self, InputFormat};
use hbdiff::{BiasFunction, BiasedSystem, Error, ErrorCategory, GeneratorConfig, HbGraph, Ranking};

/// Status codes. Non-zero codes 2 to 7 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HbdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Structure = 3,
    Numerical = 4,
    Generation = 5,
    Parse = 6,
    Io = 7,
    BufferSize = 8,
    Panic = 9,
}

/// Opaque hb-graph handle.
pub struct HbdGraph(HbGraph);

/// Opaque handle for a graph with its vertex and hb-edge biases applied.
pub struct HbdSystem {
    graph: HbGraph,
    system: BiasedSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(HbdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.category() {
            ErrorCategory::InvalidInput => HbdStatus::InvalidInput,
            ErrorCategory::Structure => HbdStatus::Structure,
            ErrorCategory::Numerical => HbdStatus::Numerical,
            ErrorCategory::Generation => HbdStatus::Generation,
            ErrorCategory::Parse => HbdStatus::Parse,
            ErrorCategory::Io => HbdStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HbdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HbdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            HbdStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(HbdStatus::NullPointer, format!("{what} is null"))
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(HbdStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn out_slice<'a>(buf: *mut f64, len: usize, want: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if buf.is_null() {
        return Err(null(what));
    }
    if len != want {
        return Err(Failure(
            HbdStatus::BufferSize,
            format!("{what} has length {len}, expected {want}"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(buf, len))
}

unsafe fn in_slice<'a>(buf: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if buf.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(buf, len))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hbd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses an hb-graph from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hbd_graph_from_json(json: *const c_char, out: *mut *mut HbdGraph) -> HbdStatus {
    guard(|| {
        let g = io::graph_from_json(c_str(json, "json")?)?;
        put(out, HbdGraph(g))
    })
}

/// Reads an hb-graph file; `.csv` files are read as co-occurrence lists,
/// anything else as JSON.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hbd_graph_read(path: *const c_char, out: *mut *mut HbdGraph) -> HbdStatus {
    guard(|| {
        let path = Path::new(c_str(path, "path")?);
        let g = io::ingest(path, InputFormat::from_path(path))?;
        put(out, HbdGraph(g))
    })
}

/// Generates a grouped random hb-graph. `config_json` may be NULL for the
/// default configuration; missing fields take their defaults.
///
/// # Safety
/// `config_json` must be NULL or a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hbd_graph_generate(
    config_json: *const c_char,
    seed: u64,
    out: *mut *mut HbdGraph,
) -> HbdStatus {
    guard(|| {
        let cfg: GeneratorConfig = if config_json.is_null() {
            GeneratorConfig::default()
        } else {
            serde_json::from_str(c_str(config_json, "config_json")?)
                .map_err(|e| Failure(HbdStatus::InvalidInput, format!("generator config: {e}")))?
        };
        let g = hbdiff::generate(&cfg.with_seed(seed))?;
        put(out, HbdGraph(g.graph))
    })
}

/// # Safety
/// `graph` must be NULL or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn hbd_graph_free(graph: *mut HbdGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of vertices, or 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hbd_graph_vertex_count(graph: *const HbdGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.n())
}

/// Number of hb-edges, or 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hbd_graph_hbedge_count(graph: *const HbdGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.p())
}

/// Builds the biased system of a connected graph. Biases use the textual
/// form `id`, `pow:<a>` or `exp:<a>`. The graph handle stays owned by the
/// caller.
///
/// # Safety
/// `graph` must be a live handle, the bias strings NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hbd_system_new(
    graph: *const HbdGraph,
    bias_vertex: *const c_char,
    bias_hbedge: *const c_char,
    out: *mut *mut HbdSystem,
) -> HbdStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        let bv: BiasFunction = c_str(bias_vertex, "bias_vertex")?.parse()?;
        let be: BiasFunction = c_str(bias_hbedge, "bias_hbedge")?.parse()?;
        let system = BiasedSystem::new(&g.0, bv, be)?;
        put(
            out,
            HbdSystem {
                graph: g.0.clone(),
                system,
            },
        )
    })
}

/// # Safety
/// `system` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hbd_system_free(system: *mut HbdSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Runs `iterations` full diffusion steps from the uniform vertex state.
/// `alpha` (length n) receives the vertex values and `epsilon` (length p)
/// the hb-edge values of the last half step.
///
/// # Safety
/// `system` must be a live handle; the buffers must hold the given lengths.
#[no_mangle]
pub unsafe extern "C" fn hbd_diffuse(
    system: *const HbdSystem,
    iterations: usize,
    alpha: *mut f64,
    n: usize,
    epsilon: *mut f64,
    p: usize,
) -> HbdStatus {
    guard(|| {
        let s = system.as_ref().ok_or_else(|| null("system"))?;
        let alpha = out_slice(alpha, n, s.graph.n(), "alpha")?;
        let epsilon = out_slice(epsilon, p, s.graph.p(), "epsilon")?;
        let opts = RunOptions {
            iterations,
            convergence_tol: None,
        };
        let outcome = diffusion::run(&s.graph, &s.system, &opts)?;
        alpha.copy_from_slice(&outcome.state.alpha);
        epsilon.copy_from_slice(&outcome.state.epsilon);
        Ok(())
    })
}

/// Stationary distributions by power iteration until the L1 change of a
/// full step is at most `tol`.
///
/// # Safety
/// `system` must be a live handle; the buffers must hold the given lengths.
#[no_mangle]
pub unsafe extern "C" fn hbd_stationary(
    system: *const HbdSystem,
    tol: f64,
    max_iter: usize,
    pi_vertex: *mut f64,
    n: usize,
    pi_hbedge: *mut f64,
    p: usize,
) -> HbdStatus {
    guard(|| {
        let s = system.as_ref().ok_or_else(|| null("system"))?;
        let pv = out_slice(pi_vertex, n, s.graph.n(), "pi_vertex")?;
        let pe = out_slice(pi_hbedge, p, s.graph.p(), "pi_hbedge")?;
        let st = diffusion::stationary_by_power_iteration(&s.system, tol, max_iter)?;
        pv.copy_from_slice(&st.vertex);
        pe.copy_from_slice(&st.hbedge);
        Ok(())
    })
}

/// Ranks `scores` in decreasing order. `order[r]` receives the entity at
/// position `r` and `tie_group[i]` the 0-based tie group of entity `i`; either
/// may be NULL.
///
/// # Safety
/// `scores` must hold `len` values and non-NULL outputs `len` slots.
#[no_mangle]
pub unsafe extern "C" fn hbd_rank(
    scores: *const f64,
    len: usize,
    tie_eps: f64,
    order: *mut usize,
    tie_group: *mut usize,
) -> HbdStatus {
    guard(|| {
        let r = Ranking::from_scores(in_slice(scores, len, "scores")?, tie_eps)?;
        if !order.is_null() {
            std::slice::from_raw_parts_mut(order, len).copy_from_slice(r.order());
        }
        if !tie_group.is_null() {
            let groups = std::slice::from_raw_parts_mut(tie_group, len);
            for (i, g) in groups.iter_mut().enumerate() {
                *g = r.tie_group(i);
            }
        }
        Ok(())
    })
}

/// Strict and large Kendall tau between the rankings induced by two score
/// vectors over the same `len` entities.
///
/// # Safety
/// `a` and `b` must hold `len` values; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hbd_kendall_tau(
    a: *const f64,
    b: *const f64,
    len: usize,
    tie_eps: f64,
    tau_strict: *mut f64,
    tau_large: *mut f64,
) -> HbdStatus {
    guard(|| {
        if tau_strict.is_null() || tau_large.is_null() {
            return Err(null("tau output"));
        }
        let ra = Ranking::from_scores(in_slice(a, len, "a")?, tie_eps)?;
        let rb = Ranking::from_scores(in_slice(b, len, "b")?, tie_eps)?;
        let counts = hbdiff::pair_counts(&ra, &rb)?;
        *tau_strict = counts.tau_strict();
        *tau_large = counts.tau_large();
        Ok(())
    })
}
