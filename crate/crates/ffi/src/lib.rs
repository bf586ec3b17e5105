//! C ABI for graph-distill.
//!
//! Conventions:
//!
//! * Every fallible function returns a [`GdStatus`]; results come back
//!   through out-pointers. On failure, [`gd_last_error_message`] describes
//!   the most recent error on the calling thread.
//! * Objects are opaque handles created by `*_new` / `*_load` and released
//!   with the matching `*_free`. Passing NULL to a `*_free` is a no-op.
//! * Strings going in are NUL-terminated UTF-8. Strings coming out are owned
//!   by the caller and must be released with [`gd_string_free`].
//! * Handles are not thread-safe; share one across threads only with
//!   external locking.
//!
//! The header `include/graph_distill.h` is regenerated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use graph_distill::config::ExperimentConfig;
use graph_distill::experiment::{self, Plan};
use graph_distill::{Error, ErrorKind, LanguageGraph, MultilingualModel, TranslationBackend};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Bad configuration or arguments.
    Usage = 3,
    /// Malformed or inconsistent data.
    Data = 4,
    /// Failure while running (IO, untrained direction, remote call).
    Runtime = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// A language graph.
pub struct GdGraph(LanguageGraph);

/// A trained translation model.
pub struct GdModel(MultilingualModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(GdStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e.kind() {
            ErrorKind::Usage => GdStatus::Usage,
            ErrorKind::Data => GdStatus::Data,
            ErrorKind::Runtime => GdStatus::Runtime,
        };
        Fail(status, e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GdStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GdStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(GdStatus::NullArgument, format!("`{name}` is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(GdStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

unsafe fn mut_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(GdStatus::NullArgument, format!("`{name}` is NULL")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(GdStatus::NullArgument, format!("`{name}` is NULL")))
}

fn out_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("NULs replaced").into_raw()
}

/// Message of the last failed call on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed yet.
#[no_mangle]
pub unsafe extern "C" fn gd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates an empty graph. Never returns NULL.
#[no_mangle]
pub extern "C" fn gd_graph_new() -> *mut GdGraph {
    Box::into_raw(Box::new(GdGraph(LanguageGraph::new())))
}

/// # Safety
/// `graph` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_free(graph: *mut GdGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Loads a graph spec (TOML) from `path`.
///
/// # Safety
/// `path` must be a valid C string; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_load(path: *const c_char, out: *mut *mut GdGraph) -> GdStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        let g = LanguageGraph::load(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(GdGraph(g)));
        Ok(())
    })
}

/// # Safety
/// `graph` must be a live handle and `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_save(graph: *const GdGraph, path: *const c_char) -> GdStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?;
        g.0.save(Path::new(str_arg(path, "path")?))?;
        Ok(())
    })
}

/// Declares a language with `mono` monolingual sentences.
///
/// # Safety
/// `graph` must be a live handle and `code` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_add_language(graph: *mut GdGraph, code: *const c_char, mono: u64) -> GdStatus {
    guard(|| {
        let g = mut_arg(graph, "graph")?;
        let code = str_arg(code, "code")?;
        g.0.add_language(code)?;
        g.0.set_mono(code, mono)?;
        Ok(())
    })
}

/// Adds or overwrites the directed edge `src -> tgt` with `count` pairs.
///
/// # Safety
/// `graph` must be a live handle; `src` and `tgt` valid C strings.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_add_edge(
    graph: *mut GdGraph,
    src: *const c_char,
    tgt: *const c_char,
    count: u64,
) -> GdStatus {
    guard(|| {
        let g = mut_arg(graph, "graph")?;
        g.0.add_edge(str_arg(src, "src")?, str_arg(tgt, "tgt")?, count)?;
        Ok(())
    })
}

/// Number of directed edges.
///
/// # Safety
/// `graph` must be NULL or a live handle. NULL yields 0.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_edge_count(graph: *const GdGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Bilingual volume of `code`: sentence pairs on all incident edges.
///
/// # Safety
/// `graph` must be a live handle, `code` a valid C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_bilingual_volume(
    graph: *const GdGraph,
    code: *const c_char,
    out: *mut u64,
) -> GdStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?;
        let out = mut_arg(out, "out")?;
        *out = g.0.bilingual_volume(str_arg(code, "code")?)?;
        Ok(())
    })
}

/// Loads a model saved by the CLI (`initial_model.json`, `final_model.json`, ...).
///
/// # Safety
/// `path` must be a valid C string; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn gd_model_load(path: *const c_char, out: *mut *mut GdModel) -> GdStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        let m = MultilingualModel::load(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(GdModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_model_free(model: *mut GdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Translates one whitespace-tokenized sentence from `src` to `tgt`.
/// On success `*out` holds a new string to release with [`gd_string_free`].
///
/// # Safety
/// `model` must be a live handle, string arguments valid C strings, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gd_model_translate(
    model: *const GdModel,
    src: *const c_char,
    tgt: *const c_char,
    sentence: *const c_char,
    out: *mut *mut c_char,
) -> GdStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let out = mut_arg(out, "out")?;
        let input = [str_arg(sentence, "sentence")?.to_string()];
        let mut hyp = m.0.translate(str_arg(src, "src")?, str_arg(tgt, "tgt")?, &input)?;
        *out = out_string(hyp.remove(0));
        Ok(())
    })
}

/// Corpus BLEU of `n` hypotheses against `n` references, in `[0, 100]`.
///
/// # Safety
/// `hyps` and `refs` must each point to `n` valid C strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gd_bleu(
    hyps: *const *const c_char,
    refs: *const *const c_char,
    n: usize,
    out: *mut f64,
) -> GdStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        if n > 0 && (hyps.is_null() || refs.is_null()) {
            return Err(Fail(GdStatus::NullArgument, "`hyps` or `refs` is NULL".into()));
        }
        let read = |base: *const *const c_char, name: &str| -> Result<Vec<&str>, Fail> {
            (0..n).map(|i| str_arg(*base.add(i), name)).collect()
        };
        let (h, r) = if n == 0 { (Vec::new(), Vec::new()) } else { (read(hyps, "hyps")?, read(refs, "refs")?) };
        *out = graph_distill::bleu(&h, &r)?.score;
        Ok(())
    })
}

fn load_experiment(config: &str) -> Result<ExperimentConfig, Fail> {
    let mut cfg = ExperimentConfig::load(Path::new(config))?;
    cfg.apply_env(|k| std::env::var(k).ok())?;
    cfg.sync_seed();
    cfg.validate()?;
    Ok(cfg)
}

/// Generates the synthetic data described by the experiment config at
/// `config` (same as `graph-distill gen --config`).
///
/// # Safety
/// `config` must be a valid C string.
#[no_mangle]
pub unsafe extern "C" fn gd_generate(config: *const c_char) -> GdStatus {
    guard(|| {
        let cfg = load_experiment(str_arg(config, "config")?)?;
        experiment::generate(&cfg)?;
        Ok(())
    })
}

/// Runs `mode` (`initial`, `bt`, `forward`, `graph` or `compare`) on
/// previously generated data, writes reports, and returns the rendered table
/// in `*table` (release with [`gd_string_free`]).
///
/// # Safety
/// `config` and `mode` must be valid C strings; `table` writable.
#[no_mangle]
pub unsafe extern "C" fn gd_run_experiment(
    config: *const c_char,
    mode: *const c_char,
    table: *mut *mut c_char,
) -> GdStatus {
    guard(|| {
        let table = mut_arg(table, "table")?;
        let plan: Plan = str_arg(mode, "mode")?.parse()?;
        let cfg = load_experiment(str_arg(config, "config")?)?;
        let text = experiment::run(&cfg, plan).map_err(|a| {
            let mut f = Fail::from(a.error);
            if !a.reports.is_empty() {
                f = Fail(GdStatus::Runtime, format!("aborted after {} iteration(s): {}", a.reports.len(), f.1));
            }
            f
        })?;
        *table = out_string(text);
        Ok(())
    })
}
