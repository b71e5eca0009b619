//! C ABI for modelweave.
//!
//! Every function returns an [`MwStatus`]. Results come back through out
//! pointers. Handles are opaque and owned by the caller once returned; free
//! each with its matching `*_free` function. Strings returned through
//! `char **` are NUL-terminated UTF-8 and must be released with
//! [`mw_string_free`]. On failure, [`mw_last_error`] describes the cause for
//! the calling thread.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access described.
//! Input strings must be NUL-terminated. Arrays must hold `n` valid elements.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use modelweave::dsl::{
    export_diagram, export_structured, export_woven_diagram, parse_aspect, parse_core, parse_requirements,
    parse_weaving, print_core, print_woven, Document,
};
use modelweave::{
    weave, AspectModel, CoreModel, DecompositionGraph, WeaveError, WeaveOptions, WeavingModel, WovenModel,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidModel = 4,
    Unresolved = 5,
    WeaveFailed = 6,
    RequirementError = 7,
    Panic = 8,
}

pub struct MwCore(CoreModel);
pub struct MwAspects(AspectModel);
pub struct MwWeaving(WeavingModel);
pub struct MwWoven(WovenModel);
pub struct MwGraph(DecompositionGraph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MwStatus, String);

type Res<T> = Result<T, Failure>;

fn fail<T>(status: MwStatus, msg: impl Into<String>) -> Res<T> {
    Err(Failure(status, msg.into()))
}

fn set_error(msg: Option<String>) {
    let c = msg.map(|m| CString::new(m.replace('\0', " ")).expect("no interior NUL"));
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Res<()>) -> MwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(None);
            MwStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(Some(msg));
            status
        }
        Err(_) => {
            set_error(Some("internal panic".into()));
            MwStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return fail(MwStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(MwStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref()
        .map_or_else(|| fail(MwStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Res<&'a mut T> {
    p.as_mut()
        .map_or_else(|| fail(MwStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn strings(p: *const *const c_char, n: usize, what: &str) -> Res<BTreeSet<String>> {
    if n == 0 {
        return Ok(BTreeSet::new());
    }
    if p.is_null() {
        return fail(MwStatus::NullPointer, format!("{what} is null"));
    }
    std::slice::from_raw_parts(p, n)
        .iter()
        .map(|s| text(*s, what).map(str::to_string))
        .collect()
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior NUL").into_raw()
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn mw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn mw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub unsafe extern "C" fn mw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn parse_into<T, H>(
    source: *const c_char,
    result: *mut *mut H,
    parse: impl FnOnce(&str) -> Result<T, modelweave::dsl::ParseDiagnostic>,
    wrap: impl FnOnce(T) -> H,
) -> MwStatus {
    guard(|| {
        let slot = out(result, "result")?;
        let value = parse(text(source, "source")?).or_else(|d| fail(MwStatus::ParseError, d.to_string()))?;
        *slot = boxed(wrap(value));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mw_core_parse(source: *const c_char, result: *mut *mut MwCore) -> MwStatus {
    parse_into(source, result, |s| parse_core(s, "<core>").into_result(), MwCore)
}

#[no_mangle]
pub unsafe extern "C" fn mw_core_free(h: *mut MwCore) {
    release(h)
}

#[no_mangle]
pub unsafe extern "C" fn mw_aspects_parse(source: *const c_char, result: *mut *mut MwAspects) -> MwStatus {
    parse_into(source, result, |s| parse_aspect(s, "<aspect>").into_result(), MwAspects)
}

#[no_mangle]
pub unsafe extern "C" fn mw_aspects_free(h: *mut MwAspects) {
    release(h)
}

#[no_mangle]
pub unsafe extern "C" fn mw_weaving_parse(source: *const c_char, result: *mut *mut MwWeaving) -> MwStatus {
    parse_into(
        source,
        result,
        |s| parse_weaving(s, "<weaving>").into_result(),
        MwWeaving,
    )
}

#[no_mangle]
pub unsafe extern "C" fn mw_weaving_free(h: *mut MwWeaving) {
    release(h)
}

#[no_mangle]
pub unsafe extern "C" fn mw_graph_parse(source: *const c_char, result: *mut *mut MwGraph) -> MwStatus {
    parse_into(
        source,
        result,
        |s| parse_requirements(s, "<requirements>").into_result(),
        MwGraph,
    )
}

#[no_mangle]
pub unsafe extern "C" fn mw_graph_free(h: *mut MwGraph) {
    release(h)
}

/// Number of violations in `core`. When `report` is non-null it receives the
/// rendered report, one violation per line.
#[no_mangle]
pub unsafe extern "C" fn mw_core_validate(
    core: *const MwCore,
    violations: *mut usize,
    report: *mut *mut c_char,
) -> MwStatus {
    guard(|| {
        let count = out(violations, "violations")?;
        let r = handle(core, "core")?.0.validate();
        *count = r.violations().len();
        if let Some(slot) = report.as_mut() {
            *slot = c_string(r.to_string());
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mw_core_print(core: *const MwCore, result: *mut *mut c_char) -> MwStatus {
    guard(|| {
        let slot = out(result, "result")?;
        *slot = c_string(print_core(&handle(core, "core")?.0));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mw_core_export_structured(core: *const MwCore, result: *mut *mut c_char) -> MwStatus {
    guard(|| {
        let slot = out(result, "result")?;
        *slot = c_string(export_structured(&Document::Core(handle(core, "core")?.0.clone())));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mw_core_export_diagram(core: *const MwCore, result: *mut *mut c_char) -> MwStatus {
    guard(|| {
        let slot = out(result, "result")?;
        *slot = c_string(export_diagram(&handle(core, "core")?.0));
        Ok(())
    })
}

unsafe fn pairs<'a, M: 'a, R>(
    models: *const *const M,
    weavings: *const *const MwWeaving,
    n: usize,
    what: &str,
    get: impl Fn(&'a M) -> &'a R,
) -> Res<Vec<(&'a R, &'a WeavingModel)>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if models.is_null() || weavings.is_null() {
        return fail(MwStatus::NullPointer, format!("{what} arrays are null"));
    }
    let ms = std::slice::from_raw_parts(models, n);
    let ws = std::slice::from_raw_parts(weavings, n);
    ms.iter()
        .zip(ws)
        .map(|(m, w)| Ok((get(handle(*m, what)?), &handle(*w, "weaving")?.0)))
        .collect()
}

/// Runs every core+additional weaving, then every core+aspect weaving. Each
/// model array pairs index-wise with its weaving array.
#[no_mangle]
pub unsafe extern "C" fn mw_weave(
    core: *const MwCore,
    additional: *const *const MwCore,
    additional_weavings: *const *const MwWeaving,
    n_additional: usize,
    aspects: *const *const MwAspects,
    aspect_weavings: *const *const MwWeaving,
    n_aspects: usize,
    force_first: bool,
    result: *mut *mut MwWoven,
) -> MwStatus {
    guard(|| {
        let slot = out(result, "result")?;
        let core = &handle(core, "core")?.0;
        let add = pairs(
            additional,
            additional_weavings,
            n_additional,
            "additional model",
            |m: &MwCore| &m.0,
        )?;
        let asp = pairs(aspects, aspect_weavings, n_aspects, "aspect model", |m: &MwAspects| {
            &m.0
        })?;
        let outcome = weave(core, &add, &asp, WeaveOptions { force_first }).map_err(|e| {
            let status = match e {
                WeaveError::InvalidInput { .. } | WeaveError::Weaving(_) | WeaveError::WrongWeavingKind { .. } => {
                    MwStatus::InvalidModel
                }
                WeaveError::Unresolved(_) => MwStatus::Unresolved,
                _ => MwStatus::WeaveFailed,
            };
            Failure(status, e.to_string())
        })?;
        *slot = boxed(MwWoven(outcome.woven));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mw_woven_free(h: *mut MwWoven) {
    release(h)
}

/// Core syntax followed by ordering and provenance annotations.
#[no_mangle]
pub unsafe extern "C" fn mw_woven_print(woven: *const MwWoven, result: *mut *mut c_char) -> MwStatus {
    guard(|| {
        let slot = out(result, "result")?;
        *slot = c_string(print_woven(&handle(woven, "woven")?.0));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mw_woven_export_structured(woven: *const MwWoven, result: *mut *mut c_char) -> MwStatus {
    guard(|| {
        let slot = out(result, "result")?;
        *slot = c_string(export_structured(&Document::Woven(handle(woven, "woven")?.0.clone())));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mw_woven_export_diagram(woven: *const MwWoven, result: *mut *mut c_char) -> MwStatus {
    guard(|| {
        let slot = out(result, "result")?;
        *slot = c_string(export_woven_diagram(&handle(woven, "woven")?.0));
        Ok(())
    })
}

/// A copy of the woven class diagram without annotations.
#[no_mangle]
pub unsafe extern "C" fn mw_woven_core(woven: *const MwWoven, result: *mut *mut MwCore) -> MwStatus {
    guard(|| {
        let slot = out(result, "result")?;
        *slot = boxed(MwCore(handle(woven, "woven")?.0.base.clone()));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mw_woven_constraint_count(woven: *const MwWoven, count: *mut usize) -> MwStatus {
    guard(|| {
        *out(count, "count")? = handle(woven, "woven")?.0.ordering_constraints.len();
        Ok(())
    })
}

/// Truth value of `cr` when exactly the `n` named leaves hold.
#[no_mangle]
pub unsafe extern "C" fn mw_graph_evaluate(
    graph: *const MwGraph,
    cr: *const c_char,
    satisfied: *const *const c_char,
    n: usize,
    result: *mut bool,
) -> MwStatus {
    guard(|| {
        let slot = out(result, "result")?;
        let g = &handle(graph, "graph")?.0;
        let leaves = strings(satisfied, n, "satisfied")?;
        *slot = g
            .evaluate(text(cr, "cr")?, &leaves)
            .or_else(|e| fail(MwStatus::RequirementError, e.to_string()))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mw_graph_is_inferable(
    graph: *const MwGraph,
    target: *const c_char,
    given: *const *const c_char,
    n: usize,
    max_leaves: usize,
    result: *mut bool,
) -> MwStatus {
    guard(|| {
        let slot = out(result, "result")?;
        let g = &handle(graph, "graph")?.0;
        let given = strings(given, n, "given")?;
        *slot = g
            .is_inferable(text(target, "target")?, &given, max_leaves)
            .or_else(|e| fail(MwStatus::RequirementError, e.to_string()))?;
        Ok(())
    })
}
