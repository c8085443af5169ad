//! C ABI over the core crate: opaque handles, integer status codes, and a
//! thread-local last-error message.
//!
//! Conventions: every fallible entry point returns [`DupStatus`] and writes
//! its result through an out pointer, which is left untouched on failure.
//! Strings returned through out pointers are heap-allocated and must be
//! released with [`dup_string_free`]; handles with their matching `_free`.
//! [`dup_last_error_message`] describes the most recent failure on the
//! calling thread and stays valid until the next failing call there.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use duplicial::catalog;
use duplicial::series::SeriesError;
use duplicial::tamari::{TamariError, TamariLattice, LATTICE_CAP};
use duplicial::tree::{catalan, Tree};
use duplicial::verify::{run_suite, Suite};
use duplicial::TreeSeries;

/// Status codes shared by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DupStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// A tree literal or series document failed to parse.
    Parse = 3,
    /// The request exceeds a resource cap.
    Cap = 4,
    /// The operation is undefined for these operands.
    Domain = 5,
    /// A JSON document was well formed but violated the schema.
    Json = 6,
    /// The library panicked; the handle arguments are still valid.
    Panic = 7,
}

/// Which product to invert in [`dup_series_invert`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DupProduct {
    Over = 0,
    Under = 1,
    Compose = 2,
}

/// Opaque planar binary tree handle.
pub struct DupTree(Tree);

/// Opaque tree-expanded series handle.
pub struct DupSeries(TreeSeries);

/// Opaque rotation-lattice handle.
pub struct DupLattice(TamariLattice);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("nul bytes stripped");
    });
}

fn error(status: DupStatus, message: impl std::fmt::Display) -> DupStatus {
    set_error(&message.to_string());
    status
}

/// The most recent error message on this thread; empty when no call has
/// failed yet. The pointer is invalidated by the next failing call on the
/// same thread.
#[no_mangle]
pub extern "C" fn dup_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guard(body: impl FnOnce() -> DupStatus) -> DupStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => error(DupStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `text` must be a valid nul-terminated string or null.
unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, DupStatus> {
    if text.is_null() {
        return Err(error(DupStatus::NullArgument, "string argument is null"));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|e| error(DupStatus::Utf8, e))
}

unsafe fn write_string(out: *mut *mut c_char, value: String) -> DupStatus {
    if out.is_null() {
        return error(DupStatus::NullArgument, "out pointer is null");
    }
    let sanitized = value.replace('\0', " ");
    *out = CString::new(sanitized)
        .expect("nul bytes stripped")
        .into_raw();
    DupStatus::Ok
}

unsafe fn deref<'a, T>(handle: *const T, what: &str) -> Result<&'a T, DupStatus> {
    if handle.is_null() {
        return Err(error(
            DupStatus::NullArgument,
            format!("{} handle is null", what),
        ));
    }
    Ok(&*handle)
}

fn series_error(e: SeriesError) -> DupStatus {
    error(DupStatus::Domain, e)
}

fn tamari_error(e: TamariError) -> DupStatus {
    match e {
        TamariError::CapExceeded { .. } => error(DupStatus::Cap, e),
        _ => error(DupStatus::Domain, e),
    }
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `text` must have been returned by a `dup_` function and not freed yet.
#[no_mangle]
pub unsafe extern "C" fn dup_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

// ---------------------------------------------------------------------------
// trees

/// Parses a tree literal such as `"((..).)"`.
///
/// # Safety
/// `literal` must be nul-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_tree_parse(
    literal: *const c_char,
    out: *mut *mut DupTree,
) -> DupStatus {
    guard(|| {
        let text = match read_str(literal) {
            Ok(t) => t,
            Err(s) => return s,
        };
        if out.is_null() {
            return error(DupStatus::NullArgument, "out pointer is null");
        }
        match Tree::parse(text) {
            Ok(tree) => {
                *out = Box::into_raw(Box::new(DupTree(tree)));
                DupStatus::Ok
            }
            Err(e) => error(DupStatus::Parse, e),
        }
    })
}

/// # Safety
/// `tree` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dup_tree_free(tree: *mut DupTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Writes the canonical literal of the tree.
///
/// # Safety
/// `tree` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_tree_to_string(
    tree: *const DupTree,
    out: *mut *mut c_char,
) -> DupStatus {
    guard(|| match deref(tree, "tree") {
        Ok(t) => write_string(out, t.0.to_string()),
        Err(s) => s,
    })
}

/// Number of internal vertices.
///
/// # Safety
/// `tree` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_tree_order(tree: *const DupTree, out: *mut usize) -> DupStatus {
    guard(|| {
        let t = match deref(tree, "tree") {
            Ok(t) => t,
            Err(s) => return s,
        };
        if out.is_null() {
            return error(DupStatus::NullArgument, "out pointer is null");
        }
        *out = t.0.order();
        DupStatus::Ok
    })
}

unsafe fn tree_binop(
    left: *const DupTree,
    right: *const DupTree,
    out: *mut *mut DupTree,
    op: impl Fn(&Tree, &Tree) -> Tree,
) -> DupStatus {
    let l = match deref(left, "left tree") {
        Ok(t) => t,
        Err(s) => return s,
    };
    let r = match deref(right, "right tree") {
        Ok(t) => t,
        Err(s) => return s,
    };
    if out.is_null() {
        return error(DupStatus::NullArgument, "out pointer is null");
    }
    *out = Box::into_raw(Box::new(DupTree(op(&l.0, &r.0))));
    DupStatus::Ok
}

/// Grafts the root of `left` onto the leftmost leaf of `right`.
///
/// # Safety
/// Both handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_tree_over(
    left: *const DupTree,
    right: *const DupTree,
    out: *mut *mut DupTree,
) -> DupStatus {
    guard(|| tree_binop(left, right, out, Tree::over))
}

/// Grafts the root of `right` onto the rightmost leaf of `left`.
///
/// # Safety
/// Both handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_tree_under(
    left: *const DupTree,
    right: *const DupTree,
    out: *mut *mut DupTree,
) -> DupStatus {
    guard(|| tree_binop(left, right, out, Tree::under))
}

/// Joins two trees as the children of a new root.
///
/// # Safety
/// Both handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_tree_graft(
    left: *const DupTree,
    right: *const DupTree,
    out: *mut *mut DupTree,
) -> DupStatus {
    guard(|| tree_binop(left, right, out, Tree::graft))
}

/// Number of trees with `n` internal vertices. Capped at `n <= 36` so the
/// count fits in 64 bits.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_tree_count(n: usize, out: *mut u64) -> DupStatus {
    guard(|| {
        if out.is_null() {
            return error(DupStatus::NullArgument, "out pointer is null");
        }
        if n > 36 {
            return error(DupStatus::Cap, format!("order {} exceeds the counting cap 36", n));
        }
        *out = catalan(n) as u64;
        DupStatus::Ok
    })
}

// ---------------------------------------------------------------------------
// series

fn build_catalog(name: &str, order: usize) -> Result<TreeSeries, DupStatus> {
    if order == 0 || order > 10 {
        return Err(error(
            DupStatus::Cap,
            format!("order {} is outside the supported range 1..=10", order),
        ));
    }
    match name {
        "A" => Ok(catalog::series_a(order)),
        "B" => catalog::series_b(order).map_err(|e| error(DupStatus::Domain, e)),
        "C" => Ok(catalog::series_c(order)),
        "D" => Ok(catalog::series_d(order)),
        "E" => Ok(catalog::series_e(order)),
        "R" => Ok(catalog::series_r(order)),
        "L" => Ok(catalog::series_l(order)),
        other => Err(error(
            DupStatus::Domain,
            format!("unknown catalog series {:?}", other),
        )),
    }
}

/// Builds one of the catalog series (A, B, C, D, E, R, L) at the given
/// truncation order.
///
/// # Safety
/// `name` must be nul-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_series_catalog(
    name: *const c_char,
    order: usize,
    out: *mut *mut DupSeries,
) -> DupStatus {
    guard(|| {
        let name = match read_str(name) {
            Ok(n) => n,
            Err(s) => return s,
        };
        if out.is_null() {
            return error(DupStatus::NullArgument, "out pointer is null");
        }
        match build_catalog(name, order) {
            Ok(series) => {
                *out = Box::into_raw(Box::new(DupSeries(series)));
                DupStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Reads a series from its JSON document form.
///
/// # Safety
/// `json` must be nul-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_series_from_json(
    json: *const c_char,
    out: *mut *mut DupSeries,
) -> DupStatus {
    guard(|| {
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        if out.is_null() {
            return error(DupStatus::NullArgument, "out pointer is null");
        }
        match TreeSeries::from_json_str(text) {
            Ok(series) => {
                *out = Box::into_raw(Box::new(DupSeries(series)));
                DupStatus::Ok
            }
            Err(e) => error(DupStatus::Json, e),
        }
    })
}

/// Writes the series as pretty-printed JSON.
///
/// # Safety
/// `series` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_series_to_json(
    series: *const DupSeries,
    out: *mut *mut c_char,
) -> DupStatus {
    guard(|| match deref(series, "series") {
        Ok(s) => write_string(out, s.0.to_json_string()),
        Err(s) => s,
    })
}

/// # Safety
/// `series` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dup_series_free(series: *mut DupSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Truncation order of the series.
///
/// # Safety
/// `series` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_series_order(series: *const DupSeries, out: *mut usize) -> DupStatus {
    guard(|| {
        let s = match deref(series, "series") {
            Ok(s) => s,
            Err(st) => return st,
        };
        if out.is_null() {
            return error(DupStatus::NullArgument, "out pointer is null");
        }
        *out = s.0.order();
        DupStatus::Ok
    })
}

/// Writes the coefficient of `tree` rendered as an exact expression in `w`.
///
/// # Safety
/// Both handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_series_coeff(
    series: *const DupSeries,
    tree: *const DupTree,
    out: *mut *mut c_char,
) -> DupStatus {
    guard(|| {
        let s = match deref(series, "series") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let t = match deref(tree, "tree") {
            Ok(t) => t,
            Err(st) => return st,
        };
        write_string(out, s.0.coeff(&t.0).to_string())
    })
}

unsafe fn series_binop(
    left: *const DupSeries,
    right: *const DupSeries,
    out: *mut *mut DupSeries,
    op: impl Fn(&TreeSeries, &TreeSeries) -> Result<TreeSeries, SeriesError>,
) -> DupStatus {
    let l = match deref(left, "left series") {
        Ok(s) => s,
        Err(st) => return st,
    };
    let r = match deref(right, "right series") {
        Ok(s) => s,
        Err(st) => return st,
    };
    if out.is_null() {
        return error(DupStatus::NullArgument, "out pointer is null");
    }
    match op(&l.0, &r.0) {
        Ok(series) => {
            *out = Box::into_raw(Box::new(DupSeries(series)));
            DupStatus::Ok
        }
        Err(e) => series_error(e),
    }
}

/// The over product of two series of the same truncation order.
///
/// # Safety
/// Both handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_series_over(
    left: *const DupSeries,
    right: *const DupSeries,
    out: *mut *mut DupSeries,
) -> DupStatus {
    guard(|| series_binop(left, right, out, TreeSeries::over))
}

/// The under product of two series of the same truncation order.
///
/// # Safety
/// Both handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_series_under(
    left: *const DupSeries,
    right: *const DupSeries,
    out: *mut *mut DupSeries,
) -> DupStatus {
    guard(|| series_binop(left, right, out, TreeSeries::under))
}

/// Substitutes `inner` into `outer`; `inner` must carry the diffeo flavor.
///
/// # Safety
/// Both handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_series_compose(
    outer: *const DupSeries,
    inner: *const DupSeries,
    out: *mut *mut DupSeries,
) -> DupStatus {
    guard(|| series_binop(outer, inner, out, TreeSeries::compose))
}

/// Inverts the series for the chosen product.
///
/// # Safety
/// `series` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_series_invert(
    series: *const DupSeries,
    product: DupProduct,
    out: *mut *mut DupSeries,
) -> DupStatus {
    guard(|| {
        let s = match deref(series, "series") {
            Ok(s) => s,
            Err(st) => return st,
        };
        if out.is_null() {
            return error(DupStatus::NullArgument, "out pointer is null");
        }
        let inverted = match product {
            DupProduct::Over => s.0.inverse_over(),
            DupProduct::Under => s.0.inverse_under(),
            DupProduct::Compose => s.0.compose_inverse(),
        };
        match inverted {
            Ok(series) => {
                *out = Box::into_raw(Box::new(DupSeries(series)));
                DupStatus::Ok
            }
            Err(e) => series_error(e),
        }
    })
}

/// Twists signs by `(-1)^(order - 1)`.
///
/// # Safety
/// `series` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_series_suspend(
    series: *const DupSeries,
    out: *mut *mut DupSeries,
) -> DupStatus {
    guard(|| {
        let s = match deref(series, "series") {
            Ok(s) => s,
            Err(st) => return st,
        };
        if out.is_null() {
            return error(DupStatus::NullArgument, "out pointer is null");
        }
        *out = Box::into_raw(Box::new(DupSeries(s.0.suspension())));
        DupStatus::Ok
    })
}

/// Writes the order-sum projection as a readable polynomial in `x`.
///
/// # Safety
/// `series` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_series_project(
    series: *const DupSeries,
    out: *mut *mut c_char,
) -> DupStatus {
    guard(|| match deref(series, "series") {
        Ok(s) => write_string(out, s.0.project().to_string()),
        Err(st) => st,
    })
}

// ---------------------------------------------------------------------------
// lattice

/// Builds the rotation lattice on trees with `n` internal vertices.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_lattice_build(n: usize, out: *mut *mut DupLattice) -> DupStatus {
    guard(|| {
        if out.is_null() {
            return error(DupStatus::NullArgument, "out pointer is null");
        }
        match TamariLattice::build_with_cap(n, LATTICE_CAP) {
            Ok(lattice) => {
                *out = Box::into_raw(Box::new(DupLattice(lattice)));
                DupStatus::Ok
            }
            Err(e) => tamari_error(e),
        }
    })
}

/// # Safety
/// `lattice` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dup_lattice_free(lattice: *mut DupLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// Number of lattice elements.
///
/// # Safety
/// `lattice` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_lattice_size(
    lattice: *const DupLattice,
    out: *mut usize,
) -> DupStatus {
    guard(|| {
        let l = match deref(lattice, "lattice") {
            Ok(l) => l,
            Err(st) => return st,
        };
        if out.is_null() {
            return error(DupStatus::NullArgument, "out pointer is null");
        }
        *out = l.0.elements().len();
        DupStatus::Ok
    })
}

/// Whether `s <= t` in the rotation order. Both trees must be lattice
/// elements.
///
/// # Safety
/// All handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_lattice_leq(
    lattice: *const DupLattice,
    s: *const DupTree,
    t: *const DupTree,
    out: *mut bool,
) -> DupStatus {
    guard(|| {
        let l = match deref(lattice, "lattice") {
            Ok(l) => l,
            Err(st) => return st,
        };
        let s = match deref(s, "left tree") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let t = match deref(t, "right tree") {
            Ok(t) => t,
            Err(st) => return st,
        };
        if out.is_null() {
            return error(DupStatus::NullArgument, "out pointer is null");
        }
        match l.0.leq(&s.0, &t.0) {
            Ok(value) => {
                *out = value;
                DupStatus::Ok
            }
            Err(e) => tamari_error(e),
        }
    })
}

/// Mobius value of the interval `[s, t]`; the pair must be comparable.
///
/// # Safety
/// All handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_lattice_mobius(
    lattice: *const DupLattice,
    s: *const DupTree,
    t: *const DupTree,
    out: *mut i64,
) -> DupStatus {
    guard(|| {
        let l = match deref(lattice, "lattice") {
            Ok(l) => l,
            Err(st) => return st,
        };
        let s = match deref(s, "left tree") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let t = match deref(t, "right tree") {
            Ok(t) => t,
            Err(st) => return st,
        };
        if out.is_null() {
            return error(DupStatus::NullArgument, "out pointer is null");
        }
        match l.0.mobius(&s.0, &t.0) {
            Ok(value) => {
                *out = value;
                DupStatus::Ok
            }
            Err(e) => tamari_error(e),
        }
    })
}

/// Writes the Hasse diagram in DOT form.
///
/// # Safety
/// `lattice` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_lattice_to_dot(
    lattice: *const DupLattice,
    out: *mut *mut c_char,
) -> DupStatus {
    guard(|| match deref(lattice, "lattice") {
        Ok(l) => write_string(out, l.0.export_dot()),
        Err(st) => st,
    })
}

/// Writes the lattice as pretty-printed JSON.
///
/// # Safety
/// `lattice` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dup_lattice_to_json(
    lattice: *const DupLattice,
    out: *mut *mut c_char,
) -> DupStatus {
    guard(|| match deref(lattice, "lattice") {
        Ok(l) => write_string(out, l.0.export_json_string()),
        Err(st) => st,
    })
}

// ---------------------------------------------------------------------------
// verify

/// Runs a verification suite (`"all"`, `"trees"`, `"series"`,
/// `"propositions"`, `"tamari"`, `"hopf"`, `"dyson"`). `max_order` zero
/// keeps every check at its default order. Writes whether all checks
/// passed and, when `report_json` is non-null, the full report document.
///
/// # Safety
/// `suite` must be nul-terminated; `passed` must be a valid pointer;
/// `report_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn dup_verify_run(
    suite: *const c_char,
    max_order: usize,
    seed: u64,
    passed: *mut bool,
    report_json: *mut *mut c_char,
) -> DupStatus {
    guard(|| {
        let name = match read_str(suite) {
            Ok(n) => n,
            Err(st) => return st,
        };
        let suite = match Suite::parse(name) {
            Some(s) => s,
            None => {
                return error(DupStatus::Domain, format!("unknown suite {:?}", name));
            }
        };
        if passed.is_null() {
            return error(DupStatus::NullArgument, "passed pointer is null");
        }
        let requested = if max_order == 0 { None } else { Some(max_order) };
        let report = run_suite(suite, requested, seed);
        *passed = report.passed();
        if !report_json.is_null() {
            let doc = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
            return write_string(report_json, doc);
        }
        DupStatus::Ok
    })
}
