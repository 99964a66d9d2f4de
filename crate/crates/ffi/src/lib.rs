//! C ABI for the workbench. Handles are opaque pointers owned by Rust;
//! every function returns a status code and writes results through out
//! parameters. Strings returned to the caller are heap-allocated and must
//! be released with [`ualg_string_free`]. Error details for the most recent
//! failing call on the current thread are available through
//! [`ualg_last_error_message`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use ualg::fmt::{
    parse_algebra, parse_equation_system, parse_query, parse_variety, parse_word_system,
    print_algebra,
};
use ualg::freealg::{act_variety, automaton_variety, VarietyId};
use ualg::geometry::{closure_member, geom_equivalent, GeometryBudget, GeometryError};
use ualg::model::{enumerate_homs, in_variety, FiniteAlgebra};
use ualg::search::{auto_equivalent, classify_strongly_stable, SearchConfig, SearchError};
use ualg::signature::VarietySpec;
use ualg::verbal::derive_algebra;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UalgStatus {
    Ok = 0,
    /// Malformed input text; details via `ualg_last_error_message`.
    ParseError = 1,
    /// Structurally valid input that violates a contract (wrong variety,
    /// not a builtin, argument out of range).
    Invalid = 2,
    /// An internal cap was exceeded; rerun with a larger budget.
    BudgetExceeded = 3,
    /// A required pointer argument was null.
    NullPointer = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(owned));
}

fn classify_search_error(e: &SearchError) -> UalgStatus {
    match e {
        SearchError::Budget { .. }
        | SearchError::Geometry(GeometryError::Budget { .. })
        | SearchError::Model(ualg::model::ModelError::Budget { .. }) => UalgStatus::BudgetExceeded,
        _ => UalgStatus::Invalid,
    }
}

/// An opaque variety handle: the parsed specification plus builtin support
/// when the spec matches one of the embedded varieties.
pub struct UalgVariety {
    spec: VarietySpec,
    builtin: Option<VarietyId>,
}

/// An opaque finite-algebra handle, bound to the signature it was parsed
/// against.
pub struct UalgAlgebra {
    algebra: FiniteAlgebra,
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, UalgStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(UalgStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        UalgStatus::ParseError
    })
}

fn give_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn ualg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Detail message of the last error on this thread, or null. Free with
/// [`ualg_string_free`].
#[no_mangle]
pub extern "C" fn ualg_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => give_string(msg.to_string_lossy().into_owned()),
        None => ptr::null_mut(),
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a `ualg_*` function, not
/// yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn ualg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a variety file into a handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On success `*out` owns the handle until `ualg_variety_free`.
#[no_mangle]
pub unsafe extern "C" fn ualg_variety_parse(
    text: *const c_char,
    out: *mut *mut UalgVariety,
) -> UalgStatus {
    if out.is_null() {
        set_error("null out pointer");
        return UalgStatus::NullPointer;
    }
    let text = match read_str(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match parse_variety(text) {
        Ok(spec) => {
            let builtin = if spec == act_variety() {
                Some(VarietyId::Act)
            } else if spec == automaton_variety() {
                Some(VarietyId::Automaton)
            } else {
                None
            };
            *out = Box::into_raw(Box::new(UalgVariety { spec, builtin }));
            UalgStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            UalgStatus::ParseError
        }
    }
}

/// Loads a builtin variety (`act` or `automaton`) into a handle.
///
/// # Safety
/// `name` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ualg_variety_builtin(
    name: *const c_char,
    out: *mut *mut UalgVariety,
) -> UalgStatus {
    if out.is_null() {
        set_error("null out pointer");
        return UalgStatus::NullPointer;
    }
    let name = match read_str(name) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match VarietyId::from_name(name) {
        Some(id) => {
            *out = Box::into_raw(Box::new(UalgVariety {
                spec: id.variety(),
                builtin: Some(id),
            }));
            UalgStatus::Ok
        }
        None => {
            set_error("unknown builtin variety (expected `act` or `automaton`)");
            UalgStatus::Invalid
        }
    }
}

/// # Safety
/// `v` must come from `ualg_variety_parse`/`ualg_variety_builtin` and not
/// have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ualg_variety_free(v: *mut UalgVariety) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Parses an algebra file against the variety's signature.
///
/// # Safety
/// `variety` must be a live handle; `text` a valid string; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ualg_algebra_parse(
    variety: *const UalgVariety,
    text: *const c_char,
    out: *mut *mut UalgAlgebra,
) -> UalgStatus {
    if variety.is_null() || out.is_null() {
        set_error("null handle");
        return UalgStatus::NullPointer;
    }
    let text = match read_str(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match parse_algebra(text, &(*variety).spec.signature) {
        Ok(algebra) => {
            *out = Box::into_raw(Box::new(UalgAlgebra { algebra }));
            UalgStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            UalgStatus::ParseError
        }
    }
}

/// # Safety
/// `a` must come from `ualg_algebra_parse` and not have been freed; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn ualg_algebra_free(a: *mut UalgAlgebra) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Writes whether the algebra satisfies every identity of the variety.
///
/// # Safety
/// Both handles must be live; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ualg_algebra_in_variety(
    variety: *const UalgVariety,
    algebra: *const UalgAlgebra,
    out: *mut bool,
) -> UalgStatus {
    if variety.is_null() || algebra.is_null() || out.is_null() {
        set_error("null handle");
        return UalgStatus::NullPointer;
    }
    *out = in_variety(&(*algebra).algebra, &(*variety).spec);
    UalgStatus::Ok
}

/// Counts the homomorphisms between two algebras over the same signature.
///
/// # Safety
/// All handles must be live; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ualg_hom_count(
    variety: *const UalgVariety,
    from: *const UalgAlgebra,
    to: *const UalgAlgebra,
    budget: u64,
    out: *mut usize,
) -> UalgStatus {
    if variety.is_null() || from.is_null() || to.is_null() || out.is_null() {
        set_error("null handle");
        return UalgStatus::NullPointer;
    }
    match enumerate_homs(&(*from).algebra, &(*to).algebra, budget as u128) {
        Ok(homs) => {
            *out = homs.len();
            UalgStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            UalgStatus::BudgetExceeded
        }
    }
}

/// Decides membership of `query` (a `lhs = rhs` line) in the algebraic
/// closure of the equation system over the algebra.
///
/// # Safety
/// Handles must be live; `system_text` and `query` must be valid strings;
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ualg_closure_member(
    variety: *const UalgVariety,
    algebra: *const UalgAlgebra,
    system_text: *const c_char,
    query: *const c_char,
    out: *mut bool,
) -> UalgStatus {
    if variety.is_null() || algebra.is_null() || out.is_null() {
        set_error("null handle");
        return UalgStatus::NullPointer;
    }
    let system_text = match read_str(system_text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let query = match read_str(query) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let sig = &(*variety).spec.signature;
    let system = match parse_equation_system(system_text, sig) {
        Ok(s) => s,
        Err(e) => {
            set_error(&e.to_string());
            return UalgStatus::ParseError;
        }
    };
    let (lhs, rhs) = match parse_query(query, sig, &system.alphabet) {
        Ok(pair) => pair,
        Err(e) => {
            set_error(&e.to_string());
            return UalgStatus::ParseError;
        }
    };
    match closure_member(
        &system,
        &(*algebra).algebra,
        (&lhs, &rhs),
        &GeometryBudget::default(),
    ) {
        Ok(member) => {
            *out = member;
            UalgStatus::Ok
        }
        Err(GeometryError::Budget { .. }) => {
            set_error("budget exceeded");
            UalgStatus::BudgetExceeded
        }
        Err(e) => {
            set_error(&e.to_string());
            UalgStatus::Invalid
        }
    }
}

/// Decides geometric equivalence up to the generator bound and returns the
/// verdict as a JSON string (free with [`ualg_string_free`]).
///
/// # Safety
/// Handles must be live; `out_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ualg_geom_equivalent(
    variety: *const UalgVariety,
    first: *const UalgAlgebra,
    second: *const UalgAlgebra,
    max_generators: usize,
    out_json: *mut *mut c_char,
) -> UalgStatus {
    if variety.is_null() || first.is_null() || second.is_null() || out_json.is_null() {
        set_error("null handle");
        return UalgStatus::NullPointer;
    }
    match geom_equivalent(
        &(*first).algebra,
        &(*second).algebra,
        max_generators,
        &GeometryBudget::default(),
    ) {
        Ok(verdict) => {
            *out_json =
                give_string(serde_json::to_string(&verdict).unwrap_or_else(|_| "null".to_string()));
            UalgStatus::Ok
        }
        Err(GeometryError::Budget { .. }) => {
            set_error("budget exceeded");
            UalgStatus::BudgetExceeded
        }
        Err(e) => {
            set_error(&e.to_string());
            UalgStatus::Invalid
        }
    }
}

/// Runs the word-system classification for a builtin variety and returns
/// the report as JSON (free with [`ualg_string_free`]).
///
/// # Safety
/// `variety` must be live; `out_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ualg_search_words(
    variety: *const UalgVariety,
    max_word_size: usize,
    out_json: *mut *mut c_char,
) -> UalgStatus {
    if variety.is_null() || out_json.is_null() {
        set_error("null handle");
        return UalgStatus::NullPointer;
    }
    let id = match (*variety).builtin {
        Some(id) => id,
        None => {
            set_error("the word-system search needs a builtin variety (act, automaton)");
            return UalgStatus::Invalid;
        }
    };
    let mut cfg = SearchConfig::new(id);
    cfg.max_word_size = max_word_size;
    match classify_strongly_stable(&cfg) {
        Ok(report) => {
            *out_json =
                give_string(serde_json::to_string(&report).unwrap_or_else(|_| "null".to_string()));
            UalgStatus::Ok
        }
        Err(e) => {
            let status = classify_search_error(&e);
            set_error(&e.to_string());
            status
        }
    }
}

/// Decides automorphic equivalence up to bounds for a builtin variety and
/// returns the verdict as JSON (free with [`ualg_string_free`]).
///
/// # Safety
/// Handles must be live; `out_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ualg_auto_equivalent(
    variety: *const UalgVariety,
    first: *const UalgAlgebra,
    second: *const UalgAlgebra,
    max_word_size: usize,
    max_generators: usize,
    out_json: *mut *mut c_char,
) -> UalgStatus {
    if variety.is_null() || first.is_null() || second.is_null() || out_json.is_null() {
        set_error("null handle");
        return UalgStatus::NullPointer;
    }
    let id = match (*variety).builtin {
        Some(id) => id,
        None => {
            set_error("automorphic equivalence needs a builtin variety (act, automaton)");
            return UalgStatus::Invalid;
        }
    };
    let mut cfg = SearchConfig::new(id);
    cfg.max_word_size = max_word_size;
    cfg.max_generators = max_generators;
    match auto_equivalent(&(*first).algebra, &(*second).algebra, &cfg) {
        Ok(verdict) => {
            *out_json =
                give_string(serde_json::to_string(&verdict).unwrap_or_else(|_| "null".to_string()));
            UalgStatus::Ok
        }
        Err(e) => {
            let status = classify_search_error(&e);
            set_error(&e.to_string());
            status
        }
    }
}

/// Materializes the derived algebra under a word system (`op := term`
/// lines) and returns its text format (free with [`ualg_string_free`]).
///
/// # Safety
/// Handles must be live; `words_text` must be a valid string; `out_text`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn ualg_derive(
    variety: *const UalgVariety,
    algebra: *const UalgAlgebra,
    words_text: *const c_char,
    out_text: *mut *mut c_char,
) -> UalgStatus {
    if variety.is_null() || algebra.is_null() || out_text.is_null() {
        set_error("null handle");
        return UalgStatus::NullPointer;
    }
    let words_text = match read_str(words_text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let system = match parse_word_system(words_text, &(*variety).spec.signature) {
        Ok(s) => s,
        Err(e) => {
            set_error(&e.to_string());
            return UalgStatus::ParseError;
        }
    };
    match derive_algebra(&(*algebra).algebra, &system) {
        Ok(derived) => {
            *out_text = give_string(print_algebra(&derived.algebra));
            UalgStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            UalgStatus::Invalid
        }
    }
}
