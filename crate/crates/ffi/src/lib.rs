//! C ABI over the flbot engine.
//!
//! Goals and outcomes are opaque handles owned by the caller and released
//! with their `_free` functions. Strings returned by the library are freed
//! with [`fl_string_free`]. Every fallible call returns an [`FlStatus`]; the
//! message of the last failure on the calling thread is kept for
//! [`fl_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use flbot::decide::{decide_unification, Options, Outcome};
use flbot::goal::{parse_goal, parse_substitution, verify_unifier, Goal};
use flbot::Error;

/// Status codes shared by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    ResourceLimit = 4,
    InternalDefect = 5,
    Panic = 6,
}

/// A parsed goal.
pub struct FlGoal {
    goal: Goal,
}

/// The result of deciding a goal.
pub struct FlOutcome {
    outcome: Outcome,
    goal: Goal,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: FlStatus, msg: impl Into<String>) -> FlStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> FlStatus {
    match e {
        Error::Resource(_) => FlStatus::ResourceLimit,
        Error::Defect(_) => FlStatus::InternalDefect,
        _ => FlStatus::InvalidInput,
    }
}

/// Runs `f`, turning a panic into [`FlStatus::Panic`].
fn guard(f: impl FnOnce() -> FlStatus) -> FlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(FlStatus::Panic, "panic inside flbot"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, FlStatus> {
    if p.is_null() {
        return Err(fail(FlStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(FlStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn fl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses goal text into a new handle stored in `*out`.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn fl_goal_parse(text: *const c_char, out: *mut *mut FlGoal) -> FlStatus {
    guard(|| {
        if out.is_null() {
            return fail(FlStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_goal(text) {
            Ok(goal) => {
                *out = Box::into_raw(Box::new(FlGoal { goal }));
                FlStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `goal` must be NULL or a handle from [`fl_goal_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fl_goal_free(goal: *mut FlGoal) {
    if !goal.is_null() {
        drop(Box::from_raw(goal));
    }
}

/// Canonical text of the goal, or NULL for a NULL handle.
///
/// # Safety
/// `goal` must be NULL or a live goal handle.
#[no_mangle]
pub unsafe extern "C" fn fl_goal_render(goal: *const FlGoal) -> *mut c_char {
    match goal.as_ref() {
        Some(g) => to_c(g.goal.render()),
        None => ptr::null_mut(),
    }
}

/// Decides unifiability. `max_branches` of 0 means no cap.
///
/// # Safety
/// `goal` must be a live goal handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn fl_unify(
    goal: *const FlGoal,
    max_branches: usize,
    out: *mut *mut FlOutcome,
) -> FlStatus {
    guard(|| {
        if out.is_null() {
            return fail(FlStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some(g) = goal.as_ref() else {
            return fail(FlStatus::NullArgument, "null goal");
        };
        let opts = Options {
            max_branches: (max_branches > 0).then_some(max_branches),
            ..Options::default()
        };
        match decide_unification(&g.goal, &opts) {
            Ok(outcome) => {
                *out = Box::into_raw(Box::new(FlOutcome {
                    outcome,
                    goal: g.goal.clone(),
                }));
                FlStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `outcome` must be NULL or a handle from [`fl_unify`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fl_outcome_free(outcome: *mut FlOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// 1 if unifiable, 0 if not, -1 for a NULL handle.
///
/// # Safety
/// `outcome` must be NULL or a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn fl_outcome_unifiable(outcome: *const FlOutcome) -> i32 {
    match outcome.as_ref() {
        Some(o) => o.outcome.unifiable as i32,
        None => -1,
    }
}

/// The witness in substitution-file syntax, or NULL when there is none.
///
/// # Safety
/// `outcome` must be NULL or a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn fl_outcome_witness(outcome: *const FlOutcome) -> *mut c_char {
    let Some(o) = outcome.as_ref() else {
        return ptr::null_mut();
    };
    match &o.outcome.witness {
        Some(w) => to_c(w.render(&o.goal.vocab, o.goal.variables())),
        None => ptr::null_mut(),
    }
}

/// Per-sub-goal diagnostics as a JSON array, or NULL for a NULL handle.
///
/// # Safety
/// `outcome` must be NULL or a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn fl_outcome_json(outcome: *const FlOutcome) -> *mut c_char {
    match outcome.as_ref() {
        Some(o) => serde_json::to_string(&o.outcome.subgoals).map_or(ptr::null_mut(), to_c),
        None => ptr::null_mut(),
    }
}

/// Checks a substitution, given as `X := concept` lines, against the goal.
/// Writes 1 to `*is_unifier` when it is a ground unifier and 0 otherwise.
///
/// # Safety
/// `goal` must be a live goal handle, `subst` a nul-terminated string and
/// `is_unifier` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn fl_verify(
    goal: *const FlGoal,
    subst: *const c_char,
    is_unifier: *mut i32,
) -> FlStatus {
    guard(|| {
        if is_unifier.is_null() {
            return fail(FlStatus::NullArgument, "null output pointer");
        }
        let Some(g) = goal.as_ref() else {
            return fail(FlStatus::NullArgument, "null goal");
        };
        let text = match read_str(subst) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let mut vocab = g.goal.vocab.clone();
        match parse_substitution(text, &mut vocab) {
            Ok(sigma) => {
                *is_unifier = verify_unifier(&g.goal, &sigma) as i32;
                FlStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}
