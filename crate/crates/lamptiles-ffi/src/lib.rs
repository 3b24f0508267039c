//! C ABI over `lamptiles`.
//!
//! Every entry point returns a [`LampStatus`]; results come back through out-pointers.
//! On failure the message is kept per thread and read with [`lamp_last_error`].
//! Handles are opaque and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lamptiles::csp::Budget;
use lamptiles::group::LampElement;
use lamptiles::solver::{self, SolveOptions};
use lamptiles::substitutions::Substitution;
use lamptiles::tilesets::{self, Tileset};
use lamptiles::universal::{self, parse_tape, TwoHeadTm};
use lamptiles::{xtree, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LampStatus {
    Ok = 0,
    Usage = 1,
    Parse = 2,
    Validity = 3,
    Budget = 4,
    Fault = 5,
    Timeout = 6,
    Io = 7,
    NullPointer = 8,
    Panic = 9,
}

/// A tetrahedron, spider or Wang tileset.
pub struct LampTileset(Tileset);

/// A substitution on the binary tree.
pub struct LampSubstitution(Substitution);

/// A two-head Turing machine ready to be compiled into a tape.
pub struct LampMachine(TwoHeadTm);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LampStatus {
    match e {
        Error::Usage(_) => LampStatus::Usage,
        Error::Parse { .. } => LampStatus::Parse,
        Error::Validity(_) => LampStatus::Validity,
        Error::Budget { .. } => LampStatus::Budget,
        Error::Fault { .. } => LampStatus::Fault,
        Error::Timeout { .. } => LampStatus::Timeout,
        Error::Io(_) => LampStatus::Io,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LampStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LampStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed as {what}"));
            LampStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".into());
            LampStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::usage(format!("{what} is not valid UTF-8")).into())
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

fn options(threads: u32, max_nodes: u64) -> SolveOptions {
    SolveOptions {
        threads: threads.max(1) as usize,
        budget: if max_nodes == 0 {
            Budget::unlimited()
        } else {
            Budget::nodes(max_nodes)
        },
    }
}

/// Message of the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn lamp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lamp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Built-in tileset by name. `param` is the size parameter of `theta1` and `c2`, 0 otherwise;
/// `subst` may be null except for `sofic_cover`.
///
/// # Safety
/// `name` must be a NUL-terminated string, `subst` null or a live handle, `result` writable.
#[no_mangle]
pub unsafe extern "C" fn lamp_tileset_builtin(
    name: *const c_char,
    param: usize,
    subst: *const LampSubstitution,
    result: *mut *mut LampTileset,
) -> LampStatus {
    guard(|| {
        let name = text(name, "name")?;
        let result = out(result, "result")?;
        let subst = subst.as_ref().map(|s| &s.0);
        let t = tilesets::builtin(name, (param > 0).then_some(param), subst)?;
        *result = Box::into_raw(Box::new(LampTileset(t)));
        Ok(())
    })
}

/// Tileset from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn lamp_tileset_from_json(json: *const c_char, result: *mut *mut LampTileset) -> LampStatus {
    guard(|| {
        let t = tilesets::from_json_str(text(json, "json")?)?;
        *out(result, "result")? = Box::into_raw(Box::new(LampTileset(t)));
        Ok(())
    })
}

/// # Safety
/// `tileset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lamp_tileset_free(tileset: *mut LampTileset) {
    if !tileset.is_null() {
        drop(Box::from_raw(tileset));
    }
}

/// Number of colours of a tileset.
///
/// # Safety
/// `tileset` must be a live handle and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn lamp_tileset_colour_count(tileset: *const LampTileset, result: *mut usize) -> LampStatus {
    guard(|| {
        *out(result, "result")? = match &handle(tileset, "tileset")?.0 {
            Tileset::Tetra(t) => t.colour_count(),
            Tileset::Spider(t) => t.colour_count(),
            Tileset::Wang(t) => t.colours.len(),
        };
        Ok(())
    })
}

/// Valid colourings of the region of the given height. `max_nodes` 0 means unlimited.
///
/// # Safety
/// `tileset` must be a live handle and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn lamp_tileset_count(
    tileset: *const LampTileset,
    height: i64,
    threads: u32,
    max_nodes: u64,
    result: *mut u64,
) -> LampStatus {
    guard(|| {
        let opts = options(threads, max_nodes);
        let n = match &handle(tileset, "tileset")?.0 {
            Tileset::Tetra(t) => solver::count(t, height, opts)?,
            Tileset::Spider(t) => solver::count_spider(t, height, opts)?,
            Tileset::Wang(_) => {
                return Err(Error::usage("Wang tilesets are counted through towers, not regions").into())
            }
        };
        *out(result, "result")? = n;
        Ok(())
    })
}

/// Candidate and accepted quadruple counts of the Kari affine construction.
///
/// # Safety
/// Both out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn lamp_kari_build(candidates: *mut u64, accepted: *mut u64) -> LampStatus {
    guard(|| {
        let b = lamptiles::kari::build_kari_tileset();
        *out(candidates, "candidates")? = b.candidates;
        *out(accepted, "accepted")? = b.accepted.len() as u64;
        Ok(())
    })
}

/// Built-in substitution: `thue_morse`, `period_doubling`, `sunny_side_up` or `cyclic3`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn lamp_subst_builtin(name: *const c_char, result: *mut *mut LampSubstitution) -> LampStatus {
    guard(|| {
        let s = Substitution::builtin(text(name, "name")?)?;
        *out(result, "result")? = Box::into_raw(Box::new(LampSubstitution(s)));
        Ok(())
    })
}

/// Substitution from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn lamp_subst_from_json(json: *const c_char, result: *mut *mut LampSubstitution) -> LampStatus {
    guard(|| {
        let s = Substitution::from_json(text(json, "json")?)?;
        *out(result, "result")? = Box::into_raw(Box::new(LampSubstitution(s)));
        Ok(())
    })
}

/// # Safety
/// `subst` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lamp_subst_free(subst: *mut LampSubstitution) {
    if !subst.is_null() {
        drop(Box::from_raw(subst));
    }
}

/// Size of the level-`n` language, iterating at most `cap` extra levels. `stabilized` gets 1
/// when the language provably stopped changing.
///
/// # Safety
/// `subst` must be a live handle and both out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn lamp_subst_language_size(
    subst: *const LampSubstitution,
    n: u32,
    cap: u32,
    size: *mut u64,
    stabilized: *mut u8,
) -> LampStatus {
    guard(|| {
        let l = handle(subst, "subst")?.0.level_language(n, cap)?;
        *out(size, "size")? = l.patterns.len() as u64;
        *out(stabilized, "stabilized")? = l.stabilized as u8;
        Ok(())
    })
}

/// Two-head machine from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn lamp_machine_from_json(json: *const c_char, result: *mut *mut LampMachine) -> LampStatus {
    guard(|| {
        let v: serde_json::Value =
            serde_json::from_str(text(json, "json")?).map_err(|e| Error::parse("machine json", e.to_string()))?;
        let tm = TwoHeadTm::from_json(&v)?;
        *out(result, "result")? = Box::into_raw(Box::new(LampMachine(tm)));
        Ok(())
    })
}

/// # Safety
/// `machine` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lamp_machine_free(machine: *mut LampMachine) {
    if !machine.is_null() {
        drop(Box::from_raw(machine));
    }
}

/// Runs the machine on whitespace-separated `data` inside a `2^log2_size` square and reports
/// the first phase-2 row. Rejection surfaces as `Fault`, running out of rows as `Timeout`.
///
/// # Safety
/// `machine` must be a live handle, `data` a NUL-terminated string, `accept_row` writable.
#[no_mangle]
pub unsafe extern "C" fn lamp_machine_run(
    machine: *const LampMachine,
    data: *const c_char,
    log2_size: u32,
    accept_row: *mut u64,
) -> LampStatus {
    guard(|| {
        let tm = &handle(machine, "machine")?.0;
        let data = parse_tape(text(data, "data")?)?;
        let report = universal::run_machine(tm, &data, log2_size, false)?;
        *out(accept_row, "accept_row")? = report.accept_row;
        Ok(())
    })
}

/// Level-`k` macrotile sizes: address width, packet length and side. Fails with `Validity`
/// when a value does not fit in 64 bits.
///
/// # Safety
/// All out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn lamp_layout(
    k: u32,
    c: u32,
    program_len: u64,
    n: *mut u64,
    packet: *mut u64,
    side: *mut u64,
) -> LampStatus {
    guard(|| {
        let m = universal::macrotile_layout(k, c, program_len)?;
        let narrow = |v: &num_bigint::BigUint| {
            u64::try_from(v).map_err(|_| Failure::Lib(Error::validity(format!("{v} does not fit in 64 bits"))))
        };
        *out(n, "n")? = narrow(&m.n)?;
        *out(packet, "packet")? = narrow(&m.packet)?;
        *out(side, "side")? = narrow(&m.side)?;
        Ok(())
    })
}

/// Canonical X_tree colour `(p, q)` of the element with the given lit lamps and head.
///
/// # Safety
/// `lamps` must point to `lamp_count` values (or be null when the count is 0); `p`, `q` writable.
#[no_mangle]
pub unsafe extern "C" fn lamp_xtree_canonical(
    lamps: *const i64,
    lamp_count: usize,
    head: i64,
    p: *mut u8,
    q: *mut u8,
) -> LampStatus {
    guard(|| {
        let lamps: &[i64] = if lamp_count == 0 {
            &[]
        } else if lamps.is_null() {
            return Err(Failure::Null("lamps"));
        } else {
            std::slice::from_raw_parts(lamps, lamp_count)
        };
        let (a, b) = xtree::canonical_config(&LampElement::new(lamps.iter().copied(), head));
        *out(p, "p")? = a;
        *out(q, "q")? = b;
        Ok(())
    })
}
