//! C ABI over `softspace-core`.
//!
//! Every fallible function returns an [`SsStatus`]; on failure the message is
//! available from [`ss_last_error_message`] on the same thread. Tables are
//! opaque handles released with their `_free` function. Rule indices cross
//! the boundary as two 64-bit halves.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use softspace::bdm::{self, BaseTable, Boundary};
use softspace::ctm::{self, CtmTable};
use softspace::enumeration::IndexRange;
use softspace::render::peano_xy;
use softspace::runner::Simulator;
use softspace::{Budget, Dimension, Error, Grid, MachineSpace, OutputObject};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullPointer = 1,
    Range = 2,
    Validation = 3,
    Unsupported = 4,
    Consistency = 5,
    NotInSupport = 6,
    Dimension = 7,
    MissingBlocks = 8,
    Parse = 9,
    Io = 10,
    Utf8 = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// Boundary strategy for block decomposition.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsBoundary {
    Exact = 0,
    Ignore = 1,
    /// Pad with the symbol passed alongside.
    Pad = 2,
}

/// Outcome of one machine run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SsRunResult {
    pub halted: bool,
    pub steps: u64,
}

/// Opaque output-frequency table.
pub struct SsCtmTable(CtmTable);

/// Opaque block-complexity table.
pub struct SsBaseTable(BaseTable);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SsStatus {
    match e {
        Error::Range { .. } | Error::Capacity { .. } => SsStatus::Range,
        Error::Validation(_) | Error::NoSuchEdge(..) => SsStatus::Validation,
        Error::Unsupported(_) => SsStatus::Unsupported,
        Error::Consistency(_) | Error::NoHaltingMachines => SsStatus::Consistency,
        Error::NotInSupport { .. } => SsStatus::NotInSupport,
        Error::Dimension { .. } => SsStatus::Dimension,
        Error::MissingBlocks(_) => SsStatus::MissingBlocks,
        Error::Parse { .. } => SsStatus::Parse,
        Error::Io { .. } => SsStatus::Io,
    }
}

struct Fail(SsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SsStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(SsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SsStatus::Utf8, format!("{what} is not UTF-8")))
}

fn dimension(dim: u32) -> Result<Dimension, Fail> {
    Ok(Dimension::from_rank(dim)?)
}

fn boundary(b: SsBoundary, pad: u8) -> Boundary {
    match b {
        SsBoundary::Exact => Boundary::Exact,
        SsBoundary::Ignore => Boundary::Ignore,
        SsBoundary::Pad => Boundary::Pad(pad),
    }
}

/// Message of the last failure on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Number of machines in a space (`dim` is 1 or 2), split into 64-bit halves.
///
/// # Safety
/// `out_hi` and `out_lo` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_space_size(
    states: u32,
    symbols: u32,
    dim: u32,
    out_hi: *mut u64,
    out_lo: *mut u64,
) -> SsStatus {
    guard(|| {
        non_null(out_hi, "out_hi")?;
        non_null(out_lo, "out_lo")?;
        let size = MachineSpace::new(states, symbols, dimension(dim)?)?.space_size()?;
        *out_hi = (size >> 64) as u64;
        *out_lo = size as u64;
        Ok(())
    })
}

/// Run one machine from a blank tape. If `output` is non-null, the output
/// key (e.g. `0110` or `2x2:0110`) is written there NUL-terminated; the
/// required size including the NUL goes to `output_needed` when non-null.
/// A halting run with a too-small buffer still fills `out` and reports
/// `BufferTooSmall`.
///
/// # Safety
/// `out` must be valid for writes; `output` must point to `output_len`
/// writable bytes when non-null.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ss_run_machine(
    states: u32,
    symbols: u32,
    dim: u32,
    index_hi: u64,
    index_lo: u64,
    budget: u64,
    out: *mut SsRunResult,
    output: *mut c_char,
    output_len: usize,
    output_needed: *mut usize,
) -> SsStatus {
    guard(|| {
        non_null(out, "out")?;
        let space = MachineSpace::new(states, symbols, dimension(dim)?)?;
        let index = (u128::from(index_hi) << 64) | u128::from(index_lo);
        let rec = Simulator::new().run_index(index, &space, Budget::new(budget)?)?;
        *out = SsRunResult {
            halted: rec.halted,
            steps: rec.steps,
        };
        let key = rec.output.map(|o| o.to_string()).unwrap_or_default();
        let needed = key.len() + 1;
        if !output_needed.is_null() {
            *output_needed = needed;
        }
        if !output.is_null() {
            if output_len < needed {
                return Err(Fail(
                    SsStatus::BufferTooSmall,
                    format!("output needs {needed} bytes, buffer has {output_len}"),
                ));
            }
            std::ptr::copy_nonoverlapping(key.as_ptr(), output.cast::<u8>(), key.len());
            *output.add(key.len()) = 0;
        }
        Ok(())
    })
}

/// Peano curve cell of step `t` at level `k`.
///
/// # Safety
/// `x` and `y` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_peano_xy(t: u64, k: u32, x: *mut u64, y: *mut u64) -> SsStatus {
    guard(|| {
        non_null(x, "x")?;
        non_null(y, "y")?;
        let (a, b) = peano_xy(t, k)?;
        *x = a;
        *y = b;
        Ok(())
    })
}

/// Load a table file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_ctm_table_load(path: *const c_char, out: *mut *mut SsCtmTable) -> SsStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = read_str(path, "path")?;
        let t = CtmTable::load(Path::new(path))?;
        *out = Box::into_raw(Box::new(SsCtmTable(t)));
        Ok(())
    })
}

/// Build the table of a whole space by running every machine.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_ctm_table_build(
    states: u32,
    symbols: u32,
    dim: u32,
    budget: u64,
    out: *mut *mut SsCtmTable,
) -> SsStatus {
    guard(|| {
        non_null(out, "out")?;
        let space = MachineSpace::new(states, symbols, dimension(dim)?)?;
        let t = ctm::build_table_for_range(&space, IndexRange::full(&space)?, Budget::new(budget)?)?;
        *out = Box::into_raw(Box::new(SsCtmTable(t)));
        Ok(())
    })
}

/// Write a table file.
///
/// # Safety
/// `table` must come from this library; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ss_ctm_table_save(table: *const SsCtmTable, path: *const c_char) -> SsStatus {
    guard(|| {
        non_null(table, "table")?;
        let path = read_str(path, "path")?;
        (*table).0.save(Path::new(path))?;
        Ok(())
    })
}

/// Release a table; null is ignored.
///
/// # Safety
/// `table` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ss_ctm_table_free(table: *mut SsCtmTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of distinct outputs; 0 for null.
///
/// # Safety
/// `table` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ss_ctm_table_len(table: *const SsCtmTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.len())
}

unsafe fn table_object<'a>(
    table: *const SsCtmTable,
    object: *const c_char,
) -> Result<(&'a CtmTable, OutputObject), Fail> {
    non_null(table, "table")?;
    let t = &(*table).0;
    let o: OutputObject = read_str(object, "object")?.parse()?;
    if o.dimension() != t.space().dimension() {
        return Err(Fail(SsStatus::Consistency, format!("{o} does not match the table dimension")));
    }
    Ok((t, o))
}

/// Raw count of an output (0 when absent).
///
/// # Safety
/// `table` must come from this library; `object` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_ctm_count(table: *const SsCtmTable, object: *const c_char, out: *mut u64) -> SsStatus {
    guard(|| {
        non_null(out, "out")?;
        let (t, o) = table_object(table, object)?;
        *out = t.count(&o);
        Ok(())
    })
}

/// `-log2` of the output's frequency among halting runs.
///
/// # Safety
/// `table` must come from this library; `object` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_ctm_value(table: *const SsCtmTable, object: *const c_char, out: *mut f64) -> SsStatus {
    guard(|| {
        non_null(out, "out")?;
        let (t, o) = table_object(table, object)?;
        *out = t.ctm_value(&o)?;
        Ok(())
    })
}

/// Block-complexity table from a frequency table.
///
/// # Safety
/// `table` must come from this library; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_base_table_from_ctm(
    table: *const SsCtmTable,
    symmetrized: bool,
    out: *mut *mut SsBaseTable,
) -> SsStatus {
    guard(|| {
        non_null(table, "table")?;
        non_null(out, "out")?;
        let b = BaseTable::from_ctm(&(*table).0).with_symmetrized_lookup(symmetrized);
        *out = Box::into_raw(Box::new(SsBaseTable(b)));
        Ok(())
    })
}

/// Release a base table; null is ignored.
///
/// # Safety
/// `table` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ss_base_table_free(table: *mut SsBaseTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// BDM of a string of `len` symbols.
///
/// # Safety
/// `table` must come from this library; `cells` must point to `len` bytes;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_bdm_string(
    table: *const SsBaseTable,
    cells: *const u8,
    len: usize,
    block_size: usize,
    strategy: SsBoundary,
    pad_symbol: u8,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        non_null(table, "table")?;
        non_null(cells, "cells")?;
        non_null(out, "out")?;
        let s = std::slice::from_raw_parts(cells, len);
        *out = bdm::bdm_string(s, &(*table).0, block_size, boundary(strategy, pad_symbol))?;
        Ok(())
    })
}

/// BDM of a row-major `rows x cols` array.
///
/// # Safety
/// `table` must come from this library; `cells` must point to `rows * cols`
/// bytes; `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ss_bdm_grid(
    table: *const SsBaseTable,
    cells: *const u8,
    rows: usize,
    cols: usize,
    block_size: usize,
    strategy: SsBoundary,
    pad_symbol: u8,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        non_null(table, "table")?;
        non_null(cells, "cells")?;
        non_null(out, "out")?;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Fail(SsStatus::Range, "rows * cols overflows".into()))?;
        let grid = Grid::from_cells(rows, cols, std::slice::from_raw_parts(cells, n).to_vec())?;
        *out = bdm::bdm_value(&grid, &(*table).0, block_size, boundary(strategy, pad_symbol))?;
        Ok(())
    })
}
