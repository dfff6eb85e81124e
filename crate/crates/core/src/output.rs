//! Machine outputs: symbol strings for 1D machines, bounding-box arrays for
//! turmites. The text form is the key used by table files.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{digits_to_string, parse_digits, Grid};
use crate::machine::Dimension;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OutputObject {
    Tape(Vec<u8>),
    Array(Grid),
}

impl OutputObject {
    pub fn dimension(&self) -> Dimension {
        match self {
            OutputObject::Tape(_) => Dimension::OneD,
            OutputObject::Array(_) => Dimension::TwoD,
        }
    }

    pub fn symbols(&self) -> &[u8] {
        match self {
            OutputObject::Tape(s) => s,
            OutputObject::Array(g) => g.cells(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols().len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols().is_empty()
    }

    /// Largest symbol present, or 0 for an empty object.
    pub fn max_symbol(&self) -> u8 {
        self.symbols().iter().copied().max().unwrap_or(0)
    }

    /// 0 <-> 1 swap. Only meaningful for binary outputs.
    pub fn complement(&self) -> OutputObject {
        match self {
            OutputObject::Tape(s) => OutputObject::Tape(s.iter().map(|&c| 1 - c.min(1)).collect()),
            OutputObject::Array(g) => OutputObject::Array(g.complement()),
        }
    }

    /// Reversal of a string; left-right reflection of an array.
    pub fn mirror(&self) -> OutputObject {
        match self {
            OutputObject::Tape(s) => OutputObject::Tape(s.iter().rev().copied().collect()),
            OutputObject::Array(g) => OutputObject::Array(g.mirror()),
        }
    }

    /// Record-dump form: digits, with `;` between rows for arrays.
    pub fn to_record_string(&self) -> String {
        match self {
            OutputObject::Tape(s) => digits_to_string(s),
            OutputObject::Array(g) => (0..g.rows())
                .map(|i| digits_to_string(g.row(i)))
                .collect::<Vec<_>>()
                .join(";"),
        }
    }

    pub fn parse_record_string(s: &str, dim: Dimension) -> Result<OutputObject> {
        match dim {
            Dimension::OneD => parse_digits(s)
                .map(OutputObject::Tape)
                .map_err(Error::Validation),
            Dimension::TwoD => {
                let rows = s
                    .split(';')
                    .map(parse_digits)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(Error::Validation)?;
                Grid::from_rows(&rows).map(OutputObject::Array)
            }
        }
    }
}

impl fmt::Display for OutputObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputObject::Tape(s) => f.write_str(&digits_to_string(s)),
            OutputObject::Array(g) => g.fmt(f),
        }
    }
}

impl FromStr for OutputObject {
    type Err = Error;

    /// Accepts `0110` (string) or `2x2:0110` (array).
    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::Validation(format!("output {s:?}: {m}"));
        match s.split_once(':') {
            None => {
                let cells = parse_digits(s).map_err(bad)?;
                if cells.is_empty() {
                    return Err(bad("empty output".into()));
                }
                Ok(OutputObject::Tape(cells))
            }
            Some((dims, body)) => {
                let (r, c) = dims
                    .split_once('x')
                    .ok_or_else(|| bad("expected <rows>x<cols> before ':'".into()))?;
                let rows: usize = r.trim().parse().map_err(|_| bad("bad row count".into()))?;
                let cols: usize = c.trim().parse().map_err(|_| bad("bad column count".into()))?;
                let cells = parse_digits(body).map_err(bad)?;
                if rows == 0 || cols == 0 {
                    return Err(bad("empty array".into()));
                }
                Grid::from_cells(rows, cols, cells)
                    .map(OutputObject::Array)
                    .map_err(|e| bad(e.to_string()))
            }
        }
    }
}

impl PartialOrd for OutputObject {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order of the text key.
impl Ord for OutputObject {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (OutputObject::Tape(a), OutputObject::Tape(b)) => a.cmp(b),
            _ => self.to_string().cmp(&other.to_string()),
        }
    }
}
