//! Dense row-major arrays of small symbols, used for 2D machine outputs,
//! BDM inputs, adjacency matrices and cellular-automaton evolutions.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Grid {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
}

impl Grid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0)
    }

    pub fn filled(rows: usize, cols: usize, symbol: u8) -> Self {
        Grid {
            rows,
            cols,
            cells: vec![symbol; rows * cols],
        }
    }

    pub fn from_cells(rows: usize, cols: usize, cells: Vec<u8>) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(Error::Validation(format!(
                "grid of {rows}x{cols} needs {} cells, got {}",
                rows * cols,
                cells.len()
            )));
        }
        Ok(Grid { rows, cols, cells })
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut cells = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Validation(format!(
                    "row {i} has {} cells, expected {cols}",
                    r.len()
                )));
            }
            cells.extend_from_slice(r);
        }
        Ok(Grid {
            rows: rows.len(),
            cols,
            cells,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.cells[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u8> {
        (i < self.rows && j < self.cols).then(|| self.cells[i * self.cols + j])
    }

    /// Panics when out of bounds.
    pub fn at(&self, i: usize, j: usize) -> u8 {
        assert!(i < self.rows && j < self.cols, "({i},{j}) outside {}x{}", self.rows, self.cols);
        self.cells[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        assert!(i < self.rows && j < self.cols, "({i},{j}) outside {}x{}", self.rows, self.cols);
        self.cells[i * self.cols + j] = v;
    }

    /// Copy of the `h`x`w` sub-array whose top-left corner is `(i, j)`.
    pub fn sub_grid(&self, i: usize, j: usize, h: usize, w: usize) -> Grid {
        let mut cells = Vec::with_capacity(h * w);
        for r in i..i + h {
            cells.extend_from_slice(&self.cells[r * self.cols + j..r * self.cols + j + w]);
        }
        Grid {
            rows: h,
            cols: w,
            cells,
        }
    }

    /// Binary complement; only meaningful for 0/1 grids.
    pub fn complement(&self) -> Grid {
        Grid {
            rows: self.rows,
            cols: self.cols,
            cells: self.cells.iter().map(|&c| 1 - c.min(1)).collect(),
        }
    }

    /// Left-right reflection: every row reversed.
    pub fn mirror(&self) -> Grid {
        let mut out = self.clone();
        for r in out.cells.chunks_mut(self.cols.max(1)) {
            r.reverse();
        }
        out
    }

    pub fn transpose(&self) -> Grid {
        let mut cells = Vec::with_capacity(self.cells.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                cells.push(self.cells[i * self.cols + j]);
            }
        }
        Grid {
            rows: self.cols,
            cols: self.rows,
            cells,
        }
    }

    /// Parse rows of digit characters, one row per line. Blank lines are skipped.
    pub fn parse_text(text: &str) -> Result<Grid> {
        let mut rows: Vec<Vec<u8>> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = parse_digits(line).map_err(|m| Error::parse(n + 1, m))?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::parse(
                        n + 1,
                        format!("row has {} cells, expected {}", row.len(), first.len()),
                    ));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::parse(1, "empty grid"));
        }
        Grid::from_rows(&rows)
    }

    pub fn read_text(path: &Path) -> Result<Grid> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Grid::parse_text(&text).map_err(|e| e.with_path(path))
    }

    /// One line per row, digits only, trailing newline.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for i in 0..self.rows {
            s.push_str(&digits_to_string(self.row(i)));
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}:{}", self.rows, self.cols, digits_to_string(&self.cells))
    }
}

pub(crate) fn parse_digits(s: &str) -> std::result::Result<Vec<u8>, String> {
    s.bytes()
        .map(|b| match b {
            b'0'..=b'9' => Ok(b - b'0'),
            _ => Err(format!("unexpected character {:?}", b as char)),
        })
        .collect()
}

pub(crate) fn digits_to_string(cells: &[u8]) -> String {
    cells.iter().map(|&c| char::from(b'0' + c)).collect()
}
