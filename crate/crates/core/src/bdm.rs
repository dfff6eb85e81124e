//! Block Decomposition Method: the complexity of a large string or array is
//! estimated from a CTM base table as the sum, over distinct non-overlapping
//! blocks, of the block's CTM value plus `log2` of its multiplicity.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::ctm::CtmTable;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::machine::Dimension;
use crate::output::OutputObject;

/// Default block side for arrays.
pub const DEFAULT_BLOCK_2D: usize = 4;
/// Default block length for strings.
pub const DEFAULT_BLOCK_1D: usize = 12;

/// Block complexities `K_m(block)` keyed by block.
#[derive(Clone, Debug)]
pub struct BaseTable {
    dimension: Dimension,
    symbols: u32,
    values: HashMap<OutputObject, f64>,
    symmetrized: bool,
}

impl BaseTable {
    /// Every entry of a CTM table, valued by `ctm_value`.
    pub fn from_ctm(table: &CtmTable) -> Self {
        let values = table
            .counts()
            .keys()
            .map(|k| (k.clone(), table.ctm_value(k).expect("key from the table")))
            .collect();
        BaseTable {
            dimension: table.space().dimension(),
            symbols: table.space().symbols(),
            values,
            symmetrized: false,
        }
    }

    /// Only entries with at most `max_cells` cells.
    pub fn from_ctm_bounded(table: &CtmTable, max_cells: usize) -> Self {
        let mut b = Self::from_ctm(table);
        b.values.retain(|k, _| k.len() <= max_cells);
        b
    }

    /// Explicit values, e.g. from an external estimator.
    pub fn from_values(
        dimension: Dimension,
        symbols: u32,
        values: impl IntoIterator<Item = (OutputObject, f64)>,
    ) -> Result<Self> {
        let values: HashMap<OutputObject, f64> = values.into_iter().collect();
        for (k, v) in &values {
            if k.dimension() != dimension {
                return Err(Error::Consistency(format!("block {k} in a {}D base table", dimension.rank())));
            }
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::Validation(format!("block {k} has value {v}")));
            }
        }
        Ok(BaseTable {
            dimension,
            symbols,
            values,
            symmetrized: false,
        })
    }

    /// On a miss, fall back to the value of a reflected, rotated or (binary
    /// tables) complemented copy of the block.
    pub fn with_symmetrized_lookup(mut self, on: bool) -> Self {
        self.symmetrized = on;
        self
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `K_m(block)`, or `None` when the table does not cover it.
    pub fn value(&self, block: &OutputObject) -> Option<f64> {
        if let Some(&v) = self.values.get(block) {
            return Some(v);
        }
        if !self.symmetrized {
            return None;
        }
        symmetric_images(block, self.symbols == 2)
            .iter()
            .find_map(|img| self.values.get(img).copied())
    }

    /// Whether every string of length `len` over the table's alphabet has a value.
    pub fn covers_all_strings(&self, len: usize) -> bool {
        if self.dimension != Dimension::OneD {
            return false;
        }
        let m = self.symbols as usize;
        let Some(total) = m.checked_pow(len as u32) else {
            return false;
        };
        (0..total).all(|mut v| {
            let mut s = vec![0u8; len];
            for c in s.iter_mut().rev() {
                *c = (v % m) as u8;
                v /= m;
            }
            self.value(&OutputObject::Tape(s)).is_some()
        })
    }

    /// Whether every `d`x`d` array over the table's alphabet has a value.
    pub fn covers_all_squares(&self, d: usize) -> bool {
        if self.dimension != Dimension::TwoD {
            return false;
        }
        let m = self.symbols as usize;
        let Some(total) = m.checked_pow((d * d) as u32) else {
            return false;
        };
        (0..total).all(|mut v| {
            let mut cells = vec![0u8; d * d];
            for c in cells.iter_mut().rev() {
                *c = (v % m) as u8;
                v /= m;
            }
            self.value(&OutputObject::Array(Grid::from_cells(d, d, cells).unwrap()))
                .is_some()
        })
    }
}

fn symmetric_images(block: &OutputObject, binary: bool) -> Vec<OutputObject> {
    let mut base = match block {
        OutputObject::Tape(_) => vec![block.clone(), block.mirror()],
        OutputObject::Array(g) => {
            let mut v = Vec::with_capacity(8);
            let mut cur = g.clone();
            for _ in 0..4 {
                v.push(OutputObject::Array(cur.clone()));
                v.push(OutputObject::Array(cur.mirror()));
                // rotate a quarter turn
                cur = cur.transpose().mirror();
            }
            v
        }
    };
    if binary {
        let comps: Vec<OutputObject> = base.iter().map(|o| o.complement()).collect();
        base.extend(comps);
    }
    base
}

/// How to treat cells that do not fill a whole block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// Dimensions must be multiples of the block size.
    Exact,
    /// Drop the trailing partial blocks.
    Ignore,
    /// Extend with the given symbol to the next multiple.
    Pad(u8),
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Exact => f.write_str("exact"),
            Boundary::Ignore => f.write_str("ignore"),
            Boundary::Pad(s) => write!(f, "pad{s}"),
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Boundary::Exact),
            "ignore" => Ok(Boundary::Ignore),
            "pad" => Ok(Boundary::Pad(0)),
            _ => s
                .strip_prefix("pad")
                .and_then(|d| d.parse().ok())
                .map(Boundary::Pad)
                .ok_or_else(|| Error::Validation(format!("boundary {s:?} (expected exact, ignore or pad<symbol>)"))),
        }
    }
}

/// What the boundary strategy did to the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryReport {
    Exact,
    Ignored { cells: usize },
    Padded { symbol: u8, cells: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    pub block_size: usize,
    /// Distinct blocks with multiplicities, in order of first occurrence
    /// (row-major scan).
    pub pairs: Vec<(OutputObject, u64)>,
    pub boundary: BoundaryReport,
}

impl BlockDecomposition {
    pub fn block_count(&self) -> u64 {
        self.pairs.iter().map(|(_, n)| n).sum()
    }

    /// Cells covered by blocks.
    pub fn block_cells(&self) -> usize {
        self.pairs.iter().map(|(b, n)| b.len() * *n as usize).sum()
    }
}

fn check_block_size(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Validation("block size must be at least 1".into()));
    }
    Ok(())
}

struct Tally {
    index: HashMap<OutputObject, usize>,
    pairs: Vec<(OutputObject, u64)>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            index: HashMap::new(),
            pairs: Vec::new(),
        }
    }

    fn add(&mut self, block: OutputObject) {
        match self.index.get(&block) {
            Some(&i) => self.pairs[i].1 += 1,
            None => {
                self.index.insert(block.clone(), self.pairs.len());
                self.pairs.push((block, 1));
            }
        }
    }
}

/// Split an array into non-overlapping `d`x`d` blocks.
pub fn decompose(input: &Grid, d: usize, boundary: Boundary) -> Result<BlockDecomposition> {
    check_block_size(d)?;
    if input.is_empty() {
        return Err(Error::Validation("cannot decompose an empty array".into()));
    }
    let (rows, cols) = (input.rows(), input.cols());
    let (rr, cr) = (rows % d, cols % d);
    let (grid, report) = match boundary {
        _ if rr == 0 && cr == 0 => (None, BoundaryReport::Exact),
        Boundary::Exact => {
            return Err(Error::Dimension {
                rows,
                cols,
                block_size: d,
                row_remainder: rr,
                col_remainder: cr,
            })
        }
        Boundary::Ignore => {
            let kept = (rows - rr) * (cols - cr);
            (None, BoundaryReport::Ignored { cells: rows * cols - kept })
        }
        Boundary::Pad(symbol) => {
            let (pr, pc) = (rows.div_ceil(d) * d, cols.div_ceil(d) * d);
            let mut padded = Grid::filled(pr, pc, symbol);
            for i in 0..rows {
                for j in 0..cols {
                    padded.set(i, j, input.at(i, j));
                }
            }
            (
                Some(padded),
                BoundaryReport::Padded {
                    symbol,
                    cells: pr * pc - rows * cols,
                },
            )
        }
    };
    let g = grid.as_ref().unwrap_or(input);
    let mut tally = Tally::new();
    for bi in 0..g.rows() / d {
        for bj in 0..g.cols() / d {
            tally.add(OutputObject::Array(g.sub_grid(bi * d, bj * d, d, d)));
        }
    }
    Ok(BlockDecomposition {
        block_size: d,
        pairs: tally.pairs,
        boundary: report,
    })
}

/// Split a string into non-overlapping blocks of length `d`.
pub fn decompose_string(input: &[u8], d: usize, boundary: Boundary) -> Result<BlockDecomposition> {
    check_block_size(d)?;
    if input.is_empty() {
        return Err(Error::Validation("cannot decompose an empty string".into()));
    }
    let rem = input.len() % d;
    let mut owned;
    let (s, report) = match boundary {
        _ if rem == 0 => (input, BoundaryReport::Exact),
        Boundary::Exact => {
            return Err(Error::Dimension {
                rows: 1,
                cols: input.len(),
                block_size: d,
                row_remainder: 0,
                col_remainder: rem,
            })
        }
        Boundary::Ignore => (&input[..input.len() - rem], BoundaryReport::Ignored { cells: rem }),
        Boundary::Pad(symbol) => {
            owned = input.to_vec();
            owned.resize(input.len() + d - rem, symbol);
            (&owned[..], BoundaryReport::Padded { symbol, cells: d - rem })
        }
    };
    let mut tally = Tally::new();
    for chunk in s.chunks_exact(d) {
        tally.add(OutputObject::Tape(chunk.to_vec()));
    }
    Ok(BlockDecomposition {
        block_size: d,
        pairs: tally.pairs,
        boundary: report,
    })
}

/// Sum over distinct blocks of `log2(multiplicity) + K_m(block)`.
pub fn bdm_of(decomposition: &BlockDecomposition, table: &BaseTable) -> Result<f64> {
    let mut missing = Vec::new();
    let mut total = 0.0;
    for (block, n) in &decomposition.pairs {
        if block.dimension() != table.dimension() {
            return Err(Error::Consistency(format!(
                "{}D block against a {}D base table",
                block.dimension().rank(),
                table.dimension().rank()
            )));
        }
        match table.value(block) {
            Some(k) => total += (*n as f64).log2() + k,
            None => missing.push(block.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingBlocks(missing));
    }
    Ok(total)
}

pub fn bdm_value(input: &Grid, table: &BaseTable, d: usize, boundary: Boundary) -> Result<f64> {
    bdm_of(&decompose(input, d, boundary)?, table)
}

pub fn bdm_string(input: &[u8], table: &BaseTable, d: usize, boundary: Boundary) -> Result<f64> {
    bdm_of(&decompose_string(input, d, boundary)?, table)
}

/// Shannon entropy in bits of the empirical distribution of non-overlapping
/// blocks of `block_size` symbols. A trailing partial block is dropped;
/// inputs shorter than one block have entropy 0.
pub fn shannon_block_entropy(input: &[u8], block_size: usize) -> f64 {
    let block_size = block_size.max(1);
    let mut freq: HashMap<&[u8], usize> = HashMap::new();
    for b in input.chunks_exact(block_size) {
        *freq.entry(b).or_default() += 1;
    }
    entropy_of_counts(freq.values().copied())
}

fn entropy_of_counts(counts: impl Iterator<Item = usize> + Clone) -> f64 {
    let n: usize = counts.clone().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let h: f64 = counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    // -0.0 for single-valued inputs
    h.max(0.0)
}

/// Per-symbol Shannon entropy of a grid's cells.
pub fn shannon_cell_entropy(input: &Grid) -> f64 {
    shannon_block_entropy(input.cells(), 1)
}

/// Paired entropy and BDM for one input, with each value's normalized
/// mid-rank within a population of comparison inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyBdmReport {
    /// Block-1 (per-symbol) entropy in bits.
    pub entropy: f64,
    pub bdm: f64,
    /// Fraction of the population below the value, counting ties as half.
    pub entropy_rank: f64,
    pub bdm_rank: f64,
    /// Ranks at least half the population apart.
    pub disagreement: bool,
}

/// Ties within this distance count as equal when ranking.
const RANK_TIE_EPS: f64 = 1e-9;

pub fn normalized_rank(value: f64, population: &[f64]) -> f64 {
    if population.is_empty() {
        return 0.0;
    }
    let (mut below, mut equal) = (0usize, 0usize);
    for &p in population {
        if (p - value).abs() <= RANK_TIE_EPS {
            equal += 1;
        } else if p < value {
            below += 1;
        }
    }
    (below as f64 + 0.5 * equal as f64) / population.len() as f64
}

pub fn compare_entropy_vs_bdm(
    input: &[u8],
    population: &[Vec<u8>],
    table: &BaseTable,
    d: usize,
    boundary: Boundary,
) -> Result<EntropyBdmReport> {
    let entropy = shannon_block_entropy(input, 1);
    let bdm = bdm_string(input, table, d, boundary)?;
    let pop_entropy: Vec<f64> = population.iter().map(|p| shannon_block_entropy(p, 1)).collect();
    let pop_bdm = population
        .iter()
        .map(|p| bdm_string(p, table, d, boundary))
        .collect::<Result<Vec<f64>>>()?;
    let entropy_rank = normalized_rank(entropy, &pop_entropy);
    let bdm_rank = normalized_rank(bdm, &pop_bdm);
    Ok(EntropyBdmReport {
        entropy,
        bdm,
        entropy_rank,
        bdm_rank,
        disagreement: (entropy_rank - bdm_rank).abs() >= 0.5,
    })
}
