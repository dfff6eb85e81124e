//! Algorithmic Information Dynamics: perturb grids and graphs, measure the
//! signed change in BDM complexity, classify each element against a
//! size-dependent threshold and collect the sorted information signature.
//!
//! Deltas are `C(G) - C(G')`: positive when the perturbation lowered the
//! estimated complexity. An element is neutral when `|delta|` is at most the
//! threshold (inclusive), information-carrying otherwise.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bdm::{decompose, BaseTable, Boundary, BoundaryReport};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::output::OutputObject;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetKind {
    Grid,
    Graph { directed: bool },
}

/// A binary object under perturbation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbationTarget {
    object: Grid,
    kind: TargetKind,
}

impl PerturbationTarget {
    pub fn grid(object: Grid) -> Result<Self> {
        check_binary(&object)?;
        Ok(PerturbationTarget {
            object,
            kind: TargetKind::Grid,
        })
    }

    /// Square 0/1 adjacency matrix with an empty diagonal; symmetric unless
    /// `directed`.
    pub fn graph(adjacency: Grid, directed: bool) -> Result<Self> {
        check_binary(&adjacency)?;
        let n = adjacency.rows();
        if adjacency.cols() != n {
            return Err(Error::Validation(format!(
                "adjacency matrix must be square, got {}x{}",
                n,
                adjacency.cols()
            )));
        }
        for i in 0..n {
            if adjacency.at(i, i) != 0 {
                return Err(Error::Validation(format!("self-loop at vertex {i}")));
            }
            if !directed {
                for j in i + 1..n {
                    if adjacency.at(i, j) != adjacency.at(j, i) {
                        return Err(Error::Validation(format!(
                            "undirected adjacency is not symmetric at ({i},{j})"
                        )));
                    }
                }
            }
        }
        Ok(PerturbationTarget {
            object: adjacency,
            kind: TargetKind::Graph { directed },
        })
    }

    /// Complete graph on `n` vertices.
    pub fn complete_graph(n: usize) -> Self {
        let mut g = Grid::filled(n, n, 1);
        for i in 0..n {
            g.set(i, i, 0);
        }
        PerturbationTarget {
            object: g,
            kind: TargetKind::Graph { directed: false },
        }
    }

    pub fn object(&self) -> &Grid {
        &self.object
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    /// Edges as (u, v); `u < v` for undirected graphs. Empty for grids.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let TargetKind::Graph { directed } = self.kind else {
            return Vec::new();
        };
        let n = self.object.rows();
        let mut out = Vec::new();
        for u in 0..n {
            let from = if directed { 0 } else { u + 1 };
            for v in from..n {
                if self.object.at(u, v) == 1 {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// `|G|` under the given measure.
    pub fn size(&self, measure: SizeMeasure) -> usize {
        match measure {
            SizeMeasure::Cells => self.object.len(),
            SizeMeasure::Vertices => self.object.rows(),
            SizeMeasure::Rows => self.object.rows(),
        }
    }

    /// The measure used when none is given: vertices for graphs, cells for grids.
    pub fn default_measure(&self) -> SizeMeasure {
        match self.kind {
            TargetKind::Grid => SizeMeasure::Cells,
            TargetKind::Graph { .. } => SizeMeasure::Vertices,
        }
    }
}

fn check_binary(g: &Grid) -> Result<()> {
    if g.is_empty() {
        return Err(Error::Validation("empty object".into()));
    }
    if g.cells().iter().any(|&c| c > 1) {
        return Err(Error::Validation("perturbation targets must be binary".into()));
    }
    Ok(())
}

/// Flip the bit at `(i, j)`.
pub fn perturb_flip(grid: &Grid, i: usize, j: usize) -> Result<Grid> {
    let v = grid
        .get(i, j)
        .ok_or_else(|| Error::range("cell", format!("({i},{j})"), "(0,0)", format!("({},{})", grid.rows(), grid.cols())))?;
    let mut out = grid.clone();
    out.set(i, j, 1 - v.min(1));
    Ok(out)
}

/// Remove edge `(u, v)` (and `(v, u)` when undirected).
pub fn perturb_edge_delete(adjacency: &Grid, u: usize, v: usize, directed: bool) -> Result<Grid> {
    if adjacency.get(u, v) != Some(1) {
        return Err(Error::NoSuchEdge(u, v));
    }
    let mut out = adjacency.clone();
    out.set(u, v, 0);
    if !directed {
        out.set(v, u, 0);
    }
    Ok(out)
}

/// Inverse of [`perturb_edge_delete`].
pub fn perturb_edge_add(adjacency: &Grid, u: usize, v: usize, directed: bool) -> Result<Grid> {
    if u == v || adjacency.get(u, v).is_none() {
        return Err(Error::range("vertex pair", format!("({u},{v})"), 0, adjacency.rows()));
    }
    let mut out = adjacency.clone();
    out.set(u, v, 1);
    if !directed {
        out.set(v, u, 1);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Perturbation {
    Identity,
    Flip { i: usize, j: usize },
    DeleteEdge { u: usize, v: usize, directed: bool },
}

impl Perturbation {
    pub fn apply(&self, g: &Grid) -> Result<Grid> {
        match *self {
            Perturbation::Identity => Ok(g.clone()),
            Perturbation::Flip { i, j } => perturb_flip(g, i, j),
            Perturbation::DeleteEdge { u, v, directed } => perturb_edge_delete(g, u, v, directed),
        }
    }

    /// Cells changed and their new values.
    fn changes(&self, g: &Grid) -> Result<Vec<(usize, usize, u8)>> {
        match *self {
            Perturbation::Identity => Ok(vec![]),
            Perturbation::Flip { i, j } => {
                let v = perturb_flip(g, i, j)?.at(i, j);
                Ok(vec![(i, j, v)])
            }
            Perturbation::DeleteEdge { u, v, directed } => {
                if g.get(u, v) != Some(1) {
                    return Err(Error::NoSuchEdge(u, v));
                }
                let mut c = vec![(u, v, 0)];
                if !directed && u != v {
                    c.push((v, u, 0));
                }
                Ok(c)
            }
        }
    }

    pub fn element(&self) -> ElementId {
        match *self {
            Perturbation::Identity => ElementId::None,
            Perturbation::Flip { i, j } => ElementId::Cell(i, j),
            Perturbation::DeleteEdge { u, v, .. } => ElementId::Edge(u, v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementId {
    None,
    Cell(usize, usize),
    Edge(usize, usize),
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementId::None => f.write_str("-"),
            ElementId::Cell(i, j) => write!(f, "({i};{j})"),
            ElementId::Edge(u, v) => write!(f, "{u}-{v}"),
        }
    }
}

/// BDM as the complexity estimator `C`.
#[derive(Clone, Copy, Debug)]
pub struct BdmEstimator<'a> {
    pub table: &'a BaseTable,
    pub block_size: usize,
    pub boundary: Boundary,
}

impl<'a> BdmEstimator<'a> {
    pub fn new(table: &'a BaseTable, block_size: usize, boundary: Boundary) -> Self {
        BdmEstimator {
            table,
            block_size,
            boundary,
        }
    }

    pub fn complexity(&self, g: &Grid) -> Result<f64> {
        crate::bdm::bdm_value(g, self.table, self.block_size, self.boundary)
    }
}

/// A decomposed object from which single perturbations are evaluated by
/// updating only the affected block multiplicities.
struct Decomposed<'a> {
    est: BdmEstimator<'a>,
    /// Input as tiled (padded if the boundary pads).
    tiled: Grid,
    /// Extent covered by whole blocks.
    block_rows: usize,
    block_cols: usize,
    counts: HashMap<OutputObject, u64>,
}

impl<'a> Decomposed<'a> {
    fn new(g: &Grid, est: BdmEstimator<'a>) -> Result<Self> {
        let d = est.block_size;
        let dec = decompose(g, d, est.boundary)?;
        let tiled = match dec.boundary {
            BoundaryReport::Padded { symbol, .. } => {
                let mut p = Grid::filled(g.rows().div_ceil(d) * d, g.cols().div_ceil(d) * d, symbol);
                for i in 0..g.rows() {
                    for j in 0..g.cols() {
                        p.set(i, j, g.at(i, j));
                    }
                }
                p
            }
            _ => g.clone(),
        };
        let counts: HashMap<OutputObject, u64> = dec.pairs.into_iter().collect();
        let missing: Vec<String> = counts
            .keys()
            .filter(|b| est.table.value(b).is_none())
            .map(|b| b.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingBlocks(missing));
        }
        Ok(Decomposed {
            est,
            block_rows: tiled.rows() / d,
            block_cols: tiled.cols() / d,
            tiled,
            counts,
        })
    }

    fn term(&self, block: &OutputObject, n: u64) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        self.est
            .table
            .value(block)
            .map(|k| (n as f64).log2() + k)
            .ok_or_else(|| Error::MissingBlocks(vec![block.to_string()]))
    }

    /// `C(G) - C(G')` for the given cell changes.
    fn delta(&self, changes: &[(usize, usize, u8)]) -> Result<f64> {
        let d = self.est.block_size;
        // affected block positions, each with its modified copy
        let mut touched: Vec<((usize, usize), Grid)> = Vec::new();
        for &(i, j, v) in changes {
            let (bi, bj) = (i / d, j / d);
            if bi >= self.block_rows || bj >= self.block_cols {
                // cell outside every block under the ignore boundary
                continue;
            }
            let pos = touched.iter().position(|(p, _)| *p == (bi, bj));
            let idx = match pos {
                Some(k) => k,
                None => {
                    touched.push(((bi, bj), self.tiled.sub_grid(bi * d, bj * d, d, d)));
                    touched.len() - 1
                }
            };
            touched[idx].1.set(i - bi * d, j - bj * d, v);
        }
        let mut diff: HashMap<OutputObject, i64> = HashMap::new();
        for ((bi, bj), new_block) in touched {
            let old = OutputObject::Array(self.tiled.sub_grid(bi * d, bj * d, d, d));
            let new = OutputObject::Array(new_block);
            if old != new {
                *diff.entry(old).or_default() -= 1;
                *diff.entry(new).or_default() += 1;
            }
        }
        let mut change = 0.0;
        for (block, dn) in diff {
            if dn == 0 {
                continue;
            }
            let n = self.counts.get(&block).copied().unwrap_or(0);
            let n_new = (n as i64 + dn) as u64;
            change += self.term(&block, n_new)? - self.term(&block, n)?;
        }
        Ok(-change)
    }
}

/// `C(G) - C(G')` with `C` the BDM estimator.
pub fn aid_delta(g: &Grid, perturbation: &Perturbation, est: &BdmEstimator<'_>) -> Result<f64> {
    let changes = perturbation.changes(g)?;
    Decomposed::new(g, *est)?.delta(&changes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SizeMeasure {
    Cells,
    Vertices,
    /// Number of rows of a space-time evolution, its runtime analogue.
    Rows,
}

impl std::str::FromStr for SizeMeasure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cells" => Ok(SizeMeasure::Cells),
            "vertices" => Ok(SizeMeasure::Vertices),
            "rows" => Ok(SizeMeasure::Rows),
            _ => Err(Error::Validation(format!("size measure {s:?} (expected cells, vertices or rows)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Class {
    Neutral,
    Information,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// `log2(size)`, the default neutrality threshold.
pub fn size_term(size: usize) -> f64 {
    (size as f64).log2()
}

/// Neutral iff `|delta| <= threshold`.
pub fn classify(delta: f64, threshold: f64) -> (Class, Sign) {
    let class = if delta.abs() <= threshold {
        Class::Neutral
    } else {
        Class::Information
    };
    (class, Sign::of(delta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Flips,
    EdgeDeletions,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flips" => Ok(Family::Flips),
            "edges" | "edge-deletions" => Ok(Family::EdgeDeletions),
            _ => Err(Error::Validation(format!("family {s:?} (expected flips or edges)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub element: ElementId,
    pub delta: f64,
    pub class: Class,
    pub sign: Sign,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    /// Ordered by descending delta, ties by element.
    pub entries: Vec<ReportEntry>,
    /// Deltas in entry order.
    pub signature: Vec<f64>,
    pub size_term: f64,
    /// Threshold actually applied (equals `size_term` unless overridden).
    pub threshold: f64,
}

impl PerturbationReport {
    pub fn distinct_deltas(&self, tolerance: f64) -> usize {
        let mut n = 0;
        let mut last: Option<f64> = None;
        for &d in &self.signature {
            if last.is_none_or(|l| (l - d).abs() > tolerance) {
                n += 1;
                last = Some(d);
            }
        }
        n
    }

    /// CSV `element,delta,abs_delta,class,sign`.
    pub fn write_csv<W: Write>(&self, w: W, provenance: Option<&str>) -> std::io::Result<()> {
        let mut w = w;
        if let Some(p) = provenance {
            writeln!(w, "# {p}")?;
        }
        writeln!(w, "element,delta,abs_delta,class,sign")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{:.12},{:.12},{:?},{:?}",
                e.element,
                e.delta,
                e.delta.abs(),
                e.class,
                e.sign
            )?;
        }
        Ok(())
    }
}

fn order_entries(a: &ReportEntry, b: &ReportEntry) -> Ordering {
    b.delta
        .partial_cmp(&a.delta)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.element.cmp(&b.element))
}

/// Evaluate every perturbation of a family and assemble the report.
/// `threshold` overrides `log2(size(measure))` when given.
pub fn signature(
    target: &PerturbationTarget,
    family: Family,
    est: &BdmEstimator<'_>,
    measure: Option<SizeMeasure>,
    threshold: Option<f64>,
) -> Result<PerturbationReport> {
    let g = target.object();
    let perturbations: Vec<Perturbation> = match family {
        Family::Flips => (0..g.rows())
            .flat_map(|i| (0..g.cols()).map(move |j| Perturbation::Flip { i, j }))
            .collect(),
        Family::EdgeDeletions => {
            let TargetKind::Graph { directed } = target.kind() else {
                return Err(Error::Validation("edge deletions need a graph target".into()));
            };
            target
                .edges()
                .into_iter()
                .map(|(u, v)| Perturbation::DeleteEdge { u, v, directed })
                .collect()
        }
    };
    if perturbations.is_empty() {
        return Err(Error::Validation("perturbation family is empty".into()));
    }
    let size = size_term(target.size(measure.unwrap_or_else(|| target.default_measure())));
    let threshold = threshold.unwrap_or(size);
    let base = Decomposed::new(g, *est)?;
    let mut entries = perturbations
        .par_iter()
        .map(|p| {
            let delta = base.delta(&p.changes(g)?)?;
            let (class, sign) = classify(delta, threshold);
            Ok(ReportEntry {
                element: p.element(),
                delta,
                class,
                sign,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(order_entries);
    Ok(PerturbationReport {
        signature: entries.iter().map(|e| e.delta).collect(),
        entries,
        size_term: size,
        threshold,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EcaInit {
    SingleCenter,
    Row(Vec<u8>),
}

/// Elementary cellular automaton on a ring: `(steps + 1) x width` grid,
/// row 0 the initial condition.
pub fn eca_evolve(rule: u32, width: usize, steps: usize, init: &EcaInit) -> Result<Grid> {
    if rule > 255 {
        return Err(Error::range("ECA rule", rule, 0, 256));
    }
    if width < 3 {
        return Err(Error::Validation(format!("ECA width {width} (at least 3)")));
    }
    if steps < 1 {
        return Err(Error::Validation("ECA needs at least one step".into()));
    }
    let mut row = match init {
        EcaInit::SingleCenter => {
            let mut r = vec![0u8; width];
            r[width / 2] = 1;
            r
        }
        EcaInit::Row(r) => {
            if r.len() != width || r.iter().any(|&c| c > 1) {
                return Err(Error::Validation(format!("initial row must be {width} binary cells")));
            }
            r.clone()
        }
    };
    let mut cells = Vec::with_capacity((steps + 1) * width);
    cells.extend_from_slice(&row);
    let mut next = vec![0u8; width];
    for _ in 0..steps {
        for (j, cell) in next.iter_mut().enumerate() {
            let l = row[(j + width - 1) % width];
            let c = row[j];
            let r = row[(j + 1) % width];
            let neighbourhood = (l << 2) | (c << 1) | r;
            *cell = ((rule >> neighbourhood) & 1) as u8;
        }
        std::mem::swap(&mut row, &mut next);
        cells.extend_from_slice(&row);
    }
    Grid::from_cells(steps + 1, width, cells)
}

/// Mean `|delta|` over all single-cell flips of each row.
pub fn temporal_profile(grid: &Grid, est: &BdmEstimator<'_>) -> Result<Vec<f64>> {
    let base = Decomposed::new(grid, *est)?;
    (0..grid.rows())
        .into_par_iter()
        .map(|i| {
            let mut sum = 0.0;
            for j in 0..grid.cols() {
                let v = 1 - grid.at(i, j);
                sum += base.delta(&[(i, j, v)])?.abs();
            }
            Ok(sum / grid.cols() as f64)
        })
        .collect()
}

/// Average ranks (1-based), ties sharing their mean rank.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap_or(Ordering::Equal));
    let mut r = vec![0.0; xs.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut e = k;
        while e + 1 < idx.len() && xs[idx[e + 1]] == xs[idx[k]] {
            e += 1;
        }
        let mean = (k + e) as f64 / 2.0 + 1.0;
        for &i in &idx[k..=e] {
            r[i] = mean;
        }
        k = e + 1;
    }
    r
}

/// Spearman rank correlation; NaN when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    cov / (vx * vy).sqrt()
}
