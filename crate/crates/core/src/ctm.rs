//! Output-frequency tables and the Coding Theorem Method.
//!
//! A table counts, for every output object, the machines of one (space,
//! budget) that halt with that output. Algorithmic probability is estimated
//! as `count / halting_total` and complexity as `-log2` of that, with the
//! additive constant dropped, so values are comparable only within a table.
//!
//! Binary tables are complement-completed: every machine is counted once on
//! a blank tape of 0s and once on a tape of 1s. Running on the 1-tape is the
//! same as running the symbol-complemented rule on the 0-tape and
//! complementing its output, so each halting run contributes its output and
//! the complement of it, and `total_machines` counts two runs per rule. This
//! is what makes `count(s) == count(complement(s))` hold exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::enumeration::{class_of_representative, IndexRange};
use crate::error::{Error, Result};
use crate::machine::{decode_rule, Budget, Dimension, MachineSpace};
use crate::output::OutputObject;
use crate::runner::{par_fold_space, RunRecord, Simulator};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtmTable {
    space: MachineSpace,
    budget: Budget,
    counts: HashMap<OutputObject, u64>,
    halting_total: u64,
    total_machines: u64,
}

impl CtmTable {
    pub fn empty(space: MachineSpace, budget: Budget) -> Self {
        CtmTable {
            space,
            budget,
            counts: HashMap::new(),
            halting_total: 0,
            total_machines: 0,
        }
    }

    pub fn space(&self) -> &MachineSpace {
        &self.space
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    /// Number of counted runs (two per rule for binary spaces).
    pub fn total_machines(&self) -> u64 {
        self.total_machines
    }

    pub fn halting_total(&self) -> u64 {
        self.halting_total
    }

    /// True when outputs are counted together with their complements.
    pub fn is_complement_completed(&self) -> bool {
        self.space.symbols() == 2
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, s: &OutputObject) -> u64 {
        self.counts.get(s).copied().unwrap_or(0)
    }

    pub fn contains(&self, s: &OutputObject) -> bool {
        self.counts.contains_key(s)
    }

    pub fn counts(&self) -> &HashMap<OutputObject, u64> {
        &self.counts
    }

    /// Entries by descending count, then ascending key.
    pub fn sorted_entries(&self) -> Vec<(&OutputObject, u64)> {
        let mut v: Vec<(&OutputObject, u64)> = self.counts.iter().map(|(k, &c)| (k, c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    fn check_record(&self, r: &RunRecord) -> Result<()> {
        if r.space != self.space || r.budget != self.budget {
            return Err(Error::Consistency(format!(
                "record of rule {} from {} budget {} does not belong to a table of {} budget {}",
                r.rule_index, r.space, r.budget, self.space, self.budget
            )));
        }
        Ok(())
    }

    pub fn add_record(&mut self, r: &RunRecord) -> Result<()> {
        self.check_record(r)?;
        let runs = if self.is_complement_completed() { 2 } else { 1 };
        self.total_machines += runs;
        if let (true, Some(out)) = (r.halted, &r.output) {
            self.halting_total += runs;
            if self.is_complement_completed() {
                *self.counts.entry(out.complement()).or_default() += 1;
            }
            *self.counts.entry(out.clone()).or_default() += 1;
        }
        Ok(())
    }

    /// Pointwise sum. Tables must share space and budget.
    pub fn merge(mut self, other: CtmTable) -> Result<CtmTable> {
        if self.space != other.space || self.budget != other.budget {
            return Err(Error::Consistency(format!(
                "cannot merge tables of {} budget {} and {} budget {}",
                self.space, self.budget, other.space, other.budget
            )));
        }
        self.total_machines += other.total_machines;
        self.halting_total += other.halting_total;
        for (k, c) in other.counts {
            *self.counts.entry(k).or_default() += c;
        }
        Ok(self)
    }

    /// Algorithmic probability estimate `count(s) / halting_total`.
    pub fn ap_estimate(&self, s: &OutputObject) -> Result<f64> {
        let c = self.support_count(s)?;
        Ok(c as f64 / self.halting_total as f64)
    }

    /// `-log2(ap_estimate(s))` in bits.
    pub fn ctm_value(&self, s: &OutputObject) -> Result<f64> {
        let c = self.support_count(s)?;
        Ok((self.halting_total as f64).log2() - (c as f64).log2())
    }

    fn support_count(&self, s: &OutputObject) -> Result<u64> {
        self.counts
            .get(s)
            .copied()
            .ok_or_else(|| Error::NotInSupport { object: s.to_string() })
    }

    pub fn header(&self) -> String {
        format!(
            "#ctm v1 dim={} states={} symbols={} budget={} total={} halting={}",
            self.space.dimension().rank(),
            self.space.states(),
            self.space.symbols(),
            self.budget,
            self.total_machines,
            self.halting_total
        )
    }

    /// The table file: header line, then `<output>,<count>` lines by
    /// descending count and ascending output, newline-terminated.
    pub fn to_file_string(&self) -> String {
        self.to_file_string_with(None)
    }

    /// As [`CtmTable::to_file_string`] with an optional `# ...` provenance
    /// line after the header.
    pub fn to_file_string_with(&self, provenance: Option<&str>) -> String {
        let mut s = self.header();
        s.push('\n');
        if let Some(p) = provenance {
            let _ = writeln!(s, "# {p}");
        }
        for (k, c) in self.sorted_entries() {
            let _ = writeln!(s, "{k},{c}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<CtmTable> {
        if !text.ends_with('\n') {
            let line = text.lines().count().max(1);
            return Err(Error::parse(line, "table file must end with a newline"));
        }
        let mut lines = text.split_terminator('\n').enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let meta = parse_header(header)?;
        let mut table = CtmTable::empty(meta.space, meta.budget);
        table.total_machines = meta.total;
        table.halting_total = meta.halting;
        let mut sum = 0u64;
        for (n, line) in lines {
            let line_no = n + 1;
            if line.starts_with('#') {
                continue;
            }
            let (key, count) = line
                .rsplit_once(',')
                .ok_or_else(|| Error::parse(line_no, "expected <output>,<count>"))?;
            let obj: OutputObject = key.parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
            if obj.dimension() != meta.space.dimension() {
                return Err(Error::parse(
                    line_no,
                    format!("output {key} does not match dim={}", meta.space.dimension().rank()),
                ));
            }
            if u32::from(obj.max_symbol()) >= meta.space.symbols() {
                return Err(Error::parse(
                    line_no,
                    format!("output {key} uses a symbol outside 0..{}", meta.space.symbols()),
                ));
            }
            let count: u64 = count
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad count {count:?}")))?;
            if count == 0 {
                return Err(Error::parse(line_no, "counts must be positive"));
            }
            if table.counts.insert(obj, count).is_some() {
                return Err(Error::parse(line_no, format!("duplicate output {key}")));
            }
            sum = sum
                .checked_add(count)
                .ok_or_else(|| Error::parse(line_no, "count overflow"))?;
        }
        if sum != meta.halting {
            return Err(Error::parse(
                1,
                format!("counts sum to {sum} but header says halting={}", meta.halting),
            ));
        }
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.save_with(path, None)
    }

    pub fn save_with(&self, path: &Path, provenance: Option<&str>) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_file_string_with(provenance).as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<CtmTable> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CtmTable::parse(&text).map_err(|e| e.with_path(path))
    }
}

struct Header {
    space: MachineSpace,
    budget: Budget,
    total: u64,
    halting: u64,
}

fn parse_header(line: &str) -> Result<Header> {
    let bad = |m: String| Error::parse(1, m);
    let mut parts = line.split(' ');
    if parts.next() != Some("#ctm") || parts.next() != Some("v1") {
        return Err(bad("header must start with '#ctm v1'".into()));
    }
    let keys = ["dim", "states", "symbols", "budget", "total", "halting"];
    let mut values = [0u64; 6];
    for (key, slot) in keys.iter().zip(values.iter_mut()) {
        let field = parts.next().ok_or_else(|| bad(format!("missing {key}=")))?;
        let v = field
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| bad(format!("expected {key}=<value>, found {field:?}")))?;
        *slot = v.parse().map_err(|_| bad(format!("bad value for {key}: {v:?}")))?;
    }
    if let Some(extra) = parts.next() {
        return Err(bad(format!("unexpected header field {extra:?}")));
    }
    let [dim, states, symbols, budget, total, halting] = values;
    let to_u32 = |v: u64, k: &str| u32::try_from(v).map_err(|_| bad(format!("{k} too large")));
    let space = MachineSpace::new(
        to_u32(states, "states")?,
        to_u32(symbols, "symbols")?,
        Dimension::from_rank(to_u32(dim, "dim")?).map_err(|e| bad(e.to_string()))?,
    )
    .map_err(|e| bad(e.to_string()))?;
    let budget = Budget::new(budget).map_err(|e| bad(e.to_string()))?;
    if halting > total {
        return Err(bad(format!("halting={halting} exceeds total={total}")));
    }
    Ok(Header {
        space,
        budget,
        total,
        halting,
    })
}

/// Table of a record stream. Every record must come from `space` and `budget`.
pub fn build_table<'a>(
    records: impl IntoIterator<Item = &'a RunRecord>,
    space: MachineSpace,
    budget: Budget,
) -> Result<CtmTable> {
    let mut t = CtmTable::empty(space, budget);
    for r in records {
        t.add_record(r)?;
    }
    Ok(t)
}

/// Run `range` in parallel and count its outputs without keeping records.
pub fn build_table_for_range(space: &MachineSpace, range: IndexRange, budget: Budget) -> Result<CtmTable> {
    par_fold_space(
        space,
        range,
        budget,
        || CtmTable::empty(*space, budget),
        |t, r| t.add_record(&r),
        |a, b| a.merge(b),
    )
}

pub fn merge_tables(a: CtmTable, b: CtmTable) -> Result<CtmTable> {
    a.merge(b)
}

pub fn ap_estimate(s: &OutputObject, table: &CtmTable) -> Result<f64> {
    table.ap_estimate(s)
}

pub fn ctm_value(s: &OutputObject, table: &CtmTable) -> Result<f64> {
    table.ctm_value(s)
}

pub fn save_table(table: &CtmTable, path: &Path) -> Result<()> {
    table.save(path)
}

pub fn load_table(path: &Path) -> Result<CtmTable> {
    CtmTable::load(path)
}

/// Counts scaled by four, so that orbit contributions with fractional
/// weights stay integral until the end.
struct QuarterCounts {
    counts: HashMap<OutputObject, u64>,
    halting: u64,
    total: u64,
}

impl QuarterCounts {
    fn new() -> Self {
        QuarterCounts {
            counts: HashMap::new(),
            halting: 0,
            total: 0,
        }
    }

    fn merge(mut self, other: QuarterCounts) -> QuarterCounts {
        self.halting += other.halting;
        self.total += other.total;
        for (k, c) in other.counts {
            *self.counts.entry(k).or_default() += c;
        }
        self
    }
}

/// Complete table of a binary space computed from one representative per
/// complement/mirror orbit.
///
/// For an orbit O of rule R, the completed contributions of all members equal
/// `|O| / 4` times the images of `R(0-tape)` and `C(R)(0-tape)` under
/// {identity, complement, mirror, complement-mirror}. Only two machines run
/// per orbit instead of `|O|`.
pub fn build_table_reduced(space: &MachineSpace, budget: Budget) -> Result<CtmTable> {
    if space.symbols() != 2 {
        return Err(Error::Unsupported(format!(
            "symmetry reduction needs a binary alphabet, space {space} has {} symbols",
            space.symbols()
        )));
    }
    let range = IndexRange::full(space)?;
    let chunks: Vec<IndexRange> = range.chunks(4096).collect();
    let acc = chunks
        .into_par_iter()
        .map_init(Simulator::new, |sim, chunk| {
            let mut acc = QuarterCounts::new();
            for i in chunk {
                let Some(class) = class_of_representative(i, space)? else {
                    continue;
                };
                let w = u64::from(class.multiplicity);
                acc.total += 4 * 2 * w;
                let rule = decode_rule(i, space)?;
                for r in [rule.clone(), rule.complement()?] {
                    if let (true, _, Some(out)) = sim.run(&r, budget, 0) {
                        let c = out.complement();
                        let images = [out.mirror(), c.mirror(), c, out];
                        for img in images {
                            *acc.counts.entry(img).or_default() += w;
                        }
                        acc.halting += 4 * w;
                    }
                }
            }
            Ok(acc)
        })
        .try_reduce(QuarterCounts::new, |a, b| Ok(a.merge(b)))?;

    let quarter = |v: u64, what: &str| -> Result<u64> {
        if v % 4 != 0 {
            return Err(Error::Consistency(format!("orbit expansion left a fractional {what}")));
        }
        Ok(v / 4)
    };
    let mut table = CtmTable::empty(*space, budget);
    table.total_machines = quarter(acc.total, "total")?;
    table.halting_total = quarter(acc.halting, "halting total")?;
    for (k, c) in acc.counts {
        let c = quarter(c, "count")?;
        table.counts.insert(k, c);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::run_space;

    fn s22() -> MachineSpace {
        MachineSpace::one_d(2, 2).unwrap()
    }

    fn b(n: u64) -> Budget {
        Budget::new(n).unwrap()
    }

    fn obj(s: &str) -> OutputObject {
        s.parse().unwrap()
    }

    fn full_2_2() -> CtmTable {
        build_table_for_range(&s22(), IndexRange::full(&s22()).unwrap(), b(500)).unwrap()
    }

    #[test]
    fn empty_stream() {
        let t = build_table(std::iter::empty(), s22(), b(10)).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.halting_total(), 0);
    }

    #[test]
    fn single_symbols_lead_the_2_2_table() {
        let t = full_2_2();
        assert_eq!(t.count(&obj("0")), t.count(&obj("1")));
        let top: Vec<String> = t.sorted_entries().iter().take(2).map(|(k, _)| k.to_string()).collect();
        assert_eq!(top, ["0", "1"]);
        assert_eq!(t.counts().values().sum::<u64>(), t.halting_total());
        assert_eq!(t.total_machines(), 20_000);
    }

    #[test]
    fn ap_and_ctm() {
        let t = full_2_2();
        let total: f64 = t.counts().keys().map(|k| t.ap_estimate(k).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(t.ap_estimate(&obj("0")).unwrap(), t.ap_estimate(&obj("1")).unwrap());
        let min = t
            .counts()
            .keys()
            .map(|k| t.ctm_value(k).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(t.ctm_value(&obj("0")).unwrap(), min);
        for (k, _) in t.counts().iter().filter(|(k, _)| k.len() == 4) {
            assert!(t.ctm_value(&obj("0")).unwrap() < t.ctm_value(k).unwrap(), "{k}");
        }
        assert!(matches!(t.ctm_value(&obj("0101010101")), Err(Error::NotInSupport { .. })));
        assert!(matches!(t.ap_estimate(&obj("0101010101")), Err(Error::NotInSupport { .. })));
    }

    #[test]
    fn ctm_is_strictly_decreasing_in_count() {
        let t = full_2_2();
        let e = t.sorted_entries();
        for w in e.windows(2) {
            let (a, b) = (t.ctm_value(w[0].0).unwrap(), t.ctm_value(w[1].0).unwrap());
            if w[0].1 > w[1].1 {
                assert!(a < b);
            } else {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn merge_laws() {
        let s = s22();
        let full = IndexRange::full(&s).unwrap();
        let (l, r) = full.split_at(4_321).unwrap();
        let a = build_table_for_range(&s, l, b(500)).unwrap();
        let c = build_table_for_range(&s, r, b(500)).unwrap();
        let whole = full_2_2();
        assert_eq!(a.clone().merge(c.clone()).unwrap(), whole);
        assert_eq!(c.clone().merge(a.clone()).unwrap(), whole);
        assert_eq!(whole.clone().merge(CtmTable::empty(s, b(500))).unwrap(), whole);
        let other = CtmTable::empty(s, b(499));
        assert!(matches!(a.merge(other), Err(Error::Consistency(_))));
    }

    #[test]
    fn records_from_another_space_are_rejected() {
        let s = MachineSpace::two_d(2, 2).unwrap();
        let run = run_space(&s, IndexRange::new(0, 10, &s).unwrap(), b(500)).unwrap();
        let err = build_table(&run.records, s22(), b(500)).unwrap_err();
        assert!(matches!(err, Error::Consistency(_)));
    }

    #[test]
    fn streamed_records_and_parallel_fold_agree() {
        let s = s22();
        let run = run_space(&s, IndexRange::full(&s).unwrap(), b(500)).unwrap();
        let t = build_table(&run.records, s, b(500)).unwrap();
        assert_eq!(t, full_2_2());
        assert_eq!(t.halting_total(), 2 * run.summary.halting_count);
        assert_eq!(t.total_machines(), 2 * run.summary.total);
    }

    #[test]
    fn reduced_build_equals_full_build() {
        assert_eq!(build_table_reduced(&s22(), b(500)).unwrap(), full_2_2());
        let s = MachineSpace::one_d(1, 3).unwrap();
        assert!(matches!(build_table_reduced(&s, b(10)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn reduced_build_equals_full_build_for_turmites() {
        let s = MachineSpace::two_d(2, 2).unwrap();
        let full = build_table_for_range(&s, IndexRange::full(&s).unwrap(), b(60)).unwrap();
        assert_eq!(build_table_reduced(&s, b(60)).unwrap(), full);
    }

    #[test]
    fn file_round_trip() {
        let t = full_2_2();
        let text = t.to_file_string();
        assert!(text.starts_with("#ctm v1 dim=1 states=2 symbols=2 budget=500 total=20000 halting="));
        assert_eq!(CtmTable::parse(&text).unwrap(), t);
        let with = t.to_file_string_with(Some("config=0123"));
        assert_eq!(CtmTable::parse(&with).unwrap(), t);
    }

    #[test]
    fn hand_written_table() {
        let text = "#ctm v1 dim=2 states=2 symbols=2 budget=1000 total=10 halting=6\n1x1:0,3\n2x2:0110,2\n1x2:01,1\n";
        let t = CtmTable::parse(text).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.count(&obj("2x2:0110")), 2);
    }

    #[test]
    fn malformed_files() {
        let cases = [
            ("#ctm v1 dim=1 states=2 symbols=2 budget=5 total=4 halting=1\n0,1", 2),
            ("#ctm v2 dim=1 states=2 symbols=2 budget=5 total=4 halting=1\n0,1\n", 1),
            ("#ctm v1 dim=1 states=2 symbols=2 budget=5 total=4 halting=2\n0,1\n", 1),
            ("#ctm v1 dim=1 states=2 symbols=2 budget=5 total=4 halting=2\n0,1\n2,1\n", 3),
            ("#ctm v1 dim=1 states=2 symbols=2 budget=5 total=4 halting=2\n0,1\n0,1\n", 3),
            ("#ctm v1 dim=1 states=2 symbols=2 budget=5 total=4 halting=1\n0:1,1\n", 2),
            ("#ctm v1 dim=1 states=2 symbols=2 budget=5 total=4 halting=1\n0,x\n", 2),
            ("#ctm v1 dim=2 states=2 symbols=2 budget=5 total=4 halting=1\n01,1\n", 2),
            ("#ctm v1 dim=1 states=2 symbols=2 budget=0 total=4 halting=1\n0,1\n", 1),
        ];
        for (text, line) in cases {
            match CtmTable::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }
}
