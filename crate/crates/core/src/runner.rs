//! Running machines to a step budget and aggregating the results over index
//! ranges.
//!
//! [`Simulator`] keeps a dense, growable tape that is reused between
//! machines; it is the hot path for exhaustive runs. The sparse
//! [`Configuration`](crate::machine::Configuration) stepper stays as a slower
//! reference implementation of the same semantics.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumeration::IndexRange;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::machine::{decode_rule, Budget, Dimension, Instruction, MachineRule, MachineSpace};
use crate::output::OutputObject;

/// Outcome of one machine. `steps == budget` and `output == None` when the
/// machine did not halt within its budget (censored, not proven to run forever).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRecord {
    pub rule_index: u128,
    pub space: MachineSpace,
    pub budget: Budget,
    pub halted: bool,
    pub steps: u64,
    pub output: Option<OutputObject>,
}

#[derive(Clone, Copy)]
struct Op {
    write: u8,
    halt: bool,
    next: u8,
    dx: i8,
    dy: i8,
}

fn compile(rule: &MachineRule) -> Vec<Op> {
    rule.table()
        .iter()
        .map(|ins| match *ins {
            Instruction::Halt { write } => Op {
                write,
                halt: true,
                next: 0,
                dx: 0,
                dy: 0,
            },
            Instruction::Step {
                write,
                movement,
                next_state,
            } => {
                let (dx, dy) = movement.delta();
                Op {
                    write,
                    halt: false,
                    next: next_state as u8,
                    dx: dx as i8,
                    dy: dy as i8,
                }
            }
        })
        .collect()
}

const INITIAL_SIDE_1D: usize = 256;
const INITIAL_SIDE_2D: usize = 32;

/// Reusable simulation scratch space.
#[derive(Default)]
pub struct Simulator {
    tape: Vec<u8>,
    width: usize,
    height: usize,
    fill: u8,
}

impl Simulator {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, dim: Dimension, fill: u8) {
        let (w, h) = match dim {
            Dimension::OneD => (INITIAL_SIDE_1D.max(self.width), 1),
            Dimension::TwoD => (
                INITIAL_SIDE_2D.max(self.width),
                INITIAL_SIDE_2D.max(self.height),
            ),
        };
        if self.width != w || self.height != h || self.tape.len() != w * h {
            self.width = w;
            self.height = h;
            self.tape = vec![fill; w * h];
        } else if self.fill != fill {
            self.tape.fill(fill);
        }
        self.fill = fill;
    }

    /// Reallocate at twice the size with the old contents centred.
    fn grow(&mut self, dim: Dimension, x: &mut usize, y: &mut usize, lo: &mut (usize, usize), hi: &mut (usize, usize)) {
        let (ow, oh) = (self.width, self.height);
        let nw = ow * 2;
        let nh = if dim == Dimension::TwoD { oh * 2 } else { 1 };
        let (ox, oy) = ((nw - ow) / 2, (nh - oh) / 2);
        let mut next = vec![self.fill; nw * nh];
        for r in lo.1..=hi.1 {
            let src = &self.tape[r * ow + lo.0..=r * ow + hi.0];
            let dst = (r + oy) * nw + lo.0 + ox;
            next[dst..dst + src.len()].copy_from_slice(src);
        }
        self.tape = next;
        self.width = nw;
        self.height = nh;
        *x += ox;
        *y += oy;
        lo.0 += ox;
        lo.1 += oy;
        hi.0 += ox;
        hi.1 += oy;
    }

    /// Run `rule` from state 0 on a tape filled with `fill`.
    pub fn run(&mut self, rule: &MachineRule, budget: Budget, fill: u8) -> (bool, u64, Option<OutputObject>) {
        let space = *rule.space();
        let dim = space.dimension();
        let m = space.symbols() as usize;
        let prog = compile(rule);
        self.reset(dim, fill);

        let mut x = self.width / 2;
        let mut y = self.height / 2;
        let mut lo = (x, y);
        let mut hi = (x, y);
        let mut state = 0usize;
        let mut steps = 0u64;
        let limit = budget.get();
        let halted = loop {
            let cell = y * self.width + x;
            let op = prog[state * m + self.tape[cell] as usize];
            steps += 1;
            self.tape[cell] = op.write;
            if op.halt {
                break true;
            }
            if steps == limit {
                break false;
            }
            x = (x as isize + op.dx as isize) as usize;
            y = (y as isize + op.dy as isize) as usize;
            state = op.next as usize;
            if x < lo.0 {
                lo.0 = x;
            } else if x > hi.0 {
                hi.0 = x;
            }
            if y < lo.1 {
                lo.1 = y;
            } else if y > hi.1 {
                hi.1 = y;
            }
            let at_edge = x == 0
                || x + 1 == self.width
                || (dim == Dimension::TwoD && (y == 0 || y + 1 == self.height));
            if at_edge {
                self.grow(dim, &mut x, &mut y, &mut lo, &mut hi);
            }
        };

        let output = halted.then(|| self.extract(dim, lo, hi));
        // restore the visited box to the fill symbol for the next run
        for r in lo.1..=hi.1 {
            self.tape[r * self.width + lo.0..=r * self.width + hi.0].fill(self.fill);
        }
        (halted, steps, output)
    }

    fn extract(&self, dim: Dimension, lo: (usize, usize), hi: (usize, usize)) -> OutputObject {
        match dim {
            Dimension::OneD => OutputObject::Tape(self.tape[lo.0..=hi.0].to_vec()),
            Dimension::TwoD => {
                let rows = hi.1 - lo.1 + 1;
                let cols = hi.0 - lo.0 + 1;
                let mut cells = Vec::with_capacity(rows * cols);
                for r in lo.1..=hi.1 {
                    cells.extend_from_slice(&self.tape[r * self.width + lo.0..=r * self.width + hi.0]);
                }
                OutputObject::Array(Grid::from_cells(rows, cols, cells).expect("box dimensions"))
            }
        }
    }

    pub fn run_index(&mut self, index: u128, space: &MachineSpace, budget: Budget) -> Result<RunRecord> {
        let rule = decode_rule(index, space)?;
        let (halted, steps, output) = self.run(&rule, budget, 0);
        Ok(RunRecord {
            rule_index: index,
            space: *space,
            budget,
            halted,
            steps,
            output,
        })
    }
}

/// Simulate `rule` from a blank tape for at most `budget` steps.
pub fn run_machine(rule: &MachineRule, budget: Budget) -> RunRecord {
    run_machine_filled(rule, budget, 0)
}

/// As [`run_machine`] on a tape pre-filled with `fill` instead of blanks.
pub fn run_machine_filled(rule: &MachineRule, budget: Budget, fill: u8) -> RunRecord {
    let (halted, steps, output) = Simulator::new().run(rule, budget, fill);
    RunRecord {
        rule_index: rule.encode().expect("validated rule"),
        space: *rule.space(),
        budget,
        halted,
        steps,
        output,
    }
}

/// Aggregates over a set of run records. Merging is associative and
/// commutative, so partial summaries from any schedule combine to the same
/// value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceRunSummary {
    pub space: MachineSpace,
    pub budget: Budget,
    pub total: u64,
    pub halting_count: u64,
    pub max_steps: u64,
    pub busy_beaver_indices: Vec<u128>,
    pub runtime_histogram: BTreeMap<u64, u64>,
}

impl SpaceRunSummary {
    pub fn empty(space: MachineSpace, budget: Budget) -> Self {
        SpaceRunSummary {
            space,
            budget,
            total: 0,
            halting_count: 0,
            max_steps: 0,
            busy_beaver_indices: Vec::new(),
            runtime_histogram: BTreeMap::new(),
        }
    }

    pub fn censored_count(&self) -> u64 {
        self.total - self.halting_count
    }

    pub fn absorb(&mut self, record: &RunRecord) -> Result<()> {
        if record.space != self.space || record.budget != self.budget {
            return Err(Error::Consistency(format!(
                "record from {} budget {} in a summary of {} budget {}",
                record.space, record.budget, self.space, self.budget
            )));
        }
        self.total += 1;
        if record.halted {
            self.halting_count += 1;
            *self.runtime_histogram.entry(record.steps).or_default() += 1;
            if record.steps > self.max_steps {
                self.max_steps = record.steps;
                self.busy_beaver_indices.clear();
            }
            if record.steps == self.max_steps {
                let at = self
                    .busy_beaver_indices
                    .binary_search(&record.rule_index)
                    .unwrap_or_else(|p| p);
                self.busy_beaver_indices.insert(at, record.rule_index);
            }
        }
        Ok(())
    }

    pub fn merge(mut self, other: SpaceRunSummary) -> Result<SpaceRunSummary> {
        if self.space != other.space || self.budget != other.budget {
            return Err(Error::Consistency(format!(
                "cannot merge summaries of {} budget {} and {} budget {}",
                self.space, self.budget, other.space, other.budget
            )));
        }
        self.total += other.total;
        self.halting_count += other.halting_count;
        for (steps, count) in other.runtime_histogram {
            *self.runtime_histogram.entry(steps).or_default() += count;
        }
        match other.max_steps.cmp(&self.max_steps) {
            std::cmp::Ordering::Greater => {
                self.max_steps = other.max_steps;
                self.busy_beaver_indices = other.busy_beaver_indices;
            }
            std::cmp::Ordering::Equal => {
                self.busy_beaver_indices.extend(other.busy_beaver_indices);
                self.busy_beaver_indices.sort_unstable();
                self.busy_beaver_indices.dedup();
            }
            std::cmp::Ordering::Less => {}
        }
        Ok(self)
    }

    pub fn busy_beavers(&self) -> Result<(u64, Vec<u128>)> {
        if self.halting_count == 0 {
            return Err(Error::NoHaltingMachines);
        }
        Ok((self.max_steps, self.busy_beaver_indices.clone()))
    }
}

/// Maximum runtime among halting records and every index that attains it.
pub fn find_busy_beavers<'a>(records: impl IntoIterator<Item = &'a RunRecord>) -> Result<(u64, Vec<u128>)> {
    let mut best: Option<(u64, Vec<u128>)> = None;
    for r in records.into_iter().filter(|r| r.halted) {
        match &mut best {
            Some((steps, idx)) if r.steps == *steps => idx.push(r.rule_index),
            Some((steps, _)) if r.steps < *steps => {}
            _ => best = Some((r.steps, vec![r.rule_index])),
        }
    }
    let (steps, mut idx) = best.ok_or(Error::NoHaltingMachines)?;
    idx.sort_unstable();
    Ok((steps, idx))
}

/// Indices per work unit in parallel runs.
const CHUNK: u128 = 4096;

/// Fold every record of `range` into an accumulator, in parallel over
/// chunks of the range. `merge` must be associative and commutative for the
/// result to be schedule-independent.
pub fn par_fold_space<A, I, F, M>(
    space: &MachineSpace,
    range: IndexRange,
    budget: Budget,
    identity: I,
    fold: F,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, RunRecord) -> Result<()> + Sync + Send,
    M: Fn(A, A) -> Result<A> + Sync + Send,
{
    if range.end() > space.space_size()? {
        return Err(Error::Validation(format!("index range {range} exceeds space {space}")));
    }
    let chunks: Vec<IndexRange> = range.chunks(CHUNK).collect();
    chunks
        .into_par_iter()
        .map_init(Simulator::new, |sim, chunk| {
            let mut acc = identity();
            for index in chunk {
                fold(&mut acc, sim.run_index(index, space, budget)?)?;
            }
            Ok(acc)
        })
        .try_reduce(&identity, |a, b| merge(a, b))
}

/// Run `f` on a dedicated pool of `threads` workers (0 = rayon default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Summary of a range without keeping the records.
pub fn summarize_space(space: &MachineSpace, range: IndexRange, budget: Budget) -> Result<SpaceRunSummary> {
    par_fold_space(
        space,
        range,
        budget,
        || SpaceRunSummary::empty(*space, budget),
        |acc, r| acc.absorb(&r),
        |a, b| a.merge(b),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceRun {
    pub records: Vec<RunRecord>,
    pub summary: SpaceRunSummary,
}

/// One record per index, in index order, plus their summary.
pub fn run_space(space: &MachineSpace, range: IndexRange, budget: Budget) -> Result<SpaceRun> {
    let chunks: Vec<IndexRange> = range.chunks(CHUNK).collect();
    if range.end() > space.space_size()? {
        return Err(Error::Validation(format!("index range {range} exceeds space {space}")));
    }
    let parts: Vec<Vec<RunRecord>> = chunks
        .into_par_iter()
        .map_init(Simulator::new, |sim, chunk| {
            chunk
                .into_iter()
                .map(|i| sim.run_index(i, space, budget))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let records: Vec<RunRecord> = parts.into_iter().flatten().collect();
    let mut summary = SpaceRunSummary::empty(*space, budget);
    for r in &records {
        summary.absorb(r)?;
    }
    Ok(SpaceRun { records, summary })
}

/// Sequential, pull-based stream of records.
pub fn run_range_iter(
    space: MachineSpace,
    range: IndexRange,
    budget: Budget,
) -> impl Iterator<Item = Result<RunRecord>> {
    let mut sim = Simulator::new();
    range.into_iter().map(move |i| sim.run_index(i, &space, budget))
}

/// CSV dump `index,halted,steps,output`, header included. An optional
/// provenance string is written first as a `#` comment line.
pub fn write_records_csv<'a, W: Write>(
    writer: W,
    records: impl IntoIterator<Item = &'a RunRecord>,
    provenance: Option<&str>,
) -> std::io::Result<()> {
    let mut writer = writer;
    if let Some(p) = provenance {
        writeln!(writer, "# {p}")?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(["index", "halted", "steps", "output"])?;
    for r in records {
        let output = r.output.as_ref().map(|o| o.to_record_string()).unwrap_or_default();
        w.write_record([
            r.rule_index.to_string(),
            r.halted.to_string(),
            r.steps.to_string(),
            output,
        ])?;
    }
    w.flush()
}

#[derive(Deserialize)]
struct CsvRecord {
    index: u128,
    halted: bool,
    steps: u64,
    output: String,
}

/// Parse a record dump produced for `space` and `budget`.
pub fn read_records_csv<R: Read>(reader: R, space: MachineSpace, budget: Budget) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let size = space.space_size()?;
    let mut out = Vec::new();
    for (n, row) in rdr.deserialize::<CsvRecord>().enumerate() {
        let line = n + 2;
        let row = row.map_err(|e| {
            let line = e.position().map_or(line, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        if row.index >= size {
            return Err(Error::parse(line, format!("rule index {} outside space {space}", row.index)));
        }
        let output = if row.halted {
            let o = OutputObject::parse_record_string(&row.output, space.dimension())
                .map_err(|e| Error::parse(line, e.to_string()))?;
            if o.is_empty() || u32::from(o.max_symbol()) >= space.symbols() {
                return Err(Error::parse(line, format!("output {:?} invalid for {space}", row.output)));
            }
            Some(o)
        } else {
            None
        };
        if row.steps == 0 || row.steps > budget.get() || (!row.halted && row.steps != budget.get()) {
            return Err(Error::parse(line, format!("step count {} inconsistent with budget {budget}", row.steps)));
        }
        out.push(RunRecord {
            rule_index: row.index,
            space,
            budget,
            halted: row.halted,
            steps: row.steps,
            output,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{Configuration, Move};
    use proptest::prelude::*;

    fn s22() -> MachineSpace {
        MachineSpace::one_d(2, 2).unwrap()
    }

    fn budget(n: u64) -> Budget {
        Budget::new(n).unwrap()
    }

    /// Slow reference: the sparse stepper.
    fn reference(rule: &MachineRule, budget: u64, fill: u8) -> (bool, u64, Option<OutputObject>) {
        let mut c = Configuration::filled(fill);
        for _ in 0..budget {
            if c.advance(rule) {
                return (true, c.steps, Some(c.output(rule.space().dimension())));
            }
        }
        (false, c.steps, None)
    }

    #[test]
    fn all_halt_rule() {
        let r = run_machine(&decode_rule(0, &s22()).unwrap(), budget(10));
        assert!(r.halted);
        assert_eq!(r.steps, 1);
        assert_eq!(r.output.unwrap().to_string(), "0");
    }

    #[test]
    fn right_mover_is_censored() {
        let mover = Instruction::Step {
            write: 1,
            movement: Move::Right,
            next_state: 0,
        };
        let rule = MachineRule::new(s22(), vec![mover, mover, mover, mover]).unwrap();
        let r = run_machine(&rule, budget(1000));
        assert!(!r.halted);
        assert_eq!(r.steps, 1000);
        assert_eq!(r.output, None);
    }

    #[test]
    fn halting_on_the_last_budgeted_step_counts() {
        // (2,2) champion halts on step 6
        let champion = run_space(&s22(), IndexRange::full(&s22()).unwrap(), budget(6)).unwrap();
        assert_eq!(champion.summary.max_steps, 6);
        let r5 = summarize_space(&s22(), IndexRange::full(&s22()).unwrap(), budget(5)).unwrap();
        assert_eq!(r5.max_steps, 5);
        assert!(r5.halting_count < champion.summary.halting_count);
    }

    #[test]
    fn tape_growth_in_every_direction() {
        // a 2D machine drawing a long diagonal staircase forces several grows
        let s = MachineSpace::two_d(2, 2).unwrap();
        let rule = MachineRule::new(
            s,
            vec![
                Instruction::Step { write: 1, movement: Move::Up, next_state: 1 },
                Instruction::Halt { write: 1 },
                Instruction::Step { write: 1, movement: Move::Left, next_state: 0 },
                Instruction::Halt { write: 1 },
            ],
        )
        .unwrap();
        let mut sim = Simulator::new();
        let fast = sim.run(&rule, budget(500), 0);
        assert_eq!(fast, reference(&rule, 500, 0));
        // scratch reuse leaves no residue
        let again = sim.run(&rule, budget(500), 0);
        assert_eq!(again, fast);
    }

    #[test]
    fn summary_partition_and_bb_2_2() {
        let s = s22();
        let run = run_space(&s, IndexRange::full(&s).unwrap(), budget(500)).unwrap();
        assert_eq!(run.records.len(), 10_000);
        assert_eq!(run.summary.halting_count + run.summary.censored_count(), 10_000);
        let (steps, idx) = find_busy_beavers(&run.records).unwrap();
        // Known 2-state 2-symbol busy beaver runtime.
        assert_eq!(steps, 6);
        assert_eq!(run.summary.busy_beavers().unwrap(), (steps, idx.clone()));
        for i in &idx {
            let rule = decode_rule(*i, &s).unwrap();
            // the mirror image runs on the same blank tape
            let mirror = run_machine(&rule.mirror(), budget(500));
            assert!(idx.contains(&mirror.rule_index));
            // the complement needs the complemented tape
            let comp = run_machine_filled(&rule.complement().unwrap(), budget(500), 1);
            assert_eq!((comp.halted, comp.steps), (true, 6));
        }
    }

    #[test]
    fn halves_merge_to_full() {
        let s = s22();
        let full = IndexRange::full(&s).unwrap();
        let (a, b) = full.split_at(3_333).unwrap();
        let sa = summarize_space(&s, a, budget(200)).unwrap();
        let sb = summarize_space(&s, b, budget(200)).unwrap();
        let whole = summarize_space(&s, full, budget(200)).unwrap();
        assert_eq!(sa.clone().merge(sb.clone()).unwrap(), whole);
        assert_eq!(sb.merge(sa).unwrap(), whole);
    }

    #[test]
    fn single_machine_range() {
        let s = s22();
        for i in [0u128, 9999, 4321] {
            let run = run_space(&s, IndexRange::new(i, i + 1, &s).unwrap(), budget(100)).unwrap();
            match find_busy_beavers(&run.records) {
                Ok((_, idx)) => {
                    assert!(run.records[0].halted);
                    assert_eq!(idx, vec![i]);
                }
                Err(Error::NoHaltingMachines) => assert!(!run.records[0].halted),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn mismatched_summaries_do_not_merge() {
        let a = SpaceRunSummary::empty(s22(), budget(10));
        let b = SpaceRunSummary::empty(s22(), budget(11));
        assert!(matches!(a.merge(b), Err(Error::Consistency(_))));
    }

    #[test]
    fn csv_round_trip() {
        let s = MachineSpace::two_d(2, 2).unwrap();
        let run = run_space(&s, IndexRange::new(5_000, 5_300, &s).unwrap(), budget(100)).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &run.records, Some("config=abc")).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# config=abc\nindex,halted,steps,output\n"));
        let back = read_records_csv(&buf[..], s, budget(100)).unwrap();
        assert_eq!(back, run.records);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let text = "index,halted,steps,output\n0,true,1,0\n1,true,1,7\n";
        let err = read_records_csv(text.as_bytes(), s22(), budget(10)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    proptest! {
        #[test]
        fn fast_matches_reference_1d(i in 0u128..7_529_536, fill in 0u8..2) {
            let rule = decode_rule(i, &MachineSpace::one_d(3, 2).unwrap()).unwrap();
            prop_assert_eq!(Simulator::new().run(&rule, budget(300), fill), reference(&rule, 300, fill));
        }

        #[test]
        fn fast_matches_reference_2d(i in 0u128..104_976, fill in 0u8..2) {
            let rule = decode_rule(i, &MachineSpace::two_d(2, 2).unwrap()).unwrap();
            prop_assert_eq!(Simulator::new().run(&rule, budget(400), fill), reference(&rule, 400, fill));
        }

        #[test]
        fn fast_matches_reference_ternary(i in any::<u64>()) {
            let s = MachineSpace::one_d(2, 3).unwrap();
            let rule = decode_rule(u128::from(i) % s.space_size().unwrap(), &s).unwrap();
            prop_assert_eq!(Simulator::new().run(&rule, budget(300), 0), reference(&rule, 300, 0));
        }

        #[test]
        fn deterministic(i in 0u128..10_000) {
            let rule = decode_rule(i, &s22()).unwrap();
            prop_assert_eq!(run_machine(&rule, budget(50)), run_machine(&rule, budget(50)));
        }

        /// Mirroring moves reverses the output; complementing the rule and
        /// the tape complements it.
        #[test]
        fn output_symmetries(i in 0u128..7_529_536) {
            let rule = decode_rule(i, &MachineSpace::one_d(3, 2).unwrap()).unwrap();
            let b = budget(200);
            let base = run_machine(&rule, b);
            let mirrored = run_machine(&rule.mirror(), b);
            let complemented = run_machine_filled(&rule.complement().unwrap(), b, 1);
            prop_assert_eq!(base.halted, mirrored.halted);
            prop_assert_eq!(base.steps, mirrored.steps);
            prop_assert_eq!(base.output.as_ref().map(|o| o.mirror()), mirrored.output);
            prop_assert_eq!(base.halted, complemented.halted);
            prop_assert_eq!(base.output.as_ref().map(|o| o.complement()), complemented.output);
        }
    }
}
