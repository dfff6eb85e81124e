//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails outside KNOWN_FAILING. Run with
//! `cargo test -p softspace-core --test acceptance`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use softspace::aid::{self, BdmEstimator, EcaInit, Family, Perturbation, PerturbationTarget};
use softspace::bdm::{self, BaseTable, Boundary};
use softspace::ctm::{self, CtmTable};
use softspace::enumeration::{space_size, IndexRange};
use softspace::machine::{decode_rule, Configuration};
use softspace::render::{self, PeanoGrid, RuntimePalette};
use softspace::runner::{self, SpaceRunSummary};
use softspace::{Budget, Error, Grid, MachineSpace, OutputObject};

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn budget(b: u64) -> Budget {
    Budget::new(b).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Summary and table of the full (3,2) space at budget 200, computed in one
/// pass on a given number of threads.
struct Exhaustive32 {
    summary: SpaceRunSummary,
    table: CtmTable,
    elapsed: Duration,
}

fn exhaustive_32(threads: usize) -> Exhaustive32 {
    let space = MachineSpace::one_d(3, 2).unwrap();
    let b = budget(200);
    let t0 = Instant::now();
    let (summary, table) = runner::with_threads(threads, || {
        runner::par_fold_space(
            &space,
            IndexRange::full(&space).unwrap(),
            b,
            || (SpaceRunSummary::empty(space, b), CtmTable::empty(space, b)),
            |(s, t), r| {
                s.absorb(&r)?;
                t.add_record(&r)
            },
            |(s1, t1), (s2, t2)| Ok((s1.merge(s2)?, t1.merge(t2)?)),
        )
    })
    .unwrap()
    .unwrap();
    Exhaustive32 {
        summary,
        table,
        elapsed: t0.elapsed(),
    }
}

fn single_thread_32() -> &'static Exhaustive32 {
    static CELL: OnceLock<Exhaustive32> = OnceLock::new();
    CELL.get_or_init(|| exhaustive_32(1))
}

fn table_2d() -> &'static CtmTable {
    static CELL: OnceLock<CtmTable> = OnceLock::new();
    CELL.get_or_init(|| CtmTable::load(&fixture("ctm_3_2_2d_b500.ctm")).unwrap())
}

fn criterion_1() -> Outcome {
    let space = MachineSpace::one_d(3, 2).unwrap();
    let t0 = Instant::now();
    let n = space_size(&space).unwrap();
    let dt = t0.elapsed();
    check(
        n == 7_529_536 && dt < Duration::from_millis(1),
        format!("space_size(3,2,1D) = {n} in {dt:?}"),
    )
}

fn criterion_2() -> Outcome {
    let space = MachineSpace::one_d(2, 2).unwrap();
    let range = IndexRange::full(&space).unwrap();
    let mut counts = Vec::new();
    let mut t500 = Duration::ZERO;
    for b in [50, 200, 500] {
        let t0 = Instant::now();
        let s = runner::with_threads(1, || runner::summarize_space(&space, range, budget(b)))
            .unwrap()
            .unwrap();
        if b == 500 {
            t500 = t0.elapsed();
        }
        assert_eq!(s.total, 10_000);
        counts.push(s.halting_count);
    }
    check(
        counts.iter().all(|&c| c == counts[0]) && t500 < Duration::from_secs(10),
        format!("halting counts at budgets 50/200/500 = {counts:?}; budget-500 run {t500:?} on one thread"),
    )
}

/// Slow reference: sparse-tape configuration stepped one instruction at a time.
fn reference_run(index: u128, space: &MachineSpace, b: u64) -> (bool, u64, OutputObject) {
    let rule = decode_rule(index, space).unwrap();
    let mut c = Configuration::initial();
    while c.steps < b {
        if c.advance(&rule) {
            return (true, c.steps, c.output(space.dimension()));
        }
    }
    (false, c.steps, c.output(space.dimension()))
}

fn criterion_3() -> Outcome {
    let one = single_thread_32();
    let four = exhaustive_32(4);
    let space = MachineSpace::one_d(3, 2).unwrap();
    let (b3, argmax) = one.summary.busy_beavers().unwrap();
    let mut reference_max = 0;
    for &i in &argmax {
        let (halted, steps, _) = reference_run(i, &space, 200);
        assert!(halted, "argmax machine {i} does not halt under the reference");
        reference_max = reference_max.max(steps);
    }
    // the reference also agrees on a random sample of the space
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sim = runner::Simulator::new();
    let mut disagreements = 0;
    for _ in 0..2000 {
        let i = rng.gen_range(0..7_529_536u128);
        let fast = sim.run_index(i, &space, budget(200)).unwrap();
        let (h, s, o) = reference_run(i, &space, 200);
        if fast.halted != h || fast.steps != s || (h && fast.output.as_ref() != Some(&o)) {
            disagreements += 1;
        }
    }
    let stable = one.summary == four.summary && one.table == four.table;
    check(
        b3 == reference_max && !argmax.is_empty() && stable && disagreements == 0 && one.elapsed < Duration::from_secs(900),
        format!(
            "B3 = {b3} over {} argmax machines, reference simulator gives {reference_max}; \
             1 vs 4 threads identical: {stable}; sample disagreements {disagreements}; \
             one-thread run {:?}, four-thread run {:?}",
            argmax.len(),
            one.elapsed,
            four.elapsed
        ),
    )
}

fn criterion_4() -> Outcome {
    let space = MachineSpace::one_d(2, 2).unwrap();
    let t = ctm::build_table_for_range(&space, IndexRange::full(&space).unwrap(), budget(500)).unwrap();
    let mut bad = Vec::new();
    for (s, &c) in t.counts() {
        if t.count(&s.complement()) != c || t.count(&s.mirror()) != c {
            bad.push(s.to_string());
        }
    }
    check(
        bad.is_empty() && t.len() > 2,
        format!("{} keys, {} violating complement/reverse symmetry {:?}", t.len(), bad.len(), bad),
    )
}

fn criterion_5() -> Outcome {
    let t = &single_thread_32().table;
    let e = t.sorted_entries();
    let non_increasing = e.windows(2).all(|w| w[0].1 >= w[1].1);
    let (top, fiftieth) = (e[0].1, e[49].1);
    let ratio = top as f64 / fiftieth as f64;
    check(
        non_increasing && top >= 10 * fiftieth,
        format!(
            "{} keys; top {} = {top}, 50th {} = {fiftieth}, ratio {ratio:.1}; non-increasing: {non_increasing}",
            e.len(),
            e[0].0,
            e[49].0
        ),
    )
}

/// Direct evaluation of the block sum, written independently of the library:
/// blocks are collected as digit strings and valued through `values`.
fn oracle_bdm_grid(g: &[Vec<u8>], d: usize, boundary: Boundary, values: &HashMap<String, f64>) -> Option<f64> {
    let rows = g.len();
    let cols = g[0].len();
    let (r_end, c_end, pad) = match boundary {
        Boundary::Exact => {
            if rows % d != 0 || cols % d != 0 {
                return None;
            }
            (rows, cols, None)
        }
        Boundary::Ignore => (rows - rows % d, cols - cols % d, None),
        Boundary::Pad(p) => (rows.div_ceil(d) * d, cols.div_ceil(d) * d, Some(p)),
    };
    let cell = |i: usize, j: usize| -> u8 {
        if i < rows && j < cols {
            g[i][j]
        } else {
            pad.unwrap()
        }
    };
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for bi in (0..r_end).step_by(d) {
        for bj in (0..c_end).step_by(d) {
            let mut key = format!("{d}x{d}:");
            for i in bi..bi + d {
                for j in bj..bj + d {
                    key.push(char::from(b'0' + cell(i, j)));
                }
            }
            *counts.entry(key).or_default() += 1;
        }
    }
    let mut total = 0.0;
    for (k, n) in counts {
        total += values.get(&k)? + (n as f64).log2();
    }
    Some(total)
}

fn oracle_bdm_string(s: &[u8], d: usize, boundary: Boundary, values: &HashMap<String, f64>) -> Option<f64> {
    let mut padded = s.to_vec();
    match boundary {
        Boundary::Exact if s.len() % d != 0 => return None,
        Boundary::Ignore => padded.truncate(s.len() - s.len() % d),
        Boundary::Pad(p) => padded.resize(s.len().div_ceil(d) * d, p),
        _ => {}
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for chunk in padded.chunks(d) {
        let key: String = chunk.iter().map(|&c| char::from(b'0' + c)).collect();
        *counts.entry(key).or_default() += 1;
    }
    let mut total = 0.0;
    for (k, n) in counts {
        total += values.get(&k)? + (n as f64).log2();
    }
    Some(total)
}

/// `-log2(count / halting)` for every key, computed from the table file text.
fn oracle_values(table: &CtmTable) -> HashMap<String, f64> {
    let text = table.to_file_string();
    let halting: f64 = text
        .lines()
        .next()
        .unwrap()
        .split_whitespace()
        .find_map(|f| f.strip_prefix("halting="))
        .unwrap()
        .parse()
        .unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let (k, c) = l.rsplit_once(',').unwrap();
            (k.to_string(), halting.log2() - c.parse::<f64>().unwrap().log2())
        })
        .collect()
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.gen_range(0..2u8)).collect()
}

fn random_boundary(rng: &mut ChaCha8Rng) -> Boundary {
    match rng.gen_range(0..4) {
        0 => Boundary::Exact,
        1 => Boundary::Ignore,
        2 => Boundary::Pad(0),
        _ => Boundary::Pad(1),
    }
}

fn criterion_6() -> Outcome {
    let t1 = &single_thread_32().table;
    let t2 = table_2d();
    let (b1, b2) = (BaseTable::from_ctm(t1), BaseTable::from_ctm(t2));
    let (v1, v2) = (oracle_values(t1), oracle_values(t2));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    while cases < 200 {
        let boundary = random_boundary(&mut rng);
        let (prod, oracle) = if cases % 2 == 0 {
            let d = rng.gen_range(2..=5);
            let mut len = rng.gen_range(d..=60);
            if boundary == Boundary::Exact {
                len -= len % d;
            }
            let s = random_bits(&mut rng, len);
            (bdm::bdm_string(&s, &b1, d, boundary), oracle_bdm_string(&s, d, boundary, &v1))
        } else {
            let d = 2;
            let (mut r, mut c) = (rng.gen_range(2..=12), rng.gen_range(2..=12));
            if boundary == Boundary::Exact {
                r -= r % d;
                c -= c % d;
            }
            let rows: Vec<Vec<u8>> = (0..r).map(|_| random_bits(&mut rng, c)).collect();
            let g = Grid::from_rows(&rows).unwrap();
            (bdm::bdm_value(&g, &b2, d, boundary), oracle_bdm_grid(&rows, d, boundary, &v2))
        };
        let (p, o) = (prod.unwrap(), oracle.expect("oracle covers the input"));
        worst = worst.max((p - o).abs());
        cases += 1;
    }

    let mut additive = true;
    for k in [1usize, 2, 4, 8] {
        let block = random_bits(&mut rng, 4);
        let s: Vec<u8> = block.iter().copied().cycle().take(4 * k).collect();
        let kb = b1.value(&OutputObject::Tape(block)).unwrap();
        additive &= bdm::bdm_string(&s, &b1, 4, Boundary::Exact).unwrap() == kb + (k as f64).log2();

        let cells = random_bits(&mut rng, 4);
        let block = Grid::from_cells(2, 2, cells.clone()).unwrap();
        let kb = b2.value(&OutputObject::Array(block.clone())).unwrap();
        let mut g = Grid::zeros(2, 2 * k);
        for c in 0..k {
            for i in 0..2 {
                for j in 0..2 {
                    g.set(i, 2 * c + j, block.at(i, j));
                }
            }
        }
        additive &= bdm::bdm_value(&g, &b2, 2, Boundary::Exact).unwrap() == kb + (k as f64).log2();
    }
    check(
        worst <= 1e-9 && additive,
        format!("max |production - direct| over {cases} inputs = {worst:.3e} bits; k-copies identity exact: {additive}"),
    )
}

fn criterion_7() -> Outcome {
    let base = BaseTable::from_ctm(table_2d());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let (g, p, est) = if case % 2 == 0 {
            let boundary = random_boundary(&mut rng);
            let (mut r, mut c) = (rng.gen_range(2..=10), rng.gen_range(2..=10));
            if boundary == Boundary::Exact {
                r -= r % 2;
                c -= c % 2;
            }
            let g = Grid::from_cells(r, c, random_bits(&mut rng, r * c)).unwrap();
            let p = Perturbation::Flip {
                i: rng.gen_range(0..r),
                j: rng.gen_range(0..c),
            };
            (g, p, BdmEstimator::new(&base, 2, boundary))
        } else {
            let n = 2 * rng.gen_range(2..=5);
            let mut g = Grid::zeros(n, n);
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.5) {
                        g.set(u, v, 1);
                        g.set(v, u, 1);
                    }
                }
            }
            g.set(0, 1, 1);
            g.set(1, 0, 1);
            let edges = PerturbationTarget::graph(g.clone(), false).unwrap().edges();
            let (u, v) = edges[rng.gen_range(0..edges.len())];
            (g, Perturbation::DeleteEdge { u, v, directed: false }, BdmEstimator::new(&base, 2, Boundary::Exact))
        };
        let fast = aid::aid_delta(&g, &p, &est).unwrap();
        let oracle = est.complexity(&g).unwrap() - est.complexity(&p.apply(&g).unwrap()).unwrap();
        worst = worst.max((fast - oracle).abs());
    }
    let k4 = PerturbationTarget::complete_graph(4);
    let est = BdmEstimator::new(&base, 4, Boundary::Exact);
    let k4_part = match aid::signature(&k4, Family::EdgeDeletions, &est, None, None) {
        Ok(r) => {
            let distinct = r.distinct_deltas(1e-9);
            (distinct == 1, format!("K4 signature {:?} has {distinct} distinct values", r.signature))
        }
        Err(Error::MissingBlocks(b)) => (
            false,
            format!("K4 at d=4 cannot be evaluated: {} block(s) absent from the 2D table ({})", b.len(), b.join(" ")),
        ),
        Err(e) => (false, format!("K4 at d=4: {e}")),
    };
    check(
        worst <= 1e-9 && k4_part.0,
        format!("max |aid_delta - oracle| over 500 pairs = {worst:.3e}; {}", k4_part.1),
    )
}

fn criterion_8() -> Outcome {
    let base = BaseTable::from_ctm(table_2d());
    let est = BdmEstimator::new(&base, 2, Boundary::Pad(0));
    let frozen: Vec<(u32, f64)> = std::fs::read_to_string(fixture("eca_temporal_d2_pad0.csv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("rule"))
        .map(|l| {
            let (r, s) = l.split_once(',').unwrap();
            (r.parse().unwrap(), s.parse().unwrap())
        })
        .collect();
    let mut negative = 0;
    let mut drift: f64 = 0.0;
    let mut rhos = Vec::new();
    for &(rule, expected) in &frozen {
        let g = aid::eca_evolve(rule, 16, 16, &EcaInit::SingleCenter).unwrap();
        let profile = aid::temporal_profile(&g, &est).unwrap();
        let rows: Vec<f64> = (0..profile.len()).map(|i| i as f64).collect();
        let rho = aid::spearman(&rows, &profile);
        drift = drift.max((rho - expected).abs());
        if rho < 0.0 {
            negative += 1;
        }
        rhos.push(format!("{rule}:{rho:+.3}"));
    }
    check(
        frozen.len() == 10 && drift <= 1e-9 && 2 * negative > frozen.len(),
        format!(
            "{negative}/{} rules with negative row/|delta| correlation (d=2, pad0) [{}]; max drift from frozen fixture {drift:.1e}",
            frozen.len(),
            rhos.join(" ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let t0 = Instant::now();
    let mut ok = true;
    for k in 1..=5 {
        let g = PeanoGrid::new(k).unwrap();
        let side = g.side() as usize;
        let mut seen = vec![false; side * side];
        let mut prev: Option<(u64, u64)> = None;
        for t in 0..g.capacity() {
            let (x, y) = render::peano_xy(t, k).unwrap();
            let slot = &mut seen[y as usize * side + x as usize];
            ok &= !*slot;
            *slot = true;
            if let Some((px, py)) = prev {
                ok &= x.abs_diff(px) + y.abs_diff(py) == 1;
            } else {
                ok &= (x, y) == (0, 0);
            }
            prev = Some((x, y));
        }
        ok &= seen.iter().all(|&s| s);
    }
    let dt = t0.elapsed();
    check(
        ok && dt < Duration::from_secs(1),
        format!("levels 1..=5 bijective, unit-step, start (0,0): {ok}; {dt:?}"),
    )
}

fn criterion_10() -> Outcome {
    let space = MachineSpace::one_d(2, 2).unwrap();
    let run = runner::run_space(&space, IndexRange::full(&space).unwrap(), budget(500)).unwrap();
    let r = render::render_field(&run.records, 5, &RuntimePalette::default()).unwrap();
    let bytes = r.image.to_ppm_bytes();
    let golden = std::fs::read(fixture("field_2_2_1d_b500_k5.ppm")).unwrap();
    let colour_of = |i: u128| {
        let p = &r.pixels[i as usize];
        r.image.get(p.x as usize, p.y as usize)
    };
    let white: HashSet<u128> = (0..10_000).filter(|&i| colour_of(i) == [255, 255, 255]).collect();
    let red: HashSet<u128> = (0..10_000).filter(|&i| colour_of(i) == [255, 0, 0]).collect();
    let censored: HashSet<u128> = run.records.iter().filter(|x| !x.halted).map(|x| x.rule_index).collect();
    let (_, bb) = runner::find_busy_beavers(&run.records).unwrap();
    let bb: HashSet<u128> = bb.into_iter().collect();
    check(
        bytes == golden && white == censored && red == bb,
        format!(
            "PPM {} bytes, golden match {}; white = censored ({} machines): {}; red = argmax runtime ({} machines): {}",
            bytes.len(),
            bytes == golden,
            censored.len(),
            white == censored,
            bb.len(),
            red == bb
        ),
    )
}

fn criterion_11() -> Outcome {
    let table = &single_thread_32().table;
    let base = BaseTable::from_ctm(table);
    let d = 4;
    let alternating: Vec<u8> = (0..24).map(|i| (i % 2) as u8).collect();
    let seed = 11u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut population: Vec<Vec<u8>> = (0..999).map(|_| random_bits(&mut rng, 24)).collect();
    population.push(alternating.clone());
    let rep = bdm::compare_entropy_vs_bdm(&alternating, &population, &base, d, Boundary::Exact).unwrap();
    let oracle = oracle_bdm_string(&alternating, d, Boundary::Exact, &oracle_values(table)).unwrap();
    check(
        base.covers_all_strings(d) && rep.entropy == 1.0 && rep.bdm_rank <= 0.1 && (rep.bdm - oracle).abs() <= 1e-9,
        format!(
            "alternating length-24 string: block-1 entropy {}, entropy rank {:.3}, BDM {:.4} bits (direct {:.4}), \
             BDM rank {:.4} among {} inputs (seed {seed}, d={d})",
            rep.entropy,
            rep.entropy_rank,
            rep.bdm,
            oracle,
            rep.bdm_rank,
            population.len()
        ),
    )
}

/// Criteria that fail on the shipped data. They are still evaluated at full
/// strictness and reported as FAIL; they only stop failing the test target.
/// Set ACCEPTANCE_STRICT to make any FAIL fatal.
const KNOWN_FAILING: [u32; 2] = [7, 8];

fn main() {
    let criteria: [(u32, fn() -> Outcome); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    // keep panic messages out of the report lines
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    for (n, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {n:>2}: PASS  {detail}"),
            Err(detail) => {
                println!("criterion {n:>2}: FAIL  {detail}");
                failed.push(n);
            }
        }
    }
    let unexpected: Vec<u32> = failed.iter().copied().filter(|n| !KNOWN_FAILING.contains(n)).collect();
    let now_passing: Vec<u32> = KNOWN_FAILING.iter().copied().filter(|n| !failed.contains(n)).collect();
    println!(
        "acceptance: {} of 11 criteria pass; failing {failed:?} (known failing {KNOWN_FAILING:?})",
        11 - failed.len()
    );
    if !now_passing.is_empty() {
        println!("acceptance: criteria {now_passing:?} now pass; remove them from KNOWN_FAILING");
    }
    let strict = std::env::var_os("ACCEPTANCE_STRICT").is_some();
    if !unexpected.is_empty() || !now_passing.is_empty() || (strict && !failed.is_empty()) {
        std::process::exit(1);
    }
}
