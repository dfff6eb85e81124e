//! Command-line front end.
//!
//! Settings come from an optional TOML file (`--config`) and from flags;
//! flags win. Results go to stdout as JSON or CSV, errors to stderr as JSON.
//! Exit codes: 0 ok, 2 usage, 3 not in support, 4 dimension/consistency, 5 I/O.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use softspace::aid::{self, BdmEstimator, EcaInit, Family, PerturbationTarget, SizeMeasure};
use softspace::bdm::{self, BaseTable, Boundary};
use softspace::ctm::{self, CtmTable};
use softspace::enumeration::{self, IndexRange};
use softspace::render::{self, RuntimePalette};
use softspace::runner::{self, RunRecord};
use softspace::{Budget, Dimension, Error, Grid, MachineSpace, OutputObject};

const TABLE_DIR_VAR: &str = "SOFTSPACE_TABLE_DIR";

#[derive(Parser)]
#[command(name = "softspace", version, about = "Explore small-machine software space")]
struct Cli {
    /// TOML file with default settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List rule indices of a space (or its symmetry classes).
    Enumerate(EnumerateArgs),
    /// Run every machine of an index range.
    RunSpace(RunSpaceArgs),
    /// Build, query and merge output-frequency tables.
    #[command(subcommand)]
    Ctm(CtmCommand),
    /// Block-decomposition complexity of a string or array file.
    Bdm(BdmArgs),
    /// Perturbation analysis of a grid or graph file.
    Aid(AidArgs),
    /// Evolve an elementary cellular automaton.
    Eca(EcaArgs),
    /// Render the runtime field of an index range along a Peano curve.
    Render(RenderArgs),
}

#[derive(Subcommand)]
enum CtmCommand {
    Build(CtmBuildArgs),
    Query(CtmQueryArgs),
    Merge(CtmMergeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Dim {
    #[value(name = "1d")]
    #[serde(rename = "1d")]
    OneD,
    #[value(name = "2d")]
    #[serde(rename = "2d")]
    TwoD,
}

impl From<Dim> for Dimension {
    fn from(d: Dim) -> Dimension {
        match d {
            Dim::OneD => Dimension::OneD,
            Dim::TwoD => Dimension::TwoD,
        }
    }
}

#[derive(Args, Clone, Default)]
struct SpaceArgs {
    #[arg(long)]
    states: Option<u32>,
    #[arg(long)]
    symbols: Option<u32>,
    #[arg(long, value_enum)]
    dim: Option<Dim>,
    #[arg(long)]
    budget: Option<u64>,
    /// First rule index (inclusive).
    #[arg(long)]
    start: Option<u128>,
    /// Last rule index (exclusive).
    #[arg(long)]
    end: Option<u128>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// One line per symmetry class: `representative,multiplicity`.
    #[arg(long)]
    symmetry: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunSpaceArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Write every run record here as CSV.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Also write the summary JSON here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct CtmBuildArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Run one representative per complement/mirror class (binary, full space).
    #[arg(long)]
    symmetry: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CtmQueryArgs {
    #[arg(long)]
    table: Option<PathBuf>,
    /// Strings (`0110`) or arrays (`2x2:0110`).
    #[arg(required = true)]
    objects: Vec<String>,
}

#[derive(Args)]
struct CtmMergeArgs {
    #[arg(required = true, num_args = 2..)]
    tables: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone, Default)]
struct BlockArgs {
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    block_size: Option<usize>,
    /// exact, ignore or pad<symbol>
    #[arg(long)]
    boundary: Option<String>,
    /// Fall back to symmetric copies of blocks missing from the table.
    #[arg(long)]
    symmetrized: bool,
}

#[derive(Args)]
struct BdmArgs {
    #[command(flatten)]
    block: BlockArgs,
    /// Text file of digit rows.
    input: PathBuf,
}

#[derive(Args)]
struct AidArgs {
    #[command(flatten)]
    block: BlockArgs,
    /// flips or edges
    #[arg(long, default_value = "flips")]
    family: String,
    /// Treat the input as a directed graph (edges family).
    #[arg(long)]
    directed: bool,
    /// cells, vertices or rows
    #[arg(long)]
    measure: Option<String>,
    /// Neutrality threshold; defaults to log2 of the size measure.
    #[arg(long)]
    threshold: Option<f64>,
    /// Report CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report JSON destination.
    #[arg(long)]
    json: Option<PathBuf>,
    input: PathBuf,
}

#[derive(Args)]
struct EcaArgs {
    #[arg(long)]
    rule: u32,
    #[arg(long, default_value_t = 16)]
    width: usize,
    #[arg(long, default_value_t = 16)]
    steps: usize,
    /// Initial row as digits; a single centred 1 by default.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Peano level; the smallest that fits when omitted.
    #[arg(long)]
    level: Option<u32>,
    /// Render these records instead of running the range.
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// CSV `index,x,y,steps,halted` destination.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

/// Settings accepted in the config file.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    states: Option<u32>,
    symbols: Option<u32>,
    dimension: Option<Dim>,
    budget: Option<u64>,
    start: Option<u64>,
    end: Option<u64>,
    symmetry: Option<bool>,
    table: Option<PathBuf>,
    block_size: Option<usize>,
    boundary: Option<String>,
    symmetrized: Option<bool>,
    threads: Option<usize>,
    level: Option<u32>,
}

/// Fully resolved settings of one invocation; hashed for provenance.
#[derive(Clone, Debug, Default, Serialize)]
struct Resolved {
    command: String,
    states: Option<u32>,
    symbols: Option<u32>,
    dimension: Option<Dim>,
    budget: Option<u64>,
    start: Option<String>,
    end: Option<String>,
    symmetry: bool,
    table: Option<String>,
    block_size: Option<usize>,
    boundary: Option<String>,
    symmetrized: bool,
    level: Option<u32>,
    extra: Vec<String>,
}

impl Resolved {
    fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("serializable");
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }

    fn provenance(&self) -> String {
        format!("softspace {} config={}", env!("CARGO_PKG_VERSION"), self.hash())
    }
}

struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Range { .. }
            | Error::Validation(_)
            | Error::Unsupported(_)
            | Error::Capacity { .. }
            | Error::NoSuchEdge(..) => 2,
            Error::NotInSupport { .. } | Error::MissingBlocks(_) => 3,
            Error::Dimension { .. } | Error::Consistency(_) | Error::NoHaltingMachines => 4,
            Error::Parse { .. } | Error::Io { .. } => 5,
        };
        Failure {
            code,
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        kind: "usage".into(),
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 5,
        kind: "io".into(),
        message: format!("{}: {e}", path.display()),
    }
}

fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

struct Space {
    space: MachineSpace,
    budget: Budget,
    range: IndexRange,
}

fn resolve_space(a: &SpaceArgs, cfg: &FileConfig, r: &mut Resolved, need_budget: bool) -> CliResult<Space> {
    let states = a.states.or(cfg.states).ok_or_else(|| usage("--states is required"))?;
    let symbols = a.symbols.or(cfg.symbols).ok_or_else(|| usage("--symbols is required"))?;
    let dim = a.dim.or(cfg.dimension).unwrap_or(Dim::OneD);
    let budget = a.budget.or(cfg.budget);
    if need_budget && budget.is_none() {
        return Err(usage("--budget is required"));
    }
    let budget = Budget::new(budget.unwrap_or(1))?;
    let space = MachineSpace::new(states, symbols, dim.into())?;
    let start = a.start.or(cfg.start.map(u128::from)).unwrap_or(0);
    let end = match a.end.or(cfg.end.map(u128::from)) {
        Some(e) => e,
        None => space.space_size()?,
    };
    let range = IndexRange::new(start, end, &space)?;
    r.states = Some(states);
    r.symbols = Some(symbols);
    r.dimension = Some(dim);
    if need_budget {
        r.budget = Some(budget.get());
    }
    r.start = Some(start.to_string());
    r.end = Some(end.to_string());
    Ok(Space { space, budget, range })
}

/// A table path as given, or looked up in the table directory.
fn locate_table(given: Option<&Path>) -> CliResult<PathBuf> {
    let p = given.ok_or_else(|| usage("--table is required"))?;
    if p.exists() || p.is_absolute() {
        return Ok(p.to_path_buf());
    }
    match std::env::var_os(TABLE_DIR_VAR) {
        Some(dir) => Ok(Path::new(&dir).join(p)),
        None => Ok(p.to_path_buf()),
    }
}

fn default_table_name(s: &Space) -> String {
    let dim = match s.space.dimension() {
        Dimension::OneD => "1d",
        Dimension::TwoD => "2d",
    };
    format!(
        "ctm_{}_{}_{}_{}.ctm",
        s.space.states(),
        s.space.symbols(),
        dim,
        s.budget.get()
    )
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn cmd_enumerate(a: &EnumerateArgs, cfg: &FileConfig, r: &mut Resolved) -> CliResult<()> {
    let s = resolve_space(&a.space, cfg, r, false)?;
    r.symmetry = a.symmetry || cfg.symmetry.unwrap_or(false);
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    let werr = |e: std::io::Error| io_err(Path::new("<output>"), e);
    if r.symmetry {
        if s.space.symbols() != 2 {
            return Err(Error::Unsupported(format!("symmetry classes need a binary alphabet, space {}", s.space)).into());
        }
        writeln!(out, "representative,multiplicity").map_err(werr)?;
        for i in s.range {
            if let Some(c) = enumeration::class_of_representative(i, &s.space)? {
                writeln!(out, "{},{}", c.representative, c.multiplicity).map_err(werr)?;
            }
        }
    } else {
        for i in enumeration::iter_space(&s.space, s.range)? {
            writeln!(out, "{i}").map_err(werr)?;
        }
    }
    out.flush().map_err(werr)
}

fn cmd_run_space(a: &RunSpaceArgs, cfg: &FileConfig, r: &mut Resolved) -> CliResult<()> {
    let s = resolve_space(&a.space, cfg, r, true)?;
    let prov = r.provenance();
    let summary = if let Some(path) = &a.records {
        let run = runner::run_space(&s.space, s.range, s.budget)?;
        let w = create(path)?;
        runner::write_records_csv(w, &run.records, Some(&prov)).map_err(|e| io_err(path, e))?;
        run.summary
    } else {
        runner::summarize_space(&s.space, s.range, s.budget)?
    };
    let mut v = serde_json::to_value(&summary).expect("serializable");
    v["censored_count"] = json!(summary.censored_count());
    v["range"] = json!({"start": s.range.start().to_string(), "end": s.range.end().to_string()});
    v["config_hash"] = json!(r.hash());
    if let Some(p) = &a.summary {
        std::fs::write(p, serde_json::to_string_pretty(&v).expect("serializable") + "\n").map_err(|e| io_err(p, e))?;
    }
    print_json(&v);
    Ok(())
}

fn cmd_ctm_build(a: &CtmBuildArgs, cfg: &FileConfig, r: &mut Resolved) -> CliResult<()> {
    let s = resolve_space(&a.space, cfg, r, true)?;
    r.symmetry = a.symmetry || cfg.symmetry.unwrap_or(false);
    let table = if r.symmetry {
        if s.range != IndexRange::full(&s.space)? {
            return Err(usage("--symmetry builds need the full index range"));
        }
        ctm::build_table_reduced(&s.space, s.budget)?
    } else {
        ctm::build_table_for_range(&s.space, s.range, s.budget)?
    };
    let out = match &a.out {
        Some(p) => p.clone(),
        None => match std::env::var_os(TABLE_DIR_VAR) {
            Some(dir) => Path::new(&dir).join(default_table_name(&s)),
            None => return Err(usage(format!("--out is required when {TABLE_DIR_VAR} is unset"))),
        },
    };
    table.save_with(&out, Some(&r.provenance()))?;
    print_json(&json!({
        "table": out.display().to_string(),
        "space": s.space.to_string(),
        "budget": s.budget.get(),
        "keys": table.len(),
        "halting_total": table.halting_total(),
        "total_machines": table.total_machines(),
        "config_hash": r.hash(),
    }));
    Ok(())
}

fn parse_object(s: &str, dim: Dimension) -> CliResult<OutputObject> {
    let o: OutputObject = s.parse()?;
    if o.dimension() != dim {
        return Err(Error::Consistency(format!("{s} is not a {}D object", dim.rank())).into());
    }
    Ok(o)
}

fn cmd_ctm_query(a: &CtmQueryArgs, cfg: &FileConfig, r: &mut Resolved) -> CliResult<()> {
    let path = locate_table(a.table.as_deref().or(cfg.table.as_deref()))?;
    r.table = Some(path.display().to_string());
    let table = CtmTable::load(&path)?;
    let mut rows = vec!["string,count,ap,ctm".to_string()];
    for s in &a.objects {
        let o = parse_object(s, table.space().dimension())?;
        let ap = table.ap_estimate(&o)?;
        let k = table.ctm_value(&o)?;
        rows.push(format!("{o},{},{ap:e},{k}", table.count(&o)));
    }
    println!("{}", rows.join("\n"));
    Ok(())
}

fn cmd_ctm_merge(a: &CtmMergeArgs, r: &mut Resolved) -> CliResult<()> {
    r.extra = a.tables.iter().map(|p| p.display().to_string()).collect();
    let mut tables = a.tables.iter().map(|p| CtmTable::load(p));
    let mut acc = tables.next().expect("at least two tables")?;
    for t in tables {
        acc = acc.merge(t?)?;
    }
    acc.save_with(&a.out, Some(&r.provenance()))?;
    print_json(&json!({
        "table": a.out.display().to_string(),
        "keys": acc.len(),
        "halting_total": acc.halting_total(),
        "total_machines": acc.total_machines(),
        "config_hash": r.hash(),
    }));
    Ok(())
}

struct BlockSetup {
    table: BaseTable,
    block_size: usize,
    boundary: Boundary,
}

fn resolve_block(a: &BlockArgs, cfg: &FileConfig, r: &mut Resolved) -> CliResult<BlockSetup> {
    let path = locate_table(a.table.as_deref().or(cfg.table.as_deref()))?;
    let ctm = CtmTable::load(&path)?;
    let symmetrized = a.symmetrized || cfg.symmetrized.unwrap_or(false);
    let table = BaseTable::from_ctm(&ctm).with_symmetrized_lookup(symmetrized);
    let block_size = a.block_size.or(cfg.block_size).unwrap_or(match table.dimension() {
        Dimension::OneD => bdm::DEFAULT_BLOCK_1D,
        Dimension::TwoD => bdm::DEFAULT_BLOCK_2D,
    });
    let boundary: Boundary = a
        .boundary
        .as_deref()
        .or(cfg.boundary.as_deref())
        .unwrap_or("exact")
        .parse()?;
    r.table = Some(path.display().to_string());
    r.block_size = Some(block_size);
    r.boundary = Some(boundary.to_string());
    r.symmetrized = symmetrized;
    Ok(BlockSetup {
        table,
        block_size,
        boundary,
    })
}

fn cmd_bdm(a: &BdmArgs, cfg: &FileConfig, r: &mut Resolved) -> CliResult<()> {
    let b = resolve_block(&a.block, cfg, r)?;
    let grid = Grid::read_text(&a.input)?;
    r.extra = vec![a.input.display().to_string()];
    let dec = match b.table.dimension() {
        Dimension::OneD => {
            if grid.rows() != 1 {
                return Err(Error::Consistency(format!(
                    "a 1D table needs a single-line input, {} has {} rows",
                    a.input.display(),
                    grid.rows()
                ))
                .into());
            }
            bdm::decompose_string(grid.cells(), b.block_size, b.boundary)?
        }
        Dimension::TwoD => bdm::decompose(&grid, b.block_size, b.boundary)?,
    };
    let value = bdm::bdm_of(&dec, &b.table)?;
    print_json(&json!({
        "input": a.input.display().to_string(),
        "rows": grid.rows(),
        "cols": grid.cols(),
        "block_size": b.block_size,
        "boundary": b.boundary.to_string(),
        "boundary_effect": dec.boundary,
        "blocks": dec.block_count(),
        "distinct_blocks": dec.pairs.len(),
        "bdm": value,
        "config_hash": r.hash(),
    }));
    Ok(())
}

fn cmd_aid(a: &AidArgs, cfg: &FileConfig, r: &mut Resolved) -> CliResult<()> {
    let b = resolve_block(&a.block, cfg, r)?;
    if b.table.dimension() != Dimension::TwoD {
        return Err(Error::Consistency("perturbation analysis needs a 2D base table".into()).into());
    }
    let family: Family = a.family.parse()?;
    let measure = a.measure.as_deref().map(str::parse::<SizeMeasure>).transpose()?;
    let grid = Grid::read_text(&a.input)?;
    let target = match family {
        Family::Flips => PerturbationTarget::grid(grid)?,
        Family::EdgeDeletions => PerturbationTarget::graph(grid, a.directed)?,
    };
    r.extra = vec![
        a.input.display().to_string(),
        a.family.clone(),
        format!("directed={}", a.directed),
        format!("measure={measure:?}"),
        format!("threshold={:?}", a.threshold),
    ];
    let est = BdmEstimator::new(&b.table, b.block_size, b.boundary);
    let report = aid::signature(&target, family, &est, measure, a.threshold)?;
    let prov = r.provenance();
    if let Some(p) = &a.out {
        report.write_csv(create(p)?, Some(&prov)).map_err(|e| io_err(p, e))?;
    }
    if let Some(p) = &a.json {
        let mut v = serde_json::to_value(&report).expect("serializable");
        v["config_hash"] = json!(r.hash());
        std::fs::write(p, serde_json::to_string_pretty(&v).expect("serializable") + "\n").map_err(|e| io_err(p, e))?;
    }
    let neutral = report
        .entries
        .iter()
        .filter(|e| e.class == aid::Class::Neutral)
        .count();
    print_json(&json!({
        "input": a.input.display().to_string(),
        "family": a.family,
        "elements": report.entries.len(),
        "distinct_deltas": report.distinct_deltas(1e-9),
        "neutral": neutral,
        "information": report.entries.len() - neutral,
        "size_term": report.size_term,
        "threshold": report.threshold,
        "max_delta": report.signature.first(),
        "min_delta": report.signature.last(),
        "config_hash": r.hash(),
    }));
    Ok(())
}

fn cmd_eca(a: &EcaArgs) -> CliResult<()> {
    let init = match &a.init {
        None => EcaInit::SingleCenter,
        Some(s) => {
            let g = Grid::parse_text(s)?;
            EcaInit::Row(g.cells().to_vec())
        }
    };
    let grid = aid::eca_evolve(a.rule, a.width, a.steps, &init)?;
    match &a.out {
        Some(p) => std::fs::write(p, grid.to_text()).map_err(|e| io_err(p, e))?,
        None => print!("{}", grid.to_text()),
    }
    Ok(())
}

fn cmd_render(a: &RenderArgs, cfg: &FileConfig, r: &mut Resolved) -> CliResult<()> {
    let s = resolve_space(&a.space, cfg, r, true)?;
    let records: Vec<RunRecord> = match &a.records {
        Some(p) => {
            let f = File::open(p).map_err(|e| io_err(p, e))?;
            let all = runner::read_records_csv(BufReader::new(f), s.space, s.budget).map_err(|e| e.with_path(p))?;
            r.extra = vec![p.display().to_string()];
            all.into_iter().filter(|rec| s.range.contains(rec.rule_index)).collect()
        }
        None => runner::run_space(&s.space, s.range, s.budget)?.records,
    };
    let level = match a.level.or(cfg.level) {
        Some(k) => k,
        None => render::PeanoGrid::minimal_for(records.len() as u128),
    };
    r.level = Some(level);
    let out = render::render_field(&records, level, &RuntimePalette::default())?;
    let prov = r.provenance();
    out.image.save_ppm(&a.out, Some(&prov))?;
    if let Some(p) = &a.sidecar {
        out.write_sidecar(create(p)?, Some(&prov)).map_err(|e| io_err(p, e))?;
    }
    let white = records.iter().filter(|x| !x.halted).count();
    let red = records.iter().filter(|x| x.halted && x.steps == out.max_steps).count();
    print_json(&json!({
        "image": a.out.display().to_string(),
        "level": level,
        "side": out.grid.side(),
        "machines": records.len(),
        "nonhalting_pixels": white,
        "max_steps": out.max_steps,
        "max_steps_pixels": red,
        "config_hash": r.hash(),
    }));
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let cfg = load_config(cli.config.as_deref())?;
    let threads = cli.threads.or(cfg.threads).unwrap_or(0);
    let mut r = Resolved::default();
    let mut work = move || -> CliResult<()> {
        match &cli.command {
            Command::Enumerate(a) => {
                r.command = "enumerate".into();
                cmd_enumerate(a, &cfg, &mut r)
            }
            Command::RunSpace(a) => {
                r.command = "run-space".into();
                cmd_run_space(a, &cfg, &mut r)
            }
            Command::Ctm(CtmCommand::Build(a)) => {
                r.command = "ctm build".into();
                cmd_ctm_build(a, &cfg, &mut r)
            }
            Command::Ctm(CtmCommand::Query(a)) => {
                r.command = "ctm query".into();
                cmd_ctm_query(a, &cfg, &mut r)
            }
            Command::Ctm(CtmCommand::Merge(a)) => {
                r.command = "ctm merge".into();
                cmd_ctm_merge(a, &mut r)
            }
            Command::Bdm(a) => {
                r.command = "bdm".into();
                cmd_bdm(a, &cfg, &mut r)
            }
            Command::Aid(a) => {
                r.command = "aid".into();
                cmd_aid(a, &cfg, &mut r)
            }
            Command::Eca(a) => cmd_eca(a),
            Command::Render(a) => {
                r.command = "render".into();
                cmd_render(a, &cfg, &mut r)
            }
        }
    };
    if threads == 0 {
        work()
    } else {
        runner::with_threads(threads, work)?
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!(
                "{}",
                json!({"error": f.kind, "message": f.message, "exit_code": f.code})
            );
            ExitCode::from(f.code)
        }
    }
}
