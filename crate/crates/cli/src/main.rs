mod report;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use tsdecomp::decompose::{
    decompose_pipeline, verify_decomposition, DecomposeError, DecomposeOptions, MergeMode,
};
use tsdecomp::dot::{sm_to_dot, to_dot};
use tsdecomp::regions::{
    check_ects, minimal_regions_oracle, minimal_regions_with, RegionOptions, DEFAULT_REGION_BUDGET,
    ORACLE_MAX_STATES,
};
use tsdecomp::sm::{parse_sm, serialize_sm, SmFile};
use tsdecomp::solver::DEFAULT_CONFLICT_BUDGET;
use tsdecomp::ts::{parse_ts, serialize_ts, sync_product};
use tsdecomp::{SmSet, TransitionSystem};

use report::{region_names, EctsJson, MachineJson, RegionsJson, Report, StatsRow};

#[derive(Parser)]
#[command(
    name = "tsdecomp",
    version,
    about = "Decompose transition systems into synchronizing state machines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a `.ts` file and report problems.
    Validate { path: PathBuf },
    /// Print the minimal regions and the excitation-closure verdict.
    Regions {
        path: PathBuf,
        /// Cross-check against the exhaustive scan (at most 20 states).
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = DEFAULT_REGION_BUDGET, value_parser = positive_usize)]
        region_budget: usize,
    },
    /// Decompose one transition system and write the machines.
    Decompose {
        path: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Output directory; defaults to `<input stem>-sms`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a set of `.sm` files against a transition system.
    Verify {
        ts: PathBuf,
        #[arg(required = true)]
        sms: Vec<PathBuf>,
    },
    /// Synchronous product of `.ts` and `.sm` inputs, written as `.ts`.
    Product {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: bool,
    },
    /// Run the pipeline over every `.ts` file of a directory and emit CSV statistics.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Directory for `bench.csv` and per-input outputs; CSV goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1, value_parser = positive_usize)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MergeArg {
    Sat,
    None,
}

#[derive(Args, Clone, Copy)]
struct PipelineArgs {
    #[arg(long, value_enum, default_value = "sat")]
    merge: MergeArg,
    /// Exact minimum cover instead of the greedy generation.
    #[arg(long)]
    exact: bool,
    /// Also write Graphviz files.
    #[arg(long)]
    dot: bool,
    #[arg(long, default_value_t = DEFAULT_REGION_BUDGET, value_parser = positive_usize)]
    region_budget: usize,
    #[arg(long, default_value_t = DEFAULT_CONFLICT_BUDGET, value_parser = positive_u64)]
    solver_budget: u64,
}

impl PipelineArgs {
    fn options(&self) -> DecomposeOptions {
        DecomposeOptions {
            merge: match self.merge {
                MergeArg::Sat => MergeMode::Sat,
                MergeArg::None => MergeMode::None,
            },
            exact: self.exact,
            region_budget: self.region_budget,
            solver_budget: self.solver_budget,
            ..Default::default()
        }
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_u64(s: &str) -> Result<u64, String> {
    positive_usize(s).map(|n| n as u64)
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Invalid(String),
    #[error("not excitation closed; failing events: {}", .0.join(", "))]
    NotEcts(Vec<String>),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::NotEcts(_) => 2,
            CliError::Io { .. } | CliError::Internal(_) => 3,
        }
    }
}

impl From<DecomposeError> for CliError {
    fn from(e: DecomposeError) -> CliError {
        match e {
            DecomposeError::NotEcts { failing_events } => CliError::NotEcts(failing_events),
            other => CliError::Internal(other.to_string()),
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_ts(path: &Path) -> Result<TransitionSystem> {
    parse_ts(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn load_sm(path: &Path) -> Result<SmFile> {
    parse_sm(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

fn json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn cmd_validate(path: &Path) -> Result<u8> {
    let ts = load_ts(path)?;
    println!(
        "{}: {} states, {} transitions, {} events",
        file_name(path),
        ts.num_states(),
        ts.transitions().len(),
        ts.num_events()
    );
    Ok(0)
}

fn cmd_regions(path: &Path, oracle: bool, as_json: bool, budget: usize) -> Result<u8> {
    let ts = load_ts(path)?;
    let regions = minimal_regions_with(
        &ts,
        RegionOptions {
            budget,
            parallel: true,
        },
    )
    .map_err(|e| CliError::Internal(e.to_string()))?;
    let ects = check_ects(&ts, &regions);
    if as_json {
        print!(
            "{}",
            json(&RegionsJson {
                input: file_name(path),
                regions: region_names(&ts, &regions),
                ects: EctsJson::new(&ects)
            })
        );
    } else {
        for (k, r) in regions.iter().enumerate() {
            println!("r{k} = {{{}}}", r.names(&ts).join(", "));
        }
        if ects.is_ects() {
            println!("excitation closed: yes");
        } else {
            println!(
                "excitation closed: no (failing events: {})",
                ects.failing_events.join(", ")
            );
        }
    }
    if oracle {
        if ts.num_states() > ORACLE_MAX_STATES {
            eprintln!(
                "oracle skipped: {} states exceed {ORACLE_MAX_STATES}",
                ts.num_states()
            );
        } else {
            let expected =
                minimal_regions_oracle(&ts).map_err(|e| CliError::Internal(e.to_string()))?;
            if expected != regions {
                return Err(CliError::Internal(format!(
                    "oracle disagrees: {} regions found, {} expected",
                    regions.len(),
                    expected.len()
                )));
            }
            eprintln!("oracle agrees on {} regions", regions.len());
        }
    }
    Ok(if ects.is_ects() { 0 } else { 2 })
}

/// Writes `.sm` files, `report.json`, `machines.json` and optionally DOT files.
fn write_outputs(
    dir: &Path,
    ts: &TransitionSystem,
    sms: &SmSet,
    report: &Report,
    dot: bool,
) -> Result<()> {
    create_dir(dir)?;
    let mut mirror = Vec::new();
    for (i, m) in sms.machines().iter().enumerate() {
        let name = format!("sm{}", i + 1);
        write(&dir.join(format!("{name}.sm")), &serialize_sm(ts, m))?;
        if dot {
            write(&dir.join(format!("{name}.dot")), &sm_to_dot(ts, m))?;
        }
        mirror.push(MachineJson::new(name, ts, m));
    }
    if dot {
        write(&dir.join("ts.dot"), &to_dot(ts))?;
    }
    write(&dir.join("machines.json"), &json(&mirror))?;
    write(&dir.join("report.json"), &json(report))
}

fn write_rejection(
    dir: &Path,
    input: &str,
    ts: &TransitionSystem,
    opts: &DecomposeOptions,
) -> Result<()> {
    let regions = minimal_regions_with(
        ts,
        RegionOptions {
            budget: opts.region_budget,
            parallel: opts.parallel,
        },
    )
    .map_err(|e| CliError::Internal(e.to_string()))?;
    let ects = check_ects(ts, &regions);
    create_dir(dir)?;
    write(
        &dir.join("report.json"),
        &json(&Report::rejected(input, ts, &regions, &ects)),
    )
}

fn cmd_decompose(path: &Path, args: PipelineArgs, out: Option<PathBuf>) -> Result<u8> {
    let ts = load_ts(path)?;
    let out = out.unwrap_or_else(|| PathBuf::from(format!("{}-sms", stem(path))));
    let opts = args.options();
    let input = file_name(path);
    let rep = match decompose_pipeline(&ts, &opts) {
        Ok(rep) => rep,
        Err(DecomposeError::NotEcts { failing_events }) => {
            write_rejection(&out, &input, &ts, &opts)?;
            return Err(CliError::NotEcts(failing_events));
        }
        Err(e) => return Err(e.into()),
    };
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    let report = Report::from_pipeline(&input, &ts, &rep);
    write_outputs(&out, &ts, rep.final_sms(), &report, args.dot)?;
    println!("{} regions", rep.regions.len());
    for s in &rep.stages {
        println!(
            "{}: {} machines, {} places, {} transitions",
            s.name,
            s.sms.len(),
            s.places,
            s.transitions
        );
    }
    match &report.witness {
        None if report.verified => {
            println!("verified: bisimilar");
            Ok(0)
        }
        witness => {
            println!("verified: no");
            if let Some(w) = witness {
                println!("witness: {}", w.trace.join(" "));
            }
            Ok(1)
        }
    }
}

fn cmd_verify(ts_path: &Path, sm_paths: &[PathBuf]) -> Result<u8> {
    let ts = load_ts(ts_path)?;
    let mut machines = Vec::new();
    for p in sm_paths {
        let sm = load_sm(p)?
            .bind(&ts)
            .map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?;
        machines.push(sm);
    }
    let outcome = verify_decomposition(&ts, &SmSet::new(machines));
    if outcome.is_bisimilar() {
        println!("bisimilar");
        return Ok(0);
    }
    println!("not bisimilar");
    if let Some(w) = outcome.witness() {
        println!("witness: {}", w.trace.events().join(" "));
        println!(
            "source state before the mismatch: {}",
            ts.state_name(w.left_state)
        );
    }
    Ok(1)
}

fn cmd_product(paths: &[PathBuf], out: Option<PathBuf>, dot: bool) -> Result<u8> {
    let mut parts = Vec::new();
    for p in paths {
        let ts = if p.extension().is_some_and(|e| e == "sm") {
            load_sm(p)?
                .to_transition_system()
                .map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?
        } else {
            load_ts(p)?
        };
        parts.push(ts);
    }
    let refs: Vec<&TransitionSystem> = parts.iter().collect();
    let product = sync_product(&refs).map_err(|e| CliError::Invalid(e.to_string()))?;
    let text = if dot {
        to_dot(&product)
    } else {
        serialize_ts(&product)
    };
    match out {
        Some(path) => write(&path, &text)?,
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            })?,
    }
    Ok(0)
}

fn bench_one(path: &Path, opts: &DecomposeOptions, out: Option<&Path>, dot: bool) -> StatsRow {
    let input = file_name(path);
    let ts = match load_ts(path) {
        Ok(ts) => ts,
        Err(e) => return StatsRow::failed(&input, None, "invalid", e.to_string()),
    };
    let dir = out.map(|o| o.join(stem(path)));
    match decompose_pipeline(&ts, opts) {
        Ok(rep) => {
            let row = StatsRow::from_pipeline(&input, &ts, &rep);
            if let Some(dir) = dir {
                let report = Report::from_pipeline(&input, &ts, &rep);
                if let Err(e) = write_outputs(&dir, &ts, rep.final_sms(), &report, dot) {
                    return StatsRow {
                        status: "error".into(),
                        error: Some(e.to_string()),
                        ..row
                    };
                }
            }
            row
        }
        Err(e) => {
            let status = if matches!(e, DecomposeError::NotEcts { .. }) {
                "not_ects"
            } else {
                "error"
            };
            let mut row = StatsRow::failed(&input, Some(&ts), status, e.to_string());
            if let (Some(dir), "not_ects") = (dir, status) {
                if let Err(e) = write_rejection(&dir, &input, &ts, opts) {
                    row.error = Some(e.to_string());
                }
            }
            row
        }
    }
}

#[cfg(feature = "parallel")]
fn run_bench(
    paths: &[PathBuf],
    jobs: usize,
    f: impl Fn(&Path) -> StatsRow + Sync,
) -> Result<Vec<StatsRow>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(pool.install(|| paths.par_iter().map(|p| f(p)).collect()))
}

#[cfg(not(feature = "parallel"))]
fn run_bench(
    paths: &[PathBuf],
    _jobs: usize,
    f: impl Fn(&Path) -> StatsRow + Sync,
) -> Result<Vec<StatsRow>> {
    Ok(paths.iter().map(|p| f(p)).collect())
}

fn cmd_bench(dir: &Path, args: PipelineArgs, out: Option<PathBuf>, jobs: usize) -> Result<u8> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|source| CliError::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .path();
        if path.is_file() && path.extension().is_some_and(|e| e == "ts") {
            paths.push(path);
        }
    }
    paths.sort();
    if let Some(out) = &out {
        create_dir(out)?;
    }
    let opts = args.options();
    let rows = run_bench(&paths, jobs, |p| {
        bench_one(p, &opts, out.as_deref(), args.dot)
    })?;

    let text = report::stats_csv(&rows).map_err(|e| CliError::Internal(e.to_string()))?;
    match &out {
        Some(out) => write(&out.join("bench.csv"), &text)?,
        None => print!("{text}"),
    }
    for row in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "{}: {}",
            row.input,
            row.error.as_deref().unwrap_or_default()
        );
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate { path } => cmd_validate(&path),
        Command::Regions {
            path,
            oracle,
            json,
            region_budget,
        } => cmd_regions(&path, oracle, json, region_budget),
        Command::Decompose {
            path,
            pipeline,
            out,
        } => cmd_decompose(&path, pipeline, out),
        Command::Verify { ts, sms } => cmd_verify(&ts, &sms),
        Command::Product { paths, out, dot } => cmd_product(&paths, out, dot),
        Command::Bench {
            dir,
            pipeline,
            out,
            jobs,
        } => cmd_bench(&dir, pipeline, out, jobs),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
