use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sdmsop_cli::experiment::{run_matrix, summarize, write_csv, ExperimentSpec, SolverKind};
use sdmsop_cli::inputs::{load_meta, parse_list, parse_seeds, read_text, Source};
use sdmsop_cli::verify::verify;
use sdmsop_core::exact::emit_mps;
use sdmsop_core::gtsp_io::{read_instance, write_instance};
use sdmsop_core::{build_ilp, emit_lp, ProfitRule, SolverConfig};

// Aliases keep clap from treating list flags as repeated values.
type Rules = Vec<ProfitRule>;
type Counts = Vec<usize>;
type Solvers = Vec<SolverKind>;
type Seeds = Vec<u64>;

#[derive(Parser)]
#[command(name = "sdmsop", version, about = "Single-depot multiple set orienteering: solvers and experiment harness")]
struct Cli {
    /// Repeat for more log output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a GTSP file into a self-contained instance file.
    Transform(TransformArgs),
    /// Run a solver x instance x seed matrix and write a CSV report.
    Solve(SolveArgs),
    /// Re-score a solution file against an instance file.
    Verify(VerifyArgs),
    /// Write the integer program of an instance in LP (or MPS) format.
    EmitIlp(EmitArgs),
}

#[derive(Args)]
struct Budgeting {
    /// Profit rule for GTSP inputs.
    #[arg(long, default_value = "g1")]
    rule: ProfitRule,
    /// Budget fraction of the best-known GTSP tour cost.
    #[arg(long, default_value_t = 0.25)]
    w: f64,
    /// File of `instance_name gtsp_opt_cost` lines.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    gtsp: PathBuf,
    #[command(flatten)]
    budgeting: Budgeting,
    #[arg(long, default_value_t = 2)]
    travelers: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// GTSP (`.gtsp`) or instance files.
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    /// Comma list of profit rules.
    #[arg(long, default_value = "g1", value_parser = parse_list::<ProfitRule>)]
    rule: Rules,
    #[arg(long, default_value_t = 0.25)]
    w: f64,
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Comma list of traveler counts.
    #[arg(long, default_value = "2", value_parser = parse_list::<usize>)]
    travelers: Counts,
    /// Comma list drawn from ga, vns, oracle, emit-ilp.
    #[arg(long, default_value = "ga,vns", value_parser = parse_list::<SolverKind>)]
    solvers: Solvers,
    /// `a..b` or a comma list.
    #[arg(long, default_value = "0..10", value_parser = parse_seeds)]
    seeds: Seeds,
    /// Per-run wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Concurrent runs; defaults to the number of CPUs.
    #[arg(long)]
    workers: Option<usize>,
    /// TOML solver settings (`ga.*`, `vns.*`, `oracle.*`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Results directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Also write MPS files for emit-ilp runs.
    #[arg(long)]
    mps: bool,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    solution: PathBuf,
}

#[derive(Args)]
struct EmitArgs {
    /// GTSP (`.gtsp`) or instance file.
    instance: PathBuf,
    #[command(flatten)]
    budgeting: Budgeting,
    #[arg(long, default_value_t = 2)]
    travelers: usize,
    /// Write MPS instead of LP.
    #[arg(long)]
    mps: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn transform(a: TransformArgs) -> Result<()> {
    let Some(meta_path) = a.budgeting.meta.as_deref() else {
        bail!("transform needs --meta with the best-known GTSP tour costs");
    };
    let meta = load_meta(Some(meta_path))?;
    let source = Source::load(&a.gtsp)?;
    if !matches!(source, Source::Gtsp(_)) {
        bail!("{} is not a .gtsp file", a.gtsp.display());
    }
    let (inst, warnings) = source.materialize(a.budgeting.rule, a.budgeting.w, meta.as_ref(), a.travelers, &a.gtsp)?;
    for w in warnings {
        log::warn!("{}: {w}", inst.name());
    }
    emit(a.out.as_deref(), &write_instance(&inst))
}

fn solve(a: SolveArgs) -> Result<()> {
    let config = match &a.config {
        Some(p) => SolverConfig::from_toml(&read_text(p)?).with_context(|| format!("in {}", p.display()))?,
        None => SolverConfig::default(),
    };
    let spec = ExperimentSpec {
        instances: a.instances,
        rules: a.rule,
        w: a.w,
        travelers: a.travelers,
        solvers: a.solvers,
        seeds: a.seeds,
        time_limit: a.time_limit,
        config,
    };
    spec.validate()?;
    let meta = load_meta(a.meta.as_deref())?;
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let outputs = run_matrix(&spec, meta.as_ref(), workers, a.mps);

    for dir in ["histories", "solutions", "models"] {
        fs::create_dir_all(a.out.join(dir)).with_context(|| format!("creating {}", a.out.display()))?;
    }
    let mut rows = Vec::with_capacity(outputs.len());
    for o in outputs {
        let art = &o.artifacts;
        let files = [
            ("histories", "csv", &art.history_csv),
            ("solutions", "sol", &art.solution),
            ("models", "lp", &art.lp),
            ("models", "mps", &art.mps),
        ];
        for (dir, ext, body) in files {
            if let Some(body) = body {
                fs::write(a.out.join(dir).join(format!("{}.{ext}", art.stem)), body)?;
            }
        }
        if let Some(e) = &o.record.error {
            log::error!("{} t={} {} {}: {e}", o.record.instance, o.record.t, o.record.rule, o.record.solver);
        }
        rows.push(o.record);
    }
    let summary = summarize(&rows);
    for s in &summary {
        let profit = s.profit.map_or("-".to_string(), |p| p.to_string());
        println!("{} t={} {} {}: best {profit} ({:.2}s mean)", s.instance, s.t, s.rule, s.solver, s.wall_time_seconds);
    }
    rows.extend(summary);
    let path = a.out.join("report.csv");
    write_csv(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?, &rows)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn verify_cmd(a: VerifyArgs) -> Result<ExitCode> {
    let inst = read_instance(&read_text(&a.instance)?).with_context(|| format!("in {}", a.instance.display()))?;
    let text = read_text(&a.solution)?;
    let report = verify(&inst, &text).with_context(|| format!("in {}", a.solution.display()))?;
    print!("{report}");
    Ok(if report.feasible() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn emit_ilp(a: EmitArgs) -> Result<()> {
    let meta = load_meta(a.budgeting.meta.as_deref())?;
    let source = Source::load(&a.instance)?;
    let (inst, _) = source.materialize(a.budgeting.rule, a.budgeting.w, meta.as_ref(), a.travelers, &a.instance)?;
    let model = build_ilp(&inst);
    let text = if a.mps { emit_mps(&model) } else { emit_lp(&model) };
    emit(a.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Transform(a) => transform(a).map(|_| ExitCode::SUCCESS),
        Command::Solve(a) => solve(a).map(|_| ExitCode::SUCCESS),
        Command::Verify(a) => verify_cmd(a),
        Command::EmitIlp(a) => emit_ilp(a).map(|_| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
