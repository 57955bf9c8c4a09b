//! Command-line frontend.
//!
//! Exit codes follow the SAT-solver convention: 10 = model found,
//! 20 = not solved within budget, 0 = success for non-solving commands,
//! 1 = usage or I/O error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use memsat::cnf::{self, Assignment, Formula};
use memsat::gen::{self, CdcParams};
use memsat::heuristics::CompetitionConfig;
use memsat::integrator::{solve_observed, RunConfig, RunRecord};
use memsat::sweep::{self, SweepConfig};
use memsat::walksat::{walksat_solve, WalkSatParams};
use memsat::SolverParams;

#[derive(Parser)]
#[command(name = "memsat", version, about = "Continuous-time dynamical 3-SAT solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a DIMACS CNF with the dynamical solver.
    Solve(SolveArgs),
    /// Generate a planted CDC (or uniform random) 3-SAT instance.
    Gen(GenArgs),
    /// Run an ensemble sweep from a JSON config.
    Bench(BenchArgs),
    /// Solve with the WalkSAT baseline.
    Walksat(WalksatArgs),
    /// Solve while recording unsat-graph snapshots and collective events.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// DIMACS CNF input.
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON file overriding the solver parameters.
    #[arg(long)]
    params_file: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000_000)]
    max_steps: u64,
    /// Enable per-clause long-memory rate adaptation.
    #[arg(long)]
    competition: bool,
    /// Write a CSV trajectory (step,t,dt,num_unsat,max_xl).
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Snapshot stride for the trajectory, in accepted steps.
    #[arg(long, default_value_t = 100)]
    stride: u64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    ratio: f64,
    /// Planted clause-type probability; omit to generate uniform random
    /// 3-SAT with no planted solution.
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output DIMACS path; a `<out>.json` sidecar holds the metadata.
    #[arg(long)]
    out: PathBuf,
    /// Withhold the planted assignment from the sidecar.
    #[arg(long)]
    hide_planted: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON SweepConfig.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for summary.csv and runs.jsonl.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Override the config's worker count.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct WalksatArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
    #[arg(long, default_value_t = 10_000_000)]
    max_flips: u64,
}

#[derive(Args)]
struct AnalyzeArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    params_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    /// Snapshot stride in accepted steps.
    #[arg(long, default_value_t = 100)]
    stride: u64,
    /// JSONL output of unsat-graph snapshots.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Gen(args) => cmd_gen(args).map(|_| 0),
        Command::Bench(args) => cmd_bench(args).map(|_| 0),
        Command::Walksat(args) => cmd_walksat(args),
        Command::Analyze(args) => cmd_analyze(args).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_formula(path: &Path) -> Result<Formula> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(cnf::parse_dimacs(&text)?)
}

fn read_params(path: &Option<PathBuf>, ratio: f64) -> Result<SolverParams> {
    let params = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).context("parsing solver params")?
        }
        None => SolverParams::for_ratio(ratio),
    };
    params.validate().map_err(anyhow::Error::msg)?;
    Ok(params)
}

fn print_model(a: &Assignment) {
    print!("v");
    for (i, &s) in a.values.iter().enumerate() {
        print!(" {}", (i as i64 + 1) * s as i64);
    }
    println!(" 0");
}

fn report(f: &Formula, record: &RunRecord) -> Result<u8> {
    eprintln!(
        "steps {} rejected {} t {:.3} wall {:.3}s mean_dt {:.5}",
        record.steps, record.rejected_steps, record.integrated_time, record.wall_time, record.mean_dt
    );
    if record.solved {
        let a = record.assignment.as_ref().expect("solved run has a model");
        anyhow::ensure!(cnf::verify(f, a)?, "model failed verification");
        println!("s SATISFIABLE");
        print_model(a);
        Ok(10)
    } else {
        println!("s UNKNOWN");
        Ok(20)
    }
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let f = read_formula(&args.input)?;
    let params = read_params(&args.params_file, f.ratio())?;
    let cfg = RunConfig {
        max_steps: args.max_steps,
        seed: args.seed,
        record_trajectory: args.trajectory.is_some(),
        snapshot_stride: args.stride,
        competition: args.competition.then(CompetitionConfig::default),
        ..Default::default()
    };
    let record = solve_observed(&f, &params, &cfg, |_| {});
    if let Some(path) = &args.trajectory {
        let mut out = fs::File::create(path)?;
        writeln!(out, "step,t,dt,num_unsat,max_xl")?;
        for s in &record.trajectory {
            writeln!(out, "{},{},{},{},{}", s.step, s.t, s.dt, s.num_unsat, s.max_xl)?;
        }
    }
    report(&f, &record)
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let (formula, sidecar) = match args.p0 {
        Some(p0) => {
            let params = CdcParams { n: args.n, ratio: args.ratio, p0, seed: args.seed };
            let inst = gen::generate_cdc(&params)?;
            let planted = (!args.hide_planted).then_some(&inst.planted);
            let sidecar = serde_json::json!({
                "kind": "cdc",
                "params": params,
                "duplicate_clauses_allowed": true,
                "planted": planted,
            });
            (inst.formula, sidecar)
        }
        None => {
            let f = gen::generate_uniform(args.n, args.ratio, args.seed)?;
            let sidecar = serde_json::json!({
                "kind": "uniform",
                "n": args.n,
                "ratio": args.ratio,
                "seed": args.seed,
                "duplicate_clauses_allowed": true,
            });
            (f, sidecar)
        }
    };
    fs::write(&args.out, cnf::serialize_dimacs(&formula))?;
    let meta_path = args.out.with_extension(
        format!(
            "{}json",
            args.out
                .extension()
                .map(|e| format!("{}.", e.to_string_lossy()))
                .unwrap_or_default()
        ),
    );
    fs::write(&meta_path, serde_json::to_string_pretty(&sidecar)?)?;
    eprintln!("wrote {} and {}", args.out.display(), meta_path.display());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg: SweepConfig = serde_json::from_str(&text).context("parsing sweep config")?;
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    fs::create_dir_all(&args.out_dir)?;
    let log_path = args.out_dir.join("runs.jsonl");
    let result = sweep::run_sweep_logged(&cfg, Some(&log_path))?;
    let mut csv = fs::File::create(args.out_dir.join("summary.csv"))?;
    sweep::write_summary_csv(&result, &mut csv)?;
    if let Some(fit) = &result.power_fit {
        eprintln!("power-law exponent {:.3} +/- {:.3}", fit.slope, fit.stderr);
    }
    if let Some(fit) = &result.exponential_fit {
        eprintln!("exponential rate {:.4} +/- {:.4}", fit.slope, fit.stderr);
    }
    for s in &result.per_n {
        eprintln!(
            "n {} solved {}/{} median_steps {:?}",
            s.n, s.solved, s.instances, s.median_steps
        );
    }
    Ok(())
}

fn cmd_walksat(args: WalksatArgs) -> Result<u8> {
    let f = read_formula(&args.input)?;
    let record = walksat_solve(
        &f,
        &WalkSatParams { noise: args.noise, max_flips: args.max_flips, seed: args.seed },
    );
    report(&f, &record)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let f = read_formula(&args.input)?;
    let params = read_params(&args.params_file, f.ratio())?;
    let cfg = RunConfig {
        max_steps: args.max_steps,
        seed: args.seed,
        ..Default::default()
    };
    let mut out = args.out.as_ref().map(fs::File::create).transpose()?;
    let mut prev: Option<memsat::SolverState> = None;
    let mut collective_events = 0u64;
    let mut best_batch = 0usize;
    let record = solve_observed(&f, &params, &cfg, |state| {
        if let Some(p) = &prev {
            let (_, snap, delta) = sweep::analyze_transition(&f, p, state);
            if delta.newly_satisfied >= 2 && delta.newly_unsatisfied == 0 {
                collective_events += 1;
                best_batch = best_batch.max(delta.newly_satisfied);
            }
            if state.steps % args.stride == 0 {
                if let Some(out) = &mut out {
                    let line = serde_json::json!({ "snapshot": snap, "delta": delta });
                    let _ = writeln!(out, "{line}");
                }
            }
        }
        prev = Some(state.clone());
    });
    eprintln!(
        "solved {} steps {} collective_events {} largest_batch {}",
        record.solved, record.steps, collective_events, best_batch
    );
    Ok(())
}
