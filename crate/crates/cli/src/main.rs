use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ugs_sched::metrics;
use ugs_sched::report::{write_allocation, write_metrics, write_summary};
use ugs_sched::trials::{run_trials, ScenarioParams};
use ugs_sched::{
    dl_slots_per_frame, schedule, ul_slots_per_frame, Algorithm, Amount, PhyProfile, Scenario,
};

#[derive(Parser)]
#[command(name = "ugs-sched", version, about = "Frame-based UGS schedulers: EQA, EDF and SWIM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print DL and UL slots per frame for a PHY profile.
    Capacity(CapacityArgs),
    /// Schedule one scenario file.
    Schedule(ScheduleArgs),
    /// Compare algorithms over seeded random scenarios.
    Eval(EvalArgs),
}

#[derive(Args)]
struct CapacityArgs {
    /// Scenario file whose [phy] section is used.
    scenario: Option<PathBuf>,
    /// Override a profile key, e.g. `--set dl_subchannels=30`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct ScheduleArgs {
    scenario: PathBuf,
    #[arg(long, value_parser = parse_algo)]
    algo: Option<Algorithm>,
    #[arg(long, value_parser = parse_amount)]
    min_burst_size: Option<Amount>,
    #[arg(long)]
    frames: Option<usize>,
    /// Per-frame capacity in units (overrides the file).
    #[arg(long, value_parser = parse_amount)]
    capacity: Option<Amount>,
    /// Allocation output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, default_value_t = 10)]
    ms: usize,
    #[arg(long, default_value_t = 100)]
    frames: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    demand_min: u64,
    #[arg(long, default_value_t = 360)]
    demand_max: u64,
    #[arg(long, default_value_t = 4)]
    period_min: usize,
    #[arg(long, default_value_t = 44)]
    period_max: usize,
    #[arg(long, default_value = "360", value_parser = parse_amount)]
    capacity: Amount,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_parser = parse_amount)]
    min_burst_size: Option<Amount>,
    /// Restrict to one algorithm; all three by default.
    #[arg(long, value_parser = parse_algo)]
    algo: Option<Algorithm>,
    /// Summary output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: ugs_sched::Error| e.to_string())
}

fn parse_amount(s: &str) -> Result<Amount, String> {
    s.parse().map_err(|e: ugs_sched::Error| e.to_string())
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn capacity(args: CapacityArgs) -> Result<()> {
    let mut phy = match &args.scenario {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let sc = Scenario::parse(&text).with_context(|| format!("parsing {}", p.display()))?;
            sc.phy.unwrap_or_default()
        }
        None => PhyProfile::default(),
    };
    for kv in &args.set {
        let Some((k, v)) = kv.split_once('=') else {
            bail!("--set expects KEY=VALUE, got {kv:?}");
        };
        phy.set(k.trim(), v).with_context(|| format!("--set {kv}"))?;
    }
    println!("dl_slots_per_frame={}", dl_slots_per_frame(&phy)?);
    println!("ul_slots_per_frame={}", ul_slots_per_frame(&phy)?);
    Ok(())
}

fn run_schedule(args: ScheduleArgs) -> Result<()> {
    let path = &args.scenario;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut sc = Scenario::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(a) = args.algo {
        sc.algorithm = Some(a);
    }
    if let Some(m) = args.min_burst_size {
        sc.min_burst_size = Some(m);
    }
    if let Some(f) = args.frames {
        sc.horizon = Some(f);
    }
    if let Some(c) = args.capacity {
        sc.capacity = Some(c);
    }
    let cfg = sc.config()?;
    let run = schedule(&sc.flows, &sc.leaves, &cfg)?;

    let rejected = &run.admission.rejected;
    for (id, d) in rejected {
        eprintln!("flow {id} rejected by admission control: {d:?}");
    }
    match (sc.expect_reject, rejected.is_empty()) {
        (false, false) => bail!("{} flow(s) failed admission control", rejected.len()),
        (true, true) => bail!("scenario expects a rejection but every flow was admitted"),
        _ => {}
    }

    if let Err(v) = run.verify(&sc.flows) {
        bail!("schedule violates an invariant: {v}");
    }

    emit(args.out.as_deref(), &write_allocation(&run.grid))?;
    if let Some(p) = &args.metrics {
        let m = metrics::compute(&run.grid, &run.admission.admitted, &run.admission.leaves);
        fs::write(p, write_metrics(&m, &run.grid, &run.admission.admitted, &run.admission.leaves))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    if args.demand_min > args.demand_max {
        bail!("--demand-min exceeds --demand-max");
    }
    if args.period_min > args.period_max {
        bail!("--period-min exceeds --period-max");
    }
    let mut params = ScenarioParams {
        n_ms: args.ms,
        frames: args.frames,
        demand: args.demand_min..=args.demand_max,
        period: args.period_min..=args.period_max,
        capacity: args.capacity,
        ..ScenarioParams::default()
    };
    if let Some(m) = args.min_burst_size {
        params.min_burst_size = m;
    }
    let algos: Vec<Algorithm> = match args.algo {
        Some(a) => vec![a],
        None => Algorithm::ALL.to_vec(),
    };
    let summaries = run_trials(args.seed, args.trials, &params, &algos)?;
    emit(args.out.as_deref(), &write_summary(&summaries))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Capacity(a) => capacity(a),
        Command::Schedule(a) => run_schedule(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
