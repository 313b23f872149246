use clap::{Parser, Subcommand};
use irs_noma::ao::{self, AoConfig, Status};
use irs_noma::baselines::BaselineKind;
use irs_noma::harness::{
    draw_trial, run_sweep, summarize_gains, write_csv_file, ScenarioConfig, Sweep,
};
use irs_noma::units::linear_to_db;
use irs_noma::Error;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "irs-noma",
    version,
    about = "IRS backscatter NOMA optimizer and Monte-Carlo harness"
)]
struct Cli {
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo trials (overrides the config).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON scenario config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for trials.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one realization with the full algorithm and print it as JSON.
    Solve,
    /// Run the configured sweep and write CSV.
    Sweep,
    /// Run all four schemes at one SNR and print the gain table.
    Compare {
        /// Operating point; defaults to the middle of the SNR sweep.
        #[arg(long)]
        snr_db: Option<f64>,
    },
}

#[derive(Serialize)]
struct SolveOutput {
    alpha: f64,
    a1: f64,
    a2: f64,
    phases_rad: Vec<f64>,
    /// 1-based `[strong, weak]`.
    order: [usize; 2],
    rate_strong: f64,
    rate_weak: f64,
    sum_rate: f64,
    secondary_snr_db: [f64; 2],
    status: Status,
    iterations: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::SolverFailure { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Solve => solve(cli, &cfg),
        Command::Sweep => {
            let result = run_sweep(&cfg)?;
            match &cli.out {
                Some(path) => write_csv_file(&result, path),
                None => emit(None, &result.to_csv_string()?),
            }
        }
        Command::Compare { snr_db } => compare(cli, &cfg, *snr_db),
    }
}

fn solve(cli: &Cli, cfg: &ScenarioConfig) -> Result<(), Error> {
    let geometry = cfg.geometry.to_geometry();
    let budget = cfg.link.to_budget();
    let csi = (cfg.csi.eta > 0.0).then_some(irs_noma::channel::CsiErrorModel { eta: cfg.csi.eta });
    let (_, seen, seed) = draw_trial(
        &geometry,
        &cfg.fading.to_params(),
        csi.as_ref().map(|m| (m, cfg.csi.links)),
        cfg.master_seed,
        0,
    )?;
    let sic = cfg.sic.as_ref().map(|s| s.to_model());
    let ao_cfg = AoConfig {
        epsilon: cfg.ao.epsilon,
        max_outer_iters: cfg.ao.max_outer_iters,
        seed,
        penalty: cfg.ao.penalty,
        sic,
    };
    let sol = ao::solve(&seen, &budget, &ao_cfg)?;
    let out = SolveOutput {
        alpha: sol.alpha,
        a1: sol.a[0],
        a2: sol.a[1],
        phases_rad: sol.phases.iter().map(|z| z.arg() + 0.0).collect(),
        order: [sol.order.strong + 1, sol.order.weak + 1],
        rate_strong: sol.rate_strong,
        rate_weak: sol.rate_weak,
        sum_rate: sol.sum_rate(),
        secondary_snr_db: sol.secondary_snr.map(linear_to_db),
        status: sol.status,
        iterations: sol.iterations,
    };
    let mut text = serde_json::to_string_pretty(&out).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    emit(cli.out.as_deref(), &text)
}

fn compare(cli: &Cli, cfg: &ScenarioConfig, snr_db: Option<f64>) -> Result<(), Error> {
    let at = match (snr_db, &cfg.sweep) {
        (Some(v), _) => v,
        (None, Sweep::SnrDb { values }) => values[values.len() / 2],
        (None, _) => cfg.link.tx_power_dbm - cfg.link.noise_power_dbm,
    };
    let point = ScenarioConfig {
        schemes: BaselineKind::ALL.to_vec(),
        sweep: Sweep::SnrDb { values: vec![at] },
        ..cfg.clone()
    };
    let result = run_sweep(&point)?;
    let gains = summarize_gains(
        &result,
        &[
            BaselineKind::RandomPhase,
            BaselineKind::OmaAligned,
            BaselineKind::OmaRandomPhase,
        ],
        at,
    )?;
    let mut text = format!("SNR {at} dB, {} trials\n", cfg.trials);
    text.push_str(&format!(
        "{:<18} {:>12} {:>10} {:>9}\n",
        "scheme", "sum rate", "stderr", "feasible"
    ));
    for row in &result.rows {
        text.push_str(&format!(
            "{:<18} {:>12.4} {:>10.4} {:>5}/{:<3}\n",
            row.scheme.name(),
            row.mean_sum_rate_bps_hz,
            row.stderr,
            row.feasible,
            row.feasible + row.infeasible
        ));
    }
    text.push_str("\nfull algorithm gain over\n");
    for g in &gains {
        text.push_str(&format!(
            "{:<18} {:>+9.1}%\n",
            g.reference.name(),
            g.gain_percent
        ));
    }
    emit(cli.out.as_deref(), &text)
}
