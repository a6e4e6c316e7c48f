use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;
use supermode_cli::config::ScenarioConfig;
use supermode_cli::{run_scenario, ConfigError, Overrides, ScenarioKind, Verb};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "supermode", version, about = "Population inversion and phonon amplification in coupled active-passive resonators")]
struct Cli {
    #[command(subcommand)]
    verb: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every point of the scenario and write one CSV per point.
    Simulate(RunArgs),
    /// Like `simulate`, plus a table with one summary row per point.
    Sweep(RunArgs),
    /// Classical transmission scan of the cavity pair for every point.
    Spectrum(RunArgs),
    /// Resolve the scenario and its points without running anything.
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `moments`, `midpoint_product` or `euler_product`.
    #[arg(long)]
    method: Option<String>,
    /// `diagonal` or `full`.
    #[arg(long)]
    noise_mode: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    /// Horizon, a number or an expression such as `1/gamma_m`.
    #[arg(long)]
    t_end: Option<String>,
}

impl RunArgs {
    fn overrides(&self, kind: Option<ScenarioKind>) -> Overrides {
        Overrides {
            out: self.out.clone(),
            method: self.method.clone(),
            noise_mode: self.noise_mode.clone(),
            steps: self.steps,
            t_end: self.t_end.clone(),
            kind,
        }
    }
}

fn load(args: &RunArgs, kind: Option<ScenarioKind>) -> Result<ScenarioConfig, ExitCode> {
    ScenarioConfig::load(&args.config, &args.overrides(kind)).map_err(|e: ConfigError| {
        error!("config error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn execute(args: &RunArgs, verb: Verb) -> ExitCode {
    let kind = (verb == Verb::Spectrum).then_some(ScenarioKind::Spectrum);
    let cfg = match load(args, kind) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let report = match run_scenario(&cfg, verb, Some(&args.config)) {
        Ok(r) => r,
        Err(e) => {
            error!("{e:#}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    for f in &report.files {
        println!("{}", f.display());
    }
    match report.failures() {
        0 => ExitCode::SUCCESS,
        n if n == report.points.len() => {
            error!("all {n} point(s) failed");
            ExitCode::from(EXIT_NUMERICAL)
        }
        n => {
            error!("{n} of {} point(s) failed; see the manifest", report.points.len());
            ExitCode::from(EXIT_PARTIAL)
        }
    }
}

fn validate(args: &RunArgs) -> ExitCode {
    let cfg = match load(args, None) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let points = match cfg.points() {
        Ok(p) => p,
        Err(e) => {
            error!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    println!("scenario {:?} `{}`: {} point(s), method {}, noise mode {}", cfg.kind, cfg.name, points.len(), cfg.method, cfg.noise_mode);
    for p in &points {
        let at: Vec<String> = p.coords.iter().map(|(a, v)| format!("{}={v}", a.name())).collect();
        let bound = supermode::approximation_bound(&p.params, p.grid.t_end());
        println!(
            "  #{:03} [{}] t_end={} steps={} validity_bound={bound:.3e}",
            p.index,
            at.join(", "),
            p.grid.t_end(),
            p.grid.n_steps()
        );
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match &cli.verb {
        Command::Simulate(a) => execute(a, Verb::Simulate),
        Command::Sweep(a) => execute(a, Verb::Sweep),
        Command::Spectrum(a) => execute(a, Verb::Spectrum),
        Command::Validate(a) => validate(a),
    }
}
