//! Command-line front end: run scenarios, sweep α, calibrate attacks and plot
//! traces.

mod plot;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use lfc_scc::scenario::{
    calibrate_attack, load_config, run, write_trace, CalibrationOptions, CalibrationReport,
    RunSummary, ScenarioConfig,
};
use lfc_scc::ConfigError;

/// Exit status when `--fail-on-trip` is set and a relay tripped.
const EXIT_TRIP: u8 = 1;
/// Exit status for unreadable, malformed or invalid configuration.
const EXIT_CONFIG: u8 = 2;
/// Exit status for any other failure (I/O, numerical breakdown).
const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "lfc-scc",
    version,
    about = "Safety-critical control filter for load frequency control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario, write trace.csv and summary.toml and print the summary.
    Run {
        /// Scenario config (TOML).
        config: PathBuf,
        /// Output directory for trace.csv and summary.toml.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Disable the SCC filter.
        #[arg(long)]
        no_scc: bool,
        /// Override the barrier gain α.
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Override the noise seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Exit with status 1 if any relay trips.
        #[arg(long)]
        fail_on_trip: bool,
    },
    /// Run the scenario once per α (in parallel) and print a comparison table.
    SweepAlpha {
        config: PathBuf,
        /// Comma-separated α values.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
    },
    /// Search the amplitude at which the attack trips a relay without the SCC.
    CalibrateAttack {
        config: PathBuf,
        /// Window within which the uncontrolled attack must trip (s).
        #[arg(long, default_value_t = 30.0)]
        window: f64,
        /// Bisection tolerance on the amplitude (pu).
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        /// Strong amplitude as a multiple of the trip amplitude.
        #[arg(long, default_value_t = 1.5)]
        strong_factor: f64,
        /// Weak amplitude as a multiple of the trip amplitude.
        #[arg(long, default_value_t = 0.25)]
        weak_factor: f64,
        /// Write strong.toml and weak.toml scenario configs here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render control/ROCOF and control/frequency SVG plots from a trace.
    Plot {
        trace: PathBuf,
        /// Output directory for the SVG files (defaults to the trace's directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        rocof_limit: f64,
        #[arg(long, default_value_t = 1.03)]
        f_over: f64,
        #[arg(long, default_value_t = 0.942)]
        f_under: f64,
    },
}

#[derive(Debug)]
enum Failure {
    Config(ConfigError),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Runtime(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Run {
            config,
            out,
            no_scc,
            alpha,
            seed,
            fail_on_trip,
        } => {
            let mut cfg = load_config(&config)?;
            if no_scc {
                cfg.scc.enabled = false;
            }
            if let Some(a) = alpha {
                cfg.scc.alpha = a;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let summary = cmd_run(&cfg, &out)?;
            Ok(if fail_on_trip && summary.tripped() {
                EXIT_TRIP
            } else {
                0
            })
        }
        Command::SweepAlpha { config, alphas } => {
            let cfg = load_config(&config)?;
            let mut variants = Vec::with_capacity(alphas.len());
            for &a in &alphas {
                let mut c = cfg.clone();
                c.scc.enabled = true;
                c.scc.alpha = a;
                c.validate()?;
                variants.push(c);
            }
            print!("{}", sweep_alpha(&variants)?);
            Ok(0)
        }
        Command::CalibrateAttack {
            config,
            window,
            tolerance,
            strong_factor,
            weak_factor,
            out,
        } => {
            let cfg = load_config(&config)?;
            let opts = CalibrationOptions {
                window,
                tolerance,
                strong_factor,
                weak_factor,
                ..CalibrationOptions::default()
            };
            let report = calibrate_attack(&cfg, &opts).context("calibration failed")?;
            print!("{}", format_calibration(&report));
            if let Some(dir) = out {
                write_calibrated(&cfg, &report, &dir)?;
                println!("wrote {}", dir.display());
            }
            Ok(0)
        }
        Command::Plot {
            trace,
            out,
            rocof_limit,
            f_over,
            f_under,
        } => {
            let dir = out.unwrap_or_else(|| {
                trace
                    .parent()
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| PathBuf::from("."))
            });
            let limits = plot::Thresholds {
                rocof: rocof_limit,
                f_over,
                f_under,
            };
            for path in plot::plot_trace(&trace, &dir, &limits)? {
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
    }
}

fn cmd_run(cfg: &ScenarioConfig, out: &Path) -> anyhow::Result<RunSummary> {
    let output = run(cfg).context("simulation failed")?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let trace_path = out.join("trace.csv");
    write_trace(&output.trace, &trace_path)
        .with_context(|| format!("writing {}", trace_path.display()))?;
    let summary_path = out.join("summary.toml");
    let text = toml::to_string(&output.summary).context("serializing summary")?;
    std::fs::write(&summary_path, text)
        .with_context(|| format!("writing {}", summary_path.display()))?;
    print!("{}", format_summary(&output.summary));
    println!("trace: {}", trace_path.display());
    Ok(output.summary)
}

fn format_summary(s: &RunSummary) -> String {
    let trips = if s.trip_events.is_empty() {
        "none".to_string()
    } else {
        s.trip_events
            .iter()
            .map(|e| format!("{}@{:.3}s", e.element, e.t))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let settling = s
        .settling_time
        .map_or_else(|| "not settled".to_string(), |t| format!("{t:.3} s"));
    let mut out = String::new();
    let _ = writeln!(out, "max |d_omega_hat|    {:.6e} pu", s.max_abs_d_omega_hat);
    let _ = writeln!(
        out,
        "max |omega_dot_hat|  {:.6e} pu/s",
        s.max_abs_omega_dot_hat
    );
    let _ = writeln!(out, "trips                {trips}");
    let _ = writeln!(out, "scc_active_time      {:.3} s", s.scc_active_time);
    let _ = writeln!(
        out,
        "scc activations      {}",
        s.scc_activation_intervals.len()
    );
    let _ = writeln!(out, "alarm_count          {}", s.alarm_count);
    let _ = writeln!(out, "settling_time        {settling}");
    out
}

/// Runs every variant on its own thread and tabulates the results in input order.
fn sweep_alpha(variants: &[ScenarioConfig]) -> anyhow::Result<String> {
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = variants
            .iter()
            .map(|cfg| scope.spawn(move || run(cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });

    let mut table = String::new();
    let _ = writeln!(
        table,
        "{:>10}  {:>16}  {:>16}  {:>10}  {:>6}",
        "alpha", "max|rocof| pu/s", "max|dw| pu", "scc_time s", "trips"
    );
    for (cfg, result) in variants.iter().zip(results) {
        let s = result
            .with_context(|| format!("run with alpha = {}", cfg.scc.alpha))?
            .summary;
        let _ = writeln!(
            table,
            "{:>10}  {:>16.6e}  {:>16.6e}  {:>10.3}  {:>6}",
            cfg.scc.alpha,
            s.max_abs_omega_dot_hat,
            s.max_abs_d_omega_hat,
            s.scc_active_time,
            s.trip_events.len()
        );
    }
    Ok(table)
}

fn format_calibration(r: &CalibrationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "attack kind          {:?}", r.attack.kind);
    if r.attack.kind == lfc_scc::attacks::AttackKind::Sinusoid {
        let _ = writeln!(out, "frequency            {:.9} Hz", r.attack.frequency);
    }
    let _ = writeln!(out, "trip amplitude       {:.6} pu", r.trip_amplitude);
    let _ = writeln!(out, "strong amplitude     {:.6} pu", r.strong_amplitude);
    let strong = r
        .strong_trip_time
        .map_or_else(|| "no trip".to_string(), |t| format!("trips at {t:.3} s"));
    let _ = writeln!(out, "strong, no SCC       {strong}");
    let _ = writeln!(out, "weak amplitude       {:.6} pu", r.weak_amplitude);
    let _ = writeln!(
        out,
        "weak, SCC on         {} trips, {} modified steps",
        r.weak_trips, r.weak_modified_steps
    );
    let _ = writeln!(out, "simulations          {}", r.runs);
    out
}

fn write_calibrated(
    base: &ScenarioConfig,
    r: &CalibrationReport,
    dir: &Path,
) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, amplitude, scc) in [
        ("strong.toml", r.strong_amplitude, false),
        ("weak.toml", r.weak_amplitude, true),
    ] {
        let mut cfg = base.clone();
        cfg.attack = r.attack;
        cfg.attack.amplitude = amplitude;
        cfg.scc.enabled = scc;
        let path = dir.join(name);
        std::fs::write(&path, cfg.to_toml_string())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
