use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use offload_cli::commands::{analyze_trace, policy_eval, AnalyzeOptions, PolicyOptions};
use offload_cli::config::load_config;
use offload_cli::error::{CliError, CliResult};
use offload_cli::report::{audit_report, run_scenario, SimulateOptions};
use offload_core::appmodel::CameraStrategy;
use offload_core::{RateAccuracyCurve, ScenarioConfig, SimTime};

#[derive(Parser)]
#[command(name = "offload-sim", version, about = "Wearable camera offloading over LTE and mmWave")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write traces, logs, metrics and report.json.
    Simulate {
        /// Scenario file; the built-in default when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Round-trip constraints (ms) replacing the configured grid.
        #[arg(long, value_delimiter = ',')]
        dmax: Option<Vec<f64>>,
        #[arg(long)]
        strategy: Option<CameraStrategy>,
    },
    /// Metrics from an uplink and a downlink packet log.
    Analyze {
        #[arg(long)]
        ul: PathBuf,
        #[arg(long)]
        dl: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "30,40,50")]
        dmax: Vec<f64>,
        /// Per-camera rates (Mbps); overrides --strategy.
        #[arg(long, value_delimiter = ',')]
        camera_rates: Option<Vec<f64>>,
        #[arg(long, default_value = "uniform")]
        strategy: CameraStrategy,
        #[arg(long, default_value_t = 30)]
        frame_hz: u32,
        /// Analysis horizon in seconds; defaults to the last send.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Adaptive offloading decisions over a throughput series.
    Policy {
        /// Series CSV with a `rate_mbps` column.
        #[arg(long)]
        series: PathBuf,
        /// Total-delay target (ms).
        #[arg(long, default_value_t = 100.0)]
        target: f64,
        #[arg(long, default_value = "uniform")]
        strategy: CameraStrategy,
        /// Rate-accuracy curve CSV replacing the bundled one.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Median round trip (ms) used for edge delay budgets.
        #[arg(long)]
        rtt: Option<f64>,
        #[arg(long, default_value_t = 30)]
        frame_hz: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute report.json from the files it lists.
    Report {
        #[arg(long)]
        out: PathBuf,
        /// Also check the configuration hash against this file.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config, seed, out, dmax, strategy } => {
            let (cfg, bytes) = match &config {
                Some(p) => load_config(p)?,
                None => (ScenarioConfig::default(), Vec::new()),
            };
            let r = run_scenario(&cfg, &bytes, &out, &SimulateOptions { seed, dmax_ms: dmax, strategy })?;
            println!("{:<32} {:>10} {:>12}", "configuration", "target_ms", "availability");
            for row in &r.rows {
                for t in &row.targets {
                    println!("{:<32} {:>10} {:>12.4}", row.name, t.target_ms, t.availability);
                }
            }
            println!("wrote {} files and report.json to {}", r.files.len(), out.display());
        }
        Command::Analyze { ul, dl, out, dmax, camera_rates, strategy, frame_hz, horizon } => {
            let p = ScenarioConfig::default().policy;
            let camera_rates_mbps = camera_rates.unwrap_or(match strategy {
                CameraStrategy::Uniform => p.uniform_rates_mbps,
                CameraStrategy::Priority => p.priority_rates_mbps,
            });
            if let Some(h) = horizon {
                if h.is_nan() || h < 0.0 {
                    return Err(CliError::Usage("--horizon must be non-negative".into()));
                }
            }
            let opts = AnalyzeOptions { d_max_ms: dmax, camera_rates_mbps, frame_hz, horizon: horizon.map(SimTime::from_secs_f64) };
            let s = analyze_trace(&ul, &dl, &out, &opts)?;
            print!("{:>10}", "d_max_ms");
            for r in &s.required_mbps {
                print!(" {:>9}", format!("{r} Mbps"));
            }
            println!();
            for (d, row) in s.d_max_ms.iter().zip(&s.availability) {
                print!("{d:>10}");
                for v in row {
                    print!(" {v:>9.4}");
                }
                println!();
            }
        }
        Command::Policy { series, target, strategy, curve, rtt, frame_hz, out } => {
            let curve = match curve {
                Some(p) => {
                    let f = std::fs::File::open(&p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
                    Some(RateAccuracyCurve::read_csv(f).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?)
                }
                None => None,
            };
            let opts = PolicyOptions { target_ms: target, strategy, frame_hz, curve, median_rtt_ms: rtt };
            let e = policy_eval(&series, out.as_deref(), &opts)?;
            for b in &e.bands {
                println!("{:<16} {:>8.4}  wmAP {:>6.2}  AP {:>6.2}  {}", b.band, b.fraction, b.wmap, b.ap_person, if b.compliant { "ok" } else { "over target" });
            }
            let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.2}"));
            println!("availability {:.4}  expected wmAP {}  expected AP {}", e.availability, fmt(e.expected_wmap), fmt(e.expected_ap_person));
        }
        Command::Report { out, config } => {
            let n = audit_report(&out, config.as_deref())?;
            println!("report.json consistent: {n} checks");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
