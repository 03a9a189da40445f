//! Command-line sweep runner.
//!
//! ```text
//! sim --config scenario.cfg --sweep x_u=10:100:5 --trials 200 --seed 1 \
//!     --modes local_only,ris_random,ris_optimized,hrris_fixed,hrris_dynamic \
//!     --out fig3.csv --deterministic
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use hrris_mec::harness::{run_sweep, write_csv, HarnessError, RunMode, SweepAxis, SweepSpec};
use hrris_mec::Scenario;

#[derive(Parser, Debug)]
#[command(name = "sim", about = "Monte Carlo latency sweeps for HRRIS-assisted secure offloading")]
struct Args {
    /// Scenario file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// `<axis>=<start>:<stop>:<step>`, axis one of x_u, n_elements, a_active,
    /// f_edge, f_local, e_antennas, pa_max_dbm.
    #[arg(long)]
    sweep: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated run modes.
    #[arg(
        long,
        default_value = "local_only,ris_random,ris_optimized,hrris_fixed,hrris_dynamic"
    )]
    modes: String,
    #[arg(long)]
    out: PathBuf,
    /// Omit the timestamp so identical runs give identical files.
    #[arg(long)]
    deterministic: bool,
}

enum Failure {
    Config(String),
    Io(String),
}

fn parse_sweep(arg: &str) -> Result<(SweepAxis, Vec<f64>), String> {
    let (axis, range) = arg
        .split_once('=')
        .ok_or_else(|| format!("--sweep expects <axis>=<start>:<stop>:<step>, got `{arg}`"))?;
    let axis: SweepAxis = axis.trim().parse()?;
    let parts: Vec<f64> = range
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number `{p}` in --sweep")))
        .collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else {
        return Err("--sweep range needs start:stop:step".into());
    };
    Ok((axis, SweepSpec::range(axis, start, stop, step)?))
}

fn run(args: Args) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Failure::Io(format!("{}: {e}", args.config.display())))?;
    let base = Scenario::parse(&text).map_err(|e| Failure::Config(e.to_string()))?;
    let (axis, values) = parse_sweep(&args.sweep).map_err(Failure::Config)?;
    let modes = args
        .modes
        .split(',')
        .map(|m| m.trim().parse::<RunMode>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::Config)?;
    let spec = SweepSpec {
        axis,
        values,
        trials: args.trials,
        base_seed: args.seed,
        modes,
    };
    let classify = |e: HarnessError| match e {
        HarnessError::Io(_) | HarnessError::Csv(_) => Failure::Io(e.to_string()),
        other => Failure::Config(other.to_string()),
    };
    let table = run_sweep(&spec, &base).map_err(classify)?;
    write_csv(&table, &args.out, args.deterministic).map_err(classify)?;

    for cell in table.summarize() {
        eprintln!(
            "{}={:<12} {:<14} mean {:.6} s  median {:.6} s",
            axis, cell.value, cell.mode, cell.mean_latency_s, cell.median_latency_s
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(3)
        }
    }
}
