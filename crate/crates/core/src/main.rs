use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use padg::config::RunConfig;
use padg::executor::{build_kernel_graph, optimize_assignment_with, Granularity, KernelId, TimingTable};
use padg::scenario::{run_bench, run_scenario, Setup};
use padg::Error;

#[derive(Parser)]
#[command(name = "padg", version, about = "p-adaptive DG shallow-water solver with a two-lane kernel scheduler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario in the configured execution mode.
    Run { config: PathBuf },
    /// Measure per-kernel times on both lanes and write a timing table.
    Measure {
        config: PathBuf,
        /// Output CSV (defaults to the config's `timings` path, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the makespan-optimal lane assignment from a timing table.
    Optimize {
        timings: PathBuf,
        /// Only this order pair, e.g. `0-1`.
        #[arg(long)]
        p_pair: Option<String>,
        #[arg(long, default_value = "homogeneous")]
        distribution: String,
        /// `layer` keeps base and correction kernels together; `kernel` places each freely.
        #[arg(long, default_value = "layer")]
        granularity: Granularity,
        /// Write the schedule CSV (requires a single order pair).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure, optimize, then compare lane A, lane B and the optimized schedule.
    Bench { config: PathBuf },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::read(&config)?;
            let out = run_scenario(&cfg)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            let rel = (out.final_mass - out.initial_mass).abs() / out.initial_mass.abs().max(f64::MIN_POSITIVE);
            println!("scenario: {}", cfg.scenario.as_str());
            println!("steps: {} (t = {:.6} s)", cfg.steps, out.final_state.time);
            print!("{}", out.schedule.report());
            println!("mean substep: {:.4} ms", out.report.mean_substep_ms());
            println!("mass: {:.12} -> {:.12} (relative change {rel:.3e})", out.initial_mass, out.final_mass);
            println!("min-depth clamps: {}", out.stats.clamps);
            if cfg.scenario.is_dynamic() {
                let peak = out.stats.high_fraction.iter().skip(100).fold(0.0f64, |a, &b| a.max(b));
                println!(
                    "order changes: {} raised, {} lowered; peak higher-order fraction after step 100: {peak:.4}",
                    out.stats.raised, out.stats.lowered
                );
            }
            println!(
                "higher-order elements: {} of {} ({:.4})",
                out.final_orders.num_high(),
                out.final_orders.len(),
                out.final_orders.high_fraction()
            );
        }
        Command::Measure { config, out } => {
            let cfg = RunConfig::read(&config)?;
            let setup = Setup::new(&cfg)?;
            let (timings, warnings) = setup.measure_both_lanes()?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let mut table = TimingTable::default();
            table.push(&timings, &setup.p_pair(), "homogeneous");
            match out.or(cfg.timings) {
                Some(path) => table.write(path)?,
                None => print!("{}", table.to_csv()),
            }
        }
        Command::Optimize {
            timings,
            p_pair,
            distribution,
            granularity,
            out,
        } => {
            let table = TimingTable::read(&timings)?;
            let pairs = match p_pair {
                Some(p) => vec![p],
                None => table.p_pairs(),
            };
            if out.is_some() && pairs.len() != 1 {
                return Err(padg::error::ScheduleError::Mismatch(
                    "--out needs a single order pair; pass --p-pair".into(),
                )
                .into());
            }
            for pair in pairs {
                let t = table.select(&pair, &distribution);
                let has = |k: KernelId| t.iter().any(|(x, _, _)| x == k);
                let graph = build_kernel_graph(has(KernelId::EdgeBase), has(KernelId::Indicator));
                let schedule = optimize_assignment_with(&graph, &t, granularity)?;
                println!("p {pair} ({distribution}):");
                print!("{}", schedule.report());
                if let Some(path) = &out {
                    schedule.write(path, None)?;
                }
            }
        }
        Command::Bench { config } => {
            let cfg = RunConfig::read(&config)?;
            let (schedule, rows, warnings) = run_bench(&cfg)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", schedule.report());
            println!("{:<14} {:>14} {:>16} {:>14} {:>12}", "run", "mean ms", "median ms", "predicted ms", "max diff");
            for r in rows {
                println!(
                    "{:<14} {:>14.4} {:>16.4} {:>14.4} {:>12.3e}",
                    r.label, r.mean_substep_ms, r.median_substep_ms, r.predicted_ms, r.max_diff
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
