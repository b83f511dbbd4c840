use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use archetype_sim::runner::config::ConfigDocument;
use archetype_sim::runner::report::{compare_runs, pairings_for_run, Pairings};
use archetype_sim::runner::{
    emit_reports, run_scenario, ComparisonRow, RunError, Scenario, ScenarioConfig,
};
use archetype_sim::stats::format_p;

#[derive(Parser)]
#[command(
    name = "archetype-sim",
    version,
    about = "Driver archetype lane simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its reports.
    Run {
        #[arg(long, value_parser = parse_scenario)]
        scenario: Option<Scenario>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Positions per lane in running_totals.csv.
        #[arg(long)]
        positions: Option<usize>,
    },
    /// Compare all drivers of two stored runs.
    Compare {
        #[arg(long)]
        run_a: PathBuf,
        #[arg(long)]
        run_b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise archetype comparisons over a stored run.
    Pairings {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: RunError| e.to_string())
}

fn print_rows(rows: &[ComparisonRow]) {
    for r in rows {
        println!(
            "{} vs {}: mean diff {:.4}, U {}, z {:.3}, p {}, d {:.3}, r_z {:.3}",
            r.group_a,
            r.group_b,
            r.mean_diff(),
            r.mwu.u_max,
            r.mwu.z,
            format_p(r.mwu.p_two_sided),
            r.effects.cohens_d,
            r.effects.r_z
        );
    }
}

fn run(
    scenario: Option<Scenario>,
    n: Option<usize>,
    seed: Option<u64>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    positions: Option<usize>,
) -> Result<(), RunError> {
    let mut cfg = match config {
        Some(path) => ConfigDocument::load(&path)?.into_config(scenario)?,
        None => ScenarioConfig::preset(
            scenario
                .ok_or_else(|| RunError::Config("--scenario or --config is required".into()))?,
        ),
    };
    if let Some(n) = n {
        cfg.n = n;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    if let Some(p) = positions {
        cfg.running_total_positions = p;
    }
    cfg.validate()?;

    let bundle = run_scenario(&cfg)?;
    let manifest = emit_reports(&bundle, &cfg.output_dir)?;
    println!("scenario {} n={} seed={}", cfg.scenario, cfg.n, cfg.seed);
    for (k, lane) in bundle.run.lanes.iter().enumerate() {
        println!(
            "lane {}: {} drivers, total adjusted {:.4}, jam {}",
            k + 1,
            lane.len(),
            lane.total_adjusted,
            if lane.jam_triggered { "yes" } else { "no" }
        );
    }
    if bundle.category_comparison.is_empty() {
        println!("comparisons: single category, summary only");
    } else {
        print_rows(&bundle.category_comparison);
    }
    if let Pairings::Skipped(reason) = &bundle.archetype_pairings {
        println!("pairings skipped: {reason}");
    }
    print!("{manifest}");
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Run {
            scenario,
            n,
            seed,
            config,
            out,
            positions,
        } => run(scenario, n, seed, config, out, positions),
        Command::Compare { run_a, run_b, out } => {
            let (rows, manifest) = compare_runs(&run_a, &run_b, &out)?;
            print_rows(&rows);
            print!("{manifest}");
            Ok(())
        }
        Command::Pairings { run, out } => {
            let (rows, manifest) = pairings_for_run(&run, &out)?;
            print_rows(&rows);
            print!("{manifest}");
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
fn execute<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as u8
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(execute(std::env::args_os()))
}
