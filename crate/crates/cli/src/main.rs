use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mdiqkd::channel::DeviceParams;
use mdiqkd::pipeline::certified_solve;
use mdiqkd::sdp_model::from_text;
use mdiqkd::solver::{SolveStatus, SolverOptions};
use mdiqkd_cli::decoy_report::{run_decoy_bounds, write_decoy_csv};
use mdiqkd_cli::{parse, preset, presets, run_sweep, CliError, Result, Scenario, DEVICE_PRESETS};

#[derive(Parser)]
#[command(name = "mdiqkd", version, about = "Certified key-rate sweeps for MDI-QKD")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file (default: output.path from the scenario, else stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the solver's relative gap tolerance
    #[arg(long, global = true)]
    gap_tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Scenario file
    config: Option<PathBuf>,

    /// Built-in scenario instead of a file
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write one CSV row per sweep value
    Sweep {
        #[command(flatten)]
        source: Source,
    },
    /// List built-in scenarios and device presets
    Presets {
        /// Print the scenario text of one preset
        #[arg(long)]
        show: Option<String>,
    },
    /// Solve one problem file and check its certificate
    Solve { problem: PathBuf },
    /// Decoy-state bounds against the honest single-photon values
    DecoyBounds {
        #[command(flatten)]
        source: Source,

        /// Seed for the Monte Carlo gain check (omitted: no check)
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(source: &Source, gap_tol: Option<f64>) -> Result<Scenario> {
    let mut s = match (&source.config, &source.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            parse(&text).map_err(|e| match e {
                CliError::Config { line, column, message } => {
                    CliError::ConfigFile { path: path.display().to_string(), line, column, message }
                }
                e => e,
            })?
        }
        (None, Some(name)) => preset(name)?.scenario()?,
        (None, None) => unreachable!("clap requires a source"),
    };
    if let Some(t) = gap_tol {
        s.solver.gap_tol = t;
    }
    Ok(s)
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn list_presets() {
    println!("scenarios:");
    for p in presets() {
        println!("  {:<20} {}", p.name, p.description);
    }
    println!("device presets:");
    for (name, label) in DEVICE_PRESETS {
        let d = DeviceParams::preset(name).expect("listed device preset exists");
        println!(
            "  {name:<20} {label}: p_dc {:e}, eta_det {}, xi {} dB/km, e_ali {}",
            d.p_dc, d.eta_det, d.xi, d.e_ali
        );
    }
}

/// `Ok(true)` when everything requested succeeded.
fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Sweep { source } => {
            let s = load(source, cli.gap_tol)?;
            let result = run_sweep(&s);
            let out = cli.out.as_deref().or(s.output.as_deref());
            result.write_csv(sink(out)?)?;
            Ok(!result.any_failed())
        }
        Command::Presets { show } => {
            match show {
                Some(name) => print!("{}", preset(name)?.config),
                None => list_presets(),
            }
            Ok(true)
        }
        Command::Solve { problem } => {
            let text = std::fs::read_to_string(problem)?;
            let p = from_text(&text)?;
            let mut opts = SolverOptions::default();
            if let Some(t) = cli.gap_tol {
                opts.gap_tol = t;
            }
            let r = certified_solve(p, &opts)?;
            let mut w = sink(cli.out.as_deref())?;
            writeln!(w, "status {}", r.report.status)?;
            writeln!(w, "iterations {}", r.report.iterations)?;
            writeln!(w, "primal {:e}", r.report.primal_value)?;
            writeln!(w, "dual {:e}", r.report.dual_value)?;
            writeln!(w, "gap {:e}", r.report.gap)?;
            match &r.verification {
                Some(v) => {
                    writeln!(w, "verified {}", v.passed)?;
                    writeln!(w, "certified_bound {:e}", v.certified_bound)?;
                    writeln!(w, "min_slack_eigenvalue {:e}", v.residuals.min_eigenvalue())?;
                }
                None => writeln!(w, "verified false")?,
            }
            Ok(r.verified() && r.report.status == SolveStatus::Optimal)
        }
        Command::DecoyBounds { source, seed } => {
            let s = load(source, cli.gap_tol)?;
            let rows = run_decoy_bounds(&s, *seed)?;
            let out = cli.out.as_deref().or(s.output.as_deref());
            write_decoy_csv(&rows, seed.is_some(), sink(out)?)?;
            Ok(rows.iter().all(|r| r.sound))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
