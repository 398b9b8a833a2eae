use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hyperstress::scenario::{generate_scenario, load_text, run_scenario, Overrides};
use hyperstress::Error;

/// Numerical checks of first- and second-order stress balance identities.
#[derive(Parser)]
#[command(name = "hyperstress", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a scenario file (or bundled scenario name).
    Run {
        #[arg(long)]
        scenario: String,
        /// Check id, repeatable; `all` runs every applicable check.
        #[arg(long = "check")]
        checks: Vec<String>,
        #[arg(long)]
        quad_order: Option<usize>,
        /// `KEY=VALUE` replacing one tolerance, repeatable.
        #[arg(long = "tol-override", value_parser = parse_override)]
        tol_overrides: Vec<(String, f64)>,
        /// JSONL report destination; stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a random polynomial scenario.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|e| format!("bad value for {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Config {
            key: "--out".into(),
            message: format!("cannot write {}: {e}", p.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Run {
            scenario,
            checks,
            quad_order,
            tol_overrides,
            report,
        } => {
            let text = load_text(&scenario)?;
            let overrides = Overrides {
                quad_order,
                tolerances: tol_overrides,
            };
            let r = run_scenario(&text, &checks, &overrides)?;
            for c in &r.records {
                eprintln!(
                    "{:<20} {}  residual {:.3e}  tolerance {:.1e}",
                    c.id,
                    if c.pass { "PASS" } else { "FAIL" },
                    c.residual,
                    c.tolerance
                );
            }
            write_out(report.as_ref(), &r.to_jsonl())?;
            Ok(r.overall_pass)
        }
        Command::Generate {
            seed,
            n,
            d,
            degree,
            out,
        } => {
            write_out(out.as_ref(), &generate_scenario(seed, n, d, degree)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
