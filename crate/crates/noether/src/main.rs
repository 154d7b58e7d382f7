//! Thin command-line front end over the library: list catalog entries, run
//! the verification suite, or explain a single entry.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use noether::error::Error;
use noether::suite::{
    render_explain, render_list, render_list_json, render_report, run_verification, write_report,
    RunConfig,
};

#[derive(Parser)]
#[command(name = "noether", version, about = "Verify constants of motion of Lagrangian systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog entries.
    List {
        /// Emit the listing as JSON.
        #[arg(long)]
        json: bool,
        /// Only entries whose id contains this substring.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Run the verification suite and write a report.
    Verify {
        /// Comma-separated catalog ids, or `all` (the default).
        #[arg(long)]
        entries: Option<String>,
        /// Seed for the randomized check points.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report to this path (stdout when absent).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Report format (json or csv; json is the default).
        #[arg(long)]
        format: Option<String>,
        /// Integrator relative tolerance override.
        #[arg(long)]
        rel_tol: Option<f64>,
        /// Interval override `a,b` applied to all selected entries.
        #[arg(long)]
        interval: Option<String>,
        /// Key-value config file; flags given on the command line win.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Suppress the per-entry progress lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Print the triples, constants and checks of one entry.
    Explain {
        /// Catalog entry id.
        id: String,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::UnknownEntry(_) => 2,
        _ => 1,
    }
}

fn run() -> Result<u8, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::List { json, filter } => {
            let text = if json {
                render_list_json(filter.as_deref())?
            } else {
                render_list(filter.as_deref())?
            };
            println!("{text}");
            Ok(0)
        }
        Command::Explain { id } => {
            let text = render_explain(&id)?;
            println!("{text}");
            Ok(0)
        }
        Command::Verify {
            entries,
            seed,
            report,
            format,
            rel_tol,
            interval,
            config,
            quiet,
        } => {
            // Config file first; explicitly given flags win over it.
            let mut run_config = RunConfig::default();
            if let Some(path) = &config {
                run_config.load_file(path)?;
            }
            if let Some(e) = &entries {
                run_config.apply_kv("entries", e)?;
            }
            if let Some(s) = seed {
                run_config.seed = s;
            }
            if let Some(f) = &format {
                run_config.apply_kv("format", f)?;
            }
            if let Some(r) = rel_tol {
                run_config.rel_tol = Some(r);
            }
            if let Some(iv) = &interval {
                run_config.apply_kv("interval", iv)?;
            }
            if report.is_some() {
                run_config.report_path = report;
            }
            // Fail fast on unknown ids so config errors exit with 2.
            run_config.resolve_entries()?;

            let doc = run_verification(&run_config)?;
            if !quiet {
                for entry in &doc.entries {
                    let status = if entry.pass { "pass" } else { "FAIL" };
                    eprintln!(
                        "{status}  {:<28} {} constants, {} checks ({:.0} ms)",
                        entry.entry_id,
                        entry.drifts.len(),
                        entry.checks.len(),
                        entry.wall_ms
                    );
                    if let Some(err) = &entry.error {
                        eprintln!("      error: {err}");
                    }
                    for d in entry.drifts.iter().filter(|d| !d.pass) {
                        eprintln!(
                            "      drift {}: rel {} > tol {}",
                            d.constant_id, d.rel_drift, d.tolerance
                        );
                    }
                    for c in entry.checks.iter().filter(|c| !c.pass) {
                        eprintln!(
                            "      check {}: value {} vs threshold {} ({})",
                            c.check_id, c.value, c.threshold, c.detail
                        );
                    }
                }
            }
            match &run_config.report_path {
                Some(path) => write_report(&doc, path, run_config.format)?,
                None => print!("{}", render_report(&doc, run_config.format)?),
            }
            Ok(if doc.pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
