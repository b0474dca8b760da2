use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use gfasym::exec::Exec;
use gfasym::pipeline::{self, Failure, ProblemSpec};
use gfasym::Error;

#[derive(Parser)]
#[command(name = "gfasym", version, about = "Coefficient asymptotics of G / H^p along a direction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expansion plus the exact-vs-approximate table
    Expand(Opts),
    /// Critical points with smoothness and minimality verdicts
    Critical(Opts),
    /// Exact coefficients at n alpha
    Oracle(Opts),
}

#[derive(Args)]
struct Opts {
    /// Problem file (JSON)
    #[arg(long)]
    input: PathBuf,
    /// Number of expansion terms
    #[arg(long = "N")]
    n_terms: Option<u32>,
    /// Comma-separated values of n
    #[arg(long, value_delimiter = ',')]
    n_values: Option<Vec<u64>>,
    /// Working precision; defaults to the problem file, then $GFASYM_PRECISION_BITS, then 212
    #[arg(long)]
    precision_bits: Option<u32>,
    /// Treat the best critical point as strictly minimal when minimality is undecided
    #[arg(long)]
    assume_strictly_minimal: bool,
    /// Use the degenerate formula even when the Hessian is nonsingular
    #[arg(long)]
    force_degenerate: bool,
    /// Newton seeds as JSON, e.g. '[[0.3, 0.4, 0.3]]'
    #[arg(long)]
    seeds: Option<String>,
    /// Write the JSON result here instead of stdout
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Write the table here
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Run without the thread pool
    #[arg(long)]
    sequential: bool,
}

impl Opts {
    fn spec(&self) -> Result<ProblemSpec, Failure> {
        let mut spec = ProblemSpec::from_path(&self.input)?;
        if let Some(n) = self.n_terms {
            if n == 0 {
                return Err(Error::Expansion("N must be at least 1".into()).into());
            }
            spec.n_terms = n;
        }
        if let Some(v) = &self.n_values {
            spec.n_values = v.clone();
        }
        if self.precision_bits.is_some() {
            spec.precision_bits = self.precision_bits;
        }
        spec.overrides.assume_strictly_minimal |= self.assume_strictly_minimal;
        spec.overrides.force_degenerate |= self.force_degenerate;
        if let Some(s) = &self.seeds {
            let v: Value = serde_json::from_str(s).map_err(Error::from)?;
            spec.seeds = Some(serde_json::from_value(v).map_err(Error::from)?);
        }
        if self.out_json.is_some() {
            spec.outputs.json = self.out_json.clone();
        }
        if self.out_csv.is_some() {
            spec.outputs.csv = self.out_csv.clone();
        }
        if self.sequential {
            spec.exec = Exec::Sequential;
        }
        Ok(spec)
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(Error::from)?),
        None => Box::new(std::io::stdout()),
    })
}

fn write_json(path: &Option<PathBuf>, v: &Value) -> Result<(), Failure> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(Error::from)?;
    writeln!(w).map_err(Error::from)?;
    Ok(())
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Expand(o) => {
            let spec = o.spec()?;
            let r = pipeline::run_expand(&spec)?;
            write_json(&spec.outputs.json, &r.to_json(&spec))?;
            // table to stdout only when the JSON went to a file
            match (&spec.outputs.csv, &spec.outputs.json) {
                (Some(_), _) | (None, Some(_)) => r.write_csv(sink(&spec.outputs.csv)?)?,
                (None, None) => {}
            }
        }
        Command::Critical(o) => {
            let spec = o.spec()?;
            let reports = pipeline::run_critical(&spec)?;
            let v = Value::Array(reports.iter().map(|r| r.to_json()).collect());
            write_json(&spec.outputs.json, &v)?;
        }
        Command::Oracle(o) => {
            let spec = o.spec()?;
            pipeline::run_oracle(&spec, sink(&spec.outputs.csv)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", serde_json::to_string_pretty(&f.to_json()).unwrap_or_default());
            ExitCode::from(f.code as u8)
        }
    }
}
