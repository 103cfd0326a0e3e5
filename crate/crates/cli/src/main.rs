//! `loopcell`: sweeps of the lattice estimator, property checks, fits and
//! the closed-form predictions.
//!
//! Exit codes: 0 success, 1 usage, 2 numerical failure, 3 I/O.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use loopcell::checks;
use loopcell::coulomb;
use loopcell::measure::{self, SweepEntry};
use loopcell::model::MAX_SITES;
use loopcell::{make_spec, Error, ModelKind};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "loopcell", version, about = "Lattice Jordan cells and the logarithmic coupling b at c = 0")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measure b_N over a list of sizes.
    Measure {
        #[arg(long, default_value = "percolation", value_parser = parse_model)]
        model: ModelKind,
        /// Comma-separated even sizes, at least 4.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<String>,
        /// Also fit b_inf in powers of 1/N up to this order (printed to stderr).
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Fit b_inf from a CSV written by `measure`.
    Extrapolate {
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Closed-form predictions for b.
    Predict {
        #[arg(long)]
        json: bool,
    },
    /// Property suites at the given sizes.
    Check {
        #[arg(long, default_value = "percolation", value_parser = parse_model)]
        model: ModelKind,
        #[arg(long, value_delimiter = ',', default_value = "8")]
        sizes: Vec<String>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse::<ModelKind>().map_err(|e| e.to_string())
}

/// Failure of a subcommand, mapped onto the exit code.
enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(m) => Failure::Usage(m),
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => Failure::Io(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn parse_sizes(raw: &[String]) -> Result<Vec<usize>, Failure> {
    raw.iter()
        .map(|s| {
            let l: usize = s
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("size '{s}' is not a number")))?;
            if l < 4 || !l.is_multiple_of(2) || l > MAX_SITES {
                return Err(Failure::Usage(format!("size {l} must be even, at least 4 and at most {MAX_SITES}")));
            }
            Ok(l)
        })
        .collect()
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_measure(
    model: ModelKind,
    sizes: &[String],
    order: Option<usize>,
    out: &Option<PathBuf>,
    format: Format,
) -> Result<(), Failure> {
    let sizes = parse_sizes(sizes)?;
    let entries = measure::sweep(model, &sizes);
    let mut w = open_out(out)?;
    match format {
        Format::Csv => measure::write_csv(&mut w, &entries)?,
        Format::Json => {
            measure::write_json(&mut w, &entries)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    let failed: Vec<&SweepEntry> = entries.iter().filter(|e| e.error.is_some()).collect();
    for e in &failed {
        eprintln!("L={}: {}", e.l, e.error.as_deref().unwrap_or_default());
    }
    if let Some(order) = order {
        match measure::extrapolate(&measure::records(&entries), order) {
            Ok(x) => eprintln!("b_inf = {:.6} (order {order}, spread {:.2e})", x.b_inf, x.spread),
            Err(e) => eprintln!("no extrapolation: {e}"),
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("{} of {} sizes failed", failed.len(), entries.len())))
    }
}

fn cmd_extrapolate(input: &PathBuf, order: usize, format: Format) -> Result<(), Failure> {
    let file = File::open(input).map_err(|e| Failure::Io(format!("{}: {e}", input.display())))?;
    let records = measure::read_csv(file)?;
    let fit = measure::extrapolate(&records, order)?;
    let mut out = io::stdout().lock();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&fit).map_err(Error::from)?)?,
        Format::Csv => {
            writeln!(out, "order,b_inf")?;
            for (k, b) in &fit.per_order {
                writeln!(out, "{k},{}", measure::format_sig(*b))?;
            }
        }
    }
    Ok(())
}

fn cmd_predict(json: bool) -> Result<(), Failure> {
    let p = coulomb::predictions()?;
    let harmonic_gap = (2.0 / p.b_bulk_dense - (1.0 / p.b_chiral_percolation + 1.0 / p.b_chiral_polymers)).abs();
    let mut out = io::stdout().lock();
    if json {
        let value = serde_json::json!({
            "predictions": p,
            "harmonic_relation_residual": harmonic_gap,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&value).map_err(Error::from)?)?;
    } else {
        writeln!(out, "b_bulk   percolation  {:>10.6}", p.b_bulk_dense)?;
        writeln!(out, "b_bulk   polymers     {:>10.6}", p.b_bulk_dilute)?;
        writeln!(out, "b_chiral percolation  {:>10.6}", p.b_chiral_percolation)?;
        writeln!(out, "b_chiral polymers     {:>10.6}", p.b_chiral_polymers)?;
        writeln!(out, "2/b_bulk - 1/b_perco - 1/b_poly = {harmonic_gap:.3e}")?;
    }
    Ok(())
}

fn cmd_check(model: ModelKind, sizes: &[String], json: bool) -> Result<(), Failure> {
    let sizes = parse_sizes(sizes)?;
    let mut failures = 0usize;
    let mut all = Vec::new();
    let mut out = io::stdout().lock();
    for l in sizes {
        let spec = make_spec(model, l)?;
        for c in checks::suite(&spec)? {
            if !c.passed {
                failures += 1;
            }
            if !json {
                writeln!(
                    out,
                    "{} {model} L={l} {:<28} worst={:.3e} tol={:.1e}  {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.worst,
                    c.tolerance,
                    c.detail
                )?;
            }
            all.push((l, c));
        }
    }
    if json {
        let rows: Vec<_> = all
            .iter()
            .map(|(l, c)| serde_json::json!({ "kind": model, "L": l, "check": c }))
            .collect();
        writeln!(out, "{}", serde_json::to_string_pretty(&rows).map_err(Error::from)?)?;
    }
    if failures == 0 {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("{failures} check(s) failed")))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Measure {
            model,
            sizes,
            order,
            out,
            format,
        } => cmd_measure(*model, sizes, *order, out, *format),
        Command::Extrapolate { input, order, format } => cmd_extrapolate(input, *order, *format),
        Command::Predict { json } => cmd_predict(*json),
        Command::Check { model, sizes, json } => cmd_check(*model, sizes, *json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_IO)
        }
    }
}
