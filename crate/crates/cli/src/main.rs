use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use billiard_core::beam::{conjugate_scan, default_profile};
use billiard_core::billmap::{caustic_parameter, trace_orbit, OrbitRow};
use billiard_core::suite::{run_suite, Suite};
use billiard_core::supportfn::{validate_table, VALIDATION_GRID};
use billiard_core::wirtinger::{table_integrals, DEFAULT_GRID};
use billiard_core::{BilliardError, BoundaryCoord, SupportSpec, TableJson};
use clap::{Parser, Subcommand};
use serde::Serialize;

const EXIT_FAILED: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_GRAZING: u8 = 3;
const EXIT_UNSUPPORTED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "billiard",
    version,
    about = "Convex billiard tables given by support functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect table descriptions.
    Table {
        #[command(subcommand)]
        action: TableAction,
    },
    /// Iterate the billiard map and write the trace as CSV.
    Orbit {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        psi0: f64,
        #[arg(long)]
        delta0: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run verification checks and print one JSON report per check.
    Verify {
        spec: PathBuf,
        /// twist, symplectic, poncelet, orthoptic, relations or all
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Evaluate the integral identities for an ellipse or profile table.
    Integral {
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        n: usize,
    },
    /// Look for conjugate points from seeded random starts.
    BeamScan {
        spec: PathBuf,
        #[arg(long, default_value_t = 256)]
        starts: usize,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TableAction {
    /// Check support positivity, curvature, central symmetry and profile modes.
    Validate {
        spec: PathBuf,
        #[arg(long, default_value_t = VALIDATION_GRID)]
        grid: usize,
        #[arg(long, default_value_t = 1e-9)]
        symmetry_tol: f64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<BilliardError> for Failure {
    fn from(e: BilliardError) -> Self {
        let code = match e {
            BilliardError::GrazingRay { .. } => EXIT_GRAZING,
            BilliardError::UnsupportedRepresentation(_) => EXIT_UNSUPPORTED,
            _ => EXIT_FAILED,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_FAILED, e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(cli.command));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(f) => {
            eprintln!("billiard: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("BILLIARD_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::new(
            EXIT_PARSE,
            format!("BILLIARD_THREADS={raw:?} is not a positive integer"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::new(EXIT_FAILED, e.to_string()))
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Table {
            action:
                TableAction::Validate {
                    spec,
                    grid,
                    symmetry_tol,
                },
        } => {
            let json = read_table(&spec)?;
            let report = validate_table(&json, grid, symmetry_tol);
            print_json(&report)?;
            for e in &report.errors {
                eprintln!("billiard: {e}");
            }
            Ok(report.passed())
        }
        Command::Orbit {
            spec,
            psi0,
            delta0,
            steps,
            out,
        } => orbit(&spec, psi0, delta0, steps, &out),
        Command::Verify {
            spec,
            suite,
            grid,
            tol,
        } => {
            let (_, table) = load_table(&spec)?;
            let reports = run_suite(&table, suite, grid, tol)?;
            print_json(&reports)?;
            Ok(reports.iter().all(|r| r.pass))
        }
        Command::Integral { spec, n } => {
            let (_, table) = load_table(&spec)?;
            let report = table_integrals(&table, n)?;
            print_json(&report)?;
            for c in &report.checks {
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                eprintln!(
                    "{verdict} {:<32} residual={:.3e} tolerance={:.3e}",
                    c.name, c.residual, c.tolerance
                );
            }
            Ok(report.passed())
        }
        Command::BeamScan {
            spec,
            starts,
            max_steps,
            seed,
            out,
        } => {
            let (json, table) = load_table(&spec)?;
            let mut report = conjugate_scan(
                &table,
                default_profile(&table).as_ref(),
                starts,
                max_steps,
                seed,
            );
            report.table = Some(json);
            match out {
                Some(path) => {
                    let mut w = BufWriter::new(fs::File::create(path)?);
                    serde_json::to_writer_pretty(&mut w, &report).map_err(io::Error::from)?;
                    writeln!(w)?;
                    w.flush()?;
                }
                None => print_json(&report)?,
            }
            Ok(true)
        }
    }
}

fn read_table(path: &Path) -> Result<TableJson, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

/// Parse and validate (positive support and curvature) a table description.
fn load_table(path: &Path) -> Result<(TableJson, SupportSpec), Failure> {
    let json = read_table(path)?;
    let spec = SupportSpec::try_from(&json)?;
    spec.validate(VALIDATION_GRID)?;
    Ok((json, spec))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

fn orbit(path: &Path, psi0: f64, delta0: f64, steps: usize, out: &Path) -> Outcome {
    let (_, spec) = load_table(path)?;
    let (rows, failure) = trace_orbit(
        &spec,
        BoundaryCoord {
            psi: psi0,
            delta: delta0,
        },
        steps,
    );
    let mut w = BufWriter::new(fs::File::create(out)?);
    writeln!(w, "step,psi,delta,p,phi,x,y")?;
    for r in &rows {
        write_row(&mut w, r)?;
    }
    if let SupportSpec::Ellipse { a, b } = spec {
        if let Some(first) = rows.first() {
            let line = |r: &OrbitRow| billiard_core::LineCoord { p: r.p, phi: r.phi };
            let lambda0 = caustic_parameter(a, b, line(first));
            let drift = rows
                .iter()
                .map(|r| (caustic_parameter(a, b, line(r)) - lambda0).abs())
                .fold(0.0, f64::max);
            writeln!(w, "# lambda_drift={drift:.16e}")?;
        }
    }
    w.flush()?;
    match failure {
        None => Ok(true),
        Some(e) => Err(Failure::from(e)),
    }
}

fn write_row(w: &mut impl Write, r: &OrbitRow) -> io::Result<()> {
    writeln!(
        w,
        "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        r.step, r.psi, r.delta, r.p, r.phi, r.x, r.y
    )
}
