//! The `nhvqe` command line: Lorenz equilibria, eigenvalues and singular
//! values of matrix files, and heatmap scans.
//!
//! Exit codes: 0 complete, 2 incomplete spectrum, 64 usage, 65 bad input
//! file, 70 solver failure, 74 I/O.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use nhvqe::heatmap::{scan, write_grid_file, Engine, HeatmapRequest};
use nhvqe::linalg::{Complex, ComplexMatrix};
use nhvqe::lorenz::{equilibria, equilibrium, jacobian, Branch, EquilibriumPoint, LorenzParams};
use nhvqe::matrix_file::{parse_matrix, parse_real};
use nhvqe::oracle::{eig_reference, svd_reference};
use nhvqe::proxy::default_pad;
use nhvqe::spectrum::{
    find_singular_values, find_spectrum, search_bounds, SpectrumConfig, SpectrumReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCOMPLETE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INPUT: i32 = 65;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

/// Largest matrix dimension accepted without `--capacity`: three qubits.
pub const DEFAULT_CAPACITY: usize = 8;
const DEFAULT_HEATMAP_RE: usize = 81;
const DEFAULT_HEATMAP_IM: usize = 25;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Input(_) => EXIT_INPUT,
            Self::Solver(_) => EXIT_SOFTWARE,
            Self::Io(_) => EXIT_IO,
        }
    }
}

impl From<nhvqe::Error> for CliError {
    fn from(e: nhvqe::Error) -> Self {
        match e {
            nhvqe::Error::Shape(_) | nhvqe::Error::Domain(_) => Self::Usage(e.to_string()),
            nhvqe::Error::Input(_) => Self::Input(e.to_string()),
            nhvqe::Error::Io(_) => Self::Io(e.to_string()),
            nhvqe::Error::Convergence { .. } => Self::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "nhvqe",
    version,
    about = "Eigenvalues of non-Hermitian matrices with a simulated variational eigensolver",
    after_help = "Exit codes: 0 complete, 2 incomplete spectrum, 64 usage, 65 bad input file, 70 solver failure, 74 I/O."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectra and stability of Lorenz equilibria.
    Lorenz(LorenzArgs),
    /// Eigenvalues of a square matrix file.
    Eigs(MatrixArgs),
    /// Singular values of a matrix file.
    Svd(MatrixArgs),
    /// Scan the inner minimum over a rectangle of shifts and write CSV.
    Heatmap(HeatmapArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Point {
    Trivial,
    Plus,
    Minus,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Vqe,
    Exact,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Inner (circuit angle) learning rate.
    #[arg(long)]
    inner_lr: Option<f64>,
    /// Outer (shift) learning rate.
    #[arg(long)]
    outer_lr: Option<f64>,
    /// Random restarts of the cold inner solve.
    #[arg(long)]
    restarts: Option<usize>,
    /// Residual below which an estimate counts as an eigenvalue.
    #[arg(long)]
    accept_tol: Option<f64>,
    /// Estimates closer than this are merged.
    #[arg(long)]
    dedup_radius: Option<f64>,
    /// Penalty on the padded basis states.
    #[arg(long)]
    pad_d: Option<f64>,
    /// Largest accepted matrix dimension.
    #[arg(long, default_value_t = DEFAULT_CAPACITY)]
    capacity: usize,
}

#[derive(Debug, Args)]
struct LorenzFlags {
    #[arg(long, default_value = "10", value_parser = real)]
    sigma: f64,
    #[arg(long, value_parser = real)]
    rho: Option<f64>,
    /// Decimal or fraction, e.g. 8/3.
    #[arg(long, default_value = "8/3", value_parser = real)]
    beta: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct LorenzArgs {
    #[command(flatten)]
    lorenz: LorenzFlags,
    #[arg(long, value_enum, default_value_t = Point::All)]
    point: Point,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    /// JSON file `{"rows": [[[re, im], ...], ...]}`.
    #[arg(long)]
    matrix: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct HeatmapArgs {
    /// Matrix file; without it the Lorenz flags pick a Jacobian.
    #[arg(long, conflicts_with = "rho")]
    matrix: Option<PathBuf>,
    #[command(flatten)]
    lorenz: LorenzFlags,
    /// Equilibrium whose Jacobian is scanned.
    #[arg(long, value_enum, default_value_t = Point::Trivial)]
    point: Point,
    #[arg(long, value_parser = real)]
    re_min: Option<f64>,
    #[arg(long, value_parser = real)]
    re_max: Option<f64>,
    #[arg(long, value_parser = real)]
    im_min: Option<f64>,
    #[arg(long, value_parser = real)]
    im_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_HEATMAP_RE)]
    re_count: usize,
    #[arg(long, default_value_t = DEFAULT_HEATMAP_IM)]
    im_count: usize,
    /// Defaults to exact above 400 cells, vqe otherwise.
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

fn real(s: &str) -> std::result::Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let result = match cli.command {
        Command::Lorenz(a) => cmd_lorenz(&a, out),
        Command::Eigs(a) => cmd_eigs(&a, out),
        Command::Svd(a) => cmd_svd(&a, out),
        Command::Heatmap(a) => cmd_heatmap(&a, out),
    };
    match result {
        Ok(complete) => {
            if complete {
                EXIT_OK
            } else {
                EXIT_INCOMPLETE
            }
        }
        Err(e) => {
            let _ = writeln!(err, "nhvqe: {e}");
            e.exit_code()
        }
    }
}

impl RunArgs {
    fn spectrum_config(&self) -> CliResult<SpectrumConfig> {
        let mut cfg = SpectrumConfig::default();
        cfg.inner.rng_seed = self.seed;
        cfg.outer.rng_seed = self.seed;
        if let Some(lr) = self.inner_lr {
            cfg.inner.learning_rate = lr;
        }
        if let Some(lr) = self.outer_lr {
            cfg.outer.learning_rate = lr;
        }
        if let Some(r) = self.restarts {
            cfg.inner.restarts = r;
        }
        cfg.inner.validate()?;
        cfg.outer.validate()?;
        for (name, v) in [
            ("--accept-tol", self.accept_tol),
            ("--dedup-radius", self.dedup_radius),
            ("--pad-d", self.pad_d),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
                }
            }
        }
        cfg.accept_tol = self.accept_tol;
        cfg.dedup_radius = self.dedup_radius;
        Ok(cfg)
    }

    fn check_capacity(&self, dim: usize) -> CliResult<()> {
        if dim > self.capacity {
            return Err(CliError::Usage(format!(
                "dimension {dim} exceeds the capacity {} (raise it with --capacity)",
                self.capacity
            )));
        }
        Ok(())
    }

    /// Spectrum over the default search grid.
    fn spectrum(&self, m: &ComplexMatrix) -> CliResult<SpectrumReport> {
        self.check_capacity(m.n_rows())?;
        let cfg = self.spectrum_config()?;
        let grid = search_bounds(m)?;
        let d = self.pad_d.unwrap_or_else(|| default_pad(m, grid.radius()));
        Ok(find_spectrum(m, &grid, &cfg, d)?)
    }
}

impl LorenzFlags {
    fn params(&self) -> CliResult<LorenzParams> {
        let rho = self
            .rho
            .ok_or_else(|| CliError::Usage("--rho is required".into()))?;
        Ok(LorenzParams::new(self.sigma, rho, self.beta)?)
    }
}

fn select_points(p: &LorenzParams, point: Point) -> CliResult<Vec<EquilibriumPoint>> {
    let branch = match point {
        Point::All => return Ok(equilibria(p)),
        Point::Trivial => Branch::Trivial,
        Point::Plus => Branch::PlusBranch,
        Point::Minus => Branch::MinusBranch,
    };
    equilibrium(p, branch).map(|e| vec![e]).ok_or_else(|| {
        CliError::Usage(format!(
            "the {branch} equilibrium exists only for rho > 1 (got rho = {})",
            p.rho()
        ))
    })
}

fn read_matrix(path: &Path) -> CliResult<ComplexMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

// six decimals; an imaginary part that rounds to zero is dropped
fn fmt_complex(z: Complex) -> String {
    if z.im.abs() < 5e-7 {
        format!("{:.6}", z.re)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{:.6}{sign}{:.6}i", z.re, z.im.abs())
    }
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn write_matrix_table(out: &mut dyn Write, m: &ComplexMatrix) -> CliResult<()> {
    for row in m.to_rows() {
        let cells: Vec<String> = row.iter().map(|&z| format!("{:>12}", fmt_complex(z))).collect();
        writeln!(out, "  [{} ]", cells.join(""))?;
    }
    Ok(())
}

fn write_spectrum_table(
    out: &mut dyn Write,
    report: &SpectrumReport,
    oracle: &[Complex],
) -> CliResult<()> {
    writeln!(out, "  {:<28}{:<12}{:<28}", "vqe", "residual", "oracle")?;
    let rows = report.estimates.len().max(oracle.len());
    for k in 0..rows {
        let (value, residual) = match report.estimates.get(k) {
            Some(e) => {
                let mark = if e.conjugate_completed { " (conj)" } else { "" };
                (format!("{}{mark}", fmt_complex(e.value)), format!("{:.1e}", e.residual))
            }
            None => ("-".to_owned(), "-".to_owned()),
        };
        let reference = oracle.get(k).map_or_else(|| "-".to_owned(), |&z| fmt_complex(z));
        writeln!(out, "  {value:<28}{residual:<12}{reference:<28}")?;
    }
    let status = if report.complete { "complete" } else { "incomplete" };
    writeln!(
        out,
        "  {status}: {} of {} values from {} starts",
        report.estimates.len(),
        report.matrix_dim,
        report.starts_used
    )?;
    if report.flagged > 0 {
        writeln!(out, "  {} estimates discarded as pseudospectral", report.flagged)?;
    }
    if let Some(note) = &report.note {
        writeln!(out, "  note: {note}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PointReport {
    branch: Branch,
    coords: [f64; 3],
    jacobian: Vec<Vec<Complex>>,
    spectrum: SpectrumReport,
    oracle: Vec<Complex>,
}

fn cmd_lorenz(a: &LorenzArgs, out: &mut dyn Write) -> CliResult<bool> {
    let p = a.lorenz.params()?;
    let mut reports = Vec::new();
    for e in select_points(&p, a.point)? {
        let j = jacobian(&p, &e);
        let spectrum = a.run.spectrum(&j)?;
        let oracle = eig_reference(&j)?.eigenvalues;
        reports.push(PointReport {
            branch: e.branch,
            coords: e.coords(),
            jacobian: j.to_rows(),
            spectrum,
            oracle,
        });
    }
    let complete = reports.iter().all(|r| r.spectrum.complete);
    match a.run.format {
        Format::Json => write_json(
            out,
            &json!({
                "command": "lorenz",
                "params": { "sigma": p.sigma(), "rho": p.rho(), "beta": p.beta() },
                "seed": a.run.seed,
                "points": reports,
                "complete": complete,
            }),
        )?,
        Format::Table => {
            writeln!(out, "lorenz sigma={} rho={} beta={}", p.sigma(), p.rho(), p.beta())?;
            for r in &reports {
                let [x, y, z] = r.coords;
                writeln!(out)?;
                writeln!(out, "{} equilibrium ({x:.6}, {y:.6}, {z:.6})", r.branch)?;
                writeln!(out, "jacobian")?;
                write_matrix_table(out, &ComplexMatrix::from_rows(&r.jacobian)?)?;
                writeln!(out, "spectrum")?;
                write_spectrum_table(out, &r.spectrum, &r.oracle)?;
                match r.spectrum.stability {
                    Some(s) => writeln!(out, "stability: {s}")?,
                    None => writeln!(out, "stability: unknown (incomplete spectrum)")?,
                }
            }
        }
    }
    Ok(complete)
}

fn cmd_eigs(a: &MatrixArgs, out: &mut dyn Write) -> CliResult<bool> {
    let m = read_matrix(&a.matrix)?;
    if !m.is_square() {
        return Err(CliError::Usage(format!(
            "eigs needs a square matrix, got {}x{}",
            m.n_rows(),
            m.n_cols()
        )));
    }
    let report = a.run.spectrum(&m)?;
    let oracle = eig_reference(&m)?.eigenvalues;
    match a.run.format {
        Format::Json => write_json(
            out,
            &json!({ "command": "eigs", "seed": a.run.seed, "report": report, "oracle": oracle }),
        )?,
        Format::Table => {
            writeln!(out, "eigenvalues of a {}x{} matrix", m.n_rows(), m.n_cols())?;
            write_spectrum_table(out, &report, &oracle)?;
        }
    }
    Ok(report.complete)
}

fn cmd_svd(a: &MatrixArgs, out: &mut dyn Write) -> CliResult<bool> {
    let m = read_matrix(&a.matrix)?;
    a.run.check_capacity(m.n_rows().min(m.n_cols()))?;
    let cfg = a.run.spectrum_config()?;
    let found = find_singular_values(&m, &cfg, a.run.pad_d)?;
    let reference = svd_reference(&m)?;
    match a.run.format {
        Format::Json => write_json(
            out,
            &json!({
                "command": "svd",
                "seed": a.run.seed,
                "shape": [m.n_rows(), m.n_cols()],
                "singular_values": found.values,
                "reference": reference,
                "complete": found.report.complete,
                "report": found.report,
            }),
        )?,
        Format::Table => {
            writeln!(out, "singular values of a {}x{} matrix", m.n_rows(), m.n_cols())?;
            writeln!(out, "  {:<20}{:<20}", "vqe", "reference")?;
            for k in 0..found.values.len().max(reference.len()) {
                let v = found.values.get(k).map_or("-".to_owned(), |x| format!("{x:.8}"));
                let r = reference.get(k).map_or("-".to_owned(), |x| format!("{x:.8}"));
                writeln!(out, "  {v:<20}{r:<20}")?;
            }
            let status = if found.report.complete { "complete" } else { "incomplete" };
            writeln!(out, "  {status}: {} of {} values", found.values.len(), reference.len())?;
        }
    }
    Ok(found.report.complete)
}

fn cmd_heatmap(a: &HeatmapArgs, out: &mut dyn Write) -> CliResult<bool> {
    let m = match &a.matrix {
        Some(path) => read_matrix(path)?,
        None => {
            let p = a.lorenz.params()?;
            if a.point == Point::All {
                return Err(CliError::Usage("heatmap scans one equilibrium; pick --point".into()));
            }
            jacobian(&p, &select_points(&p, a.point)?[0])
        }
    };
    if !m.is_square() {
        return Err(CliError::Usage(format!(
            "heatmap needs a square matrix, got {}x{}",
            m.n_rows(),
            m.n_cols()
        )));
    }
    a.run.check_capacity(m.n_rows())?;
    let bounds = search_bounds(&m)?;
    let re = (a.re_min.unwrap_or(bounds.re_min), a.re_max.unwrap_or(bounds.re_max));
    let im = (a.im_min.unwrap_or(bounds.im_min), a.im_max.unwrap_or(bounds.im_max));
    let cfg = a.run.spectrum_config()?;
    let mut req = HeatmapRequest::new(m, re, im, a.re_count, a.im_count);
    req.engine = a.engine.map(|e| match e {
        EngineArg::Vqe => Engine::Vqe,
        EngineArg::Exact => Engine::Exact,
    });
    req.pad_d = a.run.pad_d;
    req.inner = cfg.inner;
    let grid = scan(&req)?;
    write_grid_file(&grid, &a.out).map_err(|e| CliError::Io(format!("{}: {e}", a.out.display())))?;
    let (at, value) = grid.min_cell();
    let engine = match req.engine() {
        Engine::Vqe => "vqe",
        Engine::Exact => "exact",
    };
    match a.run.format {
        Format::Json => write_json(
            out,
            &json!({
                "command": "heatmap",
                "seed": a.run.seed,
                "out": a.out.display().to_string(),
                "engine": engine,
                "re_range": [re.0, re.1],
                "im_range": [im.0, im.1],
                "cells": grid.values.len(),
                "min": { "re": at.re, "im": at.im, "value": value },
            }),
        )?,
        Format::Table => {
            writeln!(
                out,
                "wrote {} ({}x{} cells, {engine} engine)",
                a.out.display(),
                a.re_count,
                a.im_count
            )?;
            writeln!(out, "minimum {value:.3e} at {}", fmt_complex(at))?;
        }
    }
    Ok(true)
}
