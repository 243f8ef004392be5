//! Command-line front end.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::experiments::Suite;
use crate::grid::Grid;
use crate::medium::{scattered_far_field, solve_ls, Method, SolveOptions};
use crate::point::Point;
use crate::scene::{ItpSpec, SceneSpec};
use crate::source::{far_field, solve_field};
use crate::transmission::{find_eigenvalues, write_table};
use crate::verify::{run_check, Check};

type C = Complex64;

pub const THREADS_VAR: &str = "INVISISCAT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "invisiscat", version, about = "Helmholtz source and medium scattering toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Far field and near-field samples of a source scene.
    Source {
        scene: PathBuf,
        #[arg(long)]
        fields: Option<PathBuf>,
        #[arg(long)]
        farfield: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        dirs: usize,
        /// Field samples per axis over the padded bounding box.
        #[arg(long, default_value_t = 33)]
        field_samples: usize,
    },
    /// Lippmann-Schwinger solve of a medium scene.
    Medium {
        scene: PathBuf,
        #[arg(long)]
        fields: Option<PathBuf>,
        #[arg(long)]
        farfield: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        dirs: usize,
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Radial transmission eigenvalue table.
    Teig {
        itp: PathBuf,
        #[arg(long)]
        kmax: f64,
        /// Angular modes `0..modes`.
        #[arg(long, default_value_t = 4)]
        modes: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form CGO integrals against the quadrature oracle.
    CgoVerify {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Runs an experiment suite; the config defaults to `{}`.
    Experiment {
        suite: String,
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Neumann,
    Gmres,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Neumann => Method::Neumann,
            MethodArg::Gmres => Method::Gmres,
        }
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    AssertionFailed,
}

pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(r: &Result<Outcome>) -> i32 {
    match r {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::AssertionFailed) => EXIT_ASSERTION,
        Err(e) if e.is_config_error() || matches!(e, Error::Io(_)) => EXIT_CONFIG,
        Err(_) => EXIT_NUMERICAL,
    }
}

/// Caps the global worker pool from the environment.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| Error::Config(format!("{THREADS_VAR} must be a positive integer, got '{v}'")))?;
    if n == 0 {
        return Err(Error::Config(format!("{THREADS_VAR} must be positive")));
    }
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?))
}

fn coord_names(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

/// One row per point: coordinates, then `(re, im)` for every column of `values`.
fn write_samples(out: impl Write, dim: usize, points: &[Point], names: &[&str], values: &[&[C]]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = coord_names(dim);
    for n in names {
        header.push(format!("{n}_re"));
        header.push(format!("{n}_im"));
    }
    w.write_record(&header)?;
    for (i, p) in points.iter().enumerate() {
        let mut rec: Vec<String> = p[..dim].iter().map(|x| x.to_string()).collect();
        for col in values {
            rec.push(col[i].re.to_string());
            rec.push(col[i].im.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_source(scene: &Path, fields: Option<&Path>, farfield: Option<&Path>, dirs: usize, samples: usize) -> Result<Outcome> {
    let spec = SceneSpec::from_json(&read(scene)?)?;
    let scene = spec.source_scene()?;
    let ff = far_field(&scene, dirs)?;
    if let Some(path) = farfield {
        ff.write_csv(create(path)?)?;
    }
    if let Some(path) = fields {
        if samples < 2 {
            return Err(Error::Config("--field-samples must be at least 2".into()));
        }
        let (lo, hi) = scene.domain.bounding_box();
        let dim = scene.dim();
        let pad = 0.25 * scene.domain.diameter();
        let mut origin = [0.0; 3];
        let mut shape = [1; 3];
        let spacing = (0..dim).map(|i| hi[i] - lo[i] + 2.0 * pad).fold(0.0, f64::max) / (samples - 1) as f64;
        for i in 0..dim {
            origin[i] = 0.5 * (lo[i] + hi[i]) - 0.5 * spacing * (samples - 1) as f64;
            shape[i] = samples;
        }
        let grid = Grid::new(dim, origin, spacing, shape)?;
        let points: Vec<Point> = grid.points().collect();
        let u = solve_field(&scene, &points)?;
        write_samples(create(path)?, dim, &points, &["u"], &[&u])?;
    }
    println!("far field sup {:.6e} l2 {:.6e}", ff.sup_norm(), ff.l2_norm());
    Ok(Outcome::Pass)
}

#[allow(clippy::too_many_arguments)]
fn cmd_medium(
    scene: &Path,
    fields: Option<&Path>,
    farfield: Option<&Path>,
    dirs: usize,
    spacing: Option<f64>,
    tol: Option<f64>,
    method: MethodArg,
) -> Result<Outcome> {
    let spec = SceneSpec::from_json(&read(scene)?)?;
    let scene = spec.medium_scene()?;
    let mut opts = SolveOptions::for_scene(&scene);
    if let Some(h) = spacing {
        if !(h > 0.0) {
            return Err(Error::Config(format!("--spacing must be positive, got {h}")));
        }
        opts.spacing = h;
    }
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(Error::Config(format!("--tol must be positive, got {t}")));
        }
        opts.tol = t;
    }
    opts.method = method.into();
    let sol = solve_ls(&scene, &opts)?;
    let ff = scattered_far_field(&scene, &sol, dirs)?;
    if let Some(path) = farfield {
        ff.write_csv(create(path)?)?;
    }
    if let Some(path) = fields {
        let points: Vec<Point> = sol.grid.points().collect();
        let s = sol.scattered();
        write_samples(create(path)?, scene.dim(), &points, &["total", "scattered"], &[&sol.total, &s])?;
    }
    println!(
        "far field sup {:.6e} l2 {:.6e}; {} iterations ({:?}{})",
        ff.sup_norm(),
        ff.l2_norm(),
        sol.log.residuals.len(),
        sol.log.method,
        if sol.log.fell_back { ", after Neumann fallback" } else { "" }
    );
    Ok(Outcome::Pass)
}

fn cmd_teig(itp: &Path, kmax: f64, modes: u32, out: Option<&Path>) -> Result<Outcome> {
    let itp = ItpSpec::from_json(&read(itp)?)?.build()?;
    let modes: Vec<u32> = (0..modes).collect();
    let pairs = find_eigenvalues(&itp, kmax, &modes)?;
    match out {
        Some(path) => write_table(&pairs, create(path)?)?,
        None => write_table(&pairs, std::io::stdout().lock())?,
    }
    Ok(Outcome::Pass)
}

fn cmd_cgo_verify(n: usize, samples: usize, tol: f64, seed: u64) -> Result<Outcome> {
    if !(n == 2 || n == 3) {
        return Err(Error::Config(format!("--n must be 2 or 3, got {n}")));
    }
    let mut outcome = Outcome::Pass;
    for check in Check::ALL {
        let s = run_check(check, n, samples, tol, seed)?;
        println!("{}", serde_json::to_string(&s)?);
        if !s.passed() {
            outcome = Outcome::AssertionFailed;
        }
    }
    Ok(outcome)
}

fn cmd_experiment(suite: &str, config: Option<&Path>, out: &Path) -> Result<Outcome> {
    let suite = Suite::from_name(suite)?;
    let config = match config {
        Some(p) => read(p)?,
        None => "{}".into(),
    };
    let report = suite.run_json(&config)?;
    fs::create_dir_all(out).map_err(|e| Error::Config(format!("{}: {e}", out.display())))?;
    report.write_csv(create(&out.join(format!("{}.csv", suite.name())))?)?;
    let summary = report.summary_json()?;
    let mut f = create(&out.join(format!("{}_summary.json", suite.name())))?;
    writeln!(f, "{summary}")?;
    println!("{summary}");
    Ok(if report.passed() { Outcome::Pass } else { Outcome::AssertionFailed })
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    init_threads()?;
    match &cli.command {
        Command::Source { scene, fields, farfield, dirs, field_samples } => {
            cmd_source(scene, fields.as_deref(), farfield.as_deref(), *dirs, *field_samples)
        }
        Command::Medium { scene, fields, farfield, dirs, spacing, tol, method } => {
            cmd_medium(scene, fields.as_deref(), farfield.as_deref(), *dirs, *spacing, *tol, *method)
        }
        Command::Teig { itp, kmax, modes, out } => cmd_teig(itp, *kmax, *modes, out.as_deref()),
        Command::CgoVerify { n, samples, tol, seed } => cmd_cgo_verify(*n, *samples, *tol, *seed),
        Command::Experiment { suite, config, out } => cmd_experiment(suite, config.as_deref(), out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Ok(Outcome::Pass)), 0);
        assert_eq!(exit_code(&Ok(Outcome::AssertionFailed)), 1);
        assert_eq!(exit_code(&Err(Error::Config("x".into()))), 2);
        assert_eq!(exit_code(&Err(Error::NotContractive { iterations: 1, residual: 1.0 })), 3);
    }

    #[test]
    fn sample_csv_layout() {
        let mut buf = vec![];
        let v = [C::new(1.0, -2.0)];
        write_samples(&mut buf, 2, &[[0.5, 0.25, 0.0]], &["u"], &[&v]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x1,x2,u_re,u_im\n0.5,0.25,1,-2\n");
    }
}
