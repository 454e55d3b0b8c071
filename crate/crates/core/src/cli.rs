//! Command-line front end. Every subcommand writes data files only; plotting
//! is left to external tools.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianEnsemble, GAMMA_MAX};
use crate::grid::{divergence, PhaseGrid, ScalarField, VectorField};
use crate::io::{self, FieldFileV1, FieldParams, OrbitFileV1};
use crate::models::{harper_model, model_by_name};
use crate::oracle::{self, VerifyConfig, NU2S};
use crate::orbit::classify_and_trace;
use crate::td::{beta_range, thermo_curve, TdEnsemble};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const THREADS_ENV: &str = "WIGNER_FLOW_THREADS";

#[derive(Debug, Parser)]
#[command(name = "wigner-flow", version, about = "Wigner phase-space flows of separable Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify and trace classical orbits at the given energies.
    Classical(ClassicalArgs),
    /// Thermal Wigner function, currents and quantifiers on a grid.
    TdField(TdFieldArgs),
    /// Partition functions, purity, energy and heat capacity against beta.
    TdThermo(TdThermoArgs),
    /// Gaussian-ensemble fields on the Harper cell.
    GaussianField(GaussianFieldArgs),
    /// Run every oracle check; exits 1 if any fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    #[arg(long, default_value = "harper")]
    pub model: String,
    #[arg(long, default_value_t = 1.0)]
    pub nu2: f64,
    /// Comma-separated energies.
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    pub energies: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TdFieldArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu2: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TdThermoArgs {
    #[arg(long, default_value_t = 0.02)]
    pub beta_min: f64,
    /// The second-order partition function turns negative at large beta for
    /// strong potentials, and purity needs it at twice the largest beta.
    #[arg(long, default_value_t = 1.0)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Comma-separated; one file per value when more than one is given.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub nu2: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GaussianFieldArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu2: f64,
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Also write the full report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Finest grid of the Green's-theorem refinement (4m + 1 points).
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
}

/// Errors caused by the arguments rather than by the computation.
fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParameter { .. }
            | Error::OutOfRange { .. }
            | Error::InvalidGrid(_)
            | Error::AxisTooShort { .. }
            | Error::ModelMismatch { .. }
            | Error::NoHermiteReduction(_)
    )
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let result = match cli.command {
        Command::Classical(a) => cmd_classical(&a).map(|_| EXIT_OK),
        Command::TdField(a) => cmd_td_field(&a).map(|_| EXIT_OK),
        Command::TdThermo(a) => cmd_td_thermo(&a).map(|_| EXIT_OK),
        Command::GaussianField(a) => cmd_gaussian_field(&a).map(|_| EXIT_OK),
        Command::Verify(a) => cmd_verify(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

pub fn main() -> ! {
    std::process::exit(run(std::env::args_os()))
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidParameter { name: "WIGNER_FLOW_THREADS", reason: format!("'{raw}' is not a positive integer") })?;
    // a second call in the same process (tests) finds the pool already built
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn cmd_classical(a: &ClassicalArgs) -> Result<()> {
    let model = model_by_name(&a.model, a.nu2)?;
    let nu2 = model.require_harper()?;
    if a.energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidParameter { name: "energies", reason: "must be finite".into() });
    }
    let orbits = a.energies.iter().map(|&e| classify_and_trace(&model, e)).collect::<Result<Vec<_>>>()?;
    for o in &orbits {
        println!("energy {}: {:?}, {} points, drift {:.2e}", o.energy, o.branch, o.polyline.len(), o.max_energy_error);
    }
    io::write_orbits(&a.out, &OrbitFileV1::new(model.name(), nu2, orbits))
}

/// `w0`, `w_st2`, the corrected current, its grid divergence and the
/// second-order `∇·w` on the Harper cell.
pub fn td_fields(beta: f64, nu2: f64, points: usize) -> Result<Vec<FieldFileV1>> {
    let grid = PhaseGrid::harper(points)?;
    let ens = TdEnsemble::new(harper_model(nu2)?, beta)?;
    ens.z_corrected()?;
    let params = FieldParams { model: "harper".into(), beta: Some(beta), gamma: None, nu2: Some(nu2) };
    let current = VectorField::try_from_fn(&grid, |x, k| ens.corrected_currents(x, k))?;
    Ok(vec![
        FieldFileV1::scalar("w0", &ScalarField::from_fn(&grid, |x, k| ens.w0(x, k))?, params.clone()),
        FieldFileV1::scalar("w_st2", &ScalarField::try_from_fn(&grid, |x, k| ens.w_st2(x, k))?, params.clone()),
        FieldFileV1::scalar("div_J", &divergence(&current)?, params.clone()),
        FieldFileV1::vector("current", &current, params.clone()),
        FieldFileV1::scalar("div_w", &ScalarField::from_fn(&grid, |x, k| ens.td_div_w(x, k))?, params),
    ])
}

pub fn cmd_td_field(a: &TdFieldArgs) -> Result<()> {
    let fields = td_fields(a.beta, a.nu2, a.grid)?;
    io::write_fields(&a.out, &fields)?;
    println!("wrote {} fields on a {}x{} grid to {}", fields.len(), a.grid, a.grid, a.out.display());
    Ok(())
}

/// `out` unchanged for a single value, otherwise `stem_nu2-<value>.ext`.
pub fn thermo_path(out: &Path, nu2: f64, several: bool) -> PathBuf {
    if !several {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_nu2-{nu2}.{}", ext.to_string_lossy()),
        None => format!("{stem}_nu2-{nu2}"),
    };
    out.with_file_name(name)
}

pub fn cmd_td_thermo(a: &TdThermoArgs) -> Result<()> {
    let betas = beta_range(a.beta_min, a.beta_max, a.steps)?;
    let nu2s = a.nu2.clone().unwrap_or_else(|| NU2S.to_vec());
    let several = nu2s.len() > 1;
    for &nu2 in &nu2s {
        let curve = thermo_curve(&harper_model(nu2)?, &betas)?;
        let path = thermo_path(&a.out, nu2, several);
        io::write_thermo_file(&path, &curve)?;
        println!("nu2 {nu2}: {} rows to {}", betas.len(), path.display());
    }
    Ok(())
}

/// `g_gamma`, erf currents, their divergence, the velocity and `∇·w`.
pub fn gaussian_fields(gamma: f64, nu2: f64, points: usize) -> Result<Vec<FieldFileV1>> {
    if !(gamma > 0.0 && gamma <= GAMMA_MAX) {
        return Err(Error::OutOfRange { what: "gamma", value: gamma, range: "(0, 4]" });
    }
    let grid = PhaseGrid::harper(points)?;
    let ens = GaussianEnsemble::harper(gamma, nu2)?;
    let params = FieldParams { model: "harper".into(), beta: None, gamma: Some(gamma), nu2: Some(nu2) };
    let div_j = ScalarField::try_from_fn(&grid, |x, k| ens.div_closed(x, k).map(|(a, b)| a + b))?;
    Ok(vec![
        FieldFileV1::scalar("g_gamma", &ScalarField::from_fn(&grid, |x, k| ens.g_gamma(x, k))?, params.clone()),
        FieldFileV1::vector("current", &VectorField::try_from_fn(&grid, |x, k| ens.currents_erf(x, k))?, params.clone()),
        FieldFileV1::scalar("div_J", &div_j, params.clone()),
        FieldFileV1::vector("w", &VectorField::try_from_fn(&grid, |x, k| ens.velocity_field(x, k))?, params.clone()),
        FieldFileV1::scalar("div_w", &ScalarField::try_from_fn(&grid, |x, k| ens.gaussian_div_w(x, k))?, params),
    ])
}

pub fn cmd_gaussian_field(a: &GaussianFieldArgs) -> Result<()> {
    let fields = gaussian_fields(a.gamma, a.nu2, a.grid)?;
    io::write_fields(&a.out, &fields)?;
    println!("wrote {} fields on a {}x{} grid to {}", fields.len(), a.grid, a.grid, a.out.display());
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let config = VerifyConfig { greens_points: a.grid, ..VerifyConfig::default() };
    let report = oracle::run_all(&config)?;
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status} {:<22} {:.3e} <= {:.1e} ({})", c.name, c.max_abs_error, c.tolerance, c.metric);
        if !c.passed {
            for o in &c.details {
                println!("     {} at ({}, {}): {} vs {}", o.label, o.x, o.k, o.computed, o.reference);
            }
        }
    }
    for d in &report.diagnostics {
        println!("info {:<32} {:.3e}  {}", d.name, d.value, d.description);
    }
    if let Some(path) = &a.json {
        io::write_json(path, &report)?;
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_FAILURE })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermo_paths() {
        let p = Path::new("/tmp/out/thermo.csv");
        assert_eq!(thermo_path(p, 2.0, false), p);
        assert_eq!(thermo_path(p, 2.0, true), Path::new("/tmp/out/thermo_nu2-2.csv"));
        assert_eq!(thermo_path(Path::new("t"), 0.5, true), Path::new("t_nu2-0.5"));
    }

    #[test]
    fn bad_flags_are_usage_errors() {
        assert_eq!(run(["wigner-flow", "classical", "--nu2", "x", "--energies", "1", "--out", "o"]), EXIT_USAGE);
        assert_eq!(run(["wigner-flow", "nonsense"]), EXIT_USAGE);
        assert_eq!(run(["wigner-flow", "gaussian-field", "--gamma", "5", "--out", "o.json"]), EXIT_USAGE);
        assert_eq!(run(["wigner-flow", "td-thermo", "--beta-min", "2", "--beta-max", "1", "--out", "o"]), EXIT_USAGE);
        assert_eq!(run(["wigner-flow", "--help"]), EXIT_OK);
    }

    #[test]
    fn negative_energies_parse() {
        let cli = Cli::try_parse_from(["wigner-flow", "classical", "--energies", "-1.5,0,2", "--out", "o"]).unwrap();
        match cli.command {
            Command::Classical(a) => assert_eq!(a.energies, vec![-1.5, 0.0, 2.0]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn td_field_set_has_expected_names() {
        let names: Vec<String> = td_fields(0.1, 1.0, 21).unwrap().into_iter().map(|f| f.field_name).collect();
        assert_eq!(names, ["w0", "w_st2", "div_J", "current", "div_w"]);
    }

    #[test]
    fn gaussian_field_set_has_expected_names() {
        let names: Vec<String> = gaussian_fields(1.0, 1.0, 21).unwrap().into_iter().map(|f| f.field_name).collect();
        assert_eq!(names, ["g_gamma", "current", "div_J", "w", "div_w"]);
    }
}
