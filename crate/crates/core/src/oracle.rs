//! Brute-force cross-checks. Every closed form in the crate is compared against
//! a slower route that does not call it: trapezoidal quadrature against Bessel
//! functions, Hermite series against the sinh forms, finite differences
//! against analytic divergences.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianEnsemble, GaussianWigner};
use crate::grid::{
    central_derivative, divergence, loop_flux, pointwise_divergence, rectangle_loop, volume_integral, PhaseGrid,
    ScalarField, VectorField, Window,
};
use crate::models::{harmonic_model, harper_model, lotka_volterra_model, SeparableModel};
use crate::series::{self, TruncationPolicy, WignerFunction};
use crate::td::{alternate_z_corrected, harper_z_classical, harper_z_corrected, z_corrected_quadrature, TdEnsemble, TdWigner, WignerKind};

pub const BETAS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];
pub const NU2S: [f64; 4] = [FRAC_1_SQRT_2, 1.0, SQRT_2, 2.0];
pub const GAMMAS: [f64; 3] = [FRAC_1_SQRT_2, 1.0, SQRT_2];

/// Step of the pointwise finite-difference divergences.
pub const FD_STEP: f64 = 1e-3;

/// Number of worst points kept in a report.
const KEEP: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    pub label: String,
    pub x: f64,
    pub k: f64,
    pub computed: f64,
    pub reference: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    /// How `max_abs_error` is measured: `absolute`, `relative`, or a scaled
    /// variant described in `notes`.
    pub metric: String,
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub details: Vec<Offender>,
    pub notes: Vec<String>,
}

/// A measured quantity that is reported but not pass/fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub name: String,
    pub value: f64,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
    pub diagnostics: Vec<Diagnostic>,
}

pub const VERIFY_SCHEMA: &str = "wigner-flow/verify/v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    /// Points per axis of the partition-function quadrature.
    pub quadrature_points: usize,
    /// Points per axis of the series/closed-form comparison grid.
    pub series_points: usize,
    /// Finest grid of the Green's-theorem refinement; the coarser two halve
    /// the spacing twice.
    pub greens_points: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { quadrature_points: 401, series_points: 101, greens_points: 201 }
    }
}

/// Running maximum plus the few worst points.
#[derive(Debug, Default)]
struct Tracker {
    max: f64,
    worst: Vec<Offender>,
}

impl Tracker {
    fn push(&mut self, label: &str, x: f64, k: f64, computed: f64, reference: f64, error: f64) {
        let error = if error.is_nan() { f64::INFINITY } else { error };
        self.max = self.max.max(error);
        if self.worst.len() < KEEP || error > self.worst[KEEP - 1].error {
            self.worst.push(Offender { label: label.to_string(), x, k, computed, reference, error });
            self.worst.sort_by(|a, b| b.error.total_cmp(&a.error));
            self.worst.truncate(KEEP);
        }
    }

    fn report(self, name: &str, metric: &str, tolerance: f64, notes: Vec<String>) -> CheckReport {
        CheckReport {
            name: name.to_string(),
            metric: metric.to_string(),
            max_abs_error: self.max,
            tolerance,
            passed: self.max <= tolerance,
            details: self.worst,
            notes,
        }
    }
}

fn lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn lattice_2d(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let axis = lattice(lo, hi, n);
    axis.iter().flat_map(|&x| axis.iter().map(move |&k| (x, k))).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Partition function by 2-D trapezoidal quadrature of `e^{-βH}` against
/// `4π² I₀(β) I₀(ν²β)`.
pub fn check_quadrature_vs_bessel(betas: &[f64], nu2s: &[f64], points: usize) -> Result<CheckReport> {
    let grid = PhaseGrid::harper(points)?;
    let mut t = Tracker::default();
    for &nu2 in nu2s {
        for &beta in betas {
            let field = ScalarField::from_fn(&grid, |x, k| (-beta * (k.cos() + nu2 * x.cos())).exp())?;
            let quad = volume_integral(&field, Window::full(&grid))?;
            let closed = harper_z_classical(beta, nu2)?;
            t.push(&format!("beta={beta} nu2={nu2}"), beta, nu2, quad, closed, rel(quad, closed));
        }
    }
    let notes = vec![format!("{points}x{points} trapezoid; details carry (beta, nu2) in (x, k)")];
    Ok(t.report("quadrature_vs_bessel", "relative", 1e-8, notes))
}

/// Hermite-series divergences against the Harper sinh closed forms on an
/// `n × n` grid of the Harper cell. Both components are compared.
pub fn check_series_vs_closed(gammas: &[f64], nu2s: &[f64], points: usize) -> Result<CheckReport> {
    let policy = TruncationPolicy::fixed(25)?;
    let nodes = lattice_2d(-PI, PI, points);
    let mut t = Tracker::default();
    for &nu2 in nu2s {
        for &gamma in gammas {
            let ens = GaussianEnsemble::harper(gamma, nu2)?;
            let rows: Vec<Result<(f64, f64, (f64, f64), (f64, f64))>> = nodes
                .par_iter()
                .map(|&(x, k)| Ok((x, k, ens.div_series(x, k, &policy)?, ens.div_closed(x, k)?)))
                .collect();
            let label = format!("gamma={gamma} nu2={nu2}");
            for row in rows {
                let (x, k, s, c) = row?;
                t.push(&format!("{label} dxJx"), x, k, s.0, c.0, (s.0 - c.0).abs());
                t.push(&format!("{label} dkJk"), x, k, s.1, c.1, (s.1 - c.1).abs());
            }
        }
    }
    let notes = vec![format!("{points}x{points} grid on the Harper cell, eta_max = 25")];
    Ok(t.report("series_vs_closed", "absolute", 1e-10, notes))
}

/// Finite-difference derivatives of the erf currents against the closed-form
/// divergences, componentwise.
pub fn check_erf_currents(gammas: &[f64], nu2s: &[f64]) -> Result<CheckReport> {
    let nodes = lattice_2d(-PI, PI, 41);
    let mut t = Tracker::default();
    for &nu2 in nu2s {
        for &gamma in gammas {
            let ens = GaussianEnsemble::harper(gamma, nu2)?;
            let label = format!("gamma={gamma} nu2={nu2}");
            for &(x, k) in &nodes {
                let fx = central_derivative(|u| ens.currents_erf(u, k).map(|j| j.0).unwrap_or(f64::NAN), x, FD_STEP);
                let fk = central_derivative(|u| ens.currents_erf(x, u).map(|j| j.1).unwrap_or(f64::NAN), k, FD_STEP);
                let (cx, ck) = ens.div_closed(x, k)?;
                t.push(&format!("{label} dxJx"), x, k, fx, cx, (fx - cx).abs());
                t.push(&format!("{label} dkJk"), x, k, fk, ck, (fk - ck).abs());
            }
        }
    }
    let notes = vec![format!("41x41 lattice, fourth-order differences with h = {FD_STEP}")];
    Ok(t.report("erf_currents", "absolute", 1e-6, notes))
}

struct ContinuityCase {
    label: String,
    model: SeparableModel,
    wigner: Arc<dyn WignerFunction + Send>,
    policy: TruncationPolicy,
}

fn continuity_cases() -> Result<Vec<ContinuityCase>> {
    let mut cases = Vec::new();
    let gaussian_policy = TruncationPolicy::fixed(25)?;
    cases.push(ContinuityCase {
        label: "harmonic gaussian gamma=1".into(),
        model: harmonic_model(),
        wigner: Arc::new(GaussianWigner::new(1.0)?),
        policy: gaussian_policy,
    });
    for &nu2 in &[1.0, 2.0] {
        for &gamma in &GAMMAS {
            cases.push(ContinuityCase {
                label: format!("harper nu2={nu2} gaussian gamma={gamma}"),
                model: harper_model(nu2)?,
                wigner: Arc::new(GaussianWigner::new(gamma)?),
                policy: gaussian_policy,
            });
        }
    }
    let td_policy = TruncationPolicy::fixed(8)?;
    for &beta in &[0.1, 0.5, 1.0] {
        for kind in [WignerKind::Classical, WignerKind::Corrected] {
            let model = harper_model(1.0)?;
            cases.push(ContinuityCase {
                label: format!("harper nu2=1 td {kind:?} beta={beta}"),
                wigner: Arc::new(TdWigner::new(model.clone(), beta, kind)?),
                model,
                policy: td_policy,
            });
        }
    }
    Ok(cases)
}

/// `|∂_τW + ∇·J|` with both sides summed to the same order; the divergence is
/// a finite difference of the series currents. Scaled by `max|J|` per case.
pub fn check_continuity() -> Result<CheckReport> {
    let nodes = lattice_2d(-2.5, 2.5, 17);
    let mut t = Tracker::default();
    let mut notes = vec![format!("17x17 lattice on [-2.5, 2.5]^2, h = {FD_STEP}; error is residual / max|J|")];
    for case in continuity_cases()? {
        let (m, w, p) = (&case.model, case.wigner.as_ref(), &case.policy);
        let rows: Vec<Result<(f64, f64, f64, f64, f64)>> = nodes
            .par_iter()
            .map(|&(x, k)| {
                let dwdt = series::dW_dt(m, w, p, x, k)?;
                let div = pointwise_divergence(|u, v| series::current(m, w, p, u, v), x, k, FD_STEP)?;
                let (jx, jk) = series::current(m, w, p, x, k)?;
                Ok((x, k, dwdt, div, jx.hypot(jk)))
            })
            .collect();
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        let jmax = rows.iter().map(|r| r.4).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for &(x, k, dwdt, div, _) in &rows {
            let e = (dwdt + div).abs() / jmax;
            worst = worst.max(e);
            t.push(&case.label, x, k, dwdt, -div, e);
        }
        notes.push(format!("{}: eta_max={} max|J|={jmax:.3e} residual={worst:.3e}", case.label, p.eta_max()));
    }
    Ok(t.report("continuity", "relative to max|J|", 1e-6, notes))
}

/// Current fields used in the Green's-theorem check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreensCase {
    /// Classical current `W₀ (K', -V')` of the Harper thermal state.
    Classical,
    /// Second-order thermal currents.
    TdCorrected,
    /// Gaussian erf currents.
    Gaussian,
}

impl GreensCase {
    pub const ALL: [GreensCase; 3] = [GreensCase::Classical, GreensCase::TdCorrected, GreensCase::Gaussian];

    pub fn label(self) -> &'static str {
        match self {
            GreensCase::Classical => "classical",
            GreensCase::TdCorrected => "td_corrected",
            GreensCase::Gaussian => "gaussian",
        }
    }
}

/// Nested rectangles inside the Harper cell, corners on multiples of `π/25`
/// so they sit on nodes of every default refinement level. None is centred:
/// the test currents have odd parity, so a centred rectangle gives zero on
/// both sides.
pub const GREENS_RECTANGLES: [Window; 3] = [
    Window { x: (-7.0 * P25, 9.0 * P25), k: (-10.0 * P25, 6.0 * P25) },
    Window { x: (-12.0 * P25, 10.0 * P25), k: (-10.0 * P25, 13.0 * P25) },
    Window { x: (-17.0 * P25, 15.0 * P25), k: (-14.0 * P25, 18.0 * P25) },
];

const P25: f64 = PI / 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreensRow {
    pub rectangle: usize,
    pub points: usize,
    pub h: f64,
    pub flux: f64,
    pub volume: f64,
    /// Perimeter times `max|J|` on the grid.
    pub scale: f64,
}

impl GreensRow {
    pub fn relative_error(&self) -> f64 {
        (self.flux - self.volume).abs() / self.scale
    }
}

fn greens_field(case: GreensCase, grid: &PhaseGrid) -> Result<VectorField> {
    match case {
        GreensCase::Classical => {
            let ens = TdEnsemble::new(harper_model(1.0)?, 1.0)?;
            let m = ens.model().clone();
            VectorField::from_fn(grid, |x, k| {
                let (vx, vk) = m.velocity(x, k);
                let w = ens.w0(x, k);
                (w * vx, w * vk)
            })
        }
        GreensCase::TdCorrected => {
            let ens = TdEnsemble::new(harper_model(1.0)?, 1.0)?;
            VectorField::try_from_fn(grid, |x, k| ens.corrected_currents(x, k))
        }
        GreensCase::Gaussian => {
            let ens = GaussianEnsemble::harper(1.0, 1.0)?;
            VectorField::try_from_fn(grid, |x, k| ens.currents_erf(x, k))
        }
    }
}

/// Loop flux against the volume integral of the grid divergence for every
/// rectangle at one resolution.
pub fn greens_rows(case: GreensCase, points: usize) -> Result<Vec<GreensRow>> {
    let grid = PhaseGrid::harper(points)?;
    let field = greens_field(case, &grid)?;
    let div = divergence(&field)?;
    let jmax = field.max_norm();
    GREENS_RECTANGLES
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let perimeter = 2.0 * ((w.x.1 - w.x.0) + (w.k.1 - w.k.0));
            Ok(GreensRow {
                rectangle: i,
                points,
                h: grid.max_spacing(),
                flux: loop_flux(&field, &rectangle_loop(w))?,
                volume: volume_integral(&div, w)?,
                scale: (perimeter * jmax).max(f64::MIN_POSITIVE),
            })
        })
        .collect()
}

/// Resolutions of the refinement ladder ending at `finest`.
pub fn greens_ladder(finest: usize) -> Result<[usize; 3]> {
    if finest < 33 || (finest - 1) % 4 != 0 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: format!("Green's refinement needs 4m + 1 points with m >= 8, got {finest}"),
        });
    }
    let m = (finest - 1) / 4;
    Ok([m + 1, 2 * m + 1, finest])
}

/// Observed order of `err ~ h^p` from two rows; `None` when both errors sit
/// at rounding level.
pub fn observed_order(coarse: &GreensRow, fine: &GreensRow) -> Option<f64> {
    let (ec, ef) = (coarse.relative_error(), fine.relative_error());
    if ec < 1e-12 && ef < 1e-12 {
        return None;
    }
    Some((ec / ef).ln() / (coarse.h / fine.h).ln())
}

/// Green's theorem on the nested rectangles across the refinement ladder.
/// The error is `|flux - ∫∫∇·J| / (perimeter · max|J|)` divided by `h²`,
/// so a pass means it stays under `10 h²` at every resolution.
pub fn check_greens_theorem(finest: usize) -> Result<CheckReport> {
    let ladder = greens_ladder(finest)?;
    let mut t = Tracker::default();
    let mut notes = vec!["error is |flux - volume| / (perimeter max|J|) / h^2".to_string()];
    for case in GreensCase::ALL {
        let rows: Vec<Vec<GreensRow>> = ladder.iter().map(|&n| greens_rows(case, n)).collect::<Result<_>>()?;
        for r in rows.iter().flatten() {
            let w = GREENS_RECTANGLES[r.rectangle];
            let label = format!("{} rect={} n={}", case.label(), r.rectangle, r.points);
            t.push(&label, w.x.1, w.k.1, r.flux, r.volume, r.relative_error() / (r.h * r.h));
        }
        for rect in 0..GREENS_RECTANGLES.len() {
            let errs: Vec<String> = rows.iter().map(|rs| format!("{:.3e}", rs[rect].relative_error())).collect();
            let order = match observed_order(&rows[0][rect], &rows[2][rect]) {
                Some(p) => format!("{p:.2}"),
                None => "rounding".to_string(),
            };
            notes.push(format!("{} rect={rect}: errors {} over n={ladder:?}, order {order}", case.label(), errs.join(" ")));
        }
    }
    Ok(t.report("greens_theorem", "relative / h^2", 10.0, notes))
}

/// `∇·w` for the harmonic oscillator, which has no quantum terms.
pub fn check_harmonic_liouvillian() -> Result<CheckReport> {
    let model = harmonic_model();
    let policy = TruncationPolicy::default();
    let mut wigners: Vec<(String, Box<dyn WignerFunction + Send>)> = Vec::new();
    for &gamma in &GAMMAS {
        wigners.push((format!("gaussian gamma={gamma}"), Box::new(GaussianWigner::new(gamma)?)));
    }
    for &beta in &[0.5, 1.0] {
        for kind in [WignerKind::Classical, WignerKind::Corrected] {
            wigners.push((format!("td {kind:?} beta={beta}"), Box::new(TdWigner::new(model.clone(), beta, kind)?)));
        }
    }
    let nodes = lattice_2d(-4.0, 4.0, 41);
    let mut t = Tracker::default();
    let mut skipped = 0;
    for (label, w) in &wigners {
        for &(x, k) in &nodes {
            match series::div_w(&model, w.as_ref(), &policy, x, k) {
                Ok(d) => t.push(label, x, k, d, 0.0, d.abs()),
                Err(Error::VelocityUndefined { .. }) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    let notes = vec![format!("41x41 lattice on [-4, 4]^2; {skipped} points below the Wigner-zero floor skipped")];
    Ok(t.report("harmonic_liouvillian", "absolute", 1e-12, notes))
}

/// With only the `η = 0` term the velocity `J/W` is the classical Hamiltonian
/// flow, so its divergence vanishes for any model.
pub fn check_classical_velocity() -> Result<CheckReport> {
    let policy = TruncationPolicy::fixed(0)?;
    let models = [harper_model(1.0)?, harper_model(2.0)?, lotka_volterra_model(), harmonic_model()];
    let mut t = Tracker::default();
    let mut skipped = 0;
    for model in &models {
        let d = model.domain();
        let mut wigners: Vec<(String, Box<dyn WignerFunction + Send>)> = vec![(
            "td Classical beta=1".into(),
            Box::new(TdWigner::new(model.clone(), 1.0, WignerKind::Classical)?),
        )];
        wigners.push(("gaussian gamma=1".into(), Box::new(GaussianWigner::new(1.0)?)));
        let xs = lattice(d.x.0 + 0.1, d.x.1 - 0.1, 21);
        let ks = lattice(d.k.0 + 0.1, d.k.1 - 0.1, 21);
        for (label, w) in &wigners {
            let w = w.as_ref();
            let velocity = |x: f64, k: f64| -> Result<(f64, f64)> {
                let v = w.value(x, k);
                if v.abs() <= 1e-12 * w.peak() {
                    return Err(Error::VelocityUndefined { x, k });
                }
                let (jx, jk) = series::current(model, w, &policy, x, k)?;
                Ok((jx / v, jk / v))
            };
            for &x in &xs {
                for &k in &ks {
                    match pointwise_divergence(velocity, x, k, FD_STEP) {
                        Ok(div) => t.push(&format!("{} {label}", model.name()), x, k, div, 0.0, div.abs()),
                        Err(Error::VelocityUndefined { .. }) => skipped += 1,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    let notes = vec![format!("21x21 interior lattice per model, h = {FD_STEP}; {skipped} points near Wigner zeros skipped")];
    Ok(t.report("classical_velocity", "absolute", 1e-10, notes))
}

/// Generic second-order `∇·w` specialised to Harper against the Harper
/// closed form, plus the hand value `1/24` at `(π/4, π/2)`, `β = ν² = 1`.
pub fn check_td_divw_consistency() -> Result<CheckReport> {
    let axis = [-PI / 3.0, 0.0, PI / 4.0, PI / 2.0, 2.0 * PI / 3.0];
    let mut t = Tracker::default();
    for &nu2 in &NU2S {
        for &beta in &BETAS {
            let ens = TdEnsemble::new(harper_model(nu2)?, beta)?;
            let label = format!("beta={beta} nu2={nu2}");
            for &x in &axis {
                for &k in &axis {
                    let generic = ens.td_div_w(x, k);
                    let closed = ens.td_div_w_harper(x, k)?;
                    t.push(&label, x, k, generic, closed, (generic - closed).abs());
                }
            }
        }
    }
    let ens = TdEnsemble::new(harper_model(1.0)?, 1.0)?;
    let (x, k) = (PI / 4.0, PI / 2.0);
    let hand = 1.0 / 24.0;
    let value = ens.td_div_w(x, k);
    t.push("hand value", x, k, value, hand, (value - hand).abs());
    let notes = vec!["5x5 lattice per (beta, nu2) including axis points".to_string()];
    Ok(t.report("td_divw_consistency", "absolute", 1e-12, notes))
}

/// `max|∇·J| / max|J|` of the second-order thermal currents.
fn td_stationarity_residual(ens: &TdEnsemble, alternate: bool) -> Result<f64> {
    let nodes = lattice_2d(-3.0, 3.0, 31);
    let current = |x: f64, k: f64| {
        if alternate {
            ens.alternate_currents(x, k)
        } else {
            ens.corrected_currents(x, k)
        }
    };
    let mut resid = 0.0f64;
    let mut jmax = 0.0f64;
    for &(x, k) in &nodes {
        resid = resid.max(pointwise_divergence(current, x, k, FD_STEP)?.abs());
        let (jx, jk) = current(x, k)?;
        jmax = jmax.max(jx.hypot(jk));
    }
    Ok(resid / jmax)
}

/// Stationarity of the second-order thermal currents for `β ≤ 1`.
pub fn check_td_stationarity() -> Result<CheckReport> {
    let mut t = Tracker::default();
    for &nu2 in &NU2S {
        for &beta in &[0.1, 0.25, 0.5, 1.0] {
            let ens = TdEnsemble::new(harper_model(nu2)?, beta)?;
            let r = td_stationarity_residual(&ens, false)?;
            t.push(&format!("beta={beta} nu2={nu2}"), beta, nu2, r, 0.0, r);
        }
    }
    let notes = vec![format!("31x31 lattice on [-3, 3]^2, h = {FD_STEP}; details carry (beta, nu2) in (x, k)")];
    Ok(t.report("td_stationarity", "relative to max|J|", 1e-4, notes))
}

/// Measurements of the alternate printed forms and of the series sign
/// convention. None of these gate `passed`.
pub fn diagnostics() -> Result<Vec<Diagnostic>> {
    let mut out = Vec::new();
    let grid = PhaseGrid::harper(401)?;

    let mut closed = 0.0f64;
    let mut alternate = 0.0f64;
    for &nu2 in &NU2S {
        for &beta in &[0.1, 0.5, 1.0] {
            let model = harper_model(nu2)?;
            let quad = z_corrected_quadrature(&model, &grid, beta);
            closed = closed.max(rel(harper_z_corrected(beta, nu2)?, quad));
            alternate = alternate.max(rel(alternate_z_corrected(beta, nu2)?, quad));
        }
    }
    out.push(Diagnostic {
        name: "z_corrected_closed_form".into(),
        value: closed,
        description: "relative gap, Bessel Z_St vs quadrature, beta <= 1".into(),
    });
    out.push(Diagnostic {
        name: "z_corrected_alternate_form".into(),
        value: alternate,
        description: "relative gap, alternate Z_St normalization vs quadrature, beta <= 1".into(),
    });

    let nodes = lattice_2d(-PI, PI, 25);
    let mut w_gap = 0.0f64;
    let mut j_gap = 0.0f64;
    let mut alt_resid = 0.0f64;
    let mut sign_same = 0.0f64;
    let mut sign_opposite = 0.0f64;
    let policy = TruncationPolicy::fixed(1)?;
    for &nu2 in &NU2S {
        let ens = Arc::new(TdEnsemble::new(harper_model(nu2)?, 1.0)?);
        let w0 = TdWigner::from_ensemble(ens.clone(), WignerKind::Classical)?;
        let mut peak = 0.0f64;
        let mut jpeak = 0.0f64;
        let mut wg = 0.0f64;
        let mut jg = 0.0f64;
        for &(x, k) in &nodes {
            let w = ens.w_st2(x, k)?;
            peak = peak.max(w.abs());
            wg = wg.max((ens.alternate_w_st2_harper(x, k)? - w).abs());
            let (ax, ak) = ens.alternate_currents(x, k)?;
            let (cx, ck) = ens.corrected_currents(x, k)?;
            jpeak = jpeak.max(cx.hypot(ck));
            jg = jg.max((ax - cx).hypot(ak - ck));
            let s = series::div_w(ens.model(), &w0, &policy, x, k)?;
            let printed = ens.td_div_w(x, k);
            sign_same = sign_same.max((s - printed).abs());
            sign_opposite = sign_opposite.max((s + printed).abs());
        }
        w_gap = w_gap.max(wg / peak);
        j_gap = j_gap.max(jg / jpeak);
        alt_resid = alt_resid.max(td_stationarity_residual(&ens, true)?);
    }
    out.push(Diagnostic {
        name: "w_st2_alternate_form".into(),
        value: w_gap,
        description: "max |alternate W_St bracket - generic W_St| / max W_St, beta = 1".into(),
    });
    out.push(Diagnostic {
        name: "currents_alternate_form".into(),
        value: j_gap,
        description: "max |alternate J - corrected J| / max|J|, beta = 1".into(),
    });
    out.push(Diagnostic {
        name: "currents_alternate_stationarity".into(),
        value: alt_resid,
        description: "max |div J| / max|J| of the alternate currents, beta = 1".into(),
    });
    out.push(Diagnostic {
        name: "divw_series_minus_closed".into(),
        value: sign_same,
        description: "max |series div w (eta_max = 1, W0) - td_div_w|, beta = 1".into(),
    });
    out.push(Diagnostic {
        name: "divw_series_plus_closed".into(),
        value: sign_opposite,
        description: "max |series div w (eta_max = 1, W0) + td_div_w|, beta = 1".into(),
    });
    Ok(out)
}

/// Every check at the given resolutions. Checks run one after another; each
/// parallelizes its own grid work.
pub fn run_all(config: &VerifyConfig) -> Result<VerifyReport> {
    let checks = vec![
        check_quadrature_vs_bessel(&BETAS, &NU2S, config.quadrature_points)?,
        check_series_vs_closed(&[1e-3, GAMMAS[0], GAMMAS[1], GAMMAS[2]], &[1.0, 2.0], config.series_points)?,
        check_erf_currents(&GAMMAS, &[1.0, 2.0])?,
        check_continuity()?,
        check_greens_theorem(config.greens_points)?,
        check_harmonic_liouvillian()?,
        check_classical_velocity()?,
        check_td_divw_consistency()?,
        check_td_stationarity()?,
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { schema: VERIFY_SCHEMA.to_string(), passed, checks, diagnostics: diagnostics()? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracker_keeps_worst_points_sorted() {
        let mut t = Tracker::default();
        for i in 0..10 {
            t.push("p", i as f64, 0.0, 0.0, 0.0, (i * 7 % 10) as f64);
        }
        let errs: Vec<f64> = t.worst.iter().map(|o| o.error).collect();
        assert_eq!(errs, vec![9.0, 8.0, 7.0, 6.0, 5.0]);
        assert_eq!(t.max, 9.0);
    }

    #[test]
    fn nan_counts_as_failure() {
        let mut t = Tracker::default();
        t.push("p", 0.0, 0.0, f64::NAN, 1.0, f64::NAN);
        assert!(!t.report("x", "absolute", 1.0, vec![]).passed);
    }

    #[test]
    fn quadrature_row_at_small_beta_tends_to_four_pi_squared() {
        let r = check_quadrature_vs_bessel(&[1e-9], &[1.0], 101).unwrap();
        assert!(r.passed);
        assert!((r.details[0].computed - 4.0 * PI * PI).abs() < 1e-6);
    }

    #[test]
    fn hand_value_is_one_twenty_fourth() {
        let r = check_td_divw_consistency().unwrap();
        let ens = TdEnsemble::new(harper_model(1.0).unwrap(), 1.0).unwrap();
        assert!((ens.td_div_w(PI / 4.0, PI / 2.0) - 1.0 / 24.0).abs() < 1e-15);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn ladder_halves_spacing() {
        assert_eq!(greens_ladder(201).unwrap(), [51, 101, 201]);
        assert!(greens_ladder(200).is_err());
        assert!(greens_ladder(29).is_err());
    }

    #[test]
    fn greens_error_shrinks_under_refinement() {
        for case in GreensCase::ALL {
            let coarse = greens_rows(case, 51).unwrap();
            let fine = greens_rows(case, 101).unwrap();
            for (c, f) in coarse.iter().zip(&fine) {
                assert!(f.relative_error() <= c.relative_error() + 1e-13, "{case:?} {c:?} {f:?}");
            }
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = check_td_stationarity().unwrap();
        let b = check_td_stationarity().unwrap();
        assert_eq!(a, b);
    }
}
