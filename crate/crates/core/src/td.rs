//! Thermal ensembles: the Boltzmann Wigner function `W₀ = e^{-βH}/Z₀`, its
//! second-order correction `W_St = e^{-βH}(1 + χ)/Z_St`, the associated
//! currents and thermodynamic curves.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::jet::Jet;
use crate::models::SeparableModel;
use crate::series::WignerFunction;
use crate::special::{bessel_i0, bessel_i1};

pub const QUADRATURE_POINTS: usize = 401;

/// `χ = -(β²/8) V'' K'' + (β³/24) [V'' (K')² + K'' (V')²]`.
pub fn chi(model: &SeparableModel, beta: f64, x: f64, k: f64) -> f64 {
    let (k1, k2) = (model.k_deriv(1, k), model.k_deriv(2, k));
    let (v1, v2) = (model.v_deriv(1, x), model.v_deriv(2, x));
    -beta * beta / 8.0 * v2 * k2 + beta.powi(3) / 24.0 * (v2 * k1 * k1 + k2 * v1 * v1)
}

/// `χ` for `cos k + ν² cos x`, written out.
pub fn chi_harper(beta: f64, nu2: f64, x: f64, k: f64) -> f64 {
    let (sx, cx, sk, ck) = (x.sin(), x.cos(), k.sin(), k.cos());
    -beta * beta / 8.0 * nu2 * cx * ck - beta.powi(3) / 24.0 * (nu2 * cx * sk * sk + nu2 * nu2 * ck * sx * sx)
}

/// `4π² I₀(β) I₀(ν²β)`.
pub fn harper_z_classical(beta: f64, nu2: f64) -> Result<f64> {
    Ok(4.0 * PI * PI * bessel_i0(beta)? * bessel_i0(nu2 * beta)?)
}

/// `4π² [I₀(β) I₀(ν²β) - (ν²β²/24) I₁(β) I₁(ν²β)]`, the exact integral of
/// `e^{-βH}(1 + χ)` over the Harper cell.
pub fn harper_z_corrected(beta: f64, nu2: f64) -> Result<f64> {
    let i1 = bessel_i1(beta)? * bessel_i1(nu2 * beta)?;
    Ok(4.0 * PI * PI * (bessel_i0(beta)? * bessel_i0(nu2 * beta)? - nu2 * beta * beta / 24.0 * i1))
}

/// `4π² I₀(β) I₀(ν²β) - (β²/24) I₁(β) I₁(ν²β)`; differs from
/// [`harper_z_corrected`] by the normalization of the correction term.
pub fn alternate_z_corrected(beta: f64, nu2: f64) -> Result<f64> {
    Ok(harper_z_classical(beta, nu2)? - beta * beta / 24.0 * bessel_i1(beta)? * bessel_i1(nu2 * beta)?)
}

/// One-dimensional Boltzmann moments along an axis.
#[derive(Debug, Clone, Copy)]
struct Moments {
    /// `∫ e^{-βf}`
    m0: f64,
    /// `∫ f'' e^{-βf}`
    m2: f64,
    /// `∫ (f')² e^{-βf}`
    m11: f64,
}

fn trapezoid_weights(n: usize, h: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
}

fn moments(f: &dyn Fn(u32, f64) -> f64, beta: f64, lo: f64, hi: f64, n: usize) -> Moments {
    let h = (hi - lo) / (n - 1) as f64;
    let mut m = Moments { m0: 0.0, m2: 0.0, m11: 0.0 };
    for (i, w) in trapezoid_weights(n, h).enumerate() {
        let u = lo + i as f64 * h;
        let e = w * (-beta * f(0, u)).exp();
        let d1 = f(1, u);
        m.m0 += e;
        m.m2 += f(2, u) * e;
        m.m11 += d1 * d1 * e;
    }
    m
}

fn axis_moments(model: &SeparableModel, grid: &PhaseGrid, beta: f64) -> (Moments, Moments) {
    let kf = |m: u32, u: f64| model.k_deriv(m, u);
    let vf = |m: u32, u: f64| model.v_deriv(m, u);
    let mk = moments(&kf, beta, grid.k_min(), grid.k_max(), grid.n_k());
    let mv = moments(&vf, beta, grid.x_min(), grid.x_max(), grid.n_x());
    (mk, mv)
}

/// Trapezoidal `∫∫ e^{-βH}` over the grid window. Separability reduces the
/// tensor-product rule to two one-dimensional sums.
pub fn z_classical_quadrature(model: &SeparableModel, grid: &PhaseGrid, beta: f64) -> f64 {
    let (mk, mv) = axis_moments(model, grid, beta);
    mk.m0 * mv.m0
}

/// Trapezoidal `∫∫ e^{-βH}(1 + χ)` over the grid window.
pub fn z_corrected_quadrature(model: &SeparableModel, grid: &PhaseGrid, beta: f64) -> f64 {
    let (mk, mv) = axis_moments(model, grid, beta);
    mk.m0 * mv.m0 - beta * beta / 8.0 * mv.m2 * mk.m2 + beta.powi(3) / 24.0 * (mv.m2 * mk.m11 + mk.m2 * mv.m11)
}

/// `Z₀(β)`: Bessel closed form for Harper, quadrature on the natural domain
/// otherwise.
pub fn z_classical(model: &SeparableModel, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    match model.harper_nu2() {
        Some(nu2) => harper_z_classical(beta, nu2),
        None => Ok(z_classical_quadrature(model, &model.domain().grid(QUADRATURE_POINTS)?, beta)),
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "beta", reason: format!("must be positive, got {beta}") })
    }
}

#[derive(Debug, Clone)]
pub struct TdEnsemble {
    model: SeparableModel,
    beta: f64,
    grid: PhaseGrid,
    z0: f64,
    z_st: f64,
}

impl TdEnsemble {
    /// Ensemble on the model's natural domain, partition functions by
    /// 401 × 401 trapezoidal quadrature.
    pub fn new(model: SeparableModel, beta: f64) -> Result<Self> {
        let grid = model.domain().grid(QUADRATURE_POINTS)?;
        Self::with_grid(model, beta, grid)
    }

    pub fn with_grid(model: SeparableModel, beta: f64, grid: PhaseGrid) -> Result<Self> {
        check_beta(beta)?;
        let z0 = z_classical_quadrature(&model, &grid, beta);
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(Error::NonPositivePartition { beta, z: z0 });
        }
        let z_st = z_corrected_quadrature(&model, &grid, beta);
        Ok(TdEnsemble { model, beta, grid, z0, z_st })
    }

    pub fn model(&self) -> &SeparableModel {
        &self.model
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn z_classical(&self) -> f64 {
        self.z0
    }

    pub fn z_corrected(&self) -> Result<f64> {
        if self.z_st > 0.0 && self.z_st.is_finite() {
            Ok(self.z_st)
        } else {
            Err(Error::CorrectionRegimeExceeded { beta: self.beta, z: self.z_st })
        }
    }

    fn boltzmann(&self, x: f64, k: f64) -> f64 {
        (-self.beta * self.model.energy(x, k)).exp()
    }

    pub fn w0(&self, x: f64, k: f64) -> f64 {
        self.boltzmann(x, k) / self.z0
    }

    pub fn chi(&self, x: f64, k: f64) -> f64 {
        chi(&self.model, self.beta, x, k)
    }

    /// `(Z₀/Z_St) W₀ (1 + χ)`.
    pub fn w_st2(&self, x: f64, k: f64) -> Result<f64> {
        Ok(self.boltzmann(x, k) * (1.0 + self.chi(x, k)) / self.z_corrected()?)
    }

    /// Harper `W_St` from the explicit trigonometric bracket.
    pub fn w_st2_harper(&self, x: f64, k: f64) -> Result<f64> {
        let nu2 = self.model.require_harper()?;
        let boltz = (-self.beta * (k.cos() + nu2 * x.cos())).exp();
        Ok(boltz * (1.0 + chi_harper(self.beta, nu2, x, k)) / self.z_corrected()?)
    }

    /// Harper `W_St` with the bracket
    /// `1 - [(β³/24)(ν² cos k sin²x + cos x sin²k) + (β²/8) cos k cos x]`,
    /// which coincides with [`Self::w_st2_harper`] only at `ν² = 1`.
    pub fn alternate_w_st2_harper(&self, x: f64, k: f64) -> Result<f64> {
        let nu2 = self.model.require_harper()?;
        let b = self.beta;
        let (sx, cx, sk, ck) = (x.sin(), x.cos(), k.sin(), k.cos());
        let bracket = 1.0 - (b.powi(3) / 24.0 * (nu2 * ck * sx * sx + cx * sk * sk) + b * b / 8.0 * ck * cx);
        Ok(self.w0(x, k) * bracket * self.z0 / self.z_corrected()?)
    }

    /// Second-order currents of `W_St`:
    /// `J_x = {K'(1+χ) - (1/24) K''' [β²(V')² - βV'']} W₀ Z₀/Z_St` and
    /// `J_k = -{V'(1+χ) - (1/24) V''' [β²(K')² - βK'']} W₀ Z₀/Z_St`.
    pub fn corrected_currents(&self, x: f64, k: f64) -> Result<(f64, f64)> {
        let b = self.beta;
        let m = &self.model;
        let (k1, k2, k3) = (m.k_deriv(1, k), m.k_deriv(2, k), m.k_deriv(3, k));
        let (v1, v2, v3) = (m.v_deriv(1, x), m.v_deriv(2, x), m.v_deriv(3, x));
        let one_chi = 1.0 + self.chi(x, k);
        let w = self.boltzmann(x, k) / self.z_corrected()?;
        let jx = (k1 * one_chi - k3 / 24.0 * (b * b * v1 * v1 - b * v2)) * w;
        let jk = -(v1 * one_chi - v3 / 24.0 * (b * b * k1 * k1 - b * k2)) * w;
        Ok((jx, jk))
    }

    /// Harper specialization of [`Self::corrected_currents`], written out.
    pub fn corrected_currents_harper(&self, x: f64, k: f64) -> Result<(f64, f64)> {
        let nu2 = self.model.require_harper()?;
        let b = self.beta;
        let (sx, cx, sk, ck) = (x.sin(), x.cos(), k.sin(), k.cos());
        let one_chi = 1.0 + chi_harper(b, nu2, x, k);
        let w = (-b * (ck + nu2 * cx)).exp() / self.z_corrected()?;
        let jx = -sk * (one_chi + (b * nu2 * cx + b * b * nu2 * nu2 * sx * sx) / 24.0) * w;
        let jk = nu2 * sx * (one_chi + (b * ck + b * b * sk * sk) / 24.0) * w;
        Ok((jx, jk))
    }

    /// Alternate Harper currents (unnormalized by `Z₀/Z_St`):
    /// `J_x = -sin k {1 - (β³ν²/24)(ν² cos²k sin x + sin k cos²x)
    ///        + (1/24)[βν² cos x + β²(ν⁴ sin²x - 3ν² cos k cos x)]} W₀`
    /// and the matching `J_k`. Their cubic terms differ from
    /// [`Self::corrected_currents_harper`].
    pub fn alternate_currents(&self, x: f64, k: f64) -> Result<(f64, f64)> {
        let nu2 = self.model.require_harper()?;
        let b = self.beta;
        let (sx, cx, sk, ck) = (x.sin(), x.cos(), k.sin(), k.cos());
        let cubic = b.powi(3) * nu2 / 24.0 * (nu2 * ck * ck * sx + sk * cx * cx);
        let w0 = self.w0(x, k);
        let jx = -sk * (1.0 - cubic + (b * nu2 * cx + b * b * (nu2 * nu2 * sx * sx - 3.0 * nu2 * ck * cx)) / 24.0) * w0;
        let jk = nu2 * sx * (1.0 - cubic + (b * ck + b * b * (sk * sk - 3.0 * nu2 * ck * cx)) / 24.0) * w0;
        Ok((jx, jk))
    }

    /// Liouvillianity quantifier at second order,
    /// `(β²/12)(K''' V'' V' - V''' K'' K')`.
    pub fn td_div_w(&self, x: f64, k: f64) -> f64 {
        let m = &self.model;
        let lhs = m.k_deriv(3, k) * m.v_deriv(2, x) * m.v_deriv(1, x);
        let rhs = m.v_deriv(3, x) * m.k_deriv(2, k) * m.k_deriv(1, k);
        self.beta * self.beta / 12.0 * (lhs - rhs)
    }

    /// `(β²/12) sin x sin k (ν⁴ cos x - ν² cos k)`.
    pub fn td_div_w_harper(&self, x: f64, k: f64) -> Result<f64> {
        let nu2 = self.model.require_harper()?;
        Ok(self.beta * self.beta / 12.0 * x.sin() * k.sin() * (nu2 * nu2 * x.cos() - nu2 * k.cos()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WignerKind {
    Classical,
    Corrected,
}

/// `W₀` or `W_St` as a [`WignerFunction`]; derivatives of every order come
/// from Taylor jets of `V(x)` and `K(k)`.
#[derive(Debug, Clone)]
pub struct TdWigner {
    ensemble: Arc<TdEnsemble>,
    kind: WignerKind,
    z: f64,
    peak: f64,
}

pub const TD_MAX_ORDER: u32 = 64;

impl TdWigner {
    pub fn new(model: SeparableModel, beta: f64, kind: WignerKind) -> Result<Self> {
        Self::from_ensemble(Arc::new(TdEnsemble::new(model, beta)?), kind)
    }

    pub fn from_ensemble(ensemble: Arc<TdEnsemble>, kind: WignerKind) -> Result<Self> {
        let z = match kind {
            WignerKind::Classical => ensemble.z_classical(),
            WignerKind::Corrected => ensemble.z_corrected()?,
        };
        let mut w = TdWigner { ensemble, kind, z, peak: 0.0 };
        let g = *w.ensemble.grid();
        w.peak = (0..g.n_x())
            .into_par_iter()
            .map(|i| (0..g.n_k()).map(|j| w.value(g.x(i), g.k(j)).abs()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max);
        Ok(w)
    }

    pub fn ensemble(&self) -> &TdEnsemble {
        &self.ensemble
    }

    pub fn kind(&self) -> WignerKind {
        self.kind
    }

    /// Jet of `e^{-βf}(1 + χ)` along one axis, the other factor frozen.
    fn axis_jet(&self, n: u32, along: &dyn Fn(u32, f64) -> f64, u: f64, other: &dyn Fn(u32, f64) -> f64, w: f64) -> Jet {
        let len = n as usize + 1;
        let b = self.ensemble.beta;
        let boltz = Jet::from_derivatives(len, |m| -b * along(m, u)).exp();
        let frozen = (-b * other(0, w)).exp() / self.z;
        match self.kind {
            WignerKind::Classical => boltz.scale(frozen),
            WignerKind::Corrected => {
                let (o1, o2) = (other(1, w), other(2, w));
                let d1 = Jet::from_derivatives(len, |m| along(m + 1, u));
                let d2 = Jet::from_derivatives(len, |m| along(m + 2, u));
                // χ is symmetric under exchanging the roles of K and V
                let chi = &(&d2.scale(-b * b / 8.0 * o2 + b.powi(3) / 24.0 * o1 * o1) + &(&d1 * &d1).scale(b.powi(3) / 24.0 * o2))
                    + &Jet::constant(len, 1.0);
                (&chi * &boltz).scale(frozen)
            }
        }
    }
}

impl WignerFunction for TdWigner {
    fn value(&self, x: f64, k: f64) -> f64 {
        let e = &self.ensemble;
        let boltz = e.boltzmann(x, k);
        match self.kind {
            WignerKind::Classical => boltz / self.z,
            WignerKind::Corrected => boltz * (1.0 + e.chi(x, k)) / self.z,
        }
    }

    fn dx_all(&self, n: u32, x: f64, k: f64) -> Vec<f64> {
        let m = &self.ensemble.model;
        let v = |o: u32, u: f64| m.v_deriv(o, u);
        let kk = |o: u32, u: f64| m.k_deriv(o, u);
        self.axis_jet(n, &v, x, &kk, k).derivatives()
    }

    fn dk_all(&self, n: u32, x: f64, k: f64) -> Vec<f64> {
        let m = &self.ensemble.model;
        let v = |o: u32, u: f64| m.v_deriv(o, u);
        let kk = |o: u32, u: f64| m.k_deriv(o, u);
        self.axis_jet(n, &kk, k, &v, x).derivatives()
    }

    fn max_order(&self) -> u32 {
        TD_MAX_ORDER
    }

    fn peak(&self) -> f64 {
        self.peak
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermoCurve {
    pub betas: Vec<f64>,
    pub z_classical: Vec<f64>,
    pub z_corrected: Vec<f64>,
    pub purity_cl: Vec<f64>,
    pub purity_q: Vec<f64>,
    pub energy_cl: Vec<f64>,
    pub energy_q: Vec<f64>,
    pub heat_cl: Vec<f64>,
    pub heat_q: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct ThermoRow {
    z: f64,
    purity: f64,
    energy: f64,
    heat: f64,
}

/// `Z`, purity `Z(2β)/Z(β)²`, `E = -∂ ln Z` and `C = β² ∂² ln Z`, the
/// derivatives by five-point differences with step `min(β, 0.05)/50`.
pub fn thermo_curve(model: &SeparableModel, betas: &[f64]) -> Result<ThermoCurve> {
    if betas.is_empty() {
        return Err(Error::InvalidParameter { name: "betas", reason: "empty".into() });
    }
    for w in betas.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter { name: "betas", reason: "must be strictly ascending".into() });
        }
    }
    check_beta(betas[0])?;
    if !betas[betas.len() - 1].is_finite() {
        return Err(Error::InvalidParameter { name: "betas", reason: "must be finite".into() });
    }
    let grid = model.domain().grid(QUADRATURE_POINTS)?;

    let z_cl = |b: f64| -> Result<f64> {
        let z = z_classical_quadrature(model, &grid, b);
        if z > 0.0 && z.is_finite() {
            Ok(z)
        } else {
            Err(Error::NonPositivePartition { beta: b, z })
        }
    };
    let z_q = |b: f64| -> Result<f64> {
        let z = z_corrected_quadrature(model, &grid, b);
        if z > 0.0 && z.is_finite() {
            Ok(z)
        } else {
            Err(Error::CorrectionRegimeExceeded { beta: b, z })
        }
    };
    let row = |z: &(dyn Fn(f64) -> Result<f64> + Sync), b: f64| -> Result<ThermoRow> {
        let h = b.min(0.05) / 50.0;
        let l = |t: f64| z(t).map(f64::ln);
        let (lm2, lm1, l0, lp1, lp2) = (l(b - 2.0 * h)?, l(b - h)?, l(b)?, l(b + h)?, l(b + 2.0 * h)?);
        let d1 = (lm2 - 8.0 * lm1 + 8.0 * lp1 - lp2) / (12.0 * h);
        let d2 = (-lm2 + 16.0 * lm1 - 30.0 * l0 + 16.0 * lp1 - lp2) / (12.0 * h * h);
        let zb = z(b)?;
        Ok(ThermoRow { z: zb, purity: z(2.0 * b)? / (zb * zb), energy: -d1, heat: b * b * d2 })
    };

    let rows: Vec<(ThermoRow, ThermoRow)> =
        betas.par_iter().map(|&b| Ok((row(&z_cl, b)?, row(&z_q, b)?))).collect::<Result<_>>()?;
    Ok(ThermoCurve {
        betas: betas.to_vec(),
        z_classical: rows.iter().map(|r| r.0.z).collect(),
        z_corrected: rows.iter().map(|r| r.1.z).collect(),
        purity_cl: rows.iter().map(|r| r.0.purity).collect(),
        purity_q: rows.iter().map(|r| r.1.purity).collect(),
        energy_cl: rows.iter().map(|r| r.0.energy).collect(),
        energy_q: rows.iter().map(|r| r.1.energy).collect(),
        heat_cl: rows.iter().map(|r| r.0.heat).collect(),
        heat_q: rows.iter().map(|r| r.1.heat).collect(),
    })
}

/// `steps` betas evenly spaced on `[beta_min, beta_max]`.
pub fn beta_range(beta_min: f64, beta_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(beta_min > 0.0 && beta_max > beta_min && beta_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "beta range",
            reason: format!("need 0 < beta-min < beta-max, got {beta_min}, {beta_max}"),
        });
    }
    if steps < 2 {
        return Err(Error::InvalidParameter { name: "steps", reason: format!("need at least 2, got {steps}") });
    }
    let d = (beta_max - beta_min) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i == steps - 1 { beta_max } else { beta_min + i as f64 * d }).collect())
}
