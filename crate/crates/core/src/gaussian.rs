//! Isotropic Gaussian Wigner ensembles `G_γ = (γ²/π) exp(-γ²(x² + k²))`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::SeparableModel;
use crate::series::{TruncationPolicy, WignerFunction, W_FLOOR_RELATIVE};
use crate::special::{erf, erfcx, hermite_table, HERMITE_MAX_ORDER};

pub const GAMMA_MAX: f64 = 4.0;
const IMAGINARY_RESIDUE: f64 = 1e-13;

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 && gamma <= GAMMA_MAX {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "gamma", reason: format!("must lie in (0, 4], got {gamma}") })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianWigner {
    gamma: f64,
}

impl GaussianWigner {
    pub fn new(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(GaussianWigner { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `∂^n G = (-γ)^n h_n(γu) G`, for `n = 0..=order`.
    fn derivatives(&self, order: u32, u: f64, g: f64) -> Vec<f64> {
        let mut h = vec![0.0; order as usize + 1];
        hermite_table(self.gamma * u, &mut h);
        let mut scale = g;
        for v in h.iter_mut() {
            *v *= scale;
            scale *= -self.gamma;
        }
        h
    }
}

impl WignerFunction for GaussianWigner {
    fn value(&self, x: f64, k: f64) -> f64 {
        let g2 = self.gamma * self.gamma;
        g2 / std::f64::consts::PI * (-g2 * (x * x + k * k)).exp()
    }

    fn dx_all(&self, n: u32, x: f64, k: f64) -> Vec<f64> {
        self.derivatives(n, x, self.value(x, k))
    }

    fn dk_all(&self, n: u32, x: f64, k: f64) -> Vec<f64> {
        self.derivatives(n, k, self.value(x, k))
    }

    fn max_order(&self) -> u32 {
        HERMITE_MAX_ORDER as u32
    }

    fn peak(&self) -> f64 {
        self.gamma * self.gamma / std::f64::consts::PI
    }
}

#[derive(Debug, Clone)]
pub struct GaussianEnsemble {
    wigner: GaussianWigner,
    model: SeparableModel,
}

impl GaussianEnsemble {
    pub fn new(gamma: f64, model: SeparableModel) -> Result<Self> {
        Ok(GaussianEnsemble { wigner: GaussianWigner::new(gamma)?, model })
    }

    pub fn harper(gamma: f64, nu2: f64) -> Result<Self> {
        Self::new(gamma, crate::models::harper_model(nu2)?)
    }

    pub fn gamma(&self) -> f64 {
        self.wigner.gamma
    }

    pub fn model(&self) -> &SeparableModel {
        &self.model
    }

    pub fn wigner(&self) -> &GaussianWigner {
        &self.wigner
    }

    pub fn g_gamma(&self, x: f64, k: f64) -> f64 {
        self.wigner.value(x, k)
    }

    /// `2π ∫∫ G²` in closed form.
    pub fn purity(&self) -> f64 {
        self.gamma() * self.gamma()
    }

    /// `(∂_x J_x, ∂_k J_k)` summed as Hermite series,
    /// `∂_x J_x = 2iκ G Σ_η (iγμ/2)^{2η+1} h_{2η+1}(γx) / (2η+1)!` and
    /// `∂_k J_k = -2iυ G Σ_η (iγλ/2)^{2η+1} h_{2η+1}(γk) / (2η+1)!`.
    pub fn div_series(&self, x: f64, k: f64, policy: &TruncationPolicy) -> Result<(f64, f64)> {
        let r = self.model.reduction().ok_or_else(|| Error::NoHermiteReduction(self.model.name().into()))?;
        let g = self.g_gamma(x, k);
        let gamma = self.gamma();
        let i = Complex64::i();
        let dx = 2.0 * i * (r.kappa)(k) * g * self.hermite_sum(i * gamma * r.mu / 2.0, gamma * x, policy);
        let dk = -2.0 * i * (r.upsilon)(x) * g * self.hermite_sum(i * gamma * r.lambda / 2.0, gamma * k, policy);
        Ok((self.real_part(dx)?, self.real_part(dk)?))
    }

    /// `Σ_η s^{2η+1} h_{2η+1}(z) / (2η+1)!` under the truncation policy.
    fn hermite_sum(&self, s: Complex64, z: f64, policy: &TruncationPolicy) -> Complex64 {
        let eta_max = policy.eta_max() as usize;
        let mut h = vec![0.0; 2 * eta_max + 2];
        hermite_table(z, &mut h);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut power = s;
        let mut fact = 1.0;
        let mut small = 0;
        for eta in 0..=eta_max {
            let n = 2 * eta + 1;
            if eta > 0 {
                power *= s * s;
                fact *= ((n - 1) * n) as f64;
            }
            let term = power * (h[n] / fact);
            sum += term;
            if policy.tol() > 0.0 && term.norm() <= policy.tol() * sum.norm() {
                small += 1;
                if small == 2 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        sum
    }

    fn real_part(&self, z: Complex64) -> Result<f64> {
        if z.im.abs() > IMAGINARY_RESIDUE * z.re.abs().max(1.0) {
            return Err(Error::NoHermiteReduction(format!(
                "{}: imaginary residue {:e} in a physical divergence",
                self.model.name(),
                z.im
            )));
        }
        Ok(z.re)
    }

    /// Closed form of the Hermite series for any model with a reduction:
    /// `∂_x J_x = -2κ sin(γ²μx) e^{γ²μ²/4} G`, `∂_k J_k = 2υ sin(γ²λk) e^{γ²λ²/4} G`.
    pub fn div_closed_generic(&self, x: f64, k: f64) -> Result<(f64, f64)> {
        let r = self.model.reduction().ok_or_else(|| Error::NoHermiteReduction(self.model.name().into()))?;
        let g = self.g_gamma(x, k);
        let g2 = self.gamma() * self.gamma();
        let dx = -2.0 * (r.kappa)(k) * (g2 * r.mu * x).sin() * (g2 * r.mu * r.mu / 4.0).exp() * g;
        let dk = 2.0 * (r.upsilon)(x) * (g2 * r.lambda * k).sin() * (g2 * r.lambda * r.lambda / 4.0).exp() * g;
        Ok((self.real_part(dx)?, self.real_part(dk)?))
    }

    /// Harper closed form `(2 sin k sinh(γ²x), -2ν² sin x sinh(γ²k)) e^{-γ²/4} G`.
    pub fn div_closed(&self, x: f64, k: f64) -> Result<(f64, f64)> {
        let nu2 = self.model.require_harper()?;
        let g2 = self.gamma() * self.gamma();
        let common = 2.0 * (-g2 / 4.0).exp() * self.g_gamma(x, k);
        Ok((common * k.sin() * (g2 * x).sinh(), -common * nu2 * x.sin() * (g2 * k).sinh()))
    }

    /// Harper currents through the error function,
    /// `J_x = (γ/2√π) sin k e^{-γ²k²} [erf(γ(x-½)) - erf(γ(x+½))]` and its mirror.
    pub fn currents_erf(&self, x: f64, k: f64) -> Result<(f64, f64)> {
        let nu2 = self.model.require_harper()?;
        let gamma = self.gamma();
        let pref = gamma / (2.0 * std::f64::consts::PI.sqrt());
        let bracket = |u: f64| erf(gamma * (u - 0.5)) - erf(gamma * (u + 0.5));
        let jx = pref * k.sin() * (-gamma * gamma * k * k).exp() * bracket(x);
        let jk = -nu2 * pref * x.sin() * (-gamma * gamma * x * x).exp() * bracket(k);
        Ok((jx, jk))
    }

    /// `e^{γ²u²} [erf(γ(u-½)) - erf(γ(u+½))]`, evaluated through `erfcx` so
    /// the Gaussian factor never multiplies a vanishing bracket.
    fn scaled_bracket(&self, u: f64) -> f64 {
        let gamma = self.gamma();
        let g2 = gamma * gamma;
        let u = u.abs();
        let a = gamma * (u - 0.5);
        let b = gamma * (u + 0.5);
        erfcx(b) * (-g2 * (u + 0.25)).exp() - erfcx(a) * (g2 * (u - 0.25)).exp()
    }

    /// Quantum velocity `w = J / G` in closed form:
    /// `w_x = (√π / 2γ) sin k e^{γ²x²} [erf(γ(x-½)) - erf(γ(x+½))]`.
    pub fn velocity_field(&self, x: f64, k: f64) -> Result<(f64, f64)> {
        let nu2 = self.model.require_harper()?;
        self.check_defined(x, k)?;
        let pref = std::f64::consts::PI.sqrt() / (2.0 * self.gamma());
        let wx = pref * k.sin() * self.scaled_bracket(x);
        let wk = -nu2 * pref * x.sin() * self.scaled_bracket(k);
        if !(wx.is_finite() && wk.is_finite()) {
            return Err(Error::VelocityUndefined { x, k });
        }
        Ok((wx, wk))
    }

    /// `∇·w` by analytic differentiation of the closed-form velocity.
    pub fn gaussian_div_w(&self, x: f64, k: f64) -> Result<f64> {
        let nu2 = self.model.require_harper()?;
        self.check_defined(x, k)?;
        let gamma = self.gamma();
        let g2 = gamma * gamma;
        let sp = std::f64::consts::PI.sqrt();
        let damp = 2.0 * (-g2 / 4.0).exp();
        let along = |u: f64| gamma * sp * u * self.scaled_bracket(u) + damp * (g2 * u).sinh();
        let d = k.sin() * along(x) - nu2 * x.sin() * along(k);
        if !d.is_finite() {
            return Err(Error::VelocityUndefined { x, k });
        }
        Ok(d)
    }

    /// Division is defined while `G` stays representable; the closed forms
    /// themselves do not divide.
    fn check_defined(&self, x: f64, k: f64) -> Result<()> {
        let g = self.g_gamma(x, k);
        if !(g >= f64::MIN_POSITIVE) {
            return Err(Error::VelocityUndefined { x, k });
        }
        Ok(())
    }

    /// Whether the plain ratio `J / G` is above the Wigner-zero floor.
    pub fn above_floor(&self, x: f64, k: f64) -> bool {
        self.g_gamma(x, k) > W_FLOOR_RELATIVE * self.wigner.peak()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{central_derivative, volume_integral, PhaseGrid, ScalarField, Window};
    use crate::models::{harmonic_model, lotka_volterra_model};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};

    fn ens(gamma: f64) -> GaussianEnsemble {
        GaussianEnsemble::harper(gamma, 1.0).unwrap()
    }

    #[test]
    fn density_and_normalization() {
        let e = ens(1.0);
        assert!((e.g_gamma(0.0, 0.0) - 1.0 / PI).abs() < 1e-16);
        let g = PhaseGrid::square(6.0, 241, false).unwrap();
        let f = ScalarField::from_fn(&g, |x, k| e.g_gamma(x, k)).unwrap();
        assert!((volume_integral(&f, Window::full(&g)).unwrap() - 1.0).abs() < 1e-8);
        // x-marginal is a unit-normalized 1-D Gaussian
        let n = 4001;
        let h = 12.0 / (n - 1) as f64;
        let marginal: f64 = (0..n).map(|j| e.g_gamma(0.4, -6.0 + j as f64 * h)).sum::<f64>() * h;
        assert!((marginal - (-0.16f64).exp() / PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn purity_against_quadrature() {
        for gamma in [FRAC_1_SQRT_2, 1.0, SQRT_2, 3.0] {
            let e = ens(gamma);
            let g = PhaseGrid::square(8.0 / gamma, 401, false).unwrap();
            let f = ScalarField::from_fn(&g, |x, k| 2.0 * PI * e.g_gamma(x, k).powi(2)).unwrap();
            let q = volume_integral(&f, Window::full(&g)).unwrap();
            assert!((q - e.purity()).abs() < 1e-8 * e.purity(), "γ={gamma}: {q}");
        }
    }

    #[test]
    fn gamma_range() {
        assert!(GaussianEnsemble::harper(0.0, 1.0).is_err());
        assert!(GaussianEnsemble::harper(4.0, 1.0).is_ok());
        assert!(GaussianEnsemble::harper(4.01, 1.0).is_err());
    }

    #[test]
    fn series_and_closed_forms_agree() {
        let policy = TruncationPolicy::default();
        for nu2 in [0.5, 1.0, 2.0] {
            for gamma in [FRAC_1_SQRT_2, 1.0, SQRT_2] {
                let e = GaussianEnsemble::harper(gamma, nu2).unwrap();
                for &(x, k) in &[(1.0, 1.0), (0.0, 2.0), (-2.9, 0.4), (3.1, -3.1)] {
                    let s = e.div_series(x, k, &policy).unwrap();
                    let c = e.div_closed(x, k).unwrap();
                    let cg = e.div_closed_generic(x, k).unwrap();
                    assert!((s.0 - c.0).abs() < 1e-10 && (s.1 - c.1).abs() < 1e-10, "{s:?} {c:?}");
                    assert!((cg.0 - c.0).abs() < 1e-14 && (cg.1 - c.1).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn closed_form_special_points() {
        let e = ens(1.0);
        assert_eq!(e.div_closed(0.0, 1.3).unwrap().0, 0.0);
        assert_eq!(e.div_series(0.0, 1.3, &TruncationPolicy::default()).unwrap().0, 0.0);
        let (a, b) = e.div_closed(FRAC_PI_2, FRAC_PI_2).unwrap();
        let expect = 2.0 * (FRAC_PI_2).sinh() * (-0.25f64).exp() * e.g_gamma(FRAC_PI_2, FRAC_PI_2);
        assert!((a - expect).abs() < 1e-15 && (b + expect).abs() < 1e-15);
        let tiny = GaussianEnsemble::harper(1e-4, 1.0).unwrap();
        let (a, b) = tiny.div_closed(1.0, 1.0).unwrap();
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
    }

    #[test]
    fn leading_series_term_is_poisson_bracket() {
        let e = GaussianEnsemble::harper(1.2, 1.5).unwrap();
        let p0 = TruncationPolicy::fixed(0).unwrap();
        let (x, k) = (0.7, -1.1);
        let (dx, dk) = e.div_series(x, k, &p0).unwrap();
        let g = e.g_gamma(x, k);
        let g2 = 1.44;
        // ∂_k K ∂_x G and -∂_x V ∂_k G
        assert!((dx - (-k.sin()) * (-2.0 * g2 * x * g)).abs() < 1e-15);
        assert!((dk - (1.5 * x.sin()) * (-2.0 * g2 * k * g)).abs() < 1e-15);
    }

    #[test]
    fn non_reducible_models_are_rejected() {
        for m in [harmonic_model(), lotka_volterra_model()] {
            let e = GaussianEnsemble::new(1.0, m).unwrap();
            let err = e.div_series(0.1, 0.2, &TruncationPolicy::default()).unwrap_err();
            assert!(err.to_string().contains("no Hermite reduction"));
            assert!(e.div_closed(0.1, 0.2).is_err());
            assert!(e.currents_erf(0.1, 0.2).is_err());
            assert!(e.velocity_field(0.1, 0.2).is_err());
        }
    }

    #[test]
    fn erf_currents_special_values() {
        let e = ens(1.3);
        assert_eq!(e.currents_erf(0.8, 0.0).unwrap().0, 0.0);
        let k = 0.9f64;
        let pref = 1.3 / (2.0 * PI.sqrt());
        let expect = pref * k.sin() * (-1.69 * k * k).exp() * (-2.0 * erf(0.65));
        assert!((e.currents_erf(0.0, k).unwrap().0 - expect).abs() < 1e-16);
        for &k in &[0.1, 1.0, 3.0] {
            for &x in &[-5.0, 0.0, 2.0] {
                assert!(e.currents_erf(x, k).unwrap().0 <= 0.0);
            }
        }
    }

    #[test]
    fn erf_current_is_integral_of_divergence() {
        // ∫_{-∞}^{x} ∂_x J_x dx' by composite Simpson from x' = -12
        let e = ens(1.0);
        let (x, k) = (1.0f64, 1.0f64);
        let n = 20000;
        let a = -12.0;
        let h = (x - a) / n as f64;
        let f = |u: f64| e.div_closed(u, k).unwrap().0;
        let mut s = f(a) + f(x);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        let integral = s * h / 3.0;
        assert!((integral - e.currents_erf(x, k).unwrap().0).abs() < 1e-8);
    }

    #[test]
    fn erf_currents_differentiate_to_closed_divergence() {
        for gamma in [FRAC_1_SQRT_2, 1.0, SQRT_2] {
            let e = GaussianEnsemble::harper(gamma, 2.0).unwrap();
            for &(x, k) in &[(0.3, 0.4), (-2.0, 1.5), (2.8, -2.6)] {
                let dx = central_derivative(|u| e.currents_erf(u, k).unwrap().0, x, 1e-3);
                let dk = central_derivative(|u| e.currents_erf(x, u).unwrap().1, k, 1e-3);
                let (cx, ck) = e.div_closed(x, k).unwrap();
                assert!((dx - cx).abs() < 1e-6 && (dk - ck).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn velocity_two_routes() {
        for gamma in [FRAC_1_SQRT_2, 1.0, SQRT_2] {
            let e = GaussianEnsemble::harper(gamma, 1.4).unwrap();
            for &(x, k) in &[(1.0, 1.0), (-0.3, 2.2), (3.0, -0.5), (0.0, 0.0)] {
                let (wx, wk) = e.velocity_field(x, k).unwrap();
                let (jx, jk) = e.currents_erf(x, k).unwrap();
                let g = e.g_gamma(x, k);
                let tol = 1e-9 * wx.abs().max(wk.abs()).max(1.0);
                assert!((wx - jx / g).abs() < tol, "γ={gamma} ({x},{k}) {wx} vs {}", jx / g);
                assert!((wk - jk / g).abs() < tol);
                assert!((wx * g - jx).abs() < 1e-15 + 1e-12 * jx.abs());
            }
        }
        assert_eq!(ens(1.0).velocity_field(0.5, 0.0).unwrap().0, 0.0);
    }

    #[test]
    fn velocity_is_accurate_in_tails() {
        // erf(γ(x-½)) - erf(γ(x+½)) cancels to nothing here; rebuild the
        // bracket from erfc products instead, w_x = (√π/2γ) sin k e^{γ²x²} [erfc(b) - erfc(a)]
        let gamma = 4.0f64;
        let e = ens(gamma);
        for &x in &[2.2f64, 4.0, 5.0] {
            let (wx, _) = e.velocity_field(x, 1.0).unwrap();
            let (a, b) = (gamma * (x - 0.5), gamma * (x + 0.5));
            let g2 = gamma * gamma;
            let bracket = (g2 * x * x - b * b).exp() * erfcx(b) - (g2 * x * x - a * a).exp() * erfcx(a);
            let reference = PI.sqrt() / (2.0 * gamma) * 1f64.sin() * bracket;
            assert!(wx < 0.0);
            assert!(((wx - reference) / reference).abs() < 1e-12, "x={x}: {wx} vs {reference}");
            // the naive quotient has lost every digit
            let (jx, _) = e.currents_erf(x, 1.0).unwrap();
            let naive = jx / e.g_gamma(x, 1.0);
            assert!(!naive.is_finite() || ((naive - reference) / reference).abs() > 1e-6 || x < 3.0);
        }
        assert!(e.velocity_field(60.0, 0.0).is_err());
    }

    #[test]
    fn div_w_two_routes() {
        for gamma in [FRAC_1_SQRT_2, 1.0, SQRT_2] {
            let e = GaussianEnsemble::harper(gamma, 0.8).unwrap();
            for &(x, k) in &[(0.0, 0.0), (1.0, 1.0), (-2.5, 0.7), (3.0, 3.0)] {
                let d = e.gaussian_div_w(x, k).unwrap();
                let g = e.g_gamma(x, k);
                let (jx, jk) = e.currents_erf(x, k).unwrap();
                let (ax, ak) = e.div_closed(x, k).unwrap();
                // (G ∇·J - J·∇G) / G² with ∇G = -2γ²(x, k) G
                let g2 = gamma * gamma;
                let assembled = (g * (ax + ak) + 2.0 * g2 * g * (x * jx + k * jk)) / (g * g);
                assert!((d - assembled).abs() < 1e-8 * d.abs().max(1.0), "({x},{k}) {d} vs {assembled}");
            }
        }
    }

    #[test]
    fn div_w_on_k_axis_has_no_x_term() {
        let e = ens(1.0);
        let x = 0.9;
        let full = e.gaussian_div_w(x, 0.0).unwrap();
        let dk = central_derivative(|u| e.velocity_field(x, u).unwrap().1, 0.0, 1e-3);
        assert!((full - dk).abs() < 1e-9);
    }

    #[test]
    fn divergence_averages_out() {
        for gamma in [FRAC_1_SQRT_2, 1.0, SQRT_2] {
            let e = ens(gamma);
            let g = PhaseGrid::harper(201).unwrap();
            let f = ScalarField::from_fn(&g, |x, k| {
                let (a, b) = e.div_closed(x, k).unwrap();
                a + b
            })
            .unwrap();
            assert!(volume_integral(&f, Window::full(&g)).unwrap().abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn current_parities(x in -PI..PI, k in -PI..PI, gamma in 0.3f64..2.0) {
            let e = GaussianEnsemble::harper(gamma, 1.3).unwrap();
            let (jx, jk) = e.currents_erf(x, k).unwrap();
            prop_assert_eq!(e.currents_erf(x, -k).unwrap().0, -jx);
            prop_assert_eq!(e.currents_erf(-x, k).unwrap().1, -jk);
            let (a, b) = e.div_closed(x, k).unwrap();
            let (am, bm) = e.div_closed(-x, -k).unwrap();
            prop_assert!((a - am).abs() <= 1e-15 * a.abs().max(1e-300));
            prop_assert!((b - bm).abs() <= 1e-15 * b.abs().max(1e-300));
        }

        #[test]
        fn velocity_finite_on_cell(x in -PI..PI, k in -PI..PI, gamma in 0.1f64..SQRT_2) {
            let e = ens(gamma);
            let (wx, wk) = e.velocity_field(x, k).unwrap();
            prop_assert!(wx.is_finite() && wk.is_finite());
            prop_assert!(e.gaussian_div_w(x, k).unwrap().is_finite());
        }
    }
}
