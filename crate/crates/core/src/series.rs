//! Truncated series for the Wigner currents, `∂_τ W` and `∇·w` of a
//! separable Hamiltonian.
//!
//! With `c_η = (-1)^η / (4^η (2η+1)!)`:
//!
//! ```text
//! J_x    =  Σ c_η ∂^{2η+1}K ∂_x^{2η}W
//! J_k    = -Σ c_η ∂^{2η+1}V ∂_k^{2η}W
//! ∂_τ W  =  Σ c_η (∂^{2η+1}V ∂_k^{2η+1}W - ∂^{2η+1}K ∂_x^{2η+1}W)
//! ∇·w    =  Σ_{η≥1} c_η (∂^{2η+1}K ∂_x[∂_x^{2η}W / W] - ∂^{2η+1}V ∂_k[∂_k^{2η}W / W])
//! ```

use crate::error::{Error, Result};
use crate::models::SeparableModel;

pub const MAX_ETA: u32 = 31;
pub const W_FLOOR_RELATIVE: f64 = 1e-12;

/// A Wigner function with analytic partial derivatives.
pub trait WignerFunction: Sync {
    fn value(&self, x: f64, k: f64) -> f64;

    /// `[∂_x^0 W, …, ∂_x^n W]` at `(x, k)`.
    fn dx_all(&self, n: u32, x: f64, k: f64) -> Vec<f64>;

    /// `[∂_k^0 W, …, ∂_k^n W]` at `(x, k)`.
    fn dk_all(&self, n: u32, x: f64, k: f64) -> Vec<f64>;

    /// Highest derivative order available.
    fn max_order(&self) -> u32;

    /// Reference magnitude `max |W|` for the division floor.
    fn peak(&self) -> f64;

    fn dx_n(&self, n: u32, x: f64, k: f64) -> f64 {
        self.dx_all(n, x, k)[n as usize]
    }

    fn dk_n(&self, n: u32, x: f64, k: f64) -> f64 {
        self.dk_all(n, x, k)[n as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    eta_max: u32,
    tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { eta_max: 25, tol: 1e-12 }
    }
}

impl TruncationPolicy {
    pub fn new(eta_max: u32, tol: f64) -> Result<Self> {
        if eta_max > MAX_ETA {
            return Err(Error::InvalidParameter { name: "eta_max", reason: format!("{eta_max} exceeds {MAX_ETA}") });
        }
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::InvalidParameter { name: "tol", reason: format!("must be finite and ≥ 0, got {tol}") });
        }
        Ok(TruncationPolicy { eta_max, tol })
    }

    /// Sums every term through `eta_max`, no early exit.
    pub fn fixed(eta_max: u32) -> Result<Self> {
        Self::new(eta_max, 0.0)
    }

    pub fn eta_max(&self) -> u32 {
        self.eta_max
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Stops at `eta_max` or once two consecutive terms fall below
    /// `tol · |partial sum|`.
    pub fn sum(&self, terms: &[f64]) -> f64 {
        let mut sum = 0.0;
        let mut small = 0;
        for &t in terms.iter().take(self.eta_max as usize + 1) {
            sum += t;
            if self.tol > 0.0 && t.abs() <= self.tol * sum.abs() {
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
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    CurrentX,
    CurrentK,
    DwDt,
    DivW,
}

/// `(-1)^η / (4^η (2η+1)!)`.
pub fn coefficient(eta: u32) -> f64 {
    let mut c = if eta % 2 == 0 { 1.0 } else { -1.0 };
    for _ in 0..eta {
        c /= 4.0;
    }
    for j in 2..=(2 * eta + 1) {
        c /= j as f64;
    }
    c
}

fn required_order(q: Quantity, eta_max: u32) -> u32 {
    match q {
        Quantity::CurrentX | Quantity::CurrentK => 2 * eta_max,
        Quantity::DwDt | Quantity::DivW => 2 * eta_max + 1,
    }
}

/// Individual series terms `η = 0..=eta_max` of quantity `q` at `(x, k)`.
pub fn series_terms(
    q: Quantity,
    model: &SeparableModel,
    w: &dyn WignerFunction,
    eta_max: u32,
    x: f64,
    k: f64,
) -> Result<Vec<f64>> {
    let needed = required_order(q, eta_max);
    if needed > w.max_order() {
        return Err(Error::InsufficientOrder { needed, available: w.max_order() });
    }
    let etas = 0..=eta_max;
    let terms = match q {
        Quantity::CurrentX => {
            let d = w.dx_all(needed, x, k);
            etas.map(|e| coefficient(e) * model.k_deriv(2 * e + 1, k) * d[2 * e as usize]).collect()
        }
        Quantity::CurrentK => {
            let d = w.dk_all(needed, x, k);
            etas.map(|e| -coefficient(e) * model.v_deriv(2 * e + 1, x) * d[2 * e as usize]).collect()
        }
        Quantity::DwDt => {
            let dx = w.dx_all(needed, x, k);
            let dk = w.dk_all(needed, x, k);
            etas.map(|e| {
                let n = 2 * e + 1;
                coefficient(e) * (model.v_deriv(n, x) * dk[n as usize] - model.k_deriv(n, k) * dx[n as usize])
            })
            .collect()
        }
        Quantity::DivW => {
            let dx = w.dx_all(needed, x, k);
            let dk = w.dk_all(needed, x, k);
            let w0 = dx[0];
            if w0.abs() <= W_FLOOR_RELATIVE * w.peak() {
                return Err(Error::VelocityUndefined { x, k });
            }
            // ∂[∂^{n}W / W] = ∂^{n+1}W / W - ∂^{n}W ∂W / W²
            let ratio = |d: &[f64], n: usize| d[n + 1] / w0 - d[n] * d[1] / (w0 * w0);
            etas.map(|e| {
                if e == 0 {
                    return 0.0;
                }
                let n = 2 * e + 1;
                let m = 2 * e as usize;
                coefficient(e) * (model.k_deriv(n, k) * ratio(&dx, m) - model.v_deriv(n, x) * ratio(&dk, m))
            })
            .collect()
        }
    };
    Ok(terms)
}

pub fn evaluate(
    q: Quantity,
    model: &SeparableModel,
    w: &dyn WignerFunction,
    policy: &TruncationPolicy,
    x: f64,
    k: f64,
) -> Result<f64> {
    let terms = series_terms(q, model, w, policy.eta_max(), x, k)?;
    Ok(policy.sum(&terms))
}

pub fn current_x(m: &SeparableModel, w: &dyn WignerFunction, p: &TruncationPolicy, x: f64, k: f64) -> Result<f64> {
    evaluate(Quantity::CurrentX, m, w, p, x, k)
}

pub fn current_k(m: &SeparableModel, w: &dyn WignerFunction, p: &TruncationPolicy, x: f64, k: f64) -> Result<f64> {
    evaluate(Quantity::CurrentK, m, w, p, x, k)
}

pub fn current(m: &SeparableModel, w: &dyn WignerFunction, p: &TruncationPolicy, x: f64, k: f64) -> Result<(f64, f64)> {
    Ok((current_x(m, w, p, x, k)?, current_k(m, w, p, x, k)?))
}

#[allow(non_snake_case)]
pub fn dW_dt(m: &SeparableModel, w: &dyn WignerFunction, p: &TruncationPolicy, x: f64, k: f64) -> Result<f64> {
    evaluate(Quantity::DwDt, m, w, p, x, k)
}

pub fn div_w(m: &SeparableModel, w: &dyn WignerFunction, p: &TruncationPolicy, x: f64, k: f64) -> Result<f64> {
    evaluate(Quantity::DivW, m, w, p, x, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianWigner;
    use crate::grid::{central_derivative, pointwise_divergence};
    use crate::models::{harmonic_model, harper_model, lotka_volterra_model};
    use crate::td::{TdWigner, WignerKind};
    use proptest::prelude::*;

    #[test]
    fn coefficients() {
        assert_eq!(coefficient(0), 1.0);
        assert!((coefficient(1) + 1.0 / 24.0).abs() < 1e-17);
        assert!((coefficient(2) - 1.0 / 1920.0).abs() < 1e-18);
    }

    #[test]
    fn policy_limits() {
        assert!(TruncationPolicy::new(32, 1e-12).is_err());
        assert!(TruncationPolicy::new(31, -1.0).is_err());
        let p = TruncationPolicy::default();
        assert_eq!((p.eta_max(), p.tol()), (25, 1e-12));
        let terms = [1.0, 1e-13, 1e-14, 5.0];
        assert_eq!(p.sum(&terms), 1.0 + 1e-13 + 1e-14);
        assert_eq!(TruncationPolicy::fixed(3).unwrap().sum(&terms), 1.0 + 1e-13 + 1e-14 + 5.0);
        assert_eq!(TruncationPolicy::fixed(0).unwrap().sum(&terms), 1.0);
    }

    #[test]
    fn insufficient_order_is_rejected() {
        struct Shallow;
        impl WignerFunction for Shallow {
            fn value(&self, _: f64, _: f64) -> f64 {
                1.0
            }
            fn dx_all(&self, n: u32, _: f64, _: f64) -> Vec<f64> {
                let mut v = vec![0.0; n as usize + 1];
                v[0] = 1.0;
                v
            }
            fn dk_all(&self, n: u32, x: f64, k: f64) -> Vec<f64> {
                self.dx_all(n, x, k)
            }
            fn max_order(&self) -> u32 {
                4
            }
            fn peak(&self) -> f64 {
                1.0
            }
        }
        let m = harper_model(1.0).unwrap();
        let p = TruncationPolicy::fixed(2).unwrap();
        assert!(current_x(&m, &Shallow, &p, 0.1, 0.2).is_ok());
        assert!(matches!(dW_dt(&m, &Shallow, &p, 0.1, 0.2), Err(Error::InsufficientOrder { needed: 5, available: 4 })));
        let p3 = TruncationPolicy::fixed(3).unwrap();
        assert!(current_x(&m, &Shallow, &p3, 0.1, 0.2).is_err());
    }

    #[test]
    fn harmonic_currents_are_classical() {
        let m = harmonic_model();
        let g = GaussianWigner::new(0.8).unwrap();
        let p = TruncationPolicy::default();
        for &(x, k) in &[(0.3, -0.7), (1.5, 2.0), (-2.2, 0.1)] {
            let w = g.value(x, k);
            assert_eq!(current_x(&m, &g, &p, x, k).unwrap(), k * w);
            assert_eq!(current_k(&m, &g, &p, x, k).unwrap(), -x * w);
            assert!(div_w(&m, &g, &p, x, k).unwrap().abs() < 1e-15);
        }
        let g1 = GaussianWigner::new(1.0).unwrap();
        assert!(dW_dt(&m, &g1, &p, 0.4, 1.1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn harper_symmetry_zeros() {
        let m = harper_model(1.3).unwrap();
        let g = GaussianWigner::new(1.0).unwrap();
        let p = TruncationPolicy::default();
        assert_eq!(current_x(&m, &g, &p, 0.9, 0.0).unwrap(), 0.0);
        assert_eq!(current_k(&m, &g, &p, 0.0, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_harper_current_matches_erf_form() {
        for nu2 in [1.0, 2.0] {
            let m = harper_model(nu2).unwrap();
            let g = GaussianWigner::new(1.0).unwrap();
            let (jx, jk) = current(&m, &g, &TruncationPolicy::default(), 1.0, 1.0).unwrap();
            // independent erf evaluation
            let gamma = 1.0f64;
            let pref = gamma / (2.0 * std::f64::consts::PI.sqrt());
            let bracket = |u: f64| libm::erf(gamma * (u - 0.5)) - libm::erf(gamma * (u + 0.5));
            let ex = pref * 1f64.sin() * (-gamma * gamma).exp() * bracket(1.0);
            assert!((jx - ex).abs() < 1e-10, "{jx} vs {ex}");
            assert!((jk + nu2 * ex).abs() < 1e-10, "{jk} vs {}", -nu2 * ex);
        }
    }

    #[test]
    fn classical_truncation_reproduces_classical_flow() {
        let p0 = TruncationPolicy::fixed(0).unwrap();
        for m in [harper_model(0.7).unwrap(), lotka_volterra_model(), harmonic_model()] {
            let g = GaussianWigner::new(1.2).unwrap();
            for &(x, k) in &[(0.2, 0.4), (1.1, -0.6), (-0.8, 2.0)] {
                let (vx, vk) = m.velocity(x, k);
                let w = g.value(x, k);
                let (jx, jk) = current(&m, &g, &p0, x, k).unwrap();
                assert_eq!(jx, vx * w);
                assert_eq!(jk, vk * w);
                assert_eq!(div_w(&m, &g, &p0, x, k).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn continuity_identity_pointwise() {
        let p = TruncationPolicy::fixed(12).unwrap();
        let h = 1e-3;
        let cases: Vec<(SeparableModel, Box<dyn WignerFunction>)> = vec![
            (harper_model(1.0).unwrap(), Box::new(GaussianWigner::new(1.0).unwrap())),
            (harper_model(2.0).unwrap(), Box::new(TdWigner::new(harper_model(2.0).unwrap(), 1.0, WignerKind::Corrected).unwrap())),
            (lotka_volterra_model(), Box::new(GaussianWigner::new(0.7).unwrap())),
        ];
        for (m, w) in &cases {
            for &(x, k) in &[(1.0, 1.0), (0.3, -1.2), (-2.0, 0.5)] {
                let lhs = dW_dt(m, w.as_ref(), &p, x, k).unwrap();
                let div = pointwise_divergence(|a, b| current(m, w.as_ref(), &p, a, b), x, k, h).unwrap();
                let scale = {
                    let (a, b) = current(m, w.as_ref(), &p, x, k).unwrap();
                    a.hypot(b).max(w.peak())
                };
                assert!((lhs + div).abs() < 1e-6 * scale, "{} at ({x},{k}): {lhs} vs {div}", m.name());
            }
        }
    }

    #[test]
    fn boltzmann_is_classically_stationary() {
        let m = harper_model(1.4).unwrap();
        let w0 = TdWigner::new(m.clone(), 2.0, WignerKind::Classical).unwrap();
        let p0 = TruncationPolicy::fixed(0).unwrap();
        for &(x, k) in &[(0.5, 0.5), (-1.1, 2.7)] {
            assert!(dW_dt(&m, &w0, &p0, x, k).unwrap().abs() < 1e-16);
        }
    }

    #[test]
    fn div_w_against_finite_differences() {
        // ∇·(J/W) from the series currents, differentiated numerically
        let m = harper_model(1.5).unwrap();
        let w = TdWigner::new(m.clone(), 0.8, WignerKind::Corrected).unwrap();
        let p = TruncationPolicy::fixed(6).unwrap();
        let vel = |x: f64, k: f64| {
            let (jx, jk) = current(&m, &w, &p, x, k)?;
            let v = w.value(x, k);
            Ok((jx / v, jk / v))
        };
        for &(x, k) in &[(0.4, 1.0), (-1.7, 0.3), (2.5, -2.2)] {
            let fd = pointwise_divergence(vel, x, k, 1e-3).unwrap();
            let s = div_w(&m, &w, &p, x, k).unwrap();
            assert!((fd - s).abs() < 1e-8, "({x},{k}): {fd} vs {s}");
        }
    }

    #[test]
    fn div_w_of_boltzmann_at_first_order() {
        // For W = W₀ only η = 1 contributes at O(β²):
        // ∇·w = -(β²/12) sin x sin k (ν⁴ cos x - ν² cos k)
        let (beta, nu2) = (1.3f64, 1.7f64);
        let m = harper_model(nu2).unwrap();
        let w0 = TdWigner::new(m.clone(), beta, WignerKind::Classical).unwrap();
        let p1 = TruncationPolicy::fixed(1).unwrap();
        for &(x, k) in &[(0.4, 1.0), (-1.7, 0.3), (std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2)] {
            let s = div_w(&m, &w0, &p1, x, k).unwrap();
            let hand = beta * beta / 12.0 * x.sin() * k.sin() * (nu2 * nu2 * x.cos() - nu2 * k.cos());
            assert!((s + hand).abs() < 1e-12, "({x},{k}): {s} vs {}", -hand);
        }
    }

    #[test]
    fn div_w_rejects_wigner_zeros() {
        let m = harper_model(1.0).unwrap();
        let g = GaussianWigner::new(4.0).unwrap();
        let err = div_w(&m, &g, &TruncationPolicy::default(), 3.0, 3.0).unwrap_err();
        assert!(err.to_string().contains("velocity undefined near Wigner zero"));
    }

    #[test]
    fn gaussian_partial_sums_decay_factorially() {
        // Cramér: |h_n(z)| ≤ 1.0865 √(2ⁿ n!) e^{z²/2}, so each term of J_x is
        // bounded by an envelope whose successive ratio shrinks like γ²/(8η)
        let m = harper_model(1.0).unwrap();
        for gamma in [std::f64::consts::FRAC_1_SQRT_2, 1.0, std::f64::consts::SQRT_2] {
            let g = GaussianWigner::new(gamma).unwrap();
            for &(x, k) in &[(1.0, 1.0), (2.5, -0.7), (-3.0, 2.0)] {
                let t = series_terms(Quantity::CurrentX, &m, &g, 20, x, k).unwrap();
                let z = gamma * x;
                let env = |e: usize| {
                    let n = 2 * e;
                    let fact: f64 = (1..=n).map(|j| j as f64).product();
                    coefficient(e as u32).abs() * gamma.powi(n as i32) * 1.0865 * (2f64.powi(n as i32) * fact).sqrt()
                        * (z * z / 2.0).exp()
                        * g.value(x, k)
                };
                for e in 0..=20 {
                    assert!(t[e].abs() <= env(e) * (1.0 + 1e-12), "γ={gamma} ({x},{k}) η={e}");
                }
                let mut last = f64::INFINITY;
                for e in 2..20 {
                    let r = env(e + 1) / env(e);
                    assert!(r < last && r < gamma * gamma / (2.0 * e as f64));
                    last = r;
                }
            }
        }
    }

    #[test]
    fn wspec_derivatives_match_finite_differences() {
        let m = lotka_volterra_model();
        let specs: Vec<Box<dyn WignerFunction>> = vec![
            Box::new(GaussianWigner::new(1.3).unwrap()),
            Box::new(TdWigner::new(m, 0.6, WignerKind::Corrected).unwrap()),
        ];
        for w in &specs {
            for &(x, k) in &[(0.5, 1.0), (1.7, 0.2)] {
                let dx = w.dx_all(4, x, k);
                let dk = w.dk_all(4, x, k);
                assert_eq!(dx[0], w.value(x, k));
                assert_eq!(dk[0], w.value(x, k));
                for n in 0..4u32 {
                    let fx = central_derivative(|u| w.dx_n(n, u, k), x, 1e-3);
                    let fk = central_derivative(|u| w.dk_n(n, x, u), k, 1e-3);
                    let s = w.peak();
                    assert!((fx - dx[n as usize + 1]).abs() < 1e-6 * s.max(dx[n as usize + 1].abs()));
                    assert!((fk - dk[n as usize + 1]).abs() < 1e-6 * s.max(dk[n as usize + 1].abs()));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn series_currents_are_real_and_symmetric(x in -3.0f64..3.0, k in -3.0f64..3.0) {
            let m = harper_model(1.0).unwrap();
            let g = GaussianWigner::new(1.0).unwrap();
            let p = TruncationPolicy::default();
            let (jx, jk) = current(&m, &g, &p, x, k).unwrap();
            let (jxm, _) = current(&m, &g, &p, x, -k).unwrap();
            let (_, jkm) = current(&m, &g, &p, -x, k).unwrap();
            prop_assert!((jx + jxm).abs() < 1e-15);
            prop_assert!((jk + jkm).abs() < 1e-15);
        }
    }
}
