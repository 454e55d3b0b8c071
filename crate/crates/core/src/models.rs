//! Separable Hamiltonians `H(x, k) = K(k) + V(x)` with analytic derivatives
//! of every order.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;

/// `(order, argument) ↦ ∂^order f(argument)`.
pub type DerivFn = Arc<dyn Fn(u32, f64) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Harper { nu2: f64 },
    Harmonic,
    LotkaVolterra,
    Custom,
}

/// Natural phase-space window of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x: (f64, f64),
    pub k: (f64, f64),
    pub periodic: bool,
}

impl Domain {
    pub fn grid(&self, n: usize) -> Result<PhaseGrid> {
        PhaseGrid::new(self.x, self.k, (n, n), (self.periodic, self.periodic))
    }
}

/// Odd derivatives written as `∂_k^{2η+1}K = μ^{2η+1} κ(k)` and
/// `∂_x^{2η+1}V = λ^{2η+1} υ(x)` with constant `μ`, `λ`.
#[derive(Clone)]
pub struct HermiteReduction {
    pub mu: Complex64,
    pub lambda: Complex64,
    pub kappa: ComplexFn,
    pub upsilon: ComplexFn,
}

impl fmt::Debug for HermiteReduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermiteReduction").field("mu", &self.mu).field("lambda", &self.lambda).finish_non_exhaustive()
    }
}

#[derive(Clone)]
pub struct SeparableModel {
    name: String,
    kind: ModelKind,
    k_deriv: DerivFn,
    v_deriv: DerivFn,
    domain: Domain,
    params: Vec<(String, f64)>,
    reduction: Option<HermiteReduction>,
}

impl fmt::Debug for SeparableModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeparableModel")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl SeparableModel {
    /// A user-defined model. `k_deriv(m, k)` must return `∂_k^m K(k)` and
    /// likewise for `v_deriv`.
    pub fn custom(
        name: impl Into<String>,
        k_deriv: impl Fn(u32, f64) -> f64 + Send + Sync + 'static,
        v_deriv: impl Fn(u32, f64) -> f64 + Send + Sync + 'static,
        domain: Domain,
    ) -> Self {
        SeparableModel {
            name: name.into(),
            kind: ModelKind::Custom,
            k_deriv: Arc::new(k_deriv),
            v_deriv: Arc::new(v_deriv),
            domain,
            params: Vec::new(),
            reduction: None,
        }
    }

    pub fn with_reduction(mut self, reduction: HermiteReduction) -> Self {
        self.reduction = Some(reduction);
        self
    }

    pub fn with_param(mut self, name: impl Into<String>, value: f64) -> Self {
        self.params.push((name.into(), value));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|p| p.1)
    }

    pub fn reduction(&self) -> Option<&HermiteReduction> {
        self.reduction.as_ref()
    }

    /// `ν²` when this is the Harper model.
    pub fn harper_nu2(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Harper { nu2 } => Some(nu2),
            _ => None,
        }
    }

    pub fn require_harper(&self) -> Result<f64> {
        self.harper_nu2().ok_or_else(|| Error::ModelMismatch { expected: "harper", got: self.name.clone() })
    }

    pub fn k_deriv(&self, order: u32, k: f64) -> f64 {
        (self.k_deriv)(order, k)
    }

    pub fn v_deriv(&self, order: u32, x: f64) -> f64 {
        (self.v_deriv)(order, x)
    }

    pub fn kinetic(&self, k: f64) -> f64 {
        self.k_deriv(0, k)
    }

    pub fn potential(&self, x: f64) -> f64 {
        self.v_deriv(0, x)
    }

    pub fn energy(&self, x: f64, k: f64) -> f64 {
        self.kinetic(k) + self.potential(x)
    }

    /// Hamiltonian vector field `(∂_k K, -∂_x V)`.
    pub fn velocity(&self, x: f64, k: f64) -> (f64, f64) {
        (self.k_deriv(1, k), -self.v_deriv(1, x))
    }

    /// Largest deviation between `∂^{m+1}` and a finite-difference derivative
    /// of `∂^m`, over `m < max_order` and the given sample arguments, scaled
    /// by `max(1, |∂^{m+1}|)`.
    pub fn derivative_consistency(&self, max_order: u32, samples: &[f64]) -> f64 {
        let h = 1e-3;
        let mut worst = 0.0f64;
        for m in 0..max_order {
            for &u in samples {
                for f in [&self.k_deriv, &self.v_deriv] {
                    let fd = crate::grid::central_derivative(|t| f(m, t), u, h);
                    let exact = f(m + 1, u);
                    worst = worst.max((fd - exact).abs() / exact.abs().max(1.0));
                }
            }
        }
        worst
    }
}

/// `∂^m cos(u)`, cycling through cos, -sin, -cos, sin.
pub fn cos_derivative(order: u32, u: f64) -> f64 {
    match order % 4 {
        0 => u.cos(),
        1 => -u.sin(),
        2 => -u.cos(),
        _ => u.sin(),
    }
}

/// `cos k + ν² cos x` on the periodic cell `[-π, π]²`.
pub fn harper_model(nu2: f64) -> Result<SeparableModel> {
    if !(nu2.is_finite() && nu2 > 0.0) {
        return Err(Error::InvalidParameter { name: "nu2", reason: format!("must be positive, got {nu2}") });
    }
    let pi = std::f64::consts::PI;
    let i = Complex64::i();
    Ok(SeparableModel {
        name: "harper".into(),
        kind: ModelKind::Harper { nu2 },
        k_deriv: Arc::new(cos_derivative),
        v_deriv: Arc::new(move |m, x| nu2 * cos_derivative(m, x)),
        domain: Domain { x: (-pi, pi), k: (-pi, pi), periodic: true },
        params: vec![("nu2".into(), nu2)],
        reduction: Some(HermiteReduction {
            mu: i,
            lambda: i,
            kappa: Arc::new(move |k: f64| i * k.sin()),
            upsilon: Arc::new(move |x: f64| i * nu2 * x.sin()),
        }),
    })
}

/// `k²/2 + x²/2`.
pub fn harmonic_model() -> SeparableModel {
    fn quadratic(order: u32, u: f64) -> f64 {
        match order {
            0 => 0.5 * u * u,
            1 => u,
            2 => 1.0,
            _ => 0.0,
        }
    }
    SeparableModel {
        name: "harmonic".into(),
        kind: ModelKind::Harmonic,
        k_deriv: Arc::new(quadratic),
        v_deriv: Arc::new(quadratic),
        domain: Domain { x: (-6.0, 6.0), k: (-6.0, 6.0), periodic: false },
        params: Vec::new(),
        reduction: None,
    }
}

/// `x + k + e^{-x} + e^{-k}`.
pub fn lotka_volterra_model() -> SeparableModel {
    fn branch(order: u32, u: f64) -> f64 {
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        let e = sign * (-u).exp();
        match order {
            0 => u + e,
            1 => 1.0 + e,
            _ => e,
        }
    }
    SeparableModel {
        name: "lotka-volterra".into(),
        kind: ModelKind::LotkaVolterra,
        k_deriv: Arc::new(branch),
        v_deriv: Arc::new(branch),
        domain: Domain { x: (-1.0, 5.0), k: (-1.0, 5.0), periodic: false },
        params: Vec::new(),
        reduction: None,
    }
}

/// Looks a built-in model up by its CLI name.
pub fn model_by_name(name: &str, nu2: f64) -> Result<SeparableModel> {
    match name {
        "harper" => harper_model(nu2),
        "harmonic" => Ok(harmonic_model()),
        "lotka-volterra" | "lv" => Ok(lotka_volterra_model()),
        other => Err(Error::InvalidParameter { name: "model", reason: format!("unknown model '{other}'") }),
    }
}
