//! Modified Bessel functions `I₀`, `I₁`, the error function family, and
//! physicists' Hermite polynomials.

use crate::error::{Error, Result};

pub const BESSEL_MAX_ARG: f64 = 50.0;
pub const HERMITE_MAX_ORDER: usize = 64;

// Above this the asymptotic expansion's smallest term is below 1e-21.
const BESSEL_SERIES_LIMIT: f64 = 25.0;

/// `I_n(x)` for `n ∈ {0, 1}` and `|x| ≤ 50`.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > BESSEL_MAX_ARG {
        return Err(Error::OutOfRange { what: "bessel_i", value: x, range: "|x| ≤ 50" });
    }
    let nu = match order {
        0 => 0,
        1 => 1,
        _ => {
            return Err(Error::InvalidParameter {
                name: "order",
                reason: format!("only orders 0 and 1 are available, got {order}"),
            })
        }
    };
    let a = x.abs();
    let value = if a <= BESSEL_SERIES_LIMIT { bessel_series(nu, a) } else { bessel_asymptotic(nu, a) };
    Ok(if nu == 1 && x < 0.0 { -value } else { value })
}

pub fn bessel_i0(x: f64) -> Result<f64> {
    bessel_i(0, x)
}

pub fn bessel_i1(x: f64) -> Result<f64> {
    bessel_i(1, x)
}

/// `Σ_m (x/2)^{2m+ν} / (m! (m+ν)!)`; every term is positive.
fn bessel_series(nu: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if nu == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    for m in 1..400u32 {
        term *= q / (m as f64 * (m + nu) as f64);
        sum += term;
        if term <= f64::EPSILON * 1e-3 * sum {
            break;
        }
    }
    sum
}

/// `e^x / √(2πx) · Σ_j (-1)^j a_j(ν) / x^j`, truncated at the smallest term.
fn bessel_asymptotic(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..60u32 {
        let odd = (2 * j - 1) as f64;
        let next = -term * (mu - odd * odd) / (j as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    x.exp() / (2.0 * std::f64::consts::PI * x).sqrt() * sum
}

/// Odd by construction: `erf(-x) == -erf(x)` bit for bit.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        -libm::erf(-x)
    } else {
        libm::erf(x)
    }
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `e^{x²} erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 4.0 {
        (x * x).exp() * libm::erfc(x)
    } else {
        // Laplace continued fraction, converges fast for large x.
        let mut frac = 0.0;
        for n in (1..=40).rev() {
            frac = (n as f64 / 2.0) / (x + frac);
        }
        1.0 / (std::f64::consts::PI.sqrt() * (x + frac))
    }
}

/// Physicists' Hermite polynomial `H_n(z)`, `n ≤ 64`.
pub fn hermite(n: usize, z: f64) -> Result<f64> {
    if n > HERMITE_MAX_ORDER {
        return Err(Error::OutOfRange { what: "hermite order", value: n as f64, range: "n ≤ 64" });
    }
    let mut values = [0.0; HERMITE_MAX_ORDER + 1];
    hermite_table(z, &mut values[..=n]);
    Ok(values[n])
}

/// Fills `out[m] = H_m(z)` for every `m < out.len()` by the three-term
/// recurrence `H_{m+1} = 2z H_m - 2m H_{m-1}`.
pub fn hermite_table(z: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = 2.0 * z;
    }
    for m in 1..out.len().saturating_sub(1) {
        out[m + 1] = 2.0 * z * out[m] - 2.0 * m as f64 * out[m - 1];
    }
}
