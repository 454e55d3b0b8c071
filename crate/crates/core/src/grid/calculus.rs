//! Fourth-order finite differences on grids and at single points.

use super::{Axis, ScalarField, VectorField};
use crate::error::{Error, Result};

// Central stencils, offsets -2..=2.
const D1_CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2_CENTRAL: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];

// One-sided stencils for the first two nodes of an open axis, offsets 0..
const D1_EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const D1_EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
const D2_EDGE0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
const D2_EDGE1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];

pub fn partial_derivative(field: &ScalarField, axis: Axis, order: u32) -> Result<ScalarField> {
    if !(1..=2).contains(&order) {
        return Err(Error::UnsupportedOrder { order });
    }
    let grid = field.grid();
    let n = grid.count(axis);
    let needed = 2 * order as usize + 5;
    if n < needed {
        return Err(Error::AxisTooShort { points: n, needed });
    }
    let h = grid.spacing(axis);
    let periodic = grid.is_periodic(axis);
    let (lines, stride, step) = match axis {
        Axis::X => (grid.n_k(), 1, grid.n_k()),
        Axis::K => (grid.n_x(), grid.n_k(), 1),
    };

    let src = field.values();
    let mut out = vec![0.0; src.len()];
    let mut line = vec![0.0; n];
    let mut deriv = vec![0.0; n];
    for l in 0..lines {
        let base = l * stride;
        for (p, v) in line.iter_mut().enumerate() {
            *v = src[base + p * step];
        }
        differentiate_line(&line, h, order, periodic, &mut deriv);
        for (p, d) in deriv.iter().enumerate() {
            out[base + p * step] = *d;
        }
    }
    ScalarField::from_values(*grid, out)
}

fn differentiate_line(f: &[f64], h: f64, order: u32, periodic: bool, out: &mut [f64]) {
    let n = f.len();
    let (central, scale) = match order {
        1 => (&D1_CENTRAL, 12.0 * h),
        _ => (&D2_CENTRAL, 12.0 * h * h),
    };
    if periodic {
        // The last node duplicates the first.
        let m = (n - 1) as isize;
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (s, c) in (-2isize..=2).zip(central) {
                let idx = (i as isize + s).rem_euclid(m) as usize;
                acc += c * f[idx];
            }
            *o = acc / scale;
        }
        return;
    }
    for i in 2..n - 2 {
        out[i] = (0..5).map(|s| central[s] * f[i + s - 2]).sum::<f64>() / scale;
    }
    let sign = if order == 1 { -1.0 } else { 1.0 };
    match order {
        1 => {
            out[0] = dot(&D1_EDGE0, &f[..5]) / scale;
            out[1] = dot(&D1_EDGE1, &f[..5]) / scale;
            out[n - 1] = sign * dot_rev(&D1_EDGE0, f, n - 1) / scale;
            out[n - 2] = sign * dot_rev(&D1_EDGE1, f, n - 1) / scale;
        }
        _ => {
            out[0] = dot(&D2_EDGE0, &f[..6]) / scale;
            out[1] = dot(&D2_EDGE1, &f[..6]) / scale;
            out[n - 1] = dot_rev(&D2_EDGE0, f, n - 1) / scale;
            out[n - 2] = dot_rev(&D2_EDGE1, f, n - 1) / scale;
        }
    }
}

fn dot(c: &[f64], f: &[f64]) -> f64 {
    c.iter().zip(f).map(|(a, b)| a * b).sum()
}

/// Mirrored edge stencil anchored at the last node.
fn dot_rev(c: &[f64], f: &[f64], last: usize) -> f64 {
    c.iter().enumerate().map(|(s, a)| a * f[last - s]).sum()
}

pub fn divergence(field: &VectorField) -> Result<ScalarField> {
    let dx = partial_derivative(&field.x_component(), Axis::X, 1)?;
    let dk = partial_derivative(&field.k_component(), Axis::K, 1)?;
    dx.zip_map(&dk, |a, b| a + b)
}

/// Fourth-order central difference of `f` at `u` with step `h`.
pub fn central_derivative<F: Fn(f64) -> f64>(f: F, u: f64, h: f64) -> f64 {
    (f(u - 2.0 * h) - 8.0 * f(u - h) + 8.0 * f(u + h) - f(u + 2.0 * h)) / (12.0 * h)
}

/// `∂_x J_x + ∂_k J_k` at one point by fourth-order central differences.
pub fn pointwise_divergence<F>(current: F, x: f64, k: f64, h: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<(f64, f64)>,
{
    let jx = |u: f64| current(u, k).map(|j| j.0);
    let jk = |u: f64| current(x, u).map(|j| j.1);
    let dx = (jx(x - 2.0 * h)? - 8.0 * jx(x - h)? + 8.0 * jx(x + h)? - jx(x + 2.0 * h)?) / (12.0 * h);
    let dk = (jk(k - 2.0 * h)? - 8.0 * jk(k - h)? + 8.0 * jk(k + h)? - jk(k + 2.0 * h)?) / (12.0 * h);
    Ok(dx + dk)
}
