//! Volume integrals and closed-loop fluxes.

use super::{PhaseGrid, ScalarField, VectorField};
use crate::error::{Error, Result};

/// Minimum number of pieces each polyline edge is split into.
pub const SAMPLES_PER_EDGE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x: (f64, f64),
    pub k: (f64, f64),
}

impl Window {
    pub fn new(x: (f64, f64), k: (f64, f64)) -> Self {
        Self { x, k }
    }

    pub fn full(grid: &PhaseGrid) -> Self {
        Self { x: (grid.x_min(), grid.x_max()), k: (grid.k_min(), grid.k_max()) }
    }

    pub fn area(&self) -> f64 {
        (self.x.1 - self.x.0) * (self.k.1 - self.k.0)
    }
}

/// Integral of the piecewise-bilinear interpolant of `field` over `window`.
///
/// On node-aligned windows this is the 2-D trapezoidal rule, which is
/// spectrally accurate for smooth integrands over a full periodic cell.
pub fn volume_integral(field: &ScalarField, window: Window) -> Result<f64> {
    let grid = field.grid();
    let outside = || Error::WindowOutsideGrid { x0: window.x.0, x1: window.x.1, k0: window.k.0, k1: window.k.1 };
    if !(window.x.0 <= window.x.1 && window.k.0 <= window.k.1) {
        return Err(outside());
    }
    if !grid.contains(window.x.0, window.k.0) || !grid.contains(window.x.1, window.k.1) {
        return Err(outside());
    }
    let wx = axis_weights(grid.x_min(), grid.h_x(), grid.n_x(), window.x);
    let wk = axis_weights(grid.k_min(), grid.h_k(), grid.n_k(), window.k);
    let n_k = grid.n_k();
    let values = field.values();
    let total = wx
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(i, w)| {
            let row = &values[i * n_k..(i + 1) * n_k];
            w * row.iter().zip(&wk).map(|(f, v)| f * v).sum::<f64>()
        })
        .sum();
    Ok(total)
}

/// Integrals of the hat functions of a uniform axis over `[a, b]`.
fn axis_weights(min: f64, h: f64, n: usize, (a, b): (f64, f64)) -> Vec<f64> {
    let max = min + (n - 1) as f64 * h;
    let (a, b) = (a.clamp(min, max), b.clamp(min, max));
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let left = min + i as f64 * h;
        let right = min + (i + 1) as f64 * h;
        let s = a.max(left);
        let t = b.min(right);
        if t <= s {
            continue;
        }
        if s == left && t == right {
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        } else {
            w[i] += ((right - s).powi(2) - (right - t).powi(2)) / (2.0 * h);
            w[i + 1] += ((t - left).powi(2) - (s - left).powi(2)) / (2.0 * h);
        }
    }
    w
}

/// Counter-clockwise rectangle as a closed polyline.
pub fn rectangle_loop(window: Window) -> Vec<(f64, f64)> {
    let (x0, x1) = window.x;
    let (k0, k1) = window.k;
    vec![(x0, k0), (x1, k0), (x1, k1), (x0, k1), (x0, k0)]
}

/// Outward flux `∮ J·n dℓ` through a closed polyline traversed
/// counter-clockwise.
///
/// Edges are split at every grid line they cross (and into at least
/// [`SAMPLES_PER_EDGE`] pieces); Simpson's rule on each piece integrates the
/// bilinear interpolant exactly.
pub fn loop_flux(field: &VectorField, polyline: &[(f64, f64)]) -> Result<f64> {
    if polyline.len() < 4 {
        return Err(Error::OpenPolyline(format!("{} vertices, need at least 4", polyline.len())));
    }
    let first = polyline[0];
    let last = polyline[polyline.len() - 1];
    let scale = 1e-12 * (1.0 + first.0.abs().max(first.1.abs()));
    if (first.0 - last.0).abs() > scale || (first.1 - last.1).abs() > scale {
        return Err(Error::OpenPolyline(format!("first vertex {first:?} differs from last {last:?}")));
    }
    let grid = field.grid();
    if let Some(&(x, k)) = polyline.iter().find(|(x, k)| !grid.contains(*x, *k)) {
        return Err(Error::PointOutsideGrid { x, k });
    }
    let jx = field.x_component();
    let jk = field.k_component();
    let mut total = 0.0;
    for edge in polyline.windows(2) {
        let (p, q) = (edge[0], edge[1]);
        let (dx, dk) = (q.0 - p.0, q.1 - p.1);
        if dx == 0.0 && dk == 0.0 {
            continue;
        }
        let integrand = |t: f64| -> Result<f64> {
            let (x, k) = (p.0 + t * dx, p.1 + t * dk);
            Ok(jx.interpolate(x, k)? * dk - jk.interpolate(x, k)? * dx)
        };
        let breaks = edge_breaks(grid, p, q);
        for piece in breaks.windows(2) {
            let (a, b) = (piece[0], piece[1]);
            let mid = 0.5 * (a + b);
            total += (b - a) / 6.0 * (integrand(a)? + 4.0 * integrand(mid)? + integrand(b)?);
        }
    }
    Ok(total)
}

/// Sorted parameters in `[0, 1]` where the segment `p → q` crosses grid
/// lines, merged with a uniform subdivision.
fn edge_breaks(grid: &PhaseGrid, p: (f64, f64), q: (f64, f64)) -> Vec<f64> {
    let mut ts: Vec<f64> = (0..=SAMPLES_PER_EDGE).map(|s| s as f64 / SAMPLES_PER_EDGE as f64).collect();
    let mut crossings = |a: f64, b: f64, min: f64, h: f64, n: usize| {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let first = ((lo - min) / h).ceil().max(0.0) as usize;
        let mut i = first;
        while i < n {
            let line = min + i as f64 * h;
            if line > hi {
                break;
            }
            ts.push(((line - a) / (b - a)).clamp(0.0, 1.0));
            i += 1;
        }
    };
    crossings(p.0, q.0, grid.x_min(), grid.h_x(), grid.n_x());
    crossings(p.1, q.1, grid.k_min(), grid.h_k(), grid.n_k());
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    ts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::divergence;
    use crate::special::bessel_i0;
    use std::f64::consts::PI;

    #[test]
    fn constant_over_harper_cell() {
        let g = PhaseGrid::harper(201).unwrap();
        let one = ScalarField::from_fn(&g, |_, _| 1.0).unwrap();
        let v = volume_integral(&one, Window::full(&g)).unwrap();
        assert!((v - 4.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn gaussian_normalization() {
        let g = PhaseGrid::square(6.0, 201, false).unwrap();
        let gauss = ScalarField::from_fn(&g, |x, k| (-(x * x + k * k)).exp() / PI).unwrap();
        let v = volume_integral(&gauss, Window::full(&g)).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn boltzmann_weight_matches_bessel() {
        let g = PhaseGrid::harper(201).unwrap();
        let f = ScalarField::from_fn(&g, |x, k| (-(k.cos() + x.cos())).exp()).unwrap();
        let v = volume_integral(&f, Window::full(&g)).unwrap();
        let expected = 4.0 * PI * PI * bessel_i0(1.0).unwrap().powi(2);
        assert!((v - 63.2809).abs() < 1e-3);
        assert!((v - expected).abs() < 1e-8, "{v} vs {expected}");
    }

    #[test]
    fn partial_windows_integrate_bilinear_exactly() {
        let g = PhaseGrid::new((-1.0, 2.0), (0.0, 3.0), (10, 13), (false, false)).unwrap();
        let f = ScalarField::from_fn(&g, |x, k| 2.0 + x - 3.0 * k + x * k).unwrap();
        let w = Window::new((-0.37, 1.21), (0.55, 2.02));
        let exact = {
            let (a, b) = w.x;
            let (c, d) = w.k;
            let x1 = (b * b - a * a) / 2.0;
            let k1 = (d * d - c * c) / 2.0;
            2.0 * (b - a) * (d - c) + x1 * (d - c) - 3.0 * (b - a) * k1 + x1 * k1
        };
        assert!((volume_integral(&f, w).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn nonnegative_integrand_gives_nonnegative_integral() {
        let g = PhaseGrid::harper(51).unwrap();
        let f = ScalarField::from_fn(&g, |x, k| (x.sin() * k.cos()).powi(2)).unwrap();
        for w in [Window::new((-1.0, 0.3), (0.1, 0.2)), Window::full(&g), Window::new((0.0, 0.0), (0.0, 1.0))] {
            assert!(volume_integral(&f, w).unwrap() >= 0.0);
        }
    }

    #[test]
    fn window_outside_is_rejected() {
        let g = PhaseGrid::harper(51).unwrap();
        let f = ScalarField::from_fn(&g, |_, _| 1.0).unwrap();
        assert!(matches!(
            volume_integral(&f, Window::new((-4.0, 0.0), (0.0, 1.0))),
            Err(Error::WindowOutsideGrid { .. })
        ));
    }

    #[test]
    fn flux_of_rotation_vanishes() {
        let g = PhaseGrid::square(3.0, 61, false).unwrap();
        let rot = VectorField::from_fn(&g, |x, k| (k, -x)).unwrap();
        for w in [Window::new((-1.0, 1.0), (-1.0, 1.0)), Window::new((-2.3, 0.4), (0.7, 2.9))] {
            assert!(loop_flux(&rot, &rectangle_loop(w)).unwrap().abs() < 1e-6);
        }
    }

    #[test]
    fn flux_of_radial_field_is_twice_area() {
        let g = PhaseGrid::square(2.0, 41, false).unwrap();
        let radial = VectorField::from_fn(&g, |x, k| (x, k)).unwrap();
        let flux = loop_flux(&radial, &rectangle_loop(Window::new((-0.5, 0.5), (-0.5, 0.5)))).unwrap();
        assert!((flux - 2.0).abs() < 1e-4, "{flux}");
        // clockwise traversal flips the sign
        let cw: Vec<_> = rectangle_loop(Window::new((-0.5, 0.5), (-0.5, 0.5))).into_iter().rev().collect();
        assert!((loop_flux(&radial, &cw).unwrap() + 2.0).abs() < 1e-4);
    }

    #[test]
    fn flux_around_slanted_polygon() {
        let g = PhaseGrid::square(2.0, 41, false).unwrap();
        let radial = VectorField::from_fn(&g, |x, k| (x, k)).unwrap();
        // triangle of area 1/2
        let tri = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.0, 0.0)];
        assert!((loop_flux(&radial, &tri).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn open_polyline_is_rejected() {
        let g = PhaseGrid::square(2.0, 41, false).unwrap();
        let radial = VectorField::from_fn(&g, |x, k| (x, k)).unwrap();
        let err = loop_flux(&radial, &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::OpenPolyline(_)));
    }

    #[test]
    fn greens_theorem_on_smooth_field() {
        let g = PhaseGrid::harper(201).unwrap();
        let j = VectorField::from_fn(&g, |x, k| (x.sin() * k.cos(), (x + k).cos())).unwrap();
        let div = divergence(&j).unwrap();
        let w = Window::new((-1.3, 0.9), (-0.4, 2.2));
        let flux = loop_flux(&j, &rectangle_loop(w)).unwrap();
        let vol = volume_integral(&div, w).unwrap();
        assert!((flux - vol).abs() < 10.0 * g.max_spacing().powi(2) * flux.abs().max(1.0));
    }
}
