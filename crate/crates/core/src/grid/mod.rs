//! Uniform phase-space grids and the scalar/vector fields that live on them.
//!
//! Nodes are stored row-major with `x` as the outer index and `k` as the
//! inner one. Both endpoints of every axis are nodes, so on a periodic axis the
//! last node duplicates the first.

mod calculus;
mod integrate;

pub use calculus::{central_derivative, divergence, partial_derivative, pointwise_divergence};
pub use integrate::{loop_flux, rectangle_loop, volume_integral, Window};

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    K,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    x_min: f64,
    x_max: f64,
    k_min: f64,
    k_max: f64,
    n_x: usize,
    n_k: usize,
    periodic: [bool; 2],
}

impl PhaseGrid {
    pub fn new(
        x_bounds: (f64, f64),
        k_bounds: (f64, f64),
        counts: (usize, usize),
        periodic: (bool, bool),
    ) -> Result<Self> {
        let (x_min, x_max) = x_bounds;
        let (k_min, k_max) = k_bounds;
        let (n_x, n_k) = counts;
        if !(x_min.is_finite() && x_max.is_finite() && k_min.is_finite() && k_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if x_min >= x_max {
            return Err(Error::InvalidGrid("x_min ≥ x_max".into()));
        }
        if k_min >= k_max {
            return Err(Error::InvalidGrid("k_min ≥ k_max".into()));
        }
        if n_x < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("n_x = {n_x} < {MIN_POINTS}")));
        }
        if n_k < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("n_k = {n_k} < {MIN_POINTS}")));
        }
        Ok(Self { x_min, x_max, k_min, k_max, n_x, n_k, periodic: [periodic.0, periodic.1] })
    }

    /// `[-π, π]²`, periodic on both axes.
    pub fn harper(n: usize) -> Result<Self> {
        Self::new((-PI, PI), (-PI, PI), (n, n), (true, true))
    }

    pub fn square(half_width: f64, n: usize, periodic: bool) -> Result<Self> {
        Self::new((-half_width, half_width), (-half_width, half_width), (n, n), (periodic, periodic))
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn k_min(&self) -> f64 {
        self.k_min
    }
    pub fn k_max(&self) -> f64 {
        self.k_max
    }
    pub fn n_x(&self) -> usize {
        self.n_x
    }
    pub fn n_k(&self) -> usize {
        self.n_k
    }
    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }
    pub fn len(&self) -> usize {
        self.n_x * self.n_k
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h_x(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }
    pub fn h_k(&self) -> f64 {
        (self.k_max - self.k_min) / (self.n_k - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h_x()
    }
    pub fn k(&self, j: usize) -> f64 {
        self.k_min + j as f64 * self.h_k()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_k + j
    }

    pub fn count(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.n_x,
            Axis::K => self.n_k,
        }
    }
    pub fn spacing(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.h_x(),
            Axis::K => self.h_k(),
        }
    }
    pub fn is_periodic(&self, axis: Axis) -> bool {
        match axis {
            Axis::X => self.periodic[0],
            Axis::K => self.periodic[1],
        }
    }

    pub fn contains(&self, x: f64, k: f64) -> bool {
        let tx = 1e-12 * (self.x_max - self.x_min);
        let tk = 1e-12 * (self.k_max - self.k_min);
        x >= self.x_min - tx && x <= self.x_max + tx && k >= self.k_min - tk && k <= self.k_max + tk
    }

    /// Node coordinates in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.n_x).flat_map(move |i| (0..self.n_k).map(move |j| (self.x(i), self.k(j))))
    }

    pub fn max_spacing(&self) -> f64 {
        self.h_x().max(self.h_k())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: PhaseGrid,
    values: Vec<f64>,
}

impl ScalarField {
    /// Samples `f` at every node. Evaluation runs row-parallel, but each
    /// node's value depends only on its coordinates.
    pub fn from_fn<F>(grid: &PhaseGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let values: Vec<f64> = (0..grid.n_x)
            .into_par_iter()
            .flat_map_iter(|i| {
                let x = grid.x(i);
                (0..grid.n_k).map(move |j| (x, grid.k(j)))
            })
            .map(|(x, k)| f(x, k))
            .collect();
        Self::from_values(*grid, values)
    }

    /// Like [`ScalarField::from_fn`] for fallible pointwise evaluators; the
    /// first error in storage order is returned.
    pub fn try_from_fn<F>(grid: &PhaseGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64> + Sync,
    {
        let values: Vec<Result<f64>> = (0..grid.n_x)
            .into_par_iter()
            .flat_map_iter(|i| {
                let x = grid.x(i);
                (0..grid.n_k).map(move |j| (x, grid.k(j)))
            })
            .map(|(x, k)| f(x, k))
            .collect();
        let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
        Self::from_values(*grid, values)
    }

    pub fn from_values(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (i, j) = (pos / grid.n_k, pos % grid.n_k);
            return Err(Error::NonFinite { x: grid.x(i), k: grid.k(j), value: values[pos] });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation.
    pub fn interpolate(&self, x: f64, k: f64) -> Result<f64> {
        if !self.grid.contains(x, k) {
            return Err(Error::PointOutsideGrid { x, k });
        }
        let (i, tx) = cell(x, self.grid.x_min, self.grid.h_x(), self.grid.n_x);
        let (j, tk) = cell(k, self.grid.k_min, self.grid.h_k(), self.grid.n_k);
        let f00 = self.at(i, j);
        let f01 = self.at(i, j + 1);
        let f10 = self.at(i + 1, j);
        let f11 = self.at(i + 1, j + 1);
        Ok((1.0 - tx) * ((1.0 - tk) * f00 + tk * f01) + tx * ((1.0 - tk) * f10 + tk * f11))
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &ScalarField, f: F) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("fields live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        ScalarField::from_values(self.grid, values)
    }
}

/// Cell index and fractional offset of `u` on a uniform axis.
fn cell(u: f64, min: f64, h: f64, n: usize) -> (usize, f64) {
    let s = ((u - min) / h).max(0.0);
    let i = (s.floor() as usize).min(n - 2);
    (i, (s - i as f64).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: PhaseGrid,
    x_values: Vec<f64>,
    k_values: Vec<f64>,
}

impl VectorField {
    pub fn from_fn<F>(grid: &PhaseGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> (f64, f64) + Sync,
    {
        Self::try_from_fn(grid, |x, k| Ok(f(x, k)))
    }

    pub fn try_from_fn<F>(grid: &PhaseGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<(f64, f64)> + Sync,
    {
        let pairs: Vec<Result<(f64, f64)>> = (0..grid.n_x)
            .into_par_iter()
            .flat_map_iter(|i| {
                let x = grid.x(i);
                (0..grid.n_k).map(move |j| (x, grid.k(j)))
            })
            .map(|(x, k)| f(x, k))
            .collect();
        let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
        let (x_values, k_values) = pairs.into_iter().unzip();
        Self::from_components(*grid, x_values, k_values)
    }

    pub fn from_components(grid: PhaseGrid, x_values: Vec<f64>, k_values: Vec<f64>) -> Result<Self> {
        let xs = ScalarField::from_values(grid, x_values)?;
        let ks = ScalarField::from_values(grid, k_values)?;
        Ok(Self { grid, x_values: xs.values, k_values: ks.values })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }
    pub fn x_values(&self) -> &[f64] {
        &self.x_values
    }
    pub fn k_values(&self) -> &[f64] {
        &self.k_values
    }

    pub fn x_component(&self) -> ScalarField {
        ScalarField { grid: self.grid, values: self.x_values.clone() }
    }
    pub fn k_component(&self) -> ScalarField {
        ScalarField { grid: self.grid, values: self.k_values.clone() }
    }

    pub fn magnitude(&self) -> ScalarField {
        let values = self.x_values.iter().zip(&self.k_values).map(|(a, b)| a.hypot(*b)).collect();
        ScalarField { grid: self.grid, values }
    }

    pub fn max_norm(&self) -> f64 {
        self.magnitude().max_abs()
    }

    pub fn interpolate(&self, x: f64, k: f64) -> Result<(f64, f64)> {
        Ok((self.x_component().interpolate(x, k)?, self.k_component().interpolate(x, k)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harper_grid_spacing() {
        let g = PhaseGrid::harper(201).unwrap();
        assert_eq!(g.h_x(), 2.0 * PI / 200.0);
        assert_eq!(g.h_k(), 2.0 * PI / 200.0);
        assert_eq!(g.x(0), -PI);
        assert_eq!(g.x(7), -PI + 7.0 * g.h_x());
    }

    #[test]
    fn unit_square_spacing() {
        let g = PhaseGrid::new((0.0, 1.0), (0.0, 1.0), (8, 8), (false, false)).unwrap();
        assert!((g.h_x() - 1.0 / 7.0).abs() < 1e-16);
        assert!((g.h_k() - 1.0 / 7.0).abs() < 1e-16);
    }

    #[test]
    fn rejects_reversed_bounds() {
        let err = PhaseGrid::new((1.0, 0.0), (0.0, 1.0), (8, 8), (false, false)).unwrap_err();
        assert!(err.to_string().contains("x_min ≥ x_max"), "{err}");
        let err = PhaseGrid::new((0.0, 1.0), (2.0, 2.0), (8, 8), (false, false)).unwrap_err();
        assert!(err.to_string().contains("k_min ≥ k_max"), "{err}");
        let err = PhaseGrid::new((0.0, 1.0), (0.0, 1.0), (7, 8), (false, false)).unwrap_err();
        assert!(err.to_string().contains("n_x"), "{err}");
    }

    #[test]
    fn evaluate_simple_fields() {
        let g = PhaseGrid::harper(201).unwrap();
        let zero = ScalarField::from_fn(&g, |_, _| 0.0).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let h = ScalarField::from_fn(&g, |x, k| k.cos() + x.cos()).unwrap();
        assert!((h.at(100, 100) - 2.0).abs() < 1e-15);

        let gsq = PhaseGrid::square(6.0, 121, false).unwrap();
        let gauss = ScalarField::from_fn(&gsq, |x, k| (-(x * x + k * k)).exp() / PI).unwrap();
        assert!((gauss.at(60, 60) - 0.318_309_886_183_790_7).abs() < 1e-15);
    }

    #[test]
    fn non_finite_reports_node() {
        let g = PhaseGrid::new((0.0, 1.0), (0.0, 1.0), (8, 8), (false, false)).unwrap();
        let err = ScalarField::from_fn(&g, |x, k| if x > 0.5 && k > 0.9 { f64::NAN } else { 1.0 }).unwrap_err();
        match err {
            Error::NonFinite { x, k, .. } => {
                assert!((x - 4.0 / 7.0).abs() < 1e-12);
                assert_eq!(k, 1.0);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn evaluation_is_deterministic() {
        let g = PhaseGrid::harper(101).unwrap();
        let f = |x: f64, k: f64| (x * 1.3).sin() * (k * 0.7).exp() + x * k;
        let a = ScalarField::from_fn(&g, f).unwrap();
        let b = ScalarField::from_fn(&g, f).unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn interpolation_reproduces_bilinear_functions() {
        let g = PhaseGrid::new((-1.0, 2.0), (0.0, 3.0), (13, 9), (false, false)).unwrap();
        let f = |x: f64, k: f64| 1.0 + 2.0 * x - 0.5 * k + 0.25 * x * k;
        let field = ScalarField::from_fn(&g, f).unwrap();
        for &(x, k) in &[(0.13, 1.77), (-1.0, 0.0), (2.0, 3.0), (1.234, 2.999)] {
            assert!((field.interpolate(x, k).unwrap() - f(x, k)).abs() < 1e-13);
        }
        assert!(field.interpolate(2.5, 1.0).is_err());
    }
}
