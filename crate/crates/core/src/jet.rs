//! Truncated Taylor series in one variable. Coefficient `c[n]` holds
//! `f^(n)(u₀) / n!`, so products and exponentials of known derivative
//! sequences give exact higher derivatives without symbolic algebra.

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    /// Builds the jet of length `len` from a derivative callback `n ↦ f^(n)(u₀)`.
    pub fn from_derivatives(len: usize, f: impl Fn(u32) -> f64) -> Self {
        let mut c = Vec::with_capacity(len);
        let mut fact = 1.0;
        for n in 0..len {
            if n > 0 {
                fact *= n as f64;
            }
            c.push(f(n as u32) / fact);
        }
        Jet { c }
    }

    pub fn constant(len: usize, value: f64) -> Self {
        let mut c = vec![0.0; len];
        if let Some(first) = c.first_mut() {
            *first = value;
        }
        Jet { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c.first().copied().unwrap_or(0.0)
    }

    /// `f^(n)(u₀)`, zero beyond the truncation order.
    pub fn derivative_at(&self, n: usize) -> f64 {
        let Some(&c) = self.c.get(n) else { return 0.0 };
        (1..=n).fold(c, |acc, j| acc * j as f64)
    }

    /// All derivatives `f^(n)(u₀)` for `n < len`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(n, c)| {
                if n > 0 {
                    fact *= n as f64;
                }
                c * fact
            })
            .collect()
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { c: self.c.iter().map(|v| v * s).collect() }
    }

    /// `exp(f)` by `g' = f' g`: `n g_n = Σ_{j=1}^{n} j f_j g_{n-j}`.
    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut g = vec![0.0; n];
        if n == 0 {
            return Jet { c: g };
        }
        g[0] = self.c[0].exp();
        for m in 1..n {
            let s: f64 = (1..=m).map(|j| j as f64 * self.c[j] * g[m - j]).sum();
            g[m] = s / m as f64;
        }
        Jet { c: g }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let n = self.c.len().min(rhs.c.len());
        Jet { c: (0..n).map(|i| self.c[i] + rhs.c[i]).collect() }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let n = self.c.len().min(rhs.c.len());
        Jet { c: (0..n).map(|i| self.c[i] - rhs.c[i]).collect() }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.c.len().min(rhs.c.len());
        let c = (0..n).map(|m| (0..=m).map(|j| self.c[j] * rhs.c[m - j]).sum()).collect();
        Jet { c }
    }
}
