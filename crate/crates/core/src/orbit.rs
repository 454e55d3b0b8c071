//! Classical Harper level sets `cos k + ν² cos x = ε`: classification and
//! RK4 tracing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::SeparableModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    ClosedPositive,
    ClosedNegative,
    Open,
    Empty,
    /// `|ε|` sits exactly on a boundary of the classification intervals.
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalOrbit {
    pub energy: f64,
    pub branch: Branch,
    pub polyline: Vec<(f64, f64)>,
    pub max_energy_error: f64,
    pub returned_to_seed: bool,
}

const STEPS_PER_PERIOD: f64 = 2000.0;
const MAX_PERIODS: f64 = 20.0;

/// Interval rules: empty beyond `ν² + 1`, open for `0 < |ε| < ν² - 1`,
/// closed for `max(ν² - 1, 0) < |ε| < ν² + 1`.
pub fn classify_harper(nu2: f64, energy: f64) -> Branch {
    let a = energy.abs();
    let top = nu2 + 1.0;
    let split = (nu2 - 1.0).max(0.0);
    if a > top {
        Branch::Empty
    } else if a > 0.0 && a < nu2 - 1.0 {
        Branch::Open
    } else if a > split && a < top {
        if energy > 0.0 {
            Branch::ClosedPositive
        } else {
            Branch::ClosedNegative
        }
    } else {
        Branch::Threshold
    }
}

/// An axis-aligned seed line: coordinate `axis` (0 for x, 1 for k) fixed at
/// `at`, the other one searched on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
struct SeedLine {
    axis: usize,
    at: f64,
    lo: f64,
    hi: f64,
}

impl SeedLine {
    fn fixed_k(k: f64, lo: f64, hi: f64) -> Self {
        SeedLine { axis: 1, at: k, lo, hi }
    }

    fn fixed_x(x: f64, lo: f64, hi: f64) -> Self {
        SeedLine { axis: 0, at: x, lo, hi }
    }

    fn point(&self, t: f64) -> [f64; 2] {
        if self.axis == 1 {
            [t, self.at]
        } else {
            [self.at, t]
        }
    }
}

struct Harper {
    nu2: f64,
}

impl Harper {
    fn energy(&self, p: [f64; 2]) -> f64 {
        p[1].cos() + self.nu2 * p[0].cos()
    }

    fn velocity(&self, p: [f64; 2]) -> [f64; 2] {
        [-p[1].sin(), self.nu2 * p[0].sin()]
    }

    fn rk4(&self, p: [f64; 2], h: f64) -> [f64; 2] {
        let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
        let k1 = self.velocity(p);
        let k2 = self.velocity(add(p, k1, h / 2.0));
        let k3 = self.velocity(add(p, k2, h / 2.0));
        let k4 = self.velocity(add(p, k3, h));
        [
            p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    /// Bisection for `H = ε` on a line where `H` is monotone; `None` when the
    /// energy is off the line's range or the root is a fixed point.
    fn seed(&self, line: SeedLine, energy: f64) -> Option<[f64; 2]> {
        let f = |t: f64| self.energy(line.point(t)) - energy;
        let (mut a, mut b) = (line.lo, line.hi);
        let (fa, fb) = (f(a), f(b));
        if fa * fb > 0.0 {
            return None;
        }
        let t = if fa == 0.0 {
            a
        } else if fb == 0.0 {
            b
        } else {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                if (f(m) < 0.0) == (fa < 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        };
        let p = line.point(t);
        let v = self.velocity(p);
        (v[0].hypot(v[1]) > 1e-6).then_some(p)
    }
}

/// Classifies `ε` and traces the level set through one period, or across
/// one periodic cell for running orbits.
pub fn classify_and_trace(model: &SeparableModel, energy: f64) -> Result<ClassicalOrbit> {
    let nu2 = model.require_harper()?;
    let branch = classify_harper(nu2, energy);
    let h = Harper { nu2 };
    let top = nu2 + 1.0;
    let gap = (nu2 - 1.0).abs();

    if energy.abs() > top {
        return Ok(ClassicalOrbit { energy, branch, polyline: Vec::new(), max_energy_error: 0.0, returned_to_seed: false });
    }
    if energy.abs() == top {
        let p = if energy > 0.0 { (0.0, 0.0) } else { (PI, PI) };
        let err = (h.energy([p.0, p.1]) - energy).abs();
        return Ok(ClassicalOrbit { energy, branch, polyline: vec![p], max_energy_error: err, returned_to_seed: true });
    }

    // Seed lines are chosen per topology so running orbits stay inside
    // [-π, π]² and the seed is never a saddle.
    let candidates: Vec<SeedLine> = if energy > gap {
        vec![SeedLine::fixed_k(0.0, 0.0, PI), SeedLine::fixed_x(0.0, 0.0, PI)]
    } else if energy < -gap {
        vec![SeedLine::fixed_k(PI, 0.0, PI), SeedLine::fixed_x(PI, 0.0, PI)]
    } else if energy.abs() < gap && nu2 > 1.0 {
        vec![SeedLine::fixed_k(-PI, 0.0, PI)]
    } else if energy.abs() < gap {
        vec![SeedLine::fixed_x(-PI, -PI, 0.0)]
    } else {
        vec![
            SeedLine::fixed_k(0.0, 0.0, PI),
            SeedLine::fixed_x(0.0, 0.0, PI),
            SeedLine::fixed_k(PI, 0.0, PI),
            SeedLine::fixed_x(PI, 0.0, PI),
            SeedLine::fixed_x(PI / 2.0, 0.0, PI),
        ]
    };
    let Some((line, seed)) = candidates.iter().find_map(|l| h.seed(*l, energy).map(|p| (*l, p))) else {
        return Ok(ClassicalOrbit { energy, branch, polyline: Vec::new(), max_energy_error: 0.0, returned_to_seed: false });
    };

    let period = 2.0 * PI / nu2.sqrt();
    let dt = period / STEPS_PER_PERIOD;
    let max_steps = (MAX_PERIODS * STEPS_PER_PERIOD) as usize;
    let c = line.axis;
    let dir = h.velocity(seed)[c].signum();
    // Return to the seed line, or to its image one cell further on.
    let targets = [line.at, line.at + 2.0 * PI * dir];

    let mut poly = vec![seed];
    let mut p = seed;
    let mut returned = false;
    for _ in 0..max_steps {
        let next = h.rk4(p, dt);
        let hit = targets.iter().find(|&&s| (p[c] - s) * dir < 0.0 && (next[c] - s) * dir >= 0.0);
        if let Some(&s) = hit {
            let frac = (s - p[c]) / (next[c] - p[c]);
            poly.push(h.rk4(p, frac * dt));
            returned = true;
            break;
        }
        poly.push(next);
        p = next;
    }
    let max_energy_error = poly.iter().map(|q| (h.energy(*q) - energy).abs()).fold(0.0, f64::max);
    Ok(ClassicalOrbit {
        energy,
        branch,
        polyline: poly.into_iter().map(|q| (q[0], q[1])).collect(),
        max_energy_error,
        returned_to_seed: returned,
    })
}
