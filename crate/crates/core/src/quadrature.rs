//! Gauss–Legendre rules on the reference interval `[0, 1]` and composite
//! integration with breakpoint splitting.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest supported Gauss point count.
pub const MAX_GAUSS_POINTS: usize = 16;

/// A quadrature rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    points: Vec<f64>,
    weights: Vec<f64>,
    /// Highest polynomial degree integrated exactly.
    order: usize,
}

impl QuadRule {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pairs of (point, weight) on `[0, 1]`.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    /// Integrates `f` over `[a, b]` with a single application of the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let len = b - a;
        self.iter().map(|(xi, w)| w * f(a + len * xi)).sum::<f64>() * len
    }
}

/// `m`-point Gauss–Legendre rule mapped to `[0, 1]`.
///
/// Nodes are the roots of the Legendre polynomial `P_m`, found by Newton
/// iteration from the Chebyshev-like initial guesses; weights follow from
/// `P_m'` at the roots.
pub fn gauss_rule(m: usize) -> Result<QuadRule> {
    if m == 0 || m > MAX_GAUSS_POINTS {
        return Err(Error::invalid(format!(
            "gauss rule with {m} points is unsupported (1..={MAX_GAUSS_POINTS})"
        )));
    }
    let mut points = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp;
        loop {
            let (p, d) = legendre_with_derivative(m, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, z);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1, 1] -> [0, 1]; roots come out in decreasing order
        points[i] = 0.5 * (1.0 - z);
        points[m - 1 - i] = 0.5 * (1.0 + z);
        weights[i] = 0.5 * w;
        weights[m - 1 - i] = 0.5 * w;
    }
    Ok(QuadRule {
        points,
        weights,
        order: 2 * m - 1,
    })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Splits `[a, b]` at every breakpoint lying strictly inside it.
pub fn split_interval(a: f64, b: f64, breakpoints: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&c| c > a && c < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut pieces = Vec::with_capacity(cuts.len() + 1);
    let mut left = a;
    for c in cuts {
        pieces.push((left, c));
        left = c;
    }
    pieces.push((left, b));
    pieces
}

/// Composite integral of `f` over `[a, b]` using `panels` equal panels, each
/// further split at `breakpoints`.
pub fn composite<F: Fn(f64) -> f64>(
    rule: &QuadRule,
    a: f64,
    b: f64,
    panels: usize,
    breakpoints: &[f64],
    f: F,
) -> f64 {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == panels { b } else { lo + width };
        for (p, q) in split_interval(lo, hi, breakpoints) {
            total += rule.integrate(p, q, &f);
        }
    }
    total
}
