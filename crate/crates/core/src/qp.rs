//! Strictly convex quadratic programs with coordinate upper bounds,
//!
//! ```text
//! minimize ½xᵀAx − bᵀx  subject to  x_i ≤ u_i  for i ∈ C,
//! ```
//!
//! solved by a primal–dual active set iteration, with exhaustive
//! active-set enumeration as an independent check for small instances.

use crate::banded::SymmetricBandedMatrix;
use crate::error::{Error, Result};

/// Largest constraint count accepted by [`solve_bruteforce`].
pub const BRUTEFORCE_MAX_CONSTRAINTS: usize = 20;

#[derive(Debug, Clone)]
pub struct BoundQp {
    a: SymmetricBandedMatrix,
    b: Vec<f64>,
    constrained: Vec<usize>,
    bounds: Vec<f64>,
}

impl BoundQp {
    /// `bounds[k]` bounds coordinate `constrained[k]` from above; `+∞`
    /// disables it.
    pub fn new(
        a: SymmetricBandedMatrix,
        b: Vec<f64>,
        constrained: Vec<usize>,
        bounds: Vec<f64>,
    ) -> Result<Self> {
        let n = a.dim();
        if b.len() != n {
            return Err(Error::invalid(format!(
                "rhs has {} entries, matrix is {n}x{n}",
                b.len()
            )));
        }
        if constrained.len() != bounds.len() {
            return Err(Error::invalid(
                "constraint index and bound lists differ in length",
            ));
        }
        let mut seen = vec![false; n];
        for &i in &constrained {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid(format!(
                    "bad or repeated constrained index {i}"
                )));
            }
        }
        if bounds.iter().any(|u| u.is_nan() || *u == f64::NEG_INFINITY) {
            return Err(Error::invalid("bounds must be finite or +inf"));
        }
        Ok(BoundQp {
            a,
            b,
            constrained,
            bounds,
        })
    }

    pub fn matrix(&self) -> &SymmetricBandedMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn constrained(&self) -> &[usize] {
        &self.constrained
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `½xᵀAx − bᵀx`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        0.5 * self.a.quad_form(x) - self.b.iter().zip(x).map(|(b, x)| b * x).sum::<f64>()
    }

    /// Same problem with `(A, b)` multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut a = self.a.clone();
        a.scale(s);
        BoundQp {
            a,
            b: self.b.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// `b − Ax`, accumulated in compensated arithmetic.
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.a.residual_compensated(&self.b, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: Vec<f64>,
    /// Multiplier per constraint (aligned with [`BoundQp::constrained`]).
    pub multipliers: Vec<f64>,
    /// Positions into the constraint list that are active at `x`.
    pub active_set: Vec<usize>,
    pub iterations: usize,
    /// Constraints whose active-set indicator was exactly zero at some
    /// iteration; such ties leave the active set.
    pub degenerate_ties: usize,
}

/// Residuals of the optimality system `Ax − b + Eᵀλ = 0`, `x_C ≤ u`,
/// `λ ≥ 0`, `λ(x_C − u) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// `‖Ax − b + Eᵀλ‖_∞`
    pub stationarity: f64,
    /// `max(x_C − u, 0)`
    pub primal_violation: f64,
    /// Smallest multiplier (0 when there are no constraints).
    pub min_multiplier: f64,
    /// `max |λ_k (x_{C_k} − u_k)|`
    pub complementarity: f64,
}

impl KktResiduals {
    /// Checks all four residuals against the tolerances used throughout:
    /// 1e-10 for stationarity, feasibility and complementarity and -1e-12
    /// for multipliers.
    pub fn within_tolerance(&self) -> bool {
        self.stationarity <= 1e-10
            && self.primal_violation <= 1e-10
            && self.min_multiplier >= -1e-12
            && self.complementarity <= 1e-10
    }
}

pub fn kkt_residual(qp: &BoundQp, sol: &QpSolution) -> Result<KktResiduals> {
    if sol.x.len() != qp.dim() || sol.multipliers.len() != qp.constrained.len() {
        return Err(Error::invalid(
            "solution dimensions do not match the problem",
        ));
    }
    let mut r: Vec<f64> = qp.residual(&sol.x).iter().map(|v| -v).collect();
    for (&i, &l) in qp.constrained.iter().zip(&sol.multipliers) {
        r[i] += l;
    }
    let stationarity = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut primal_violation = 0.0_f64;
    let mut complementarity = 0.0_f64;
    for ((&i, &u), &l) in qp.constrained.iter().zip(&qp.bounds).zip(&sol.multipliers) {
        let slack = sol.x[i] - u;
        primal_violation = primal_violation.max(slack);
        if l != 0.0 {
            complementarity = complementarity.max((l * slack).abs());
        }
    }
    let min_multiplier = sol
        .multipliers
        .iter()
        .copied()
        .reduce(f64::min)
        .unwrap_or(0.0);
    Ok(KktResiduals {
        stationarity,
        primal_violation,
        min_multiplier,
        complementarity,
    })
}

pub const DEFAULT_PDAS_C: f64 = 1.0;

const REFINEMENT_STEPS: usize = 3;
pub const DEFAULT_PDAS_MAX_ITER: usize = 100;

/// Primal–dual active set method.
///
/// Starts from the unconstrained minimizer with the violated bounds as the
/// first active set. Each iteration pins the active coordinates to their
/// bounds, solves for the rest, reads off multipliers `λ = (b − Ax)` on the
/// active set, and takes the next active set as
/// `{k : λ_k + c(x_k − u_k) > 0}`. Stops when the set repeats.
pub fn solve_pdas(qp: &BoundQp, c: f64, max_iter: usize) -> Result<QpSolution> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!(
            "complementarity constant {c} must be positive"
        )));
    }
    let chol = qp.a.cholesky()?;
    let x0 = refine(qp, &chol, chol.solve(&qp.b));
    let mut active: Vec<bool> = qp
        .constrained
        .iter()
        .zip(&qp.bounds)
        .map(|(&i, &u)| x0[i] > u)
        .collect();
    let mut last = QpSolution {
        x: x0,
        multipliers: vec![0.0; qp.constrained.len()],
        active_set: positions(&active),
        iterations: 0,
        degenerate_ties: 0,
    };
    let mut ties = 0;
    for iteration in 1..=max_iter {
        let (x, multipliers) = solve_with_active(qp, &active)?;
        let mut next = Vec::with_capacity(active.len());
        for (k, (&i, &u)) in qp.constrained.iter().zip(&qp.bounds).enumerate() {
            let indicator = multipliers[k] + c * (x[i] - u);
            if indicator == 0.0 {
                ties += 1;
            }
            next.push(indicator > 0.0);
        }
        last = QpSolution {
            x,
            multipliers,
            active_set: positions(&active),
            iterations: iteration,
            degenerate_ties: ties,
        };
        if next == active {
            return Ok(last);
        }
        active = next;
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        last: Box::new(last),
    })
}

fn positions(flags: &[bool]) -> Vec<usize> {
    flags
        .iter()
        .enumerate()
        .filter_map(|(k, &on)| on.then_some(k))
        .collect()
}

/// Solves the stationarity system with the active coordinates fixed at
/// their bounds. Returns `x` and the multipliers (zero off the active set).
fn solve_with_active(qp: &BoundQp, active: &[bool]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = qp.dim();
    let mut fixed = vec![false; n];
    let mut x = vec![0.0; n];
    for ((&i, &u), &on) in qp.constrained.iter().zip(&qp.bounds).zip(active) {
        if on {
            fixed[i] = true;
            x[i] = u;
        }
    }
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    if !free.is_empty() {
        let sub = qp.a.principal_submatrix(&free);
        let chol = sub.cholesky()?;
        let r = qp.residual(&x);
        let rhs: Vec<f64> = free.iter().map(|&i| r[i]).collect();
        let y = chol.solve(&rhs);
        for (&i, v) in free.iter().zip(y) {
            x[i] = v;
        }
        // iterative refinement on the free block
        for _ in 0..REFINEMENT_STEPS {
            let r = qp.residual(&x);
            let rf: Vec<f64> = free.iter().map(|&i| r[i]).collect();
            let dy = chol.solve(&rf);
            for (&i, d) in free.iter().zip(dy) {
                x[i] += d;
            }
        }
    }
    let r = qp.residual(&x);
    let multipliers = qp
        .constrained
        .iter()
        .zip(active)
        .map(|(&i, &on)| if on { r[i] } else { 0.0 })
        .collect();
    Ok((x, multipliers))
}

fn refine(qp: &BoundQp, chol: &crate::banded::BandedCholesky, mut x: Vec<f64>) -> Vec<f64> {
    for _ in 0..REFINEMENT_STEPS {
        let dx = chol.solve(&qp.residual(&x));
        x.iter_mut().zip(dx).for_each(|(x, d)| *x += d);
    }
    x
}

/// Exhaustive search over all `2^|C|` active sets.
///
/// Every candidate is solved as an equality-constrained system by dense
/// Cholesky; the one with the smallest violation of primal feasibility and
/// dual sign conditions is returned. Strict convexity makes the exact
/// minimizer unique.
pub fn solve_bruteforce(qp: &BoundQp) -> Result<QpSolution> {
    let m = qp.constrained.len();
    if m > BRUTEFORCE_MAX_CONSTRAINTS {
        return Err(Error::invalid(format!(
            "{m} constraints exceed the enumeration limit of {BRUTEFORCE_MAX_CONSTRAINTS}"
        )));
    }
    let n = qp.dim();
    let dense = qp.a.to_dense();
    let mut best: Option<(f64, QpSolution)> = None;
    let mut tried = 0;
    for mask in 0u32..(1u32 << m) {
        let active: Vec<bool> = (0..m).map(|k| mask & (1 << k) != 0).collect();
        if active
            .iter()
            .zip(&qp.bounds)
            .any(|(&on, u)| on && u.is_infinite())
        {
            continue;
        }
        tried += 1;
        let mut fixed = vec![None; n];
        for ((&i, &u), &on) in qp.constrained.iter().zip(&qp.bounds).zip(&active) {
            if on {
                fixed[i] = Some(u);
            }
        }
        let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
        let mut x: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        let sub: Vec<Vec<f64>> = free
            .iter()
            .map(|&i| free.iter().map(|&j| dense[i][j]).collect())
            .collect();
        let rhs: Vec<f64> = free
            .iter()
            .map(|&i| {
                qp.b[i]
                    - (0..n)
                        .filter_map(|j| fixed[j].map(|u| dense[i][j] * u))
                        .sum::<f64>()
            })
            .collect();
        let y = dense_cholesky_solve(&sub, &rhs)?;
        for (&i, v) in free.iter().zip(y) {
            x[i] = v;
        }
        let multipliers: Vec<f64> = qp
            .constrained
            .iter()
            .zip(&active)
            .map(|(&i, &on)| {
                if on {
                    qp.b[i] - (0..n).map(|j| dense[i][j] * x[j]).sum::<f64>()
                } else {
                    0.0
                }
            })
            .collect();
        let violation = qp
            .constrained
            .iter()
            .zip(&qp.bounds)
            .map(|(&i, &u)| x[i] - u)
            .chain(multipliers.iter().map(|l| -l))
            .fold(0.0_f64, f64::max);
        if best.as_ref().is_none_or(|(v, _)| violation < *v) {
            best = Some((
                violation,
                QpSolution {
                    x,
                    multipliers,
                    active_set: positions(&active),
                    iterations: tried,
                    degenerate_ties: 0,
                },
            ));
        }
    }
    let (_, mut sol) = best.expect("the empty active set is always a candidate");
    sol.iterations = tried;
    Ok(sol)
}

/// Dense Cholesky solve, independent of the band code.
fn dense_cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar() -> BoundQp {
        let a = SymmetricBandedMatrix::from_dense(&[vec![1.0]]);
        BoundQp::new(a, vec![2.0], vec![0], vec![1.0]).unwrap()
    }

    fn small_spd() -> SymmetricBandedMatrix {
        SymmetricBandedMatrix::from_dense(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, -1.0],
            vec![0.5, -1.0, 2.0],
        ])
    }

    #[test]
    fn clamped_scalar() {
        for sol in [
            solve_pdas(&scalar(), 1.0, 100).unwrap(),
            solve_bruteforce(&scalar()).unwrap(),
        ] {
            assert_eq!(sol.x, vec![1.0]);
            assert_eq!(sol.multipliers, vec![1.0]);
            assert_eq!(sol.active_set, vec![0]);
            let r = kkt_residual(&scalar(), &sol).unwrap();
            assert_eq!(r.stationarity, 0.0);
            assert_eq!(r.primal_violation, 0.0);
            assert_eq!(r.complementarity, 0.0);
            assert_eq!(r.min_multiplier, 1.0);
        }
    }

    #[test]
    fn infinite_bounds_is_linear_solve() {
        let a = small_spd();
        let b = vec![1.0, -2.0, 0.5];
        let qp = BoundQp::new(a.clone(), b.clone(), vec![0, 1, 2], vec![f64::INFINITY; 3]).unwrap();
        let sol = solve_pdas(&qp, 1.0, 100).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!(sol.active_set.is_empty());
        assert!(sol.multipliers.iter().all(|&l| l == 0.0));
        let direct = a.cholesky().unwrap().solve(&b);
        for (u, v) in sol.x.iter().zip(&direct) {
            assert!((u - v).abs() < 1e-14);
        }
        let brute = solve_bruteforce(&qp).unwrap();
        for (u, v) in brute.x.iter().zip(&direct) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn perturbation_raises_stationarity_linearly() {
        let qp = BoundQp::new(small_spd(), vec![1.0, 1.0, 1.0], vec![1], vec![0.1]).unwrap();
        let mut sol = solve_pdas(&qp, 1.0, 100).unwrap();
        let base = kkt_residual(&qp, &sol).unwrap().stationarity;
        sol.x[0] += 1e-3;
        let r = kkt_residual(&qp, &sol).unwrap().stationarity;
        // column 0 of A has max entry 4
        assert!((r - base - 4e-3).abs() < 1e-12);
    }

    #[test]
    fn not_spd_reported() {
        let a = SymmetricBandedMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        let qp = BoundQp::new(a, vec![0.0, 0.0], vec![], vec![]).unwrap();
        assert!(matches!(
            solve_pdas(&qp, 1.0, 10),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn iteration_cap_reported() {
        let qp = BoundQp::new(
            small_spd(),
            vec![5.0, 5.0, 5.0],
            vec![0, 1, 2],
            vec![0.0; 3],
        )
        .unwrap();
        match solve_pdas(&qp, 1.0, 1) {
            Err(Error::NotConverged { iterations, last }) => {
                assert_eq!(iterations, 1);
                assert_eq!(last.x.len(), 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn bruteforce_refuses_large() {
        let n = 21;
        let a = SymmetricBandedMatrix::from_dense(
            &(0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect::<Vec<_>>(),
        );
        let qp = BoundQp::new(a, vec![0.0; n], (0..n).collect(), vec![1.0; n]).unwrap();
        assert!(solve_bruteforce(&qp).is_err());
    }

    #[test]
    fn invalid_problems_rejected() {
        assert!(BoundQp::new(small_spd(), vec![0.0; 2], vec![], vec![]).is_err());
        assert!(BoundQp::new(small_spd(), vec![0.0; 3], vec![3], vec![1.0]).is_err());
        assert!(BoundQp::new(small_spd(), vec![0.0; 3], vec![1, 1], vec![1.0, 1.0]).is_err());
        assert!(BoundQp::new(small_spd(), vec![0.0; 3], vec![1], vec![f64::NAN]).is_err());
        assert!(BoundQp::new(small_spd(), vec![0.0; 3], vec![1], vec![]).is_err());
    }
}
