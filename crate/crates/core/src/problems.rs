//! Problem data, the exact-solution example with a derivative constraint
//! active on `{-1} ∪ [1/3, 1]`, and numerical checks of the continuous
//! optimality system.
//!
//! The control problem is
//!
//! ```text
//! minimize ½(‖y − y_d‖² + β‖u‖²)  subject to  −y'' = u + f,  y(±1) = 0,  y' ≤ ψ,
//! ```
//!
//! which, after eliminating `u = −(y'' + f)`, becomes a fourth-order
//! variational inequality for `y` alone.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{LEFT, RIGHT};
use crate::quadrature::{composite, gauss_rule};

/// A real function on `[-1, 1]` plus the points where it (or one of its
/// derivatives) is not smooth. Quadrature splits elements at these points.
#[derive(Clone)]
pub struct ScalarFn {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    breakpoints: Vec<f64>,
}

impl ScalarFn {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn {
            eval: Arc::new(f),
            breakpoints: Vec::new(),
        }
    }

    pub fn with_breakpoints(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        breakpoints: Vec<f64>,
    ) -> Self {
        ScalarFn {
            eval: Arc::new(f),
            breakpoints,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn")
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

/// Known optimal state, control and multiplier data for a problem.
///
/// `p = ȳ'`. The multiplier of the derivative constraint is the measure
/// `ν = ρ dx + γ δ₋₁ + ζ δ₁`; `λ` is the multiplier of the zero-mean
/// condition on `p`, and `Φ` solves `βΦ' = y_d − ȳ` with `∫Φ = 0`.
#[derive(Clone, Debug)]
pub struct ExactBundle {
    pub y_bar: ScalarFn,
    pub p: ScalarFn,
    pub p_prime: ScalarFn,
    pub p_second: ScalarFn,
    pub f_prime: ScalarFn,
    pub phi: ScalarFn,
    pub lambda: f64,
    pub rho: ScalarFn,
    pub gamma: f64,
    pub zeta: f64,
    pub active_set_description: String,
}

/// Data `(β, f, ψ, y_d)` and, optionally, the exact solution.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: String,
    pub beta: f64,
    pub f: ScalarFn,
    pub psi: ScalarFn,
    pub y_d: ScalarFn,
    pub exact: Option<ExactBundle>,
}

/// Names accepted by [`by_name`].
pub const PROBLEM_NAMES: [&str; 2] = ["paper", "unconstrained-smoke"];

/// Fine composite integral over `[-1, 1]`, used for data checks.
pub fn integrate_fine(f: impl Fn(f64) -> f64, breakpoints: &[f64]) -> f64 {
    let rule = gauss_rule(12).expect("12-point rule");
    composite(&rule, LEFT, RIGHT, 64, breakpoints, f)
}

impl ProblemSpec {
    /// Validates `β > 0` and `∫ψ > 0`; the latter is needed for the feasible
    /// set to contain more than one function.
    pub fn new(
        name: impl Into<String>,
        beta: f64,
        f: ScalarFn,
        psi: ScalarFn,
        y_d: ScalarFn,
        exact: Option<ExactBundle>,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("β = {beta} must be positive")));
        }
        let mean = integrate_fine(|x| psi.eval(x), psi.breakpoints());
        if !(mean > 0.0) {
            return Err(Error::invalid(format!(
                "∫ψ = {mean} must be positive for a nontrivial feasible set"
            )));
        }
        Ok(ProblemSpec {
            name: name.into(),
            beta,
            f,
            psi,
            y_d,
            exact,
        })
    }

    /// Breakpoints of all data functions, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut all: Vec<f64> = [&self.f, &self.psi, &self.y_d]
            .iter()
            .flat_map(|g| g.breakpoints().iter().copied())
            .chain(
                self.exact
                    .iter()
                    .flat_map(|e| e.y_bar.breakpoints().iter().copied()),
            )
            .collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    }

    pub fn exact(&self) -> Result<&ExactBundle> {
        self.exact.as_ref().ok_or(Error::MissingExactSolution)
    }

    /// Same problem with the derivative bound replaced by the constant `c`.
    /// The exact bundle is dropped since it no longer applies.
    pub fn with_constant_obstacle(&self, c: f64) -> Result<Self> {
        ProblemSpec::new(
            format!("{}-psi-{c}", self.name),
            self.beta,
            self.f.clone(),
            ScalarFn::constant(c),
            self.y_d.clone(),
            None,
        )
    }

    /// Exact state `ȳ(x)`.
    pub fn exact_state(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.exact()?.y_bar.eval(x))
    }

    /// Exact derivative `ȳ'(x) = p(x)`.
    pub fn exact_state_deriv(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.exact()?.p.eval(x))
    }

    /// Exact control `ū(x) = −(ȳ''(x) + f(x))`.
    pub fn exact_control(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        let e = self.exact()?;
        Ok(-(e.p_prime.eval(x) + self.f.eval(x)))
    }
}

fn check_domain(x: f64) -> Result<()> {
    if (LEFT..=RIGHT).contains(&x) {
        Ok(())
    } else {
        Err(Error::invalid(format!("x = {x} lies outside [-1, 1]")))
    }
}

/// Looks up a built-in problem.
pub fn by_name(name: &str) -> Result<ProblemSpec> {
    match name {
        "paper" => Ok(paper_example()),
        "unconstrained-smoke" => Ok(unconstrained_smoke()),
        other => Err(Error::invalid(format!(
            "unknown problem '{other}' (known: {})",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}

const THIRD: f64 = 1.0 / 3.0;

/// The benchmark with known solution: `β = 1`, the constraint is active at
/// `-1` and on `[1/3, 1]`, and `y_d` jumps at `1/3`.
pub fn paper_example() -> ProblemSpec {
    // ψ = 1 − 9x²/2 on [−1, 0], 1 on [0, 1]
    let psi = ScalarFn::with_breakpoints(
        |x| if x <= 0.0 { 1.0 - 4.5 * x * x } else { 1.0 },
        vec![0.0],
    );
    // p = ȳ' = 1 − (81/32)(x − 1/3)² left of 1/3, 1 right of it
    let p = ScalarFn::with_breakpoints(
        |x| {
            if x < THIRD {
                let s = x - THIRD;
                1.0 - 81.0 / 32.0 * s * s
            } else {
                1.0
            }
        },
        vec![THIRD],
    );
    let p_prime = ScalarFn::with_breakpoints(
        |x| {
            if x < THIRD {
                -81.0 / 16.0 * (x - THIRD)
            } else {
                0.0
            }
        },
        vec![THIRD],
    );
    let p_second =
        ScalarFn::with_breakpoints(|x| if x < THIRD { -81.0 / 16.0 } else { 0.0 }, vec![THIRD]);
    let y_bar = ScalarFn::with_breakpoints(example_state, vec![THIRD]);

    let f = ScalarFn::with_breakpoints(
        |x| {
            if x <= THIRD {
                2.0 / (9.0 * PI) * (PI * (3.0 * x - 1.0)).sin()
            } else {
                let s = x - THIRD;
                -s * s
            }
        },
        vec![THIRD],
    );
    let f_prime = ScalarFn::with_breakpoints(
        |x| {
            if x < THIRD {
                2.0 / 3.0 * (PI * (3.0 * x - 1.0)).cos()
            } else {
                -2.0 * (x - THIRD)
            }
        },
        vec![THIRD],
    );
    // Φ = f' on the left, f' + 2/3 on the right; continuous at 1/3.
    let phi = ScalarFn::with_breakpoints(
        |x| {
            if x < THIRD {
                2.0 / 3.0 * (PI * (3.0 * x - 1.0)).cos()
            } else {
                -2.0 * (x - THIRD) + 2.0 / 3.0
            }
        },
        vec![THIRD],
    );
    // Φ' = f'' piecewise; y_d = ȳ + βΦ' with β = 1.
    let y_d = ScalarFn::with_breakpoints(
        |x| {
            let dphi = if x < THIRD {
                -2.0 * PI * (PI * (3.0 * x - 1.0)).sin()
            } else {
                -2.0
            };
            example_state(x) + dphi
        },
        vec![THIRD],
    );
    let rho =
        ScalarFn::with_breakpoints(|x| if x < THIRD { 0.0 } else { 211.0 / 48.0 }, vec![THIRD]);
    let exact = ExactBundle {
        y_bar,
        p,
        p_prime,
        p_second,
        f_prime,
        phi,
        lambda: 81.0 / 16.0,
        rho,
        gamma: 27.0 / 4.0,
        zeta: 4.0 / 9.0,
        active_set_description: "{-1} ∪ [1/3, 1]".to_string(),
    };
    ProblemSpec::new("paper", 1.0, f, psi, y_d, Some(exact)).expect("valid built-in problem")
}

/// Closed-form antiderivative of `p` from `-1`.
fn example_state(x: f64) -> f64 {
    if x <= THIRD {
        let s = x - THIRD;
        (x + 1.0) - 27.0 / 32.0 * (s * s * s + 64.0 / 27.0)
    } else {
        -2.0 / 3.0 + (x - THIRD)
    }
}

/// Smooth problem whose bound never becomes active: `ȳ = sin(πx)`, `f = 0`,
/// `ψ = 10⁶`, `β = 1`, `y_d = (1 + π⁴) sin(πx)`.
pub fn unconstrained_smoke() -> ProblemSpec {
    let beta = 1.0;
    let pi2 = PI * PI;
    let pi3 = pi2 * PI;
    let pi4 = pi2 * pi2;
    let exact = ExactBundle {
        y_bar: ScalarFn::new(|x| (PI * x).sin()),
        p: ScalarFn::new(|x| PI * (PI * x).cos()),
        p_prime: ScalarFn::new(move |x| -pi2 * (PI * x).sin()),
        p_second: ScalarFn::new(move |x| -pi3 * (PI * x).cos()),
        f_prime: ScalarFn::constant(0.0),
        phi: ScalarFn::new(move |x| -pi3 * (PI * x).cos()),
        lambda: 0.0,
        rho: ScalarFn::constant(0.0),
        gamma: 0.0,
        zeta: 0.0,
        active_set_description: "∅".to_string(),
    };
    ProblemSpec::new(
        "unconstrained-smoke",
        beta,
        ScalarFn::constant(0.0),
        ScalarFn::constant(1e6),
        ScalarFn::new(move |x| (1.0 + beta * pi4) * (PI * x).sin()),
        Some(exact),
    )
    .expect("valid built-in problem")
}

/// One line of a [`KktVerificationReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct KktCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation.
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktVerificationReport {
    pub checks: Vec<KktCheck>,
}

impl KktVerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&KktCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const POINTWISE_TOL: f64 = 1e-10;
const INTEGRAL_TOL: f64 = 1e-12;
const WEAK_TOL: f64 = 1e-10;

/// Checks the continuous optimality system of `spec` against its exact
/// bundle at `n_samples` equispaced interior points.
///
/// Failed checks are reported, not raised.
pub fn verify_continuous_kkt(
    spec: &ProblemSpec,
    n_samples: usize,
) -> Result<KktVerificationReport> {
    let e = spec.exact()?;
    let n_samples = n_samples.max(2);
    let samples: Vec<f64> = (0..n_samples)
        .map(|k| LEFT + (RIGHT - LEFT) * (k as f64 + 0.5) / n_samples as f64)
        .collect();
    let rho_from = |x: f64| e.p_second.eval(x) + e.f_prime.eval(x) - e.phi.eval(x) + e.lambda;

    let mut checks = Vec::new();
    let mut push = |name, value: f64, tolerance: f64| {
        checks.push(KktCheck {
            name,
            passed: value <= tolerance,
            value,
            tolerance,
        })
    };

    // (a) ρ = p'' + f' − Φ + λ, nonnegative
    let rho_mismatch = samples
        .iter()
        .map(|&x| (rho_from(x) - e.rho.eval(x)).abs())
        .fold(0.0, f64::max);
    push("density matches p''+f'-Φ+λ", rho_mismatch, POINTWISE_TOL);
    let rho_negative = samples
        .iter()
        .map(|&x| (-rho_from(x)).max(0.0))
        .fold(0.0, f64::max);
    push("density nonnegative", rho_negative, POINTWISE_TOL);

    // (b) endpoint atoms
    let gamma = e.p_prime.eval(LEFT) + spec.f.eval(LEFT);
    let zeta = -(e.p_prime.eval(RIGHT) + spec.f.eval(RIGHT));
    push("γ = p'(-1)+f(-1)", (gamma - e.gamma).abs(), POINTWISE_TOL);
    push("ζ = -(p'(1)+f(1))", (zeta - e.zeta).abs(), POINTWISE_TOL);
    push(
        "endpoint atoms nonnegative",
        (-e.gamma).max(-e.zeta).max(0.0),
        POINTWISE_TOL,
    );
    push("λ nonnegative", (-e.lambda).max(0.0), POINTWISE_TOL);

    // (c) complementarity: ν lives on the active set, p ≤ ψ
    let gap = |x: f64| e.p.eval(x) - spec.psi.eval(x);
    let comp = samples
        .iter()
        .map(|&x| (rho_from(x) * gap(x)).abs())
        .fold(0.0, f64::max)
        .max((e.gamma * gap(LEFT)).abs())
        .max((e.zeta * gap(RIGHT)).abs());
    push("complementarity ρ(p-ψ), γ, ζ", comp, POINTWISE_TOL);
    let infeasible = samples
        .iter()
        .chain([LEFT, RIGHT].iter())
        .map(|&x| gap(x).max(0.0))
        .fold(0.0, f64::max);
    push("p ≤ ψ", infeasible, POINTWISE_TOL);

    // (d) weak stationarity against Legendre polynomials q_0..q_19:
    // ∫p'q' + ∫(Φ − f')q + f(1)q(1) − f(−1)q(−1) + ∫q dν − λ∫q = 0
    let bps = spec.breakpoints();
    let rule = gauss_rule(16)?;
    let integrate = |g: &dyn Fn(f64) -> f64| composite(&rule, LEFT, RIGHT, 32, &bps, g);
    let mut weak = 0.0_f64;
    for degree in 0..20 {
        let q = |x: f64| legendre(degree, x).0;
        let dq = |x: f64| legendre(degree, x).1;
        let volume = integrate(&|x| {
            e.p_prime.eval(x) * dq(x)
                + (e.phi.eval(x) - e.f_prime.eval(x)) * q(x)
                + e.rho.eval(x) * q(x)
                - e.lambda * q(x)
        });
        let boundary = spec.f.eval(RIGHT) * q(RIGHT) - spec.f.eval(LEFT) * q(LEFT)
            + e.gamma * q(LEFT)
            + e.zeta * q(RIGHT);
        weak = weak.max((volume + boundary).abs());
    }
    push("weak stationarity (20 test functions)", weak, WEAK_TOL);

    // (e) normalization of Φ and of p
    let phi_mean = integrate(&|x| e.phi.eval(x)).abs();
    push("∫Φ = 0", phi_mean, INTEGRAL_TOL);
    let p_mean = integrate(&|x| e.p.eval(x)).abs();
    push("∫p = 0", p_mean, INTEGRAL_TOL);

    Ok(KktVerificationReport { checks })
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        let d2 = d0 + (2.0 * kf - 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// `½(‖y − y_d‖² + β‖u‖²)` by fine composite quadrature.
pub fn objective(spec: &ProblemSpec, y: impl Fn(f64) -> f64, u: impl Fn(f64) -> f64) -> f64 {
    let bps = spec.breakpoints();
    let misfit = integrate_fine(
        |x| {
            let d = y(x) - spec.y_d.eval(x);
            d * d
        },
        &bps,
    );
    let effort = integrate_fine(|x| u(x) * u(x), &bps);
    0.5 * (misfit + spec.beta * effort)
}
