//! Error norms against exact solutions, observed rates, and tabular reports.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hermite::DiscreteSolution;
use crate::problems::ProblemSpec;
use crate::qp::KktResiduals;
use crate::quadrature::{gauss_rule, split_interval};

/// Gauss points per element (per smooth piece) for error integrals.
pub const ERROR_QUAD_POINTS: usize = 8;

/// Default dense sampling density for the maximum norm.
pub const DEFAULT_LINF_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub n_elements: usize,
    pub h: f64,
    /// `‖ȳ − ȳ_h‖_{L²}`
    pub l2: f64,
    /// `‖ȳ − ȳ_h‖_{L∞}`
    pub linf: f64,
    /// `|ȳ − ȳ_h|_{H¹}`
    pub h1: f64,
    /// `|ȳ − ȳ_h|_{H²}`
    pub h2: f64,
    /// `‖ū − ū_h‖_{L²}` with `ū_h = −(ȳ_h'' + f)`
    pub control_l2: f64,
    pub qp_iterations: usize,
    pub kkt: Option<KktResiduals>,
}

/// Squared-error integrals over the mesh, element pieces split at the
/// problem's breakpoints so the exact solution is smooth on each piece.
fn squared_errors(sol: &DiscreteSolution, spec: &ProblemSpec) -> Result<[f64; 4]> {
    let exact = spec.exact()?;
    let rule = gauss_rule(ERROR_QUAD_POINTS)?;
    let breakpoints = spec.breakpoints();
    let mesh = sol.mesh();
    let mut sums = [0.0; 4];
    for e in 0..mesh.n_elements() {
        let (a, b) = mesh.element(e);
        for (lo, hi) in split_interval(a, b, &breakpoints) {
            let len = hi - lo;
            for (t, w) in rule.iter() {
                let x = lo + len * t;
                let wt = w * len;
                let d0 = exact.y_bar.eval(x) - sol.evaluate_on(e, x, 0);
                let d1 = exact.p.eval(x) - sol.evaluate_on(e, x, 1);
                let y2h = sol.evaluate_on(e, x, 2);
                let d2 = exact.p_prime.eval(x) - y2h;
                let fx = spec.f.eval(x);
                let u = -(exact.p_prime.eval(x) + fx);
                let uh = -(y2h + fx);
                let dc = u - uh;
                sums[0] += wt * d0 * d0;
                sums[1] += wt * d1 * d1;
                sums[2] += wt * d2 * d2;
                sums[3] += wt * dc * dc;
            }
        }
    }
    Ok(sums)
}

/// Error of `sol` against the exact solution of `spec`.
///
/// `L²`, `H¹` and `H²` use 8-point Gauss per smooth piece; `L∞` takes the
/// largest deviation over `samples_per_element + 1` equispaced points per
/// element (nodes included).
pub fn error_norms(
    sol: &DiscreteSolution,
    spec: &ProblemSpec,
    samples_per_element: usize,
) -> Result<ErrorReport> {
    let exact = spec.exact()?;
    let [l2, h1, h2, control] = squared_errors(sol, spec)?;
    let mesh = sol.mesh();
    let samples = samples_per_element.max(1);
    let mut linf = 0.0_f64;
    for e in 0..mesh.n_elements() {
        let (a, b) = mesh.element(e);
        for j in 0..=samples {
            let x = a + (b - a) * j as f64 / samples as f64;
            let d = (exact.y_bar.eval(x) - sol.evaluate_on(e, x, 0)).abs();
            linf = linf.max(d);
        }
    }
    Ok(ErrorReport {
        n_elements: mesh.n_elements(),
        h: mesh.h(),
        l2: l2.sqrt(),
        linf,
        h1: h1.sqrt(),
        h2: h2.sqrt(),
        control_l2: control.sqrt(),
        qp_iterations: sol.info.iterations,
        kkt: sol.info.kkt,
    })
}

/// `‖ū − ū_h‖_{L²}` computed from the controls themselves.
pub fn control_error(sol: &DiscreteSolution, spec: &ProblemSpec) -> Result<f64> {
    Ok(squared_errors(sol, spec)?[3].sqrt())
}

/// Observed orders between two consecutive levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRates {
    pub l2: f64,
    pub linf: f64,
    pub h1: f64,
    pub h2: f64,
    pub control_l2: f64,
}

/// `log(e_k / e_{k+1}) / log(h_k / h_{k+1})`.
pub fn observed_rate(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub levels: Vec<ErrorReport>,
    /// `rates[k]` compares `levels[k]` with `levels[k + 1]`.
    pub rates: Vec<NormRates>,
}

impl ConvergenceReport {
    /// Any number of levels with strictly decreasing `h`.
    pub fn from_levels(levels: Vec<ErrorReport>) -> Result<Self> {
        if levels.windows(2).any(|w| !(w[1].h < w[0].h)) {
            return Err(Error::invalid(
                "levels must be strictly refining (h decreasing)",
            ));
        }
        let rates = levels
            .windows(2)
            .map(|w| {
                let (c, f) = (&w[0], &w[1]);
                let r = |a: f64, b: f64| observed_rate(a, b, c.h, f.h);
                NormRates {
                    l2: r(c.l2, f.l2),
                    linf: r(c.linf, f.linf),
                    h1: r(c.h1, f.h1),
                    h2: r(c.h2, f.h2),
                    control_l2: r(c.control_l2, f.control_l2),
                }
            })
            .collect();
        Ok(ConvergenceReport { levels, rates })
    }

    /// Mean of the last `count` rates of one norm.
    pub fn mean_last(&self, count: usize, pick: impl Fn(&NormRates) -> f64) -> Option<f64> {
        if count == 0 || self.rates.len() < count {
            return None;
        }
        let tail = &self.rates[self.rates.len() - count..];
        Some(tail.iter().map(pick).sum::<f64>() / count as f64)
    }
}

/// Observed rates for at least two strictly refining levels.
pub fn convergence_rates(reports: Vec<ErrorReport>) -> Result<ConvergenceReport> {
    if reports.len() < 2 {
        return Err(Error::invalid("rates need at least two levels"));
    }
    ConvergenceReport::from_levels(reports)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::invalid(format!(
                "unknown report format '{other}' (md, csv)"
            ))),
        }
    }
}

pub const REPORT_COLUMNS: [&str; 12] = [
    "2/h",
    "h",
    "L2",
    "Linf",
    "H1",
    "H2",
    "control_L2",
    "rate_L2",
    "rate_Linf",
    "rate_H1",
    "rate_H2",
    "rate_control_L2",
];

/// Scientific notation with six decimals and a two-digit exponent,
/// e.g. `1.430334e-01`.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.6e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Table of the levels in the requested format: one row per level, rates
/// comparing each level with the previous one (blank on the first row).
pub fn render_report(report: &ConvergenceReport, format: ReportFormat) -> String {
    let rows: Vec<Vec<String>> = report
        .levels
        .iter()
        .enumerate()
        .map(|(k, lvl)| {
            let mut row = vec![
                lvl.n_elements.to_string(),
                sci(lvl.h),
                sci(lvl.l2),
                sci(lvl.linf),
                sci(lvl.h1),
                sci(lvl.h2),
                sci(lvl.control_l2),
            ];
            match k.checked_sub(1).and_then(|p| report.rates.get(p)) {
                Some(r) => row.extend(
                    [r.l2, r.linf, r.h1, r.h2, r.control_l2]
                        .iter()
                        .map(|v| format!("{v:.6}")),
                ),
                None => row.extend(std::iter::repeat_n(String::new(), 5)),
            }
            row
        })
        .collect();

    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(&REPORT_COLUMNS.join(","));
            out.push('\n');
            for row in rows {
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        ReportFormat::Markdown => {
            let _ = writeln!(out, "| {} |", REPORT_COLUMNS.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(REPORT_COLUMNS.len()));
            for row in rows {
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
        }
    }
    out
}
