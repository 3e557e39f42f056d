//! Cubic Hermite shape functions and piecewise-cubic C¹ functions on a mesh.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::qp::KktResiduals;

/// The four Hermite shape functions on an element of width `h`, or their
/// first or second derivative with respect to the physical coordinate.
///
/// The local coordinate is `ξ ∈ [0, 1]`; the slope functions carry a factor
/// `h` so that slope coefficients are physical derivatives. Ordering is
/// (value_left, slope_left, value_right, slope_right).
pub fn reference_shape(xi: f64, h: f64, deriv_order: usize) -> Result<[f64; 4]> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::invalid(format!("ξ = {xi} outside [0, 1]")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!(
            "element width {h} must be positive"
        )));
    }
    if deriv_order > 2 {
        return Err(Error::invalid(format!(
            "derivative order {deriv_order} unsupported (0, 1 or 2)"
        )));
    }
    Ok(shape(xi, h, deriv_order))
}

#[inline]
pub(crate) fn shape(xi: f64, h: f64, deriv_order: usize) -> [f64; 4] {
    let x2 = xi * xi;
    let x3 = x2 * xi;
    match deriv_order {
        0 => [
            1.0 - 3.0 * x2 + 2.0 * x3,
            h * (xi - 2.0 * x2 + x3),
            3.0 * x2 - 2.0 * x3,
            h * (x3 - x2),
        ],
        1 => [
            (6.0 * x2 - 6.0 * xi) / h,
            1.0 - 4.0 * xi + 3.0 * x2,
            (6.0 * xi - 6.0 * x2) / h,
            3.0 * x2 - 2.0 * xi,
        ],
        _ => {
            let h2 = h * h;
            [
                (12.0 * xi - 6.0) / h2,
                (6.0 * xi - 4.0) / h,
                (6.0 - 12.0 * xi) / h2,
                (6.0 * xi - 2.0) / h,
            ]
        }
    }
}

/// Solver bookkeeping attached to a discrete solution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveInfo {
    pub iterations: usize,
    /// Nodes whose slope bound is active at the solution.
    pub active_nodes: Vec<usize>,
    /// Multiplier of the slope bound at every node (zero when inactive).
    pub multipliers: Vec<f64>,
    pub kkt: Option<KktResiduals>,
}

/// A C¹ piecewise-cubic function given by its Hermite coefficients.
///
/// Solutions returned by the solver vanish at `±1`; interpolants keep
/// whatever boundary values the interpolated function has.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution {
    mesh: Mesh,
    coefficients: Vec<f64>,
    pub info: SolveInfo,
}

impl DiscreteSolution {
    pub fn new(mesh: Mesh, coefficients: Vec<f64>) -> Result<Self> {
        let expected = mesh.dof_map().n_dofs();
        if coefficients.len() != expected {
            return Err(Error::invalid(format!(
                "expected {expected} coefficients, got {}",
                coefficients.len()
            )));
        }
        Ok(DiscreteSolution {
            mesh,
            coefficients,
            info: SolveInfo::default(),
        })
    }

    pub fn zero(mesh: Mesh) -> Self {
        let n = mesh.dof_map().n_dofs();
        DiscreteSolution {
            mesh,
            coefficients: vec![0.0; n],
            info: SolveInfo::default(),
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Nodal values.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.coefficients.iter().step_by(2).copied()
    }

    /// Nodal slopes.
    pub fn slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.coefficients.iter().skip(1).step_by(2).copied()
    }

    /// Value (`deriv_order = 0`) or derivative at `x`.
    ///
    /// Second derivatives jump at nodes; there the element on the right is
    /// used (the last element at `x = 1`).
    pub fn evaluate(&self, x: f64, deriv_order: usize) -> Result<f64> {
        if deriv_order > 2 {
            return Err(Error::invalid(format!(
                "derivative order {deriv_order} unsupported (0, 1 or 2)"
            )));
        }
        let e = self.mesh.locate(x)?;
        Ok(self.evaluate_on(e, x, deriv_order))
    }

    /// Evaluation restricted to element `e` (one-sided at its endpoints).
    pub fn evaluate_on(&self, e: usize, x: f64, deriv_order: usize) -> f64 {
        let (a, b) = self.mesh.element(e);
        let h = b - a;
        let xi = ((x - a) / h).clamp(0.0, 1.0);
        let phi = shape(xi, h, deriv_order);
        let c = &self.coefficients[2 * e..2 * e + 4];
        phi.iter().zip(c).map(|(p, c)| p * c).sum()
    }
}

/// Nodal Hermite interpolant: coefficients `(g(x_i), g'(x_i))` at every node.
pub fn hermite_interpolant<G, D>(mesh: &Mesh, g: G, dg: D) -> DiscreteSolution
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let coefficients = mesh.nodes().iter().flat_map(|&x| [g(x), dg(x)]).collect();
    DiscreteSolution {
        mesh: mesh.clone(),
        coefficients,
        info: SolveInfo::default(),
    }
}
