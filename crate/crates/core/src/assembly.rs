//! Global matrices and vectors for the discrete variational inequality.
//!
//! The energy form is `a(v, w) = ∫vw + β∫v''w''` and the load functional is
//! `ℓ(v) = ∫y_d v − β∫f v''`; the discrete problem minimizes
//! `½a(y, y) − ℓ(y)` over Hermite functions vanishing at `±1` whose nodal
//! slopes satisfy `y'(x_i) ≤ ψ(x_i)`.

use crate::banded::SymmetricBandedMatrix;
use crate::error::{Error, Result};
use crate::hermite::shape;
use crate::mesh::{DofMap, Mesh};
use crate::problems::{ProblemSpec, ScalarFn};
use crate::qp::BoundQp;
use crate::quadrature::{gauss_rule, split_interval, QuadRule};

/// Half-bandwidth of the global Hermite matrices with node-major ordering.
pub const HERMITE_BANDWIDTH: usize = 3;

/// Default Gauss points per element.
pub const DEFAULT_QUAD_POINTS: usize = 6;

/// `A[i][j] = ∫φ_i φ_j + β∫φ_i'' φ_j''` over all DOFs.
pub fn assemble_energy(mesh: &Mesh, beta: f64, rule: &QuadRule) -> Result<SymmetricBandedMatrix> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("β = {beta} must be positive")));
    }
    Ok(assemble_energy_unchecked(mesh, beta, rule))
}

/// Hermite mass matrix (`β = 0`).
pub fn assemble_mass(mesh: &Mesh, rule: &QuadRule) -> SymmetricBandedMatrix {
    assemble_energy_unchecked(mesh, 0.0, rule)
}

fn assemble_energy_unchecked(mesh: &Mesh, beta: f64, rule: &QuadRule) -> SymmetricBandedMatrix {
    let dofs = mesh.dof_map();
    let mut a = SymmetricBandedMatrix::zeros(dofs.n_dofs(), HERMITE_BANDWIDTH);
    for e in 0..mesh.n_elements() {
        let h = mesh.width(e);
        let mut local = [[0.0; 4]; 4];
        for (xi, w) in rule.iter() {
            let v = shape(xi, h, 0);
            let d2 = shape(xi, h, 2);
            for i in 0..4 {
                for j in 0..=i {
                    local[i][j] += w * h * (v[i] * v[j] + beta * d2[i] * d2[j]);
                }
            }
        }
        let idx = dofs.element_dofs(e);
        for i in 0..4 {
            for j in 0..=i {
                a.add(idx[i], idx[j], local[i][j]);
            }
        }
    }
    a
}

/// `b[i] = ∫y_d φ_i − β∫f φ_i''`. Elements are split at the breakpoints of
/// `y_d` and `f` so each smooth piece gets the full rule.
pub fn assemble_load(
    mesh: &Mesh,
    y_d: &ScalarFn,
    f: &ScalarFn,
    beta: f64,
    rule: &QuadRule,
) -> Vec<f64> {
    let dofs = mesh.dof_map();
    let mut breakpoints: Vec<f64> = y_d
        .breakpoints()
        .iter()
        .chain(f.breakpoints())
        .copied()
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    let mut b = vec![0.0; dofs.n_dofs()];
    for e in 0..mesh.n_elements() {
        let (a, right) = mesh.element(e);
        let h = right - a;
        let mut local = [0.0; 4];
        for (lo, hi) in split_interval(a, right, &breakpoints) {
            let len = hi - lo;
            for (t, w) in rule.iter() {
                let x = lo + len * t;
                let xi = (x - a) / h;
                let v = shape(xi, h, 0);
                let d2 = shape(xi, h, 2);
                let (yd, fx) = (y_d.eval(x), f.eval(x));
                for i in 0..4 {
                    local[i] += w * len * (yd * v[i] - beta * fx * d2[i]);
                }
            }
        }
        for (i, &dof) in dofs.element_dofs(e).iter().enumerate() {
            b[dof] += local[i];
        }
    }
    b
}

/// Upper bound `ψ(x_i)` for the slope DOF at every node, endpoints included.
pub fn constraint_bounds(mesh: &Mesh, psi: &ScalarFn) -> Vec<f64> {
    mesh.nodes().iter().map(|&x| psi.eval(x)).collect()
}

/// The reduced system after removing the two Dirichlet DOFs.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: SymmetricBandedMatrix,
    pub load: Vec<f64>,
    /// Full DOF index of every retained row.
    pub retained: Vec<usize>,
    /// Reduced indices of the slope DOFs, node by node.
    pub constrained: Vec<usize>,
    /// Upper bounds aligned with `constrained`.
    pub bounds: Vec<f64>,
    pub dof_map: DofMap,
}

impl AssembledSystem {
    pub fn with_bounds(mut self, bounds: Vec<f64>) -> Result<Self> {
        if bounds.len() != self.constrained.len() {
            return Err(Error::invalid(format!(
                "expected {} bounds, got {}",
                self.constrained.len(),
                bounds.len()
            )));
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn to_qp(&self) -> Result<BoundQp> {
        BoundQp::new(
            self.matrix.clone(),
            self.load.clone(),
            self.constrained.clone(),
            self.bounds.clone(),
        )
    }

    /// Re-inserts zeros at the Dirichlet DOFs.
    pub fn embed(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.dof_map.n_dofs()];
        for (&dof, &v) in self.retained.iter().zip(reduced) {
            full[dof] = v;
        }
        full
    }
}

/// Eliminates the value DOFs at `±1` (homogeneous data). Bounds start at
/// `+∞`; set them with [`AssembledSystem::with_bounds`].
pub fn apply_dirichlet(a: &SymmetricBandedMatrix, b: &[f64], dof_map: &DofMap) -> AssembledSystem {
    let retained: Vec<usize> = (0..dof_map.n_dofs())
        .filter(|&d| !dof_map.is_dirichlet(d))
        .collect();
    let matrix = a.principal_submatrix(&retained);
    let load = retained.iter().map(|&d| b[d]).collect();
    let constrained: Vec<usize> = dof_map
        .constrained_dofs()
        .iter()
        .map(|d| retained.binary_search(d).expect("slope dofs are retained"))
        .collect();
    let bounds = vec![f64::INFINITY; constrained.len()];
    AssembledSystem {
        matrix,
        load,
        retained,
        constrained,
        bounds,
        dof_map: dof_map.clone(),
    }
}

/// Everything needed to discretize a problem on one mesh.
pub fn assemble(spec: &ProblemSpec, mesh: &Mesh, quad_points: usize) -> Result<AssembledSystem> {
    let rule = gauss_rule(quad_points)?;
    let a = assemble_energy(mesh, spec.beta, &rule)?;
    let b = assemble_load(mesh, &spec.y_d, &spec.f, spec.beta, &rule);
    apply_dirichlet(&a, &b, &mesh.dof_map()).with_bounds(constraint_bounds(mesh, &spec.psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::hermite_interpolant;
    use crate::problems::paper_example;
    use std::f64::consts::PI;

    fn rule() -> QuadRule {
        gauss_rule(DEFAULT_QUAD_POINTS).unwrap()
    }

    #[test]
    fn rejects_nonpositive_beta() {
        let mesh = Mesh::uniform(2).unwrap();
        assert!(assemble_energy(&mesh, 0.0, &rule()).is_err());
        assert!(assemble_energy(&mesh, -1.0, &rule()).is_err());
    }

    #[test]
    fn mass_acts_on_constant() {
        // coefficient vector of the constant 1: values 1, slopes 0
        let mesh = Mesh::uniform(5).unwrap();
        let m = assemble_mass(&mesh, &rule());
        let ones: Vec<f64> = (0..m.dim())
            .map(|i| if i % 2 == 0 { 1.0 } else { 0.0 })
            .collect();
        let action = m.mul_vec(&ones);
        let load = assemble_load(
            &mesh,
            &ScalarFn::constant(1.0),
            &ScalarFn::constant(0.0),
            1.0,
            &rule(),
        );
        for (a, b) in action.iter().zip(&load) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn bending_corner_entry() {
        let h = 0.4;
        let mesh = Mesh::from_nodes(vec![-1.0, -1.0 + h, 1.0]).unwrap();
        let beta = 2.5;
        let full = assemble_energy(&mesh, beta, &rule()).unwrap();
        let mass = assemble_mass(&mesh, &rule());
        let bending = full.get(0, 0) - mass.get(0, 0);
        assert!((bending - 12.0 * beta / h.powi(3)).abs() < 1e-10);
        // mass corner 13h/35
        assert!((mass.get(0, 0) - 13.0 * h / 35.0).abs() < 1e-15);
    }

    #[test]
    fn energy_of_sine() {
        let mesh = Mesh::uniform(64).unwrap();
        let a = assemble_energy(&mesh, 1.0, &rule()).unwrap();
        let sol = hermite_interpolant(&mesh, |x| (PI * x).sin(), |x| PI * (PI * x).cos());
        let e = a.quad_form(sol.coefficients());
        let exact = 1.0 + PI.powi(4);
        assert!((e - exact).abs() / exact < 1e-4, "{e}");
    }

    #[test]
    fn zero_data_zero_load() {
        let mesh = Mesh::uniform(4).unwrap();
        let zero = ScalarFn::constant(0.0);
        assert!(assemble_load(&mesh, &zero, &zero, 1.0, &rule())
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn unit_target_single_element() {
        let h = 0.5;
        let mesh = Mesh::from_nodes(vec![-1.0, -1.0 + h, 1.0]).unwrap();
        let b = assemble_load(
            &mesh,
            &ScalarFn::constant(1.0),
            &ScalarFn::constant(0.0),
            1.0,
            &rule(),
        );
        assert!((b[0] - h / 2.0).abs() < 1e-15);
        assert!((b[1] - h * h / 12.0).abs() < 1e-15);
    }

    #[test]
    fn unit_source_telescopes() {
        let mesh = Mesh::uniform(6).unwrap();
        let b = assemble_load(
            &mesh,
            &ScalarFn::constant(0.0),
            &ScalarFn::constant(1.0),
            1.0,
            &rule(),
        );
        // z with z'(1) = z'(-1): z = x³ - 3x ... z' = 3x² - 3 = 0 at both ends
        let z = hermite_interpolant(&mesh, |x| x.powi(3) - 3.0 * x, |x| 3.0 * x * x - 3.0);
        let s: f64 = b.iter().zip(z.coefficients()).map(|(a, c)| a * c).sum();
        assert!(s.abs() < 1e-13);
        // and z = x² gives -(z'(1) - z'(-1)) = -4
        let z = hermite_interpolant(&mesh, |x| x * x, |x| 2.0 * x);
        let s: f64 = b.iter().zip(z.coefficients()).map(|(a, c)| a * c).sum();
        assert!((s + 4.0).abs() < 1e-13);
    }

    #[test]
    fn bounds_from_obstacle() {
        let spec = paper_example();
        let mesh = Mesh::uniform(2).unwrap();
        let u = constraint_bounds(&mesh, &spec.psi);
        assert_eq!(u, vec![-3.5, 1.0, 1.0]);
        let c = constraint_bounds(&Mesh::uniform(7).unwrap(), &ScalarFn::constant(0.25));
        assert!(c.iter().all(|&v| v == 0.25));
    }

    #[test]
    fn dirichlet_elimination_counts() {
        let mesh = Mesh::uniform(2).unwrap();
        let a = assemble_energy(&mesh, 1.0, &rule()).unwrap();
        let b = vec![0.0; 6];
        let sys = apply_dirichlet(&a, &b, &mesh.dof_map());
        assert_eq!(sys.matrix.dim(), 4);
        assert_eq!(sys.retained, vec![1, 2, 3, 5]);
        assert_eq!(sys.constrained, vec![0, 2, 3]);
        assert!(sys.matrix.cholesky().is_ok());
        let full = sys.embed(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(full, vec![0.0, 1.0, 2.0, 3.0, 0.0, 4.0]);
    }

    #[test]
    fn spd_across_meshes_and_betas() {
        for n in 2..=64 {
            let mesh = Mesh::uniform(n).unwrap();
            for beta in [1e-3, 1.0, 1e3] {
                let a = assemble_energy(&mesh, beta, &rule()).unwrap();
                for i in 0..a.dim() {
                    for j in 0..a.dim() {
                        assert!((a.get(i, j) - a.get(j, i)).abs() <= 1e-14);
                    }
                }
                let sys = apply_dirichlet(&a, &vec![0.0; a.dim()], &mesh.dof_map());
                assert!(sys.matrix.cholesky().is_ok(), "n={n} beta={beta}");
            }
        }
    }
}
