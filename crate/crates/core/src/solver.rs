//! End-to-end discretization and solve on one mesh.

use crate::assembly::{assemble, AssembledSystem, DEFAULT_QUAD_POINTS};
use crate::error::Result;
use crate::hermite::{DiscreteSolution, SolveInfo};
use crate::mesh::Mesh;
use crate::problems::ProblemSpec;
use crate::qp::{
    kkt_residual, solve_pdas, BoundQp, QpSolution, DEFAULT_PDAS_C, DEFAULT_PDAS_MAX_ITER,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Gauss points per element (per smooth piece) during assembly.
    pub quad_points: usize,
    pub pdas_c: f64,
    pub pdas_max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            quad_points: DEFAULT_QUAD_POINTS,
            pdas_c: DEFAULT_PDAS_C,
            pdas_max_iter: DEFAULT_PDAS_MAX_ITER,
        }
    }
}

/// The discrete solution together with the algebraic problem it came from.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub solution: DiscreteSolution,
    pub system: AssembledSystem,
    pub qp: BoundQp,
    pub qp_solution: QpSolution,
}

pub fn solve_full(spec: &ProblemSpec, mesh: &Mesh, options: &SolverOptions) -> Result<SolveOutput> {
    let system = assemble(spec, mesh, options.quad_points)?;
    let qp = system.to_qp()?;
    let qp_solution = solve_pdas(&qp, options.pdas_c, options.pdas_max_iter)?;
    let kkt = kkt_residual(&qp, &qp_solution)?;
    let mut solution = DiscreteSolution::new(mesh.clone(), system.embed(&qp_solution.x))?;
    // constraint positions coincide with node indices
    solution.info = SolveInfo {
        iterations: qp_solution.iterations,
        active_nodes: qp_solution.active_set.clone(),
        multipliers: qp_solution.multipliers.clone(),
        kkt: Some(kkt),
    };
    Ok(SolveOutput {
        solution,
        system,
        qp,
        qp_solution,
    })
}

/// Solves the discrete problem on `mesh`.
pub fn solve(spec: &ProblemSpec, mesh: &Mesh, options: &SolverOptions) -> Result<DiscreteSolution> {
    solve_full(spec, mesh, options).map(|out| out.solution)
}
