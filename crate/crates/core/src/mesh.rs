//! Partitions of `[-1, 1]` and the Hermite degree-of-freedom layout.

use crate::error::{Error, Result};

pub const LEFT: f64 = -1.0;
pub const RIGHT: f64 = 1.0;

/// A partition `-1 = x_0 < x_1 < ... < x_n = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
}

impl Mesh {
    /// Uniform mesh with `n_elements` elements of width `2 / n_elements`.
    pub fn uniform(n_elements: usize) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::invalid("mesh needs at least one element"));
        }
        let h = (RIGHT - LEFT) / n_elements as f64;
        let mut nodes: Vec<f64> = (0..=n_elements).map(|i| LEFT + i as f64 * h).collect();
        nodes[n_elements] = RIGHT;
        Ok(Mesh { nodes })
    }

    /// Mesh from explicit node coordinates. Endpoints must be exactly `-1`
    /// and `1` and the nodes strictly increasing.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::invalid("mesh needs at least two nodes"));
        }
        if nodes[0] != LEFT || *nodes.last().unwrap() != RIGHT {
            return Err(Error::invalid("mesh must start at -1 and end at 1"));
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("mesh nodes must be strictly increasing"));
        }
        Ok(Mesh { nodes })
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Endpoints of element `e`.
    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    pub fn width(&self, e: usize) -> f64 {
        self.nodes[e + 1] - self.nodes[e]
    }

    /// Largest element width.
    pub fn h(&self) -> f64 {
        (0..self.n_elements())
            .map(|e| self.width(e))
            .fold(0.0, f64::max)
    }

    /// Element containing `x`. At interior nodes the element to the right
    /// is chosen; `x = 1` belongs to the last element.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !(LEFT..=RIGHT).contains(&x) {
            return Err(Error::invalid(format!("x = {x} lies outside [-1, 1]")));
        }
        let idx = self.nodes.partition_point(|&node| node <= x);
        Ok(idx.saturating_sub(1).min(self.n_elements() - 1))
    }

    pub fn dof_map(&self) -> DofMap {
        DofMap::new(self.n_nodes())
    }
}

/// Global numbering of Hermite DOFs: node `i` owns the value DOF `2i` and the
/// slope DOF `2i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    n_nodes: usize,
}

impl DofMap {
    fn new(n_nodes: usize) -> Self {
        DofMap { n_nodes }
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.n_nodes
    }

    pub fn value_dof(&self, node: usize) -> usize {
        2 * node
    }

    pub fn slope_dof(&self, node: usize) -> usize {
        2 * node + 1
    }

    /// The four DOFs of element `e`, ordered (value_left, slope_left,
    /// value_right, slope_right).
    pub fn element_dofs(&self, e: usize) -> [usize; 4] {
        [2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3]
    }

    /// Value DOFs at `-1` and `1`, fixed to zero.
    pub fn dirichlet_dofs(&self) -> [usize; 2] {
        [0, 2 * (self.n_nodes - 1)]
    }

    /// Slope DOFs at every node; these carry the derivative bounds.
    pub fn constrained_dofs(&self) -> Vec<usize> {
        (0..self.n_nodes).map(|i| self.slope_dof(i)).collect()
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet_dofs().contains(&dof)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_elements() {
        let m = Mesh::uniform(2).unwrap();
        assert_eq!(m.nodes(), &[-1.0, 0.0, 1.0]);
        assert_eq!(m.h(), 1.0);
    }

    #[test]
    fn nine_elements_width() {
        let m = Mesh::uniform(9).unwrap();
        assert!((m.h() - 2.0 / 9.0).abs() < 1e-15);
        let total: f64 = (0..9).map(|e| m.width(e)).sum();
        assert!((total - 2.0).abs() < 1e-14);
        assert_eq!(m.nodes()[9], 1.0);
    }

    #[test]
    fn empty_mesh_rejected() {
        assert!(Mesh::uniform(0).is_err());
    }

    #[test]
    fn bad_nodes_rejected() {
        assert!(Mesh::from_nodes(vec![-1.0, 0.5, 0.2, 1.0]).is_err());
        assert!(Mesh::from_nodes(vec![-0.9, 1.0]).is_err());
        assert!(Mesh::from_nodes(vec![-1.0]).is_err());
        assert!(Mesh::from_nodes(vec![-1.0, -0.3, 1.0]).is_ok());
    }

    #[test]
    fn locate_prefers_right_element() {
        let m = Mesh::uniform(4).unwrap();
        assert_eq!(m.locate(-1.0).unwrap(), 0);
        assert_eq!(m.locate(0.0).unwrap(), 2);
        assert_eq!(m.locate(0.1).unwrap(), 2);
        assert_eq!(m.locate(1.0).unwrap(), 3);
        assert!(m.locate(1.0 + 1e-12).is_err());
    }

    #[test]
    fn dof_counts() {
        for n in 1..20 {
            let d = Mesh::uniform(n).unwrap().dof_map();
            assert_eq!(d.n_dofs(), 2 * (n + 1));
            let constrained = d.constrained_dofs();
            assert_eq!(constrained.len(), n + 1);
            assert!(d.dirichlet_dofs().iter().all(|i| !constrained.contains(i)));
        }
    }
}
