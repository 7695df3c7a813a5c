use std::sync::Arc;

use super::sparse::SparsityPattern;
use crate::{Error, Result};

/// Constant geometric data of one triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleGeometry {
    pub area: f64,
    /// Gradients of the three barycentric (nodal basis) functions.
    pub grads: [[f64; 2]; 3],
}

/// Uniform triangulation of the unit square.
///
/// Nodes are numbered row by row, `index = i + j * (nx + 1)`, and each grid
/// cell is split along its lower-left to upper-right diagonal into two
/// counter-clockwise triangles.
#[derive(Debug)]
pub struct StructuredMesh {
    nx: usize,
    ny: usize,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_mask: Vec<bool>,
    geometry: Vec<TriangleGeometry>,
    lumped_mass: Vec<f64>,
    pattern: SparsityPattern,
}

impl StructuredMesh {
    pub fn new(nx: usize, ny: usize) -> Result<Arc<Self>> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidArgument(format!(
                "mesh subdivisions must be positive, got {nx}x{ny}"
            )));
        }
        let stride = nx + 1;
        let mut nodes = Vec::with_capacity(stride * (ny + 1));
        let mut boundary_mask = Vec::with_capacity(nodes.capacity());
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([i as f64 / nx as f64, j as f64 / ny as f64]);
                boundary_mask.push(i == 0 || i == nx || j == 0 || j == ny);
            }
        }

        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let a = i + j * stride;
                let b = a + 1;
                let c = b + stride;
                let d = a + stride;
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }

        let geometry: Vec<_> = triangles
            .iter()
            .map(|t| triangle_geometry(&nodes, t))
            .collect();

        let mut lumped_mass = vec![0.0; nodes.len()];
        for (t, g) in triangles.iter().zip(&geometry) {
            for &n in t {
                lumped_mass[n] += g.area / 3.0;
            }
        }

        let pattern = SparsityPattern::from_triangles(nodes.len(), &triangles);

        Ok(Arc::new(Self {
            nx,
            ny,
            nodes,
            triangles,
            boundary_mask,
            geometry,
            lumped_mass,
            pattern,
        }))
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary_mask
    }

    pub fn geometry(&self) -> &[TriangleGeometry] {
        &self.geometry
    }

    /// Row sums of the consistent mass matrix, `∫ φ_i`.
    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped_mass
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    /// Indices of nodes in the interior of the square.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes())
            .filter(|&i| !self.boundary_mask[i])
            .collect()
    }
}

fn triangle_geometry(nodes: &[[f64; 2]], t: &[usize; 3]) -> TriangleGeometry {
    let [x0, y0] = nodes[t[0]];
    let [x1, y1] = nodes[t[1]];
    let [x2, y2] = nodes[t[2]];
    let det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
    TriangleGeometry {
        area: 0.5 * det,
        grads: [
            [(y1 - y2) / det, (x2 - x1) / det],
            [(y2 - y0) / det, (x0 - x2) / det],
            [(y0 - y1) / det, (x1 - x0) / det],
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_mesh() {
        let m = StructuredMesh::new(1, 1).unwrap();
        assert_eq!(m.num_nodes(), 4);
        assert_eq!(m.num_triangles(), 2);
        assert!(m.boundary_mask().iter().all(|&b| b));
    }

    #[test]
    fn two_by_two_has_single_interior_node() {
        let m = StructuredMesh::new(2, 2).unwrap();
        assert_eq!(m.num_nodes(), 9);
        assert_eq!(m.num_triangles(), 8);
        assert_eq!(m.boundary_mask().iter().filter(|&&b| b).count(), 8);
        assert_eq!(m.interior_nodes(), vec![4]);
        assert_eq!(m.nodes()[4], [0.5, 0.5]);
    }

    #[test]
    fn counts_follow_formula() {
        for (nx, ny) in [(32, 32), (3, 5), (7, 1)] {
            let m = StructuredMesh::new(nx, ny).unwrap();
            assert_eq!(m.num_nodes(), (nx + 1) * (ny + 1));
            assert_eq!(m.num_triangles(), 2 * nx * ny);
        }
    }

    #[test]
    fn triangles_are_positively_oriented_and_tile_the_square() {
        let m = StructuredMesh::new(5, 3).unwrap();
        assert!(m.geometry().iter().all(|g| g.area > 0.0));
        let total: f64 = m.geometry().iter().map(|g| g.area).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let lumped: f64 = m.lumped_mass().iter().sum();
        assert!((lumped - 1.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_mask_matches_coordinates() {
        let m = StructuredMesh::new(4, 6).unwrap();
        for (x, &b) in m.nodes().iter().zip(m.boundary_mask()) {
            let on = x.iter().any(|&c| c.abs() < 1e-14 || (c - 1.0).abs() < 1e-14);
            assert_eq!(on, b);
        }
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(StructuredMesh::new(0, 3).is_err());
    }
}
