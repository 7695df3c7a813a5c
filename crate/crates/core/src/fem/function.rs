use std::sync::Arc;

use super::mesh::StructuredMesh;
use crate::{Error, Result};

/// A continuous piecewise-linear function, stored as one value per node.
#[derive(Debug, Clone)]
pub struct NodalFunction {
    mesh: Arc<StructuredMesh>,
    coeffs: Vec<f64>,
}

impl PartialEq for NodalFunction {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) && self.coeffs == other.coeffs
    }
}

impl NodalFunction {
    pub fn new(mesh: Arc<StructuredMesh>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != mesh.num_nodes() {
            return Err(Error::InvalidArgument(format!(
                "expected {} nodal values, got {}",
                mesh.num_nodes(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("nodal function"));
        }
        Ok(Self { mesh, coeffs })
    }

    pub fn zeros(mesh: &Arc<StructuredMesh>) -> Self {
        Self::constant(mesh, 0.0)
    }

    pub fn constant(mesh: &Arc<StructuredMesh>, value: f64) -> Self {
        Self {
            mesh: Arc::clone(mesh),
            coeffs: vec![value; mesh.num_nodes()],
        }
    }

    /// Lagrange interpolation: evaluates `f` at every node.
    pub fn interpolate(mesh: &Arc<StructuredMesh>, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self {
            mesh: Arc::clone(mesh),
            coeffs: mesh.nodes().iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn mesh(&self) -> &Arc<StructuredMesh> {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Same mesh, new values.
    pub fn with_coeffs(&self, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(Arc::clone(&self.mesh), coeffs)
    }

    /// Constant gradient of the interpolant on triangle `t`.
    pub fn element_gradient(&self, t: usize) -> [f64; 2] {
        let tri = self.mesh.triangles()[t];
        let geo = &self.mesh.geometry()[t];
        let mut g = [0.0; 2];
        for (k, &n) in tri.iter().enumerate() {
            g[0] += self.coeffs[n] * geo.grads[k][0];
            g[1] += self.coeffs[n] * geo.grads[k][1];
        }
        g
    }

    /// Value at barycentric coordinates `bary` inside triangle `t`.
    pub fn value_in(&self, t: usize, bary: [f64; 3]) -> f64 {
        let tri = self.mesh.triangles()[t];
        tri.iter()
            .zip(bary)
            .map(|(&n, l)| self.coeffs[n] * l)
            .sum()
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &NodalFunction) -> NodalFunction {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        Self {
            mesh: Arc::clone(&self.mesh),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> NodalFunction {
        Self {
            mesh: Arc::clone(&self.mesh),
            coeffs: self.coeffs.iter().map(|a| alpha * a).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> NodalFunction {
        Self {
            mesh: Arc::clone(&self.mesh),
            coeffs: self.coeffs.iter().map(|&a| f(a)).collect(),
        }
    }

    /// Nodal-quadrature `∫ |f|^p`, using the lumped mass weights.
    pub fn lumped_power(&self, p: f64) -> f64 {
        self.mesh
            .lumped_mass()
            .iter()
            .zip(&self.coeffs)
            .map(|(m, c)| m * c.abs().powf(p))
            .sum()
    }

    /// `(∫ |f|^p)^{1/p}` with nodal quadrature.
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.lumped_power(p).powf(1.0 / p)
    }

    /// `(∫ |∇f|^p)^{1/p}`, exact for P1.
    pub fn w1p_seminorm(&self, p: f64) -> f64 {
        super::quadrature::integrate_power(self, p, super::quadrature::PowerMode::Gradient)
            .powf(1.0 / p)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest absolute nodal difference.
    pub fn max_abs_diff(&self, other: &NodalFunction) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}
