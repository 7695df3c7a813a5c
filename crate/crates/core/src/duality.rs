//! Steepest-descent directions and dual norms.
//!
//! For `F ∈ X*` the steepest-descent direction is a minimizer of `F[v]` over
//! the closed unit ball of `X`; its value is `-‖F‖_{X*}`. Two spaces are
//! supported:
//!
//! * `W^{1,p}_0` with `‖v‖ = (∫|∇v|^p)^{1/p}`. The direction is obtained by
//!   solving the p-Laplace problem `∫|∇w|^{p-2}∇w·∇η = -F[η]` and rescaling
//!   `v = w / ‖w‖`; the dual norm is `‖w‖^{p-1}`.
//! * `L^p` with nodal quadrature. `F[η] = ∫ r η` for a nodal density `r`, and
//!   the direction is the closed form `v ∝ -sign(r)|r|^{1/(p-1)}` with dual
//!   norm `‖r‖_{L^{p'}}`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fem::{
    assemble_lumped_load, assemble_stiffness, solve_plaplace_dirichlet, NodalFunction,
    ReducedSystem, SolverSettings, StructuredMesh,
};
use crate::{Error, Result};

/// Below this `W^{1,p}_0` norm the p-Laplace solution is treated as zero.
pub const DEGENERATE_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceKind {
    W1p0,
    Lp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub kind: SpaceKind,
    pub p: f64,
}

impl SpaceDescriptor {
    pub fn new(kind: SpaceKind, p: f64) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("exponent must satisfy p >= 2, got {p}")));
        }
        Ok(Self { kind, p })
    }

    pub fn conjugate_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn is_hilbert(&self) -> bool {
        self.p == 2.0
    }

    /// `‖v‖_X`.
    pub fn norm(&self, v: &NodalFunction) -> f64 {
        match self.kind {
            SpaceKind::W1p0 => v.w1p_seminorm(self.p),
            SpaceKind::Lp => v.lp_norm(self.p),
        }
    }
}

/// A linear functional on the P1 space, stored through its action on every
/// nodal basis function.
#[derive(Debug, Clone)]
pub struct DualVector {
    space: SpaceDescriptor,
    mesh: Arc<StructuredMesh>,
    values: Vec<f64>,
    density: Option<NodalFunction>,
}

impl DualVector {
    /// Functional on `W^{1,p}_0` from its basis values; entries on boundary
    /// nodes are dropped.
    pub fn w1p0(mesh: &Arc<StructuredMesh>, p: f64, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::InvalidArgument("dual vector length mismatch".into()));
        }
        for (v, &b) in values.iter_mut().zip(mesh.boundary_mask()) {
            if b {
                *v = 0.0;
            }
        }
        Ok(Self {
            space: SpaceDescriptor::new(SpaceKind::W1p0, p)?,
            mesh: Arc::clone(mesh),
            values,
            density: None,
        })
    }

    /// Functional `η ↦ ∫ r η` on `L^p`, integrated with nodal quadrature.
    pub fn lp(density: NodalFunction, p: f64) -> Result<Self> {
        Ok(Self {
            space: SpaceDescriptor::new(SpaceKind::Lp, p)?,
            mesh: Arc::clone(density.mesh()),
            values: assemble_lumped_load(&density),
            density: Some(density),
        })
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn mesh(&self) -> &Arc<StructuredMesh> {
        &self.mesh
    }

    /// `F[φ_i]` for each node.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn density(&self) -> Option<&NodalFunction> {
        self.density.as_ref()
    }

    /// `F[v]`.
    pub fn apply(&self, v: &NodalFunction) -> f64 {
        self.values.iter().zip(v.coeffs()).map(|(f, x)| f * x).sum()
    }

    pub fn scaled(&self, c: f64) -> DualVector {
        DualVector {
            space: self.space,
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|v| c * v).collect(),
            density: self.density.as_ref().map(|d| d.scaled(c)),
        }
    }
}

/// A steepest-descent direction together with the dual norm.
///
/// The KKT multiplier of the unit-ball constraint equals `dual_norm`.
#[derive(Debug, Clone)]
pub struct Direction {
    pub direction: NodalFunction,
    pub dual_norm: f64,
}

impl Direction {
    fn zero(mesh: &Arc<StructuredMesh>) -> Self {
        Self {
            direction: NodalFunction::zeros(mesh),
            dual_norm: 0.0,
        }
    }

    pub fn multiplier(&self) -> f64 {
        self.dual_norm
    }
}

pub fn steepest_direction(f: &DualVector, settings: &SolverSettings) -> Result<Direction> {
    match f.space.kind {
        SpaceKind::W1p0 => steepest_direction_w1p(f, settings),
        SpaceKind::Lp => steepest_direction_lp(f),
    }
}

pub fn steepest_direction_w1p(f: &DualVector, settings: &SolverSettings) -> Result<Direction> {
    if f.space.kind != SpaceKind::W1p0 {
        return Err(Error::InvalidArgument("expected a W^{1,p}_0 functional".into()));
    }
    let p = f.space.p;
    let rhs: Vec<f64> = f.values.iter().map(|v| -v).collect();
    let w = solve_plaplace_dirichlet(&f.mesh, &rhs, p, settings)?;
    let norm = w.w1p_seminorm(p);
    if norm <= DEGENERATE_THRESHOLD {
        return Ok(Direction::zero(&f.mesh));
    }
    Ok(Direction {
        direction: w.scaled(1.0 / norm),
        dual_norm: norm.powf(p - 1.0),
    })
}

pub fn steepest_direction_lp(f: &DualVector) -> Result<Direction> {
    let r = f
        .density
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("expected an L^p functional with density".into()))?;
    let p = f.space.p;
    let q = f.space.conjugate_exponent();
    let dual_norm = r.lp_norm(q);
    if dual_norm == 0.0 {
        return Ok(Direction::zero(&f.mesh));
    }
    let shaped = r.map(|x| -x.signum() * x.abs().powf(1.0 / (p - 1.0)));
    let scale = shaped.lp_norm(p);
    Ok(Direction {
        direction: shaped.scaled(1.0 / scale),
        dual_norm,
    })
}

/// Negative Riesz representative of `F` in the Hilbert case `p = 2`, i.e.
/// the minimizer of `F[v] + ½‖v‖²`.
pub fn negative_gradient(f: &DualVector, settings: &SolverSettings) -> Result<NodalFunction> {
    if !f.space.is_hilbert() {
        return Err(Error::InvalidArgument(format!(
            "gradients need a Hilbert space, got p = {}",
            f.space.p
        )));
    }
    match f.space.kind {
        SpaceKind::W1p0 => {
            let rhs: Vec<f64> = f.values.iter().map(|v| -v).collect();
            let k = assemble_stiffness(&f.mesh, None);
            let w = ReducedSystem::new(&k, &rhs, f.mesh.boundary_mask()).solve(settings)?;
            NodalFunction::new(Arc::clone(&f.mesh), w)
        }
        SpaceKind::Lp => Ok(f
            .density
            .as_ref()
            .expect("L^p functionals carry a density")
            .scaled(-1.0)),
    }
}
