use std::f64::consts::PI;
use std::sync::Arc;

use rand::RngCore;

use super::StochasticObjective;
use crate::duality::{DualVector, SpaceDescriptor, SpaceKind};
use crate::fem::{
    assemble_plaplace_residual, integrate_power, NodalFunction, PowerMode, SolverSettings,
    StructuredMesh,
};
use crate::random_field::{FieldDraw, KleSpec};
use crate::{Error, Result};

/// Deterministic part of the random offset, `cos(πx₁)² cos(πx₂)²`.
pub fn app1_offset(x: [f64; 2]) -> f64 {
    (PI * x[0]).cos().powi(2) * (PI * x[1]).cos().powi(2)
}

#[derive(Debug, Clone)]
pub struct App1Config {
    pub mesh: Arc<StructuredMesh>,
    pub p: f64,
    pub kle: KleSpec,
    pub settings: SolverSettings,
}

impl App1Config {
    /// `p = 4`, `τ = 1`, `α = 3`, modes up to 10 per axis.
    pub fn new(mesh: Arc<StructuredMesh>) -> Self {
        Self {
            mesh,
            p: 4.0,
            kle: KleSpec::new(1.0, 3.0, 10).expect("default field parameters are valid"),
            settings: SolverSettings::default(),
        }
    }
}

/// Random p-Laplace energy `j(ξ, u) = (1/p) ∫ |∇(u + g(ξ))|^p` on
/// `W^{1,p}_0`, with `g = Θ + g₀`.
#[derive(Debug, Clone)]
pub struct App1 {
    config: App1Config,
    space: SpaceDescriptor,
    offset: NodalFunction,
}

#[derive(Debug, Clone)]
pub struct App1Sample {
    pub g: NodalFunction,
    pub draw: Option<FieldDraw>,
}

impl App1Sample {
    /// A scenario with a prescribed offset `g`.
    pub fn forced(g: NodalFunction) -> Self {
        Self { g, draw: None }
    }
}

impl App1 {
    pub fn new(config: App1Config) -> Result<Self> {
        let space = SpaceDescriptor::new(SpaceKind::W1p0, config.p)?;
        config.settings.validate()?;
        let offset = NodalFunction::interpolate(&config.mesh, app1_offset);
        Ok(Self {
            config,
            space,
            offset,
        })
    }

    pub fn config(&self) -> &App1Config {
        &self.config
    }

    pub fn sample_from_draw(&self, draw: FieldDraw) -> App1Sample {
        let theta = draw.to_nodal(&self.config.mesh);
        App1Sample {
            g: theta.add_scaled(1.0, &self.offset),
            draw: Some(draw),
        }
    }

    fn shifted(&self, u: &NodalFunction, s: &App1Sample) -> Result<NodalFunction> {
        let mesh = &self.config.mesh;
        let leak = u
            .coeffs()
            .iter()
            .zip(mesh.boundary_mask())
            .any(|(v, &b)| b && *v != 0.0);
        if leak {
            return Err(Error::InvalidArgument(
                "control must vanish on the boundary".into(),
            ));
        }
        Ok(u.add_scaled(1.0, &s.g))
    }
}

impl StochasticObjective for App1 {
    type Sample = App1Sample;

    fn mesh(&self) -> &Arc<StructuredMesh> {
        &self.config.mesh
    }

    fn space(&self) -> SpaceDescriptor {
        self.space
    }

    fn settings(&self) -> &SolverSettings {
        &self.config.settings
    }

    fn draw(&self, rng: &mut dyn RngCore) -> App1Sample {
        self.sample_from_draw(FieldDraw::draw(&self.config.kle, rng))
    }

    fn value(&self, u: &NodalFunction, s: &mut App1Sample) -> Result<f64> {
        let w = self.shifted(u, s)?;
        Ok(integrate_power(&w, self.config.p, PowerMode::Gradient) / self.config.p)
    }

    fn derivative(&self, u: &NodalFunction, s: &mut App1Sample) -> Result<DualVector> {
        let w = self.shifted(u, s)?;
        let values = assemble_plaplace_residual(&w, self.config.p, 0.0)?;
        DualVector::w1p0(&self.config.mesh, self.config.p, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assemble_stiffness;

    fn problem(n: usize, p: f64) -> App1 {
        let mut cfg = App1Config::new(StructuredMesh::new(n, n).unwrap());
        cfg.p = p;
        App1::new(cfg).unwrap()
    }

    #[test]
    fn unit_slope_offset() {
        let app = problem(6, 4.0);
        let mesh = app.mesh().clone();
        let mut s = App1Sample::forced(NodalFunction::interpolate(&mesh, |x| x[0]));
        let v = app.value(&NodalFunction::zeros(&mesh), &mut s).unwrap();
        assert!((v - 0.25).abs() < 1e-14);
    }

    #[test]
    fn cancellation_gives_zero() {
        let app = problem(6, 4.0);
        let mesh = app.mesh().clone();
        let g = NodalFunction::interpolate(&mesh, |x| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]));
        let mut s = App1Sample::forced(g.clone());
        let u = g.scaled(-1.0);
        assert_eq!(app.value(&u, &mut s).unwrap(), 0.0);
        let d = app.derivative(&u, &mut s).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn p2_derivative_is_stiffness_action() {
        let app = problem(6, 2.0);
        let mesh = app.mesh().clone();
        let mut s = app.draw_seeded(9);
        let u = NodalFunction::interpolate(&mesh, |x| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]));
        let d = app.derivative(&u, &mut s).unwrap();
        let k = assemble_stiffness(&mesh, None).mul_vec(u.add_scaled(1.0, &s.g).coeffs());
        for (i, (a, b)) in d.values().iter().zip(&k).enumerate() {
            let expected = if mesh.boundary_mask()[i] { 0.0 } else { *b };
            assert!((a - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_values_rejected() {
        let app = problem(3, 4.0);
        let mesh = app.mesh().clone();
        let mut s = app.draw_seeded(1);
        assert!(app.value(&NodalFunction::constant(&mesh, 1.0), &mut s).is_err());
    }

    #[test]
    fn value_is_nonnegative() {
        let app = problem(8, 4.0);
        let mesh = app.mesh().clone();
        for seed in 0..5 {
            let mut s = app.draw_seeded(seed);
            assert!(app.value(&NodalFunction::zeros(&mesh), &mut s).unwrap() >= 0.0);
        }
    }
}
