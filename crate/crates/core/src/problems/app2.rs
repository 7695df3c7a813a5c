use std::sync::Arc;

use rand::RngCore;

use super::{EnergyEstimate, StochasticObjective};
use crate::duality::{DualVector, SpaceDescriptor, SpaceKind};
use crate::fem::{
    assemble_lumped_load, assemble_mass, assemble_reaction_jacobian, assemble_reaction_residual,
    assemble_stiffness, newton_solve, solve_linear, NodalFunction, SolverSettings,
    SparseOperator, StructuredMesh,
};
use crate::random_field::{FieldDraw, KleSpec};
use crate::{Error, Result};

/// Default tracking target `1 + 256 ((x₁-1)x₁(x₂-1)x₂)²`.
pub fn default_target(x: [f64; 2]) -> f64 {
    1.0 + 256.0 * ((x[0] - 1.0) * x[0] * (x[1] - 1.0) * x[1]).powi(2)
}

#[derive(Debug, Clone)]
pub struct App2Config {
    pub mesh: Arc<StructuredMesh>,
    pub p: f64,
    pub beta: f64,
    /// Tracking target, stored by nodal interpolation.
    pub target: NodalFunction,
    /// Field behind the diffusivity `D = I_h(1 + exp Θ)`.
    pub diffusion_kle: KleSpec,
    /// Field behind the source `F = 1 + 5Θ`, drawn independently.
    pub source_kle: KleSpec,
    pub settings: SolverSettings,
}

impl App2Config {
    /// `p = 4`, `β = 10⁻²`, both fields with `τ = 1`, `α = 2`, 10 modes per axis.
    pub fn new(mesh: Arc<StructuredMesh>) -> Self {
        let kle = KleSpec::new(1.0, 2.0, 10).expect("default field parameters are valid");
        Self {
            target: NodalFunction::interpolate(&mesh, default_target),
            mesh,
            p: 4.0,
            beta: 1e-2,
            diffusion_kle: kle,
            source_kle: kle,
            settings: SolverSettings::default(),
        }
    }
}

/// Semilinear optimal control
/// `j(ξ, u) = ½ ∫ (y - y_d)² + (β/p) ∫ |u|^p` on `L^p`, where `y` solves
/// `-div(D ∇y) + y + y⁵ = F + u` with homogeneous Neumann conditions.
///
/// Source terms and the control cost use nodal quadrature; diffusion,
/// reaction and tracking terms use exact or degree-4 quadrature.
#[derive(Debug, Clone)]
pub struct App2 {
    config: App2Config,
    space: SpaceDescriptor,
    mass: SparseOperator,
}

#[derive(Debug, Clone)]
struct StateCache {
    control: Vec<f64>,
    state: NodalFunction,
    adjoint: Option<NodalFunction>,
}

/// One scenario: diffusivity `D`, source `F` and cached solves.
#[derive(Debug, Clone)]
pub struct App2Sample {
    pub diffusion: NodalFunction,
    pub source: NodalFunction,
    pub draws: Option<(FieldDraw, FieldDraw)>,
    stiffness: Option<SparseOperator>,
    cache: Option<StateCache>,
}

impl App2Sample {
    /// A scenario with prescribed nodal `D > 0` and `F`.
    pub fn forced(diffusion: NodalFunction, source: NodalFunction) -> Result<Self> {
        if diffusion.coeffs().iter().any(|&d| !(d > 0.0)) {
            return Err(Error::InvalidArgument("diffusivity must be positive".into()));
        }
        Ok(Self {
            diffusion,
            source,
            draws: None,
            stiffness: None,
            cache: None,
        })
    }

    /// Overrides the cached state for control `u`.
    pub fn set_state(&mut self, u: &NodalFunction, y: NodalFunction) {
        self.cache = Some(StateCache {
            control: u.coeffs().to_vec(),
            state: y,
            adjoint: None,
        });
    }

    pub fn cached_state(&self) -> Option<&NodalFunction> {
        self.cache.as_ref().map(|c| &c.state)
    }

    pub fn cached_adjoint(&self) -> Option<&NodalFunction> {
        self.cache.as_ref().and_then(|c| c.adjoint.as_ref())
    }

    fn cache_for(&self, u: &NodalFunction) -> Option<&StateCache> {
        self.cache.as_ref().filter(|c| c.control == u.coeffs())
    }

    fn stiffness(&mut self) -> &SparseOperator {
        let d = &self.diffusion;
        self.stiffness
            .get_or_insert_with(|| assemble_stiffness(d.mesh(), Some(d)))
    }
}

/// Root of `y + y⁵ = b`.
fn quintic_root(b: f64) -> f64 {
    let mut y = if b.abs() < 1.0 { b / 2.0 } else { b.signum() * b.abs().powf(0.2) };
    for _ in 0..60 {
        let step = (y + y.powi(5) - b) / (1.0 + 5.0 * y.powi(4));
        y -= step;
        if step.abs() <= 1e-15 * (1.0 + y.abs()) {
            break;
        }
    }
    y
}

impl App2 {
    pub fn new(config: App2Config) -> Result<Self> {
        let space = SpaceDescriptor::new(SpaceKind::Lp, config.p)?;
        if !(config.beta > 0.0) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {}", config.beta)));
        }
        config.settings.validate()?;
        let mass = assemble_mass(&config.mesh);
        Ok(Self {
            config,
            space,
            mass,
        })
    }

    pub fn config(&self) -> &App2Config {
        &self.config
    }

    pub fn sample_from_draws(&self, diffusion: FieldDraw, source: FieldDraw) -> App2Sample {
        let mesh = &self.config.mesh;
        let d = diffusion.to_nodal(mesh).map(|t| 1.0 + t.exp());
        let f = source.to_nodal(mesh).map(|t| 1.0 + 5.0 * t);
        App2Sample {
            diffusion: d,
            source: f,
            draws: Some((diffusion, source)),
            stiffness: None,
            cache: None,
        }
    }

    /// Solves the state equation for control `u`, reusing the cache.
    pub fn state(&self, u: &NodalFunction, s: &mut App2Sample) -> Result<NodalFunction> {
        if let Some(c) = s.cache_for(u) {
            return Ok(c.state.clone());
        }
        let mesh = &self.config.mesh;
        let load = assemble_lumped_load(&s.source.add_scaled(1.0, u));
        let stiffness = s.stiffness().clone();
        let start: Vec<f64> = s
            .source
            .coeffs()
            .iter()
            .zip(u.coeffs())
            .map(|(f, u)| quintic_root(f + u))
            .collect();

        let to_function = |y: &[f64]| NodalFunction::new(mesh.clone(), y.to_vec());
        let outcome = newton_solve(
            |y| {
                let mut r = assemble_reaction_residual(&to_function(y)?)?;
                let ky = stiffness.mul_vec(y);
                for ((ri, ki), bi) in r.iter_mut().zip(&ky).zip(&load) {
                    *ri += ki - bi;
                }
                Ok(r)
            },
            |y| {
                let mut jac = assemble_reaction_jacobian(&to_function(y)?)?;
                jac.add_assign_same_pattern(&stiffness);
                Ok(jac)
            },
            start,
            &self.config.settings,
        )?;
        let y = to_function(&outcome.solution)?;
        s.set_state(u, y.clone());
        Ok(y)
    }

    /// Solves `∫ D∇q·∇η + (1 + 5y⁴) q η = -∫ (y - y_d) η` for a given state.
    pub fn adjoint_for_state(&self, s: &mut App2Sample, y: &NodalFunction) -> Result<NodalFunction> {
        let mut a = assemble_reaction_jacobian(y)?;
        a.add_assign_same_pattern(s.stiffness());
        let misfit = y.add_scaled(-1.0, &self.config.target);
        let rhs: Vec<f64> = self.mass.mul_vec(misfit.coeffs()).iter().map(|v| -v).collect();
        let q = solve_linear(&a, &rhs, &self.config.settings)?;
        NodalFunction::new(self.config.mesh.clone(), q)
    }

    /// Adjoint for control `u`, solving (and caching) the state if needed.
    pub fn adjoint(&self, u: &NodalFunction, s: &mut App2Sample) -> Result<NodalFunction> {
        if let Some(q) = s.cache_for(u).and_then(|c| c.adjoint.clone()) {
            return Ok(q);
        }
        let y = self.state(u, s)?;
        let q = self.adjoint_for_state(s, &y)?;
        if let Some(c) = s.cache.as_mut() {
            c.adjoint = Some(q.clone());
        }
        Ok(q)
    }

    /// `½ ∫ (y - y_d)²`.
    pub fn misfit(&self, y: &NodalFunction) -> f64 {
        let e = y.add_scaled(-1.0, &self.config.target);
        let me = self.mass.mul_vec(e.coeffs());
        0.5 * me.iter().zip(e.coeffs()).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `(β/p) ∫ |u|^p`.
    pub fn control_cost(&self, u: &NodalFunction) -> f64 {
        self.config.beta / self.config.p * u.lumped_power(self.config.p)
    }

    /// Derivative density `β|u|^{p-2}u - q`.
    pub fn derivative_density(&self, u: &NodalFunction, q: &NodalFunction) -> NodalFunction {
        let (beta, p) = (self.config.beta, self.config.p);
        let coeffs = u
            .coeffs()
            .iter()
            .zip(q.coeffs())
            .map(|(&u, &q)| beta * u.abs().powf(p - 2.0) * u - q)
            .collect();
        NodalFunction::new(self.config.mesh.clone(), coeffs).expect("finite inputs")
    }
}

impl StochasticObjective for App2 {
    type Sample = App2Sample;

    fn mesh(&self) -> &Arc<StructuredMesh> {
        &self.config.mesh
    }

    fn space(&self) -> SpaceDescriptor {
        self.space
    }

    fn settings(&self) -> &SolverSettings {
        &self.config.settings
    }

    fn draw(&self, rng: &mut dyn RngCore) -> App2Sample {
        let d = FieldDraw::draw(&self.config.diffusion_kle, rng);
        let f = FieldDraw::draw(&self.config.source_kle, rng);
        self.sample_from_draws(d, f)
    }

    fn value(&self, u: &NodalFunction, s: &mut App2Sample) -> Result<f64> {
        let y = self.state(u, s)?;
        Ok(self.misfit(&y) + self.control_cost(u))
    }

    fn derivative(&self, u: &NodalFunction, s: &mut App2Sample) -> Result<DualVector> {
        let q = self.adjoint(u, s)?;
        DualVector::lp(self.derivative_density(u, &q), self.config.p)
    }

    /// `(β/p)∫|u|^p + (1/N) Σ ½∫(y(u, ξᵢ) - y_d)²`.
    fn energy_from_seeds(&self, u: &NodalFunction, seeds: &[u64]) -> Result<f64> {
        let mut misfit = 0.0;
        for &seed in seeds {
            let mut s = self.draw_seeded(seed);
            misfit += self.misfit(&self.state(u, &mut s)?);
        }
        Ok(self.control_cost(u) + misfit / seeds.len() as f64)
    }

    fn mc_energy(&self, u: &NodalFunction, n: usize, rng: &mut dyn RngCore) -> Result<EnergyEstimate> {
        let seeds: Vec<u64> = (0..n.max(1)).map(|_| rng.next_u64()).collect();
        Ok(EnergyEstimate {
            value: self.energy_from_seeds(u, &seeds)?,
            seeds,
        })
    }
}
