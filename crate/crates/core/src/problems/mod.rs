//! The two stochastic objectives `j(ξ, u)` driven by the optimizers.

mod app1;
mod app2;

use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::duality::{DualVector, SpaceDescriptor};
use crate::fem::{NodalFunction, SolverSettings, StructuredMesh};
use crate::Result;

pub use app1::{app1_offset, App1, App1Config, App1Sample};
pub use app2::{default_target, App2, App2Config, App2Sample};

/// A random objective `j(ξ, u)` on a finite-element control space.
pub trait StochasticObjective {
    type Sample;

    fn mesh(&self) -> &Arc<StructuredMesh>;

    fn space(&self) -> SpaceDescriptor;

    fn settings(&self) -> &SolverSettings;

    /// Draws a scenario `ξ` from `rng`.
    fn draw(&self, rng: &mut dyn RngCore) -> Self::Sample;

    /// Draws the scenario associated with a recorded seed.
    fn draw_seeded(&self, seed: u64) -> Self::Sample {
        self.draw(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn value(&self, u: &NodalFunction, sample: &mut Self::Sample) -> Result<f64>;

    /// `j_u(ξ, u)` as an element of the dual of [`Self::space`].
    fn derivative(&self, u: &NodalFunction, sample: &mut Self::Sample) -> Result<DualVector>;

    /// Monte-Carlo estimate of `E[j(·, u)]` over scenarios with the given seeds.
    fn energy_from_seeds(&self, u: &NodalFunction, seeds: &[u64]) -> Result<f64> {
        let mut total = 0.0;
        for &seed in seeds {
            total += self.value(u, &mut self.draw_seeded(seed))?;
        }
        Ok(total / seeds.len() as f64)
    }

    /// Monte-Carlo energy over `n` fresh scenarios whose seeds come from `rng`.
    fn mc_energy(&self, u: &NodalFunction, n: usize, rng: &mut dyn RngCore) -> Result<EnergyEstimate> {
        let seeds: Vec<u64> = (0..n.max(1)).map(|_| rng.next_u64()).collect();
        Ok(EnergyEstimate {
            value: self.energy_from_seeds(u, &seeds)?,
            seeds,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEstimate {
    pub value: f64,
    /// Scenario seeds used, in order, for replay.
    pub seeds: Vec<u64>,
}
