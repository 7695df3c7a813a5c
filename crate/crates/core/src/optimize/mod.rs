//! Stochastic steepest descent (SSD) and, in the Hilbert case, stochastic
//! gradient descent (SGD).
//!
//! Both loops draw one independent scenario per iteration, compute a
//! direction from the sampled derivative and update `u_{n+1} = u_n + t_n v_n`.
//! SSD uses the unit-norm steepest-descent direction of the duality module;
//! SGD uses the negative Riesz representative.

mod history;
mod schedule;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::duality::{negative_gradient, steepest_direction};
use crate::fem::NodalFunction;
use crate::problems::StochasticObjective;
use crate::Error as SolverError;

pub use history::{rate_diagnostic, DescentHistory, IterationRecord, RatePoint};
pub use schedule::{check_schedule, ScheduleReport, StepRule, StepSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    SteepestDescent,
    GradientDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnergyLogging {
    /// Log at iterations `1, 1 + every, 1 + 2·every, ...`.
    pub every: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub energy: Option<EnergyLogging>,
    /// Keep every iterate `u_1, ..., u_{N+1}` in the outcome.
    pub keep_iterates: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub iterate: NodalFunction,
    pub history: DescentHistory,
    /// `u_0, u_1, ...` when requested.
    pub iterates: Vec<NodalFunction>,
}

/// A run stopped by a solver failure; the history up to the failing
/// iteration is preserved.
#[derive(Debug, Error)]
#[error("descent aborted at iteration {iteration}: {source}")]
pub struct RunAborted {
    pub iteration: usize,
    pub history: DescentHistory,
    pub iterate: NodalFunction,
    #[source]
    pub source: SolverError,
}

/// Per-iteration scenario seeds derived from a master seed.
pub fn iteration_seeds(seed: u64, iterations: usize) -> Vec<u64> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    (0..iterations).map(|_| master.next_u64()).collect()
}

/// Generator for Monte-Carlo energy scenarios, independent from the descent
/// draws of the same master seed.
pub fn energy_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

pub fn ssd_run<P: StochasticObjective>(
    problem: &P,
    u0: &NodalFunction,
    rule: &StepRule,
    iterations: usize,
    seed: u64,
    options: &RunOptions,
) -> Result<RunOutcome, RunAborted> {
    let seeds = iteration_seeds(seed, iterations);
    descend(problem, u0, rule, Method::SteepestDescent, &seeds, seed, options)
}

/// SGD in the Hilbert case `p = 2`. Other exponents are refused.
pub fn sgd_run<P: StochasticObjective>(
    problem: &P,
    u0: &NodalFunction,
    rule: &StepRule,
    iterations: usize,
    seed: u64,
    options: &RunOptions,
) -> Result<RunOutcome, RunAborted> {
    let seeds = iteration_seeds(seed, iterations);
    descend(problem, u0, rule, Method::GradientDescent, &seeds, seed, options)
}

/// Runs `method` with explicitly given per-iteration seeds; `energy_seed`
/// drives the Monte-Carlo energy stream.
pub fn descend<P: StochasticObjective>(
    problem: &P,
    u0: &NodalFunction,
    rule: &StepRule,
    method: Method,
    seeds: &[u64],
    energy_seed: u64,
    options: &RunOptions,
) -> Result<RunOutcome, RunAborted> {
    let space = problem.space();
    let settings = problem.settings();
    let mut history = DescentHistory::new();
    let mut u = u0.clone();
    let mut iterates = Vec::new();
    if options.keep_iterates {
        iterates.push(u.clone());
    }

    if method == Method::GradientDescent && !space.is_hilbert() {
        return Err(RunAborted {
            iteration: 0,
            history,
            iterate: u,
            source: SolverError::InvalidArgument(format!(
                "gradient descent needs p = 2, got p = {}",
                space.p
            )),
        });
    }

    let mut energy_stream = energy_rng(energy_seed);

    for (k, &seed) in seeds.iter().enumerate() {
        let n = k + 1;
        let step_result = (|| {
            let energy = match options.energy {
                Some(e) if e.every > 0 && k % e.every == 0 => {
                    Some(problem.mc_energy(&u, e.samples, &mut energy_stream)?.value)
                }
                _ => None,
            };
            let mut sample = problem.draw_seeded(seed);
            let derivative = problem.derivative(&u, &mut sample)?;
            let (v, dual_norm) = match method {
                Method::SteepestDescent => {
                    let d = steepest_direction(&derivative, settings)?;
                    (d.direction, d.dual_norm)
                }
                Method::GradientDescent => {
                    let g = negative_gradient(&derivative, settings)?;
                    let norm = space.norm(&g);
                    (g, norm)
                }
            };
            Ok::<_, SolverError>((energy, v, dual_norm))
        })();

        let (energy, v, dual_norm) = match step_result {
            Ok(r) => r,
            Err(source) => {
                return Err(RunAborted {
                    iteration: n,
                    history,
                    iterate: u,
                    source,
                })
            }
        };
        let t = rule.step(n, dual_norm);
        history.push(t, dual_norm, energy, space.norm(&u), seed);
        if dual_norm > 0.0 {
            u = u.add_scaled(t, &v);
        }
        if options.keep_iterates {
            iterates.push(u.clone());
        }
    }

    Ok(RunOutcome {
        iterate: u,
        history,
        iterates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::StructuredMesh;
    use crate::problems::{App1, App1Config, App2, App2Config};

    fn app1(n: usize, p: f64) -> App1 {
        let mut cfg = App1Config::new(StructuredMesh::new(n, n).unwrap());
        cfg.p = p;
        App1::new(cfg).unwrap()
    }

    #[test]
    fn single_step_moves_by_unit_direction() {
        let app = app1(8, 4.0);
        let u0 = NodalFunction::zeros(app.mesh());
        let out = ssd_run(&app, &u0, &StepSchedule::default().into(), 1, 42, &RunOptions::default()).unwrap();
        let moved = out.iterate.w1p_seminorm(4.0);
        assert!((moved - 1.0).abs() < 1e-8);
        assert_eq!(out.history.len(), 1);
        assert_eq!(out.history.records()[0].step, 1.0);
    }

    #[test]
    fn zero_iterations_is_a_valid_run() {
        let app = app1(4, 4.0);
        let u0 = NodalFunction::zeros(app.mesh());
        let out = ssd_run(&app, &u0, &StepSchedule::default().into(), 0, 1, &RunOptions::default()).unwrap();
        assert!(out.history.is_empty());
        assert_eq!(out.iterate, u0);
    }

    #[test]
    fn sgd_refuses_banach_exponent() {
        let app = app1(4, 4.0);
        let u0 = NodalFunction::zeros(app.mesh());
        let err = sgd_run(&app, &u0, &StepSchedule::default().into(), 3, 1, &RunOptions::default()).unwrap_err();
        assert_eq!(err.iteration, 0);
    }

    #[test]
    fn sgd_single_step_is_negative_gradient() {
        let app = App2::new({
            let mut c = App2Config::new(StructuredMesh::new(6, 6).unwrap());
            c.p = 2.0;
            c
        })
        .unwrap();
        let u0 = NodalFunction::zeros(app.mesh());
        let out = sgd_run(&app, &u0, &StepSchedule::default().into(), 1, 5, &RunOptions::default()).unwrap();
        let seed = out.history.records()[0].seed;
        let mut s = app.draw_seeded(seed);
        let d = app.derivative(&u0, &mut s).unwrap();
        let expected = d.density().unwrap().scaled(-1.0);
        assert!(out.iterate.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn energy_is_logged_on_cadence() {
        let app = app1(4, 4.0);
        let u0 = NodalFunction::zeros(app.mesh());
        let options = RunOptions {
            energy: Some(EnergyLogging { every: 3, samples: 2 }),
            keep_iterates: false,
        };
        let out = ssd_run(&app, &u0, &StepSchedule::default().into(), 7, 3, &options).unwrap();
        let logged: Vec<usize> = out
            .history
            .records()
            .iter()
            .filter(|r| r.energy.is_some())
            .map(|r| r.n)
            .collect();
        assert_eq!(logged, vec![1, 4, 7]);
    }

    #[test]
    fn iteration_seeds_are_deterministic() {
        assert_eq!(iteration_seeds(9, 5), iteration_seeds(9, 5));
        assert_eq!(iteration_seeds(9, 5)[..3], iteration_seeds(9, 3)[..]);
    }
}
