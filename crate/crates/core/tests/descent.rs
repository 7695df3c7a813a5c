mod common;

use std::sync::Arc;

use common::random_function;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssd_core::duality::{steepest_direction, DualVector, SpaceDescriptor};
use ssd_core::fem::{NodalFunction, SolverSettings, StructuredMesh};
use ssd_core::optimize::{
    descend, iteration_seeds, ssd_run, EnergyLogging, Method, RunOptions, StepRule, StepSchedule,
};
use ssd_core::problems::{App1, App1Config, App1Sample, App2, App2Config, StochasticObjective};

fn app1(n: usize) -> App1 {
    App1::new(App1Config::new(StructuredMesh::new(n, n).unwrap())).unwrap()
}

#[test]
fn runs_replay_bit_for_bit() {
    let app = app1(10);
    let u0 = NodalFunction::zeros(app.mesh());
    let rule: StepRule = StepSchedule::default().into();
    let options = RunOptions {
        energy: Some(EnergyLogging { every: 5, samples: 3 }),
        keep_iterates: false,
    };
    let a = ssd_run(&app, &u0, &rule, 20, 9, &options).unwrap();
    let b = ssd_run(&app, &u0, &rule, 20, 9, &options).unwrap();
    assert_eq!(a.history.records(), b.history.records());
    assert_eq!(a.iterate, b.iterate);

    // the recorded seeds alone reproduce the trajectory
    let replay = descend(&app, &u0, &rule, Method::SteepestDescent, &a.history.seeds(), 9, &options).unwrap();
    assert_eq!(replay.iterate, a.iterate);

    let other = ssd_run(&app, &u0, &rule, 20, 10, &options).unwrap();
    assert_ne!(other.iterate, a.iterate);
}

#[test]
fn each_step_decreases_its_own_sample() {
    let app = app1(12);
    let u0 = NodalFunction::zeros(app.mesh());
    let rule: StepRule = StepSchedule::default().into();
    let seeds = iteration_seeds(3, 10);
    let options = RunOptions {
        energy: None,
        keep_iterates: true,
    };
    let out = descend(&app, &u0, &rule, Method::SteepestDescent, &seeds, 3, &options).unwrap();
    for (k, rec) in out.history.records().iter().enumerate() {
        let u = &out.iterates[k];
        let v = out.iterates[k + 1].add_scaled(-1.0, u).scaled(1.0 / rec.step);
        let mut s = app.draw_seeded(seeds[k]);
        let before = app.value(u, &mut s).unwrap();
        let after = app.value(&u.add_scaled(1e-4 * rec.step, &v), &mut s).unwrap();
        assert!(after < before, "iteration {}: {after} >= {before}", k + 1);
        assert!((app.space().norm(&v) - 1.0).abs() < 1e-8);
        assert!((rec.iterate_norm - app.space().norm(u)).abs() < 1e-12);
    }
}

/// Deterministic objective: App1 with one fixed offset.
struct Frozen {
    inner: App1,
    g: NodalFunction,
}

impl StochasticObjective for Frozen {
    type Sample = App1Sample;

    fn mesh(&self) -> &Arc<StructuredMesh> {
        self.inner.mesh()
    }

    fn space(&self) -> SpaceDescriptor {
        self.inner.space()
    }

    fn settings(&self) -> &SolverSettings {
        self.inner.settings()
    }

    fn draw(&self, _rng: &mut dyn RngCore) -> App1Sample {
        App1Sample::forced(self.g.clone())
    }

    fn value(&self, u: &NodalFunction, s: &mut App1Sample) -> ssd_core::Result<f64> {
        self.inner.value(u, s)
    }

    fn derivative(&self, u: &NodalFunction, s: &mut App1Sample) -> ssd_core::Result<DualVector> {
        self.inner.derivative(u, s)
    }
}

#[test]
fn stationary_start_does_not_move() {
    let inner = app1(8);
    let g = random_function(inner.mesh(), 42, 1.0, true);
    let u0 = g.scaled(-1.0);
    let problem = Frozen { inner, g };
    let out = ssd_run(&problem, &u0, &StepSchedule::default().into(), 5, 1, &RunOptions::default()).unwrap();
    assert_eq!(out.iterate, u0);
    for rec in out.history.records() {
        assert_eq!(rec.dual_norm, 0.0);
        assert_eq!(rec.running_min, 0.0);
    }
}

#[test]
fn mc_energy_seeds_replay_the_estimate() {
    let app = app1(8);
    let u = random_function(app.mesh(), 1, 0.3, true);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let est = app.mc_energy(&u, 7, &mut rng).unwrap();
    assert_eq!(est.seeds.len(), 7);
    assert_eq!(app.energy_from_seeds(&u, &est.seeds).unwrap(), est.value);

    let app2 = App2::new(App2Config::new(StructuredMesh::new(8, 8).unwrap())).unwrap();
    let u = random_function(app2.mesh(), 2, 1.0, false);
    let est = app2.mc_energy(&u, 4, &mut rng).unwrap();
    assert_eq!(app2.energy_from_seeds(&u, &est.seeds).unwrap(), est.value);
}

#[test]
fn zero_control_energy_is_the_average_misfit() {
    let app = App2::new(App2Config::new(StructuredMesh::new(10, 10).unwrap())).unwrap();
    let u = NodalFunction::zeros(app.mesh());
    let seeds = [1u64, 2, 3, 4];
    let mut misfit = 0.0;
    for &s in &seeds {
        let mut sample = app.draw_seeded(s);
        let y = app.state(&u, &mut sample).unwrap();
        misfit += app.misfit(&y);
    }
    let e = app.energy_from_seeds(&u, &seeds).unwrap();
    assert!((e - misfit / 4.0).abs() <= 1e-14 * e.abs());
    assert!(e > 0.0);
}

#[test]
fn reachable_target_gives_a_zero_first_step() {
    let mesh = StructuredMesh::new(10, 10).unwrap();
    let u0 = NodalFunction::zeros(&mesh);
    let seed = 8;
    let first = iteration_seeds(seed, 1)[0];
    let probe = App2::new(App2Config::new(mesh.clone())).unwrap();
    let y = probe.state(&u0, &mut probe.draw_seeded(first)).unwrap();

    let mut cfg = App2Config::new(mesh);
    cfg.target = y;
    let app = App2::new(cfg).unwrap();
    assert!(app.value(&u0, &mut app.draw_seeded(first)).unwrap().abs() < 1e-20);
    let out = ssd_run(&app, &u0, &StepSchedule::default().into(), 1, seed, &RunOptions::default()).unwrap();
    let rec = &out.history.records()[0];
    assert_eq!(rec.dual_norm, 0.0);
    assert_eq!(out.iterate, u0);
}

#[test]
fn steepest_direction_is_a_descent_direction_for_random_samples() {
    let app = App2::new(App2Config::new(StructuredMesh::new(8, 8).unwrap())).unwrap();
    let u = random_function(app.mesh(), 9, 1.0, false);
    for seed in 0..5 {
        let mut s = app.draw_seeded(seed);
        let d = app.derivative(&u, &mut s).unwrap();
        let dir = steepest_direction(&d, app.settings()).unwrap();
        let base = app.value(&u, &mut s).unwrap();
        let moved = app.value(&u.add_scaled(1e-5, &dir.direction), &mut s).unwrap();
        assert!(moved < base);
    }
}
