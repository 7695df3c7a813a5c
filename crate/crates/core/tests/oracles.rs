//! Independent reference computations for the discrete objectives and solvers.

mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use common::random_function;
use ssd_core::fem::{
    assemble_plaplace_jacobian, assemble_plaplace_residual, assemble_stiffness, solve_linear,
    solve_plaplace_dirichlet, NodalFunction, ReducedSystem, SolverSettings, StructuredMesh,
};
use ssd_core::problems::{app1_offset, App1, App1Config, App1Sample, StochasticObjective};

/// (1/4) Σ_T |T| |∇g|⁴ written out for the structured grid, gradients from
/// node differences instead of the mesh geometry.
fn grid_quartic_energy(n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let g = |i: usize, j: usize| app1_offset([i as f64 * h, j as f64 * h]);
    let mut total = 0.0;
    for j in 0..n {
        for i in 0..n {
            let (fa, fb, fc, fd) = (g(i, j), g(i + 1, j), g(i + 1, j + 1), g(i, j + 1));
            let lower = [(fb - fa) / h, (fc - fb) / h];
            let upper = [(fc - fd) / h, (fd - fa) / h];
            for gr in [lower, upper] {
                total += 0.5 * h * h * (gr[0] * gr[0] + gr[1] * gr[1]).powi(2);
            }
        }
    }
    total / 4.0
}

fn continuum_quartic_energy(m: usize) -> f64 {
    let h = 1.0 / m as f64;
    let mut total = 0.0;
    for j in 0..m {
        let y = (j as f64 + 0.5) * h;
        for i in 0..m {
            let x = (i as f64 + 0.5) * h;
            let gx = -PI * (2.0 * PI * x).sin() * (PI * y).cos().powi(2);
            let gy = -PI * (PI * x).cos().powi(2) * (2.0 * PI * y).sin();
            total += (gx * gx + gy * gy).powi(2);
        }
    }
    total * h * h / 4.0
}

#[test]
fn app1_energy_of_offset_matches_grid_formula() {
    for n in [4, 16, 33] {
        let mesh = StructuredMesh::new(n, n).unwrap();
        let app = App1::new(App1Config::new(mesh.clone())).unwrap();
        let g = NodalFunction::interpolate(&mesh, app1_offset);
        let mut s = App1Sample::forced(g);
        let value = app.value(&NodalFunction::zeros(&mesh), &mut s).unwrap();
        assert_relative_eq!(value, grid_quartic_energy(n), max_relative = 1e-12);
    }
}

#[test]
fn app1_energy_of_offset_approaches_continuum() {
    let exact = continuum_quartic_energy(2000);
    let mut errors = Vec::new();
    for n in [32, 64] {
        let mesh = StructuredMesh::new(n, n).unwrap();
        let app = App1::new(App1Config::new(mesh.clone())).unwrap();
        let mut s = App1Sample::forced(NodalFunction::interpolate(&mesh, app1_offset));
        let value = app.value(&NodalFunction::zeros(&mesh), &mut s).unwrap();
        errors.push((value - exact).abs() / exact);
    }
    assert!(errors[1] < 0.01, "{errors:?}");
    assert!(errors[1] < errors[0], "{errors:?}");
}

#[test]
fn plaplace_jacobian_matches_residual_differences() {
    let mesh = StructuredMesh::new(6, 6).unwrap();
    let w = random_function(&mesh, 3, 1.0, false);
    for p in [2.0, 3.0, 4.0] {
        let jac = assemble_plaplace_jacobian(&w, p, 0.0).unwrap();
        let dir = random_function(&mesh, 4, 1.0, false);
        let h = 1e-6;
        let rp = assemble_plaplace_residual(&w.add_scaled(h, &dir), p, 0.0).unwrap();
        let rm = assemble_plaplace_residual(&w.add_scaled(-h, &dir), p, 0.0).unwrap();
        let jd = jac.mul_vec(dir.coeffs());
        let scale = jd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, row) in jd.iter().enumerate() {
            let fd = (rp[i] - rm[i]) / (2.0 * h);
            assert!((fd - row).abs() <= 1e-6 * scale, "p={p} row {i}: {fd} vs {row}");
        }
    }
}

#[test]
fn plaplace_at_p2_is_the_linear_solve() {
    let mesh = StructuredMesh::new(12, 12).unwrap();
    let rhs = random_function(&mesh, 5, 1e-2, true).into_coeffs();
    let settings = SolverSettings::default();
    let nonlinear = solve_plaplace_dirichlet(&mesh, &rhs, 2.0, &settings).unwrap();
    let stiffness = assemble_stiffness(&mesh, None);
    let linear = ReducedSystem::new(&stiffness, &rhs, mesh.boundary_mask())
        .solve(&settings)
        .unwrap();
    let gap = nonlinear
        .coeffs()
        .iter()
        .zip(&linear)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(gap < 1e-9 * (1.0 + nonlinear.max_abs()), "gap {gap}");
}

#[test]
fn plaplace_solution_satisfies_the_weak_equation() {
    let mesh = StructuredMesh::new(10, 10).unwrap();
    let mut rhs = random_function(&mesh, 6, 1e-2, true).into_coeffs();
    for p in [3.0, 4.0] {
        let w = solve_plaplace_dirichlet(&mesh, &rhs, p, &SolverSettings::default()).unwrap();
        let res = assemble_plaplace_residual(&w, p, 0.0).unwrap();
        for i in mesh.interior_nodes() {
            assert!((res[i] - rhs[i]).abs() < 1e-8, "p={p} node {i}");
        }
        rhs.iter_mut().for_each(|v| *v *= 2.0);
    }
}

#[test]
fn stiffness_solve_of_constant_load_is_symmetric() {
    let mesh = StructuredMesh::new(8, 8).unwrap();
    let a = assemble_stiffness(&mesh, None);
    let b: Vec<f64> = mesh.boundary_mask().iter().map(|&bd| if bd { 0.0 } else { 1.0 }).collect();
    let x = ReducedSystem::new(&a, &b, mesh.boundary_mask()).solve(&SolverSettings::default()).unwrap();
    let n = 9;
    // reflection across the anti-diagonal maps the mesh onto itself
    for j in 0..n {
        for i in 0..n {
            assert_relative_eq!(x[i + j * n], x[j + i * n], epsilon = 1e-10);
        }
    }
    let full = solve_linear(&ssd_core::fem::SparseOperator::identity(3), &[1.0, 2.0, 3.0], &SolverSettings::default()).unwrap();
    assert_eq!(full, vec![1.0, 2.0, 3.0]);
}
