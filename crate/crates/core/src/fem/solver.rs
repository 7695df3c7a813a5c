use serde::{Deserialize, Serialize};

use super::assembly::{assemble_plaplace_jacobian, assemble_plaplace_residual, assemble_stiffness};
use super::function::NodalFunction;
use super::sparse::SparseOperator;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Relative residual target of the conjugate gradient solver.
    pub linear_tol: f64,
    pub max_linear_iterations: usize,
    /// Absolute Euclidean norm of the Newton residual.
    pub newton_tol: f64,
    pub max_newton_iterations: usize,
    /// Smallest backtracking factor tried before giving up.
    pub damping_floor: f64,
    /// Gradient regularization used in p-Laplace Jacobians.
    pub epsilon: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            linear_tol: 1e-10,
            max_linear_iterations: 20_000,
            newton_tol: 1e-9,
            max_newton_iterations: 50,
            damping_floor: 2f64.powi(-30),
            epsilon: 1e-8,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.linear_tol > 0.0 && self.newton_tol > 0.0) {
            return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
        }
        if self.max_newton_iterations == 0 || self.max_linear_iterations == 0 {
            return Err(Error::InvalidArgument("iteration caps must be at least 1".into()));
        }
        if !(self.damping_floor > 0.0 && self.damping_floor <= 1.0) {
            return Err(Error::InvalidArgument("damping floor must lie in (0, 1]".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidArgument("regularization must be non-negative".into()));
        }
        Ok(())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive
/// definite `a`.
pub fn solve_linear(a: &SparseOperator, b: &[f64], settings: &SolverSettings) -> Result<Vec<f64>> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let target = settings.linear_tol * b_norm;

    for _ in 0..settings.max_linear_iterations {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let mut restart = false;
        if norm(&r) <= target {
            // the recursive residual drifts from b - Ax; restart from the true one
            r = residual(a, &x, b);
            if norm(&r) <= target {
                return Ok(x);
            }
            restart = true;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = if restart { 0.0 } else { rz_next / rz };
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = norm(&residual(a, &x, b)) / b_norm;
    if rel <= settings.linear_tol {
        Ok(x)
    } else {
        Err(Error::LinearSolve {
            iterations: settings.max_linear_iterations,
            residual: rel,
        })
    }
}

fn residual(a: &SparseOperator, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.mul_vec(x).iter().zip(b).map(|(ax, b)| b - ax).collect()
}

/// Linear system restricted to the unconstrained nodes, with the
/// constrained values pinned to zero.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: SparseOperator,
    pub rhs: Vec<f64>,
    /// Full index of each reduced unknown.
    pub free: Vec<usize>,
    full_dim: usize,
}

impl ReducedSystem {
    /// Eliminates rows and columns flagged in `constrained`.
    pub fn new(a: &SparseOperator, b: &[f64], constrained: &[bool]) -> Self {
        let free: Vec<usize> = (0..a.dim()).filter(|&i| !constrained[i]).collect();
        let matrix = reduce_matrix(a, constrained, &free);
        let rhs = free.iter().map(|&i| b[i]).collect();
        Self {
            matrix,
            rhs,
            free,
            full_dim: a.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Scatters a reduced vector back to full length, zero on constrained nodes.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.full_dim];
        for (&i, &v) in self.free.iter().zip(reduced) {
            full[i] = v;
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }

    pub fn solve(&self, settings: &SolverSettings) -> Result<Vec<f64>> {
        let x = solve_linear(&self.matrix, &self.rhs, settings)?;
        Ok(self.expand(&x))
    }
}

fn reduce_matrix(a: &SparseOperator, constrained: &[bool], free: &[usize]) -> SparseOperator {
    let mut map = vec![usize::MAX; a.dim()];
    for (k, &i) in free.iter().enumerate() {
        map[i] = k;
    }
    let mut row_ptr = vec![0];
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    for &i in free {
        for k in a.row_ptr()[i]..a.row_ptr()[i + 1] {
            let j = a.col_idx()[k];
            if !constrained[j] {
                col_idx.push(map[j]);
                values.push(a.values()[k]);
            }
        }
        row_ptr.push(col_idx.len());
    }
    SparseOperator::from_raw(row_ptr, col_idx, values, a.is_symmetric())
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Residual norm before each step and after the last.
    pub residual_norms: Vec<f64>,
}

/// Damped Newton iteration for `residual(x) = 0`.
///
/// Each step solves `J(x) δ = -R(x)` and halves the step length until the
/// residual norm strictly decreases, down to `settings.damping_floor`.
pub fn newton_solve<R, J>(
    mut residual: R,
    mut jacobian: J,
    x0: Vec<f64>,
    settings: &SolverSettings,
) -> Result<NewtonOutcome>
where
    R: FnMut(&[f64]) -> Result<Vec<f64>>,
    J: FnMut(&[f64]) -> Result<SparseOperator>,
{
    let mut x = x0;
    let mut r = residual(&x)?;
    let mut r_norm = norm(&r);
    let mut history = vec![r_norm];

    for iteration in 0..settings.max_newton_iterations {
        if r_norm <= settings.newton_tol {
            return Ok(NewtonOutcome {
                solution: x,
                iterations: iteration,
                residual_norms: history,
            });
        }
        let jac = jacobian(&x)?;
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = solve_linear(&jac, &neg_r, settings)?;

        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
            // an unevaluable trial point counts as no decrease
            if let Ok(trial_r) = residual(&trial) {
                let trial_norm = norm(&trial_r);
                if trial_norm < r_norm {
                    x = trial;
                    r = trial_r;
                    r_norm = trial_norm;
                    break;
                }
            }
            step *= 0.5;
            if step < settings.damping_floor {
                return Err(Error::Newton {
                    iterations: iteration + 1,
                    reason: "backtracking reached the damping floor",
                    residual_history: history,
                    iterate: x,
                });
            }
        }
        history.push(r_norm);
    }

    if r_norm <= settings.newton_tol {
        return Ok(NewtonOutcome {
            solution: x,
            iterations: settings.max_newton_iterations,
            residual_norms: history,
        });
    }
    Err(Error::Newton {
        iterations: settings.max_newton_iterations,
        reason: "iteration limit exceeded",
        residual_history: history,
        iterate: x,
    })
}

/// Solves `∫ |∇w|^{p-2} ∇w·∇η = rhs[η]` for all interior basis functions,
/// `w = 0` on the boundary. Entries of `rhs` on boundary nodes are ignored.
///
/// The Newton iteration starts from the Laplace solution rescaled to
/// minimize the p-Dirichlet energy along its ray.
pub fn solve_plaplace_dirichlet(
    mesh: &std::sync::Arc<super::mesh::StructuredMesh>,
    rhs: &[f64],
    p: f64,
    settings: &SolverSettings,
) -> Result<NodalFunction> {
    let mask = mesh.boundary_mask();
    let stiffness = assemble_stiffness(mesh, None);
    let laplace = ReducedSystem::new(&stiffness, rhs, mask);
    if norm(&laplace.rhs) == 0.0 {
        return Ok(NodalFunction::zeros(mesh));
    }
    let w_lap = NodalFunction::new(mesh.clone(), laplace.solve(settings)?)?;

    let mut start = w_lap.clone();
    if p != 2.0 {
        let b: f64 = dot(rhs, w_lap.coeffs());
        let a = super::quadrature::integrate_power(&w_lap, p, super::quadrature::PowerMode::Gradient);
        if b > 0.0 && a > 0.0 {
            start = w_lap.scaled((b / a).powf(1.0 / (p - 1.0)));
        }
    }

    let eps = settings.epsilon;
    let to_function = |reduced: &[f64]| NodalFunction::new(mesh.clone(), laplace.expand(reduced));
    let outcome = newton_solve(
        |x| {
            let w = to_function(x)?;
            let full = assemble_plaplace_residual(&w, p, 0.0)?;
            Ok(laplace
                .free
                .iter()
                .map(|&i| full[i] - rhs[i])
                .collect())
        },
        |x| {
            let w = to_function(x)?;
            let jac = assemble_plaplace_jacobian(&w, p, eps)?;
            Ok(ReducedSystem::new(&jac, rhs, mask).matrix)
        },
        laplace.restrict(start.coeffs()),
        settings,
    )?;
    to_function(&outcome.solution)
}
