use super::function::NodalFunction;
use super::mesh::StructuredMesh;
use super::quadrature::{point_in, QUADRATURE};
use super::sparse::SparseOperator;
use crate::{Error, Result};

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Consistent P1 mass matrix `∫ φ_j φ_i`.
pub fn assemble_mass(mesh: &StructuredMesh) -> SparseOperator {
    let mut m = SparseOperator::zeros(mesh.pattern(), true);
    for (tri, geo) in mesh.triangles().iter().zip(mesh.geometry()) {
        for (a, &i) in tri.iter().enumerate() {
            for (b, &j) in tri.iter().enumerate() {
                let scale = if a == b { 2.0 } else { 1.0 };
                m.add(i, j, scale * geo.area / 12.0);
            }
        }
    }
    m
}

/// `∫ D ∇φ_j · ∇φ_i` with `D` a P1 coefficient (`None` means `D ≡ 1`).
pub fn assemble_stiffness(mesh: &StructuredMesh, coefficient: Option<&NodalFunction>) -> SparseOperator {
    let mut k = SparseOperator::zeros(mesh.pattern(), true);
    for (tri, geo) in mesh.triangles().iter().zip(mesh.geometry()) {
        // ∇φ are constant, so ∫_T D is the area times the vertex mean.
        let d = coefficient.map_or(1.0, |c| tri.iter().map(|&n| c.coeffs()[n]).sum::<f64>() / 3.0);
        for (a, &i) in tri.iter().enumerate() {
            for (b, &j) in tri.iter().enumerate() {
                k.add(i, j, d * geo.area * dot(geo.grads[a], geo.grads[b]));
            }
        }
    }
    k
}

/// `η ↦ ∫ (|∇w|² + ε²)^{(p-2)/2} ∇w · ∇η` evaluated on every basis function.
pub fn assemble_plaplace_residual(w: &NodalFunction, p: f64, eps: f64) -> Result<Vec<f64>> {
    let mesh = w.mesh();
    let mut r = vec![0.0; mesh.num_nodes()];
    for (t, (tri, geo)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        let g = w.element_gradient(t);
        let weight = flux_weight(dot(g, g), p, eps);
        for (a, &i) in tri.iter().enumerate() {
            r[i] += geo.area * weight * dot(g, geo.grads[a]);
        }
    }
    check_finite(&r, "p-Laplace residual")?;
    Ok(r)
}

/// Linearization of [`assemble_plaplace_residual`] at `w`:
/// `∫ s^{(p-2)/2} ∇δ·∇η + (p-2) s^{(p-4)/2} (∇w·∇δ)(∇w·∇η)`, `s = |∇w|² + ε²`.
pub fn assemble_plaplace_jacobian(w: &NodalFunction, p: f64, eps: f64) -> Result<SparseOperator> {
    let mesh = w.mesh();
    let mut jac = SparseOperator::zeros(mesh.pattern(), true);
    for (t, (tri, geo)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        let g = w.element_gradient(t);
        let s = dot(g, g) + eps * eps;
        let iso = flux_weight(dot(g, g), p, eps);
        let aniso = if p == 2.0 { 0.0 } else { (p - 2.0) * s.powf(0.5 * (p - 4.0)) };
        for (a, &i) in tri.iter().enumerate() {
            let gi = dot(g, geo.grads[a]);
            for (b, &j) in tri.iter().enumerate() {
                let gj = dot(g, geo.grads[b]);
                let v = iso * dot(geo.grads[a], geo.grads[b]) + aniso * gi * gj;
                jac.add(i, j, geo.area * v);
            }
        }
    }
    check_finite(jac.values(), "p-Laplace jacobian")?;
    Ok(jac)
}

fn flux_weight(grad_sq: f64, p: f64, eps: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else {
        (grad_sq + eps * eps).powf(0.5 * (p - 2.0))
    }
}

/// `η ↦ ∫ (y + y⁵) η` by quadrature.
pub fn assemble_reaction_residual(y: &NodalFunction) -> Result<Vec<f64>> {
    let mesh = y.mesh();
    let mut r = vec![0.0; mesh.num_nodes()];
    for (t, (tri, geo)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        for &(bary, w) in &QUADRATURE {
            let v = y.value_in(t, bary);
            let f = v + v.powi(5);
            for (a, &i) in tri.iter().enumerate() {
                r[i] += geo.area * w * f * bary[a];
            }
        }
    }
    check_finite(&r, "reaction residual")?;
    Ok(r)
}

/// `∫ (1 + 5y⁴) φ_j φ_i` by the same quadrature as the residual.
pub fn assemble_reaction_jacobian(y: &NodalFunction) -> Result<SparseOperator> {
    let mesh = y.mesh();
    let mut jac = SparseOperator::zeros(mesh.pattern(), true);
    for (t, (tri, geo)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        for &(bary, w) in &QUADRATURE {
            let v = y.value_in(t, bary);
            let c = geo.area * w * (1.0 + 5.0 * v.powi(4));
            for (a, &i) in tri.iter().enumerate() {
                for (b, &j) in tri.iter().enumerate() {
                    jac.add(i, j, c * bary[a] * bary[b]);
                }
            }
        }
    }
    check_finite(jac.values(), "reaction jacobian")?;
    Ok(jac)
}

/// `∫ f φ_i` for a pointwise source, by quadrature.
pub fn assemble_load(mesh: &StructuredMesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let mut b = vec![0.0; mesh.num_nodes()];
    for (t, (tri, geo)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        for &(bary, w) in &QUADRATURE {
            let v = f(point_in(mesh, t, bary));
            for (a, &i) in tri.iter().enumerate() {
                b[i] += geo.area * w * v * bary[a];
            }
        }
    }
    b
}

/// Nodal-quadrature load `m_i f_i`.
pub fn assemble_lumped_load(f: &NodalFunction) -> Vec<f64> {
    f.mesh()
        .lumped_mass()
        .iter()
        .zip(f.coeffs())
        .map(|(m, v)| m * v)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_function(mesh: &std::sync::Arc<StructuredMesh>, seed: u64) -> NodalFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        NodalFunction::new(
            mesh.clone(),
            (0..mesh.num_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn mass_matrix_integrates_products() {
        let mesh = StructuredMesh::new(5, 4).unwrap();
        let m = assemble_mass(&mesh);
        let x = NodalFunction::interpolate(&mesh, |x| x[0]);
        let mx = m.mul_vec(x.coeffs());
        let xtmx: f64 = mx.iter().zip(x.coeffs()).map(|(a, b)| a * b).sum();
        assert!((xtmx - 1.0 / 3.0).abs() < 1e-14);
        let total: f64 = m.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_function_gives_zero_residual() {
        let mesh = StructuredMesh::new(4, 4).unwrap();
        let w = NodalFunction::zeros(&mesh);
        for p in [2.0, 3.0, 4.0] {
            assert!(assemble_plaplace_residual(&w, p, 0.0).unwrap().iter().all(|&r| r == 0.0));
        }
    }

    #[test]
    fn p2_residual_is_stiffness_action() {
        let mesh = StructuredMesh::new(6, 6).unwrap();
        let k = assemble_stiffness(&mesh, None);
        for seed in 0..5 {
            let w = random_function(&mesh, seed);
            let r = assemble_plaplace_residual(&w, 2.0, 0.0).unwrap();
            let kw = k.mul_vec(w.coeffs());
            let diff = r.iter().zip(&kw).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(diff <= 1e-12);
        }
    }

    #[test]
    fn p4_residual_of_unit_slope_matches_stiffness() {
        let mesh = StructuredMesh::new(6, 6).unwrap();
        let w = NodalFunction::interpolate(&mesh, |x| x[0]);
        let r = assemble_plaplace_residual(&w, 4.0, 0.0).unwrap();
        let kw = assemble_stiffness(&mesh, None).mul_vec(w.coeffs());
        for (a, b) in r.iter().zip(&kw) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mesh = StructuredMesh::new(5, 5).unwrap();
        let eps = 1e-8;
        let h = 1e-6;
        for p in [2.0, 4.0] {
            for seed in 0..3 {
                let w = random_function(&mesh, seed);
                let d = random_function(&mesh, 100 + seed);
                let jd = assemble_plaplace_jacobian(&w, p, eps).unwrap().mul_vec(d.coeffs());
                let rp = assemble_plaplace_residual(&w.add_scaled(h, &d), p, eps).unwrap();
                let rm = assemble_plaplace_residual(&w.add_scaled(-h, &d), p, eps).unwrap();
                let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
                let num: f64 = fd.iter().zip(&jd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let den: f64 = jd.iter().map(|a| a * a).sum::<f64>().sqrt();
                assert!(num / den <= 1e-5, "p={p}: {}", num / den);
            }
        }
    }

    #[test]
    fn reaction_jacobian_matches_finite_differences() {
        let mesh = StructuredMesh::new(4, 4).unwrap();
        let y = random_function(&mesh, 7);
        let d = random_function(&mesh, 8);
        let h = 1e-6;
        let jd = assemble_reaction_jacobian(&y).unwrap().mul_vec(d.coeffs());
        let rp = assemble_reaction_residual(&y.add_scaled(h, &d)).unwrap();
        let rm = assemble_reaction_residual(&y.add_scaled(-h, &d)).unwrap();
        for ((a, b), j) in rp.iter().zip(&rm).zip(&jd) {
            assert!(((a - b) / (2.0 * h) - j).abs() < 1e-8);
        }
    }

    #[test]
    fn lumped_load_of_constant_equals_consistent_load() {
        let mesh = StructuredMesh::new(3, 3).unwrap();
        let c = NodalFunction::constant(&mesh, 2.0);
        let a = assemble_lumped_load(&c);
        let b = assemble_load(&mesh, |_| 2.0);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
