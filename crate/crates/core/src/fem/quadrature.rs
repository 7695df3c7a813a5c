use super::function::NodalFunction;
use super::mesh::StructuredMesh;

/// Six-point symmetric rule on the reference triangle, exact for total
/// degree 4. Entries are `(barycentric coordinates, weight)`, with weights
/// summing to one (multiply by triangle area).
pub const QUADRATURE: [([f64; 3], f64); 6] = {
    const A1: f64 = 0.445_948_490_915_965;
    const B1: f64 = 1.0 - 2.0 * A1;
    const W1: f64 = 0.223_381_589_678_011;
    const A2: f64 = 0.091_576_213_509_771;
    const B2: f64 = 1.0 - 2.0 * A2;
    const W2: f64 = 0.109_951_743_655_322;
    [
        ([A1, A1, B1], W1),
        ([A1, B1, A1], W1),
        ([B1, A1, A1], W1),
        ([A2, A2, B2], W2),
        ([A2, B2, A2], W2),
        ([B2, A2, A2], W2),
    ]
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    Value,
    Gradient,
}

/// Physical coordinates of barycentric point `bary` in triangle `t`.
pub(crate) fn point_in(mesh: &StructuredMesh, t: usize, bary: [f64; 3]) -> [f64; 2] {
    let tri = mesh.triangles()[t];
    let mut x = [0.0; 2];
    for (k, &n) in tri.iter().enumerate() {
        x[0] += bary[k] * mesh.nodes()[n][0];
        x[1] += bary[k] * mesh.nodes()[n][1];
    }
    x
}

/// `∫_U f` where `f(t, bary, x)` is evaluated at each quadrature point.
pub fn integrate(mesh: &StructuredMesh, f: impl Fn(usize, [f64; 3], [f64; 2]) -> f64) -> f64 {
    mesh.geometry()
        .iter()
        .enumerate()
        .map(|(t, geo)| {
            geo.area
                * QUADRATURE
                    .iter()
                    .map(|&(bary, w)| w * f(t, bary, point_in(mesh, t, bary)))
                    .sum::<f64>()
        })
        .sum()
}

/// `∫ |f|^p` or `∫ |∇f|^p`. The gradient form is exact for P1 functions.
pub fn integrate_power(f: &NodalFunction, p: f64, mode: PowerMode) -> f64 {
    let mesh = f.mesh();
    match mode {
        PowerMode::Gradient => mesh
            .geometry()
            .iter()
            .enumerate()
            .map(|(t, geo)| {
                let g = f.element_gradient(t);
                geo.area * (g[0] * g[0] + g[1] * g[1]).powf(0.5 * p)
            })
            .sum(),
        PowerMode::Value => integrate(mesh, |t, bary, _| f.value_in(t, bary).abs().powf(p)),
    }
}

/// `(∫ |∇f - ∇f*|^2)^{1/2}` against an exact gradient field.
pub fn h1_seminorm_error(f: &NodalFunction, exact_grad: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
    let mesh = f.mesh();
    integrate(mesh, |t, _, x| {
        let g = f.element_gradient(t);
        let e = exact_grad(x);
        (g[0] - e[0]).powi(2) + (g[1] - e[1]).powi(2)
    })
    .sqrt()
}
