//! Truncated Karhunen-Loève expansion of a Gaussian field on `(0,1)^2` with
//! covariance `(-Δ + τ²)^{-α}` under homogeneous Neumann conditions.
//!
//! The eigenfunctions are tensor-product cosines
//! `φ_k(x) = c_{k1} cos(k1 π x1) · c_{k2} cos(k2 π x2)` with `c_0 = 1` and
//! `c_m = √2` otherwise, which is orthonormal in `L²(U)`. The eigenvalues are
//! `λ_k = (|k|² π² + τ²)^{-α}`. Indices run over `0 ≤ k1, k2 ≤ kmax`.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::fem::{NodalFunction, StructuredMesh};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KleSpec {
    tau: f64,
    alpha: f64,
    kmax: usize,
}

impl KleSpec {
    /// `tau > 0` is the inverse lengthscale, `alpha > 1` the regularity.
    pub fn new(tau: f64, alpha: f64, kmax: usize) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must exceed 1, got {alpha}")));
        }
        Ok(Self { tau, alpha, kmax })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn num_modes(&self) -> usize {
        (self.kmax + 1) * (self.kmax + 1)
    }

    /// Multi-indices in storage order (`k2` major).
    pub fn modes(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        (0..=self.kmax).flat_map(move |k2| (0..=self.kmax).map(move |k1| [k1, k2]))
    }

    pub fn eigenvalue(&self, k: [usize; 2]) -> f64 {
        let k_sq = (k[0] * k[0] + k[1] * k[1]) as f64;
        (k_sq * PI * PI + self.tau * self.tau).powf(-self.alpha)
    }

    pub fn eigenfunction(&self, k: [usize; 2], x: [f64; 2]) -> f64 {
        cosine_mode(k[0], x[0]) * cosine_mode(k[1], x[1])
    }

    /// `(λ_k, φ_k)` for one multi-index.
    pub fn eigenpair(&self, k: [usize; 2]) -> Result<(f64, impl Fn([f64; 2]) -> f64 + '_)> {
        if k[0] > self.kmax || k[1] > self.kmax {
            return Err(Error::InvalidArgument(format!(
                "mode {k:?} exceeds cutoff {}",
                self.kmax
            )));
        }
        Ok((self.eigenvalue(k), move |x| self.eigenfunction(k, x)))
    }

    /// Pointwise variance of the truncated field, `Σ λ_k φ_k(x)²`.
    pub fn variance_at(&self, x: [f64; 2]) -> f64 {
        self.modes()
            .map(|k| self.eigenvalue(k) * self.eigenfunction(k, x).powi(2))
            .sum()
    }

    fn sqrt_eigenvalues(&self) -> Vec<f64> {
        self.modes().map(|k| self.eigenvalue(k).sqrt()).collect()
    }
}

fn cosine_mode(m: usize, t: f64) -> f64 {
    if m == 0 {
        1.0
    } else {
        SQRT_2 * (m as f64 * PI * t).cos()
    }
}

/// One draw of the i.i.d. standard normal coefficients `ξ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDraw {
    pub kle: KleSpec,
    /// One coefficient per mode, in [`KleSpec::modes`] order.
    pub coefficients: Vec<f64>,
    /// Seed of the generator that produced the draw, when known.
    pub seed: Option<u64>,
}

impl FieldDraw {
    pub fn draw<R: Rng + ?Sized>(kle: &KleSpec, rng: &mut R) -> Self {
        Self {
            kle: *kle,
            coefficients: (0..kle.num_modes()).map(|_| rng.sample(StandardNormal)).collect(),
            seed: None,
        }
    }

    pub fn from_seed(kle: &KleSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            seed: Some(seed),
            ..Self::draw(kle, &mut rng)
        }
    }

    /// A draw with prescribed coefficients.
    pub fn forced(kle: &KleSpec, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != kle.num_modes() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                kle.num_modes(),
                coefficients.len()
            )));
        }
        Ok(Self {
            kle: *kle,
            coefficients,
            seed: None,
        })
    }

    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        let n = self.kle.kmax + 1;
        let c1: Vec<f64> = (0..n).map(|m| cosine_mode(m, x[0])).collect();
        let c2: Vec<f64> = (0..n).map(|m| cosine_mode(m, x[1])).collect();
        self.kle
            .sqrt_eigenvalues()
            .iter()
            .zip(&self.coefficients)
            .enumerate()
            .map(|(idx, (s, xi))| s * xi * c1[idx % n] * c2[idx / n])
            .sum()
    }

    /// Nodal interpolation of the truncated series.
    pub fn to_nodal(&self, mesh: &Arc<StructuredMesh>) -> NodalFunction {
        let n = self.kle.kmax + 1;
        let weights: Vec<f64> = self
            .kle
            .sqrt_eigenvalues()
            .iter()
            .zip(&self.coefficients)
            .map(|(s, xi)| s * xi)
            .collect();
        NodalFunction::interpolate(mesh, |x| {
            let c1: Vec<f64> = (0..n).map(|m| cosine_mode(m, x[0])).collect();
            // Σ_{k2} c(k2, x2) Σ_{k1} w_{k1,k2} c(k1, x1)
            (0..n)
                .map(|k2| {
                    let inner: f64 = (0..n).map(|k1| weights[k1 + k2 * n] * c1[k1]).sum();
                    inner * cosine_mode(k2, x[1])
                })
                .sum()
        })
    }
}

/// Draws coefficients from `rng` and interpolates the field onto `mesh`.
pub fn sample<R: Rng + ?Sized>(
    kle: &KleSpec,
    mesh: &Arc<StructuredMesh>,
    rng: &mut R,
) -> (FieldDraw, NodalFunction) {
    let draw = FieldDraw::draw(kle, rng);
    let field = draw.to_nodal(mesh);
    (draw, field)
}
