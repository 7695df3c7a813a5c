#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssd_core::fem::{NodalFunction, StructuredMesh};

/// Uniform random nodal values in `[-amp, amp]`, zero on the boundary when
/// `interior_only`.
pub fn random_function(mesh: &Arc<StructuredMesh>, seed: u64, amp: f64, interior_only: bool) -> NodalFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = mesh
        .boundary_mask()
        .iter()
        .map(|&b| {
            let v = rng.random_range(-amp..amp);
            if interior_only && b {
                0.0
            } else {
                v
            }
        })
        .collect();
    NodalFunction::new(mesh.clone(), coeffs).unwrap()
}

/// Prints one criterion line and fails the test when it did not pass.
pub fn report(name: &str, passed: bool, detail: impl std::fmt::Display) {
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("[{tag}] {name}: {detail}");
    assert!(passed, "{name} failed: {detail}");
}
