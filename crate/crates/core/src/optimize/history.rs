use serde::{Deserialize, Serialize};

/// One iteration of a descent run, recorded before the update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    /// Step length used for `u_{n+1} = u_n + t_n v_n`.
    pub step: f64,
    /// Sampled dual norm `‖j_u(ξ_n, u_n)‖_{X*}` (SGD: `‖v_n‖_H`).
    pub dual_norm: f64,
    pub running_min: f64,
    pub cumulative_step: f64,
    /// Monte-Carlo energy at `u_n`, when logged.
    pub energy: Option<f64>,
    /// `‖u_n‖_X`.
    pub iterate_norm: f64,
    pub seed: u64,
}

impl IterationRecord {
    pub fn rate_product(&self) -> f64 {
        self.running_min * self.cumulative_step
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DescentHistory {
    records: Vec<IterationRecord>,
}

impl DescentHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends iteration data, maintaining the running minimum and the
    /// cumulative step sum.
    pub fn push(&mut self, step: f64, dual_norm: f64, energy: Option<f64>, iterate_norm: f64, seed: u64) {
        let (running_min, cumulative_step) = match self.records.last() {
            Some(r) => (r.running_min.min(dual_norm), r.cumulative_step + step),
            None => (dual_norm, step),
        };
        self.records.push(IterationRecord {
            n: self.records.len() + 1,
            step,
            dual_norm,
            running_min,
            cumulative_step,
            energy,
            iterate_norm,
            seed,
        });
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.seed).collect()
    }

    /// Largest observed `‖u_n‖_X`, monitoring the boundedness assumption.
    pub fn max_iterate_norm(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.iterate_norm))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub j: usize,
    pub cumulative_step: f64,
    pub running_min: f64,
    /// `min_{n≤j} ‖·‖ · Σ_{n≤j} t_n`; bounded when the rate holds.
    pub product: f64,
    /// Reference curve `(Σ_{n≤j} t_n)^{-1}`.
    pub reference: f64,
}

pub fn rate_diagnostic(history: &DescentHistory) -> Vec<RatePoint> {
    history
        .records()
        .iter()
        .map(|r| RatePoint {
            j: r.n,
            cumulative_step: r.cumulative_step,
            running_min: r.running_min,
            product: r.rate_product(),
            reference: 1.0 / r.cumulative_step,
        })
        .collect()
}
