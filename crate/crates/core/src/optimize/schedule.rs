use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Step sizes `t_n = t₀ n^{-γ}`, `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub t0: f64,
    pub gamma: f64,
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self { t0: 1.0, gamma: 1.0 }
    }
}

impl StepSchedule {
    pub fn new(t0: f64, gamma: f64) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::InvalidArgument(format!("t0 must be positive, got {t0}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be non-negative, got {gamma}")));
        }
        Ok(Self { t0, gamma })
    }

    pub fn step(&self, n: usize) -> f64 {
        assert!(n >= 1, "steps are indexed from 1");
        self.t0 * (n as f64).powf(-self.gamma)
    }
}

/// How the step length of iteration `n` is chosen.
#[derive(Debug, Clone, Copy)]
pub enum StepRule {
    Schedule(StepSchedule),
    /// `S_n = ‖j_u(ξ_n, u_n)‖_{X*} t_n`.
    DualNormScaled(StepSchedule),
    /// Arbitrary positive steps, e.g. geometric sequences in tests.
    Custom(fn(usize) -> f64),
}

impl From<StepSchedule> for StepRule {
    fn from(s: StepSchedule) -> Self {
        StepRule::Schedule(s)
    }
}

impl StepRule {
    pub fn base(&self, n: usize) -> f64 {
        match self {
            StepRule::Schedule(s) | StepRule::DualNormScaled(s) => s.step(n),
            StepRule::Custom(f) => f(n),
        }
    }

    pub fn step(&self, n: usize, dual_norm: f64) -> f64 {
        match self {
            StepRule::DualNormScaled(s) => dual_norm * s.step(n),
            _ => self.base(n),
        }
    }
}

/// Partial sums of `t_j / Σ_{n≤j} t_n`, whose divergence is required for
/// the `O((Σ t_n)^{-1})` rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    pub partial_sums: Vec<f64>,
    /// Increment of the partial sums over `(J/2, J]` divided by the
    /// increment of `log log` over the same range.
    pub growth_ratio: f64,
    pub divergent: bool,
}

/// A schedule is flagged divergent when its late partial sums keep growing
/// at least half as fast as `log log J`, the growth produced by `t_n = 1/n`.
pub fn check_schedule(rule: &StepRule, horizon: usize) -> Result<ScheduleReport> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let mut cumulative = 0.0;
    let mut total = 0.0;
    let partial_sums: Vec<f64> = (1..=horizon)
        .map(|j| {
            let t = rule.base(j);
            cumulative += t;
            total += t / cumulative;
            total
        })
        .collect();

    let half = (horizon / 2).max(1);
    let growth_ratio = if horizon >= 16 {
        let increment = partial_sums[horizon - 1] - partial_sums[half - 1];
        let reference = (horizon as f64).ln().ln() - (half as f64).ln().ln();
        increment / reference
    } else {
        f64::NAN
    };
    Ok(ScheduleReport {
        partial_sums,
        growth_ratio,
        divergent: growth_ratio >= 0.5,
    })
}
