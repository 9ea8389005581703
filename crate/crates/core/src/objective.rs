//! Period quantization and the base-period objective `F(L) = F₁(L) + F₂(L)`.
//!
//! For a base period `L` every period is rounded down to a multiple of `L`
//! (`T′ᵢ = ⌊Tᵢ/L⌋·L`). `F₁` is the utilization growth caused by that rounding
//! and `F₂ = M·p/L` the amortized switching cost. A candidate is feasible when
//! the quantized utilization stays within one and `F < 1`.

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, int, Rational};
use crate::task::{Task, TaskSet, Time};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObjectiveError {
    #[error("base period {base} exceeds period {period}")]
    BasePeriodExceedsPeriod { base: Time, period: Time },
    #[error("base period {base} outside [1, {max}]")]
    BasePeriodOutOfRange { base: Time, max: Time },
}

/// Everything the objective says about one candidate base period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub base_period: Time,
    pub quantized_periods: Vec<Time>,
    /// `kᵢ = T′ᵢ / L`.
    pub blocks: Vec<Time>,
    #[serde(with = "rational::exact")]
    pub f1: Rational,
    #[serde(with = "rational::exact")]
    pub f2: Rational,
    #[serde(with = "rational::exact")]
    pub f: Rational,
    #[serde(with = "rational::exact")]
    pub quantized_utilization: Rational,
    pub feasible: bool,
    /// `U′ + M·p/L ≤ 1`. Informational only; not part of `feasible`.
    pub within_total_demand: bool,
}

/// `⌊period/base⌋·base`.
pub fn quantize_period(period: Time, base: Time) -> Result<Time, ObjectiveError> {
    if base == 0 || base > period {
        return Err(ObjectiveError::BasePeriodExceedsPeriod { base, period });
    }
    Ok(period / base * base)
}

fn quantized(t: &Task, base: Time) -> Time {
    t.period / base * base
}

/// Per-task growth term `τ/T′ − τ/T`.
pub fn growth_term(t: &Task, base: Time) -> Rational {
    let q = quantized(t, base);
    // τ(T − T′) / (T·T′)
    Rational::new(
        (t.wcet * (t.period - q)).into(),
        (u128::from(t.period) * u128::from(q)).into(),
    )
}

/// `F₁(L) = Σ (τᵢ/T′ᵢ − τᵢ/Tᵢ)`.
pub fn utilization_growth(set: &TaskSet, base: Time) -> Rational {
    set.tasks().iter().map(|t| growth_term(t, base)).sum()
}

/// `F₂(L) = M·p/L`.
pub fn switch_overhead(set: &TaskSet, base: Time) -> Rational {
    set.overhead() * int(set.len() as u64) / int(base)
}

/// Full breakdown of `F(L)` for `L ∈ [1, T₁]`.
pub fn objective(set: &TaskSet, base: Time) -> Result<ObjectiveBreakdown, ObjectiveError> {
    let max = set.min_period();
    if base == 0 || base > max {
        return Err(ObjectiveError::BasePeriodOutOfRange { base, max });
    }
    let quantized_periods: Vec<Time> = set.tasks().iter().map(|t| quantized(t, base)).collect();
    let blocks = quantized_periods.iter().map(|q| q / base).collect();
    let f1 = utilization_growth(set, base);
    let f2 = switch_overhead(set, base);
    let f = &f1 + &f2;
    let quantized_utilization: Rational = set
        .tasks()
        .iter()
        .zip(&quantized_periods)
        .map(|(t, &q)| Rational::new(t.wcet.into(), q.into()))
        .sum();
    let one = Rational::one();
    let feasible = quantized_utilization <= one && f < one;
    let within_total_demand = &quantized_utilization + &f2 <= one;
    Ok(ObjectiveBreakdown {
        base_period: base,
        quantized_periods,
        blocks,
        f1,
        f2,
        f,
        quantized_utilization,
        feasible,
        within_total_demand,
    })
}

/// Objective for every `L` from `T₁` down to 1 (the order the search walks).
pub fn objective_table(set: &TaskSet) -> Vec<ObjectiveBreakdown> {
    (1..=set.min_period())
        .rev()
        .map(|l| objective(set, l).expect("L within [1, T1]"))
        .collect()
}
