//! The periodic task model.
//!
//! A [`TaskSet`] is an ordered list of `(wcet, period)` pairs plus the average
//! per-switch overhead `p`. Sets are always sorted by period (stable, so tasks
//! with equal periods keep their input order) and always satisfy
//! `Σ wcet/period ≤ 1`.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objective;
use crate::rational::{self, Rational};

/// Integral time unit.
pub type Time = u64;

/// One periodic task: worst-case execution time and period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub wcet: Time,
    pub period: Time,
}

impl Task {
    pub fn new(wcet: Time, period: Time) -> Self {
        Self { wcet, period }
    }

    pub fn utilization(&self) -> Rational {
        Rational::new(self.wcet.into(), self.period.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaskSetError {
    #[error("task set is empty")]
    EmptySet,
    #[error("task {index} has non-positive timing (wcet {wcet}, period {period})")]
    NonPositiveTiming {
        index: usize,
        wcet: Time,
        period: Time,
    },
    #[error("task {index} has wcet {wcet} larger than its period {period}")]
    WcetExceedsPeriod {
        index: usize,
        wcet: Time,
        period: Time,
    },
    #[error("task set is overutilized: U = {} > 1", rational::Show(.utilization))]
    Overutilized { utilization: Rational },
    #[error("switch overhead must be non-negative, got {}", rational::Show(.0))]
    NegativeOverhead(Rational),
}

/// Non-fatal findings from [`validate_task_set`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationWarning {
    /// `M·p/T₁ > 1 − F₁(T₁)`: the overhead alone rules out `L = T₁`.
    OverheadAboveAdmissibleBound {
        switch_cost: Rational,
        bound: Rational,
    },
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationWarning::OverheadAboveAdmissibleBound { switch_cost, bound } => write!(
                f,
                "switch overhead M*p/T1 = {} exceeds the admissible bound 1 - F1(T1) = {}",
                rational::Show(switch_cost),
                rational::Show(bound)
            ),
        }
    }
}

/// A validated, period-sorted task set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSet {
    tasks: Vec<Task>,
    overhead: Rational,
}

/// A validated set together with the warnings raised while validating it.
#[derive(Debug, Clone)]
pub struct Validated {
    pub set: TaskSet,
    pub warnings: Vec<ValidationWarning>,
}

/// Validates raw tasks and overhead, returning a sorted [`TaskSet`].
pub fn validate_task_set(raw: &[Task], overhead: Rational) -> Result<Validated, TaskSetError> {
    if raw.is_empty() {
        return Err(TaskSetError::EmptySet);
    }
    if overhead < Rational::zero() {
        return Err(TaskSetError::NegativeOverhead(overhead));
    }
    for (index, t) in raw.iter().enumerate() {
        if t.wcet < 1 || t.period < 1 {
            return Err(TaskSetError::NonPositiveTiming {
                index,
                wcet: t.wcet,
                period: t.period,
            });
        }
        if t.wcet > t.period {
            return Err(TaskSetError::WcetExceedsPeriod {
                index,
                wcet: t.wcet,
                period: t.period,
            });
        }
    }
    let mut tasks = raw.to_vec();
    // stable: equal periods keep input order
    tasks.sort_by_key(|t| t.period);

    let utilization: Rational = tasks.iter().map(Task::utilization).sum();
    if utilization > Rational::one() {
        return Err(TaskSetError::Overutilized { utilization });
    }

    let set = TaskSet { tasks, overhead };
    let warnings = set.admissibility_warnings();
    Ok(Validated { set, warnings })
}

impl TaskSet {
    /// Validates and drops warnings. See [`validate_task_set`].
    pub fn new(raw: &[Task], overhead: Rational) -> Result<Self, TaskSetError> {
        validate_task_set(raw, overhead).map(|v| v.set)
    }

    /// Convenience constructor from `(wcet, period)` pairs.
    pub fn from_pairs(pairs: &[(Time, Time)], overhead: Rational) -> Result<Self, TaskSetError> {
        let raw: Vec<Task> = pairs.iter().map(|&(c, t)| Task::new(c, t)).collect();
        Self::new(&raw, overhead)
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    /// Number of tasks, `M`.
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Average per-switch overhead `p`.
    pub fn overhead(&self) -> &Rational {
        &self.overhead
    }

    /// Shortest period `T₁`, the upper end of the base-period search range.
    pub fn min_period(&self) -> Time {
        self.tasks[0].period
    }

    pub fn baseline_utilization(&self) -> Rational {
        baseline_utilization(self)
    }

    pub fn gcd_base_period(&self) -> Time {
        gcd_base_period(self)
    }

    fn admissibility_warnings(&self) -> Vec<ValidationWarning> {
        let t1 = self.min_period();
        let switch_cost = objective::switch_overhead(self, t1);
        let bound = Rational::one() - objective::utilization_growth(self, t1);
        if switch_cost > bound {
            vec![ValidationWarning::OverheadAboveAdmissibleBound { switch_cost, bound }]
        } else {
            Vec::new()
        }
    }
}

/// Exact `Σ τᵢ/Tᵢ`.
pub fn baseline_utilization(set: &TaskSet) -> Rational {
    set.tasks.iter().map(Task::utilization).sum()
}

/// GCD of all periods.
pub fn gcd_base_period(set: &TaskSet) -> Time {
    set.tasks.iter().fold(0, |acc, t| acc.gcd(&t.period))
}

/// Overhead as it appears in a task-set document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OverheadValue {
    Exact { num: i64, den: i64 },
    Decimal(String),
}

/// Canonical task-set JSON input:
/// `{"tasks":[{"wcet":1,"period":5}],"overhead":{"num":1,"den":5}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSetDocument {
    pub tasks: Vec<Task>,
    pub overhead: OverheadValue,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("invalid overhead: {0}")]
    Overhead(#[from] rational::RationalParseError),
    #[error(transparent)]
    Invalid(#[from] TaskSetError),
}

impl OverheadValue {
    pub fn to_rational(&self) -> Result<Rational, rational::RationalParseError> {
        match self {
            OverheadValue::Exact { den: 0, .. } => {
                Err(rational::RationalParseError::ZeroDenominator)
            }
            OverheadValue::Exact { num, den } => Ok(rational::ratio(*num, *den)),
            OverheadValue::Decimal(text) => rational::parse_decimal(text),
        }
    }
}

impl TaskSetDocument {
    pub fn validate(&self) -> Result<Validated, DocumentError> {
        let p = self.overhead.to_rational()?;
        Ok(validate_task_set(&self.tasks, p)?)
    }
}

/// Least common multiple of all periods, if it fits.
pub fn lcm_of_periods(set: &TaskSet) -> Option<Time> {
    set.tasks.iter().try_fold(1u64, |acc, t| {
        (acc / acc.gcd(&t.period)).checked_mul(t.period)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn reference_set() -> TaskSet {
        TaskSet::from_pairs(&[(1, 5), (3, 16), (3, 19), (4, 22)], ratio(1, 5)).unwrap()
    }

    #[test]
    fn reference_instance_utilization() {
        let set = reference_set();
        let expected = ratio(1, 5) + ratio(3, 16) + ratio(3, 19) + ratio(4, 22);
        assert_eq!(set.baseline_utilization(), expected);
        assert_eq!(expected, ratio(12159, 16720));
        assert!((rational::to_f64(&expected) - 0.727213).abs() < 1e-6);
        assert_eq!(set.min_period(), 5);
        assert_eq!(set.len(), 4);
    }

    #[test]
    fn single_full_task_is_valid() {
        let set = TaskSet::from_pairs(&[(1, 1)], int(0)).unwrap();
        assert_eq!(set.baseline_utilization(), int(1));
    }

    #[test]
    fn overutilized_reports_u() {
        let err = TaskSet::from_pairs(&[(3, 5), (3, 5)], int(0)).unwrap_err();
        assert_eq!(
            err,
            TaskSetError::Overutilized {
                utilization: ratio(6, 5)
            }
        );
    }

    #[test]
    fn error_paths() {
        assert_eq!(
            TaskSet::from_pairs(&[], int(0)).unwrap_err(),
            TaskSetError::EmptySet
        );
        assert!(matches!(
            TaskSet::from_pairs(&[(0, 5)], int(0)).unwrap_err(),
            TaskSetError::NonPositiveTiming { index: 0, .. }
        ));
        assert!(matches!(
            TaskSet::from_pairs(&[(1, 5), (2, 0)], int(0)).unwrap_err(),
            TaskSetError::NonPositiveTiming { index: 1, .. }
        ));
        assert!(matches!(
            TaskSet::from_pairs(&[(6, 5)], int(0)).unwrap_err(),
            TaskSetError::WcetExceedsPeriod {
                index: 0,
                wcet: 6,
                period: 5
            }
        ));
        assert!(matches!(
            TaskSet::from_pairs(&[(1, 5)], ratio(-1, 5)).unwrap_err(),
            TaskSetError::NegativeOverhead(_)
        ));
    }

    #[test]
    fn half_utilization() {
        let set = TaskSet::from_pairs(&[(1, 4), (1, 4)], int(0)).unwrap();
        assert_eq!(baseline_utilization(&set), ratio(1, 2));
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(reference_set().gcd_base_period(), 1);
        let s = TaskSet::from_pairs(&[(1, 4), (1, 8), (1, 12)], int(0)).unwrap();
        assert_eq!(s.gcd_base_period(), 4);
        let s = TaskSet::from_pairs(&[(1, 7)], int(0)).unwrap();
        assert_eq!(s.gcd_base_period(), 7);
    }

    #[test]
    fn sort_is_stable() {
        let set = TaskSet::from_pairs(&[(2, 10), (1, 5), (1, 10), (3, 10)], int(0)).unwrap();
        let wcets: Vec<_> = set.tasks().iter().map(|t| t.wcet).collect();
        assert_eq!(wcets, vec![1, 2, 1, 3]);
    }

    #[test]
    fn admissibility_warning() {
        // 2·3/5 = 1.2 > 1 − F₁(5)
        let v = validate_task_set(&[Task::new(1, 5), Task::new(3, 16)], int(3)).unwrap();
        assert_eq!(v.warnings.len(), 1);
        let v = validate_task_set(&reference_set().tasks, ratio(1, 5)).unwrap();
        assert!(v.warnings.is_empty());
    }

    #[test]
    fn document_parsing() {
        let doc: TaskSetDocument = serde_json::from_str(
            r#"{"tasks":[{"wcet":1,"period":5},{"wcet":3,"period":16}],"overhead":"0.2"}"#,
        )
        .unwrap();
        assert_eq!(doc.validate().unwrap().set.overhead(), &ratio(1, 5));
        let doc: TaskSetDocument = serde_json::from_str(
            r#"{"tasks":[{"wcet":1,"period":5}],"overhead":{"num":1,"den":5}}"#,
        )
        .unwrap();
        assert_eq!(doc.validate().unwrap().set.overhead(), &ratio(1, 5));
        assert!(serde_json::from_str::<TaskSetDocument>(
            r#"{"tasks":[],"overhead":"0","extra":1}"#
        )
        .is_err());
        assert!(serde_json::from_str::<TaskSetDocument>(
            r#"{"tasks":[{"wcet":1,"period":5,"phase":0}],"overhead":"0"}"#
        )
        .is_err());
    }

    #[test]
    fn periods_lcm() {
        assert_eq!(lcm_of_periods(&reference_set()), Some(5 * 16 * 19 * 11));
    }
}
