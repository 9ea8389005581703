//! Replay of a cyclic timetable over its hyperperiod and the admissibility checks.
//!
//! The replay runs on an integer tick grid: one tick is `1/D` time units where
//! `D` is the lcm of every denominator appearing in the cycle layout. All block
//! boundaries are whole ticks, so every comparison below is exact integer
//! arithmetic and converts back to rationals losslessly.
//!
//! Admissibility conditions checked by [`verify_conditions`]:
//!
//! 1. every task's block has the same positive length in every cycle;
//! 2. processing of cycle `j` begins at its request time `αⱼ = j·L`, and each
//!    block sits at its planned in-cycle offset;
//! 3. every task runs exactly once per cycle and its start moves by exactly
//!    `L` from one cycle to the next (`βⱼ₊ᵣ = βⱼ + rL`);
//! 4. no two blocks overlap;
//! 5. the last block ends no later than `Tc`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{self, Rational};
use crate::schedule::{BlockPlan, CyclicSchedule};
use crate::task::{TaskSet, Time};

/// Replays above this many blocks are refused.
pub const MAX_EVENTS: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulateError {
    #[error("hyperperiod needs {events} block events, more than the {max} replay limit")]
    HorizonTooLarge { events: u64, max: u64 },
    #[error("time grid for this schedule does not fit in 128-bit ticks")]
    TimeScaleOverflow,
}

/// One executed block, in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimEvent {
    pub cycle: Time,
    pub task_index: usize,
    /// `β`, processing start.
    pub start: i128,
    /// `γ`, processing end.
    pub end: i128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationTrace {
    /// Ticks per time unit.
    pub scale: i128,
    pub base_period: Time,
    pub hyperperiod: Time,
    pub n_cycles: Time,
    /// Time-ordered; within a cycle, by start then layout order.
    pub events: Vec<SimEvent>,
}

/// A trace event expressed in time units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimedEvent {
    pub cycle: Time,
    pub task_index: usize,
    #[serde(with = "rational::exact")]
    pub start: Rational,
    #[serde(with = "rational::exact")]
    pub end: Rational,
}

impl SimulationTrace {
    pub fn to_time(&self, ticks: i128) -> Rational {
        Rational::new(BigInt::from(ticks), BigInt::from(self.scale))
    }

    fn units(&self, t: Time) -> i128 {
        i128::from(t) * self.scale
    }

    pub fn timed_events(&self) -> impl Iterator<Item = TimedEvent> + '_ {
        self.events.iter().map(|e| TimedEvent {
            cycle: e.cycle,
            task_index: e.task_index,
            start: self.to_time(e.start),
            end: self.to_time(e.end),
        })
    }

    /// `γ` of the last block of each cycle (`None` for an empty cycle).
    pub fn cycle_ends(&self) -> Vec<Option<Rational>> {
        let mut ends: Vec<Option<i128>> = vec![None; self.n_cycles as usize];
        for e in &self.events {
            if let Some(slot) = ends.get_mut(e.cycle as usize) {
                *slot = Some(slot.map_or(e.end, |v| v.max(e.end)));
            }
        }
        ends.into_iter()
            .map(|v| v.map(|t| self.to_time(t)))
            .collect()
    }

    /// Total executed time divided by the horizon.
    pub fn utilization_observed(&self) -> Rational {
        let busy: i128 = self.events.iter().map(|e| e.end - e.start).sum();
        if self.hyperperiod == 0 {
            return Rational::zero();
        }
        Rational::new(
            BigInt::from(busy),
            BigInt::from(self.units(self.hyperperiod)),
        )
    }
}

fn to_ticks(value: &Rational, scale: &BigInt) -> Option<i128> {
    (value * Rational::from_integer(scale.clone()))
        .to_integer()
        .to_i128()
}

/// Replays the cycle layout `n_cycles` times, shifting cycle `j` by `j·L`.
pub fn simulate(sched: &CyclicSchedule) -> Result<SimulationTrace, SimulateError> {
    let per_cycle = sched.cycle_order.len() as u64;
    let events_needed = per_cycle.saturating_mul(sched.n_cycles);
    if events_needed > MAX_EVENTS {
        return Err(SimulateError::HorizonTooLarge {
            events: events_needed,
            max: MAX_EVENTS,
        });
    }
    let scale_big = sched
        .cycle_order
        .iter()
        .flat_map(|s| [s.start.denom(), s.end.denom()])
        .fold(BigInt::one(), |acc, d| acc.lcm(d));
    let scale = scale_big
        .to_i128()
        .ok_or(SimulateError::TimeScaleOverflow)?;
    let mut layout: Vec<(usize, i128, i128)> = sched
        .cycle_order
        .iter()
        .map(|s| {
            let a = to_ticks(&s.start, &scale_big)?;
            let b = to_ticks(&s.end, &scale_big)?;
            Some((s.task_index, a, b))
        })
        .collect::<Option<_>>()
        .ok_or(SimulateError::TimeScaleOverflow)?;
    layout.sort_by_key(|&(_, a, _)| a);

    let step = i128::from(sched.base_period)
        .checked_mul(scale)
        .ok_or(SimulateError::TimeScaleOverflow)?;
    step.checked_mul(i128::from(sched.n_cycles))
        .and_then(|v| v.checked_add(layout.iter().map(|l| l.2.abs()).max().unwrap_or(0)))
        .ok_or(SimulateError::TimeScaleOverflow)?;

    let mut events = Vec::with_capacity(events_needed as usize);
    for j in 0..sched.n_cycles {
        let shift = step * i128::from(j);
        events.extend(layout.iter().map(|&(task_index, a, b)| SimEvent {
            cycle: j,
            task_index,
            start: a + shift,
            end: b + shift,
        }));
    }
    Ok(SimulationTrace {
        scale,
        base_period: sched.base_period,
        hyperperiod: sched.hyperperiod,
        n_cycles: sched.n_cycles,
        events,
    })
}

/// First witness of a failed condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Time>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_task_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_exact")]
    pub expected: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_exact")]
    pub actual: Option<Rational>,
    pub detail: String,
}

mod opt_exact {
    use super::*;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => rational::exact::serialize(r, s),
            None => s.serialize_none(),
        }
    }
}

impl Counterexample {
    fn new(detail: impl Into<String>) -> Self {
        Counterexample {
            cycle: None,
            task_index: None,
            other_task_index: None,
            expected: None,
            actual: None,
            detail: detail.into(),
        }
    }

    fn cycle(mut self, j: Time) -> Self {
        self.cycle = Some(j);
        self
    }

    fn task(mut self, i: usize) -> Self {
        self.task_index = Some(i);
        self
    }

    fn other(mut self, i: usize) -> Self {
        self.other_task_index = Some(i);
        self
    }

    fn values(mut self, expected: Rational, actual: Rational) -> Self {
        self.expected = Some(expected);
        self.actual = Some(actual);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionOutcome {
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl ConditionOutcome {
    fn from(witness: Option<Counterexample>) -> Self {
        ConditionOutcome {
            passed: witness.is_none(),
            counterexample: witness,
        }
    }
}

/// Service received by one task over its quantized-period windows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskDeadlines {
    pub task_index: usize,
    pub wcet: Time,
    /// Window length `T′ᵢ`.
    pub window: Time,
    pub windows_checked: u64,
    pub met: bool,
    /// Smallest `window end − completion` over all windows (zero if none completed).
    #[serde(with = "rational::exact")]
    pub min_slack: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeadlineReport {
    pub all_met: bool,
    pub tasks: Vec<TaskDeadlines>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub condition1_equal_blocks: ConditionOutcome,
    pub condition2_start_on_request: ConditionOutcome,
    pub condition3_periodic_starts: ConditionOutcome,
    pub condition4_no_overlap: ConditionOutcome,
    pub condition5_within_hyperperiod: ConditionOutcome,
    /// Stronger per-cycle form of condition 5: `γⱼ ≤ (j + 1)·L`. Informational.
    pub every_cycle_within_base_period: bool,
    pub deadlines_met: bool,
    pub deadlines: DeadlineReport,
    #[serde(with = "rational::exact")]
    pub utilization_observed: Rational,
    pub events: u64,
}

/// Groups events per cycle (by index into `trace.events`).
fn by_cycle(trace: &SimulationTrace) -> Vec<Vec<usize>> {
    let mut cycles = vec![Vec::new(); trace.n_cycles as usize];
    for (k, e) in trace.events.iter().enumerate() {
        if let Some(c) = cycles.get_mut(e.cycle as usize) {
            c.push(k);
        }
    }
    cycles
}

fn task_count(sched: &CyclicSchedule, trace: &SimulationTrace) -> usize {
    let from_events = trace
        .events
        .iter()
        .map(|e| e.task_index + 1)
        .max()
        .unwrap_or(0);
    let from_layout = sched
        .cycle_order
        .iter()
        .map(|s| s.task_index + 1)
        .max()
        .unwrap_or(0);
    sched.plans.len().max(from_events).max(from_layout)
}

fn check_equal_blocks(trace: &SimulationTrace, n_tasks: usize) -> Option<Counterexample> {
    let mut reference: Vec<Option<i128>> = vec![None; n_tasks];
    for e in &trace.events {
        let len = e.end - e.start;
        if len <= 0 {
            return Some(
                Counterexample::new("block has non-positive length")
                    .cycle(e.cycle)
                    .task(e.task_index)
                    .values(Rational::zero(), trace.to_time(len)),
            );
        }
        match reference[e.task_index] {
            None => reference[e.task_index] = Some(len),
            Some(r) if r != len => {
                return Some(
                    Counterexample::new("block length differs from the task's first block")
                        .cycle(e.cycle)
                        .task(e.task_index)
                        .values(trace.to_time(r), trace.to_time(len)),
                );
            }
            Some(_) => {}
        }
    }
    None
}

fn check_start_on_request(
    sched: &CyclicSchedule,
    trace: &SimulationTrace,
    cycles: &[Vec<usize>],
) -> Option<Counterexample> {
    let planned: Vec<(usize, Rational)> = sched
        .cycle_order
        .iter()
        .map(|s| (s.task_index, s.start.clone()))
        .collect();
    for (j, idx) in cycles.iter().enumerate() {
        let release = trace.units(trace.base_period) * j as i128;
        let Some(first) = idx.iter().map(|&k| trace.events[k].start).min() else {
            continue;
        };
        if first != release {
            return Some(
                Counterexample::new("cycle processing does not begin at its request time")
                    .cycle(j as Time)
                    .values(trace.to_time(release), trace.to_time(first)),
            );
        }
        for &k in idx {
            let e = &trace.events[k];
            let offset = trace.to_time(e.start - release);
            if let Some((_, want)) = planned.iter().find(|(t, _)| *t == e.task_index) {
                if *want != offset {
                    return Some(
                        Counterexample::new("block offset differs from the planned offset")
                            .cycle(j as Time)
                            .task(e.task_index)
                            .values(want.clone(), offset),
                    );
                }
            }
        }
    }
    None
}

fn check_periodic_starts(
    trace: &SimulationTrace,
    cycles: &[Vec<usize>],
    n_tasks: usize,
    expected_tasks: &[usize],
) -> Option<Counterexample> {
    let step = trace.units(trace.base_period);
    let mut first_start: Vec<Option<i128>> = vec![None; n_tasks];
    for (j, idx) in cycles.iter().enumerate() {
        let mut seen = vec![0u32; n_tasks];
        for &k in idx {
            seen[trace.events[k].task_index] += 1;
        }
        for &t in expected_tasks {
            if seen[t] != 1 {
                return Some(
                    Counterexample::new(format!(
                        "task runs {} times in the cycle, expected once",
                        seen[t]
                    ))
                    .cycle(j as Time)
                    .task(t),
                );
            }
        }
        for &k in idx {
            let e = &trace.events[k];
            match first_start[e.task_index] {
                None if j == 0 => first_start[e.task_index] = Some(e.start),
                None => {
                    return Some(
                        Counterexample::new("task first appears after cycle 0")
                            .cycle(j as Time)
                            .task(e.task_index),
                    );
                }
                Some(b0) => {
                    let want = b0 + step * j as i128;
                    if e.start != want {
                        return Some(
                            Counterexample::new("block start does not advance by L per cycle")
                                .cycle(j as Time)
                                .task(e.task_index)
                                .values(trace.to_time(want), trace.to_time(e.start)),
                        );
                    }
                }
            }
        }
    }
    None
}

fn check_no_overlap(trace: &SimulationTrace) -> Option<Counterexample> {
    let mut order: Vec<&SimEvent> = trace.events.iter().collect();
    order.sort_by_key(|e| (e.start, e.end));
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.start < a.end {
            return Some(
                Counterexample::new(format!(
                    "blocks overlap on [{}, {})",
                    rational::Show(&trace.to_time(b.start)),
                    rational::Show(&trace.to_time(a.end.min(b.end)))
                ))
                .cycle(b.cycle)
                .task(a.task_index)
                .other(b.task_index)
                .values(trace.to_time(a.end), trace.to_time(b.start)),
            );
        }
    }
    None
}

fn check_within_hyperperiod(trace: &SimulationTrace) -> Option<Counterexample> {
    let horizon = trace.units(trace.hyperperiod);
    let last = trace.events.iter().max_by_key(|e| e.end)?;
    if last.end > horizon {
        return Some(
            Counterexample::new("last block ends after Tc")
                .cycle(last.cycle)
                .task(last.task_index)
                .values(trace.to_time(horizon), trace.to_time(last.end)),
        );
    }
    None
}

fn every_cycle_within_base(trace: &SimulationTrace) -> bool {
    let step = trace.units(trace.base_period);
    trace
        .events
        .iter()
        .all(|e| e.start >= step * e.cycle as i128 && e.end <= step * (e.cycle as i128 + 1))
}

/// Per-task demand: `(task_index, wcet, window)`.
fn deadline_report(trace: &SimulationTrace, demands: &[(usize, Time, Time)]) -> DeadlineReport {
    let horizon = trace.units(trace.hyperperiod);
    let tasks: Vec<TaskDeadlines> = demands
        .iter()
        .map(|&(task_index, wcet, window)| {
            let mut events: Vec<&SimEvent> = trace
                .events
                .iter()
                .filter(|e| e.task_index == task_index)
                .collect();
            events.sort_by_key(|e| e.start);
            let mut out = TaskDeadlines {
                task_index,
                wcet,
                window,
                windows_checked: 0,
                met: true,
                min_slack: Rational::zero(),
                violation: None,
            };
            let w = trace.units(window);
            if w <= 0 || horizon % w != 0 {
                out.met = false;
                out.violation = Some(
                    Counterexample::new("window does not tile the hyperperiod").task(task_index),
                );
                return out;
            }
            let demand = trace.units(wcet);
            let mut min_slack: Option<i128> = None;
            let mut cursor = 0usize;
            let n_windows = horizon / w;
            for m in 0..n_windows {
                let (lo, hi) = (m * w, (m + 1) * w);
                while cursor < events.len() && events[cursor].end <= lo {
                    cursor += 1;
                }
                let mut service = 0i128;
                let mut completion: Option<i128> = None;
                let mut k = cursor;
                while k < events.len() && events[k].start < hi {
                    let (a, b) = (events[k].start.max(lo), events[k].end.min(hi));
                    if b > a {
                        service += b - a;
                        completion = Some(completion.map_or(b, |c: i128| c.max(b)));
                    }
                    k += 1;
                }
                out.windows_checked += 1;
                if service != demand && out.met {
                    out.met = false;
                    out.violation = Some(
                        Counterexample::new(format!("service in window {m} differs from wcet"))
                            .cycle((lo / trace.units(trace.base_period).max(1)) as Time)
                            .task(task_index)
                            .values(trace.to_time(demand), trace.to_time(service)),
                    );
                }
                if let Some(c) = completion {
                    let slack = hi - c;
                    min_slack = Some(min_slack.map_or(slack, |s| s.min(slack)));
                }
            }
            out.min_slack = trace.to_time(min_slack.unwrap_or(0));
            out
        })
        .collect();
    DeadlineReport {
        all_met: tasks.iter().all(|t| t.met),
        tasks,
    }
}

fn plan_demands(plans: &[BlockPlan]) -> Vec<(usize, Time, Time)> {
    plans
        .iter()
        .map(|p| (p.task_index, p.wcet, p.quantized_period))
        .collect()
}

/// Checks that every task gets exactly `τᵢ` in each `T′ᵢ` window of the trace.
///
/// `T′ᵢ ≤ Tᵢ`, so this certifies the original deadlines as well.
pub fn check_deadlines(set: &TaskSet, trace: &SimulationTrace) -> DeadlineReport {
    let base = trace.base_period.max(1);
    let demands: Vec<(usize, Time, Time)> = set
        .tasks()
        .iter()
        .enumerate()
        .map(|(i, t)| (i, t.wcet, t.period / base * base))
        .collect();
    deadline_report(trace, &demands)
}

/// Runs all five admissibility conditions plus the deadline check.
pub fn verify_conditions(sched: &CyclicSchedule, trace: &SimulationTrace) -> VerificationReport {
    let n_tasks = task_count(sched, trace);
    let cycles = by_cycle(trace);
    let mut expected_tasks: Vec<usize> = sched
        .plans
        .iter()
        .map(|p| p.task_index)
        .chain(sched.cycle_order.iter().map(|s| s.task_index))
        .filter(|&t| t < n_tasks)
        .collect();
    expected_tasks.sort_unstable();
    expected_tasks.dedup();

    let c1 = ConditionOutcome::from(check_equal_blocks(trace, n_tasks));
    let c2 = ConditionOutcome::from(check_start_on_request(sched, trace, &cycles));
    let c3 = ConditionOutcome::from(check_periodic_starts(
        trace,
        &cycles,
        n_tasks,
        &expected_tasks,
    ));
    let c4 = ConditionOutcome::from(check_no_overlap(trace));
    let c5 = ConditionOutcome::from(check_within_hyperperiod(trace));
    let deadlines = deadline_report(trace, &plan_demands(&sched.plans));
    let passed = c1.passed && c2.passed && c3.passed && c4.passed && c5.passed && deadlines.all_met;
    VerificationReport {
        passed,
        condition1_equal_blocks: c1,
        condition2_start_on_request: c2,
        condition3_periodic_starts: c3,
        condition4_no_overlap: c4,
        condition5_within_hyperperiod: c5,
        every_cycle_within_base_period: every_cycle_within_base(trace),
        deadlines_met: deadlines.all_met,
        deadlines,
        utilization_observed: trace.utilization_observed(),
        events: trace.events.len() as u64,
    }
}

/// `simulate` followed by `verify_conditions`.
pub fn verify_schedule(sched: &CyclicSchedule) -> Result<VerificationReport, SimulateError> {
    let trace = simulate(sched)?;
    Ok(verify_conditions(sched, &trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::schedule::{build_schedule, expand_timeline};

    fn reference_set() -> TaskSet {
        TaskSet::from_pairs(&[(1, 5), (3, 16), (3, 19), (4, 22)], ratio(1, 5)).unwrap()
    }

    #[test]
    fn reference_trace() {
        let sched = build_schedule(&reference_set(), 5).unwrap();
        let trace = simulate(&sched).unwrap();
        assert_eq!(trace.events.len(), 48);
        assert_eq!(trace.utilization_observed(), ratio(4, 5));
        let report = verify_conditions(&sched, &trace);
        assert!(report.passed, "{report:#?}");
        assert!(report.every_cycle_within_base_period);
        let t4 = &report.deadlines.tasks[3];
        assert_eq!((t4.window, t4.windows_checked), (20, 3));
        assert!(t4.met);
        let direct = check_deadlines(&reference_set(), &trace);
        assert_eq!(direct, report.deadlines);
    }

    #[test]
    fn trace_matches_expanded_timeline() {
        let set = TaskSet::from_pairs(&[(3, 7), (1, 9)], Rational::zero()).unwrap();
        let sched = build_schedule(&set, 3).unwrap();
        let trace = simulate(&sched).unwrap();
        let timed: Vec<_> = trace
            .timed_events()
            .map(|e| (e.cycle, e.task_index, e.start, e.end))
            .collect();
        let expanded: Vec<_> = expand_timeline(&sched)
            .into_iter()
            .map(|b| (b.cycle, b.task_index, b.start, b.end))
            .collect();
        assert_eq!(timed, expanded);
    }

    #[test]
    fn single_task() {
        let set = TaskSet::from_pairs(&[(2, 4)], Rational::zero()).unwrap();
        let sched = build_schedule(&set, 4).unwrap();
        let trace = simulate(&sched).unwrap();
        assert_eq!(trace.events.len(), 1);
        assert_eq!(trace.utilization_observed(), ratio(1, 2));
        let d = check_deadlines(&set, &trace);
        assert!(d.all_met);
        assert_eq!(d.tasks[0].min_slack, int(2));
    }

    #[test]
    fn fractional_task() {
        let set = TaskSet::from_pairs(&[(3, 7)], Rational::zero()).unwrap();
        let sched = build_schedule(&set, 3).unwrap();
        let trace = simulate(&sched).unwrap();
        assert_eq!(trace.events.len(), 2);
        assert_eq!(trace.scale, 2);
        assert_eq!(trace.utilization_observed(), ratio(3, 6));
        let d = check_deadlines(&set, &trace);
        assert!(d.all_met);
        assert_eq!(d.tasks[0].window, 6);
        assert_eq!(d.tasks[0].min_slack, ratio(3, 2));
        assert_eq!(
            trace.cycle_ends(),
            vec![Some(ratio(3, 2)), Some(ratio(9, 2))]
        );
    }

    #[test]
    fn overlapping_layout_fails_condition_four() {
        let mut sched = build_schedule(&reference_set(), 5).unwrap();
        sched.cycle_order[1].start = int(0);
        sched.cycle_order[1].end = int(1);
        let trace = simulate(&sched).unwrap();
        let report = verify_conditions(&sched, &trace);
        assert!(!report.passed);
        let c4 = &report.condition4_no_overlap;
        assert!(!c4.passed);
        let cx = c4.counterexample.as_ref().unwrap();
        let pair = [cx.task_index.unwrap(), cx.other_task_index.unwrap()];
        assert!(pair.contains(&0) && pair.contains(&1), "{cx:?}");
        assert!(cx.detail.contains("[0, 1)"), "{}", cx.detail);
    }

    #[test]
    fn lengthened_block_fails_condition_one() {
        let sched = build_schedule(&reference_set(), 5).unwrap();
        let mut trace = simulate(&sched).unwrap();
        let e = trace
            .events
            .iter_mut()
            .find(|e| e.cycle == 1 && e.task_index == 3)
            .unwrap();
        e.end += trace.scale / 2 + 1;
        let report = verify_conditions(&sched, &trace);
        let c1 = &report.condition1_equal_blocks;
        assert!(!c1.passed);
        assert_eq!(c1.counterexample.as_ref().unwrap().cycle, Some(1));
        assert_eq!(c1.counterexample.as_ref().unwrap().task_index, Some(3));
        assert!(!report.deadlines_met);
    }

    #[test]
    fn late_start_fails_condition_two() {
        let sched = build_schedule(&reference_set(), 5).unwrap();
        let mut trace = simulate(&sched).unwrap();
        for e in trace.events.iter_mut().filter(|e| e.cycle == 2) {
            e.start += trace.scale;
            e.end += trace.scale;
        }
        let report = verify_conditions(&sched, &trace);
        assert!(!report.condition2_start_on_request.passed);
        assert!(!report.condition3_periodic_starts.passed);
        assert_eq!(
            report
                .condition2_start_on_request
                .counterexample
                .as_ref()
                .unwrap()
                .cycle,
            Some(2)
        );
    }

    #[test]
    fn missing_block_fails_condition_three() {
        let sched = build_schedule(&reference_set(), 5).unwrap();
        let mut trace = simulate(&sched).unwrap();
        trace
            .events
            .retain(|e| !(e.cycle == 4 && e.task_index == 2));
        let report = verify_conditions(&sched, &trace);
        let c3 = &report.condition3_periodic_starts;
        assert!(!c3.passed);
        assert_eq!(c3.counterexample.as_ref().unwrap().cycle, Some(4));
        assert!(!report.deadlines_met);
    }

    #[test]
    fn overrun_fails_condition_five() {
        let mut sched = build_schedule(&reference_set(), 5).unwrap();
        sched.cycle_order[3].start = int(4);
        sched.cycle_order[3].end = int(6);
        let report = verify_schedule(&sched).unwrap();
        assert!(!report.condition5_within_hyperperiod.passed);
        assert!(!report.every_cycle_within_base_period);
        assert!(!report.condition4_no_overlap.passed);
    }

    #[test]
    fn adversarial_inputs_do_not_panic() {
        let mut sched = build_schedule(&reference_set(), 5).unwrap();
        sched.cycle_order[0].task_index = 9;
        sched.cycle_order[2].end = sched.cycle_order[2].start.clone();
        sched.hyperperiod = 7;
        sched.plans[1].quantized_period = 0;
        let report = verify_schedule(&sched).unwrap();
        assert!(!report.passed);

        sched.n_cycles = u64::MAX;
        assert!(matches!(
            simulate(&sched),
            Err(SimulateError::HorizonTooLarge { .. })
        ));
    }
}
