//! Static cyclic timetable for a chosen base period `L`.
//!
//! Task `i` is cut into `kᵢ = ⌊Tᵢ/L⌋` equal blocks of `τᵢ/kᵢ` time units and
//! contributes exactly one block to every RT cycle of length `L`. Inside a cycle
//! blocks are packed from time 0 in ascending quantized period (ties by task
//! index) and whatever is left at the tail of the cycle is the free interval.
//! The layout repeats unchanged for `Tc / L` cycles, where
//! `Tc = lcm(k₁ … k_M)·L`.

use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objective::{self, ObjectiveError};
use crate::rational::{self, int, Rational};
use crate::task::{TaskSet, Time};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    BasePeriod(#[from] ObjectiveError),
    #[error("base period {base} is infeasible: quantized utilization {} > 1", rational::Show(.utilization))]
    InfeasibleBasePeriod { base: Time, utilization: Rational },
    #[error("hyperperiod overflows 64-bit time")]
    HyperperiodOverflow,
    #[error("no block counts given")]
    EmptyBlockCounts,
}

/// How one task is sliced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockPlan {
    pub task_index: usize,
    pub wcet: Time,
    pub period: Time,
    pub quantized_period: Time,
    /// `k`: blocks (and RT cycles) per quantized period.
    pub blocks: Time,
    /// Fraction of the job run in one cycle, `1/k`.
    #[serde(with = "rational::exact")]
    pub delta: Rational,
    #[serde(with = "rational::exact")]
    pub block_len: Rational,
}

/// One block inside the repeating cycle, offsets relative to the cycle start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleSlot {
    pub task_index: usize,
    #[serde(with = "rational::exact")]
    pub start: Rational,
    #[serde(with = "rational::exact")]
    pub end: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclicSchedule {
    pub base_period: Time,
    pub hyperperiod: Time,
    pub n_cycles: Time,
    pub plans: Vec<BlockPlan>,
    pub cycle_order: Vec<CycleSlot>,
    #[serde(with = "rational::exact")]
    pub free_interval: Rational,
    /// False when some block length is not a whole number of time units.
    pub integral_blocks: bool,
}

/// `lcm(ks)·L`, with overflow reported instead of wrapped.
pub fn hyperperiod(ks: &[Time], base: Time) -> Result<Time, ScheduleError> {
    if ks.is_empty() {
        return Err(ScheduleError::EmptyBlockCounts);
    }
    let lcm = ks.iter().try_fold(1u64, |acc, &k| {
        (acc / acc.gcd(&k))
            .checked_mul(k)
            .ok_or(ScheduleError::HyperperiodOverflow)
    })?;
    lcm.checked_mul(base)
        .ok_or(ScheduleError::HyperperiodOverflow)
}

pub fn build_schedule(set: &TaskSet, base: Time) -> Result<CyclicSchedule, ScheduleError> {
    let breakdown = objective::objective(set, base)?;
    if breakdown.quantized_utilization > Rational::one() {
        return Err(ScheduleError::InfeasibleBasePeriod {
            base,
            utilization: breakdown.quantized_utilization,
        });
    }

    let plans: Vec<BlockPlan> = set
        .tasks()
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let k = breakdown.blocks[i];
            BlockPlan {
                task_index: i,
                wcet: t.wcet,
                period: t.period,
                quantized_period: breakdown.quantized_periods[i],
                blocks: k,
                delta: Rational::new(1.into(), k.into()),
                block_len: Rational::new(t.wcet.into(), k.into()),
            }
        })
        .collect();

    let mut order: Vec<&BlockPlan> = plans.iter().collect();
    order.sort_by_key(|p| (p.quantized_period, p.task_index));
    let mut cursor = Rational::zero();
    let cycle_order: Vec<CycleSlot> = order
        .into_iter()
        .map(|p| {
            let start = cursor.clone();
            cursor += &p.block_len;
            CycleSlot {
                task_index: p.task_index,
                start,
                end: cursor.clone(),
            }
        })
        .collect();

    let ks: Vec<Time> = plans.iter().map(|p| p.blocks).collect();
    let hyper = hyperperiod(&ks, base)?;
    Ok(CyclicSchedule {
        base_period: base,
        hyperperiod: hyper,
        n_cycles: hyper / base,
        integral_blocks: plans.iter().all(|p| p.block_len.is_integer()),
        free_interval: int(base) - cursor,
        plans,
        cycle_order,
    })
}

/// One block placed on the absolute time axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedBlock {
    pub cycle: Time,
    pub task_index: usize,
    #[serde(with = "rational::exact")]
    pub start: Rational,
    #[serde(with = "rational::exact")]
    pub end: Rational,
}

/// Every block over `[0, Tc)`: cycle `j` is the cycle layout shifted by `j·L`.
/// Allocates `n_cycles·M` entries; use [`crate::verify::simulate`] for large horizons.
pub fn expand_timeline(sched: &CyclicSchedule) -> Vec<TimedBlock> {
    let mut out = Vec::with_capacity(sched.cycle_order.len() * sched.n_cycles as usize);
    for j in 0..sched.n_cycles {
        let shift = int(j * sched.base_period);
        out.extend(sched.cycle_order.iter().map(|slot| TimedBlock {
            cycle: j,
            task_index: slot.task_index,
            start: &slot.start + &shift,
            end: &slot.end + &shift,
        }));
    }
    out
}

fn task_symbol(index: usize) -> char {
    const SYMBOLS: &[u8] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
    SYMBOLS.get(index).map_or('#', |&b| b as char)
}

/// Widest Gantt bar, in characters.
const GANTT_WIDTH: u64 = 96;

/// Plain-text timetable, one line per RT cycle.
///
/// Each character is one column of the cycle; a task is drawn with its index
/// symbol (`0-9A-Za-z`) and idle time with `.`. At most `max_cycles` lines are
/// printed, the rest are summarized (they are identical by construction).
pub fn render_gantt(sched: &CyclicSchedule, max_cycles: u64) -> String {
    let base = sched.base_period;
    let denom = sched
        .cycle_order
        .iter()
        .flat_map(|s| [s.start.denom(), s.end.denom()])
        .fold(num_bigint::BigInt::one(), |acc, d| acc.lcm(d));
    let exact_cols = denom * num_bigint::BigInt::from(base);
    let cols: u64 = match u64::try_from(&exact_cols) {
        Ok(c) if c <= GANTT_WIDTH => c,
        _ => GANTT_WIDTH,
    };
    let col_len = Rational::new(base.into(), cols.into());
    let bar: String = (0..cols)
        .map(|c| {
            let mid = &col_len * (int(c) + rational::ratio(1, 2));
            sched
                .cycle_order
                .iter()
                .find(|s| s.start <= mid && mid < s.end)
                .map_or('.', |s| task_symbol(s.task_index))
        })
        .collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        "L = {base}, Tc = {}, {} cycles, free interval {} per cycle",
        sched.hyperperiod,
        sched.n_cycles,
        rational::Show(&sched.free_interval)
    );
    for p in &sched.plans {
        let _ = writeln!(
            out,
            "  [{}] task {}: tau={} T={} T'={} k={} block={}",
            task_symbol(p.task_index),
            p.task_index,
            p.wcet,
            p.period,
            p.quantized_period,
            p.blocks,
            rational::Show(&p.block_len)
        );
    }
    if !sched.integral_blocks {
        out.push_str("  note: some blocks are not whole time units\n");
    }
    let width = sched.n_cycles.saturating_sub(1).to_string().len();
    let shown = sched.n_cycles.min(max_cycles);
    for j in 0..shown {
        let _ = writeln!(
            out,
            "cycle {j:>width$} |{bar}| t={}..{}",
            j * base,
            (j + 1) * base
        );
    }
    if shown < sched.n_cycles {
        let _ = writeln!(out, "... {} more identical cycles", sched.n_cycles - shown);
    }
    out
}
