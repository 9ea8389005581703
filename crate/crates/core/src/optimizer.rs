//! Base-period search: `arg min F(L)` over integer `L ∈ [1, T₁]`.
//!
//! Two routes are provided. [`brute_force_optimize`] evaluates every `L` and
//! serves as the oracle. [`bnb_optimize`] is a best-first branch-and-bound over
//! the sum tree built from two families of non-negative terms:
//!
//! * the **H subsets**: for each `L`, the per-task growth terms
//!   `τᵢ/T′ᵢ − τᵢ/Tᵢ`, consumed largest first;
//! * the **V chain**: `M·p/T₁` followed by the increments
//!   `M·p/(L(L−1))` that walk the switching cost from `L` to `L − 1`.
//!
//! The frontier holds one *spine* node (the V chain walked down to some `L`)
//! and at most one *candidate* node per `L` already reached by the spine.
//! Every node cost is a partial sum of non-negative terms and therefore a lower
//! bound on the objective of anything below it, so the first candidate that is
//! popped with all `M` terms consumed is optimal. Ties in cost go to the larger
//! `L`; since the spine always sits below every open candidate this also means
//! candidates beat the spine on ties.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objective::{self, growth_term, ObjectiveBreakdown};
use crate::rational::{int, Rational};
use crate::task::{TaskSet, Time};

/// Tie-breaking rule recorded in every result.
pub const TIE_BREAK_RULE: &str = "min F; ties to larger L (candidate before spine)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Oracle,
    Bnb,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OptimizeError {
    #[error("no base period L in [1, T1] gives U' <= 1 and F < 1 ({steps} steps)")]
    NoFeasibleBasePeriod { steps: u64, pruned: u64 },
}

/// One growth term with the (sorted) task index it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HElement {
    pub task_index: usize,
    pub value: Rational,
}

/// The growth terms for one `L`, largest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HSubset {
    pub base_period: Time,
    pub elements: Vec<HElement>,
}

impl HSubset {
    pub fn build(set: &TaskSet, base: Time) -> Self {
        let mut elements: Vec<HElement> = set
            .tasks()
            .iter()
            .enumerate()
            .map(|(task_index, t)| HElement {
                task_index,
                value: growth_term(t, base),
            })
            .collect();
        // descending by value, original order among equals
        elements.sort_by(|a, b| b.value.cmp(&a.value));
        HSubset {
            base_period: base,
            elements,
        }
    }

    pub fn total(&self) -> Rational {
        self.elements.iter().map(|e| &e.value).sum()
    }
}

/// One [`HSubset`] per `L`, ordered `T₁, T₁ − 1, …, 1`.
pub fn build_h_sets(set: &TaskSet) -> Vec<HSubset> {
    (1..=set.min_period())
        .rev()
        .map(|l| HSubset::build(set, l))
        .collect()
}

/// Switching-cost chain: `M·p/T₁` then `M·p/(L(L−1))` for `L = T₁ … 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VChain {
    pub first: Rational,
    /// `(L, M·p/(L(L−1)))` for `L` from `T₁` down to 2.
    pub deltas: Vec<(Time, Rational)>,
    weight: Rational,
    top: Time,
}

impl VChain {
    /// Increment that moves the switching cost from `L` to `L − 1`.
    pub fn delta(&self, base: Time) -> Rational {
        debug_assert!(base >= 2 && base <= self.top);
        &self.weight / int(base * (base - 1))
    }

    /// `first + Σ delta(j)` for `j = T₁ … L + 1`, which telescopes to `M·p/L`.
    pub fn accumulated(&self, base: Time) -> Rational {
        let mut total = self.first.clone();
        for (l, d) in &self.deltas {
            if *l <= base {
                break;
            }
            total += d;
        }
        total
    }
}

pub fn build_v_chain(set: &TaskSet) -> VChain {
    let top = set.min_period();
    let weight = set.overhead() * int(set.len() as u64);
    let first = &weight / int(top);
    let deltas = (2..=top)
        .rev()
        .map(|l| (l, &weight / int(l * (l - 1))))
        .collect();
    VChain {
        first,
        deltas,
        weight,
        top,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub method: Method,
    pub best_base_period: Time,
    pub best: ObjectiveBreakdown,
    /// Breakdowns for every `L` the method looked at (all `L` for the oracle,
    /// those whose H subset was materialized for branch-and-bound).
    pub table: Vec<ObjectiveBreakdown>,
    pub steps: u64,
    pub pruned: u64,
    pub max_frontier: usize,
    pub tie_break: String,
}

/// Term count of the exhaustive search: `T₁·(M + 1)`.
pub fn brute_force_steps(set: &TaskSet) -> u64 {
    set.min_period() * (set.len() as u64 + 1)
}

/// Exhaustive oracle.
pub fn brute_force_optimize(set: &TaskSet) -> Result<OptimizationResult, OptimizeError> {
    let table = objective::objective_table(set);
    let steps = brute_force_steps(set);
    let mut best: Option<&ObjectiveBreakdown> = None;
    // table runs from T₁ down, so strict `<` keeps the larger L on ties
    for row in table.iter().filter(|r| r.feasible) {
        if best.is_none_or(|b| row.f < b.f) {
            best = Some(row);
        }
    }
    let pruned = table.iter().filter(|r| !r.feasible).count() as u64;
    let best = best
        .cloned()
        .ok_or(OptimizeError::NoFeasibleBasePeriod { steps, pruned })?;
    Ok(OptimizationResult {
        method: Method::Oracle,
        best_base_period: best.base_period,
        best,
        table,
        steps,
        pruned,
        max_frontier: 0,
        tie_break: TIE_BREAK_RULE.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NodeKind {
    /// V chain walked down to `base_period`.
    Spine,
    /// Candidate `L = base_period` with the first `consumed` H terms added.
    Candidate { consumed: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchNode {
    pub kind: NodeKind,
    pub base_period: Time,
    pub cost: Rational,
    /// Partial `F₁` (candidates only).
    growth: Rational,
}

impl SearchNode {
    fn is_candidate(&self) -> bool {
        matches!(self.kind, NodeKind::Candidate { .. })
    }
}

impl Ord for SearchNode {
    // BinaryHeap is a max-heap: "greater" means popped first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .cmp(&self.cost)
            .then_with(|| self.is_candidate().cmp(&other.is_candidate()))
            .then_with(|| self.base_period.cmp(&other.base_period))
    }
}

impl PartialOrd for SearchNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Why a node left the search without being expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneReason {
    /// Cost reached the objective ceiling `F ≥ 1`.
    ObjectiveCeiling,
    /// Partial growth exceeds `1 − U`, i.e. `U′ > 1`.
    Overutilized,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRecord {
    pub kind: NodeKind,
    pub base_period: Time,
    pub cost: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunedRecord {
    pub node: NodeRecord,
    pub reason: PruneReason,
}

/// Full record of one branch-and-bound run.
#[derive(Debug, Clone, Default)]
pub struct SearchTrace {
    /// Nodes in the order they were extracted.
    pub extracted: Vec<NodeRecord>,
    pub pruned: Vec<PrunedRecord>,
    /// Base periods whose H subset was materialized, in creation order.
    pub materialized: Vec<Time>,
    pub steps: u64,
    pub max_frontier: usize,
}

impl From<&SearchNode> for NodeRecord {
    fn from(n: &SearchNode) -> Self {
        NodeRecord {
            kind: n.kind,
            base_period: n.base_period,
            cost: n.cost.clone(),
        }
    }
}

struct Search<'a> {
    set: &'a TaskSet,
    chain: VChain,
    /// Indexed by L; filled lazily when the candidate for L is created.
    subsets: Vec<Option<HSubset>>,
    slack: Rational,
    frontier: BinaryHeap<SearchNode>,
    trace: SearchTrace,
}

impl<'a> Search<'a> {
    fn new(set: &'a TaskSet) -> Self {
        let top = set.min_period() as usize;
        Search {
            set,
            chain: build_v_chain(set),
            subsets: vec![None; top + 1],
            slack: Rational::one() - set.baseline_utilization(),
            frontier: BinaryHeap::new(),
            trace: SearchTrace::default(),
        }
    }

    fn offer(&mut self, node: SearchNode) {
        let reason = if node.cost >= Rational::one() {
            Some(PruneReason::ObjectiveCeiling)
        } else if node.is_candidate() && node.growth > self.slack {
            Some(PruneReason::Overutilized)
        } else {
            None
        };
        match reason {
            Some(reason) => self.trace.pruned.push(PrunedRecord {
                node: (&node).into(),
                reason,
            }),
            None => {
                self.frontier.push(node);
                self.trace.max_frontier = self.trace.max_frontier.max(self.frontier.len());
            }
        }
    }

    fn h_term(&mut self, base: Time, index: usize) -> Rational {
        let slot = &mut self.subsets[base as usize];
        if slot.is_none() {
            *slot = Some(HSubset::build(self.set, base));
            self.trace.materialized.push(base);
        }
        slot.as_ref().unwrap().elements[index].value.clone()
    }

    fn run(&mut self) -> Option<Time> {
        let m = self.set.len();
        let top = self.set.min_period();
        self.trace.steps = 1;
        self.offer(SearchNode {
            kind: NodeKind::Spine,
            base_period: top,
            cost: self.chain.first.clone(),
            growth: Rational::zero(),
        });

        while let Some(node) = self.frontier.pop() {
            self.trace.extracted.push((&node).into());
            match node.kind {
                NodeKind::Candidate { consumed } if consumed == m => {
                    return Some(node.base_period);
                }
                NodeKind::Candidate { consumed } => {
                    let term = self.h_term(node.base_period, consumed);
                    self.trace.steps += 1;
                    self.offer(SearchNode {
                        kind: NodeKind::Candidate {
                            consumed: consumed + 1,
                        },
                        base_period: node.base_period,
                        cost: &node.cost + &term,
                        growth: &node.growth + &term,
                    });
                }
                NodeKind::Spine => {
                    let base = node.base_period;
                    let term = self.h_term(base, 0);
                    self.trace.steps += 1;
                    self.offer(SearchNode {
                        kind: NodeKind::Candidate { consumed: 1 },
                        base_period: base,
                        cost: &node.cost + &term,
                        growth: term,
                    });
                    if base > 1 {
                        let delta = self.chain.delta(base);
                        self.trace.steps += 1;
                        self.offer(SearchNode {
                            kind: NodeKind::Spine,
                            base_period: base - 1,
                            cost: &node.cost + &delta,
                            growth: Rational::zero(),
                        });
                    }
                }
            }
        }
        None
    }
}

/// Branch-and-bound with the full search trace.
pub fn bnb_optimize_traced(
    set: &TaskSet,
) -> (Result<OptimizationResult, OptimizeError>, SearchTrace) {
    let mut search = Search::new(set);
    let found = search.run();
    let trace = search.trace;
    let pruned = trace.pruned.len() as u64;
    let result = match found {
        None => Err(OptimizeError::NoFeasibleBasePeriod {
            steps: trace.steps,
            pruned,
        }),
        Some(base) => {
            let table: Vec<ObjectiveBreakdown> = trace
                .materialized
                .iter()
                .map(|&l| objective::objective(set, l).expect("L within [1, T1]"))
                .collect();
            let best = table
                .iter()
                .find(|b| b.base_period == base)
                .cloned()
                .expect("optimum was materialized");
            debug_assert!(best.feasible);
            Ok(OptimizationResult {
                method: Method::Bnb,
                best_base_period: base,
                best,
                table,
                steps: trace.steps,
                pruned,
                max_frontier: trace.max_frontier,
                tie_break: TIE_BREAK_RULE.to_string(),
            })
        }
    };
    (result, trace)
}

pub fn bnb_optimize(set: &TaskSet) -> Result<OptimizationResult, OptimizeError> {
    bnb_optimize_traced(set).0
}

pub fn optimize(set: &TaskSet, method: Method) -> Result<OptimizationResult, OptimizeError> {
    match method {
        Method::Oracle => brute_force_optimize(set),
        Method::Bnb => bnb_optimize(set),
    }
}

/// Step count of a completed run of `method` on `set`, feasible or not.
pub fn count_steps(method: Method, set: &TaskSet) -> u64 {
    match method {
        Method::Oracle => brute_force_steps(set),
        Method::Bnb => bnb_optimize_traced(set).1.steps,
    }
}

/// Outcome pair of running both routes.
#[derive(Debug, Clone)]
pub struct CheckedRun {
    pub oracle: Result<OptimizationResult, OptimizeError>,
    pub bnb: Result<OptimizationResult, OptimizeError>,
}

impl CheckedRun {
    pub fn run(set: &TaskSet) -> Self {
        CheckedRun {
            oracle: brute_force_optimize(set),
            bnb: bnb_optimize(set),
        }
    }

    /// Same feasibility verdict and, when feasible, same `L` and exactly the same `F`.
    pub fn agrees(&self) -> bool {
        match (&self.oracle, &self.bnb) {
            (Ok(a), Ok(b)) => a.best_base_period == b.best_base_period && a.best.f == b.best.f,
            (Err(_), Err(_)) => true,
            _ => false,
        }
    }

    pub fn oracle_steps(&self) -> u64 {
        steps_of(&self.oracle)
    }

    pub fn bnb_steps(&self) -> u64 {
        steps_of(&self.bnb)
    }
}

fn steps_of(r: &Result<OptimizationResult, OptimizeError>) -> u64 {
    match r {
        Ok(r) => r.steps,
        Err(OptimizeError::NoFeasibleBasePeriod { steps, .. }) => *steps,
    }
}
