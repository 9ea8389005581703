//! Base-period optimization for cyclic executives.
//!
//! Given a set of periodic tasks `(wcet, period)` and a per-switch overhead `p`,
//! the crate picks the base period `L` that minimizes the extra CPU load of a
//! static cyclic timetable, builds that timetable and checks it.
//!
//! * [`task`]: the task model and its JSON input format.
//! * [`objective`]: period quantization and `F(L) = F₁(L) + F₂(L)`.
//! * [`optimizer`]: exhaustive oracle and branch-and-bound search for `L`.
//! * [`schedule`]: block slicing, cycle layout and hyperperiod.
//! * [`verify`]: hyperperiod replay, admissibility conditions and deadlines.
//! * [`bench`]: instance generators and the step-count comparison.
//! * [`cli`]: the `cyclosched` command line.

pub mod bench;
pub mod cli;
pub mod objective;
pub mod optimizer;
pub mod rational;
pub mod schedule;
pub mod task;
pub mod verify;

pub use objective::{objective, ObjectiveBreakdown};
pub use optimizer::{bnb_optimize, brute_force_optimize, OptimizationResult};
pub use rational::Rational;
pub use schedule::{build_schedule, CyclicSchedule};
pub use task::{Task, TaskSet};
