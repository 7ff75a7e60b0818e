//! Optimal limited-duration quarantine schedules for the controlled SIR model.
//!
//! The control is the reproduction number `σ(t)`: soft quarantine `σ2`
//! everywhere on `[0, T]` except a single hard-quarantine window
//! `[t1, t1 + η)` at `σ1`, with `η ≤ τ`, and free spread at `σ0` after `T`.
//! The objective is `J = x∞ + κ∫σ`.
//!
//! * [`integrate`] and [`final_size`] evaluate trajectories and `x∞`.
//! * [`switching`] evaluates the functions `w`, `α`, `h`, `z` and the
//!   closed-form gradient of `J`.
//! * [`planner`] turns their signs and crossings into the optimal `(t*, η)`.
//! * [`oracle`] maximizes `J` by brute force for cross-checking.
//! * [`pmp`] checks the maximum-principle conditions along a candidate.

pub mod error;
pub mod final_size;
pub mod integrate;
pub mod model;
pub mod oracle;
pub mod planner;
pub mod pmp;
pub mod problem;
pub mod roots;
pub mod switching;

pub use error::{Error, Result};
pub use final_size::{x_infinity, x_infinity_partials};
pub use integrate::{conserved_residual, integrate, IntegratorConfig, Trajectory};
pub use model::{EpidemicState, ModelParams, Schedule};

pub use planner::{plan, CaseId, PlanResult};
pub use problem::{objective, Problem};
