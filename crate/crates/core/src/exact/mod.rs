//! Exact solver for the unit-scale proportionality game in rational
//! arithmetic: the one-step LP, frontier sets `D^k`, the AUX horizon and
//! the EXP policy.

mod aux;
mod ext;
mod frontier;
mod lp;
mod scaled;

pub use aux::{
    aux, exp_policy, exp_policy_with, rational_from_f64, ExpPolicy, FrontierChain, SurplusState,
    DEFAULT_K_MAX,
};
pub use ext::{parse_rational, ExtRational};
pub use frontier::{
    dominates, next_frontier, next_frontier_rational, next_frontier_unpruned, Frontier,
    FrontierPoint, DEFAULT_FRONTIER_CAP,
};
pub use lp::{lp_feasible, lp_solve};
