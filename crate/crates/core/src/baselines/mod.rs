//! Baseline policies, canonical and random item streams, and the adaptive
//! lower-bound adversary.

mod lower_bound;
mod policies;
mod rng;
mod streams;

pub use lower_bound::{
    lb_adversary_item, lb_adversary_next, lb_horizon, lb_potential_monitor, lb_slack_update,
    run_lb_game, LbOutcome, MonitorReport, SlackVector,
};
pub use policies::{
    policy_benade2, policy_deficit_greedy, policy_round_robin, policy_util_greedy, Benade2,
    BenadeParams, DeficitGreedy, FixedAgent, ItemPolicy, PotentialPolicy, RoundRobin, UtilGreedy,
};
pub use rng::StreamRng;
pub use streams::{pdm_stream_generate, stream_generate, StreamKind, StreamSpec};
