//! Asynchronous multitask contextual-bandit simulator.
//!
//! Instances activate independently each round, draw fresh contexts, act
//! greedily on estimates frozen at the last batch boundary, and refit on
//! doubling batches once they have collected enough observations.

mod eligibility;
mod rng;
mod schedule;
mod sim;
mod world;

pub use eligibility::{eligibility_set, eligibility_threshold, EligibilityMode, EligibilityRule};
pub use rng::EnvStreams;
pub use schedule::{build_schedule, BatchSchedule};
pub use sim::{
    choose_arm, choose_arm_shared, gram_min_eigen_ratio, min_eigen_probe, regret_summary,
    run_episode, EigenRecord, PolicySpec, RefitEvent, RegretSummary, RegretTrace,
};
pub use world::{BanditModel, BanditWorld, ContextSpec, WorldParams};
