//! The boundary random walk: step law, simulation, and exact first-passage
//! laws.

mod landing;
mod sim;
mod solver;
mod step;

pub use landing::LandingSampler;
pub use sim::{
    run_first_passage, run_to_level, two_walk_race, FirstPassageRecord, LevelExit, Outcome, RaceOutcome, RaceScheduler,
    Walker, DEFAULT_BUDGET,
};
pub use solver::{
    crossing_probability, hitting_prob_exact, overshoot_distribution_exact, overshoot_pmf, FirstPassageSolver,
    HittingDistribution,
};
pub use step::StepDistribution;
