//! Running experiments: episodes on a shared slot clock, Monte-Carlo regret
//! statistics, the sync attack probe, bound formulas and CSV reports.

mod bounds;
mod episode;
mod monte_carlo;
mod probe;
mod report;

pub use bounds::{theory_bound, BoundModel};
pub use episode::{play, run_episode, RunTrace, SlotRecord, TraceLevel};
pub use monte_carlo::{
    monte_carlo, run_one, run_seeds, AdversarySpec, MonteCarloSpec, RegretReport, RunResult, RunSeeds,
};
pub use probe::{sync_failure_probe, ProbeResult, ProbeSpec, SyncAttack, TargetRound};
pub use report::{
    read_aggregate_csv, write_aggregate_csv, write_runs_csv, AggregateRow, AGGREGATE_COLUMNS, RUN_COLUMNS,
};
