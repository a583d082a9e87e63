use std::sync::Arc;

use rayon::prelude::*;

use super::episode::{run_episode, TraceLevel};
use crate::env::{burst_adversary, changepoint_adversary, regret, BurstSpec, ChangepointSpec, LossMatrix};
use crate::protocol::ProtocolSettings;
use crate::rng::derive_seed;
use crate::{Error, Result};

const RUN_STREAM: u64 = 1;
const ENV_STREAM: u64 = 2;
const SHARED_STREAM: u64 = 3;
const PRIVATE_STREAM: u64 = 4;

/// Where each run's loss matrix comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum AdversarySpec {
    Burst(BurstSpec),
    Changepoint(ChangepointSpec),
    /// The same matrix in every run.
    Fixed(Arc<LossMatrix>),
}

impl AdversarySpec {
    pub fn num_arms(&self) -> usize {
        match self {
            AdversarySpec::Burst(s) => s.num_arms,
            AdversarySpec::Changepoint(s) => s.num_arms(),
            AdversarySpec::Fixed(m) => m.num_arms(),
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            AdversarySpec::Burst(s) => s.horizon,
            AdversarySpec::Changepoint(s) => s.horizon,
            AdversarySpec::Fixed(m) => m.horizon(),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Arc<LossMatrix>> {
        Ok(match self {
            AdversarySpec::Burst(s) => Arc::new(burst_adversary(s, seed)?),
            AdversarySpec::Changepoint(s) => Arc::new(changepoint_adversary(s, seed)?),
            AdversarySpec::Fixed(m) => Arc::clone(m),
        })
    }
}

/// Seeds of one run. The loss matrix depends on the run seed only, so two protocols
/// given the same run seeds face the same adversaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSeeds {
    pub run: u64,
    pub env: u64,
    pub shared: u64,
}

impl RunSeeds {
    pub fn from_run_seed(run: u64) -> Self {
        Self {
            run,
            env: derive_seed(run, ENV_STREAM, 0),
            shared: derive_seed(run, SHARED_STREAM, 0),
        }
    }

    pub fn private(&self, players: usize) -> Vec<u64> {
        (1..=players as u64).map(|m| derive_seed(self.run, PRIVATE_STREAM, m)).collect()
    }
}

/// `n` run seeds derived from one experiment seed. A longer list extends a shorter
/// one, so adding runs never changes earlier ones.
pub fn run_seeds(base: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| derive_seed(base, RUN_STREAM, i)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSpec {
    pub settings: ProtocolSettings,
    pub adversary: AdversarySpec,
    pub environment: String,
    pub players: usize,
    /// One run per entry.
    pub seeds: Vec<u64>,
    pub checkpoints: Vec<usize>,
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run_id: usize,
    pub seed: u64,
    /// Cumulative regret at each checkpoint.
    pub regret: Vec<f64>,
    pub final_estimate: f64,
    pub comm_slots: usize,
    pub explore_collisions: usize,
    pub sync_failures: usize,
    pub decode_errors: usize,
}

/// Mean and sample standard deviation of regret across runs, per checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub protocol: String,
    pub environment: String,
    pub checkpoints: Vec<usize>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub n_runs: usize,
    pub runs: Vec<RunResult>,
}

pub fn run_one(spec: &MonteCarloSpec, run_id: usize, seed: u64) -> Result<RunResult> {
    let seeds = RunSeeds::from_run_seed(seed);
    let loss = spec.adversary.generate(seeds.env)?;
    let trace = run_episode(
        &spec.settings,
        &loss,
        spec.players,
        seeds.shared,
        &seeds.private(spec.players),
        TraceLevel::Actions,
    )?;
    Ok(RunResult {
        run_id,
        seed,
        regret: regret(&loss, &trace.actions, spec.players, &spec.checkpoints)?,
        final_estimate: trace.final_estimate(),
        comm_slots: trace.comm_slots(),
        explore_collisions: trace.explore_collisions,
        sync_failures: trace.sync_failures,
        decode_errors: trace.decode_errors,
    })
}

/// Runs every seed (in parallel) and aggregates in run order.
pub fn monte_carlo(spec: &MonteCarloSpec) -> Result<RegretReport> {
    if spec.seeds.is_empty() {
        return Err(Error::invalid("need at least one run"));
    }
    let horizon = spec.adversary.horizon();
    if spec.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("checkpoints must be strictly increasing"));
    }
    if let Some(&c) = spec.checkpoints.iter().find(|&&c| c == 0 || c > horizon) {
        return Err(Error::invalid(format!("checkpoint {c} outside 1..={horizon}")));
    }
    let runs = spec
        .seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| run_one(spec, i, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(spec, runs))
}

fn aggregate(spec: &MonteCarloSpec, runs: Vec<RunResult>) -> RegretReport {
    let n = runs.len();
    let cps = spec.checkpoints.len();
    let mut mean = vec![0.0; cps];
    let mut std = vec![0.0; cps];
    for c in 0..cps {
        let xs: Vec<f64> = runs.iter().map(|r| r.regret[c]).collect();
        let mu = xs.iter().sum::<f64>() / n as f64;
        mean[c] = mu;
        std[c] = if n > 1 {
            (xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
    }
    RegretReport {
        protocol: spec.settings.protocol.name().to_owned(),
        environment: spec.environment.clone(),
        checkpoints: spec.checkpoints.clone(),
        mean,
        std,
        n_runs: n,
        runs,
    }
}
