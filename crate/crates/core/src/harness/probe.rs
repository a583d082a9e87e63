//! Measures how often a targeted attack on the sync block splits the players'
//! estimates.
//!
//! The adversary knows the protocol and the slot layout but not the shared seed, so
//! it cannot know how many sync rounds will be played. It jams one follower's
//! downlink in one fixed round; the split happens only if that round is the last
//! one played.

use rayon::prelude::*;

use super::episode::{play, TraceLevel};
use crate::env::LossMatrix;
use crate::protocol::{make_agents, PhaseLayout, Protocol, ProtocolSettings};
use crate::rng::derive_seed;
use crate::{Error, Result};

const TRIAL_STREAM: u64 = 0x50_52_4F_42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetRound {
    /// Round `ceil(T^xi)`, the largest count that can be drawn.
    Last,
    Index(usize),
}

/// Jam every slot of `follower`'s downlink in `round` of the first phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyncAttack {
    pub round: TargetRound,
    pub follower: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    /// Must be alpha-unaware; `initial_estimate` selects the schedule probed.
    pub settings: ProtocolSettings,
    pub players: usize,
    pub num_arms: usize,
    pub horizon: usize,
    pub attack: Option<SyncAttack>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResult {
    pub trials: usize,
    pub failures: usize,
    /// `ceil(T^xi)` of the probed schedule.
    pub max_rounds: usize,
}

impl ProbeResult {
    pub fn rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    /// Standard deviation of the rate if each trial fails with probability `p`.
    pub fn binomial_sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Fraction of trials (independent shared seeds) after which the players' estimates
/// differ at the end of the first sync block.
pub fn sync_failure_probe(spec: &ProbeSpec) -> Result<ProbeResult> {
    if spec.settings.protocol != Protocol::AlphaUnaware {
        return Err(Error::invalid("the sync probe drives the alpha-unaware protocol"));
    }
    if spec.trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let (m, k, t) = (spec.players, spec.num_arms, spec.horizon);
    let params = spec.settings.initial_params(m, k, t)?;
    let max_rounds = params.max_sync_rounds(t);
    let layout = PhaseLayout::new(Protocol::AlphaUnaware, m, k, &params, max_rounds);

    // one slot past the longest possible sync block closes it
    let sim_horizon = layout.comm_len() + 1;
    let mut losses = vec![0.0; k * sim_horizon];
    if let Some(attack) = spec.attack {
        let round = match attack.round {
            TargetRound::Last => max_rounds,
            TargetRound::Index(r) => r,
        };
        if !(1..=max_rounds).contains(&round) {
            return Err(Error::invalid(format!("round {round} outside 1..={max_rounds}")));
        }
        if !(2..=m).contains(&attack.follower) {
            return Err(Error::invalid(format!("follower {} outside 2..={m}", attack.follower)));
        }
        let first = layout.downlink_offset(round, attack.follower);
        let row = (attack.follower - 1) * sim_horizon;
        for slot in first..first + layout.downlink_each {
            losses[row + slot] = 1.0;
        }
    }
    let loss = LossMatrix::new(k, sim_horizon, losses)?;

    let failures = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let base = derive_seed(spec.seed, TRIAL_STREAM, trial as u64);
            let private: Vec<u64> = (1..=m as u64).map(|i| derive_seed(base, 1, i)).collect();
            let agents = make_agents(&spec.settings, m, k, t, derive_seed(base, 0, 0), &private)?;
            let trace = play(agents, &loss, m, TraceLevel::Actions)?;
            let after: Vec<f64> = trace
                .agents
                .iter()
                .filter_map(|a| a.as_coordinated())
                .map(|a| a.records()[0].estimate_after)
                .collect();
            Ok(after.iter().any(|&e| e != after[0]) as usize)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();

    Ok(ProbeResult {
        trials: spec.trials,
        failures,
        max_rounds,
    })
}
