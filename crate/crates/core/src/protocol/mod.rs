//! Decentralized agents.
//!
//! Four leader/follower protocols coordinate purely through collisions: the leader
//! samples a set of `M` arms, tells each follower its arm over the collision channel,
//! and everyone explores their arm for a block of `tau` slots. They differ in what
//! is known about the adversary and how the channel is protected:
//!
//! - [`Protocol::AlphaAware`]: local attackability known, binary index with a
//!   repetition code long enough that no burst can flip a bit;
//! - [`Protocol::BetaAware`]: global attackability known, short one-hot code plus an
//!   error report that makes the leader discard corrupted phases;
//! - [`Protocol::AlphaUnaware`]: escalates an estimate of the local attackability
//!   whenever a follower detects corruption, with a randomized-length sync block to
//!   keep everyone's estimate equal;
//! - [`Protocol::BetaUnaware`]: counts detected attacks and escalates its estimate of
//!   the global attackability at periodic update points.
//!
//! [`Protocol::ParallelExp3`] is the uncoordinated baseline.
//!
//! Agents see nothing but their own observations:
//!
//! ```
//! use mpmab::env::Observation;
//! use mpmab::protocol::{make_agents, Protocol, ProtocolSettings};
//!
//! let settings = ProtocolSettings::new(Protocol::AlphaAware).with_alpha(0.2);
//! let mut agents = make_agents(&settings, 3, 5, 1000, 7, &[1, 2, 3]).unwrap();
//! let arm = agents[1].step(None, 1);
//! let _next = agents[1].step(Some(Observation { arm, loss: 0.0 }), 2);
//! ```

mod agent;
mod exp3;
mod layout;
mod params;
mod sync;

use std::fmt;
use std::str::FromStr;

pub use agent::{CoordinatedAgent, PhaseRecord};
pub use exp3::Exp3Agent;
pub use layout::PhaseLayout;
pub use params::{
    ceil_pow, escalate, params_alpha_aware, params_alpha_unaware, params_beta_aware,
    params_beta_unaware, update_period, EstimateGrid, ProtocolParams, BETA_FLOOR,
};
pub use sync::{phase_sync_rounds, sync_round_count};

use crate::env::Observation;
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    AlphaAware,
    BetaAware,
    AlphaUnaware,
    BetaUnaware,
    ParallelExp3,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [
        Protocol::AlphaAware,
        Protocol::BetaAware,
        Protocol::AlphaUnaware,
        Protocol::BetaUnaware,
        Protocol::ParallelExp3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::AlphaAware => "alpha-aware",
            Protocol::BetaAware => "beta-aware",
            Protocol::AlphaUnaware => "alpha-unaware",
            Protocol::BetaUnaware => "beta-unaware",
            Protocol::ParallelExp3 => "parallel-exp3",
        }
    }

    /// Whether the protocol uses the leader/follower machinery.
    pub fn is_coordinated(self) -> bool {
        self != Protocol::ParallelExp3
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == norm)
            .ok_or_else(|| Error::Unknown {
                what: "protocol",
                name: s.to_owned(),
            })
    }
}

/// Protocol choice plus the inputs its schedule needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSettings {
    pub protocol: Protocol,
    /// Known local attackability exponent (alpha-aware only).
    pub alpha: f64,
    /// Known global attackability exponent (beta-aware only).
    pub beta: f64,
    /// Margin of alpha-aware; escalation step of the unaware protocols.
    pub epsilon: f64,
    /// Start the unaware protocols from this estimate instead of the bottom of the
    /// grid (rounded to the nearest grid value).
    pub initial_estimate: Option<f64>,
}

impl ProtocolSettings {
    pub fn new(protocol: Protocol) -> Self {
        Self {
            protocol,
            alpha: 0.0,
            beta: 0.0,
            epsilon: 0.01,
            initial_estimate: None,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_initial_estimate(mut self, estimate: f64) -> Self {
        self.initial_estimate = Some(estimate);
        self
    }

    /// The schedule the agents start from.
    pub fn initial_params(&self, players: usize, num_arms: usize, horizon: usize) -> Result<ProtocolParams> {
        match self.protocol {
            Protocol::AlphaAware => params_alpha_aware(players, num_arms, horizon, self.alpha, self.epsilon),
            Protocol::BetaAware => params_beta_aware(players, num_arms, horizon, self.beta),
            Protocol::AlphaUnaware | Protocol::BetaUnaware => {
                let base = if self.protocol == Protocol::BetaUnaware { BETA_FLOOR } else { 0.0 };
                let grid = EstimateGrid { base, step: self.epsilon };
                let level = self
                    .initial_estimate
                    .map_or(0, |e| (((e - base) / self.epsilon).round().max(0.0) as usize).min(grid.top_level()));
                if self.protocol == Protocol::AlphaUnaware {
                    params_alpha_unaware(players, num_arms, horizon, grid.value(level), self.epsilon)
                } else {
                    params_beta_unaware(players, num_arms, horizon, grid.value(level), self.epsilon)
                }
            }
            Protocol::ParallelExp3 => Err(Error::invalid("parallel EXP3 has no schedule")),
        }
    }
}

/// Kind of slot an agent was in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotKind {
    Assign,
    Uplink,
    Downlink,
    Explore,
}

/// Debug view of an agent after its most recent action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentSnapshot {
    pub player: usize,
    pub phase: usize,
    pub kind: SlotKind,
    pub slot_in_phase: usize,
    pub estimate: f64,
    /// `F` (or `F1` for the beta protocols).
    pub flag: bool,
    /// `F2` of beta-unaware.
    pub flag2: bool,
    pub round_counter: usize,
    pub attack_counter: usize,
    pub assigned_arm: usize,
}

/// One player. Self-contained, so agents can move between threads.
#[derive(Debug, Clone)]
pub enum AgentState {
    Coordinated(CoordinatedAgent),
    Exp3(Exp3Agent),
}

impl AgentState {
    /// Takes the player's own observation of slot `t - 1` (none at `t = 1`) and
    /// returns her arm for slot `t`.
    pub fn step(&mut self, last: Option<Observation>, t: usize) -> usize {
        match self {
            AgentState::Coordinated(a) => a.step(last, t),
            AgentState::Exp3(a) => a.step(last, t),
        }
    }

    pub fn index(&self) -> usize {
        match self {
            AgentState::Coordinated(a) => a.index(),
            AgentState::Exp3(a) => a.index(),
        }
    }

    pub fn as_coordinated(&self) -> Option<&CoordinatedAgent> {
        match self {
            AgentState::Coordinated(a) => Some(a),
            AgentState::Exp3(_) => None,
        }
    }

    /// `None` for EXP3 agents, which have no phases.
    pub fn snapshot(&self) -> Option<AgentSnapshot> {
        self.as_coordinated().map(CoordinatedAgent::snapshot)
    }

    /// Current attackability estimate; NaN for EXP3 agents.
    pub fn estimate(&self) -> f64 {
        self.as_coordinated().map_or(f64::NAN, CoordinatedAgent::estimate)
    }
}

/// Builds the `M` players of one run. Player 1 leads and player `m` listens on arm
/// `m`. `private_seeds[m - 1]` seeds player `m`'s own randomness; `shared_seed` is
/// known to all.
pub fn make_agents(
    settings: &ProtocolSettings,
    players: usize,
    num_arms: usize,
    horizon: usize,
    shared_seed: u64,
    private_seeds: &[u64],
) -> Result<Vec<AgentState>> {
    if private_seeds.len() != players {
        return Err(Error::LengthMismatch {
            expected: players,
            actual: private_seeds.len(),
        });
    }
    if settings.protocol == Protocol::ParallelExp3 {
        return baseline_parallel_exp3(players, num_arms, horizon, private_seeds);
    }
    (1..=players)
        .map(|m| {
            CoordinatedAgent::new(
                settings,
                m,
                players,
                num_arms,
                horizon,
                shared_seed,
                seeded(private_seeds[m - 1]),
            )
            .map(AgentState::Coordinated)
        })
        .collect()
}

/// `M` independent EXP3 players.
pub fn baseline_parallel_exp3(
    players: usize,
    num_arms: usize,
    horizon: usize,
    seeds: &[u64],
) -> Result<Vec<AgentState>> {
    if players == 0 || players > num_arms {
        return Err(Error::invalid(format!(
            "need 1 <= M <= K, got M = {players}, K = {num_arms}"
        )));
    }
    if seeds.len() != players {
        return Err(Error::LengthMismatch {
            expected: players,
            actual: seeds.len(),
        });
    }
    Ok(seeds
        .iter()
        .enumerate()
        .map(|(i, &s)| AgentState::Exp3(Exp3Agent::new(i + 1, num_arms, horizon, seeded(s))))
        .collect())
}
