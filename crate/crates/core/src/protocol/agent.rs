//! Leader and follower state machine shared by the four coordination protocols.
//!
//! A phase is a fixed sequence of stages. Every stage length is a function of
//! `(M, K, T)`, the agent's current estimate and the shared seed, so agents that hold
//! the same estimate walk through identical slot layouts without talking about it.
//!
//! | protocol      | stages of one phase                                            |
//! |---------------|----------------------------------------------------------------|
//! | alpha-aware   | assign(2..M), explore                                          |
//! | beta-aware    | assign(2..M), report, explore                                  |
//! | alpha-unaware | assign(2..M), N x [up, down(2..M)], explore                    |
//! | beta-unaware  | assign(2..M), report, at update points N x [down(2..M), up], explore |
//!
//! Player `m` listens on arm `m`. A sender writes bit 1 by pulling the receiver's arm
//! and bit 0 by pulling her own; players not involved in a transfer sit on their own
//! arm. Uplinks are simultaneous: every follower with something to report pulls
//! arm 1 while the leader listens there.

use rand::seq::SliceRandom;
use rand::Rng;

use super::params::{
    ceil_pow, params_alpha_aware, params_alpha_unaware, params_beta_aware, params_beta_unaware,
    update_period, EstimateGrid, ProtocolParams, BETA_FLOOR,
};
use super::sync::phase_sync_rounds;
use super::{AgentSnapshot, Protocol, ProtocolSettings, SlotKind};
use crate::codec;
use crate::env::Observation;
use crate::rng::SimRng;
use crate::selector::{
    marginals, sample_meta_arm, weights_from_estimates, EstimatorState, MetaArm, PhaseFeedback,
};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Assign { to: usize },
    Report,
    SyncUp { round: usize },
    SyncDown { round: usize, to: usize },
    Explore,
}

impl Stage {
    fn kind(self) -> SlotKind {
        match self {
            Stage::Assign { .. } => SlotKind::Assign,
            Stage::Report | Stage::SyncUp { .. } => SlotKind::Uplink,
            Stage::SyncDown { .. } => SlotKind::Downlink,
            Stage::Explore => SlotKind::Explore,
        }
    }
}

/// What one agent did in one phase. Phases cut off by the horizon are included.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    pub phase: usize,
    /// First slot of the phase.
    pub start: usize,
    pub params: ProtocolParams,
    pub estimate_before: f64,
    pub estimate_after: f64,
    /// Sync rounds this phase (0 when the phase has no sync block).
    pub sync_rounds: usize,
    /// Arm explored this phase.
    pub arm: usize,
    /// Leader only: the arm sent to each player (index `m - 1`; entry 0 is her own).
    pub assignment: Vec<usize>,
    /// Follower only: blocks decoded as all ones (one-hot code) or the decoded index.
    pub decoded: Vec<usize>,
    /// Follower, binary index code: the corrupted index fell past `K` and was clamped.
    pub clamped: bool,
    /// Leader only: whether the estimator took this phase's feedback.
    pub success: Option<bool>,
}

#[derive(Debug, Clone)]
struct LeaderState {
    estimator: EstimatorState,
    chosen: MetaArm,
    assignment: Vec<usize>,
    marginal: f64,
    observed: f64,
    // assignment codeword currently being sent
    codeword: Vec<bool>,
}

/// One player of a coordination protocol.
#[derive(Debug, Clone)]
pub struct CoordinatedAgent {
    protocol: Protocol,
    index: usize,
    players: usize,
    num_arms: usize,
    horizon: usize,
    known_attack: f64,
    grid: EstimateGrid,
    level: usize,
    shared_seed: u64,
    rng: SimRng,

    phase: usize,
    params: ProtocolParams,
    stage: Stage,
    pos: usize,
    len: usize,
    slot_in_phase: usize,
    last_kind: SlotKind,
    last_slot_in_phase: usize,
    buf: Vec<bool>,

    flag: bool,
    flag2: bool,
    sync_rounds: usize,
    round_counter: usize,
    attack_counter: usize,
    assigned_arm: usize,

    leader: Option<LeaderState>,
    completed_comm: usize,
    completed_explore: usize,
    records: Vec<PhaseRecord>,
}

impl CoordinatedAgent {
    /// Player `index` of `players`. `settings` fixes the protocol, the known
    /// attackability of the aware variants and the step `epsilon`.
    pub fn new(
        settings: &ProtocolSettings,
        index: usize,
        players: usize,
        num_arms: usize,
        horizon: usize,
        shared_seed: u64,
        private_rng: SimRng,
    ) -> Result<Self> {
        let protocol = settings.protocol;
        let known_attack = match protocol {
            Protocol::AlphaAware => settings.alpha,
            Protocol::BetaAware => settings.beta,
            _ => 0.0,
        };
        let epsilon = settings.epsilon;
        if !(epsilon > 0.0) {
            return Err(crate::Error::invalid("epsilon must be positive"));
        }
        if !(1..=players).contains(&index) {
            return Err(crate::Error::invalid(format!("player {index} outside 1..={players}")));
        }
        let base = if protocol == Protocol::BetaUnaware {
            BETA_FLOOR
        } else {
            0.0
        };
        let grid = EstimateGrid { base, step: epsilon };
        let level = match settings.initial_estimate {
            Some(e) if (base..=1.0).contains(&e) => (((e - base) / epsilon).round() as usize).min(grid.top_level()),
            Some(e) => {
                return Err(crate::Error::invalid(format!(
                    "initial estimate {e} outside [{base}, 1]"
                )))
            }
            None => 0,
        };
        let params = schedule(protocol, players, num_arms, horizon, known_attack, epsilon, grid.value(level))?;
        let mut agent = Self {
            protocol,
            index,
            players,
            num_arms,
            horizon,
            known_attack,
            grid,
            level,
            shared_seed,
            rng: private_rng,
            phase: 0,
            params,
            stage: Stage::Explore,
            pos: 0,
            len: 0,
            slot_in_phase: 0,
            last_kind: SlotKind::Assign,
            last_slot_in_phase: 0,
            buf: Vec::new(),
            flag: false,
            flag2: false,
            sync_rounds: 0,
            round_counter: 0,
            attack_counter: 0,
            assigned_arm: index,
            leader: (index == 1).then(|| LeaderState {
                estimator: EstimatorState::new(num_arms),
                chosen: MetaArm::new((1..=players).collect(), num_arms).expect("M <= K"),
                assignment: Vec::new(),
                marginal: 1.0,
                observed: 0.0,
                codeword: Vec::new(),
            }),
            completed_comm: 0,
            completed_explore: 0,
            records: Vec::new(),
        };
        agent.begin_phase(1)?;
        Ok(agent)
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn is_leader(&self) -> bool {
        self.index == 1
    }

    /// Current attackability estimate (or the known value for the aware protocols).
    pub fn estimate(&self) -> f64 {
        match self.protocol {
            Protocol::AlphaUnaware | Protocol::BetaUnaware => self.grid.value(self.level),
            _ => self.known_attack,
        }
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn records(&self) -> &[PhaseRecord] {
        &self.records
    }

    /// Leader's estimator; `None` for followers.
    pub fn estimator(&self) -> Option<&EstimatorState> {
        self.leader.as_ref().map(|l| &l.estimator)
    }

    /// Slots spent in finished communication stages, finished exploration stages,
    /// and in the stage still open when play stopped. The three add up to the number
    /// of slots played.
    pub fn slot_accounting(&self) -> (usize, usize, usize) {
        let open = if self.pos == self.len && self.len > 0 {
            match self.stage {
                Stage::Explore => return (self.completed_comm, self.completed_explore + self.pos, 0),
                _ => return (self.completed_comm + self.pos, self.completed_explore, 0),
            }
        } else {
            self.pos
        };
        (self.completed_comm, self.completed_explore, open)
    }

    pub fn snapshot(&self) -> AgentSnapshot {
        AgentSnapshot {
            player: self.index,
            phase: self.phase,
            kind: self.last_kind,
            slot_in_phase: self.last_slot_in_phase,
            estimate: self.estimate(),
            flag: self.flag,
            flag2: self.flag2,
            round_counter: self.round_counter,
            attack_counter: self.attack_counter,
            assigned_arm: self.assigned_arm,
        }
    }

    /// Feeds the previous slot's own observation (none at `t = 1`) and returns the
    /// arm to pull at slot `t`.
    pub fn step(&mut self, last: Option<Observation>, t: usize) -> usize {
        if let Some(obs) = last {
            self.absorb(obs);
        }
        while self.pos >= self.len {
            self.finish_stage(t);
        }
        let arm = self.action();
        self.last_kind = self.stage.kind();
        self.last_slot_in_phase = self.slot_in_phase;
        self.pos += 1;
        self.slot_in_phase += 1;
        arm
    }

    fn absorb(&mut self, obs: Observation) {
        match self.stage {
            Stage::Explore => {
                if let Some(l) = self.leader.as_mut() {
                    l.observed += obs.loss;
                }
            }
            _ => self.buf.push(obs.bit()),
        }
    }

    fn action(&self) -> usize {
        let me = self.index;
        match self.stage {
            Stage::Assign { to } => match &self.leader {
                Some(l) => {
                    if l.codeword[self.pos] {
                        to
                    } else {
                        me
                    }
                }
                None => me,
            },
            Stage::Report | Stage::SyncUp { .. } => {
                let bit = match self.protocol {
                    Protocol::BetaUnaware if matches!(self.stage, Stage::SyncUp { .. }) => self.flag2,
                    _ => self.flag,
                };
                if !self.is_leader() && bit {
                    1
                } else {
                    me
                }
            }
            Stage::SyncDown { to, .. } => {
                let bit = match self.protocol {
                    Protocol::BetaUnaware => self.flag2,
                    _ => self.flag,
                };
                if self.is_leader() && bit {
                    to
                } else {
                    me
                }
            }
            Stage::Explore => self.assigned_arm,
        }
    }

    fn set_stage(&mut self, stage: Stage) {
        self.stage = stage;
        self.pos = 0;
        self.buf.clear();
        self.len = match stage {
            Stage::Assign { .. } => self.assign_len(),
            Stage::Report => self.params.k_code,
            Stage::SyncUp { .. } | Stage::SyncDown { .. } => self.params.sync_len,
            Stage::Explore => self.params.tau,
        };
        if let (Stage::Assign { to }, Some(l)) = (stage, self.leader.as_mut()) {
            let arm = l.assignment[to - 1];
            let (k, h, c) = (self.num_arms, self.params.h, self.params.k_code);
            l.codeword = match self.protocol {
                Protocol::AlphaAware => codec::r_encode_index(arm, k, h),
                Protocol::AlphaUnaware => codec::e_encode(arm, k, h),
                _ => codec::e_encode(arm, k, c),
            }
            .expect("assignment arm and code length are valid")
            .bits()
            .to_vec();
        }
    }

    fn assign_len(&self) -> usize {
        let k = self.num_arms;
        match self.protocol {
            Protocol::AlphaAware => codec::index_bits(k) * self.params.h,
            Protocol::AlphaUnaware => k * self.params.h,
            _ => k * self.params.k_code,
        }
    }

    fn begin_phase(&mut self, t: usize) -> Result<()> {
        self.phase += 1;
        self.slot_in_phase = 0;
        let estimate = self.estimate();
        self.params = schedule(
            self.protocol,
            self.players,
            self.num_arms,
            self.horizon,
            self.known_attack,
            self.grid.step,
            estimate,
        )?;
        self.flag = false;
        self.sync_rounds = 0;
        if self.protocol == Protocol::BetaUnaware {
            self.round_counter += 1;
            if !self.is_leader() {
                self.flag2 = false;
            }
        }
        if self.protocol == Protocol::AlphaUnaware {
            self.sync_rounds = phase_sync_rounds(self.shared_seed, self.phase, self.params.xi, self.horizon);
        }

        let mut record = PhaseRecord {
            phase: self.phase,
            start: t,
            params: self.params,
            estimate_before: estimate,
            estimate_after: estimate,
            sync_rounds: self.sync_rounds,
            arm: self.index,
            assignment: Vec::new(),
            decoded: Vec::new(),
            clamped: false,
            success: None,
        };

        if let Some(l) = self.leader.as_mut() {
            let w = weights_from_estimates(&l.estimator, self.params.eta);
            let chosen = sample_meta_arm(&w, self.players, &mut self.rng)?;
            let probs = marginals(&w, self.players)?;
            let mut order = chosen.arms().to_vec();
            order.shuffle(&mut self.rng);
            l.marginal = probs[order[0] - 1];
            l.chosen = chosen;
            l.assignment = order;
            l.observed = 0.0;
            self.assigned_arm = l.assignment[0];
            record.arm = self.assigned_arm;
            record.assignment = l.assignment.clone();
        }
        self.records.push(record);
        self.set_stage(Stage::Assign { to: 2 });
        Ok(())
    }

    fn finish_stage(&mut self, t: usize) {
        let done = self.len;
        match self.stage {
            Stage::Explore => self.completed_explore += done,
            _ => self.completed_comm += done,
        }
        let next = match self.stage {
            Stage::Assign { to } => {
                if to == self.index {
                    self.decode_assignment();
                }
                if to < self.players {
                    Stage::Assign { to: to + 1 }
                } else {
                    match self.protocol {
                        Protocol::AlphaAware => Stage::Explore,
                        Protocol::BetaAware | Protocol::BetaUnaware => Stage::Report,
                        _ => Stage::SyncUp { round: 1 },
                    }
                }
            }
            Stage::Report => {
                if self.is_leader() {
                    self.flag = codec::r_decode(&self.buf);
                    if self.flag {
                        self.attack_counter += self.params.k_code;
                    }
                }
                if self.protocol == Protocol::BetaUnaware && self.at_update_point() {
                    self.flag2 = self.attack_counter >= ceil_pow(self.horizon, self.estimate());
                    self.sync_rounds = phase_sync_rounds(self.shared_seed, self.phase, self.params.xi, self.horizon);
                    self.current_record().sync_rounds = self.sync_rounds;
                    Stage::SyncDown { round: 1, to: 2 }
                } else {
                    Stage::Explore
                }
            }
            Stage::SyncUp { round } => {
                if self.is_leader() {
                    let bit = codec::r_decode(&self.buf);
                    match self.protocol {
                        Protocol::BetaUnaware => self.flag2 = bit,
                        _ => self.flag = bit,
                    }
                }
                match self.protocol {
                    Protocol::BetaUnaware if round < self.sync_rounds => {
                        Stage::SyncDown { round: round + 1, to: 2 }
                    }
                    Protocol::BetaUnaware => {
                        self.finish_update();
                        Stage::Explore
                    }
                    _ => Stage::SyncDown { round, to: 2 },
                }
            }
            Stage::SyncDown { round, to } => {
                if to == self.index {
                    let bit = codec::r_decode(&self.buf);
                    match self.protocol {
                        Protocol::BetaUnaware => self.flag2 |= bit,
                        _ => self.flag = bit,
                    }
                }
                if to < self.players {
                    Stage::SyncDown { round, to: to + 1 }
                } else {
                    match self.protocol {
                        Protocol::BetaUnaware => Stage::SyncUp { round },
                        _ if round < self.sync_rounds => Stage::SyncUp { round: round + 1 },
                        _ => {
                            self.finish_update();
                            Stage::Explore
                        }
                    }
                }
            }
            Stage::Explore => {
                self.finish_exploration();
                self.begin_phase(t).expect("schedule stays valid as the estimate grows");
                return;
            }
        };
        self.set_stage(next);
    }

    fn at_update_point(&self) -> bool {
        self.round_counter >= update_period(self.horizon, self.estimate(), self.params.k_code)
    }

    fn decode_assignment(&mut self) {
        let (k, h) = (self.num_arms, self.params.h);
        let record_idx = self.records.len() - 1;
        match self.protocol {
            Protocol::AlphaAware => {
                let raw = codec::r_decode_index_raw(&self.buf, k, h).expect("buffer matches stage length");
                self.assigned_arm = raw.min(k);
                self.records[record_idx].decoded = vec![self.assigned_arm];
                self.records[record_idx].clamped = raw > k;
            }
            _ => {
                let len = if self.protocol == Protocol::AlphaUnaware {
                    h
                } else {
                    self.params.k_code
                };
                let set = codec::e_decode(&self.buf, k, len).expect("buffer matches stage length");
                // an empty set cannot come from an aligned transfer; treat it as an error
                self.assigned_arm = match set.choose(&mut self.rng) {
                    Some(&a) => a,
                    None => self.rng.gen_range(1..=k),
                };
                self.flag = set.len() != 1;
                if self.protocol == Protocol::BetaUnaware {
                    self.attack_counter += set.len().saturating_sub(1) * self.params.k_code;
                }
                self.records[record_idx].decoded = set;
            }
        }
        self.records[record_idx].arm = self.assigned_arm;
    }

    fn finish_update(&mut self) {
        let raise = match self.protocol {
            Protocol::BetaUnaware => self.flag2,
            _ => self.flag,
        };
        self.level = self.grid.escalate(self.level, raise);
        if self.protocol == Protocol::BetaUnaware {
            self.round_counter = 0;
            if !self.is_leader() {
                self.flag2 = false;
            }
        }
        let after = self.estimate();
        self.current_record().estimate_after = after;
    }

    fn finish_exploration(&mut self) {
        let success = match self.protocol {
            Protocol::AlphaAware => true,
            _ => !self.flag,
        };
        let (players, tau) = (self.players, self.params.tau);
        let Some(l) = self.leader.as_mut() else {
            return;
        };
        let feedback = PhaseFeedback {
            chosen: l.chosen.clone(),
            leader_arm: l.assignment[0],
            observed: l.observed.min(tau as f64),
            tau,
            marginal: l.marginal,
            players,
            success,
        };
        l.estimator
            .update(&feedback)
            .expect("feedback is consistent by construction");
        self.current_record().success = Some(success);
    }

    fn current_record(&mut self) -> &mut PhaseRecord {
        self.records.last_mut().expect("a phase is always open")
    }
}

fn schedule(
    protocol: Protocol,
    players: usize,
    num_arms: usize,
    horizon: usize,
    known_attack: f64,
    epsilon: f64,
    estimate: f64,
) -> Result<ProtocolParams> {
    match protocol {
        Protocol::AlphaAware => params_alpha_aware(players, num_arms, horizon, known_attack, epsilon),
        Protocol::BetaAware => params_beta_aware(players, num_arms, horizon, known_attack),
        Protocol::AlphaUnaware => params_alpha_unaware(players, num_arms, horizon, estimate, epsilon),
        Protocol::BetaUnaware => params_beta_unaware(players, num_arms, horizon, estimate, epsilon),
        Protocol::ParallelExp3 => Err(crate::Error::invalid(
            "parallel EXP3 has no coordination schedule",
        )),
    }
}
