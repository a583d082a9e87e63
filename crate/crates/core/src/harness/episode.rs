use crate::env::{step_into, ActionProfile, LossMatrix, Observation};
use crate::protocol::{make_agents, AgentSnapshot, AgentState, ProtocolSettings, SlotKind};
use crate::Result;

/// How much of each slot a [`RunTrace`] keeps. Action profiles are always kept
/// because regret needs them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceLevel {
    #[default]
    Actions,
    /// Also observations, ground-truth collisions and agent snapshots per slot.
    Full,
}

/// Everything that happened in one slot. Ground truth, never shown to an agent.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub t: usize,
    pub observations: Vec<Observation>,
    pub collisions: Vec<bool>,
    /// Empty for the EXP3 baseline.
    pub snapshots: Vec<AgentSnapshot>,
}

/// Result of one episode.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub players: usize,
    pub horizon: usize,
    /// `actions[t - 1]` was played at slot `t`.
    pub actions: Vec<ActionProfile>,
    /// Per-slot detail, only with [`TraceLevel::Full`].
    pub slots: Vec<SlotRecord>,
    /// Agents as they stood after slot `T`.
    pub agents: Vec<AgentState>,
    pub final_estimates: Vec<f64>,
    /// Player-slots in which an exploring player collided. Every slot of the
    /// baseline counts as exploration.
    pub explore_collisions: usize,
    /// Follower assignments that differ from what the leader sent.
    pub decode_errors: usize,
    /// Times the players' estimates went from all equal to not all equal.
    pub sync_failures: usize,
    /// Per player: slots in completed communication stages, in completed
    /// exploration blocks, and in the stage cut off by the horizon.
    pub slot_accounting: Vec<(usize, usize, usize)>,
}

impl RunTrace {
    /// Leader's communication slots (0 for the baseline).
    pub fn comm_slots(&self) -> usize {
        self.slot_accounting.first().map_or(0, |a| a.0)
    }

    /// Leader's final estimate; NaN for the baseline.
    pub fn final_estimate(&self) -> f64 {
        self.final_estimates.first().copied().unwrap_or(f64::NAN)
    }
}

/// Plays `T = loss.horizon()` slots. Each agent only ever receives its own
/// observation of the previous slot.
pub fn run_episode(
    settings: &ProtocolSettings,
    loss: &LossMatrix,
    players: usize,
    shared_seed: u64,
    private_seeds: &[u64],
    level: TraceLevel,
) -> Result<RunTrace> {
    let horizon = loss.horizon();
    let agents = make_agents(settings, players, loss.num_arms(), horizon, shared_seed, private_seeds)?;
    play(agents, loss, players, level)
}

/// Plays prepared agents against `loss` for its whole horizon.
pub fn play(
    mut agents: Vec<AgentState>,
    loss: &LossMatrix,
    players: usize,
    level: TraceLevel,
) -> Result<RunTrace> {
    let horizon = loss.horizon();
    let mut actions = Vec::with_capacity(horizon);
    let mut slots = Vec::new();
    let mut last: Vec<Option<Observation>> = vec![None; players];
    let mut observations = Vec::with_capacity(players);
    let mut collisions = Vec::with_capacity(players);
    let mut explore_collisions = 0;
    let mut sync_failures = 0;
    let mut agreed = true;

    for t in 1..=horizon {
        let arms: Vec<usize> = agents
            .iter_mut()
            .zip(&last)
            .map(|(a, obs)| a.step(*obs, t))
            .collect();
        let profile = ActionProfile::new(arms);
        step_into(loss, t, &profile, &mut observations, &mut collisions)?;

        for (agent, &hit) in agents.iter().zip(&collisions) {
            let exploring = agent.snapshot().map_or(true, |s| s.kind == SlotKind::Explore);
            if hit && exploring {
                explore_collisions += 1;
            }
        }
        let now = estimates_agree(&agents);
        if agreed && !now {
            sync_failures += 1;
        }
        agreed = now;

        if level == TraceLevel::Full {
            slots.push(SlotRecord {
                t,
                observations: observations.clone(),
                collisions: collisions.clone(),
                snapshots: agents.iter().filter_map(AgentState::snapshot).collect(),
            });
        }
        for (slot, obs) in last.iter_mut().zip(&observations) {
            *slot = Some(*obs);
        }
        actions.push(profile);
    }

    let final_estimates = agents.iter().map(AgentState::estimate).collect();
    let slot_accounting = agents
        .iter()
        .map(|a| a.as_coordinated().map_or((0, horizon, 0), |c| c.slot_accounting()))
        .collect();
    Ok(RunTrace {
        players,
        horizon,
        actions,
        slots,
        decode_errors: decode_errors(&agents),
        agents,
        final_estimates,
        explore_collisions,
        sync_failures,
        slot_accounting,
    })
}

fn estimates_agree(agents: &[AgentState]) -> bool {
    let mut it = agents.iter().filter_map(AgentState::as_coordinated).map(|a| a.estimate());
    match it.next() {
        Some(first) => it.all(|e| e == first),
        None => true,
    }
}

/// Compares, phase by phase, the arm the leader sent each follower with what that
/// follower decoded. Phases a follower never finished decoding are skipped.
fn decode_errors(agents: &[AgentState]) -> usize {
    let Some(leader) = agents.first().and_then(AgentState::as_coordinated) else {
        return 0;
    };
    let mut errors = 0;
    for follower in agents.iter().skip(1).filter_map(AgentState::as_coordinated) {
        let f = follower.index();
        for (lr, fr) in leader.records().iter().zip(follower.records()) {
            if !fr.decoded.is_empty() && lr.phase == fr.phase && lr.assignment[f - 1] != fr.arm {
                errors += 1;
            }
        }
    }
    errors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{burst_adversary, regret, BurstSpec};
    use crate::protocol::Protocol;

    fn burst(seed: u64) -> LossMatrix {
        burst_adversary(
            &BurstSpec {
                num_arms: 5,
                horizon: 4000,
                c_low: 0.2,
                c_high: 0.9,
                l_high: 0.9,
                burst_len: 3,
                n_bursts: 30,
            },
            seed,
        )
        .unwrap()
    }

    #[test]
    fn zero_losses_mean_clean_play() {
        let loss = LossMatrix::zeros(5, 3000).unwrap();
        for p in [Protocol::AlphaAware, Protocol::AlphaUnaware, Protocol::BetaAware, Protocol::BetaUnaware] {
            let s = ProtocolSettings::new(p).with_alpha(0.1).with_beta(0.5);
            let tr = run_episode(&s, &loss, 3, 1, &[2, 3, 4], TraceLevel::Actions).unwrap();
            assert_eq!(tr.explore_collisions, 0, "{p}");
            assert_eq!(tr.decode_errors, 0, "{p}");
            assert_eq!(tr.sync_failures, 0, "{p}");
        }
    }

    #[test]
    fn replays_bit_for_bit() {
        let loss = burst(3);
        let s = ProtocolSettings::new(Protocol::AlphaUnaware);
        let a = run_episode(&s, &loss, 3, 9, &[1, 2, 3], TraceLevel::Full).unwrap();
        let b = run_episode(&s, &loss, 3, 9, &[1, 2, 3], TraceLevel::Full).unwrap();
        assert_eq!(a.actions, b.actions);
        assert_eq!(a.slots, b.slots);
    }

    #[test]
    fn slot_accounting_adds_up() {
        let loss = burst(5);
        for p in Protocol::ALL {
            let s = ProtocolSettings::new(p).with_alpha(0.2).with_beta(0.5);
            let tr = run_episode(&s, &loss, 3, 4, &[7, 8, 9], TraceLevel::Actions).unwrap();
            for &(c, e, open) in &tr.slot_accounting {
                assert_eq!(c + e + open, 4000, "{p}");
            }
            let r = regret(&loss, &tr.actions, 3, &[4000]).unwrap();
            assert!(r[0].is_finite());
        }
    }

    #[test]
    fn full_trace_collisions_match_actions() {
        let loss = burst(8);
        let s = ProtocolSettings::new(Protocol::BetaUnaware);
        let tr = run_episode(&s, &loss, 3, 2, &[1, 5, 6], TraceLevel::Full).unwrap();
        assert_eq!(tr.slots.len(), 4000);
        for (rec, prof) in tr.slots.iter().zip(&tr.actions) {
            for (i, &hit) in rec.collisions.iter().enumerate() {
                let shared = prof.arms.iter().filter(|&&a| a == prof.arms[i]).count() > 1;
                assert_eq!(hit, shared);
            }
        }
    }
}
