//! The oblivious adversary and the collision observation model.
//!
//! A [`LossMatrix`] is fixed before play. Each slot every player pulls an arm; a
//! player alone on her arm sees the adversary's loss, players sharing an arm all see
//! loss 1. Agents only ever get an [`Observation`], which carries no collision bit.

mod generate;
mod io;
mod regret;

pub use generate::{burst_adversary, changepoint_adversary, BurstSpec, ChangepointSpec};
pub use regret::{best_allocation_loss, best_allocation_loss_upto, regret};

use crate::{Error, Result};

/// Adversary losses `l_k(t)` for arms `1..=K` and slots `1..=T`, all in `[0, 1]`.
///
/// Immutable after construction; share it freely between concurrent runs.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    num_arms: usize,
    horizon: usize,
    // arm-major: losses[(arm - 1) * horizon + (t - 1)]
    losses: Vec<f64>,
}

impl LossMatrix {
    /// Builds a matrix from arm-major data (`K` consecutive rows of `T` losses).
    pub fn new(num_arms: usize, horizon: usize, losses: Vec<f64>) -> Result<Self> {
        if num_arms == 0 || horizon == 0 {
            return Err(Error::invalid("loss matrix needs K >= 1 and T >= 1"));
        }
        if losses.len() != num_arms * horizon {
            return Err(Error::LengthMismatch {
                expected: num_arms * horizon,
                actual: losses.len(),
            });
        }
        if let Some((i, v)) = losses
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::invalid(format!(
                "loss {v} at arm {}, slot {} is outside [0, 1]",
                i / horizon + 1,
                i % horizon + 1
            )));
        }
        Ok(Self {
            num_arms,
            horizon,
            losses,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let num_arms = rows.len();
        let horizon = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != horizon) {
            return Err(Error::LengthMismatch {
                expected: horizon,
                actual: bad.len(),
            });
        }
        Self::new(num_arms, horizon, rows.concat())
    }

    pub fn zeros(num_arms: usize, horizon: usize) -> Result<Self> {
        Self::new(num_arms, horizon, vec![0.0; num_arms * horizon])
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Loss of `arm` at slot `t`, both 1-based. Panics when out of range.
    pub fn loss(&self, arm: usize, t: usize) -> f64 {
        assert!((1..=self.num_arms).contains(&arm) && (1..=self.horizon).contains(&t));
        self.losses[(arm - 1) * self.horizon + (t - 1)]
    }

    /// The whole loss sequence of one arm; index `t - 1` holds slot `t`.
    pub fn row(&self, arm: usize) -> &[f64] {
        let start = (arm - 1) * self.horizon;
        &self.losses[start..start + self.horizon]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.losses.chunks_exact(self.horizon)
    }

    /// Per-arm cumulative loss over slots `1..=upto`.
    pub fn cumulative(&self, upto: usize) -> Vec<f64> {
        let upto = upto.min(self.horizon);
        self.rows().map(|r| r[..upto].iter().sum()).collect()
    }
}

/// One arm per player (player `m` at index `m - 1`). Shared arms are legal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionProfile {
    pub arms: Vec<usize>,
}

impl ActionProfile {
    pub fn new(arms: Vec<usize>) -> Self {
        Self { arms }
    }

    pub fn num_players(&self) -> usize {
        self.arms.len()
    }
}

impl From<Vec<usize>> for ActionProfile {
    fn from(arms: Vec<usize>) -> Self {
        Self { arms }
    }
}

/// What a player learns after a slot: her own arm and the loss she received.
///
/// There is deliberately no collision indicator here. Agents are driven by
/// `Observation`s only, so a no-sensing agent cannot read one:
///
/// ```compile_fail
/// let obs = mpmab::env::Observation { arm: 1, loss: 1.0 };
/// let _ = obs.collision;
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub arm: usize,
    pub loss: f64,
}

impl Observation {
    /// The channel bit this slot carries: loss exactly 1 reads as bit 1.
    pub fn bit(&self) -> bool {
        self.loss == 1.0
    }
}

/// Local (`W`, longest all-one run) and global (`V`, most ones on one arm) attackability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackabilityProfile {
    pub local: usize,
    pub global: usize,
}

impl AttackabilityProfile {
    pub fn of(loss: &LossMatrix) -> Self {
        Self {
            local: local_attackability(loss),
            global: global_attackability(loss),
        }
    }

    /// Exponent `a` with `W = T^a` (0 when `W <= 1` or `T <= 1`).
    pub fn alpha(&self, horizon: usize) -> f64 {
        exponent_of(self.local, horizon)
    }

    /// Exponent `b` with `V = T^b` (0 when `V <= 1` or `T <= 1`).
    pub fn beta(&self, horizon: usize) -> f64 {
        exponent_of(self.global, horizon)
    }
}

fn exponent_of(count: usize, horizon: usize) -> f64 {
    if count <= 1 || horizon <= 1 {
        0.0
    } else {
        ((count as f64).ln() / (horizon as f64).ln()).min(1.0)
    }
}

/// Longest run of losses exactly equal to 1 on any arm.
pub fn local_attackability(loss: &LossMatrix) -> usize {
    loss.rows()
        .map(|row| {
            let (mut best, mut run) = (0, 0);
            for &l in row {
                if l == 1.0 {
                    run += 1;
                    best = best.max(run);
                } else {
                    run = 0;
                }
            }
            best
        })
        .max()
        .unwrap_or(0)
}

/// Largest per-arm count of losses exactly equal to 1.
pub fn global_attackability(loss: &LossMatrix) -> usize {
    loss.rows()
        .map(|row| row.iter().filter(|&&l| l == 1.0).count())
        .max()
        .unwrap_or(0)
}

/// Plays slot `t`: returns each player's observation and the ground-truth collision
/// flags. The flags are for diagnostics and must never be handed to an agent.
pub fn step(
    loss: &LossMatrix,
    t: usize,
    actions: &ActionProfile,
) -> Result<(Vec<Observation>, Vec<bool>)> {
    let mut observations = Vec::with_capacity(actions.arms.len());
    let mut collisions = Vec::with_capacity(actions.arms.len());
    step_into(loss, t, actions, &mut observations, &mut collisions)?;
    Ok((observations, collisions))
}

/// [`step`] writing into caller-owned buffers (cleared first).
pub fn step_into(
    loss: &LossMatrix,
    t: usize,
    actions: &ActionProfile,
    observations: &mut Vec<Observation>,
    collisions: &mut Vec<bool>,
) -> Result<()> {
    if !(1..=loss.horizon).contains(&t) {
        return Err(Error::SlotOutOfRange {
            t,
            horizon: loss.horizon,
        });
    }
    if let Some(&arm) = actions
        .arms
        .iter()
        .find(|&&a| !(1..=loss.num_arms).contains(&a))
    {
        return Err(Error::ArmOutOfRange {
            arm,
            num_arms: loss.num_arms,
        });
    }
    observations.clear();
    collisions.clear();
    for &arm in &actions.arms {
        let shared = actions.arms.iter().filter(|&&b| b == arm).count() > 1;
        collisions.push(shared);
        observations.push(Observation {
            arm,
            loss: if shared { 1.0 } else { loss.loss(arm, t) },
        });
    }
    Ok(())
}
