//! Closed-form slot layout of one phase, independent of any agent.

use super::params::ProtocolParams;
use super::Protocol;
use crate::codec;

/// Stage lengths of one phase for given parameters and sync round count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseLayout {
    pub players: usize,
    /// Slots of one assignment transfer (to one follower).
    pub assign_each: usize,
    pub report: usize,
    pub uplink: usize,
    pub downlink_each: usize,
    pub sync_rounds: usize,
    pub explore: usize,
}

impl PhaseLayout {
    /// `sync_rounds` is ignored by protocols without a sync block in this phase.
    pub fn new(
        protocol: Protocol,
        players: usize,
        num_arms: usize,
        params: &ProtocolParams,
        sync_rounds: usize,
    ) -> Self {
        let (assign_each, report, sync) = match protocol {
            Protocol::AlphaAware => (codec::index_bits(num_arms) * params.h, 0, 0),
            Protocol::AlphaUnaware => (num_arms * params.h, 0, params.sync_len),
            Protocol::BetaAware => (num_arms * params.k_code, params.k_code, 0),
            Protocol::BetaUnaware => (num_arms * params.k_code, params.k_code, params.sync_len),
            Protocol::ParallelExp3 => (0, 0, 0),
        };
        let rounds = if sync == 0 { 0 } else { sync_rounds };
        Self {
            players,
            assign_each,
            report,
            uplink: sync,
            downlink_each: sync,
            sync_rounds: rounds,
            explore: params.tau,
        }
    }

    pub fn assign_len(&self) -> usize {
        (self.players - 1) * self.assign_each
    }

    pub fn round_len(&self) -> usize {
        self.uplink + (self.players - 1) * self.downlink_each
    }

    pub fn comm_len(&self) -> usize {
        self.assign_len() + self.report + self.sync_rounds * self.round_len()
    }

    pub fn len(&self) -> usize {
        self.comm_len() + self.explore
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Offset from the phase start of the first downlink slot of `round` (1-based) to
    /// `follower` (`2..=M`), for the uplink-then-downlink round order.
    pub fn downlink_offset(&self, round: usize, follower: usize) -> usize {
        self.assign_len()
            + self.report
            + (round - 1) * self.round_len()
            + self.uplink
            + (follower - 2) * self.downlink_each
    }
}
