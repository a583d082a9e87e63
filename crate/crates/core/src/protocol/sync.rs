//! Shared-seed draws that keep the agents' synchronization blocks aligned.

use rand::Rng;

use super::params::ceil_pow;
use crate::rng::{derive_seed, seeded};

const SYNC_STREAM: u64 = 0x5359_4E43;

/// Number of sync rounds, uniform on `1..=ceil(T^xi)`.
///
/// Every agent feeds the same shared stream, so all of them draw the same count.
pub fn sync_round_count<R: Rng + ?Sized>(xi: f64, horizon: usize, shared_rng: &mut R) -> usize {
    rng_rounds(ceil_pow(horizon, xi), shared_rng)
}

fn rng_rounds<R: Rng + ?Sized>(max: usize, rng: &mut R) -> usize {
    rng.gen_range(1..=max.max(1))
}

/// The sync round count of `phase`, drawn from a stream keyed by the shared seed
/// and the phase index. Agents that agree on the phase agree on the count even if
/// one of them skipped an earlier draw.
pub fn phase_sync_rounds(shared_seed: u64, phase: usize, xi: f64, horizon: usize) -> usize {
    let mut rng = seeded(derive_seed(shared_seed, SYNC_STREAM, phase as u64));
    sync_round_count(xi, horizon, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_round_when_range_is_one() {
        let mut rng = seeded(3);
        for _ in 0..50 {
            assert_eq!(sync_round_count(0.0, 10_000, &mut rng), 1);
        }
    }

    #[test]
    fn shared_seed_agrees_and_covers_range() {
        let mut seen = [0usize; 21];
        for p in 1..4000 {
            let a = phase_sync_rounds(77, p, 0.5, 400);
            assert_eq!(a, phase_sync_rounds(77, p, 0.5, 400));
            seen[a] += 1;
        }
        assert_eq!(seen[0], 0);
        assert!(seen[1..].iter().all(|&c| c > 100));
    }
}
