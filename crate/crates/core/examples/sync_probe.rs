//! Estimates how often a single jammed downlink round splits the players'
//! estimates, against the 1/ceil(T^xi) chance that the round is the last one drawn.
//!
//! `cargo run --release --example sync_probe -- [T] [trials]`

use mpmab::harness::{sync_failure_probe, ProbeSpec, SyncAttack, TargetRound};
use mpmab::protocol::{Protocol, ProtocolSettings};

fn main() -> mpmab::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let t = args.first().copied().unwrap_or(400);
    let trials = args.get(1).copied().unwrap_or(10_000);

    for estimate in [0.0, 0.2, 0.5, 0.9] {
        let spec = ProbeSpec {
            settings: ProtocolSettings::new(Protocol::AlphaUnaware).with_initial_estimate(estimate),
            players: 4,
            num_arms: 10,
            horizon: t,
            attack: Some(SyncAttack { round: TargetRound::Last, follower: 2 }),
            trials,
            seed: 1,
        };
        let res = sync_failure_probe(&spec)?;
        let p = 1.0 / res.max_rounds as f64;
        println!(
            "estimate {estimate:.2}: ceil(T^xi) = {:>3}, failure rate {:.4}, expected {:.4} +- {:.4}",
            res.max_rounds,
            res.rate(),
            p,
            3.0 * res.binomial_sigma(p)
        );
    }
    Ok(())
}
