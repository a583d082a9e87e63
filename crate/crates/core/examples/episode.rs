//! Plays one alpha-aware episode with full tracing and prints the phase schedule,
//! the leader's assignments and the slot budget.
//!
//! `cargo run --release --example episode -- [T] [seed]`

use mpmab::env::{burst_adversary, regret, AttackabilityProfile, BurstSpec};
use mpmab::harness::{run_episode, RunSeeds, TraceLevel};
use mpmab::protocol::{Protocol, ProtocolSettings};

fn main() -> mpmab::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let t = args.first().copied().unwrap_or(20_000) as usize;
    let seeds = RunSeeds::from_run_seed(args.get(1).copied().unwrap_or(3));
    let (m, k) = (3, 6);

    let spec = BurstSpec { num_arms: k, horizon: t, c_low: 0.2, c_high: 0.9, l_high: 0.9, burst_len: 20, n_bursts: 5 };
    let loss = burst_adversary(&spec, seeds.env)?;
    let alpha = AttackabilityProfile::of(&loss).alpha(t);
    let settings = ProtocolSettings::new(Protocol::AlphaAware).with_alpha(alpha);
    let trace = run_episode(&settings, &loss, m, seeds.shared, &seeds.private(m), TraceLevel::Full)?;

    let leader = trace.agents[0].as_coordinated().expect("coordinated");
    let p = leader.params();
    println!("alpha = {alpha:.4}: tau = {}, h = {}, {} phases", p.tau, p.h, leader.records().len());
    for r in leader.records().iter().take(8) {
        println!("  phase {:>3} from t = {:>6}: assignment {:?}, success {:?}", r.phase, r.start, r.assignment, r.success);
    }
    let hits = trace.slots.iter().filter(|s| s.collisions.iter().any(|&c| c)).count();
    println!("slots with a collision: {hits}, exploration collisions: {}", trace.explore_collisions);
    for (i, (c, e, open)) in trace.slot_accounting.iter().enumerate() {
        println!("  player {}: {c} communication, {e} exploration, {open} cut off", i + 1);
    }
    let r = regret(&loss, &trace.actions, m, &[t / 4, t / 2, t])?;
    println!("regret at T/4, T/2, T: {:.1} {:.1} {:.1}", r[0], r[1], r[2]);
    Ok(())
}
