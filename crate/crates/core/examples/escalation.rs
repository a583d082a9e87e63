//! Watches the alpha-unaware estimate climb against planted bursts.
//!
//! `cargo run --release --example escalation -- [burst_len] [n_bursts] [runs] [seed]`

use std::collections::BTreeMap;

use mpmab::env::{burst_adversary, BurstSpec};
use mpmab::harness::{run_episode, run_seeds, RunSeeds, TraceLevel};
use mpmab::protocol::{Protocol, ProtocolSettings};

fn main() -> mpmab::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let burst_len = args.first().copied().unwrap_or(31);
    let n_bursts = args.get(1).copied().unwrap_or(2000);
    let runs = args.get(2).copied().unwrap_or(10);
    let base = args.get(3).copied().unwrap_or(1) as u64;
    let (m, k, t, eps) = (4, 10, 100_000, 0.05);

    let spec = BurstSpec { num_arms: k, horizon: t, c_low: 0.2, c_high: 0.9, l_high: 0.9, burst_len, n_bursts };
    let settings = ProtocolSettings::new(Protocol::AlphaUnaware).with_epsilon(eps);
    let target = (0..=20)
        .map(|j| j as f64 * eps)
        .find(|a| (t as f64).powf(*a).ceil() > burst_len as f64)
        .unwrap_or(1.0);
    println!("bursts of {burst_len} x {n_bursts} per arm, T = {t}, eps = {eps}: expect {target:.2}");

    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    let mut split_runs = 0;
    for (i, seed) in run_seeds(base, runs).into_iter().enumerate() {
        let seeds = RunSeeds::from_run_seed(seed);
        let loss = burst_adversary(&spec, seeds.env)?;
        let tr = run_episode(&settings, &loss, m, seeds.shared, &seeds.private(m), TraceLevel::Actions)?;
        let finals: Vec<String> = tr.final_estimates.iter().map(|e| format!("{e:.2}")).collect();
        if tr.sync_failures > 0 {
            split_runs += 1;
        }
        if runs <= 20 {
            let leader = tr.agents[0].as_coordinated().expect("coordinated");
            let path: Vec<String> = leader
                .records()
                .windows(2)
                .filter(|w| w[1].params.h != w[0].params.h)
                .map(|w| format!("{}:{:.2}", w[1].start, w[1].estimate_before))
                .collect();
            println!("run {i}: finals {} splits {} climb {}", finals.join(" "), tr.sync_failures, path.join(" "));
        }
        for f in finals {
            *tally.entry(f).or_default() += 1;
        }
    }
    println!("agent final estimates: {tally:?}; runs with a split: {split_runs}/{runs}");
    Ok(())
}
