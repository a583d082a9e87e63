//! Generates the two built-in adversaries, reports their attackability and
//! round-trips one through the loss CSV format.
//!
//! `cargo run --release --example adversaries -- [seed]`

use mpmab::env::{burst_adversary, changepoint_adversary, AttackabilityProfile, BurstSpec, ChangepointSpec, LossMatrix};

fn main() -> mpmab::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7u64);
    let t = 100_000;

    let burst = BurstSpec { num_arms: 10, horizon: t, c_low: 0.2, c_high: 0.9, l_high: 0.9, burst_len: 50, n_bursts: 20 };
    let cp = ChangepointSpec {
        horizon: t,
        means_before: vec![0.2, 0.2, 0.2, 0.2, 0.4, 0.4, 0.4, 0.4, 0.4, 0.4],
        means_after: vec![0.8, 0.2, 0.2, 0.8, 0.2, 0.2, 0.4, 0.4, 0.4, 0.4],
        t_change: 40_000,
        halfwidth: 0.15,
        burst_len: 50,
        n_bursts: 20,
    };

    for (name, loss) in [("burst", burst_adversary(&burst, seed)?), ("changepoint", changepoint_adversary(&cp, seed)?)] {
        let a = AttackabilityProfile::of(&loss);
        let means: Vec<String> = loss.cumulative(t).iter().map(|c| format!("{:.3}", c / t as f64)).collect();
        println!("{name}: K = {}, T = {}", loss.num_arms(), loss.horizon());
        println!("  W = {} (alpha = {:.4}), V = {} (beta = {:.4})", a.local, a.alpha(t), a.global, a.beta(t));
        println!("  mean loss per arm: {}", means.join(" "));
    }

    let small = burst_adversary(&BurstSpec { num_arms: 3, horizon: 12, burst_len: 3, n_bursts: 1, ..burst }, seed)?;
    let mut csv = Vec::new();
    small.write_csv(&mut csv)?;
    println!("\nloss CSV (one row per arm):\n{}", String::from_utf8_lossy(&csv));
    assert_eq!(LossMatrix::read_csv(&csv[..])?, small);
    Ok(())
}
