//! Regret of the unaware protocols and the baseline around a changepoint in the
//! arm means.
//!
//! `cargo run --release --example changepoint -- [T] [runs]`

use mpmab::cli::{AdversaryConfig, ExperimentConfig};
use mpmab::harness::monte_carlo;
use mpmab::protocol::Protocol;

fn main() -> mpmab::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let t = args.first().copied().unwrap_or(100_000);
    let runs = args.get(1).copied().unwrap_or(8);
    let t_change = t * 2 / 5;

    let mut adversary = AdversaryConfig::default_changepoint();
    if let AdversaryConfig::Changepoint { t_change: tc, .. } = &mut adversary {
        *tc = Some(t_change);
    }
    let cfg = ExperimentConfig {
        horizon: t,
        runs,
        checkpoints: Some(vec![t_change, t_change + t / 4, t * 3 / 4, t]),
        protocols: vec![Protocol::AlphaUnaware, Protocol::BetaUnaware, Protocol::ParallelExp3],
        adversary,
        ..ExperimentConfig::default()
    };
    cfg.validate()?;
    println!("means switch at t = {t_change}");
    for spec in cfg.monte_carlo_specs()? {
        let rep = monte_carlo(&spec)?;
        let cells: Vec<String> = rep.checkpoints.iter().zip(&rep.mean).map(|(c, m)| format!("{c}: {m:.0}")).collect();
        println!("{:<14} {}", rep.protocol, cells.join("  "));
    }
    Ok(())
}
