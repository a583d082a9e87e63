//! Tabulates the asymptotic regret bounds over the number of players and the
//! attackability exponent.
//!
//! `cargo run --example bounds -- [T]`

use mpmab::harness::{theory_bound, BoundModel};

fn main() -> mpmab::Result<()> {
    let t: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let k = 10;
    println!("K = {k}, T = {t}, attack exponent 0.7, eps 0.01");
    print!("{:>4}", "M");
    for model in BoundModel::ALL {
        print!("{:>22}", model.name());
    }
    println!();
    for m in [2, 4, 8, 16] {
        print!("{m:>4}");
        for model in BoundModel::ALL {
            print!("{:>22.3e}", theory_bound(model, m, k, t, 0.7, 0.01)?);
        }
        println!();
    }
    println!("\nexponent of T at M = 4:");
    for a in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let row: Vec<String> = BoundModel::ALL.iter().map(|b| format!("{}={:.3}", b.name(), b.t_exponent(4, a, 0.01))).collect();
        println!("  attack {a:.2}: {}", row.join(" "));
    }
    Ok(())
}
