//! Draws M-subsets from the exponential-weights distribution and compares the
//! empirical frequencies with the exact subset probabilities.
//!
//! `cargo run --release --example sampler -- [samples]`

use std::collections::HashMap;

use mpmab::rng::seeded;
use mpmab::selector::{marginals, sample_meta_arm, MetaArm, WeightVector};

fn subsets(k: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    (m..=k)
        .flat_map(|last| subsets(last - 1, m - 1).into_iter().map(move |mut s| {
            s.push(last);
            s
        }))
        .collect()
}

fn main() -> mpmab::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let (k, m) = (5, 2);
    let w = WeightVector::from_weights(&[4.0, 2.0, 1.0, 0.5, 0.25])?;
    let mut rng = seeded(11);

    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for _ in 0..n {
        *counts.entry(sample_meta_arm(&w, m, &mut rng)?.arms().to_vec()).or_default() += 1;
    }
    let mut tv = 0.0;
    println!("subset   exact    empirical");
    for s in subsets(k, m) {
        let exact = w.log_probability(&MetaArm::new(s.clone(), k)?)?.exp();
        let emp = counts.get(&s).copied().unwrap_or(0) as f64 / n as f64;
        tv += (exact - emp).abs() / 2.0;
        println!("{s:?}   {exact:.5}  {emp:.5}");
    }
    println!("total variation {tv:.4} over {n} draws");
    let p = marginals(&w, m)?;
    println!("marginals {:?} sum {:.6}", p.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>(), p.iter().sum::<f64>());
    Ok(())
}
