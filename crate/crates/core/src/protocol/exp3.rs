//! Single-player EXP3, run independently by every player in the baseline.

use rand::Rng;

use crate::env::Observation;
use crate::rng::SimRng;

/// Exponential weights over `K` arms with importance-weighted loss estimates.
///
/// Uses the anytime-free rate `eta = sqrt(2 ln K / (K T))` and no explicit
/// exploration mixing.
#[derive(Debug, Clone)]
pub struct Exp3Agent {
    index: usize,
    eta: f64,
    est: Vec<f64>,
    probs: Vec<f64>,
    rng: SimRng,
    last_arm: Option<usize>,
}

impl Exp3Agent {
    pub fn new(index: usize, num_arms: usize, horizon: usize, rng: SimRng) -> Self {
        let (k, t) = (num_arms as f64, horizon.max(1) as f64);
        Self {
            index,
            eta: (2.0 * k.ln() / (k * t)).sqrt(),
            est: vec![0.0; num_arms],
            probs: vec![1.0 / k; num_arms],
            rng,
            last_arm: None,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Current sampling distribution; index `k - 1` holds arm `k`.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn loss_estimates(&self) -> &[f64] {
        &self.est
    }

    pub fn step(&mut self, last: Option<Observation>, _t: usize) -> usize {
        if let (Some(obs), Some(arm)) = (last, self.last_arm) {
            self.est[arm - 1] += obs.loss / self.probs[arm - 1];
            self.refresh();
        }
        let arm = self.draw();
        self.last_arm = Some(arm);
        arm
    }

    fn refresh(&mut self) {
        let min = self.est.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for (p, &l) in self.probs.iter_mut().zip(&self.est) {
            *p = (-self.eta * (l - min)).exp();
            total += *p;
        }
        for p in &mut self.probs {
            *p /= total;
        }
    }

    fn draw(&mut self) -> usize {
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i + 1;
            }
        }
        self.probs.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn zero_losses_keep_uniform_play() {
        let mut a = Exp3Agent::new(1, 4, 1000, seeded(1));
        let mut last = None;
        for t in 1..=200 {
            let arm = a.step(last, t);
            last = Some(Observation { arm, loss: 0.0 });
        }
        assert!(a.probabilities().iter().all(|&p| (p - 0.25).abs() < 1e-12));
    }

    #[test]
    fn concentrates_on_the_best_arm() {
        let losses = [0.9, 0.1, 0.7];
        let mut a = Exp3Agent::new(1, 3, 20_000, seeded(4));
        let mut last = None;
        for t in 1..=20_000 {
            let arm = a.step(last, t);
            last = Some(Observation { arm, loss: losses[arm - 1] });
        }
        assert!(a.probabilities()[1] > 0.8);
    }

    #[test]
    fn replays_from_seed() {
        let run = || {
            let mut a = Exp3Agent::new(1, 5, 100, seeded(9));
            let mut last = None;
            (1..=100)
                .map(|t| {
                    let arm = a.step(last, t);
                    last = Some(Observation { arm, loss: arm as f64 / 5.0 });
                    arm
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
