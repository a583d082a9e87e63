use rand::seq::index;
use rand::Rng;

use super::LossMatrix;
use crate::rng::{seeded, SimRng};
use crate::{Error, Result};

/// Non-stationary uniform losses with planted loss-1 bursts.
///
/// Arm `k` draws `c_k ~ U[c_low, c_high]`, then every slot `l_k(t) ~ U[c_k, l_high)`.
/// Afterwards `n_bursts` runs of exactly `burst_len` ones are written on every arm.
#[derive(Debug, Clone, PartialEq)]
pub struct BurstSpec {
    pub num_arms: usize,
    pub horizon: usize,
    pub c_low: f64,
    pub c_high: f64,
    pub l_high: f64,
    pub burst_len: usize,
    pub n_bursts: usize,
}

impl BurstSpec {
    pub fn validate(&self) -> Result<()> {
        check_dims(self.num_arms, self.horizon)?;
        if !(0.0 <= self.c_low
            && self.c_low <= self.c_high
            && self.c_high <= self.l_high
            && self.l_high <= 1.0)
        {
            return Err(Error::invalid(format!(
                "need 0 <= c_low <= c_high <= l_high <= 1 (got {}, {}, {})",
                self.c_low, self.c_high, self.l_high
            )));
        }
        check_bursts(self.horizon, self.burst_len, self.n_bursts)
    }
}

/// Piecewise-stationary losses: `U[a_k - w, a_k + w)` with means switching at
/// `t_change`, plus planted bursts as in [`BurstSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChangepointSpec {
    pub horizon: usize,
    pub means_before: Vec<f64>,
    pub means_after: Vec<f64>,
    /// First slot (1-based) that uses `means_after`.
    pub t_change: usize,
    pub halfwidth: f64,
    pub burst_len: usize,
    pub n_bursts: usize,
}

impl ChangepointSpec {
    pub fn num_arms(&self) -> usize {
        self.means_before.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_dims(self.num_arms(), self.horizon)?;
        if self.means_after.len() != self.means_before.len() {
            return Err(Error::LengthMismatch {
                expected: self.means_before.len(),
                actual: self.means_after.len(),
            });
        }
        if !(1..=self.horizon).contains(&self.t_change) {
            return Err(Error::invalid(format!(
                "t_change {} outside 1..={}",
                self.t_change, self.horizon
            )));
        }
        if !(self.halfwidth >= 0.0) {
            return Err(Error::invalid("halfwidth must be nonnegative"));
        }
        for &a in self.means_before.iter().chain(&self.means_after) {
            if !(a - self.halfwidth >= 0.0 && a + self.halfwidth <= 1.0) {
                return Err(Error::invalid(format!(
                    "mean {a} with halfwidth {} leaves [0, 1]",
                    self.halfwidth
                )));
            }
        }
        check_bursts(self.horizon, self.burst_len, self.n_bursts)
    }
}

fn check_dims(num_arms: usize, horizon: usize) -> Result<()> {
    if num_arms == 0 || horizon == 0 {
        return Err(Error::invalid("need K >= 1 and T >= 1"));
    }
    Ok(())
}

// Bursts are separated by at least one non-burst slot so the longest all-one run
// is exactly `burst_len`.
fn check_bursts(horizon: usize, burst_len: usize, n_bursts: usize) -> Result<()> {
    if burst_len == 0 || n_bursts == 0 {
        return Ok(());
    }
    let needed = n_bursts * burst_len + (n_bursts - 1);
    if needed > horizon {
        return Err(Error::invalid(format!(
            "{n_bursts} separated bursts of length {burst_len} need {needed} slots, horizon is {horizon}"
        )));
    }
    Ok(())
}

pub fn burst_adversary(spec: &BurstSpec, seed: u64) -> Result<LossMatrix> {
    spec.validate()?;
    let mut rng = seeded(seed);
    let t = spec.horizon;
    let mut losses = Vec::with_capacity(spec.num_arms * t);
    for _ in 0..spec.num_arms {
        let c = uniform(&mut rng, spec.c_low, spec.c_high);
        let start = losses.len();
        losses.extend((0..t).map(|_| uniform(&mut rng, c, spec.l_high)));
        plant_bursts(&mut rng, &mut losses[start..], spec.burst_len, spec.n_bursts);
    }
    LossMatrix::new(spec.num_arms, t, losses)
}

pub fn changepoint_adversary(spec: &ChangepointSpec, seed: u64) -> Result<LossMatrix> {
    spec.validate()?;
    let mut rng = seeded(seed);
    let t = spec.horizon;
    let w = spec.halfwidth;
    let mut losses = Vec::with_capacity(spec.num_arms() * t);
    for (&before, &after) in spec.means_before.iter().zip(&spec.means_after) {
        let start = losses.len();
        losses.extend((1..=t).map(|slot| {
            let a = if slot < spec.t_change { before } else { after };
            uniform(&mut rng, a - w, a + w)
        }));
        plant_bursts(&mut rng, &mut losses[start..], spec.burst_len, spec.n_bursts);
    }
    LossMatrix::new(spec.num_arms(), t, losses)
}

/// Half-open uniform draw on `[lo, hi)`; degenerates to `lo` when the range is empty.
fn uniform(rng: &mut SimRng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Overwrites `n` separated runs of `len` ones, uniformly over all valid placements.
///
/// A placement is a composition of the free slack into `n + 1` gaps; choosing `n`
/// distinct cut points out of `slack + n` enumerates those compositions uniformly.
fn plant_bursts(rng: &mut SimRng, row: &mut [f64], len: usize, n: usize) {
    if len == 0 || n == 0 {
        return;
    }
    let slack = row.len() - (n * len + (n - 1));
    let mut cuts = index::sample(rng, slack + n, n).into_vec();
    cuts.sort_unstable();
    for (i, y) in cuts.into_iter().enumerate() {
        let offset = y + i * len;
        row[offset..offset + len].fill(1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{global_attackability, local_attackability};
    use proptest::prelude::*;

    fn burst_setup(horizon: usize, n_bursts: usize) -> BurstSpec {
        BurstSpec {
            num_arms: 10,
            horizon,
            c_low: 0.2,
            c_high: 0.9,
            l_high: 0.9,
            burst_len: 50,
            n_bursts,
        }
    }

    #[test]
    fn burst_family_shape() {
        let m = burst_adversary(&burst_setup(20_000, 5), 3).unwrap();
        assert_eq!(local_attackability(&m), 50);
        assert_eq!(global_attackability(&m), 250);
        for row in m.rows() {
            let base: Vec<f64> = row.iter().copied().filter(|&l| l != 1.0).collect();
            assert_eq!(base.len(), 20_000 - 250);
            assert!(base.iter().all(|&l| (0.2..0.9).contains(&l)));
        }
    }

    #[test]
    fn no_bursts_means_base_draw() {
        let spec = BurstSpec {
            n_bursts: 0,
            ..burst_setup(500, 0)
        };
        let a = burst_adversary(&spec, 11).unwrap();
        let b = burst_adversary(&BurstSpec { burst_len: 0, n_bursts: 3, ..spec.clone() }, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(local_attackability(&a), 0);
    }

    #[test]
    fn rejects_bad_ranges() {
        let ok = burst_setup(1000, 1);
        assert!(burst_adversary(&BurstSpec { c_low: 0.5, c_high: 0.4, ..ok.clone() }, 0).is_err());
        assert!(burst_adversary(&BurstSpec { l_high: 1.2, c_high: 1.0, ..ok.clone() }, 0).is_err());
        assert!(burst_adversary(&BurstSpec { c_high: 0.95, ..ok.clone() }, 0).is_err());
        assert!(burst_adversary(&BurstSpec { n_bursts: 20, ..ok.clone() }, 0).is_err());
        assert!(burst_adversary(&BurstSpec { horizon: 0, ..ok }, 0).is_err());
    }

    #[test]
    fn tightly_packed_bursts() {
        // 3 bursts of 4 plus 2 separators fill 14 slots exactly.
        let spec = BurstSpec {
            num_arms: 1,
            horizon: 14,
            c_low: 0.0,
            c_high: 0.0,
            l_high: 0.5,
            burst_len: 4,
            n_bursts: 3,
        };
        let m = burst_adversary(&spec, 5).unwrap();
        let pattern: Vec<bool> = m.row(1).iter().map(|&l| l == 1.0).collect();
        let expect: Vec<bool> = "11110111101111".chars().map(|c| c == '1').collect();
        assert_eq!(pattern, expect);
    }

    fn changepoint_setup(horizon: usize, t_change: usize) -> ChangepointSpec {
        let before = vec![0.2, 0.2, 0.2, 0.2, 0.4, 0.4, 0.4, 0.4, 0.4, 0.4];
        let mut after = before.clone();
        after[0] = 0.8;
        after[3] = 0.8;
        after[4] = 0.2;
        after[5] = 0.2;
        ChangepointSpec {
            horizon,
            means_before: before,
            means_after: after,
            t_change,
            halfwidth: 0.15,
            burst_len: 50,
            n_bursts: 2,
        }
    }

    #[test]
    fn changepoint_switches_means() {
        let m = changepoint_adversary(&changepoint_setup(4000, 2001), 1).unwrap();
        let mean = |arm: usize, r: std::ops::Range<usize>| {
            let v: Vec<f64> = m.row(arm)[r].iter().copied().filter(|&l| l != 1.0).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!((mean(1, 0..2000) - 0.2).abs() < 0.02);
        assert!((mean(1, 2000..4000) - 0.8).abs() < 0.02);
        assert!((mean(5, 0..2000) - 0.4).abs() < 0.02);
        assert!((mean(5, 2000..4000) - 0.2).abs() < 0.02);
        assert!((mean(2, 2000..4000) - 0.2).abs() < 0.02);
        assert_eq!(local_attackability(&m), 50);
    }

    #[test]
    fn zero_halfwidth_gives_exact_means() {
        let spec = ChangepointSpec {
            halfwidth: 0.0,
            n_bursts: 0,
            ..changepoint_setup(100, 40)
        };
        let m = changepoint_adversary(&spec, 2).unwrap();
        assert!(m.row(1)[..39].iter().all(|&l| l == 0.2));
        assert!(m.row(1)[39..].iter().all(|&l| l == 0.8));
    }

    #[test]
    fn stationary_changepoint_matches_before_means() {
        let mut spec = changepoint_setup(300, 100);
        spec.means_after = spec.means_before.clone();
        let mut other = spec.clone();
        other.t_change = 250;
        assert_eq!(
            changepoint_adversary(&spec, 4).unwrap(),
            changepoint_adversary(&other, 4).unwrap()
        );
    }

    #[test]
    fn changepoint_rejects_bad_means() {
        let mut spec = changepoint_setup(100, 50);
        spec.means_after[2] = 0.9;
        assert!(changepoint_adversary(&spec, 0).is_err());
        assert!(changepoint_adversary(&ChangepointSpec { t_change: 0, ..changepoint_setup(100, 50) }, 0).is_err());
        assert!(changepoint_adversary(&ChangepointSpec { t_change: 101, ..changepoint_setup(100, 50) }, 0).is_err());
        let mut short = changepoint_setup(100, 50);
        short.means_after.pop();
        assert!(changepoint_adversary(&short, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn generators_are_deterministic(seed in any::<u64>(), n in 0usize..6) {
            let spec = BurstSpec { num_arms: 3, ..burst_setup(600, n) };
            prop_assert_eq!(burst_adversary(&spec, seed).unwrap(), burst_adversary(&spec, seed).unwrap());
        }

        #[test]
        fn planted_runs_set_local_attackability(
            seed in any::<u64>(), len in 1usize..40, n in 1usize..8, arms in 1usize..4,
        ) {
            let spec = BurstSpec {
                num_arms: arms, horizon: 400, c_low: 0.0, c_high: 0.5, l_high: 1.0,
                burst_len: len, n_bursts: n,
            };
            let m = burst_adversary(&spec, seed).unwrap();
            prop_assert!(local_attackability(&m) >= len);
            // base draws are half-open below 1, so planted runs are the only ones
            prop_assert_eq!(local_attackability(&m), len);
            prop_assert_eq!(global_attackability(&m), len * n);
        }
    }
}
