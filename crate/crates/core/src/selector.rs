//! The leader's exponential-weights choice over `M`-subsets of arms.
//!
//! A subset `A` gets probability proportional to `prod_{k in A} w_k` with
//! `w_k = exp(-eta * L_k)`. This is a diagonal k-DPP, so sampling and per-arm
//! marginals only need elementary symmetric polynomials of the weights, which a
//! dynamic program gives in `O(KM)`. Everything runs in the log domain: the weights
//! are `exp(-eta * L)` and `L` grows without bound over a long horizon.

use rand::Rng;

use crate::{Error, Result};

/// A set of `M` distinct arms, stored ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetaArm {
    arms: Vec<usize>,
}

impl MetaArm {
    /// Sorts `arms`; rejects duplicates and indices outside `1..=K`.
    pub fn new(mut arms: Vec<usize>, num_arms: usize) -> Result<Self> {
        arms.sort_unstable();
        if let Some(&a) = arms.iter().find(|&&a| a == 0 || a > num_arms) {
            return Err(Error::ArmOutOfRange { arm: a, num_arms });
        }
        if arms.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("meta-arm contains a repeated arm"));
        }
        Ok(Self { arms })
    }

    pub fn arms(&self) -> &[usize] {
        &self.arms
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.arms.binary_search(&arm).is_ok()
    }
}

/// Log-weights of the `K` arms. Only differences matter; a common shift changes no
/// probability. `-inf` is a zero weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    log_weights: Vec<f64>,
}

impl WeightVector {
    pub fn uniform(num_arms: usize) -> Self {
        Self {
            log_weights: vec![0.0; num_arms],
        }
    }

    /// Rejects NaN and `+inf`.
    pub fn from_log_weights(log_weights: Vec<f64>) -> Result<Self> {
        if let Some((i, &v)) = log_weights
            .iter()
            .enumerate()
            .find(|(_, v)| v.is_nan() || **v == f64::INFINITY)
        {
            return Err(Error::invalid(format!("log-weight {i} is {v}")));
        }
        Ok(Self { log_weights })
    }

    /// From plain nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        check_weights(weights)?;
        Self::from_log_weights(weights.iter().map(|w| w.ln()).collect())
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn num_arms(&self) -> usize {
        self.log_weights.len()
    }

    /// Plain weights scaled so the largest is 1.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let top = self.max_log();
        self.log_weights.iter().map(|l| (l - top).exp()).collect()
    }

    fn max_log(&self) -> f64 {
        let top = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top.is_finite() {
            top
        } else {
            0.0
        }
    }

    fn check_support(&self, m: usize) -> Result<()> {
        let k = self.num_arms();
        if m == 0 || m > k {
            return Err(Error::invalid(format!("need 1 <= M <= K, got M = {m}, K = {k}")));
        }
        let found = self.log_weights.iter().filter(|l| l.is_finite()).count();
        if found < m {
            return Err(Error::InsufficientWeights { needed: m, found });
        }
        Ok(())
    }

    /// Log-probability of one subset.
    pub fn log_probability(&self, subset: &MetaArm) -> Result<f64> {
        let m = subset.len();
        self.check_support(m)?;
        if let Some(&a) = subset.arms().last().filter(|&&a| a > self.num_arms()) {
            return Err(Error::ArmOutOfRange {
                arm: a,
                num_arms: self.num_arms(),
            });
        }
        let e = log_elementary_symmetric(&self.log_weights, m);
        Ok(subset.arms().iter().map(|&a| self.log_weights[a - 1]).sum::<f64>() - e[m])
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    match weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0) || w.is_infinite()) {
        Some((index, &value)) => Err(Error::NegativeWeight { index, value }),
        None => Ok(()),
    }
}

/// `e_0..=e_m` of plain nonnegative weights by the standard recurrence.
///
/// Fine for small, well-scaled inputs; the protocols use
/// [`log_elementary_symmetric`].
pub fn elementary_symmetric(weights: &[f64], m: usize) -> Result<Vec<f64>> {
    check_weights(weights)?;
    if m > weights.len() {
        return Err(Error::invalid(format!(
            "order {m} exceeds the {} weights",
            weights.len()
        )));
    }
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for &w in weights {
        for j in (1..=m).rev() {
            e[j] += w * e[j - 1];
        }
    }
    Ok(e)
}

/// `ln e_0..=ln e_m` from log-weights (`-inf` where a polynomial is 0).
///
/// Orders above the number of weights are reported as `-inf`.
pub fn log_elementary_symmetric(log_weights: &[f64], m: usize) -> Vec<f64> {
    let mut e = vec![f64::NEG_INFINITY; m + 1];
    e[0] = 0.0;
    for &lw in log_weights {
        for j in (1..=m).rev() {
            e[j] = log_add(e[j], lw + e[j - 1]);
        }
    }
    e
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// `table[i][j] = ln e_j(w_i, .., w_K)` (0-based `i`, with `table[K]` the empty suffix).
fn suffix_table(log_weights: &[f64], m: usize) -> Vec<Vec<f64>> {
    let k = log_weights.len();
    let mut table = vec![vec![f64::NEG_INFINITY; m + 1]; k + 1];
    table[k][0] = 0.0;
    for i in (0..k).rev() {
        let (head, tail) = table.split_at_mut(i + 1);
        let (row, next) = (&mut head[i], &tail[0]);
        row[0] = 0.0;
        for j in 1..=m {
            row[j] = log_add(next[j], log_weights[i] + next[j - 1]);
        }
    }
    table
}

/// Draws `A` with probability `prod_{k in A} w_k / e_M`.
///
/// Walks the arms once, including arm `i` with its conditional probability
/// `w_i e_{r-1}(w_{i+1..}) / e_r(w_{i..})` where `r` slots remain.
pub fn sample_meta_arm<R: Rng + ?Sized>(w: &WeightVector, m: usize, rng: &mut R) -> Result<MetaArm> {
    w.check_support(m)?;
    let lw = &w.log_weights;
    let table = suffix_table(lw, m);
    let mut arms = Vec::with_capacity(m);
    let mut r = m;
    for i in 0..lw.len() {
        if r == 0 {
            break;
        }
        let p = (lw[i] + table[i + 1][r - 1] - table[i][r]).exp();
        if rng.gen::<f64>() < p {
            arms.push(i + 1);
            r -= 1;
        }
    }
    // rounding can leave p a hair under 1 where inclusion is forced
    if r > 0 {
        for i in (0..lw.len()).rev() {
            if r == 0 {
                break;
            }
            if lw[i].is_finite() && !arms.contains(&(i + 1)) {
                arms.push(i + 1);
                r -= 1;
            }
        }
    }
    MetaArm::new(arms, lw.len())
}

/// `P(k in A) = w_k e_{M-1}(w without k) / e_M(w)`.
pub fn marginal(w: &WeightVector, m: usize, k: usize) -> Result<f64> {
    if !(1..=w.num_arms()).contains(&k) {
        return Err(Error::ArmOutOfRange {
            arm: k,
            num_arms: w.num_arms(),
        });
    }
    w.check_support(m)?;
    let lw = &w.log_weights;
    let mut rest = lw.clone();
    rest.remove(k - 1);
    let without = log_elementary_symmetric(&rest, m - 1);
    let all = log_elementary_symmetric(lw, m);
    Ok((lw[k - 1] + without[m - 1] - all[m]).exp().min(1.0))
}

/// All `K` marginals; index `k - 1` holds arm `k`. Prefix and suffix tables make this
/// `O(K M^2)` rather than `K` separate passes.
pub fn marginals(w: &WeightVector, m: usize) -> Result<Vec<f64>> {
    w.check_support(m)?;
    let lw = &w.log_weights;
    let k = lw.len();
    let suffix = suffix_table(lw, m);
    let total = suffix[0][m];
    let mut prefix = vec![f64::NEG_INFINITY; m + 1];
    prefix[0] = 0.0;
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        // e_{m-1} of all weights but i, split into before-i and after-i parts
        let mut without = f64::NEG_INFINITY;
        for j in 0..m {
            without = log_add(without, prefix[j] + suffix[i + 1][m - 1 - j]);
        }
        out.push((lw[i] + without - total).exp().min(1.0));
        for j in (1..=m).rev() {
            prefix[j] = log_add(prefix[j], lw[i] + prefix[j - 1]);
        }
    }
    Ok(out)
}

/// Per-arm cumulative loss estimates and the number of completed phases.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub cum_est: Vec<f64>,
    pub phase: usize,
}

impl EstimatorState {
    pub fn new(num_arms: usize) -> Self {
        Self {
            cum_est: vec![0.0; num_arms],
            phase: 0,
        }
    }

    /// Closes a phase. On success the leader's arm gets
    /// `(M / tau) * observed / marginal`; the other arms and failed phases add
    /// nothing. The phase counter advances either way.
    pub fn update(&mut self, update: &PhaseFeedback) -> Result<()> {
        let k = self.cum_est.len();
        if !(1..=k).contains(&update.leader_arm) {
            return Err(Error::ArmOutOfRange {
                arm: update.leader_arm,
                num_arms: k,
            });
        }
        if !update.chosen.contains(update.leader_arm) {
            return Err(Error::invalid("leader arm is not in the chosen meta-arm"));
        }
        if !(update.marginal > 0.0 && update.marginal <= 1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "marginal {} outside (0, 1]",
                update.marginal
            )));
        }
        if update.tau == 0 {
            return Err(Error::invalid("tau must be at least 1"));
        }
        if !(update.observed >= 0.0 && update.observed <= update.tau as f64) {
            return Err(Error::invalid(format!(
                "observed loss {} outside [0, tau]",
                update.observed
            )));
        }
        if update.success {
            self.cum_est[update.leader_arm - 1] += increment(
                update.players,
                update.tau,
                update.observed,
                update.marginal,
            );
        }
        self.phase += 1;
        Ok(())
    }
}

/// Everything the leader knows about one finished exploration block.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFeedback {
    pub chosen: MetaArm,
    pub leader_arm: usize,
    pub observed: f64,
    pub tau: usize,
    /// `P(leader_arm in A)` under the distribution the meta-arm was drawn from.
    pub marginal: f64,
    pub players: usize,
    pub success: bool,
}

/// `(M / tau) * observed / marginal`.
pub fn increment(players: usize, tau: usize, observed: f64, marginal: f64) -> f64 {
    players as f64 / tau as f64 * observed / marginal
}

/// `log w_k = -eta * L_k`, shifted so the largest is 0.
pub fn weights_from_estimates(state: &EstimatorState, eta: f64) -> WeightVector {
    let raw: Vec<f64> = state.cum_est.iter().map(|l| -eta * l).collect();
    let top = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shift = if top.is_finite() { top } else { 0.0 };
    WeightVector {
        log_weights: raw.into_iter().map(|l| if l.is_nan() { 0.0 } else { l - shift }).collect(),
    }
}

/// `ln C(K, M)` as a sum of logs.
pub fn ln_binomial(num_arms: usize, m: usize) -> f64 {
    let m = m.min(num_arms - m.min(num_arms));
    (0..m)
        .map(|i| ((num_arms - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Learning rate for blocked play: `sqrt(ln C(K, M) * tau / (M K T))`.
pub fn eta(players: usize, num_arms: usize, horizon: usize, tau: usize) -> f64 {
    (ln_binomial(num_arms, players) * tau as f64
        / (players as f64 * num_arms as f64 * horizon as f64))
        .sqrt()
}
