//! Phase-length schedules of the four coordination protocols.

use crate::selector;
use crate::{Error, Result};

/// Everything that fixes the slot layout of one phase.
///
/// Fields a protocol does not use keep a neutral value (`1` for lengths, `0` for
/// exponents).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// Exploration block length.
    pub tau: usize,
    pub eta: f64,
    /// Repetition length of the α protocols.
    pub h: usize,
    /// Coded length of assignments and error reports in the β protocols.
    pub k_code: usize,
    /// Exponent of the sync round range `1..=ceil(T^xi)`.
    pub xi: f64,
    /// Coding exponent of the β protocols.
    pub nu: f64,
    /// Repetition length of one sync round.
    pub sync_len: usize,
    pub epsilon_step: f64,
}

impl ProtocolParams {
    /// Upper end of the uniform sync round count, `ceil(T^xi)`.
    pub fn max_sync_rounds(&self, horizon: usize) -> usize {
        ceil_pow(horizon, self.xi)
    }
}

/// `max(1, ceil(T^e))`, treating values within a relative `1e-9` of an integer as
/// that integer so that e.g. `10^(0.5 * 2)` does not round up to 11.
pub fn ceil_pow(horizon: usize, exponent: f64) -> usize {
    snap_ceil((horizon as f64).powf(exponent))
}

pub(crate) fn snap_ceil(v: f64) -> usize {
    let r = v.round();
    let c = if (v - r).abs() <= 1e-9 * v.abs().max(1.0) {
        r
    } else {
        v.ceil()
    };
    (c as usize).max(1)
}

fn check_players(players: usize, num_arms: usize, horizon: usize) -> Result<()> {
    if players < 2 {
        return Err(Error::invalid(
            "coordination protocols need at least 2 players",
        ));
    }
    if players > num_arms {
        return Err(Error::invalid(format!("M = {players} exceeds K = {num_arms}")));
    }
    if horizon == 0 {
        return Err(Error::invalid("T must be at least 1"));
    }
    Ok(())
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

fn finish(players: usize, num_arms: usize, horizon: usize, tau_real: f64) -> (usize, f64) {
    let tau = snap_ceil(tau_real);
    (tau, selector::eta(players, num_arms, horizon, tau))
}

/// Known local attackability `alpha`, margin `eps`.
pub fn params_alpha_aware(
    players: usize,
    num_arms: usize,
    horizon: usize,
    alpha: f64,
    eps: f64,
) -> Result<ProtocolParams> {
    check_players(players, num_arms, horizon)?;
    check_unit("alpha", alpha)?;
    if !(eps > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let (m, k, t) = (players as f64, num_arms as f64, horizon as f64);
    let tau_real = m.powf(2.0 / 3.0)
        * k.powf(-1.0 / 3.0)
        * k.ln().powf(1.0 / 3.0)
        * t.powf((1.0 + 2.0 * alpha + 2.0 * eps) / 3.0);
    let (tau, eta) = finish(players, num_arms, horizon, tau_real);
    Ok(ProtocolParams {
        tau,
        eta,
        h: ceil_pow(horizon, alpha + eps),
        k_code: 1,
        xi: 0.0,
        nu: 0.0,
        sync_len: 1,
        epsilon_step: eps,
    })
}

/// Known global attackability `beta`.
pub fn params_beta_aware(
    players: usize,
    num_arms: usize,
    horizon: usize,
    beta: f64,
) -> Result<ProtocolParams> {
    check_players(players, num_arms, horizon)?;
    check_unit("beta", beta)?;
    let (k, t) = (num_arms as f64, horizon as f64);
    let tau_real = k.powf(1.0 / 3.0) * k.ln().powf(-1.0 / 3.0) * t.powf(beta.max(1.0 / 3.0));
    let (tau, eta) = finish(players, num_arms, horizon, tau_real);
    let nu = ((3.0 * beta - 1.0) / 2.0).max(0.0);
    Ok(ProtocolParams {
        tau,
        eta,
        h: 1,
        k_code: ceil_pow(horizon, nu),
        xi: 0.0,
        nu,
        sync_len: 1,
        epsilon_step: 0.0,
    })
}

/// Schedule under the current estimate `alpha_est` of the local attackability.
pub fn params_alpha_unaware(
    players: usize,
    num_arms: usize,
    horizon: usize,
    alpha_est: f64,
    eps: f64,
) -> Result<ProtocolParams> {
    check_players(players, num_arms, horizon)?;
    check_unit("alpha estimate", alpha_est)?;
    let (m, k, t) = (players as f64, num_arms as f64, horizon as f64);
    let tau_real = m.powf(2.0 / 3.0)
        * k.powf(-1.0 / 3.0)
        * k.ln().powf(-1.0 / 3.0)
        * t.powf((2.0 + alpha_est) / 3.0);
    let (tau, eta) = finish(players, num_arms, horizon, tau_real);
    let h = ceil_pow(horizon, alpha_est);
    Ok(ProtocolParams {
        tau,
        eta,
        h,
        k_code: 1,
        xi: (1.0 - alpha_est) / 2.0,
        nu: 0.0,
        sync_len: h,
        epsilon_step: eps,
    })
}

/// Lowest admissible global attackability estimate; the estimate starts here.
pub const BETA_FLOOR: f64 = 0.25;

/// Schedule under the current estimate `beta_est` of the global attackability.
pub fn params_beta_unaware(
    players: usize,
    num_arms: usize,
    horizon: usize,
    beta_est: f64,
    eps: f64,
) -> Result<ProtocolParams> {
    check_players(players, num_arms, horizon)?;
    if !(BETA_FLOOR..=1.0).contains(&beta_est) {
        return Err(Error::invalid(format!(
            "beta estimate {beta_est} outside [1/4, 1]"
        )));
    }
    let (k, t) = (num_arms as f64, horizon as f64);
    let tau_real = k.powf(-1.0 / 3.0) * k.ln().powf(-1.0 / 3.0) * t.powf((1.0 + 2.0 * beta_est) / 3.0);
    let (tau, eta) = finish(players, num_arms, horizon, tau_real);
    let nu = (4.0 * beta_est - 1.0) / 3.0;
    Ok(ProtocolParams {
        tau,
        eta,
        h: 1,
        k_code: ceil_pow(horizon, nu),
        xi: (2.0 - 2.0 * beta_est) / 3.0,
        nu,
        sync_len: ceil_pow(horizon, beta_est),
        epsilon_step: eps,
    })
}

/// Phases between two update points of the β-unaware protocol: `ceil(T^b / k)`.
pub fn update_period(horizon: usize, beta_est: f64, k_code: usize) -> usize {
    snap_ceil((horizon as f64).powf(beta_est) / k_code as f64)
}

/// One escalation step: `min(est + F * eps, 1)`.
pub fn escalate(est: f64, flag: bool, eps: f64) -> f64 {
    if flag {
        (est + eps).min(1.0)
    } else {
        est
    }
}

/// The estimate grid `{base, base + eps, ..}` capped at 1, indexed by level.
///
/// Agents store the level rather than a running float sum, so every agent that
/// escalated the same number of times holds a bit-identical estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateGrid {
    pub base: f64,
    pub step: f64,
}

impl EstimateGrid {
    pub fn value(&self, level: usize) -> f64 {
        (self.base + level as f64 * self.step).min(1.0)
    }

    /// Level at which the estimate reaches 1.
    pub fn top_level(&self) -> usize {
        if self.step <= 0.0 {
            return 0;
        }
        snap_ceil((1.0 - self.base) / self.step).max(1)
    }

    pub fn escalate(&self, level: usize, flag: bool) -> usize {
        if flag {
            (level + 1).min(self.top_level())
        } else {
            level
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_aware_tau() {
        // 50-digit evaluation of the closed form gives 2683.9756...
        let p = params_alpha_aware(4, 10, 1_000_000, 0.3, 0.01).unwrap();
        assert_eq!(p.tau, 2684);
        assert_eq!(p.h, 1_000_000f64.powf(0.31).ceil() as usize);
        assert_eq!(params_alpha_aware(4, 10, 1000, 0.0, 1e-12).unwrap().h, 1);
        assert!(params_alpha_aware(1, 10, 1000, 0.3, 0.01).is_err());
        assert!(params_alpha_aware(11, 10, 1000, 0.3, 0.01).is_err());
        assert!(params_alpha_aware(4, 10, 1000, 0.3, 0.0).is_err());
        let lin = params_alpha_aware(2, 2, 1000, 1.0, 1e-9).unwrap();
        assert!(lin.tau >= 1000 / 2);
    }

    #[test]
    fn beta_aware_coding() {
        let p = params_beta_aware(4, 10, 100_000, 1.0 / 3.0).unwrap();
        assert_eq!(p.nu, 0.0);
        assert_eq!(p.k_code, 1);
        assert!((params_beta_aware(4, 10, 1000, 0.5).unwrap().nu - 0.25).abs() < 1e-15);
        let low = params_beta_aware(4, 10, 1_000_000, 0.0).unwrap();
        let third = params_beta_aware(4, 10, 1_000_000, 1.0 / 3.0).unwrap();
        assert_eq!(low.tau, third.tau);
    }

    #[test]
    fn alpha_unaware_schedule() {
        let p = params_alpha_unaware(4, 10, 10_000, 0.0, 0.01).unwrap();
        assert_eq!(p.xi, 0.5);
        assert_eq!(p.h, 1);
        assert_eq!(p.max_sync_rounds(10_000), 100);
        let top = params_alpha_unaware(4, 10, 10_000, 1.0, 0.01).unwrap();
        assert_eq!(top.xi, 0.0);
        assert_eq!(top.max_sync_rounds(10_000), 1);
        assert_eq!(params_alpha_unaware(4, 10, 400, 0.0, 0.01).unwrap().max_sync_rounds(400), 20);
    }

    #[test]
    fn beta_unaware_schedule() {
        let p = params_beta_unaware(4, 10, 10_000, 0.25, 0.01).unwrap();
        assert_eq!(p.nu, 0.0);
        assert_eq!(p.k_code, 1);
        assert_eq!(p.xi, 0.5);
        assert_eq!(p.sync_len, 10);
        assert_eq!(params_beta_unaware(4, 10, 10_000, 1.0, 0.01).unwrap().nu, 1.0);
        assert!(params_beta_unaware(4, 10, 10_000, 0.2, 0.01).is_err());
        assert_eq!(update_period(10_000, 0.25, 1), 10);
        assert_eq!(update_period(10_000, 0.5, 3), 34);
    }

    #[test]
    fn ceil_pow_snaps() {
        assert_eq!(ceil_pow(100, 0.5), 10);
        assert_eq!(ceil_pow(1000, 1.0 / 3.0), 10);
        assert_eq!(ceil_pow(99, 0.5), 10);
        assert_eq!(ceil_pow(10, 0.0), 1);
        assert_eq!(ceil_pow(400, 0.5), 20);
    }

    #[test]
    fn escalation() {
        assert_eq!(escalate(0.0, true, 0.05), 0.05);
        assert_eq!(escalate(0.3, false, 0.05), 0.3);
        assert_eq!(escalate(0.98, true, 0.05), 1.0);

        let g = EstimateGrid { base: 0.0, step: 0.05 };
        assert_eq!(g.top_level(), 20);
        assert!((g.value(6) - 0.3).abs() < 1e-12);
        assert_eq!(g.escalate(20, true), 20);
        assert_eq!(g.value(25), 1.0);
        let b = EstimateGrid { base: 0.25, step: 0.01 };
        assert_eq!(b.top_level(), 75);
        assert_eq!(EstimateGrid { base: 0.0, step: 0.03 }.top_level(), 34);
    }
}
