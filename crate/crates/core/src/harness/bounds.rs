//! Asymptotic regret bounds with unit constants and log factors dropped.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundModel {
    /// Centralized multi-player optimum, `sqrt(MKT)`.
    Centralized,
    AlphaAware,
    BetaAware,
    AlphaUnaware,
    BetaUnaware,
    /// The collision-avoidance no-sensing algorithm, `M K^1.5 T^(1 - 1/(2M))`.
    NoSensingReference,
}

impl BoundModel {
    pub const ALL: [BoundModel; 6] = [
        BoundModel::Centralized,
        BoundModel::AlphaAware,
        BoundModel::BetaAware,
        BoundModel::AlphaUnaware,
        BoundModel::BetaUnaware,
        BoundModel::NoSensingReference,
    ];

    pub const COORDINATED: [BoundModel; 4] = [
        BoundModel::AlphaAware,
        BoundModel::BetaAware,
        BoundModel::AlphaUnaware,
        BoundModel::BetaUnaware,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundModel::Centralized => "centralized",
            BoundModel::AlphaAware => "alpha_aware",
            BoundModel::BetaAware => "beta_aware",
            BoundModel::AlphaUnaware => "alpha_unaware",
            BoundModel::BetaUnaware => "beta_unaware",
            BoundModel::NoSensingReference => "no_sensing_reference",
        }
    }

    /// Exponent of `T` in the bound.
    pub fn t_exponent(self, players: usize, attack: f64, eps: f64) -> f64 {
        match self {
            BoundModel::Centralized => 0.5,
            BoundModel::AlphaAware => (2.0 + attack + eps) / 3.0,
            BoundModel::BetaAware => ((1.0 + attack) / 2.0).max(2.0 / 3.0),
            BoundModel::AlphaUnaware => (5.0 + attack + eps) / 6.0,
            BoundModel::BetaUnaware => ((2.0 + attack + eps) / 3.0).max(0.75),
            BoundModel::NoSensingReference => 1.0 - 1.0 / (2.0 * players as f64),
        }
    }
}

impl fmt::Display for BoundModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        BoundModel::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::Unknown {
                what: "bound model",
                name: s.to_owned(),
            })
    }
}

/// Bound value for `M` players, `K` arms, horizon `T` and attackability exponent
/// `attack` (alpha or beta, ignored by the models that do not depend on it).
///
/// The expressions stay defined for `M > K`, so player sweeps past `K` are allowed.
pub fn theory_bound(
    model: BoundModel,
    players: usize,
    num_arms: usize,
    horizon: usize,
    attack: f64,
    eps: f64,
) -> Result<f64> {
    if players == 0 || num_arms == 0 || horizon == 0 {
        return Err(Error::invalid(format!(
            "need M, K, T >= 1, got M = {players}, K = {num_arms}, T = {horizon}"
        )));
    }
    if !(0.0..=1.0).contains(&attack) || !(eps >= 0.0) {
        return Err(Error::invalid("attack parameter must lie in [0, 1] and eps >= 0"));
    }
    let (m, k, t) = (players as f64, num_arms as f64, horizon as f64);
    let prefactor = match model {
        BoundModel::Centralized => (m * k).sqrt(),
        BoundModel::AlphaAware | BoundModel::AlphaUnaware => m.powf(4.0 / 3.0) * k.cbrt(),
        BoundModel::BetaAware => m * m * k.powf(2.0 / 3.0),
        BoundModel::BetaUnaware => m * m * k.cbrt(),
        BoundModel::NoSensingReference => m * k.powf(1.5),
    };
    Ok(prefactor * t.powf(model.t_exponent(players, attack, eps)))
}
