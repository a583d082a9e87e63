use super::{ActionProfile, LossMatrix};
use crate::{Error, Result};

/// Loss of the best allocation of `players` distinct arms over the whole horizon.
pub fn best_allocation_loss(loss: &LossMatrix, players: usize) -> Result<f64> {
    best_allocation_loss_upto(loss, players, loss.horizon())
}

/// Loss of the best allocation of `players` distinct arms over slots `1..=upto`.
///
/// Losses do not depend on the player, so this is the sum of the `players`
/// smallest cumulative arm losses.
pub fn best_allocation_loss_upto(loss: &LossMatrix, players: usize, upto: usize) -> Result<f64> {
    check_players(loss, players)?;
    Ok(sum_smallest(loss.cumulative(upto), players))
}

fn check_players(loss: &LossMatrix, players: usize) -> Result<()> {
    if players == 0 || players > loss.num_arms() {
        return Err(Error::invalid(format!(
            "need 1 <= M <= K, got M = {players}, K = {}",
            loss.num_arms()
        )));
    }
    Ok(())
}

fn sum_smallest(mut cum: Vec<f64>, players: usize) -> f64 {
    cum.sort_by(f64::total_cmp);
    cum[..players].iter().sum()
}

/// Cumulative regret at each checkpoint: realized loss (collision rule applied)
/// minus the best allocation over the same prefix.
///
/// `actions[t - 1]` is the profile played at slot `t`. Checkpoints must be strictly
/// increasing and no later than `actions.len()`.
pub fn regret(
    loss: &LossMatrix,
    actions: &[ActionProfile],
    players: usize,
    checkpoints: &[usize],
) -> Result<Vec<f64>> {
    check_players(loss, players)?;
    if actions.len() > loss.horizon() {
        return Err(Error::invalid(format!(
            "{} action profiles for a horizon of {}",
            actions.len(),
            loss.horizon()
        )));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("checkpoints must be strictly increasing"));
    }
    if let Some(&c) = checkpoints.iter().find(|&&c| c == 0 || c > actions.len()) {
        return Err(Error::invalid(format!(
            "checkpoint {c} outside 1..={}",
            actions.len()
        )));
    }

    let k = loss.num_arms();
    let mut arm_cum = vec![0.0; k];
    let mut realized = 0.0;
    let mut counts = vec![0usize; k];
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();

    for (i, profile) in actions.iter().enumerate() {
        let t = i + 1;
        if profile.arms.len() != players {
            return Err(Error::LengthMismatch {
                expected: players,
                actual: profile.arms.len(),
            });
        }
        for &a in &profile.arms {
            if !(1..=k).contains(&a) {
                return Err(Error::ArmOutOfRange { arm: a, num_arms: k });
            }
            counts[a - 1] += 1;
        }
        for &a in &profile.arms {
            realized += if counts[a - 1] > 1 { 1.0 } else { loss.loss(a, t) };
        }
        for &a in &profile.arms {
            counts[a - 1] = 0;
        }
        for (arm, c) in arm_cum.iter_mut().enumerate() {
            *c += loss.loss(arm + 1, t);
        }
        if next.peek() == Some(&&t) {
            next.next();
            out.push(realized - sum_smallest(arm_cum.clone(), players));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> LossMatrix {
        LossMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn best_allocation_examples() {
        let m = LossMatrix::from_rows(vec![vec![5.0 / 5.0; 5], vec![0.4; 5], vec![0.8; 5]]).unwrap();
        // cumulative losses 5, 2, 4
        assert!((best_allocation_loss(&m, 2).unwrap() - 6.0).abs() < 1e-12);
        assert!((best_allocation_loss(&m, 3).unwrap() - 11.0).abs() < 1e-12);
        assert_eq!(best_allocation_loss(&LossMatrix::zeros(4, 7).unwrap(), 2).unwrap(), 0.0);
        assert!(best_allocation_loss(&m, 4).is_err());
        assert!(best_allocation_loss(&m, 0).is_err());
    }

    #[test]
    fn regret_examples() {
        let m = two_by_two();
        let fixed = vec![ActionProfile::new(vec![1, 2]); 2];
        assert_eq!(regret(&m, &fixed, 2, &[2]).unwrap(), vec![0.0]);

        let colliding = vec![ActionProfile::new(vec![1, 1]), ActionProfile::new(vec![1, 2])];
        // realized 1 + 1 + 1 + 0 = 3, best allocation 2
        assert_eq!(regret(&m, &colliding, 2, &[1, 2]).unwrap(), vec![1.0, 1.0]);

        let z = LossMatrix::zeros(3, 4).unwrap();
        let spread = vec![ActionProfile::new(vec![3, 1]); 4];
        assert_eq!(regret(&z, &spread, 2, &[1, 2, 3, 4]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn regret_uses_prefix_comparator() {
        // arm 1 is best early, arm 2 late
        let m = LossMatrix::from_rows(vec![vec![0.0, 0.0, 1.0, 1.0, 1.0], vec![0.5; 5]]).unwrap();
        let play = vec![ActionProfile::new(vec![1]); 5];
        let r = regret(&m, &play, 1, &[2, 5]).unwrap();
        assert_eq!(r[0], 0.0);
        assert!((r[1] - (3.0 - 2.5)).abs() < 1e-12);
    }

    #[test]
    fn regret_input_checks() {
        let m = two_by_two();
        let play = vec![ActionProfile::new(vec![1, 2]); 2];
        assert!(regret(&m, &play, 2, &[3]).is_err());
        assert!(regret(&m, &play, 2, &[2, 1]).is_err());
        assert!(regret(&m, &play, 2, &[0]).is_err());
        assert!(regret(&m, &[ActionProfile::new(vec![1])], 2, &[1]).is_err());
        assert!(regret(&m, &[ActionProfile::new(vec![1, 3])], 2, &[1]).is_err());
    }
}
