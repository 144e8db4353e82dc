//! Games, scheduling vectors and the damped random-walk coefficients.

use crate::error::{Error, Result};

/// One game. Player indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameRecord {
    /// 1-based game counter within its sequence.
    pub t_index: usize,
    /// Day stamp; nondecreasing along a sequence.
    pub tau: u64,
    pub home: Vec<usize>,
    pub away: Vec<usize>,
    pub outcome: u8,
}

impl GameRecord {
    pub fn new(t_index: usize, tau: u64, home: Vec<usize>, away: Vec<usize>, outcome: u8) -> Result<Self> {
        check_sides(&home, &away)?;
        Ok(GameRecord {
            t_index,
            tau,
            home,
            away,
            outcome,
        })
    }

    /// One-on-one convenience constructor.
    pub fn duel(t_index: usize, tau: u64, home: usize, away: usize, outcome: u8) -> Result<Self> {
        Self::new(t_index, tau, vec![home], vec![away], outcome)
    }

    /// `(player, x_m)` pairs of the nonzero entries of the scheduling vector.
    pub fn participants(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.home
            .iter()
            .map(|&m| (m, 1.0))
            .chain(self.away.iter().map(|&m| (m, -1.0)))
    }

    pub fn check_players(&self, players: usize) -> Result<()> {
        match self.participants().find(|&(m, _)| m >= players) {
            Some((id, _)) => Err(Error::PlayerOutOfRange { id, players }),
            None => Ok(()),
        }
    }

    /// Group size `F` when both sides have the same number of players.
    pub fn balanced_size(&self, engine: &'static str) -> Result<usize> {
        if self.home.len() == self.away.len() {
            Ok(self.home.len())
        } else {
            Err(Error::UnbalancedGroups {
                engine,
                home: self.home.len(),
                away: self.away.len(),
            })
        }
    }

    pub fn is_duel(&self) -> bool {
        self.home.len() == 1 && self.away.len() == 1
    }

    /// `x_t^T mu`.
    pub fn skill_difference(&self, mu: &[f64]) -> f64 {
        self.home.iter().map(|&m| mu[m]).sum::<f64>() - self.away.iter().map(|&m| mu[m]).sum::<f64>()
    }
}

fn check_sides(home: &[usize], away: &[usize]) -> Result<()> {
    if home.is_empty() || away.is_empty() {
        return Err(Error::EmptySide);
    }
    if let Some(&m) = home.iter().find(|m| away.contains(m)) {
        return Err(Error::OverlappingSides(m));
    }
    for side in [home, away] {
        if side.iter().enumerate().any(|(i, m)| side[..i].contains(m)) {
            return Err(Error::domain("a player is listed twice on the same side"));
        }
    }
    Ok(())
}

/// Sparse combined scheduling vector `x_t = x_home - x_away`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleVector {
    players: usize,
    entries: Vec<(usize, f64)>,
}

impl ScheduleVector {
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.players];
        for &(m, x) in &self.entries {
            out[m] = x;
        }
        out
    }
}

pub fn make_schedule_vector(home: &[usize], away: &[usize], players: usize) -> Result<ScheduleVector> {
    check_sides(home, away)?;
    if let Some(&id) = home.iter().chain(away).find(|&&m| m >= players) {
        return Err(Error::PlayerOutOfRange { id, players });
    }
    let mut entries: Vec<(usize, f64)> = home
        .iter()
        .map(|&m| (m, 1.0))
        .chain(away.iter().map(|&m| (m, -1.0)))
        .collect();
    entries.sort_by_key(|&(m, _)| m);
    Ok(ScheduleVector { players, entries })
}

/// Sum of home skills minus sum of away skills.
pub fn skill_difference(x: &ScheduleVector, mu: &[f64]) -> f64 {
    x.entries.iter().map(|&(m, s)| s * mu[m]).sum()
}

/// Per-time-unit damping `beta` and variance growth `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams {
    pub beta: f64,
    pub epsilon: f64,
}

impl DynamicsParams {
    pub fn new(beta: f64, epsilon: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::config(format!("beta must lie in (0, 1], got {beta}")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::config(format!("epsilon must be nonnegative, got {epsilon}")));
        }
        Ok(DynamicsParams { beta, epsilon })
    }

    /// Undamped walk with the given variance growth.
    pub fn random_walk(epsilon: f64) -> Self {
        DynamicsParams { beta: 1.0, epsilon }
    }
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            beta: 1.0,
            epsilon: 0.0,
        }
    }
}

/// `(beta_t, epsilon_t)` for the gap between two day stamps.
pub fn step_coefficients(params: DynamicsParams, tau_now: u64, tau_prev: u64) -> Result<(f64, f64)> {
    if tau_now < tau_prev {
        return Err(Error::TimeReversed {
            now: tau_now,
            prev: tau_prev,
        });
    }
    let gap = tau_now - tau_prev;
    if gap == 0 {
        return Ok((1.0, 0.0));
    }
    let beta_t = if params.beta == 1.0 {
        1.0
    } else {
        params.beta.powf(gap as f64)
    };
    Ok((beta_t, gap as f64 * params.epsilon))
}
