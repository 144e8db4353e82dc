//! Online rating engines.
//!
//! All engines share one pattern: damp the means and inflate the variances
//! for the elapsed time, evaluate `g` and `h` at the predicted skill
//! difference, and apply a single Newton-type correction to the players of
//! the game. They differ in how the posterior covariance is represented:
//!
//! | engine    | covariance            |
//! |-----------|-----------------------|
//! | KF        | full matrix           |
//! | vSKF      | per-player variances  |
//! | sSKF      | one shared variance   |
//! | fSKF      | fixed variance        |
//! | SG, Elo   | none (means only)     |
//! | TrueSkill | per-player variances  |
//! | Glicko    | per-player variances  |
//!
//! Steps follow a consume-and-return style (`kf_step(state, ..) -> state`);
//! [`Rater`] wraps the same updates behind `&mut self` for loops.

mod export;
mod gradient;
mod kalman;
mod reference;

use std::fmt;

use nalgebra::DMatrix;

pub use export::{write_covariance_matrix, SnapshotWriter};
pub use gradient::{elo_step, sg_step};
pub use kalman::{fskf_step, kf_step, sskf_step, vskf_step};
pub use reference::{glicko_step, glicko_variance_factor, trueskill_step};

use crate::error::{Error, Result};
use crate::outcome::{ModelKind, ModelSpec};
use crate::projection::CovarianceSummary;
use crate::schedule::{step_coefficients, DynamicsParams, GameRecord};

/// Lower bound on `s^2 + h omega`, relative to `s^2`.
pub(crate) const DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Kf,
    Vskf,
    Sskf,
    Fskf,
    Sg,
    TrueSkill,
    Glicko,
    Elo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Kf,
        Algorithm::Vskf,
        Algorithm::Sskf,
        Algorithm::Fskf,
        Algorithm::Sg,
        Algorithm::TrueSkill,
        Algorithm::Glicko,
        Algorithm::Elo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Kf => "kf",
            Algorithm::Vskf => "vskf",
            Algorithm::Sskf => "sskf",
            Algorithm::Fskf => "fskf",
            Algorithm::Sg => "sg",
            Algorithm::TrueSkill => "trueskill",
            Algorithm::Glicko => "glicko",
            Algorithm::Elo => "elo",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name().eq_ignore_ascii_case(name))
    }

    fn needs_v0(&self) -> bool {
        matches!(
            self,
            Algorithm::Kf | Algorithm::Vskf | Algorithm::Sskf | Algorithm::TrueSkill | Algorithm::Glicko
        )
    }

    fn needs_sigma(&self) -> bool {
        matches!(self, Algorithm::TrueSkill | Algorithm::Glicko)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Algorithm choice plus its hyperparameters.
///
/// Only the fields the algorithm uses may be set: `v0` for KF/vSKF/sSKF/
/// TrueSkill/Glicko, `v_bar` for fSKF, `step_k` for SG and Elo, `sigma` for
/// TrueSkill and Glicko (where it replaces the model scale).
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub algorithm: Algorithm,
    pub model: ModelSpec,
    pub dynamics: DynamicsParams,
    pub v0: Option<f64>,
    pub v_bar: Option<f64>,
    pub step_k: Option<f64>,
    pub sigma: Option<f64>,
}

impl EngineConfig {
    fn bare(algorithm: Algorithm, model: ModelSpec, dynamics: DynamicsParams) -> Self {
        EngineConfig {
            algorithm,
            model,
            dynamics,
            v0: None,
            v_bar: None,
            step_k: None,
            sigma: None,
        }
    }

    pub fn kf(model: ModelSpec, dynamics: DynamicsParams, v0: f64) -> Result<Self> {
        EngineConfig { v0: Some(v0), ..Self::bare(Algorithm::Kf, model, dynamics) }.validated()
    }

    pub fn vskf(model: ModelSpec, dynamics: DynamicsParams, v0: f64) -> Result<Self> {
        EngineConfig { v0: Some(v0), ..Self::bare(Algorithm::Vskf, model, dynamics) }.validated()
    }

    pub fn sskf(model: ModelSpec, dynamics: DynamicsParams, v0: f64) -> Result<Self> {
        EngineConfig { v0: Some(v0), ..Self::bare(Algorithm::Sskf, model, dynamics) }.validated()
    }

    pub fn fskf(model: ModelSpec, dynamics: DynamicsParams, v_bar: f64) -> Result<Self> {
        EngineConfig { v_bar: Some(v_bar), ..Self::bare(Algorithm::Fskf, model, dynamics) }.validated()
    }

    pub fn sg(model: ModelSpec, dynamics: DynamicsParams, step_k: f64) -> Result<Self> {
        EngineConfig { step_k: Some(step_k), ..Self::bare(Algorithm::Sg, model, dynamics) }.validated()
    }

    pub fn elo(model: ModelSpec, dynamics: DynamicsParams, step_k: f64) -> Result<Self> {
        EngineConfig { step_k: Some(step_k), ..Self::bare(Algorithm::Elo, model, dynamics) }.validated()
    }

    pub fn trueskill(model: ModelSpec, dynamics: DynamicsParams, v0: f64, sigma: f64) -> Result<Self> {
        EngineConfig {
            v0: Some(v0),
            sigma: Some(sigma),
            ..Self::bare(Algorithm::TrueSkill, model, dynamics)
        }
        .validated()
    }

    pub fn glicko(model: ModelSpec, dynamics: DynamicsParams, v0: f64, sigma: f64) -> Result<Self> {
        EngineConfig {
            v0: Some(v0),
            sigma: Some(sigma),
            ..Self::bare(Algorithm::Glicko, model, dynamics)
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let alg = self.algorithm;
        let positive = |name: &str, value: Option<f64>, wanted: bool| -> Result<()> {
            match (value, wanted) {
                (Some(v), true) if v > 0.0 && v.is_finite() => Ok(()),
                (Some(v), true) => Err(Error::config(format!("{alg}: {name} must be positive, got {v}"))),
                (None, true) => Err(Error::config(format!("{alg} requires {name}"))),
                (Some(_), false) => Err(Error::config(format!("{alg} does not use {name}"))),
                (None, false) => Ok(()),
            }
        };
        positive("v0", self.v0, alg.needs_v0())?;
        positive("vbar", self.v_bar, alg == Algorithm::Fskf)?;
        positive("K", self.step_k, matches!(alg, Algorithm::Sg | Algorithm::Elo))?;
        positive("sigma", self.sigma, alg.needs_sigma())?;

        let kind = self.model.kind;
        let model_ok = match alg {
            Algorithm::TrueSkill => kind == ModelKind::Thurston,
            Algorithm::Glicko => kind == ModelKind::BradleyTerry,
            Algorithm::Elo => matches!(kind, ModelKind::BradleyTerry | ModelKind::OriginalElo),
            Algorithm::Sg => true,
            _ => kind != ModelKind::OriginalElo,
        };
        if !model_ok {
            return Err(Error::config(format!("{alg} cannot be used with the {} model", kind.name())));
        }
        Ok(())
    }

    /// Scale dividing the skill difference in forecasts.
    pub fn forecast_scale(&self) -> f64 {
        match self.algorithm {
            Algorithm::TrueSkill | Algorithm::Glicko => self.sigma.unwrap_or(self.model.scale_s),
            _ => self.model.scale_s,
        }
    }

    /// Compact `name:key=value,...` description.
    pub fn describe(&self) -> String {
        let mut parts = vec![format!("model={}", self.model.kind.name())];
        if let ModelKind::Davidson { kappa } = self.model.kind {
            parts.push(format!("kappa={kappa}"));
        }
        if !self.algorithm.needs_sigma() {
            parts.push(format!("s={}", self.model.scale_s));
        }
        parts.push(format!("eta={}", self.model.hfa_eta));
        parts.push(format!("beta={}", self.dynamics.beta));
        parts.push(format!("eps={}", self.dynamics.epsilon));
        for (key, value) in [("v0", self.v0), ("vbar", self.v_bar), ("k", self.step_k), ("sigma", self.sigma)] {
            if let Some(v) = value {
                parts.push(format!("{key}={v}"));
            }
        }
        format!("{}:{}", self.algorithm, parts.join(","))
    }
}

/// Posterior summary after the last processed game.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingState {
    pub mu: Vec<f64>,
    /// `None` for the mean-only engines (SG, Elo).
    pub cov: Option<CovarianceSummary>,
    /// Counter of the last processed game, 0 before any game.
    pub t_index: usize,
    /// Day stamp of the last processed game. `None` before any game: the
    /// first game then sees no elapsed time.
    pub tau: Option<u64>,
}

impl RatingState {
    pub fn players(&self) -> usize {
        self.mu.len()
    }

    /// Marginal variance of player `m`, if the engine tracks one.
    pub fn variance(&self, m: usize) -> Option<f64> {
        self.cov.as_ref().map(|c| c.variance(m))
    }

    fn coefficients(&self, game: &GameRecord, dynamics: DynamicsParams) -> Result<(f64, f64)> {
        match self.tau {
            Some(prev) => step_coefficients(dynamics, game.tau, prev),
            None => Ok((1.0, 0.0)),
        }
    }

    fn mark(&mut self, game: &GameRecord) {
        self.t_index = game.t_index;
        self.tau = Some(game.tau);
    }

    fn damp_means(&mut self, beta: f64) {
        if beta != 1.0 {
            self.mu.iter_mut().for_each(|m| *m *= beta);
        }
    }
}

/// Fresh state: zero means and `v0`-scaled covariance of the algorithm's
/// representation.
pub fn init(config: &EngineConfig, players: usize) -> Result<RatingState> {
    config.validate()?;
    if players < 2 {
        return Err(Error::config(format!("need at least two players, got {players}")));
    }
    let cov = match config.algorithm {
        Algorithm::Kf => Some(CovarianceSummary::FullMatrix(DMatrix::from_diagonal_element(
            players,
            players,
            config.v0.unwrap_or_default(),
        ))),
        Algorithm::Vskf | Algorithm::TrueSkill | Algorithm::Glicko => {
            Some(CovarianceSummary::DiagonalVector(vec![config.v0.unwrap_or_default(); players]))
        }
        Algorithm::Sskf => Some(CovarianceSummary::Scalar(config.v0.unwrap_or_default())),
        Algorithm::Fskf => Some(CovarianceSummary::Fixed(config.v_bar.unwrap_or_default())),
        Algorithm::Sg | Algorithm::Elo => None,
    };
    Ok(RatingState {
        mu: vec![0.0; players],
        cov,
        t_index: 0,
        tau: None,
    })
}

/// Dispatches to the step function of `config.algorithm`.
pub fn step(state: RatingState, game: &GameRecord, config: &EngineConfig) -> Result<RatingState> {
    let mut state = state;
    update(&mut state, game, config)?;
    Ok(state)
}

/// In-place update. On error the state is left untouched.
pub fn update(state: &mut RatingState, game: &GameRecord, config: &EngineConfig) -> Result<()> {
    match config.algorithm {
        Algorithm::Kf => kalman::kf_update(state, game, config),
        Algorithm::Vskf => kalman::vskf_update(state, game, config),
        Algorithm::Sskf => kalman::sskf_update(state, game, config),
        Algorithm::Fskf => kalman::fskf_update(state, game, config),
        Algorithm::Sg => gradient::sg_update(state, game, config),
        Algorithm::Elo => gradient::elo_update(state, game, config),
        Algorithm::TrueSkill => reference::trueskill_update(state, game, config),
        Algorithm::Glicko => reference::glicko_update(state, game, config),
    }
}

/// Model argument `beta_t x^T mu / s + eta` used to forecast `game` before
/// its outcome is seen.
pub fn forecast_argument(state: &RatingState, game: &GameRecord, config: &EngineConfig) -> Result<f64> {
    game.check_players(state.players())?;
    let (beta, _) = state.coefficients(game, config.dynamics)?;
    let z_raw = beta * game.skill_difference(&state.mu);
    Ok(config.model.argument_with_scale(z_raw, config.forecast_scale()))
}

/// Forecast probability of outcome `y` for `game`.
pub fn forecast_probability(state: &RatingState, game: &GameRecord, config: &EngineConfig, y: u8) -> Result<f64> {
    let z = forecast_argument(state, game, config)?;
    config.model.kind.likelihood(z, y)
}

/// Re-initializes newly arrived players: zero mean and prior variance.
///
/// KF also clears the covariances of those players, sSKF blends the shared
/// variance towards `v0` by the fraction of replaced players, and the
/// fixed-variance and mean-only engines reset the means only.
pub fn reset_players(state: RatingState, ids: &[usize], config: &EngineConfig) -> Result<RatingState> {
    let mut state = state;
    reset_in_place(&mut state, ids, config)?;
    Ok(state)
}

pub(crate) fn reset_in_place(state: &mut RatingState, ids: &[usize], config: &EngineConfig) -> Result<()> {
    let players = state.players();
    if let Some(&id) = ids.iter().find(|&&m| m >= players) {
        return Err(Error::PlayerOutOfRange { id, players });
    }
    let mut unique = ids.to_vec();
    unique.sort_unstable();
    unique.dedup();
    let v0 = config.v0.unwrap_or_default();
    for &m in &unique {
        state.mu[m] = 0.0;
    }
    match state.cov.as_mut() {
        Some(CovarianceSummary::FullMatrix(v)) => {
            for &m in &unique {
                v.row_mut(m).fill(0.0);
                v.column_mut(m).fill(0.0);
                v[(m, m)] = v0;
            }
        }
        Some(CovarianceSummary::DiagonalVector(v)) => {
            for &m in &unique {
                v[m] = v0;
            }
        }
        Some(CovarianceSummary::Scalar(v)) => {
            *v += (v0 - *v) * unique.len() as f64 / players as f64;
        }
        Some(CovarianceSummary::Fixed(_)) | None => {}
    }
    Ok(())
}

fn expect_cov<'a>(state: &'a mut RatingState, kind: &'static str, alg: Algorithm) -> Result<&'a mut CovarianceSummary> {
    match state.cov.as_mut() {
        Some(c) if c.kind() == kind => Ok(c),
        _ => Err(Error::config(format!("{alg} needs a {kind}-covariance state"))),
    }
}

/// Checks shared by every step before any mutation happens.
fn precheck(state: &RatingState, game: &GameRecord, config: &EngineConfig) -> Result<(f64, f64)> {
    game.check_players(state.players())?;
    config.model.kind.check_outcome(game.outcome)?;
    state.coefficients(game, config.dynamics)
}

fn denominator(scale_sq: f64, h: f64, omega: f64) -> f64 {
    (scale_sq + h * omega).max(scale_sq * DENOMINATOR_FLOOR)
}

/// Owns a configuration and its evolving state.
#[derive(Debug, Clone)]
pub struct Rater {
    config: EngineConfig,
    state: RatingState,
}

impl Rater {
    pub fn new(config: EngineConfig, players: usize) -> Result<Self> {
        let state = init(&config, players)?;
        Ok(Rater { config, state })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn state(&self) -> &RatingState {
        &self.state
    }

    pub fn into_state(self) -> RatingState {
        self.state
    }

    pub fn forecast_argument(&self, game: &GameRecord) -> Result<f64> {
        forecast_argument(&self.state, game, &self.config)
    }

    pub fn forecast_probability(&self, game: &GameRecord, y: u8) -> Result<f64> {
        forecast_probability(&self.state, game, &self.config, y)
    }

    pub fn observe(&mut self, game: &GameRecord) -> Result<()> {
        update(&mut self.state, game, &self.config)
    }

    pub fn reset_players(&mut self, ids: &[usize]) -> Result<()> {
        reset_in_place(&mut self.state, ids, &self.config)
    }
}

#[cfg(test)]
mod tests;
