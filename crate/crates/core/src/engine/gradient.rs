//! Mean-only engines: stochastic gradient and Elo.

use super::{precheck, EngineConfig, RatingState};
use crate::error::Result;
use crate::outcome::{logistic, normal, ModelKind};
use crate::schedule::GameRecord;

/// `mu <- beta mu + K s x g`.
pub fn sg_step(state: RatingState, game: &GameRecord, config: &EngineConfig) -> Result<RatingState> {
    let mut state = state;
    sg_update(&mut state, game, config)?;
    Ok(state)
}

pub(super) fn sg_update(state: &mut RatingState, game: &GameRecord, config: &EngineConfig) -> Result<()> {
    let (beta, _) = precheck(state, game, config)?;
    let k = config.step_k.unwrap_or_default();
    let s = config.model.scale_s;
    let z = config.model.argument(beta * game.skill_difference(&state.mu));
    let g = config.model.kind.derivatives(z, game.outcome)?.gradient_g;
    state.damp_means(beta);
    for (m, x) in game.participants() {
        state.mu[m] += k * s * x * g;
    }
    state.mark(game);
    Ok(())
}

/// `mu <- beta mu + K s x (y - E(z))` with `E` the logistic curve or, for the
/// original rule, the Gaussian CDF.
pub fn elo_step(state: RatingState, game: &GameRecord, config: &EngineConfig) -> Result<RatingState> {
    let mut state = state;
    elo_update(&mut state, game, config)?;
    Ok(state)
}

pub(super) fn elo_update(state: &mut RatingState, game: &GameRecord, config: &EngineConfig) -> Result<()> {
    let (beta, _) = precheck(state, game, config)?;
    let k = config.step_k.unwrap_or_default();
    let s = config.model.scale_s;
    let z = config.model.argument(beta * game.skill_difference(&state.mu));
    let expected = match config.model.kind {
        ModelKind::OriginalElo => normal::cdf(z),
        _ => logistic(z),
    };
    let delta = k * s * (f64::from(game.outcome) - expected);
    state.damp_means(beta);
    for (m, x) in game.participants() {
        state.mu[m] += x * delta;
    }
    state.mark(game);
    Ok(())
}
