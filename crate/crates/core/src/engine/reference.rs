//! TrueSkill and Glicko written in the common notation.

use std::f64::consts::{LN_10, PI};

use super::{expect_cov, precheck, Algorithm, EngineConfig, RatingState};
use crate::error::{Error, Result};
use crate::projection::CovarianceSummary;
use crate::schedule::GameRecord;

/// `3 ln^2(10) / pi^2`, matching the logistic curve to a Gaussian.
pub const GLICKO_A: f64 = 3.0 * LN_10 * LN_10 / (PI * PI);

/// `r(v) = sqrt(1 + v a / sigma^2)`.
pub fn glicko_variance_factor(v: f64, sigma: f64) -> f64 {
    (1.0 + v * GLICKO_A / (sigma * sigma)).sqrt()
}

pub fn trueskill_step(state: RatingState, game: &GameRecord, config: &EngineConfig) -> Result<RatingState> {
    let mut state = state;
    trueskill_update(&mut state, game, config)?;
    Ok(state)
}

pub(super) fn trueskill_update(state: &mut RatingState, game: &GameRecord, config: &EngineConfig) -> Result<()> {
    let (beta, eps) = precheck(state, game, config)?;
    expect_cov(state, "vector", Algorithm::TrueSkill)?;
    let sigma = config.sigma.unwrap_or(config.model.scale_s);

    let z_raw = beta * game.skill_difference(&state.mu);
    state.damp_means(beta);
    let Some(CovarianceSummary::DiagonalVector(v)) = state.cov.as_mut() else {
        unreachable!()
    };
    if beta != 1.0 || eps != 0.0 {
        v.iter_mut().for_each(|vm| *vm = beta * beta * *vm + eps);
    }
    let omega: f64 = game.participants().map(|(m, _)| v[m]).sum();
    let widened_sq = sigma * sigma + omega;
    let widened = widened_sq.sqrt();
    let z = config.model.argument_with_scale(z_raw, widened);
    let d = config.model.kind.derivatives(z, game.outcome)?;
    for (m, x) in game.participants() {
        state.mu[m] += x * v[m] * d.gradient_g / widened;
        v[m] *= 1.0 - v[m] * d.hessian_neg_h / widened_sq;
    }
    state.mark(game);
    Ok(())
}

/// Glicko for one-on-one games.
pub fn glicko_step(state: RatingState, game: &GameRecord, config: &EngineConfig) -> Result<RatingState> {
    let mut state = state;
    glicko_update(&mut state, game, config)?;
    Ok(state)
}

pub(super) fn glicko_update(state: &mut RatingState, game: &GameRecord, config: &EngineConfig) -> Result<()> {
    let (beta, eps) = precheck(state, game, config)?;
    if !game.is_duel() {
        return Err(Error::GroupGame("Glicko"));
    }
    expect_cov(state, "vector", Algorithm::Glicko)?;
    let sigma = config.sigma.unwrap_or(config.model.scale_s);

    let z_raw = beta * game.skill_difference(&state.mu);
    state.damp_means(beta);
    let Some(CovarianceSummary::DiagonalVector(v)) = state.cov.as_mut() else {
        unreachable!()
    };
    if beta != 1.0 || eps != 0.0 {
        v.iter_mut().for_each(|vm| *vm = beta * beta * *vm + eps);
    }
    let omega: f64 = game.participants().map(|(m, _)| v[m]).sum();

    // both players are evaluated against the pre-update state
    let mut updates = [(0usize, 0.0f64, 0.0f64); 2];
    for (slot, (m, x)) in updates.iter_mut().zip(game.participants()) {
        let vm = v[m];
        let widened = sigma * glicko_variance_factor(omega - vm, sigma);
        let z = config.model.argument_with_scale(z_raw, widened);
        let d = config.model.kind.derivatives(z, game.outcome)?;
        let den = widened * widened + vm * d.hessian_neg_h;
        *slot = (m, vm * x * widened * d.gradient_g / den, vm * widened * widened / den);
    }
    for (m, dmu, new_v) in updates {
        state.mu[m] += dmu;
        v[m] = new_v;
    }
    state.mark(game);
    Ok(())
}
