//! Kalman filter and its simplified variants.

use nalgebra::DVector;

use super::{denominator, expect_cov, precheck, EngineConfig, RatingState};
use crate::error::Result;
use crate::projection::CovarianceSummary;
use crate::schedule::GameRecord;

/// Full-covariance update, O(M^2) per game.
pub fn kf_step(state: RatingState, game: &GameRecord, config: &EngineConfig) -> Result<RatingState> {
    let mut state = state;
    kf_update(&mut state, game, config)?;
    Ok(state)
}

pub(super) fn kf_update(state: &mut RatingState, game: &GameRecord, config: &EngineConfig) -> Result<()> {
    let (beta, eps) = precheck(state, game, config)?;
    expect_cov(state, "matrix", config.algorithm)?;

    let s = config.model.scale_s;
    let z = config.model.argument(beta * game.skill_difference(&state.mu));
    let d = config.model.kind.derivatives(z, game.outcome)?;
    state.damp_means(beta);

    let Some(CovarianceSummary::FullMatrix(v)) = state.cov.as_mut() else {
        unreachable!()
    };
    if beta != 1.0 {
        *v *= beta * beta;
    }
    if eps != 0.0 {
        for m in 0..v.nrows() {
            v[(m, m)] += eps;
        }
    }

    // u = V x, omega = x^T V x
    let mut u = DVector::<f64>::zeros(v.nrows());
    for (m, x) in game.participants() {
        u.axpy(x, &v.column(m), 1.0);
    }
    let omega: f64 = game.participants().map(|(m, x)| x * u[m]).sum();
    let den = denominator(s * s, d.hessian_neg_h, omega);

    let gain = s * d.gradient_g / den;
    for (mu, ui) in state.mu.iter_mut().zip(u.iter()) {
        *mu += ui * gain;
    }
    v.ger(-d.hessian_neg_h / den, &u, &u, 1.0);
    state.mark(game);
    Ok(())
}

/// Diagonal-covariance update, O(F) per game.
pub fn vskf_step(state: RatingState, game: &GameRecord, config: &EngineConfig) -> Result<RatingState> {
    let mut state = state;
    vskf_update(&mut state, game, config)?;
    Ok(state)
}

pub(super) fn vskf_update(state: &mut RatingState, game: &GameRecord, config: &EngineConfig) -> Result<()> {
    let (beta, eps) = precheck(state, game, config)?;
    expect_cov(state, "vector", config.algorithm)?;

    let s = config.model.scale_s;
    let z = config.model.argument(beta * game.skill_difference(&state.mu));
    let d = config.model.kind.derivatives(z, game.outcome)?;
    state.damp_means(beta);

    let Some(CovarianceSummary::DiagonalVector(v)) = state.cov.as_mut() else {
        unreachable!()
    };
    if beta != 1.0 || eps != 0.0 {
        v.iter_mut().for_each(|vm| *vm = beta * beta * *vm + eps);
    }
    let omega: f64 = game.participants().map(|(m, _)| v[m]).sum();
    let den = denominator(s * s, d.hessian_neg_h, omega);
    for (m, x) in game.participants() {
        state.mu[m] += v[m] * x * s * d.gradient_g / den;
        v[m] *= 1.0 - v[m] * d.hessian_neg_h / den;
    }
    state.mark(game);
    Ok(())
}

/// Scalar-covariance update. Requires equal group sizes.
pub fn sskf_step(state: RatingState, game: &GameRecord, config: &EngineConfig) -> Result<RatingState> {
    let mut state = state;
    sskf_update(&mut state, game, config)?;
    Ok(state)
}

pub(super) fn sskf_update(state: &mut RatingState, game: &GameRecord, config: &EngineConfig) -> Result<()> {
    let (beta, eps) = precheck(state, game, config)?;
    let f = game.balanced_size("sSKF")?;
    expect_cov(state, "scalar", config.algorithm)?;

    let s = config.model.scale_s;
    let players = state.players() as f64;
    let z = config.model.argument(beta * game.skill_difference(&state.mu));
    let d = config.model.kind.derivatives(z, game.outcome)?;
    state.damp_means(beta);

    let Some(CovarianceSummary::Scalar(v)) = state.cov.as_mut() else {
        unreachable!()
    };
    let v_bar = beta * beta * *v + eps;
    let omega = 2.0 * f as f64 * v_bar;
    let den = denominator(s * s, d.hessian_neg_h, omega);
    let gain = v_bar * s * d.gradient_g / den;
    for (m, x) in game.participants() {
        state.mu[m] += x * gain;
    }
    *v = v_bar * (1.0 - (omega / players) * d.hessian_neg_h / den);
    state.mark(game);
    Ok(())
}

/// Fixed-variance update: the mean step of sSKF with a constant variance.
pub fn fskf_step(state: RatingState, game: &GameRecord, config: &EngineConfig) -> Result<RatingState> {
    let mut state = state;
    fskf_update(&mut state, game, config)?;
    Ok(state)
}

pub(super) fn fskf_update(state: &mut RatingState, game: &GameRecord, config: &EngineConfig) -> Result<()> {
    let (beta, _) = precheck(state, game, config)?;
    let f = game.balanced_size("fSKF")?;
    let v_bar = match expect_cov(state, "fixed", config.algorithm)? {
        CovarianceSummary::Fixed(v) => *v,
        _ => unreachable!(),
    };

    let s = config.model.scale_s;
    let z = config.model.argument(beta * game.skill_difference(&state.mu));
    let d = config.model.kind.derivatives(z, game.outcome)?;
    state.damp_means(beta);

    let den = denominator(s * s, d.hessian_neg_h, 2.0 * f as f64 * v_bar);
    let gain = v_bar * s * d.gradient_g / den;
    for (m, x) in game.participants() {
        state.mu[m] += x * gain;
    }
    state.mark(game);
    Ok(())
}
