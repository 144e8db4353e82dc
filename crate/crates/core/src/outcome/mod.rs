//! Skills-outcome models.
//!
//! Every model maps the (already scaled and boosted) skill difference `z` to
//! the probability of each ordinal outcome, and exposes the first derivative
//! `g` and the negated second derivative `h` of the log-likelihood in `z`.
//! Logarithms are natural; base-10 constants appear only inside the logistic
//! and Davidson link functions.

pub mod normal;

use std::f64::consts::LN_10;
use std::fmt;

use crate::error::{Error, Result};

/// Which skills-outcome law is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// Gaussian CDF link, binary outcomes.
    Thurston,
    /// Base-10 logistic link, binary outcomes.
    BradleyTerry,
    /// Ternary win/draw/loss model with draw parameter `kappa`.
    Davidson { kappa: f64 },
    /// Gradient-only pseudo-model behind Elo's original update
    /// `y - cdf(z)`. Its likelihood is the Gaussian CDF (used for forecasts),
    /// its `h` is zero and its `g` is not the derivative of that likelihood.
    OriginalElo,
}

/// Log-likelihood and its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDerivatives {
    pub log_likelihood: f64,
    pub gradient_g: f64,
    pub hessian_neg_h: f64,
}

/// A model together with the skill scale and the home boost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub scale_s: f64,
    pub hfa_eta: f64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, scale_s: f64, hfa_eta: f64) -> Result<Self> {
        if !(scale_s > 0.0 && scale_s.is_finite()) {
            return Err(Error::config(format!("scale must be positive, got {scale_s}")));
        }
        if !hfa_eta.is_finite() {
            return Err(Error::config("home boost must be finite"));
        }
        if let ModelKind::Davidson { kappa } = kind {
            if !(kappa >= 0.0 && kappa.is_finite()) {
                return Err(Error::config(format!("kappa must be nonnegative, got {kappa}")));
            }
        }
        Ok(ModelSpec {
            kind,
            scale_s,
            hfa_eta,
        })
    }

    /// Unit scale, no boost.
    pub fn unscaled(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            scale_s: 1.0,
            hfa_eta: 0.0,
        }
    }

    /// Maps a raw skill difference to the model argument `z / s + eta`.
    pub fn argument(&self, z_raw: f64) -> f64 {
        self.argument_with_scale(z_raw, self.scale_s)
    }

    /// Same as [`ModelSpec::argument`] with an overriding scale (TrueSkill and
    /// Glicko widen the scale per game).
    pub fn argument_with_scale(&self, z_raw: f64, scale: f64) -> f64 {
        z_raw / scale + self.hfa_eta
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Thurston => write!(f, "thurston"),
            ModelKind::BradleyTerry => write!(f, "bt"),
            ModelKind::Davidson { kappa } => write!(f, "davidson(kappa={kappa})"),
            ModelKind::OriginalElo => write!(f, "elo-original"),
        }
    }
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Thurston => "thurston",
            ModelKind::BradleyTerry => "bt",
            ModelKind::Davidson { .. } => "davidson",
            ModelKind::OriginalElo => "elo-original",
        }
    }

    /// Number of ordinal outcomes: 2 for binary models, 3 for Davidson.
    pub fn alphabet_size(&self) -> u8 {
        match self {
            ModelKind::Davidson { .. } => 3,
            _ => 2,
        }
    }

    /// The outcome that denotes a home win.
    pub fn home_win(&self) -> u8 {
        self.alphabet_size() - 1
    }

    pub fn check_outcome(&self, y: u8) -> Result<()> {
        if y < self.alphabet_size() {
            Ok(())
        } else {
            Err(Error::UnknownOutcome {
                model: self.name(),
                outcome: y,
            })
        }
    }

    /// `L(z; y)`.
    pub fn likelihood(&self, z: f64, y: u8) -> Result<f64> {
        Ok(self.log_likelihood(z, y)?.exp())
    }

    /// `ln L(z; y)`; `-inf` for a Davidson draw when `kappa = 0`.
    pub fn log_likelihood(&self, z: f64, y: u8) -> Result<f64> {
        self.check_outcome(y)?;
        Ok(match *self {
            ModelKind::Thurston | ModelKind::OriginalElo => {
                normal::log_cdf(if y == 1 { z } else { -z })
            }
            ModelKind::BradleyTerry => log_logistic(if y == 1 { z } else { -z }),
            ModelKind::Davidson { kappa } => {
                let log_den = davidson_log_denominator(z, kappa);
                match y {
                    0 => -z * LN_10 - log_den,
                    1 => kappa.ln() - log_den,
                    _ => z * LN_10 - log_den,
                }
            }
        })
    }

    pub fn derivatives(&self, z: f64, y: u8) -> Result<OutcomeDerivatives> {
        let log_likelihood = self.log_likelihood(z, y)?;
        let (gradient_g, hessian_neg_h) = match *self {
            ModelKind::Thurston => {
                if y == 1 {
                    (normal::inverse_mills(z), normal::inverse_mills_slope(z))
                } else {
                    (-normal::inverse_mills(-z), normal::inverse_mills_slope(-z))
                }
            }
            ModelKind::BradleyTerry => (
                LN_10 * (f64::from(y) - logistic(z)),
                LN_10 * LN_10 * logistic_product(z),
            ),
            ModelKind::Davidson { kappa } => {
                let score = 0.5 * f64::from(y);
                (
                    2.0 * LN_10 * (score - davidson_expected_score(z, kappa)),
                    davidson_h(z, kappa),
                )
            }
            ModelKind::OriginalElo => (f64::from(y) - normal::cdf(z), 0.0),
        };
        Ok(OutcomeDerivatives {
            log_likelihood,
            gradient_g,
            hessian_neg_h,
        })
    }
}

/// `L(z; y)` for the model of `model`; `z` must already be `z_raw / s + eta`.
pub fn likelihood(model: &ModelSpec, z: f64, y: u8) -> Result<f64> {
    model.kind.likelihood(z, y)
}

pub fn derivatives(model: &ModelSpec, z: f64, y: u8) -> Result<OutcomeDerivatives> {
    model.kind.derivatives(z, y)
}

/// Expected score of Elo's original rule: the Gaussian CDF.
pub fn original_elo_expected_score(z: f64) -> f64 {
    normal::cdf(z)
}

/// Base-10 logistic `1 / (1 + 10^-z)`.
pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(-z))
}

fn log_logistic(z: f64) -> f64 {
    // -ln(1 + e^a) with a = -z ln 10
    let a = -z * LN_10;
    -(a.max(0.0) + (-a.abs()).exp().ln_1p())
}

/// `F(z) F(-z)` without cancellation.
fn logistic_product(z: f64) -> f64 {
    let e = 10f64.powf(-z.abs());
    e / ((1.0 + e) * (1.0 + e))
}

/// `ln(10^-z + kappa + 10^z)`.
fn davidson_log_denominator(z: f64, kappa: f64) -> f64 {
    let u = z.abs() * LN_10;
    let e = (-u).exp();
    u + (kappa * e + e * e).ln_1p()
}

/// `G_D(z) = (10^z + kappa/2) / (10^-z + kappa + 10^z)`.
pub fn davidson_expected_score(z: f64, kappa: f64) -> f64 {
    let e = 10f64.powf(-z.abs());
    let den = 1.0 + kappa * e + e * e;
    if z >= 0.0 {
        (1.0 + 0.5 * kappa * e) / den
    } else {
        e * (e + 0.5 * kappa) / den
    }
}

fn davidson_h(z: f64, kappa: f64) -> f64 {
    let e = 10f64.powf(-z.abs());
    let den = 1.0 + kappa * e + e * e;
    LN_10 * LN_10 * e * (kappa + 4.0 * e + kappa * e * e) / (den * den)
}
