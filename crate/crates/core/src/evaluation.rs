//! Log-score windows, entropy baseline, frequency estimators of the home
//! advantage and draw parameters, and hyperparameter grids over seasons.

use std::io::Write;

use crate::engine::{EngineConfig, Rater};
use crate::error::{Error, Result};
use crate::ingest::SeasonData;
use crate::outcome::ModelKind;
use crate::parallel::Execution;
use crate::synthetic::PROB_CLAMP;

/// Relative frequencies of the ordinal outcomes `0..K`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeFrequencies {
    freqs: Vec<f64>,
}

impl OutcomeFrequencies {
    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        if freqs.len() < 2 {
            return Err(Error::domain("need at least two outcome frequencies"));
        }
        if freqs.iter().any(|&f| !(f >= 0.0)) {
            return Err(Error::domain("frequencies must be nonnegative"));
        }
        let total: f64 = freqs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("frequencies sum to {total}, not 1")));
        }
        Ok(OutcomeFrequencies { freqs })
    }

    /// Frequencies of `outcomes` over an alphabet of `alphabet` symbols.
    pub fn from_outcomes(outcomes: impl IntoIterator<Item = u8>, alphabet: u8) -> Result<Self> {
        let mut counts = vec![0u64; alphabet as usize];
        for y in outcomes {
            let slot = counts
                .get_mut(y as usize)
                .ok_or_else(|| Error::domain(format!("outcome {y} outside an alphabet of {alphabet}")))?;
            *slot += 1;
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::domain("no outcomes to count"));
        }
        Self::new(counts.iter().map(|&c| c as f64 / total as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.freqs
    }

    pub fn get(&self, y: u8) -> f64 {
        self.freqs[y as usize]
    }
}

/// `-ln L(z; y)` with the probability clamped away from 0.
pub fn log_score(model: ModelKind, z_pred: f64, y: u8) -> Result<f64> {
    let p = model.likelihood(z_pred, y)?;
    Ok(-p.max(PROB_CLAMP).ln())
}

/// `-sum f ln f` with `0 ln 0 = 0`.
pub fn entropy(freqs: &OutcomeFrequencies) -> f64 {
    -freqs.freqs.iter().filter(|&&f| f > 0.0).map(|&f| f * f.ln()).sum::<f64>()
}

/// `log10(f1 / f0)`.
pub fn estimate_hfa_binary(freqs: &OutcomeFrequencies) -> Result<f64> {
    if freqs.freqs.len() != 2 {
        return Err(Error::domain("binary frequencies expected"));
    }
    let (f0, f1) = (freqs.freqs[0], freqs.freqs[1]);
    if f0 <= 0.0 || f1 <= 0.0 {
        return Err(Error::domain("both binary outcomes must occur"));
    }
    Ok((f1 / f0).log10())
}

/// `(eta, kappa) = (log10(f2/f0) / 2, f1 / sqrt(f0 f2))`.
pub fn estimate_davidson_params(freqs: &OutcomeFrequencies) -> Result<(f64, f64)> {
    if freqs.freqs.len() != 3 {
        return Err(Error::domain("ternary frequencies expected"));
    }
    let (f0, f1, f2) = (freqs.freqs[0], freqs.freqs[1], freqs.freqs[2]);
    if f0 <= 0.0 || f2 <= 0.0 {
        return Err(Error::domain("home and away wins must both occur"));
    }
    Ok((0.5 * (f2 / f0).log10(), f1 / (f0 * f2).sqrt()))
}

/// Mean log-score over the first `4M` games and over the second half.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreWindows {
    pub ls_init: f64,
    pub ls_final: f64,
    pub t_init: usize,
    /// Set when the season has fewer than `4M` games.
    pub init_truncated: bool,
}

pub fn score_windows(scores: &[f64], players: usize) -> Result<ScoreWindows> {
    let t = scores.len();
    if t < 2 {
        return Err(Error::domain(format!("need at least two games, got {t}")));
    }
    let wanted = 4 * players;
    let t_init = wanted.min(t);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    Ok(ScoreWindows {
        ls_init: mean(&scores[..t_init]),
        ls_final: mean(&scores[t / 2..]),
        t_init,
        init_truncated: t_init < wanted,
    })
}

/// Per-game log-scores of `engine` run from scratch over `games`.
pub fn engine_log_scores(season: &SeasonData, engine: &EngineConfig) -> Result<Vec<f64>> {
    check_alphabet(season, engine.model.kind)?;
    let mut rater = Rater::new(engine.clone(), season.players())?;
    season
        .games
        .iter()
        .map(|game| {
            let p = rater.forecast_probability(game, game.outcome)?;
            rater.observe(game)?;
            Ok(-p.max(PROB_CLAMP).ln())
        })
        .collect()
}

fn check_alphabet(season: &SeasonData, model: ModelKind) -> Result<()> {
    if season.mode.alphabet_size() != model.alphabet_size() {
        return Err(Error::config(format!(
            "{}: {} outcomes do not fit the {} model",
            season.source.display(),
            season.mode,
            model.name()
        )));
    }
    Ok(())
}

/// Per-game log-scores of the constant predictor `P(y) = f_y`.
pub fn baseline_log_scores(season: &SeasonData, freqs: &OutcomeFrequencies) -> Vec<f64> {
    season.outcomes().map(|y| -freqs.get(y).max(PROB_CLAMP).ln()).collect()
}

/// Pooled frequencies over several seasons.
pub fn league_frequencies(seasons: &[SeasonData]) -> Result<OutcomeFrequencies> {
    let alphabet = seasons
        .first()
        .ok_or_else(|| Error::domain("no seasons"))?
        .mode
        .alphabet_size();
    OutcomeFrequencies::from_outcomes(seasons.iter().flat_map(|s| s.outcomes()), alphabet)
}

/// Season windows averaged without weights across seasons.
#[derive(Debug, Clone, PartialEq)]
pub struct LeagueScores {
    pub per_season: Vec<ScoreWindows>,
    pub ls_init: f64,
    pub ls_final: f64,
}

impl LeagueScores {
    fn from_windows(per_season: Vec<ScoreWindows>) -> Self {
        let n = per_season.len() as f64;
        LeagueScores {
            ls_init: per_season.iter().map(|w| w.ls_init).sum::<f64>() / n,
            ls_final: per_season.iter().map(|w| w.ls_final).sum::<f64>() / n,
            per_season,
        }
    }
}

pub fn evaluate_engine(seasons: &[SeasonData], engine: &EngineConfig) -> Result<LeagueScores> {
    if seasons.is_empty() {
        return Err(Error::domain("no seasons"));
    }
    let windows = seasons
        .iter()
        .map(|s| score_windows(&engine_log_scores(s, engine)?, s.players()))
        .collect::<Result<Vec<_>>>()?;
    Ok(LeagueScores::from_windows(windows))
}

pub fn evaluate_baseline(seasons: &[SeasonData], freqs: &OutcomeFrequencies) -> Result<LeagueScores> {
    if seasons.is_empty() {
        return Err(Error::domain("no seasons"));
    }
    let windows = seasons
        .iter()
        .map(|s| score_windows(&baseline_log_scores(s, freqs), s.players()))
        .collect::<Result<Vec<_>>>()?;
    Ok(LeagueScores::from_windows(windows))
}

/// One row of the evaluation report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub league: String,
    pub model: String,
    pub algorithm: String,
    pub params: String,
    pub ls_init: f64,
    pub ls_final: f64,
    pub entropy: f64,
}

pub fn write_report<W: Write>(writer: W, rows: &[ReportRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["league", "model", "algorithm", "params", "ls_init", "ls_final", "entropy"])?;
    for r in rows {
        out.write_record([
            r.league.as_str(),
            &r.model,
            &r.algorithm,
            &r.params,
            &r.ls_init.to_string(),
            &r.ls_final.to_string(),
            &r.entropy.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Value lists for a Cartesian hyperparameter grid. Empty lists keep the base
/// configuration's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamGrid {
    pub v0: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub step_k: Vec<f64>,
    pub v_bar: Vec<f64>,
}

impl ParamGrid {
    /// All configurations of the grid, `v0` varying slowest.
    pub fn cells(&self, base: &EngineConfig) -> Result<Vec<EngineConfig>> {
        if self.v0.is_empty() && self.epsilon.is_empty() && self.step_k.is_empty() && self.v_bar.is_empty() {
            return Err(Error::config("empty grid"));
        }
        fn axis(values: &[f64]) -> Vec<Option<f64>> {
            if values.is_empty() {
                vec![None]
            } else {
                values.iter().copied().map(Some).collect()
            }
        }
        let mut cells = Vec::new();
        for v0 in axis(&self.v0) {
            for eps in axis(&self.epsilon) {
                for k in axis(&self.step_k) {
                    for vbar in axis(&self.v_bar) {
                        let mut c = base.clone();
                        if v0.is_some() {
                            c.v0 = v0;
                        }
                        if let Some(e) = eps {
                            c.dynamics.epsilon = e;
                        }
                        if k.is_some() {
                            c.step_k = k;
                        }
                        if vbar.is_some() {
                            c.v_bar = vbar;
                        }
                        c.validate()?;
                        cells.push(c);
                    }
                }
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub config: EngineConfig,
    pub scores: LeagueScores,
}

/// Evaluates every grid cell; rows come back in grid order.
pub fn scan(seasons: &[SeasonData], base: &EngineConfig, grid: &ParamGrid, execution: Execution) -> Result<Vec<ScanRow>> {
    let cells = grid.cells(base)?;
    execution
        .map(cells.len(), |i| {
            evaluate_engine(seasons, &cells[i]).map(|scores| ScanRow {
                config: cells[i].clone(),
                scores,
            })
        })
        .into_iter()
        .collect()
}

pub fn write_scan<W: Write>(writer: W, rows: &[ScanRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["algorithm", "params", "v0", "eps", "k", "vbar", "ls_init", "ls_final"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let c = &r.config;
        out.write_record([
            c.algorithm.name().to_string(),
            c.describe(),
            opt(c.v0),
            c.dynamics.epsilon.to_string(),
            opt(c.step_k),
            opt(c.v_bar),
            r.scores.ls_init.to_string(),
            r.scores.ls_final.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
