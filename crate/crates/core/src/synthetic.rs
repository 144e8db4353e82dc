//! Synthetic seasons: skills following a damped random walk, one random
//! perfect matching per day, Thurston-distributed outcomes, and an optional
//! "switch" in which some players are replaced by newcomers.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::engine::{EngineConfig, Rater};
use crate::error::{Error, Result};
use crate::outcome::normal;
use crate::parallel::Execution;
use crate::schedule::GameRecord;

/// Probabilities are kept inside `[PROB_CLAMP, 1 - PROB_CLAMP]` by the metrics.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub players: usize,
    pub days: usize,
    pub beta_hat: f64,
    pub epsilon_hat: f64,
    /// Outcome noise: `p = cdf(x^T theta / sigma_obs)`.
    pub sigma_obs: f64,
    /// 0-based day at which the switch happens.
    pub switch_day: Option<usize>,
    pub switch_count: Option<usize>,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    /// 20 players, 100 days, `beta_hat = 0.998`, unit noise, no switch.
    fn default() -> Self {
        let beta_hat: f64 = 0.998;
        SyntheticConfig {
            players: 20,
            days: 100,
            beta_hat,
            epsilon_hat: 1.0 - beta_hat * beta_hat,
            sigma_obs: 1.0,
            switch_day: None,
            switch_count: None,
            replicates: 5000,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    /// Adds the switch of `count` players at 0-based day `day`.
    pub fn with_switch(mut self, day: usize, count: usize) -> Self {
        self.switch_day = Some(day);
        self.switch_count = Some(count);
        self
    }

    pub fn games_per_day(&self) -> usize {
        self.players / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.players < 2 || self.players % 2 != 0 {
            return Err(Error::config(format!("player count must be even and >= 2, got {}", self.players)));
        }
        if self.days == 0 {
            return Err(Error::config("need at least one day"));
        }
        if !(self.beta_hat > 0.0 && self.beta_hat <= 1.0) {
            return Err(Error::config(format!("beta_hat must lie in (0, 1], got {}", self.beta_hat)));
        }
        if !(self.epsilon_hat >= 0.0 && self.epsilon_hat.is_finite()) {
            return Err(Error::config("epsilon_hat must be nonnegative"));
        }
        if !(self.sigma_obs > 0.0) {
            return Err(Error::config("sigma_obs must be positive"));
        }
        match (self.switch_day, self.switch_count) {
            (None, None) => {}
            (Some(day), Some(count)) => {
                if day >= self.days {
                    return Err(Error::config(format!("switch day {day} is past the last day")));
                }
                if count > self.players {
                    return Err(Error::config(format!("cannot switch {count} of {} players", self.players)));
                }
            }
            _ => return Err(Error::config("switch day and switch count go together")),
        }
        if self.replicates == 0 {
            return Err(Error::config("need at least one replicate"));
        }
        Ok(())
    }

    fn switch(&self) -> Option<(u64, usize)> {
        self.switch_day.zip(self.switch_count).map(|(d, c)| (d as u64, c))
    }
}

/// One generated season.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSeason {
    /// True skills per day (`days x players`). Skills only move between days,
    /// so game `t` sees `skills[games[t].tau]`.
    pub skills: Vec<Vec<f64>>,
    pub games: Vec<GameRecord>,
    /// Home-win probability of each game.
    pub true_probs: Vec<f64>,
}

impl SyntheticSeason {
    /// FNV-1a digest of the game stream.
    pub fn checksum(&self) -> u64 {
        stream_checksum(&self.games)
    }
}

fn stream_checksum<'a>(games: impl IntoIterator<Item = &'a GameRecord>) -> u64 {
    const PRIME: u64 = 0x100_0000_01b3;
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: u64| {
        for b in v.to_le_bytes() {
            h = (h ^ u64::from(b)).wrapping_mul(PRIME);
        }
    };
    for g in games {
        eat(g.t_index as u64);
        eat(g.tau);
        g.home.iter().chain(&g.away).for_each(|&m| eat(m as u64));
        eat(u64::from(g.outcome));
    }
    h
}

/// Generator for replicate `replicate` of a run seeded with `seed`.
pub fn season_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Season drawn from `season_rng(rng_seed, 0)`.
pub fn generate_season(config: &SyntheticConfig, rng_seed: u64) -> Result<SyntheticSeason> {
    generate_season_with(config, &mut season_rng(rng_seed, 0))
}

pub fn generate_season_with<R: Rng + ?Sized>(config: &SyntheticConfig, rng: &mut R) -> Result<SyntheticSeason> {
    config.validate()?;
    let m = config.players;
    let j = config.games_per_day();
    let walk_sd = config.epsilon_hat.sqrt();
    let mut theta: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let mut order: Vec<usize> = (0..m).collect();

    let mut skills = Vec::with_capacity(config.days);
    let mut games = Vec::with_capacity(config.days * j);
    let mut true_probs = Vec::with_capacity(config.days * j);
    for day in 0..config.days as u64 {
        if day > 0 {
            for th in theta.iter_mut() {
                let noise: f64 = rng.sample(StandardNormal);
                *th = config.beta_hat * *th + walk_sd * noise;
            }
        }
        if let Some((switch_day, count)) = config.switch() {
            if day == switch_day {
                for th in theta.iter_mut().take(count) {
                    *th = rng.sample(StandardNormal);
                }
            }
        }
        order.shuffle(rng);
        for pair in order.chunks_exact(2) {
            let (home, away) = (pair[0], pair[1]);
            let p = normal::cdf((theta[home] - theta[away]) / config.sigma_obs);
            let y = u8::from(rng.gen::<f64>() < p);
            games.push(GameRecord {
                t_index: games.len() + 1,
                tau: day,
                home: vec![home],
                away: vec![away],
                outcome: y,
            });
            true_probs.push(p);
        }
        skills.push(theta.clone());
    }
    Ok(SyntheticSeason {
        skills,
        games,
        true_probs,
    })
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// KL divergence between Bernoulli(`p_true`) and Bernoulli(`p_pred`).
pub fn kl_divergence(p_true: f64, p_pred: f64) -> f64 {
    let q = clamp_prob(p_pred);
    let mut d = 0.0;
    if p_true > 0.0 {
        d += p_true * (p_true / q).ln();
    }
    if p_true < 1.0 {
        d += (1.0 - p_true) * ((1.0 - p_true) / (1.0 - q)).ln();
    }
    d.max(0.0)
}

/// Divergence between the true home-win probability and the one the model
/// assigns at argument `z_pred`.
pub fn kl_metric(p_true: f64, model: crate::outcome::ModelKind, z_pred: f64) -> Result<f64> {
    if !(p_true > 0.0 && p_true < 1.0) {
        return Err(Error::domain(format!("true probability must lie in (0, 1), got {p_true}")));
    }
    if model.alphabet_size() != 2 {
        return Err(Error::domain("the divergence metric needs a binary model"));
    }
    Ok(kl_divergence(p_true, model.likelihood(z_pred, 1)?))
}

/// Per-game quantity tracked by an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Divergence,
    LogScore,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Divergence => "kl",
            Metric::LogScore => "logscore",
        }
    }
}

/// Per-game metric of one engine over one season, together with the checksum
/// of the games it consumed.
pub fn engine_season_scores(
    season: &SyntheticSeason,
    config: &SyntheticConfig,
    engine: &EngineConfig,
    metric: Metric,
) -> Result<(Vec<f64>, u64)> {
    if engine.model.kind.alphabet_size() != 2 {
        return Err(Error::config("synthetic seasons have binary outcomes"));
    }
    let mut rater = Rater::new(engine.clone(), config.players)?;
    let switch = config.switch();
    let mut switched = false;
    let mut scores = Vec::with_capacity(season.games.len());
    for (game, &p_true) in season.games.iter().zip(&season.true_probs) {
        if let Some((day, count)) = switch {
            if !switched && game.tau >= day {
                rater.reset_players(&(0..count).collect::<Vec<_>>())?;
                switched = true;
            }
        }
        let p_home = clamp_prob(rater.forecast_probability(game, 1)?);
        scores.push(match metric {
            Metric::Divergence => kl_divergence(p_true, p_home),
            Metric::LogScore => -(if game.outcome == 1 { p_home } else { 1.0 - p_home }).ln(),
        });
        rater.observe(game)?;
    }
    Ok((scores, stream_checksum(&season.games)))
}

/// Metric of a forecaster that knows the true probabilities.
pub fn oracle_season_scores(season: &SyntheticSeason, metric: Metric) -> Vec<f64> {
    season
        .games
        .iter()
        .zip(&season.true_probs)
        .map(|(game, &p)| match metric {
            Metric::Divergence => 0.0,
            Metric::LogScore => -clamp_prob(if game.outcome == 1 { p } else { 1.0 - p }).ln(),
        })
        .collect()
}

/// Summary of one day, pooled over replicates and the games of that day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayStats {
    /// 1-based day.
    pub day: usize,
    pub mean: f64,
    pub median: f64,
    pub q3: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub label: String,
    pub metric: Metric,
    pub days: Vec<DayStats>,
}

impl MetricSeries {
    /// Pools `per_replicate[r][t]` by the 1-based day `tau + 1` of game `t`.
    pub fn aggregate(label: impl Into<String>, metric: Metric, days: usize, taus: &[u64], per_replicate: &[Vec<f64>]) -> Self {
        let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); days];
        for scores in per_replicate {
            for (&tau, &v) in taus.iter().zip(scores) {
                buckets[tau as usize].push(v);
            }
        }
        let days = buckets
            .into_iter()
            .enumerate()
            .map(|(d, mut values)| {
                values.sort_by(f64::total_cmp);
                let n = values.len();
                DayStats {
                    day: d + 1,
                    mean: if n == 0 { f64::NAN } else { values.iter().sum::<f64>() / n as f64 },
                    median: quantile_sorted(&values, 0.5),
                    q3: quantile_sorted(&values, 0.75),
                    n,
                }
            })
            .collect();
        MetricSeries {
            label: label.into(),
            metric,
            days,
        }
    }

    /// Mean of day `day` (1-based).
    pub fn mean(&self, day: usize) -> f64 {
        self.days[day - 1].mean
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["day", "mean", "median", "q3", "n"])?;
        for d in &self.days {
            out.write_record([
                d.day.to_string(),
                d.mean.to_string(),
                d.median.to_string(),
                d.q3.to_string(),
                d.n.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Linear-interpolation quantile (type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Runs every engine on the same replicated seasons and aggregates the
/// chosen metric per day. Replicate `r` uses `season_rng(config.seed, r)`.
pub fn run_experiment(
    config: &SyntheticConfig,
    engines: &[EngineConfig],
    metric: Metric,
    execution: Execution,
) -> Result<Vec<MetricSeries>> {
    config.validate()?;
    for e in engines {
        e.validate()?;
    }
    let per_replicate: Vec<Result<Vec<Vec<f64>>>> = execution.map(config.replicates, |r| {
        let season = generate_season_with(config, &mut season_rng(config.seed, r as u64))?;
        let reference = season.checksum();
        engines
            .iter()
            .map(|engine| {
                let (scores, seen) = engine_season_scores(&season, config, engine, metric)?;
                if seen != reference {
                    return Err(Error::domain("engines saw different game streams"));
                }
                Ok(scores)
            })
            .collect()
    });
    let per_replicate = per_replicate.into_iter().collect::<Result<Vec<_>>>()?;

    let j = config.games_per_day() as u64;
    let taus: Vec<u64> = (0..(config.days as u64 * j)).map(|t| t / j).collect();
    Ok(engines
        .iter()
        .enumerate()
        .map(|(i, engine)| {
            let scores: Vec<Vec<f64>> = per_replicate.iter().map(|r| r[i].clone()).collect();
            MetricSeries::aggregate(engine.describe(), metric, config.days, &taus, &scores)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::{ModelKind, ModelSpec};
    use crate::schedule::DynamicsParams;
    use approx::assert_relative_eq;

    fn small() -> SyntheticConfig {
        SyntheticConfig {
            players: 6,
            days: 8,
            replicates: 4,
            seed: 11,
            ..SyntheticConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SyntheticConfig { players: 5, ..small() }.validate().is_err());
        assert!(small().with_switch(8, 2).validate().is_err());
        assert!(small().with_switch(3, 7).validate().is_err());
        assert!(small().with_switch(3, 2).validate().is_ok());
        assert!(SyntheticConfig { switch_day: Some(2), ..small() }.validate().is_err());
    }

    #[test]
    fn frozen_walk() {
        let config = SyntheticConfig { beta_hat: 1.0, epsilon_hat: 0.0, ..small() };
        let season = generate_season(&config, 3).unwrap();
        assert!(season.skills.iter().all(|s| s == &season.skills[0]));
    }

    #[test]
    fn huge_noise_gives_coin_flips() {
        let config = SyntheticConfig { sigma_obs: 1e12, ..small() };
        let season = generate_season(&config, 3).unwrap();
        assert!(season.true_probs.iter().all(|&p| (p - 0.5).abs() < 1e-10));
    }

    #[test]
    fn days_are_perfect_matchings() {
        let season = generate_season(&small(), 9).unwrap();
        assert_eq!(season.games.len(), 8 * 3);
        for (d, day) in season.games.chunks(3).enumerate() {
            let mut seen: Vec<usize> = day.iter().flat_map(|g| [g.home[0], g.away[0]]).collect();
            seen.sort();
            assert_eq!(seen, (0..6).collect::<Vec<_>>());
            assert!(day.iter().all(|g| g.tau == d as u64));
        }
        for (t, g) in season.games.iter().enumerate() {
            assert_eq!(g.t_index, t + 1);
            let th = &season.skills[g.tau as usize];
            assert_eq!(season.true_probs[t], normal::cdf(th[g.home[0]] - th[g.away[0]]));
        }
    }

    #[test]
    fn switch_replaces_first_players() {
        let config = SyntheticConfig { beta_hat: 1.0, epsilon_hat: 0.0, ..small() }.with_switch(4, 2);
        let season = generate_season(&config, 5).unwrap();
        assert_eq!(season.skills[3], season.skills[0]);
        assert_ne!(season.skills[4][0], season.skills[3][0]);
        assert_ne!(season.skills[4][1], season.skills[3][1]);
        assert_eq!(season.skills[4][2..], season.skills[3][2..]);
    }

    #[test]
    fn reproducible() {
        let a = generate_season(&small(), 42).unwrap();
        let b = generate_season(&small(), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.checksum(), b.checksum());
        assert_ne!(a.checksum(), generate_season(&small(), 43).unwrap().checksum());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(0.5, 0.5), 0.0);
        assert_eq!(kl_divergence(0.9, 0.9), 0.0);
        // from tests/oracle/hand_examples.py
        assert_relative_eq!(kl_divergence(0.5, 0.75), 0.14384103622589042, max_relative = 1e-14);
        assert!(kl_divergence(0.5, 1.0).is_finite());
        assert!(kl_metric(1.0, ModelKind::Thurston, 0.0).is_err());
        assert_eq!(kl_metric(0.5, ModelKind::Thurston, 0.0).unwrap(), 0.0);
        assert!(kl_metric(0.5, ModelKind::Davidson { kappa: 1.0 }, 0.0).is_err());
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_eq!(quantile_sorted(&v, 0.75), 3.25);
        assert_eq!(quantile_sorted(&[7.0], 0.75), 7.0);
        assert!(quantile_sorted(&[], 0.5).is_nan());
    }

    #[test]
    fn oracle_has_zero_divergence() {
        let config = SyntheticConfig { replicates: 1, ..small() };
        let season = generate_season_with(&config, &mut season_rng(config.seed, 0)).unwrap();
        let scores = oracle_season_scores(&season, Metric::Divergence);
        let taus: Vec<u64> = season.games.iter().map(|g| g.tau).collect();
        let series = MetricSeries::aggregate("oracle", Metric::Divergence, config.days, &taus, &[scores]);
        assert!(series.days.iter().all(|d| d.mean == 0.0 && d.n == 3));
    }

    #[test]
    fn experiment_is_deterministic_across_execution_modes() {
        let config = small().with_switch(4, 2);
        let model = ModelSpec::unscaled(ModelKind::Thurston);
        let engines = [
            EngineConfig::vskf(model, DynamicsParams::random_walk(0.004), 1.0).unwrap(),
            EngineConfig::sg(model, DynamicsParams::default(), 0.1).unwrap(),
        ];
        let seq = run_experiment(&config, &engines, Metric::Divergence, Execution::Sequential).unwrap();
        let par = run_experiment(&config, &engines, Metric::Divergence, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.len(), 2);
        assert_eq!(seq[0].days.len(), 8);
        assert!(seq[0].days.iter().all(|d| d.n == 4 * 3));

        let mut buf = Vec::new();
        seq[0].write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("day,mean,median,q3,n\n1,"));
        assert_eq!(text.lines().count(), 9);
    }
}
