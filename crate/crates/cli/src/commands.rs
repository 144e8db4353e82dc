use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use skf_core::engine::{write_covariance_matrix, SnapshotWriter};
use skf_core::evaluation::{self, OutcomeFrequencies, ParamGrid, ReportRow};
use skf_core::ingest::{self, OutcomeMode, SeasonData};
use skf_core::synthetic::{self, Metric, SyntheticConfig};
use skf_core::{CovarianceSummary, EngineConfig, Rater};

use crate::engine_spec::{AutoParams, EngineSpec};
use crate::manifest::Manifest;
use crate::{DataError, EstimateArgs, EvaluateArgs, MetricArg, RateArgs, ScanArgs, SimulateArgs, UsageError};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(anyhow!(msg.into())).into()
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn resolve_all(specs: &[EngineSpec], auto: AutoParams) -> Result<Vec<EngineConfig>> {
    specs
        .iter()
        .map(|s| s.resolve(auto).map_err(|e| UsageError(e).into()))
        .collect()
}

fn output_name(index: usize, config: &EngineConfig, suffix: &str) -> String {
    format!("{:02}_{}{suffix}.csv", index + 1, config.algorithm)
}

fn load_seasons(paths: &[PathBuf], mode: OutcomeMode) -> Result<Vec<SeasonData>> {
    paths
        .iter()
        .map(|p| ingest::parse_season(p, mode).with_context(|| format!("loading {}", p.display())))
        .collect()
}

/// Frequency estimates for `auto` engine values.
fn auto_params(seasons: &[SeasonData]) -> Result<AutoParams> {
    let freqs = evaluation::league_frequencies(seasons)?;
    let estimate = match freqs.values().len() {
        2 => evaluation::estimate_hfa_binary(&freqs).map(|eta| AutoParams {
            eta: Some(eta),
            kappa: None,
        }),
        _ => evaluation::estimate_davidson_params(&freqs).map(|(eta, kappa)| AutoParams {
            eta: Some(eta),
            kappa: Some(kappa),
        }),
    };
    estimate.map_err(|e| DataError(e.into()).into())
}

fn check_model_fits(configs: &[EngineConfig], mode: OutcomeMode) -> Result<()> {
    for c in configs {
        if c.model.kind.alphabet_size() != mode.alphabet_size() {
            return Err(usage(format!(
                "engine '{}' uses the {} model, which does not fit {mode} outcomes",
                c.describe(),
                c.model.kind.name()
            )));
        }
    }
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let config = SyntheticConfig {
        players: a.players,
        days: a.days,
        beta_hat: a.beta_hat,
        epsilon_hat: a.eps_hat.unwrap_or(1.0 - a.beta_hat * a.beta_hat),
        sigma_obs: a.sigma,
        switch_day: a.switch_day,
        switch_count: a.switch_day.map(|_| a.switch_count.unwrap_or(5)),
        replicates: a.replicates,
        seed: a.seed,
    };
    config.validate().map_err(|e| UsageError(e.into()))?;
    let engines = resolve_all(&a.engines, AutoParams::default())?;
    check_model_fits(&engines, OutcomeMode::BinaryFinal)?;
    let metric = match a.metric {
        MetricArg::Kl => Metric::Divergence,
        MetricArg::Logscore => Metric::LogScore,
    };

    let series = synthetic::run_experiment(&config, &engines, metric, a.run.execution())?;

    create_dir(&a.out_dir)?;
    let mut manifest = Manifest::new("simulate");
    manifest
        .set("M", config.players)
        .set("D", config.days)
        .set("replicates", config.replicates)
        .set("sigma", config.sigma_obs)
        .set("beta-hat", config.beta_hat)
        .set("eps-hat", config.epsilon_hat);
    if let (Some(d), Some(c)) = (config.switch_day, config.switch_count) {
        manifest.set("switch-day", d).set("switch-count", c);
    }
    manifest
        .set("seed", config.seed)
        .set("metric", metric.name())
        .set_list("engines", &engines.iter().map(EngineConfig::describe).collect::<Vec<_>>());
    for (i, (s, engine)) in series.iter().zip(&engines).enumerate() {
        let path = a.out_dir.join(output_name(i, engine, ""));
        let mut w = create(&path)?;
        s.write_csv(&mut w)?;
        w.flush()?;
        manifest.output(&path);
    }
    let m = manifest.write(&a.out_dir)?;
    eprintln!("wrote {} series and {}", series.len(), m.display());
    Ok(())
}

pub fn rate(a: RateArgs) -> Result<()> {
    let season = ingest::parse_season(&a.data, a.mode).with_context(|| format!("loading {}", a.data.display()))?;
    let seasons = std::slice::from_ref(&season);
    let auto = if a.engines.iter().any(EngineSpec::uses_auto) {
        auto_params(seasons)?
    } else {
        AutoParams::default()
    };
    let engines = resolve_all(&a.engines, auto)?;
    check_model_fits(&engines, a.mode)?;
    if a.export_covariance {
        if let Some(e) = engines.iter().find(|e| e.v0.is_none() && e.v_bar.is_none()) {
            return Err(usage(format!("engine '{}' tracks no covariance to export", e.describe())));
        }
    }

    create_dir(&a.out_dir)?;
    let mut manifest = Manifest::new("rate");
    manifest
        .set("data", a.data.display())
        .set("mode", a.mode)
        .set_list("engines", &engines.iter().map(EngineConfig::describe).collect::<Vec<_>>())
        .set("export-covariance", a.export_covariance)
        .input(&a.data);

    let teams_path = a.out_dir.join("teams.csv");
    {
        let mut w = csv_writer(&teams_path)?;
        w.write_record(["player_id", "team"])?;
        for (i, name) in season.teams.iter().enumerate() {
            w.write_record([i.to_string(), name.clone()])?;
        }
        w.flush()?;
    }
    manifest.output(&teams_path);

    for (i, engine) in engines.iter().enumerate() {
        let mut rater = Rater::new(engine.clone(), season.players())?;
        let path = a.out_dir.join(output_name(i, engine, "_trajectory"));
        let mut snapshots = SnapshotWriter::new(create(&path)?)?;
        for game in &season.games {
            rater.observe(game)?;
            snapshots.write_state(rater.state())?;
        }
        snapshots.finish()?.flush()?;
        manifest.output(&path);

        if a.export_covariance {
            let path = a.out_dir.join(output_name(i, engine, "_covariance"));
            match &rater.state().cov {
                Some(CovarianceSummary::FullMatrix(v)) => {
                    let mut w = create(&path)?;
                    write_covariance_matrix(&mut w, v)?;
                    w.flush()?;
                }
                Some(cov) => {
                    let mut w = csv_writer(&path)?;
                    w.write_record(["player_id", "variance"])?;
                    for m in 0..season.players() {
                        w.write_record([m.to_string(), cov.variance(m).to_string()])?;
                    }
                    w.flush()?;
                }
                None => unreachable!("checked above"),
            }
            manifest.output(&path);
        }
    }
    let m = manifest.write(&a.out_dir)?;
    eprintln!(
        "rated {} games of {} teams with {} engine(s); manifest {}",
        season.len(),
        season.players(),
        engines.len(),
        m.display()
    );
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn frequencies_label(f: &OutcomeFrequencies) -> String {
    f.values().iter().map(|v| v.to_string()).collect::<Vec<_>>().join("/")
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    if a.engines.is_empty() && !a.baseline {
        return Err(usage("nothing to evaluate: give --engines and/or --baseline"));
    }
    let seasons = load_seasons(&a.data, a.mode)?;
    let auto = if a.engines.iter().any(EngineSpec::uses_auto) {
        auto_params(&seasons)?
    } else {
        AutoParams::default()
    };
    let engines = resolve_all(&a.engines, auto)?;
    check_model_fits(&engines, a.mode)?;
    let freqs = evaluation::league_frequencies(&seasons)?;
    let entropy = evaluation::entropy(&freqs);

    let mut rows = Vec::new();
    let scores = a
        .run
        .execution()
        .map(engines.len(), |i| evaluation::evaluate_engine(&seasons, &engines[i]));
    for (engine, s) in engines.iter().zip(scores) {
        let s = s?;
        rows.push(ReportRow {
            league: a.league.clone(),
            model: engine.model.kind.name().to_string(),
            algorithm: engine.algorithm.name().to_string(),
            params: engine.describe(),
            ls_init: s.ls_init,
            ls_final: s.ls_final,
            entropy,
        });
    }
    if a.baseline {
        let s = evaluation::evaluate_baseline(&seasons, &freqs)?;
        rows.push(ReportRow {
            league: a.league.clone(),
            model: "frequency".into(),
            algorithm: "constant".into(),
            params: frequencies_label(&freqs),
            ls_init: s.ls_init,
            ls_final: s.ls_final,
            entropy,
        });
    }

    create_dir(&a.out_dir)?;
    let path = a.out_dir.join("report.csv");
    let mut w = create(&path)?;
    evaluation::write_report(&mut w, &rows)?;
    w.flush()?;

    let mut manifest = Manifest::new("evaluate");
    manifest
        .set_list("data", &a.data.iter().map(|p| p.display()).collect::<Vec<_>>())
        .set("mode", a.mode)
        .set("league", &a.league);
    if !engines.is_empty() {
        manifest.set_list("engines", &engines.iter().map(EngineConfig::describe).collect::<Vec<_>>());
    }
    manifest.set("baseline", a.baseline);
    for p in &a.data {
        manifest.input(p);
    }
    manifest.output(&path);
    manifest.write(&a.out_dir)?;

    let mut out = std::io::stdout().lock();
    evaluation::write_report(&mut out, &rows)?;
    Ok(())
}

pub fn estimate_params(a: EstimateArgs) -> Result<()> {
    let seasons = load_seasons(&a.data, a.mode)?;
    let freqs = evaluation::league_frequencies(&seasons)?;
    let games: usize = seasons.iter().map(SeasonData::len).sum();
    let f = freqs.values();
    let (eta, kappa) = if f.len() == 2 {
        (evaluation::estimate_hfa_binary(&freqs).map_err(|e| DataError(e.into()))?, None)
    } else {
        let (eta, kappa) = evaluation::estimate_davidson_params(&freqs).map_err(|e| DataError(e.into()))?;
        (eta, Some(kappa))
    };
    let entropy = evaluation::entropy(&freqs);
    let render = |w: &mut dyn Write| -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["mode", "games", "f0", "f1", "f2", "eta", "kappa", "entropy"])?;
        out.write_record([
            a.mode.to_string(),
            games.to_string(),
            f[0].to_string(),
            f[1].to_string(),
            f.get(2).map(|v| v.to_string()).unwrap_or_default(),
            eta.to_string(),
            kappa.map(|v| v.to_string()).unwrap_or_default(),
            entropy.to_string(),
        ])?;
        out.flush()?;
        Ok(())
    };
    render(&mut std::io::stdout().lock())?;
    if let Some(dir) = &a.out_dir {
        create_dir(dir)?;
        let path = dir.join("params.csv");
        let mut w = create(&path)?;
        render(&mut w)?;
        w.flush()?;
        let mut manifest = Manifest::new("estimate-params");
        manifest
            .set_list("data", &a.data.iter().map(|p| p.display()).collect::<Vec<_>>())
            .set("mode", a.mode);
        for p in &a.data {
            manifest.input(p);
        }
        manifest.output(&path);
        manifest.write(dir)?;
    }
    Ok(())
}

pub fn scan(a: ScanArgs) -> Result<()> {
    let grid = ParamGrid {
        v0: a.v0.clone(),
        epsilon: a.eps.clone(),
        step_k: a.k.clone(),
        v_bar: a.vbar.clone(),
    };
    if grid == ParamGrid::default() {
        return Err(usage("empty grid: give at least one of --v0, --eps, --k, --vbar"));
    }
    let seasons = load_seasons(&a.data, a.mode)?;
    let auto = if a.engine.uses_auto() {
        auto_params(&seasons)?
    } else {
        AutoParams::default()
    };
    let base = resolve_base(&a.engine, auto, &grid)?;
    check_model_fits(std::slice::from_ref(&base), a.mode)?;
    grid.cells(&base).map_err(|e| UsageError(e.into()))?;
    let rows = evaluation::scan(&seasons, &base, &grid, a.run.execution())?;

    create_dir(&a.out_dir)?;
    let path = a.out_dir.join("scan.csv");
    let mut w = create(&path)?;
    evaluation::write_scan(&mut w, &rows)?;
    w.flush()?;

    let mut manifest = Manifest::new("scan");
    manifest
        .set_list("data", &a.data.iter().map(|p| p.display()).collect::<Vec<_>>())
        .set("mode", a.mode)
        .set("engine", &a.engine);
    for (key, values) in [("v0", &a.v0), ("eps", &a.eps), ("k", &a.k), ("vbar", &a.vbar)] {
        if !values.is_empty() {
            manifest.set_list(key, values);
        }
    }
    for p in &a.data {
        manifest.input(p);
    }
    manifest.output(&path);
    manifest.write(&a.out_dir)?;

    if let Some(best) = rows
        .iter()
        .min_by(|x, y| x.scores.ls_final.total_cmp(&y.scores.ls_final))
    {
        eprintln!(
            "{} cells; lowest ls_final {} at {}",
            rows.len(),
            best.scores.ls_final,
            best.config.describe()
        );
    }
    Ok(())
}

/// The base spec may leave out fields the grid supplies; fill them with the
/// first grid value so that validation passes.
fn resolve_base(spec: &EngineSpec, auto: AutoParams, grid: &ParamGrid) -> Result<EngineConfig> {
    match spec.resolve(auto) {
        Ok(c) => Ok(c),
        Err(original) => {
            let mut text = spec.to_string();
            let mut extra = Vec::new();
            for (key, values) in [("v0", &grid.v0), ("k", &grid.step_k), ("vbar", &grid.v_bar)] {
                if let Some(v) = values.first() {
                    if !text.contains(&format!("{key}=")) {
                        extra.push(format!("{key}={v}"));
                    }
                }
            }
            if extra.is_empty() {
                return Err(UsageError(original).into());
            }
            text.push(if text.contains(':') { ',' } else { ':' });
            text.push_str(&extra.join(","));
            let patched: EngineSpec = text.parse().map_err(UsageError)?;
            patched.resolve(auto).map_err(|_| UsageError(original).into())
        }
    }
}
