use approx::assert_relative_eq;
use proptest::prelude::*;

use super::*;
use crate::outcome::normal;

// Reference values from tests/oracle/hand_examples.py.
const KF_MU: f64 = 0.31534062214450526;
const KF_DIAG: f64 = 0.6369506921172969;
const KF_OFF: f64 = 0.363049307882703;
const SSKF_V_M20: f64 = 0.9636950692117296;
const TS_MU: f64 = 0.4606588659617807;
const TS_V: f64 = 0.7877934092108062;
const GLICKO_MU: f64 = 0.4725696515053447;
const GLICKO_V: f64 = 0.6633337824092648;

fn bt() -> ModelSpec {
    ModelSpec::unscaled(ModelKind::BradleyTerry)
}

fn thurston() -> ModelSpec {
    ModelSpec::unscaled(ModelKind::Thurston)
}

fn walk(eps: f64) -> DynamicsParams {
    DynamicsParams::random_walk(eps)
}

fn home_win() -> GameRecord {
    GameRecord::duel(1, 0, 0, 1, 1).unwrap()
}

fn run(config: &EngineConfig, players: usize, games: &[GameRecord]) -> RatingState {
    games
        .iter()
        .try_fold(init(config, players).unwrap(), |s, g| step(s, g, config))
        .unwrap()
}

#[test]
fn init_examples() {
    let kf = EngineConfig::kf(bt(), walk(0.0), 1.0).unwrap();
    let s = init(&kf, 3).unwrap();
    assert_eq!(s.mu, vec![0.0; 3]);
    assert_eq!(s.cov, Some(CovarianceSummary::FullMatrix(DMatrix::identity(3, 3))));
    assert_eq!(s.tau, None);

    let sskf = EngineConfig::sskf(bt(), walk(0.0), 0.5).unwrap();
    assert_eq!(init(&sskf, 4).unwrap().cov, Some(CovarianceSummary::Scalar(0.5)));

    let mut fskf = EngineConfig::fskf(bt(), walk(0.0), 0.1).unwrap();
    fskf.v_bar = None;
    assert!(init(&fskf, 2).is_err());
    assert!(init(&sskf, 1).is_err());
}

#[test]
fn config_field_rules() {
    let mut c = EngineConfig::vskf(bt(), walk(0.0), 1.0).unwrap();
    c.step_k = Some(0.1);
    assert!(c.validate().is_err());
    assert!(EngineConfig::trueskill(bt(), walk(0.0), 1.0, 1.0).is_err());
    assert!(EngineConfig::glicko(thurston(), walk(0.0), 1.0, 1.0).is_err());
    assert!(EngineConfig::elo(thurston(), walk(0.0), 0.1).is_err());
    assert!(EngineConfig::elo(ModelSpec::unscaled(ModelKind::OriginalElo), walk(0.0), 0.1).is_ok());
    assert!(EngineConfig::kf(ModelSpec::unscaled(ModelKind::OriginalElo), walk(0.0), 1.0).is_err());
    assert!(EngineConfig::vskf(bt(), walk(0.0), -1.0).is_err());
}

#[test]
fn single_game_kalman_family() {
    let game = home_win();
    let kf = run(&EngineConfig::kf(bt(), walk(0.0), 1.0).unwrap(), 2, &[game.clone()]);
    assert_relative_eq!(kf.mu[0], KF_MU, max_relative = 1e-13);
    assert_relative_eq!(kf.mu[1], -KF_MU, max_relative = 1e-13);
    let Some(CovarianceSummary::FullMatrix(v)) = &kf.cov else { panic!() };
    assert_relative_eq!(v[(0, 0)], KF_DIAG, max_relative = 1e-13);
    assert_relative_eq!(v[(1, 1)], KF_DIAG, max_relative = 1e-13);
    assert_relative_eq!(v[(0, 1)], KF_OFF, max_relative = 1e-13);
    assert_relative_eq!(v[(1, 0)], KF_OFF, max_relative = 1e-13);

    let vskf = run(&EngineConfig::vskf(bt(), walk(0.0), 1.0).unwrap(), 2, &[game.clone()]);
    assert_relative_eq!(vskf.mu[0], KF_MU, max_relative = 1e-13);
    assert_relative_eq!(vskf.variance(1).unwrap(), KF_DIAG, max_relative = 1e-13);

    let sskf = run(&EngineConfig::sskf(bt(), walk(0.0), 1.0).unwrap(), 2, &[game.clone()]);
    assert_relative_eq!(sskf.mu[1], -KF_MU, max_relative = 1e-13);
    assert_relative_eq!(sskf.variance(0).unwrap(), KF_DIAG, max_relative = 1e-13);

    let sskf20 = run(&EngineConfig::sskf(bt(), walk(0.0), 1.0).unwrap(), 20, &[game.clone()]);
    assert_relative_eq!(sskf20.variance(7).unwrap(), SSKF_V_M20, max_relative = 1e-13);

    let fskf = run(&EngineConfig::fskf(bt(), walk(0.0), 1.0).unwrap(), 2, &[game]);
    assert_relative_eq!(fskf.mu[0], KF_MU, max_relative = 1e-13);
    assert_eq!(fskf.cov, Some(CovarianceSummary::Fixed(1.0)));
}

#[test]
fn zero_gradient_keeps_means() {
    let davidson = ModelSpec::unscaled(ModelKind::Davidson { kappa: 0.5 });
    let config = EngineConfig::kf(davidson, walk(0.0), 1.0).unwrap();
    let draw = GameRecord::duel(1, 0, 0, 1, 1).unwrap();
    let s = run(&config, 3, &[draw]);
    assert_eq!(s.mu, vec![0.0; 3]);
    assert!(s.variance(0).unwrap() < 1.0);
    assert_eq!(s.variance(2).unwrap(), 1.0);
}

#[test]
fn uninvolved_players_drift() {
    let games = [
        GameRecord::duel(1, 0, 0, 1, 1).unwrap(),
        GameRecord::duel(2, 1, 0, 1, 0).unwrap(),
    ];
    for config in [
        EngineConfig::kf(bt(), walk(0.004), 1.0).unwrap(),
        EngineConfig::vskf(bt(), walk(0.004), 1.0).unwrap(),
    ] {
        let s = run(&config, 3, &games);
        assert_eq!(s.mu[2], 0.0);
        assert_relative_eq!(s.variance(2).unwrap(), 1.004, max_relative = 1e-15);
    }
}

#[test]
fn group_omega_sums_participants() {
    let config = EngineConfig::vskf(thurston(), walk(0.0), 1.0).unwrap();
    let game = GameRecord::new(1, 0, vec![0, 1], vec![2, 3], 1).unwrap();
    let s = run(&config, 5, &[game]);
    let (g, h) = (normal::inverse_mills(0.0), normal::inverse_mills_slope(0.0));
    let den = 1.0 + 4.0 * h;
    assert_relative_eq!(s.mu[1], g / den, max_relative = 1e-14);
    assert_relative_eq!(s.mu[3], -g / den, max_relative = 1e-14);
    assert_relative_eq!(s.variance(0).unwrap(), 1.0 - h / den, max_relative = 1e-14);
}

#[test]
fn skf_rejects_unbalanced_groups() {
    let game = GameRecord::new(1, 0, vec![0, 1], vec![2], 1).unwrap();
    for config in [
        EngineConfig::sskf(bt(), walk(0.0), 1.0).unwrap(),
        EngineConfig::fskf(bt(), walk(0.0), 1.0).unwrap(),
    ] {
        let s = init(&config, 3).unwrap();
        assert!(matches!(step(s, &game, &config), Err(Error::UnbalancedGroups { .. })));
    }
}

#[test]
fn gradient_examples() {
    let game = home_win();
    let s = run(&EngineConfig::sg(bt(), walk(0.0), 0.01).unwrap(), 2, &[game.clone()]);
    assert_relative_eq!(s.mu[0], 0.01151292546497023, max_relative = 1e-14);
    assert_eq!(s.cov, None);

    let elo0 = ModelSpec::unscaled(ModelKind::OriginalElo);
    let s = run(&EngineConfig::sg(elo0, walk(0.0), 10.0).unwrap(), 2, &[game.clone()]);
    assert_relative_eq!(s.mu[0], 5.0, max_relative = 1e-15);
    let s = run(&EngineConfig::elo(elo0, walk(0.0), 10.0).unwrap(), 2, &[game.clone()]);
    assert_relative_eq!(s.mu[0], 5.0, max_relative = 1e-15);

    // Thurston-SG step phi(0)/(Phi(0)Phi(-0)) * 0.5
    let s = run(&EngineConfig::sg(thurston(), walk(0.0), 1.0).unwrap(), 2, &[game.clone()]);
    assert_relative_eq!(s.mu[0], 0.5 * normal::pdf(0.0) / 0.25, max_relative = 1e-14);

    let s = run(&EngineConfig::elo(bt(), walk(0.0), 0.02).unwrap(), 2, &[game]);
    assert_relative_eq!(s.mu[0], 0.01, max_relative = 1e-15);
}

#[test]
fn trueskill_example() {
    let s = run(&EngineConfig::trueskill(thurston(), walk(0.0), 1.0, 1.0).unwrap(), 2, &[home_win()]);
    assert_relative_eq!(s.mu[0], TS_MU, max_relative = 1e-13);
    assert_relative_eq!(s.mu[1], -TS_MU, max_relative = 1e-13);
    assert_relative_eq!(s.variance(0).unwrap(), TS_V, max_relative = 1e-13);
}

#[test]
fn glicko_example() {
    assert_eq!(glicko_variance_factor(0.0, 1.0), 1.0);
    assert_relative_eq!(reference::GLICKO_A, 1.6115837763142367, max_relative = 1e-14);
    let config = EngineConfig::glicko(bt(), walk(0.0), 1.0, 1.0).unwrap();
    let s = run(&config, 2, &[home_win()]);
    assert_relative_eq!(s.mu[0], GLICKO_MU, max_relative = 1e-13);
    assert_relative_eq!(s.mu[1], -GLICKO_MU, max_relative = 1e-13);
    assert_relative_eq!(s.variance(1).unwrap(), GLICKO_V, max_relative = 1e-13);

    let group = GameRecord::new(1, 0, vec![0, 1], vec![2, 3], 1).unwrap();
    assert!(matches!(
        step(init(&config, 4).unwrap(), &group, &config),
        Err(Error::GroupGame(_))
    ));
}

#[test]
fn reset_examples() {
    let config = EngineConfig::sskf(bt(), walk(0.0), 1.0).unwrap();
    let mut s = init(&config, 20).unwrap();
    s.cov = Some(CovarianceSummary::Scalar(0.1));
    s.mu[3] = 0.7;
    let s = reset_players(s, &[0, 1, 2, 3, 4], &config).unwrap();
    assert_relative_eq!(s.variance(0).unwrap(), 0.325, max_relative = 1e-15);
    assert_eq!(s.mu[3], 0.0);

    let config = EngineConfig::kf(bt(), walk(0.0), 1.0).unwrap();
    let s = run(&config, 3, &[home_win(), GameRecord::duel(2, 0, 1, 2, 0).unwrap()]);
    let s = reset_players(s, &[1], &config).unwrap();
    let Some(CovarianceSummary::FullMatrix(v)) = &s.cov else { panic!() };
    assert_eq!(v[(1, 1)], 1.0);
    for j in [0, 2] {
        assert_eq!(v[(1, j)], 0.0);
        assert_eq!(v[(j, 1)], 0.0);
    }
    assert_ne!(v[(0, 2)], 0.0);
    assert_eq!(s.mu[1], 0.0);

    let config = EngineConfig::vskf(bt(), walk(0.0), 1.0).unwrap();
    let s = run(&config, 3, &[home_win()]);
    let before = s.clone();
    let s = reset_players(s, &[0], &config).unwrap();
    assert_eq!((s.mu[0], s.variance(0).unwrap()), (0.0, 1.0));
    assert_eq!((s.mu[1], s.variance(1)), (before.mu[1], before.variance(1)));
    assert!(matches!(
        reset_players(s, &[3], &config),
        Err(Error::PlayerOutOfRange { id: 3, .. })
    ));

    let config = EngineConfig::fskf(bt(), walk(0.0), 0.3).unwrap();
    let s = reset_players(run(&config, 2, &[home_win()]), &[0], &config).unwrap();
    assert_eq!(s.mu[0], 0.0);
    assert_eq!(s.cov, Some(CovarianceSummary::Fixed(0.3)));
}

#[test]
fn failed_step_leaves_state_untouched() {
    let config = EngineConfig::vskf(bt(), walk(0.01), 1.0).unwrap();
    let mut rater = Rater::new(config, 3).unwrap();
    rater.observe(&GameRecord::duel(1, 5, 0, 1, 1).unwrap()).unwrap();
    let before = rater.state().clone();
    assert!(rater.observe(&GameRecord::duel(2, 4, 0, 1, 1).unwrap()).is_err());
    assert!(rater.observe(&GameRecord::duel(2, 6, 0, 1, 2).unwrap()).is_err());
    assert!(rater.observe(&GameRecord::duel(2, 6, 0, 7, 1).unwrap()).is_err());
    assert_eq!(rater.state(), &before);
}

#[test]
fn forecast_uses_damped_means() {
    let dynamics = DynamicsParams::new(0.9, 0.0).unwrap();
    let model = ModelSpec::new(ModelKind::BradleyTerry, 2.0, 0.1).unwrap();
    let config = EngineConfig::vskf(model, dynamics, 1.0).unwrap();
    let mut s = init(&config, 2).unwrap();
    s.mu = vec![1.0, -1.0];
    s.tau = Some(0);
    let game = GameRecord::duel(1, 2, 0, 1, 1).unwrap();
    let z = forecast_argument(&s, &game, &config).unwrap();
    assert_relative_eq!(z, 0.81 * 2.0 / 2.0 + 0.1, max_relative = 1e-14);
    let p = forecast_probability(&s, &game, &config, 1).unwrap();
    assert_relative_eq!(p, crate::outcome::logistic(z), max_relative = 1e-14);
}

#[test]
fn snapshot_csv() {
    let config = EngineConfig::sg(bt(), walk(0.0), 0.01).unwrap();
    let s = run(&config, 2, &[home_win()]);
    let mut w = SnapshotWriter::new(Vec::new()).unwrap();
    w.write_state(&s).unwrap();
    let text = String::from_utf8(w.finish().unwrap()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,tau,player_id,mu,variance");
    assert_eq!(lines[1], "1,0,0,0.01151292546497023,");

    let mut buf = Vec::new();
    write_covariance_matrix(&mut buf, &DMatrix::identity(2, 2)).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "player_id,0,1\n0,1,0\n1,0,1\n");
}

// ---- properties over random game sequences ----

const PLAYERS: usize = 6;

fn games_strategy(groups: bool) -> impl Strategy<Value = Vec<GameRecord>> {
    let max_f: usize = if groups { 3 } else { 2 };
    prop::collection::vec(
        (
            Just((0..PLAYERS).collect::<Vec<_>>()).prop_shuffle(),
            1..max_f,
            0u8..2,
            0u64..3,
        ),
        1..25,
    )
    .prop_map(|raw| {
        let mut tau = 0;
        raw.into_iter()
            .enumerate()
            .map(|(i, (perm, f, y, gap))| {
                tau += gap;
                GameRecord::new(i + 1, tau, perm[..f].to_vec(), perm[f..2 * f].to_vec(), y).unwrap()
            })
            .collect()
    })
}

fn scaled(config: &EngineConfig, s: f64) -> EngineConfig {
    let mut c = config.clone();
    c.model.scale_s *= s;
    c.dynamics.epsilon *= s * s;
    c.v0 = c.v0.map(|v| v * s * s);
    c.v_bar = c.v_bar.map(|v| v * s * s);
    c
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt() / norm
}

fn variances(s: &RatingState) -> Vec<f64> {
    match &s.cov {
        Some(CovarianceSummary::FullMatrix(v)) => v.iter().copied().collect(),
        Some(c) => (0..s.players()).map(|m| c.variance(m)).collect(),
        None => vec![],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scale_invariance(games in games_strategy(true), s in 0.2f64..20.0, eta in -0.2f64..0.2, beta in 0.95f64..=1.0) {
        let dynamics = DynamicsParams::new(beta, 0.01).unwrap();
        let model = ModelSpec::new(ModelKind::Thurston, 1.0, eta).unwrap();
        for base in [
            EngineConfig::kf(model, dynamics, 0.5).unwrap(),
            EngineConfig::vskf(model, dynamics, 0.5).unwrap(),
            EngineConfig::sskf(model, dynamics, 0.5).unwrap(),
            EngineConfig::fskf(model, dynamics, 0.05).unwrap(),
            EngineConfig::sg(model, dynamics, 0.05).unwrap(),
        ] {
            let unit = run(&base, PLAYERS, &games);
            let big = run(&scaled(&base, s), PLAYERS, &games);
            let mu_unit: Vec<f64> = unit.mu.iter().map(|m| m * s).collect();
            prop_assert!(rel_err(&big.mu, &mu_unit) < 1e-9, "{} means", base.algorithm);
            let v_unit: Vec<f64> = variances(&unit).iter().map(|v| v * s * s).collect();
            prop_assert!(rel_err(&variances(&big), &v_unit) < 1e-9, "{} variances", base.algorithm);
        }
    }

    #[test]
    fn variances_stay_nonnegative(games in games_strategy(false), eps in 0.0f64..0.05, v0 in 0.01f64..10.0) {
        let dynamics = walk(eps);
        for config in [
            EngineConfig::kf(bt(), dynamics, v0).unwrap(),
            EngineConfig::vskf(bt(), dynamics, v0).unwrap(),
            EngineConfig::sskf(bt(), dynamics, v0).unwrap(),
            EngineConfig::trueskill(thurston(), dynamics, v0, 1.0).unwrap(),
            EngineConfig::glicko(bt(), dynamics, v0, 1.0).unwrap(),
        ] {
            let s = run(&config, PLAYERS, &games);
            if let Some(c) = &s.cov {
                prop_assert!(c.validate().is_ok(), "{}", config.algorithm);
            }
        }
    }

    #[test]
    fn kf_and_vskf_agree_on_first_step(y in 0u8..2, v0 in 0.01f64..5.0, eta in -0.5f64..0.5) {
        let model = ModelSpec::new(ModelKind::BradleyTerry, 1.0, eta).unwrap();
        let game = GameRecord::duel(1, 0, 2, 0, y).unwrap();
        let kf = run(&EngineConfig::kf(model, walk(0.0), v0).unwrap(), 4, &[game.clone()]);
        let vskf = run(&EngineConfig::vskf(model, walk(0.0), v0).unwrap(), 4, &[game]);
        for m in 0..4 {
            prop_assert!((kf.mu[m] - vskf.mu[m]).abs() <= 1e-12);
            prop_assert!((kf.variance(m).unwrap() - vskf.variance(m).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn vskf_contracts_faster_than_trueskill(y in 0u8..2, v0 in 0.01f64..5.0, sigma in 0.3f64..3.0, other in 0.01f64..5.0) {
        let model = ModelSpec::new(ModelKind::Thurston, sigma, 0.0).unwrap();
        let game = GameRecord::duel(1, 0, 0, 1, y).unwrap();
        let vskf_cfg = EngineConfig::vskf(model, walk(0.0), v0).unwrap();
        let ts_cfg = EngineConfig::trueskill(thurston(), walk(0.0), v0, sigma).unwrap();
        let mut a = init(&vskf_cfg, 2).unwrap();
        let mut b = init(&ts_cfg, 2).unwrap();
        a.cov = Some(CovarianceSummary::DiagonalVector(vec![v0, other]));
        b.cov = a.cov.clone();
        let a = step(a, &game, &vskf_cfg).unwrap();
        let b = step(b, &game, &ts_cfg).unwrap();
        for m in 0..2 {
            prop_assert!(a.variance(m).unwrap() <= b.variance(m).unwrap() + 1e-15);
        }
    }

    #[test]
    fn deterministic(games in games_strategy(false)) {
        let config = EngineConfig::kf(bt(), walk(0.003), 1.0).unwrap();
        let a = run(&config, PLAYERS, &games);
        let b = run(&config, PLAYERS, &games);
        prop_assert_eq!(a, b);
    }
}
