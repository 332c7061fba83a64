use statrs::distribution::{ChiSquared, ContinuousCDF};

use spline_mnar::eval::{
    generate_longitudinal, generate_scenario, replication_study, response_probability, LongitudinalSpec, Method,
    ScenarioSpec, StudyConfig, TRUE_MU,
};
use spline_mnar::stats::{mean, variance};

/// `E π(y, x)` by a tensor grid over the covariate the mechanism uses and
/// `y` given that covariate. Both are Gaussian.
fn expected_response_rate(id: u8) -> f64 {
    let (slope, cond_var) = if id == 7 { (-0.34, 1.6144) } else { (0.7, 1.24) };
    let sd = f64::sqrt(cond_var);
    let m = 801;
    let width = 9.0;
    let step = 2.0 * width / (m - 1) as f64;
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut total = 0.0;
    for a in 0..m {
        let c = -width + a as f64 * step;
        for b in 0..m {
            let e = -width + b as f64 * step;
            let y = 0.8 + slope * c + sd * e;
            let p = if id == 7 { response_probability(7, y, 0.0, c) } else { response_probability(id, y, c, 0.0) };
            total += p * phi(c) * phi(e);
        }
    }
    total * step * step
}

#[test]
fn response_rates_match_quadrature() {
    let n = 100_000;
    for id in 1..=7u8 {
        let sim = generate_scenario(ScenarioSpec::new(id, n, 500 + id as u64).unwrap()).unwrap();
        let rate = 1.0 - sim.dataset.n_missing() as f64 / n as f64;
        let expected = expected_response_rate(id);
        let se = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((rate - expected).abs() < 4.0 * se, "S{id}: {rate} vs {expected}");
        if id != 3 {
            assert!((0.65..=0.85).contains(&rate), "S{id}: rate {rate}");
        }
    }
}

#[test]
fn complementary_log_log_scenario_is_above_band() {
    let expected = expected_response_rate(3);
    assert!(expected > 0.85 && expected < 0.9, "{expected}");
}

#[test]
fn indicators_follow_analytic_probabilities() {
    let n = 1_000_000;
    for id in [1u8, 4, 6] {
        let sim = generate_scenario(ScenarioSpec::new(id, n, 42).unwrap()).unwrap();
        let bins = 10;
        let mut obs = vec![0.0; bins];
        let mut expct = vec![0.0; bins];
        let mut var = vec![0.0; bins];
        for i in 0..n {
            let p = sim.pi[i];
            let b = ((p * bins as f64) as usize).min(bins - 1);
            obs[b] += f64::from(u8::from(sim.dataset.observed()[i]));
            expct[b] += p;
            var[b] += p * (1.0 - p);
        }
        let mut stat = 0.0;
        let mut df = 0;
        for b in 0..bins {
            if var[b] > 0.0 {
                stat += (obs[b] - expct[b]).powi(2) / var[b];
                df += 1;
            }
        }
        let p = 1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat);
        assert!(p > 0.001, "S{id}: chi2 = {stat}, df = {df}, p = {p}");
    }
}

#[test]
fn marginal_mean_of_response() {
    let n = 1_000_000;
    let sim = generate_scenario(ScenarioSpec::new(2, n, 8).unwrap()).unwrap();
    let m = mean(&sim.y_full);
    let se = (variance(&sim.y_full) / n as f64).sqrt();
    assert!((m - TRUE_MU).abs() < 4.0 * se, "{m}");
    assert!((variance(&sim.y_full) - 1.73).abs() < 0.01);
}

#[test]
fn covariate_moments() {
    let sim = generate_scenario(ScenarioSpec::new(1, 200_000, 3).unwrap()).unwrap();
    let cov = sim.x1.iter().zip(&sim.x2).map(|(a, b)| a * b).sum::<f64>() / sim.x1.len() as f64;
    assert!((cov - 0.2).abs() < 0.01, "{cov}");
    assert!((variance(&sim.x2) - 1.0).abs() < 0.01);
}

#[test]
fn oracle_method_is_unbiased_with_nominal_coverage() {
    let config = StudyConfig { methods: vec![Method::Oracle], reps: 200, ..Default::default() };
    let result = replication_study(&config).unwrap();
    let row = &result.rows[0];
    assert_eq!(row.failed, 0);
    let est: Vec<f64> = result.estimates.iter().map(|e| e.result.as_ref().unwrap().mu.estimate).collect();
    let se = (variance(&est) / est.len() as f64).sqrt();
    assert!((row.mu_bias / 100.0).abs() < 4.0 * se, "bias {}", row.mu_bias);
    assert!((90.0..=99.0).contains(&row.mu_cp), "cp {}", row.mu_cp);
}

#[test]
fn longitudinal_missingness_is_moderate_and_monotone_in_arm_one() {
    let spec = LongitudinalSpec::default();
    let d = generate_longitudinal(&spec).unwrap();
    let frac = d.dataset.n_missing() as f64 / d.dataset.n() as f64;
    assert!((0.1..0.3).contains(&frac), "{frac}");
    let miss_at = |t: f64| {
        let idx: Vec<usize> = (0..d.dataset.n()).filter(|&i| d.time[i] == t && d.arm[i] == 1.0).collect();
        idx.iter().filter(|&&i| !d.dataset.observed()[i]).count() as f64 / idx.len() as f64
    };
    assert!(miss_at(8.0) > miss_at(1.0));
}
