use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::scenario::{generate_scenario, ScenarioSpec, TRUE_BETA, TRUE_MU};
use super::{credible_interval, dic, estimate_mu, Interval};
use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::mcmc::{run_chain, McmcConfig, ModelSpec};
use crate::outcome::OutcomeKind;
use crate::response::{ResponseKind, ResponseModelSpec};

/// Estimation methods compared in the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Full-data estimates, before any response is masked.
    Oracle,
    /// Observed rows only.
    CompleteCase,
    Linear,
    Semiparametric,
    Nonparametric,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Self::Oracle, Self::CompleteCase, Self::Linear, Self::Semiparametric, Self::Nonparametric];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Oracle => "OR",
            Self::CompleteCase => "CC",
            Self::Linear => "LR",
            Self::Semiparametric => "SR",
            Self::Nonparametric => "NR",
        }
    }

    pub fn response_kind(&self) -> Option<ResponseKind> {
        match self {
            Self::Linear => Some(ResponseKind::Linear),
            Self::Semiparametric => Some(ResponseKind::Semiparametric),
            Self::Nonparametric => Some(ResponseKind::Nonparametric),
            _ => None,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

/// Estimates produced by one method on one dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodEstimate {
    pub mu: Interval,
    pub beta1: Interval,
    pub beta2: Interval,
    pub dic: Option<f64>,
}

/// Outcome of one method on one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RepEstimate {
    pub scenario: u8,
    pub n: usize,
    pub rep: usize,
    pub method: Method,
    pub result: std::result::Result<MethodEstimate, String>,
}

/// Aggregated metrics; everything except `dic` is multiplied by 100.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub method: Method,
    pub scenario: u8,
    pub n: usize,
    pub reps: usize,
    pub failed: usize,
    pub mu_rmse: f64,
    pub mu_bias: f64,
    pub mu_cp: f64,
    pub mu_al: f64,
    pub b1_rmse: f64,
    pub b1_bias: f64,
    pub b1_cp: f64,
    pub b1_al: f64,
    pub b2_rmse: f64,
    pub b2_bias: f64,
    pub b2_cp: f64,
    pub b2_al: f64,
    /// Mean DIC over replications (`NaN` for OR and CC).
    pub dic: f64,
}

/// Replication study settings.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub scenarios: Vec<u8>,
    pub sample_sizes: Vec<usize>,
    pub reps: usize,
    pub methods: Vec<Method>,
    pub mcmc: McmcConfig,
    pub master_seed: u64,
    pub semiparametric: ResponseModelSpec,
    pub nonparametric: ResponseModelSpec,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            scenarios: vec![1],
            sample_sizes: vec![500],
            reps: 200,
            methods: Method::ALL.to_vec(),
            mcmc: McmcConfig::default(),
            master_seed: 2024,
            semiparametric: ResponseModelSpec::semiparametric(),
            nonparametric: ResponseModelSpec::nonparametric(),
        }
    }
}

impl StudyConfig {
    fn response_spec(&self, method: Method) -> Option<ResponseModelSpec> {
        match method {
            Method::Linear => Some(ResponseModelSpec::linear()),
            Method::Semiparametric => Some(self.semiparametric.clone()),
            Method::Nonparametric => Some(self.nonparametric.clone()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub rows: Vec<MetricsRow>,
    pub estimates: Vec<RepEstimate>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for a sub-task, mixed from a parent seed and a sequence of labels.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(splitmix64(master), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

/// OLS coefficient estimates and t intervals for `β1`, `β2`, and the
/// t interval for the mean, on the given rows.
pub fn frequentist_estimates(x: &DMatrix<f64>, y: &[f64], rows: &[usize]) -> Result<MethodEstimate> {
    let m = rows.len();
    let p = x.ncols();
    if m <= p {
        return Err(Error::Unfittable(format!("{m} rows for {p} coefficients")));
    }
    let xs = DMatrix::from_fn(m, p, |r, j| x[(rows[r], j)]);
    let ys = DVector::from_iterator(m, rows.iter().map(|&i| y[i]));
    let xtx_inv = (xs.transpose() * &xs)
        .try_inverse()
        .ok_or_else(|| Error::Unfittable("singular design".into()))?;
    let beta = &xtx_inv * xs.transpose() * &ys;
    let resid = &ys - &xs * &beta;
    let df = (m - p) as f64;
    let s2 = resid.norm_squared() / df;
    let t_coef = student_quantile(df)?;
    let coef = |j: usize| {
        let half = t_coef * (s2 * xtx_inv[(j, j)]).sqrt();
        Interval { estimate: beta[j], lower: beta[j] - half, upper: beta[j] + half }
    };
    let values: Vec<f64> = ys.iter().copied().collect();
    let mean = crate::stats::mean(&values);
    let half = student_quantile((m - 1) as f64)? * (crate::stats::variance(&values) / m as f64).sqrt();
    Ok(MethodEstimate {
        mu: Interval { estimate: mean, lower: mean - half, upper: mean + half },
        beta1: coef(1),
        beta2: coef(2),
        dic: None,
    })
}

fn student_quantile(df: f64) -> Result<f64> {
    let t = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numerical(format!("t distribution: {e}")))?;
    Ok(t.inverse_cdf(0.975))
}

fn bayesian_estimate(data: &Dataset, spec: ResponseModelSpec, mcmc: &McmcConfig) -> Result<MethodEstimate> {
    let draws = run_chain(data, &ModelSpec::new(spec, OutcomeKind::Linear), mcmc)?;
    let col = |name: &str| {
        draws
            .column(name)
            .ok_or_else(|| Error::InvalidArgument(format!("missing parameter {name}")))
    };
    Ok(MethodEstimate {
        mu: estimate_mu(&draws)?,
        beta1: credible_interval(&col("beta_x1")?)?,
        beta2: credible_interval(&col("beta_x2")?)?,
        dic: Some(dic(&draws)?),
    })
}

fn run_replication(config: &StudyConfig, scenario: u8, n: usize, rep: usize) -> Vec<RepEstimate> {
    let seed = derive_seed(config.master_seed, &[scenario as u64, n as u64, rep as u64]);
    let sim = ScenarioSpec::new(scenario, n, seed).and_then(generate_scenario);
    config
        .methods
        .iter()
        .map(|&method| {
            let result = sim.as_ref().map_err(|e| e.to_string()).and_then(|sim| {
                let data = &sim.dataset;
                let out = match method {
                    Method::Oracle => {
                        let all: Vec<usize> = (0..n).collect();
                        frequentist_estimates(data.x(), &sim.y_full, &all)
                    }
                    Method::CompleteCase => {
                        let obs: Vec<usize> = (0..n).filter(|&i| data.observed()[i]).collect();
                        frequentist_estimates(data.x(), &sim.y_full, &obs)
                    }
                    _ => {
                        let spec = config.response_spec(method).expect("model-based method");
                        let code = Method::ALL.iter().position(|&m| m == method).unwrap_or(0) as u64;
                        let mcmc = McmcConfig { seed: derive_seed(seed, &[100 + code]), ..config.mcmc.clone() };
                        bayesian_estimate(data, spec, &mcmc)
                    }
                };
                out.map_err(|e| e.to_string())
            });
            RepEstimate { scenario, n, rep, method, result }
        })
        .collect()
}

/// Run every (scenario, n, replication) cell in parallel and aggregate.
/// Failed fits are counted and excluded.
pub fn replication_study(config: &StudyConfig) -> Result<StudyResult> {
    if config.reps == 0 {
        return invalid("need at least one replication");
    }
    if config.methods.is_empty() {
        return invalid("no methods requested");
    }
    config.mcmc.validate()?;
    let mut cells = Vec::new();
    for &s in &config.scenarios {
        ScenarioSpec::new(s, 1, 0)?;
        for &n in &config.sample_sizes {
            for rep in 0..config.reps {
                cells.push((s, n, rep));
            }
        }
    }
    let estimates: Vec<RepEstimate> = cells
        .par_iter()
        .flat_map_iter(|&(s, n, rep)| run_replication(config, s, n, rep))
        .collect();

    let mut rows = Vec::new();
    for &s in &config.scenarios {
        for &n in &config.sample_sizes {
            for &method in &config.methods {
                let mut ok = Vec::new();
                let mut failed = 0;
                for e in estimates.iter().filter(|e| e.scenario == s && e.n == n && e.method == method) {
                    match &e.result {
                        Ok(m) => ok.push(*m),
                        Err(_) => failed += 1,
                    }
                }
                rows.push(metrics_row(method, s, n, &ok, failed));
            }
        }
    }
    Ok(StudyResult { rows, estimates })
}

struct Accuracy {
    rmse: f64,
    bias: f64,
    cp: f64,
    al: f64,
}

fn accuracy(intervals: impl Iterator<Item = Interval> + Clone, truth: f64) -> Accuracy {
    let r = intervals.clone().count();
    if r == 0 {
        return Accuracy { rmse: f64::NAN, bias: f64::NAN, cp: f64::NAN, al: f64::NAN };
    }
    let rf = r as f64;
    let mut se = 0.0;
    let mut bias = 0.0;
    let mut cover = 0.0;
    let mut len = 0.0;
    for i in intervals {
        let d = i.estimate - truth;
        se += d * d;
        bias += d;
        cover += f64::from(u8::from(i.covers(truth)));
        len += i.length();
    }
    Accuracy { rmse: (se / rf).sqrt(), bias: bias / rf, cp: cover / rf, al: len / rf }
}

/// Metrics for one method and cell from its successful replications.
pub fn metrics_row(method: Method, scenario: u8, n: usize, estimates: &[MethodEstimate], failed: usize) -> MetricsRow {
    let mu = accuracy(estimates.iter().map(|e| e.mu), TRUE_MU);
    let b1 = accuracy(estimates.iter().map(|e| e.beta1), TRUE_BETA[1]);
    let b2 = accuracy(estimates.iter().map(|e| e.beta2), TRUE_BETA[2]);
    let dics: Vec<f64> = estimates.iter().filter_map(|e| e.dic).collect();
    MetricsRow {
        method,
        scenario,
        n,
        reps: estimates.len(),
        failed,
        mu_rmse: 100.0 * mu.rmse,
        mu_bias: 100.0 * mu.bias,
        mu_cp: 100.0 * mu.cp,
        mu_al: 100.0 * mu.al,
        b1_rmse: 100.0 * b1.rmse,
        b1_bias: 100.0 * b1.bias,
        b1_cp: 100.0 * b1.cp,
        b1_al: 100.0 * b1.al,
        b2_rmse: 100.0 * b2.rmse,
        b2_bias: 100.0 * b2.bias,
        b2_cp: 100.0 * b2.cp,
        b2_al: 100.0 * b2.al,
        dic: if dics.is_empty() { f64::NAN } else { crate::stats::mean(&dics) },
    }
}
