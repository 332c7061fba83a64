use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::logistic;

/// Regression coefficients `(β0, β1, β2)` of the simulation model.
pub const TRUE_BETA: [f64; 3] = [0.8, 0.8, -0.5];
/// Error variance of the simulation model.
pub const TRUE_SIGMA2: f64 = 1.0;
/// Covariance between the two covariates.
pub const COVARIATE_CORRELATION: f64 = 0.2;
/// Population mean of the response.
pub const TRUE_MU: f64 = 0.8;
pub const N_SCENARIOS: u8 = 7;

/// One simulated dataset request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioSpec {
    pub id: u8,
    pub n: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(id: u8, n: usize, seed: u64) -> Result<Self> {
        if !(1..=N_SCENARIOS).contains(&id) {
            return invalid(format!("scenario must be in 1..={N_SCENARIOS}, got {id}"));
        }
        Ok(Self { id, n, seed })
    }
}

/// Response probability `π(y, x1, x2)` of scenario `id`.
pub fn response_probability(id: u8, y: f64, x1: f64, x2: f64) -> f64 {
    match id {
        1 => logistic(1.5 - 0.5 * y + 0.2 * x1),
        2 => logistic(2.5 - 0.2 * y - 0.4 * y * y + 0.2 * x1),
        3 => -(-(2.5 - 0.2 * y - 0.4 * y * y + 0.2 * x1).exp()).exp_m1(),
        4 => logistic(0.7 * y * y + 0.2 * x1),
        5 => logistic(0.5 * y * y + x1 * x1),
        6 => logistic(1.5 - 2.0 * y.sin() + 0.2 * x1 * x1),
        7 => logistic(0.7 * y * y + 0.2 * x2),
        _ => f64::NAN,
    }
}

/// Simulated data plus the quantities a real study would not see.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    /// Outcome design `(1, x1, x2)`, response covariate `z = x1`.
    pub dataset: Dataset,
    /// Responses before masking.
    pub y_full: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub pi: Vec<f64>,
    /// Covariate excluded from the true response mechanism.
    pub instrument: &'static str,
}

/// Draw covariates, responses and response indicators for a scenario.
pub fn generate_scenario(spec: ScenarioSpec) -> Result<SimulatedData> {
    let spec = ScenarioSpec::new(spec.id, spec.n, spec.seed)?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rho = COVARIATE_CORRELATION;
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut pi = Vec::with_capacity(n);
    let mut observed = Vec::with_capacity(n);
    for _ in 0..n {
        let e1: f64 = rng.sample(StandardNormal);
        let e2: f64 = rng.sample(StandardNormal);
        let a = e1;
        let b = rho * e1 + (1.0 - rho * rho).sqrt() * e2;
        let eps: f64 = rng.sample(StandardNormal);
        let yi = TRUE_BETA[0] + TRUE_BETA[1] * a + TRUE_BETA[2] * b + TRUE_SIGMA2.sqrt() * eps;
        let p = response_probability(spec.id, yi, a, b);
        observed.push(rng.random::<f64>() < p);
        x1.push(a);
        x2.push(b);
        y.push(yi);
        pi.push(p);
    }
    let x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => x1[i],
        _ => x2[i],
    });
    let z = DMatrix::from_fn(n, 1, |i, _| x1[i]);
    let dataset = Dataset::new(y.clone(), observed, x, z)?
        .with_names(vec!["intercept".into(), "x1".into(), "x2".into()], vec!["x1".into()])?;
    Ok(SimulatedData {
        dataset,
        y_full: y,
        x1,
        x2,
        pi,
        instrument: if spec.id == 7 { "x1" } else { "x2" },
    })
}

/// Settings for the longitudinal generator: random-intercept outcome with
/// a cubic time trend per arm and a response mechanism that is quadratic in
/// `y` with time, arm and lagged-response effects.
#[derive(Debug, Clone, PartialEq)]
pub struct LongitudinalSpec {
    pub n_subjects: usize,
    pub times: Vec<f64>,
    /// `(β_0k, β_1k, β_2k, β_3k)` for arm 0 then arm 1.
    pub beta: [[f64; 4]; 2],
    pub tau2: f64,
    pub sigma2: f64,
    /// `g(y) = g0 + g1 y + g2 y²`.
    pub g: [f64; 3],
    /// Coefficients of time, arm and the lagged response indicator.
    pub delta: [f64; 3],
    pub seed: u64,
}

impl Default for LongitudinalSpec {
    fn default() -> Self {
        Self {
            n_subjects: 400,
            times: vec![1.0, 2.0, 4.0, 6.0, 8.0],
            beta: [[0.5, -0.1, 0.0, 0.0], [2.0, -0.6, 0.0, 0.0]],
            tau2: 0.5,
            sigma2: 1.0,
            g: [2.0, 0.0, -0.3],
            delta: [-0.05, 0.0, 1.0],
            seed: 1,
        }
    }
}

impl LongitudinalSpec {
    /// Mean of arm `k` at time `t`.
    pub fn arm_mean(&self, k: usize, t: f64) -> f64 {
        let b = &self.beta[k];
        b[0] + b[1] * t + b[2] * t * t + b[3] * t * t * t
    }

    /// Arm 1 minus arm 0 at time `t`.
    pub fn difference(&self, t: f64) -> f64 {
        self.arm_mean(1, t) - self.arm_mean(0, t)
    }
}

/// Simulated longitudinal trial.
#[derive(Debug, Clone, PartialEq)]
pub struct LongitudinalData {
    /// Outcome design: arm-by-time cubic; response covariates
    /// `(time, arm, lagged indicator)`; subject labels attached.
    pub dataset: Dataset,
    pub y_full: Vec<f64>,
    pub arm: Vec<f64>,
    pub time: Vec<f64>,
    pub subject: Vec<usize>,
}

pub fn generate_longitudinal(spec: &LongitudinalSpec) -> Result<LongitudinalData> {
    if spec.times.is_empty() || spec.n_subjects == 0 {
        return invalid("need at least one subject and one time");
    }
    if !(spec.tau2 > 0.0 && spec.sigma2 > 0.0) {
        return invalid("variances must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut y = Vec::new();
    let mut arm = Vec::new();
    let mut time = Vec::new();
    let mut subject = Vec::new();
    let mut observed = Vec::new();
    let mut lag = Vec::new();
    for i in 0..spec.n_subjects {
        let k = i % 2;
        let v = spec.tau2.sqrt() * rng.sample::<f64, _>(StandardNormal);
        let mut prev = 1.0;
        for &t in &spec.times {
            let yi = spec.arm_mean(k, t) + v + spec.sigma2.sqrt() * rng.sample::<f64, _>(StandardNormal);
            let u = spec.g[0] + spec.g[1] * yi + spec.g[2] * yi * yi
                + spec.delta[0] * t
                + spec.delta[1] * k as f64
                + spec.delta[2] * prev;
            let s = rng.random::<f64>() < logistic(u);
            y.push(yi);
            arm.push(k as f64);
            time.push(t);
            subject.push(i);
            observed.push(s);
            lag.push(prev);
            prev = if s { 1.0 } else { 0.0 };
        }
    }
    let n = y.len();
    let (x, x_names) = crate::data::arm_time_polynomial(&arm, &time, 3);
    let z = DMatrix::from_fn(n, 3, |r, c| match c {
        0 => time[r],
        1 => arm[r],
        _ => lag[r],
    });
    let dataset = Dataset::new(y.clone(), observed, x, z)?
        .with_names(x_names, vec!["time".into(), "arm".into(), "lag_observed".into()])?
        .with_groups(subject.clone())?;
    Ok(LongitudinalData { dataset, y_full: y, arm, time, subject })
}
