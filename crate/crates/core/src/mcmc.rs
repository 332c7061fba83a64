//! Chain orchestration: initialization, the Gibbs sweep, Langevin
//! imputation of missing responses, and draw storage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::outcome::{gaussian_logpdf, OutcomeKind, OutcomeModel, OutcomePriors, OutcomeState};
use crate::response::{
    metropolis_accept, KnotStrategy, PriorConfig, ResponseKind, ResponseModel, ResponseModelSpec, ResponseState,
};

/// Target Langevin acceptance rate for step-size adaptation.
pub const MALA_TARGET_ACCEPTANCE: f64 = 0.574;
const LOG_STEP_BOUNDS: (f64, f64) = (-9.2, 4.6);

/// Sampler settings.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    pub n_burn: usize,
    pub n_keep: usize,
    pub thin: usize,
    /// Initial (or fixed) Langevin step size `h`.
    pub mala_step: f64,
    /// Random-walk standard deviation for the knot-expansion constants.
    pub rw_sd: f64,
    pub seed: u64,
    /// Robbins–Monro adaptation of per-observation `h` during burn-in.
    pub adapt_mala: bool,
    /// Keep every stored draw of every missing response.
    pub store_imputed: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_burn: 2000,
            n_keep: 3000,
            thin: 1,
            mala_step: 0.5,
            rw_sd: 0.1,
            seed: 1,
            adapt_mala: true,
            store_imputed: false,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_keep < 1 {
            return invalid("n_keep must be at least 1");
        }
        if self.thin < 1 {
            return invalid("thin must be at least 1");
        }
        if !(self.mala_step > 0.0) || !self.mala_step.is_finite() {
            return invalid("MALA step size must be positive");
        }
        if !(self.rw_sd > 0.0) || !self.rw_sd.is_finite() {
            return invalid("random-walk standard deviation must be positive");
        }
        Ok(())
    }
}

/// Full model specification: response mechanism and outcome model with
/// their priors.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub response: ResponseModelSpec,
    pub response_priors: PriorConfig,
    pub outcome: OutcomeKind,
    pub outcome_priors: OutcomePriors,
}

impl ModelSpec {
    pub fn new(response: ResponseModelSpec, outcome: OutcomeKind) -> Self {
        Self {
            response,
            response_priors: PriorConfig::default(),
            outcome,
            outcome_priors: OutcomePriors::default(),
        }
    }
}

/// Parameters of the chain at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub response: ResponseState,
    pub outcome: OutcomeState,
}

/// Positions of each parameter group in a flattened draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayout {
    pub names: Vec<String>,
    beta: (usize, usize),
    sigma2: usize,
    tau2: Option<usize>,
    phi: (usize, usize),
    gamma: (usize, usize),
    delta: (usize, usize),
    xi: (usize, usize),
    lambda: Option<usize>,
    lambda_xi: Option<usize>,
    a: Option<usize>,
    b: Option<usize>,
}

impl ParamLayout {
    fn new(data: &Dataset, response: &ResponseModel, outcome: OutcomeKind, state: &ChainState) -> Self {
        let mut names: Vec<String> = Vec::new();
        let span = |names: &mut Vec<String>, labels: Vec<String>| {
            let start = names.len();
            names.extend(labels);
            (start, names.len())
        };
        let beta = span(
            &mut names,
            data.x_names()
                .iter()
                .map(|n| if n.starts_with("beta") { n.clone() } else { format!("beta_{n}") })
                .collect(),
        );
        names.push("sigma2".into());
        let sigma2 = names.len() - 1;
        let tau2 = (outcome == OutcomeKind::Mixed).then(|| {
            names.push("tau2".into());
            names.len() - 1
        });
        let r = &state.response;
        let phi = span(&mut names, (0..r.phi.len()).map(|j| format!("phi_{j}")).collect());
        let gamma = span(&mut names, (1..=r.gamma.len()).map(|j| format!("gamma_{j}")).collect());
        let delta = span(&mut names, data.z_names().iter().take(r.delta.len()).map(|n| format!("delta_{n}")).collect());
        let xi = span(&mut names, (1..=r.xi.len()).map(|j| format!("xi_{j}")).collect());
        let lambda = (!r.gamma.is_empty()).then(|| {
            names.push("lambda".into());
            names.len() - 1
        });
        let lambda_xi = (!r.xi.is_empty()).then(|| {
            names.push("lambda_xi".into());
            names.len() - 1
        });
        let adaptive = response.anchors().is_some() && response.spec().knot_strategy.is_adaptive();
        let (a, b) = if adaptive {
            names.push("a".into());
            names.push("b".into());
            (Some(names.len() - 2), Some(names.len() - 1))
        } else {
            (None, None)
        };
        Self { names, beta, sigma2, tau2, phi, gamma, delta, xi, lambda, lambda_xi, a, b }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn pack(&self, state: &ChainState) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        out[self.beta.0..self.beta.1].copy_from_slice(state.outcome.beta());
        out[self.sigma2] = state.outcome.sigma2();
        if let (Some(i), Some(t)) = (self.tau2, state.outcome.tau2()) {
            out[i] = t;
        }
        let r = &state.response;
        out[self.phi.0..self.phi.1].copy_from_slice(&r.phi);
        out[self.gamma.0..self.gamma.1].copy_from_slice(&r.gamma);
        out[self.delta.0..self.delta.1].copy_from_slice(&r.delta);
        out[self.xi.0..self.xi.1].copy_from_slice(&r.xi);
        if let Some(i) = self.lambda {
            out[i] = r.lambda;
        }
        if let Some(i) = self.lambda_xi {
            out[i] = r.lambda_xi;
        }
        if let Some(i) = self.a {
            out[i] = r.a_expand;
        }
        if let Some(i) = self.b {
            out[i] = r.b_expand;
        }
        out
    }

    /// Overwrite the parameters of `template` from a flattened vector;
    /// random effects are taken from `v` when given.
    fn unpack(&self, values: &[f64], v: Option<&[f64]>, template: &ChainState) -> ChainState {
        let mut s = template.clone();
        match &mut s.outcome {
            OutcomeState::Linear(o) => {
                o.beta.copy_from_slice(&values[self.beta.0..self.beta.1]);
                o.sigma2 = values[self.sigma2];
            }
            OutcomeState::Mixed(o) => {
                o.beta.copy_from_slice(&values[self.beta.0..self.beta.1]);
                o.sigma2 = values[self.sigma2];
                if let Some(i) = self.tau2 {
                    o.tau2 = values[i];
                }
                if let Some(v) = v {
                    o.v.copy_from_slice(v);
                }
            }
        }
        let r = &mut s.response;
        r.phi.copy_from_slice(&values[self.phi.0..self.phi.1]);
        r.gamma.copy_from_slice(&values[self.gamma.0..self.gamma.1]);
        r.delta.copy_from_slice(&values[self.delta.0..self.delta.1]);
        r.xi.copy_from_slice(&values[self.xi.0..self.xi.1]);
        if let Some(i) = self.lambda {
            r.lambda = values[i];
        }
        if let Some(i) = self.lambda_xi {
            r.lambda_xi = values[i];
        }
        if let Some(i) = self.a {
            r.a_expand = values[i];
        }
        if let Some(i) = self.b {
            r.b_expand = values[i];
        }
        s
    }
}

/// Stored output of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    pub layout: ParamLayout,
    /// One flattened parameter vector per kept draw.
    pub params: Vec<Vec<f64>>,
    /// Complete-data joint log-likelihood per kept draw.
    pub loglik: Vec<f64>,
    /// Observed-data log-likelihood per kept draw: missing responses are
    /// integrated out of `f(y)(1 − π(y))`.
    pub observed_loglik: Vec<f64>,
    /// Sample mean of the completed responses per kept draw.
    pub mu: Vec<f64>,
    /// Fraction of Langevin moves accepted in the sweeps behind each draw.
    pub mala_rate: Vec<f64>,
    /// Fraction of knot moves accepted in the sweeps behind each draw.
    pub knot_rate: Vec<f64>,
    /// Indices of the missing responses.
    pub missing: Vec<usize>,
    /// Posterior mean of each missing response.
    pub imputed_mean: Vec<f64>,
    /// Every kept draw of the missing responses, when requested.
    pub imputed: Option<Vec<Vec<f64>>>,
    /// Posterior mean of the random intercepts (mixed model).
    pub random_effect_mean: Option<Vec<f64>>,
    /// Joint log-likelihood at posterior-mean parameters and imputed values.
    /// Joint log-likelihood at the posterior means of the imputed
    /// responses, of each outcome mean and of each response-model linear
    /// predictor, with `σ²` at its posterior mean.
    pub plugin_loglik: f64,
    /// Joint log-likelihood with every parameter at its posterior mean.
    pub parameter_plugin_loglik: f64,
    /// Observed-data log-likelihood at the posterior means of each outcome
    /// mean, of each observed row's linear predictor and of each missing
    /// row's nonresponse probability, with `σ²` at its posterior mean.
    pub observed_plugin_loglik: f64,
    pub mala_acceptance: f64,
    /// `NaN` when the knots are not sampled.
    pub knot_acceptance: f64,
    pub mean_step: f64,
}

impl Draws {
    pub fn n_draws(&self) -> usize {
        self.params.len()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.layout.index(name)?;
        Some(self.params.iter().map(|p| p[j]).collect())
    }

    pub fn posterior_means(&self) -> Vec<f64> {
        let n = self.params.len().max(1) as f64;
        let mut m = vec![0.0; self.layout.len()];
        for p in &self.params {
            for (a, b) in m.iter_mut().zip(p) {
                *a += b;
            }
        }
        m.iter_mut().for_each(|v| *v /= n);
        m
    }
}

/// Acceptance counts from one sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepStats {
    pub mala_proposed: usize,
    pub mala_accepted: usize,
    pub knot_proposed: usize,
    pub knot_accepted: usize,
}

/// A single Markov chain bound to a dataset.
#[derive(Debug, Clone)]
pub struct Chain {
    data: Dataset,
    missing: Vec<usize>,
    spec: ModelSpec,
    config: McmcConfig,
    response: ResponseModel,
    outcome: OutcomeModel,
    state: ChainState,
    log_step: Vec<f64>,
    sweeps_done: usize,
    rng: ChaCha8Rng,
}

impl Chain {
    /// Complete-case start: outcome parameters from least squares, missing
    /// responses at their fitted means, `ω = 1`, response coefficients zero,
    /// unit precisions, expansion constants 0.5 (or the fixed values).
    pub fn initialize(data: Dataset, spec: ModelSpec, config: McmcConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let outcome = OutcomeModel::new(spec.outcome, spec.outcome_priors, &data)?;
        let outcome_state = outcome.complete_case_fit(&data)?;
        let y_complete: Vec<f64> = (0..data.n())
            .map(|i| if data.observed()[i] { data.y()[i] } else { outcome.mean(i, &outcome_state) })
            .collect();
        let (a, b) = match spec.response.knot_strategy {
            KnotStrategy::Fixed { a, b } => (a, b),
            _ => (0.5, 0.5),
        };
        let response =
            ResponseModel::new(spec.response.clone(), spec.response_priors, &data, &y_complete, a, b, &mut rng)?;
        let response_state = response.initial_state(a, b);
        let missing = data.missing_indices();
        let log_step = vec![config.mala_step.ln(); missing.len()];
        Ok(Self {
            data,
            missing,
            spec,
            config,
            response,
            outcome,
            state: ChainState { response: response_state, outcome: outcome_state },
            log_step,
            sweeps_done: 0,
            rng,
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn config(&self) -> &McmcConfig {
        &self.config
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut ChainState {
        &mut self.state
    }

    pub fn response_model(&self) -> &ResponseModel {
        &self.response
    }

    pub fn outcome_model(&self) -> &OutcomeModel {
        &self.outcome
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn missing(&self) -> &[usize] {
        &self.missing
    }

    /// Completed responses (observed values plus current imputations).
    pub fn completed(&self) -> &[f64] {
        self.response.completed_responses()
    }

    /// Current values of the missing responses, in [`Chain::missing`] order.
    pub fn imputed(&self) -> Vec<f64> {
        let y = self.completed();
        self.missing.iter().map(|&i| y[i]).collect()
    }

    pub fn step_sizes(&self) -> Vec<f64> {
        self.log_step.iter().map(|v| v.exp()).collect()
    }

    pub fn set_step_sizes(&mut self, h: f64) -> Result<()> {
        if !(h > 0.0) || !h.is_finite() {
            return invalid("MALA step size must be positive");
        }
        self.log_step.iter_mut().for_each(|v| *v = h.ln());
        Ok(())
    }

    /// Set a missing response directly.
    pub fn set_imputed(&mut self, k: usize, y: f64) {
        self.response.set_response(self.missing[k], y);
    }

    /// Replace every response and the mask. `y_complete` must hold a value
    /// at every position; unobserved ones become the current imputations.
    pub fn replace_data(&mut self, y_complete: &[f64], observed: &[bool]) -> Result<()> {
        if y_complete.len() != self.data.n() || observed.len() != self.data.n() {
            return invalid("replacement data have the wrong length");
        }
        self.data.set_responses(y_complete.to_vec(), observed.to_vec())?;
        self.response.reset_responses(y_complete, observed);
        let old_missing = std::mem::replace(&mut self.missing, self.data.missing_indices());
        if old_missing.len() != self.missing.len() {
            self.log_step = vec![self.config.mala_step.ln(); self.missing.len()];
        }
        Ok(())
    }

    /// `log g(y)` and its derivative for missing response `k`:
    /// `log f(y) − u(y)/2 − ω u(y)²/2`.
    pub fn mala_target(&self, k: usize, y: f64) -> (f64, f64) {
        let i = self.missing[k];
        let (u, du) = self.response.predictor_at(i, y, &self.state.response);
        let w = self.state.response.omega[i];
        let lf = self.outcome.logpdf(i, y, &self.state.outcome);
        let gf = self.outcome.grad(i, y, &self.state.outcome);
        (lf - 0.5 * u - 0.5 * w * u * u, gf - (0.5 + w * u) * du)
    }

    /// Log Metropolis–Hastings ratio for moving missing response `k` from
    /// `y` to `y_new` with step `h`.
    pub fn mala_log_ratio(&self, k: usize, y: f64, y_new: f64, h: f64) -> f64 {
        let (lg, grad) = self.mala_target(k, y);
        let (lg_new, grad_new) = self.mala_target(k, y_new);
        let forward = y_new - y - h * grad;
        let backward = y - y_new - h * grad_new;
        lg_new - lg - (backward * backward - forward * forward) / (4.0 * h)
    }

    /// One Langevin step for missing response `k`. Returns the acceptance
    /// probability and whether the move was accepted.
    pub fn mala_impute(&mut self, k: usize) -> Result<(f64, bool)> {
        let i = self.missing[k];
        let h = self.log_step[k].exp();
        let y = self.response.completed_responses()[i];
        let (_, grad) = self.mala_target(k, y);
        if !grad.is_finite() {
            return Err(Error::Numerical(format!("non-finite Langevin drift at row {i}")));
        }
        let eps: f64 = self.rng.sample(StandardNormal);
        let y_new = y + h * grad + (2.0 * h).sqrt() * eps;
        let log_ratio = self.mala_log_ratio(k, y, y_new, h);
        let prob = if log_ratio.is_nan() { 0.0 } else { log_ratio.min(0.0).exp() };
        let accepted = metropolis_accept(log_ratio, &mut self.rng);
        if accepted {
            self.response.set_response(i, y_new);
        }
        Ok((prob, accepted))
    }

    /// One full sweep: `ω → φ → γ → δ/ξ → λ/λ_ξ → knots → missing y → θ`.
    /// Step sizes adapt only when `adapt` is set.
    pub fn sweep(&mut self, adapt: bool) -> Result<SweepStats> {
        let mut stats = SweepStats::default();
        let rs = &mut self.state.response;
        self.response.update_omega(rs, &mut self.rng)?;
        self.response.update_phi(rs, &mut self.rng)?;
        self.response.update_gamma(rs, &mut self.rng)?;
        self.response.update_delta(rs, &mut self.rng)?;
        self.response.update_xi(rs, &mut self.rng)?;
        self.response.update_lambda(rs, &mut self.rng)?;
        self.response.update_lambda_xi(rs, &mut self.rng)?;
        let knot = self.response.update_knot_expansion(rs, self.config.rw_sd, &mut self.rng)?;
        stats.knot_proposed = knot.proposed;
        stats.knot_accepted = knot.accepted;

        self.sweeps_done += 1;
        let gain = (self.sweeps_done as f64).powf(-0.6);
        for k in 0..self.missing.len() {
            let (prob, accepted) = self.mala_impute(k)?;
            stats.mala_proposed += 1;
            stats.mala_accepted += usize::from(accepted);
            if adapt {
                let ls = &mut self.log_step[k];
                *ls = (*ls + gain * (prob - MALA_TARGET_ACCEPTANCE)).clamp(LOG_STEP_BOUNDS.0, LOG_STEP_BOUNDS.1);
            }
        }

        let y = self.response.completed_responses();
        self.outcome.update(&mut self.state.outcome, y, &mut self.rng)?;
        Ok(stats)
    }

    /// Complete-data joint log-likelihood at the current state.
    pub fn log_likelihood(&self) -> f64 {
        let y = self.response.completed_responses();
        self.outcome.log_likelihood(y, &self.state.outcome) + self.response.log_likelihood(&self.state.response)
    }

    /// Burn in, then keep `n_keep` draws spaced `thin` sweeps apart.
    pub fn run(&mut self) -> Result<Draws> {
        let adapt = self.config.adapt_mala;
        for _ in 0..self.config.n_burn {
            self.sweep(adapt)?;
        }
        let layout = ParamLayout::new(&self.data, &self.response, self.spec.outcome, &self.state);
        let n_keep = self.config.n_keep;
        let n_mis = self.missing.len();
        let n = self.data.n() as f64;
        let mut params = Vec::with_capacity(n_keep);
        let mut loglik = Vec::with_capacity(n_keep);
        let mut mu = Vec::with_capacity(n_keep);
        let mut imputed = self.config.store_imputed.then(|| Vec::with_capacity(n_keep));
        let mut imputed_sum = vec![0.0; n_mis];
        let mut v_sum = self.state.outcome.random_effects().map(|v| vec![0.0; v.len()]);
        let mut u_sum = vec![0.0; self.data.n()];
        let mut p_sum = vec![0.0; self.data.n()];
        let mut observed_loglik = Vec::with_capacity(n_keep);
        let nodes = marginal_nodes();
        let mut m_sum = vec![0.0; self.data.n()];
        let mut totals = SweepStats::default();
        let mut mala_rate = Vec::with_capacity(n_keep);
        let mut knot_rate = Vec::with_capacity(n_keep);
        let ratio = |a: usize, p: usize| if p == 0 { f64::NAN } else { a as f64 / p as f64 };
        for _ in 0..n_keep {
            let mut window = SweepStats::default();
            for _ in 0..self.config.thin {
                let s = self.sweep(false)?;
                window.mala_proposed += s.mala_proposed;
                window.mala_accepted += s.mala_accepted;
                window.knot_proposed += s.knot_proposed;
                window.knot_accepted += s.knot_accepted;
            }
            mala_rate.push(ratio(window.mala_accepted, window.mala_proposed));
            knot_rate.push(ratio(window.knot_accepted, window.knot_proposed));
            totals.mala_proposed += window.mala_proposed;
            totals.mala_accepted += window.mala_accepted;
            totals.knot_proposed += window.knot_proposed;
            totals.knot_accepted += window.knot_accepted;
            params.push(layout.pack(&self.state));
            loglik.push(self.log_likelihood());
            let y = self.completed();
            mu.push(y.iter().sum::<f64>() / n);
            let sd = self.state.outcome.sigma2().sqrt();
            let mut obs_ll = 0.0;
            for i in 0..self.data.n() {
                let m = self.outcome.mean(i, &self.state.outcome);
                m_sum[i] += m;
                let u = self.response.predictor(i, &self.state.response);
                u_sum[i] += u;
                if self.data.observed()[i] {
                    obs_ll += self.outcome.logpdf(i, y[i], &self.state.outcome) + crate::log_logistic(u);
                } else {
                    let p: f64 = nodes
                        .iter()
                        .map(|&(t, w)| w * crate::logistic(-self.response.predictor_at(i, m + sd * t, &self.state.response).0))
                        .sum();
                    p_sum[i] += p;
                    obs_ll += p.max(1e-300).ln();
                }
            }
            observed_loglik.push(obs_ll);
            let current = self.imputed();
            for (s, v) in imputed_sum.iter_mut().zip(&current) {
                *s += v;
            }
            if let (Some(sum), Some(v)) = (v_sum.as_mut(), self.state.outcome.random_effects()) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
            }
            if let Some(store) = imputed.as_mut() {
                store.push(current);
            }
        }
        let kn = n_keep as f64;
        let imputed_mean: Vec<f64> = imputed_sum.iter().map(|s| s / kn).collect();
        let random_effect_mean = v_sum.map(|s| s.iter().map(|x| x / kn).collect::<Vec<_>>());
        let mut draws = Draws {
            layout,
            params,
            loglik,
            observed_loglik,
            mu,
            mala_rate,
            knot_rate,
            missing: self.missing.clone(),
            imputed_mean,
            imputed,
            random_effect_mean,
            plugin_loglik: f64::NAN,
            parameter_plugin_loglik: f64::NAN,
            observed_plugin_loglik: f64::NAN,
            mala_acceptance: ratio(totals.mala_accepted, totals.mala_proposed),
            knot_acceptance: ratio(totals.knot_accepted, totals.knot_proposed),
            mean_step: if n_mis == 0 { f64::NAN } else { self.step_sizes().iter().sum::<f64>() / n_mis as f64 },
        };
        draws.parameter_plugin_loglik = self.parameter_plugin_log_likelihood(&draws)?;
        let sigma2 = draws.posterior_means()[draws.layout.sigma2];
        let mut y = self.completed().to_vec();
        for (&i, &v) in draws.missing.iter().zip(&draws.imputed_mean) {
            y[i] = v;
        }
        draws.plugin_loglik = (0..self.data.n())
            .map(|i| {
                let u = u_sum[i] / kn;
                let p = crate::logistic(if self.data.observed()[i] { u } else { -u });
                gaussian_logpdf(y[i], m_sum[i] / kn, sigma2) + p.max(1e-300).ln()
            })
            .sum();
        draws.observed_plugin_loglik = (0..self.data.n())
            .map(|i| {
                if self.data.observed()[i] {
                    gaussian_logpdf(y[i], m_sum[i] / kn, sigma2) + crate::log_logistic(u_sum[i] / kn)
                } else {
                    (p_sum[i] / kn).max(1e-300).ln()
                }
            })
            .sum();
        Ok(draws)
    }

    /// Joint log-likelihood at posterior-mean parameters, random effects
    /// and imputed responses.
    pub fn parameter_plugin_log_likelihood(&self, draws: &Draws) -> Result<f64> {
        let means = draws.posterior_means();
        let state = draws.layout.unpack(&means, draws.random_effect_mean.as_deref(), &self.state);
        let mut y = self.completed().to_vec();
        for (&i, &v) in draws.missing.iter().zip(&draws.imputed_mean) {
            y[i] = v;
        }
        let mut response = self.response.clone();
        if draws.layout.a.is_some() {
            response.set_expansion(state.response.a_expand, state.response.b_expand)?;
        }
        response.reset_responses(&y, self.data.observed());
        Ok(self.outcome.log_likelihood(&y, &state.outcome) + response.log_likelihood(&state.response))
    }
}

/// Standard-normal nodes and weights for integrating out a missing
/// response: a trapezoid grid on `[-6, 6]` with step 0.2, weights
/// normalized to one.
fn marginal_nodes() -> Vec<(f64, f64)> {
    let raw: Vec<(f64, f64)> = (0..=60)
        .map(|k| {
            let t = -6.0 + 0.2 * k as f64;
            (t, (-0.5 * t * t).exp())
        })
        .collect();
    let total: f64 = raw.iter().map(|p| p.1).sum();
    raw.into_iter().map(|(t, w)| (t, w / total)).collect()
}

/// Initialize and run one chain.
pub fn run_chain(data: &Dataset, spec: &ModelSpec, config: &McmcConfig) -> Result<Draws> {
    Chain::initialize(data.clone(), spec.clone(), config.clone())?.run()
}

/// Response-model spec for `kind` with the knot strategy and sizes given.
pub fn response_spec(kind: ResponseKind, degree: usize, n_knots: usize, n_rbf: usize, knots: KnotStrategy) -> ResponseModelSpec {
    ResponseModelSpec {
        degree,
        n_knots,
        n_rbf,
        knot_strategy: knots,
        ..ResponseModelSpec::for_kind(kind)
    }
}
