//! Simulation scenarios, estimands, DIC, posterior summaries and the
//! replication harness.

mod scenario;
mod study;

pub use scenario::{
    generate_longitudinal, generate_scenario, response_probability, LongitudinalData, LongitudinalSpec,
    ScenarioSpec, SimulatedData, COVARIATE_CORRELATION, N_SCENARIOS, TRUE_BETA, TRUE_MU, TRUE_SIGMA2,
};
pub use study::{
    derive_seed, frequentist_estimates, metrics_row, replication_study, Method, MethodEstimate, MetricsRow,
    RepEstimate, StudyConfig, StudyResult,
};

use crate::error::{invalid, Result};
use crate::mcmc::Draws;
use crate::stats::quantile;

/// Point estimate with an equal-tailed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn covers(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Posterior mean and 95% interval of a set of draws.
pub fn credible_interval(draws: &[f64]) -> Result<Interval> {
    if draws.is_empty() {
        return invalid("no draws");
    }
    Ok(Interval {
        estimate: crate::stats::mean(draws),
        lower: quantile(draws, 0.025),
        upper: quantile(draws, 0.975),
    })
}

/// Posterior mean and 95% interval of `n⁻¹ Σ y_i` over the kept draws.
pub fn estimate_mu(draws: &Draws) -> Result<Interval> {
    credible_interval(&draws.mu)
}

/// `D̄ + p_D` with `D = −2 log L` and `p_D = D̄ − D(θ̄)`.
pub fn dic_from_logliks(per_draw: &[f64], plugin: f64) -> Result<f64> {
    if per_draw.is_empty() {
        return invalid("no draws");
    }
    let d_bar = -2.0 * crate::stats::mean(per_draw);
    let d_hat = -2.0 * plugin;
    Ok(2.0 * d_bar - d_hat)
}

/// DIC from the observed-data likelihood: missing responses are integrated
/// out rather than plugged in.
pub fn dic(draws: &Draws) -> Result<f64> {
    dic_from_logliks(&draws.observed_loglik, draws.observed_plugin_loglik)
}

/// DIC from the complete-data joint log-likelihood, with the imputed
/// responses treated as data.
pub fn complete_data_dic(draws: &Draws) -> Result<f64> {
    dic_from_logliks(&draws.loglik, draws.plugin_loglik)
}

/// One line of a posterior summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
}

pub fn summarize_values(name: &str, values: &[f64]) -> Result<SummaryRow> {
    if values.is_empty() {
        return invalid(format!("no draws for {name}"));
    }
    let sd = if values.len() > 1 { crate::stats::variance(values).sqrt() } else { 0.0 };
    Ok(SummaryRow {
        name: name.to_string(),
        mean: crate::stats::mean(values),
        sd,
        q025: quantile(values, 0.025),
        q50: quantile(values, 0.5),
        q975: quantile(values, 0.975),
    })
}

/// Summaries of the named parameters (all parameters when `targets` is
/// empty), followed by `mu`.
pub fn posterior_summary(draws: &Draws, targets: &[&str]) -> Result<Vec<SummaryRow>> {
    if draws.n_draws() == 0 {
        return invalid("no draws");
    }
    let names: Vec<&str> = if targets.is_empty() {
        draws.layout.names.iter().map(String::as_str).collect()
    } else {
        targets.to_vec()
    };
    let mut rows = Vec::with_capacity(names.len() + 1);
    for name in names {
        let col = draws
            .column(name)
            .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown parameter '{name}'")))?;
        rows.push(summarize_values(name, &col)?);
    }
    rows.push(summarize_values("mu", &draws.mu)?);
    Ok(rows)
}
