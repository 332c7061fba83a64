//! Gaussian outcome models `f(y | x; θ)`: linear regression and the
//! random-intercept linear mixed model.
//!
//! Priors: `β ~ N(0, c_β⁻¹ I)`, `σ² ~ IG(c_σ, c_σ)`, `τ² ~ IG(c_τ, c_τ)`
//! (shape, rate). All conditionals below are the standard conjugate ones
//! given a completed response vector.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::linalg::sample_mvn_precision;

/// Which outcome model is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeKind {
    Linear,
    Mixed,
}

impl std::str::FromStr for OutcomeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "lm" => Ok(Self::Linear),
            "lmm" | "mixed" => Ok(Self::Mixed),
            other => Err(Error::Config(format!("unknown outcome model '{other}'"))),
        }
    }
}

/// Outcome prior hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomePriors {
    pub c_beta: f64,
    pub c_sigma: f64,
    pub c_tau: f64,
}

impl Default for OutcomePriors {
    fn default() -> Self {
        Self { c_beta: 1e-4, c_sigma: 1.0, c_tau: 1.0 }
    }
}

impl OutcomePriors {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c_beta", self.c_beta), ("c_sigma", self.c_sigma), ("c_tau", self.c_tau)] {
            if !(v > 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinRegState {
    pub beta: Vec<f64>,
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmmState {
    pub beta: Vec<f64>,
    /// Random intercept per subject.
    pub v: Vec<f64>,
    pub tau2: f64,
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeState {
    Linear(LinRegState),
    Mixed(LmmState),
}

impl OutcomeState {
    pub fn beta(&self) -> &[f64] {
        match self {
            Self::Linear(s) => &s.beta,
            Self::Mixed(s) => &s.beta,
        }
    }

    pub fn sigma2(&self) -> f64 {
        match self {
            Self::Linear(s) => s.sigma2,
            Self::Mixed(s) => s.sigma2,
        }
    }

    pub fn tau2(&self) -> Option<f64> {
        match self {
            Self::Linear(_) => None,
            Self::Mixed(s) => Some(s.tau2),
        }
    }

    pub fn random_effects(&self) -> Option<&[f64]> {
        match self {
            Self::Linear(_) => None,
            Self::Mixed(s) => Some(&s.v),
        }
    }
}

/// `log N(y; mean, variance)`.
#[inline]
pub fn gaussian_logpdf(y: f64, mean: f64, variance: f64) -> f64 {
    let d = y - mean;
    -0.5 * (std::f64::consts::TAU * variance).ln() - 0.5 * d * d / variance
}

/// `d/dy log N(y; mean, variance)`.
#[inline]
pub fn gaussian_grad(y: f64, mean: f64, variance: f64) -> f64 {
    -(y - mean) / variance
}

/// Outcome model bound to a design matrix (and subject labels for the
/// mixed model). `X'X` is cached since only the responses change.
#[derive(Debug, Clone)]
pub struct OutcomeModel {
    kind: OutcomeKind,
    priors: OutcomePriors,
    x: DMatrix<f64>,
    xtx: DMatrix<f64>,
    groups: Vec<usize>,
    group_sizes: Vec<usize>,
}

impl OutcomeModel {
    pub fn new(kind: OutcomeKind, priors: OutcomePriors, data: &Dataset) -> Result<Self> {
        priors.validate()?;
        let x = data.x().clone();
        let (groups, group_sizes) = match kind {
            OutcomeKind::Linear => (Vec::new(), Vec::new()),
            OutcomeKind::Mixed => {
                let groups = data
                    .groups()
                    .ok_or_else(|| Error::InvalidArgument("mixed model needs subject labels".into()))?
                    .to_vec();
                let mut sizes = vec![0; data.n_groups()];
                for &g in &groups {
                    sizes[g] += 1;
                }
                (groups, sizes)
            }
        };
        let xtx = x.transpose() * &x;
        Ok(Self { kind, priors, x, xtx, groups, group_sizes })
    }

    pub fn kind(&self) -> OutcomeKind {
        self.kind
    }

    pub fn priors(&self) -> &OutcomePriors {
        &self.priors
    }

    pub fn n_groups(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn n_coefficients(&self) -> usize {
        self.x.ncols()
    }

    #[inline]
    fn fixed_mean(&self, i: usize, beta: &[f64]) -> f64 {
        self.x.row(i).iter().zip(beta).map(|(a, b)| a * b).sum()
    }

    /// Conditional mean of record `i`, including the random intercept.
    #[inline]
    pub fn mean(&self, i: usize, state: &OutcomeState) -> f64 {
        match state {
            OutcomeState::Linear(s) => self.fixed_mean(i, &s.beta),
            OutcomeState::Mixed(s) => self.fixed_mean(i, &s.beta) + s.v[self.groups[i]],
        }
    }

    /// `log f(y | x_i; θ)`.
    pub fn logpdf(&self, i: usize, y: f64, state: &OutcomeState) -> f64 {
        gaussian_logpdf(y, self.mean(i, state), state.sigma2())
    }

    /// `d/dy log f(y | x_i; θ)`.
    pub fn grad(&self, i: usize, y: f64, state: &OutcomeState) -> f64 {
        gaussian_grad(y, self.mean(i, state), state.sigma2())
    }

    /// `Σ_i log f(y_i | x_i; θ)`.
    pub fn log_likelihood(&self, y: &[f64], state: &OutcomeState) -> f64 {
        y.iter().enumerate().map(|(i, &v)| self.logpdf(i, v, state)).sum()
    }

    /// One Gibbs sweep over all outcome blocks.
    pub fn update<R: Rng + ?Sized>(&self, state: &mut OutcomeState, y: &[f64], rng: &mut R) -> Result<()> {
        match state {
            OutcomeState::Linear(s) => self.linreg_gibbs_update(s, y, rng),
            OutcomeState::Mixed(s) => self.lmm_gibbs_update(s, y, rng),
        }
    }

    /// `β | σ², y` then `σ² | β, y` for linear regression.
    pub fn linreg_gibbs_update<R: Rng + ?Sized>(&self, state: &mut LinRegState, y: &[f64], rng: &mut R) -> Result<()> {
        state.beta = self.draw_beta(y, None, state.sigma2, rng)?;
        let rss = self.residual_ss(y, &state.beta, None);
        state.sigma2 = draw_inverse_gamma(self.priors.c_sigma + 0.5 * y.len() as f64, self.priors.c_sigma + 0.5 * rss, rng)?;
        Ok(())
    }

    /// `β`, then each `v_i`, then `τ²`, then `σ²`.
    pub fn lmm_gibbs_update<R: Rng + ?Sized>(&self, state: &mut LmmState, y: &[f64], rng: &mut R) -> Result<()> {
        self.lmm_update_beta(state, y, rng)?;
        self.lmm_update_random_effects(state, y, rng);
        self.lmm_update_tau2(state, rng)?;
        self.lmm_update_sigma2(state, y, rng)?;
        Ok(())
    }

    pub fn lmm_update_beta<R: Rng + ?Sized>(&self, state: &mut LmmState, y: &[f64], rng: &mut R) -> Result<()> {
        state.beta = self.draw_beta(y, Some(&state.v), state.sigma2, rng)?;
        Ok(())
    }

    /// Mean and variance of `v_g` given everything else.
    pub fn random_effect_conditional(&self, g: usize, sum_resid: f64, state: &LmmState) -> (f64, f64) {
        let prec = self.group_sizes[g] as f64 / state.sigma2 + 1.0 / state.tau2;
        ((sum_resid / state.sigma2) / prec, prec.recip())
    }

    pub fn lmm_update_random_effects<R: Rng + ?Sized>(&self, state: &mut LmmState, y: &[f64], rng: &mut R) {
        let mut sums = vec![0.0; self.n_groups()];
        for (i, &v) in y.iter().enumerate() {
            sums[self.groups[i]] += v - self.fixed_mean(i, &state.beta);
        }
        for g in 0..self.n_groups() {
            let (m, var) = self.random_effect_conditional(g, sums[g], state);
            let e: f64 = rng.sample(StandardNormal);
            state.v[g] = m + var.sqrt() * e;
        }
    }

    pub fn lmm_update_tau2<R: Rng + ?Sized>(&self, state: &mut LmmState, rng: &mut R) -> Result<()> {
        let ss: f64 = state.v.iter().map(|v| v * v).sum();
        state.tau2 = draw_inverse_gamma(
            self.priors.c_tau + 0.5 * state.v.len() as f64,
            self.priors.c_tau + 0.5 * ss,
            rng,
        )?;
        Ok(())
    }

    pub fn lmm_update_sigma2<R: Rng + ?Sized>(&self, state: &mut LmmState, y: &[f64], rng: &mut R) -> Result<()> {
        let rss = self.residual_ss(y, &state.beta, Some(&state.v));
        state.sigma2 = draw_inverse_gamma(self.priors.c_sigma + 0.5 * y.len() as f64, self.priors.c_sigma + 0.5 * rss, rng)?;
        Ok(())
    }

    /// Precision and linear term of `β | rest`.
    pub fn beta_conditional(&self, y: &[f64], v: Option<&[f64]>, sigma2: f64) -> (DMatrix<f64>, DVector<f64>) {
        let p = self.x.ncols();
        let mut rhs = DVector::zeros(p);
        for (i, &yi) in y.iter().enumerate() {
            let r = match v {
                Some(v) => yi - v[self.groups[i]],
                None => yi,
            };
            for j in 0..p {
                rhs[j] += self.x[(i, j)] * r;
            }
        }
        let mut prec = &self.xtx / sigma2;
        for j in 0..p {
            prec[(j, j)] += self.priors.c_beta;
        }
        (prec, rhs / sigma2)
    }

    fn draw_beta<R: Rng + ?Sized>(&self, y: &[f64], v: Option<&[f64]>, sigma2: f64, rng: &mut R) -> Result<Vec<f64>> {
        let (prec, rhs) = self.beta_conditional(y, v, sigma2);
        Ok(sample_mvn_precision(prec, &rhs, rng)?.as_slice().to_vec())
    }

    fn residual_ss(&self, y: &[f64], beta: &[f64], v: Option<&[f64]>) -> f64 {
        y.iter()
            .enumerate()
            .map(|(i, &yi)| {
                let mut m = self.fixed_mean(i, beta);
                if let Some(v) = v {
                    m += v[self.groups[i]];
                }
                (yi - m) * (yi - m)
            })
            .sum()
    }

    /// Least-squares fit on the observed rows, used to start the chain.
    pub fn complete_case_fit(&self, data: &Dataset) -> Result<OutcomeState> {
        let rows: Vec<usize> = (0..data.n()).filter(|&i| data.observed()[i]).collect();
        if rows.is_empty() {
            return Err(Error::Unfittable("no observed responses".into()));
        }
        let p = self.x.ncols();
        let xo = DMatrix::from_fn(rows.len(), p, |r, j| self.x[(rows[r], j)]);
        let yo = DVector::from_iterator(rows.len(), rows.iter().map(|&i| data.y()[i]));
        let xtx = xo.transpose() * &xo;
        let xty = xo.transpose() * &yo;
        let beta = match xtx.clone().cholesky() {
            Some(ch) => ch.solve(&xty),
            None => {
                let mut ridge = xtx;
                for j in 0..p {
                    ridge[(j, j)] += self.priors.c_beta.max(1e-8);
                }
                ridge
                    .cholesky()
                    .ok_or_else(|| Error::Unfittable("complete-case design is degenerate".into()))?
                    .solve(&xty)
            }
        };
        let resid: Vec<f64> = rows
            .iter()
            .zip(yo.iter())
            .map(|(&i, &yi)| yi - self.fixed_mean(i, beta.as_slice()))
            .collect();
        let dof = (rows.len() as f64 - p as f64).max(1.0);
        let var = (resid.iter().map(|r| r * r).sum::<f64>() / dof).max(1e-8);
        let beta = beta.as_slice().to_vec();
        Ok(match self.kind {
            OutcomeKind::Linear => OutcomeState::Linear(LinRegState { beta, sigma2: var }),
            OutcomeKind::Mixed => {
                let g = self.n_groups();
                let mut sums = vec![0.0; g];
                let mut counts = vec![0usize; g];
                for (&i, &r) in rows.iter().zip(&resid) {
                    sums[self.groups[i]] += r;
                    counts[self.groups[i]] += 1;
                }
                let v: Vec<f64> = sums
                    .iter()
                    .zip(&counts)
                    .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
                    .collect();
                let tau2 = (v.iter().map(|x| x * x).sum::<f64>() / g.max(1) as f64).max(1e-3 * var);
                let within = rows
                    .iter()
                    .zip(&resid)
                    .map(|(&i, &r)| (r - v[self.groups[i]]).powi(2))
                    .sum::<f64>()
                    / dof;
                OutcomeState::Mixed(LmmState { beta, v, tau2, sigma2: within.max(1e-3 * var) })
            }
        })
    }
}

/// `IG(shape, rate)` via the reciprocal of a gamma draw.
pub fn draw_inverse_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    let g = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Numerical(format!("inverse gamma: {e}")))?;
    let draw = 1.0 / g.sample(rng);
    if !(draw > 0.0) || !draw.is_finite() {
        return Err(Error::Numerical(format!("inverse gamma draw {draw}")));
    }
    Ok(draw)
}
