//! Response-mechanism models and their full-conditional updates.
//!
//! The response probability is `ψ(u_i)` with
//! `u_i = w1_i'φ + w2_i'γ + c_i'β_c`, where `w1_i = (1, y_i, …, y_i^q)`,
//! `w2_i` holds the truncated powers `(y_i − κ_ℓ)_+^q`, and the covariate
//! term `c_i'β_c` is `z_i'δ` (linear and semiparametric kinds) or the
//! radial-basis row of `z_i` times `ξ` (nonparametric kind).
//!
//! Given Pólya-gamma auxiliaries `ω`, each coefficient block `β_B` with
//! design `X_B` and ridge precision `ρ_B` is Gaussian with precision
//! `X_B'ΩX_B + ρ_B I` and linear term `X_B'{s* − Ω o_B}`, where `o_B` is
//! the part of `u` contributed by the other blocks and `s*_i = s_i − 1/2`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::basis::{cluster_centers, rbf_design, KnotAnchors, RbfSpec, SplineBasisSpec};
use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::linalg::sample_mvn_precision;
use crate::pg::draw_pg1;

/// Which response model is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseKind {
    /// `ψ(φ0 + φ1 y + z'δ)`.
    Linear,
    /// `ψ(g(y) + z'δ)` with a penalized spline `g`.
    Semiparametric,
    /// `ψ(g(y) + h(z))` with `h` a Gaussian radial-basis expansion.
    Nonparametric,
}

impl std::str::FromStr for ResponseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" | "linear" => Ok(Self::Linear),
            "sr" | "semiparametric" => Ok(Self::Semiparametric),
            "nr" | "nonparametric" => Ok(Self::Nonparametric),
            other => Err(Error::Config(format!("unknown response model '{other}'"))),
        }
    }
}

impl ResponseKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Linear => "LR",
            Self::Semiparametric => "SR",
            Self::Nonparametric => "NR",
        }
    }
}

/// How the outer knots are widened beyond the 10%/90% quantiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KnotStrategy {
    /// Fixed expansion constants.
    Fixed { a: f64, b: f64 },
    /// One constant `a = b` sampled by random-walk Metropolis.
    AdaptiveShared,
    /// Separate `a` and `b`, each with its own Metropolis step.
    AdaptiveSeparate,
}

impl KnotStrategy {
    pub fn is_adaptive(&self) -> bool {
        !matches!(self, Self::Fixed { .. })
    }
}

/// Form of the gamma conditional used for the penalty precisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecisionConditional {
    /// `Ga(c + K/2, c + γ'γ/2)`: exact under `γ ~ N(0, λ⁻¹ I_K)`, `λ ~ Ga(c, c)`.
    Conjugate,
    /// `Ga(c + K, c + γ'γ)`.
    Doubled,
}

/// Response model configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseModelSpec {
    pub kind: ResponseKind,
    /// Spline degree `q` (forced to 1 for the linear kind).
    pub degree: usize,
    /// Knot count `K` (forced to 0 for the linear kind).
    pub n_knots: usize,
    /// Number of radial basis functions `R` (nonparametric kind).
    pub n_rbf: usize,
    /// Radial-basis scale `c_r`, shared by all centers.
    pub rbf_scale: f64,
    pub knot_strategy: KnotStrategy,
    /// Knots used verbatim instead of quantile placement.
    pub explicit_knots: Option<Vec<f64>>,
    /// Hold `φ` and `γ` at zero so the mechanism ignores `y` (MAR).
    pub ignore_y: bool,
    pub precision_conditional: PrecisionConditional,
}

impl ResponseModelSpec {
    pub fn linear() -> Self {
        Self {
            kind: ResponseKind::Linear,
            degree: 1,
            n_knots: 0,
            n_rbf: 0,
            rbf_scale: 1.0,
            knot_strategy: KnotStrategy::Fixed { a: 0.0, b: 0.0 },
            explicit_knots: None,
            ignore_y: false,
            precision_conditional: PrecisionConditional::Conjugate,
        }
    }

    pub fn semiparametric() -> Self {
        Self {
            kind: ResponseKind::Semiparametric,
            degree: crate::basis::DEFAULT_DEGREE,
            n_knots: crate::basis::DEFAULT_KNOTS,
            knot_strategy: KnotStrategy::AdaptiveShared,
            ..Self::linear()
        }
    }

    pub fn nonparametric() -> Self {
        Self {
            kind: ResponseKind::Nonparametric,
            n_rbf: crate::basis::DEFAULT_KNOTS,
            ..Self::semiparametric()
        }
    }

    pub fn for_kind(kind: ResponseKind) -> Self {
        match kind {
            ResponseKind::Linear => Self::linear(),
            ResponseKind::Semiparametric => Self::semiparametric(),
            ResponseKind::Nonparametric => Self::nonparametric(),
        }
    }

    pub fn effective_degree(&self) -> usize {
        match self.kind {
            ResponseKind::Linear => 1,
            _ => self.degree,
        }
    }

    pub fn effective_knots(&self) -> usize {
        match self.kind {
            ResponseKind::Linear => 0,
            _ => self.explicit_knots.as_ref().map_or(self.n_knots, Vec::len),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.kind != ResponseKind::Linear && self.degree < 1 && self.effective_knots() > 0 {
            return invalid("spline degree must be at least 1");
        }
        if self.kind == ResponseKind::Nonparametric && self.n_rbf < 1 {
            return invalid("nonparametric response model needs at least one radial basis");
        }
        if !(self.rbf_scale > 0.0) {
            return invalid("radial basis scale must be positive");
        }
        if let KnotStrategy::Fixed { a, b } = self.knot_strategy {
            if !(a >= 0.0 && b >= 0.0) {
                return invalid("fixed knot expansion constants must be non-negative");
            }
        }
        Ok(())
    }
}

/// Prior hyperparameters of the response model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorConfig {
    /// Precision of `φ ~ N(0, c_φ⁻¹ I)`.
    pub c_phi: f64,
    /// Precision of `δ ~ N(0, c_δ⁻¹ I)`.
    pub c_delta: f64,
    /// `λ ~ Ga(c_λ, c_λ)`.
    pub c_lambda: f64,
    /// `λ_ξ ~ Ga(c_ξ, c_ξ)`.
    pub c_xi: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self { c_phi: 1e-4, c_delta: 1e-4, c_lambda: 1.0, c_xi: 1.0 }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_phi", self.c_phi),
            ("c_delta", self.c_delta),
            ("c_lambda", self.c_lambda),
            ("c_xi", self.c_xi),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

/// Current values of all response-model quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseState {
    pub phi: Vec<f64>,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub xi: Vec<f64>,
    pub lambda: f64,
    pub lambda_xi: f64,
    pub omega: Vec<f64>,
    pub a_expand: f64,
    pub b_expand: f64,
}

/// Dense row-major matrix; rows are touched one at a time in the sweeps.
#[derive(Debug, Clone, PartialEq)]
struct Rows {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Rows {
    fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![0.0; nrows * ncols] }
    }

    fn from_matrix(m: &DMatrix<f64>) -> Self {
        let mut r = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                r.data[i * m.ncols() + j] = m[(i, j)];
            }
        }
        r
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    #[inline]
    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.nrows, self.ncols, &self.data)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Coefficient blocks of the response model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Phi,
    Gamma,
    Delta,
    Xi,
}

/// Acceptance bookkeeping for the knot-expansion Metropolis steps.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KnotMoveStats {
    pub proposed: usize,
    pub accepted: usize,
}

/// Response model bound to a dataset: the design rows for the current
/// completed responses and everything needed to update [`ResponseState`].
#[derive(Debug, Clone)]
pub struct ResponseModel {
    spec: ResponseModelSpec,
    priors: PriorConfig,
    spline: SplineBasisSpec,
    anchors: Option<KnotAnchors>,
    rbf: Option<RbfSpec>,
    w1: Rows,
    w2: Rows,
    cov: Rows,
    y_now: Vec<f64>,
    s_star: Vec<f64>,
}

impl ResponseModel {
    /// Build the design for `data`, with `y_complete` supplying values at the
    /// missing positions. Knot anchors come from the observed responses;
    /// radial-basis centers from k-means on the rows of `z`.
    pub fn new<R: Rng + ?Sized>(
        spec: ResponseModelSpec,
        priors: PriorConfig,
        data: &Dataset,
        y_complete: &[f64],
        a: f64,
        b: f64,
        rng: &mut R,
    ) -> Result<Self> {
        spec.validate()?;
        priors.validate()?;
        let n = data.n();
        if y_complete.len() != n {
            return invalid("completed response vector has wrong length");
        }
        let q = spec.effective_degree();
        let k = spec.effective_knots();

        let (spline, anchors) = match (&spec.explicit_knots, k) {
            (_, 0) => (SplineBasisSpec::polynomial(q), None),
            (Some(knots), _) => (SplineBasisSpec::new(q, knots.clone())?, None),
            (None, _) => {
                let anchors = KnotAnchors::from_observed(&data.observed_values())?;
                let knots = anchors.knots(k, a, b)?;
                (SplineBasisSpec::new(q, knots)?, Some(anchors))
            }
        };

        let (cov, rbf) = match spec.kind {
            ResponseKind::Nonparametric => {
                if data.z().ncols() == 0 {
                    return invalid("nonparametric response model needs z covariates");
                }
                let centers = cluster_centers(data.z(), spec.n_rbf.min(n.max(1)), rng)?;
                let rbf = RbfSpec::with_common_scale(centers, spec.rbf_scale)?;
                let design = rbf_design(data.z(), &rbf)?;
                (Rows::from_matrix(&design), Some(rbf))
            }
            _ => (Rows::from_matrix(data.z()), None),
        };

        let s_star = data.observed().iter().map(|&o| if o { 0.5 } else { -0.5 }).collect();
        let mut model = Self {
            spec,
            priors,
            w1: Rows::zeros(n, q + 1),
            w2: Rows::zeros(n, spline.n_knots()),
            spline,
            anchors,
            rbf,
            cov,
            y_now: y_complete.to_vec(),
            s_star,
        };
        for i in 0..n {
            model.refresh_row(i);
        }
        Ok(model)
    }

    /// Initial state: zero coefficients, unit precisions and auxiliaries.
    pub fn initial_state(&self, a: f64, b: f64) -> ResponseState {
        let n = self.y_now.len();
        let (n_delta, n_xi) = match self.spec.kind {
            ResponseKind::Nonparametric => (0, self.cov.ncols),
            _ => (self.cov.ncols, 0),
        };
        ResponseState {
            phi: vec![0.0; self.spline.degree() + 1],
            gamma: vec![0.0; self.spline.n_knots()],
            delta: vec![0.0; n_delta],
            xi: vec![0.0; n_xi],
            lambda: 1.0,
            lambda_xi: 1.0,
            omega: vec![1.0; n],
            a_expand: a,
            b_expand: b,
        }
    }

    pub fn spec(&self) -> &ResponseModelSpec {
        &self.spec
    }

    pub fn priors(&self) -> &PriorConfig {
        &self.priors
    }

    pub fn spline(&self) -> &SplineBasisSpec {
        &self.spline
    }

    pub fn anchors(&self) -> Option<KnotAnchors> {
        self.anchors
    }

    pub fn rbf(&self) -> Option<&RbfSpec> {
        self.rbf.as_ref()
    }

    pub fn n(&self) -> usize {
        self.y_now.len()
    }

    /// `W1` as a matrix.
    pub fn w1(&self) -> DMatrix<f64> {
        self.w1.to_matrix()
    }

    /// `W2` as a matrix.
    pub fn w2(&self) -> DMatrix<f64> {
        self.w2.to_matrix()
    }

    /// `Z` (linear covariate term) or `Z_Φ` (radial basis) as a matrix.
    pub fn covariate_design(&self) -> DMatrix<f64> {
        self.cov.to_matrix()
    }

    /// `(s_i − 1/2)` for each row.
    pub fn s_star(&self) -> &[f64] {
        &self.s_star
    }

    pub fn completed_responses(&self) -> &[f64] {
        &self.y_now
    }

    /// Set the completed response at row `i` and rebuild its basis row.
    pub fn set_response(&mut self, i: usize, y: f64) {
        self.y_now[i] = y;
        self.refresh_row(i);
    }

    /// Replace responses and mask, e.g. when data are regenerated.
    pub fn reset_responses(&mut self, y_complete: &[f64], observed: &[bool]) {
        self.y_now.copy_from_slice(y_complete);
        for (s, &o) in self.s_star.iter_mut().zip(observed) {
            *s = if o { 0.5 } else { -0.5 };
        }
        for i in 0..self.n() {
            self.refresh_row(i);
        }
    }

    fn refresh_row(&mut self, i: usize) {
        let y = self.y_now[i];
        let (w1, w2) = (self.w1.row_mut(i), self.w2.row_mut(i));
        self.spline.fill(y, w1, w2);
    }

    #[inline]
    fn covariate_coefs<'a>(&self, state: &'a ResponseState) -> &'a [f64] {
        match self.spec.kind {
            ResponseKind::Nonparametric => &state.xi,
            _ => &state.delta,
        }
    }

    /// Covariate contribution `z_i'δ` or `Z_Φ,i ξ` for row `i`.
    #[inline]
    pub fn covariate_term(&self, i: usize, state: &ResponseState) -> f64 {
        dot(self.cov.row(i), self.covariate_coefs(state))
    }

    /// `u_i` at the current completed response.
    #[inline]
    pub fn predictor(&self, i: usize, state: &ResponseState) -> f64 {
        dot(self.w1.row(i), &state.phi) + dot(self.w2.row(i), &state.gamma) + self.covariate_term(i, state)
    }

    /// `u_i(y)` and `du_i/dy` at a candidate response value.
    #[inline]
    pub fn predictor_at(&self, i: usize, y: f64, state: &ResponseState) -> (f64, f64) {
        let (g, dg) = self.spline.eval_with_derivative(y, &state.phi, &state.gamma);
        (g + self.covariate_term(i, state), dg)
    }

    /// All `u_i`.
    pub fn predictors(&self, state: &ResponseState) -> Vec<f64> {
        (0..self.n()).map(|i| self.predictor(i, state)).collect()
    }

    /// `ω_i ~ PG(1, u_i)` independently.
    pub fn update_omega<R: Rng + ?Sized>(&self, state: &mut ResponseState, rng: &mut R) -> Result<()> {
        for i in 0..self.n() {
            let u = self.predictor(i, state);
            if !u.is_finite() {
                return Err(Error::Numerical(format!("non-finite linear predictor at row {i}")));
            }
            state.omega[i] = draw_pg1(u, rng);
        }
        Ok(())
    }

    fn block_rows(&self, block: Block) -> &Rows {
        match block {
            Block::Phi => &self.w1,
            Block::Gamma => &self.w2,
            Block::Delta | Block::Xi => &self.cov,
        }
    }

    fn block_ridge(&self, block: Block, state: &ResponseState) -> f64 {
        match block {
            Block::Phi => self.priors.c_phi,
            Block::Gamma => state.lambda,
            Block::Delta => self.priors.c_delta,
            Block::Xi => state.lambda_xi,
        }
    }

    fn block_coefs<'a>(block: Block, state: &'a ResponseState) -> &'a [f64] {
        match block {
            Block::Phi => &state.phi,
            Block::Gamma => &state.gamma,
            Block::Delta => &state.delta,
            Block::Xi => &state.xi,
        }
    }

    /// Precision `X_B'ΩX_B + ρ_B I` and linear term `X_B'{s* − Ω o_B}` of
    /// the Gaussian full conditional of `block`.
    pub fn block_conditional(&self, block: Block, state: &ResponseState) -> (DMatrix<f64>, DVector<f64>) {
        let rows = self.block_rows(block);
        let own = Self::block_coefs(block, state);
        let p = rows.ncols;
        let mut prec = vec![0.0; p * p];
        let mut rhs = vec![0.0; p];
        for i in 0..self.n() {
            let x = rows.row(i);
            let w = state.omega[i];
            let offset = self.predictor(i, state) - dot(x, own);
            let resid = self.s_star[i] - w * offset;
            for j in 0..p {
                rhs[j] += x[j] * resid;
                let wx = w * x[j];
                for k in 0..=j {
                    prec[j * p + k] += wx * x[k];
                }
            }
        }
        let ridge = self.block_ridge(block, state);
        let mut m = DMatrix::zeros(p, p);
        for j in 0..p {
            for k in 0..=j {
                m[(j, k)] = prec[j * p + k];
                m[(k, j)] = prec[j * p + k];
            }
            m[(j, j)] += ridge;
        }
        (m, DVector::from_vec(rhs))
    }

    fn draw_block<R: Rng + ?Sized>(&self, block: Block, state: &mut ResponseState, rng: &mut R) -> Result<()> {
        if self.block_rows(block).ncols == 0 {
            return Ok(());
        }
        let (prec, rhs) = self.block_conditional(block, state);
        let draw = sample_mvn_precision(prec, &rhs, rng)?;
        let target = match block {
            Block::Phi => &mut state.phi,
            Block::Gamma => &mut state.gamma,
            Block::Delta => &mut state.delta,
            Block::Xi => &mut state.xi,
        };
        target.copy_from_slice(draw.as_slice());
        Ok(())
    }

    /// `φ ~ N(A_φ m_φ, A_φ)`; a no-op when `y` is ignored.
    pub fn update_phi<R: Rng + ?Sized>(&self, state: &mut ResponseState, rng: &mut R) -> Result<()> {
        if self.spec.ignore_y {
            return Ok(());
        }
        self.draw_block(Block::Phi, state, rng)
    }

    /// `γ ~ N(A_γ m_γ, A_γ)`.
    pub fn update_gamma<R: Rng + ?Sized>(&self, state: &mut ResponseState, rng: &mut R) -> Result<()> {
        if self.spec.ignore_y {
            return Ok(());
        }
        self.draw_block(Block::Gamma, state, rng)
    }

    /// `δ ~ N(A_δ m_δ, A_δ)` (linear covariate term only).
    pub fn update_delta<R: Rng + ?Sized>(&self, state: &mut ResponseState, rng: &mut R) -> Result<()> {
        if self.spec.kind == ResponseKind::Nonparametric {
            return Ok(());
        }
        self.draw_block(Block::Delta, state, rng)
    }

    /// `ξ ~ N(A_ξ m_ξ, A_ξ)` (radial-basis term only).
    pub fn update_xi<R: Rng + ?Sized>(&self, state: &mut ResponseState, rng: &mut R) -> Result<()> {
        if self.spec.kind != ResponseKind::Nonparametric {
            return Ok(());
        }
        self.draw_block(Block::Xi, state, rng)
    }

    /// Spline penalty precision `λ`.
    pub fn update_lambda<R: Rng + ?Sized>(&self, state: &mut ResponseState, rng: &mut R) -> Result<()> {
        if state.gamma.is_empty() || self.spec.ignore_y {
            return Ok(());
        }
        let ss = dot(&state.gamma, &state.gamma);
        state.lambda = draw_penalty_precision(
            self.priors.c_lambda,
            state.gamma.len(),
            ss,
            self.spec.precision_conditional,
            rng,
        )?;
        Ok(())
    }

    /// Radial-basis penalty precision `λ_ξ`.
    pub fn update_lambda_xi<R: Rng + ?Sized>(&self, state: &mut ResponseState, rng: &mut R) -> Result<()> {
        if state.xi.is_empty() {
            return Ok(());
        }
        let ss = dot(&state.xi, &state.xi);
        state.lambda_xi =
            draw_penalty_precision(self.priors.c_xi, state.xi.len(), ss, self.spec.precision_conditional, rng)?;
        Ok(())
    }

    /// `log h` for expansion constants `(a, b)`: the `Ga(1, 1)` prior on each
    /// sampled constant plus `Σ_i (s_i − 1/2)u_i − ω_i u_i²/2`, with `u`
    /// evaluated on knots rebuilt from `(a, b)`. `-∞` outside `a, b > 0`.
    pub fn knot_log_target(&self, a: f64, b: f64, state: &ResponseState) -> f64 {
        if !(a > 0.0 && b > 0.0) {
            return f64::NEG_INFINITY;
        }
        let Some(anchors) = self.anchors else {
            return 0.0;
        };
        let Ok(knots) = anchors.knots(self.spline.n_knots(), a, b) else {
            return f64::NEG_INFINITY;
        };
        let log_prior = match self.spec.knot_strategy {
            KnotStrategy::AdaptiveSeparate => -a - b,
            _ => -a,
        };
        let q = self.spline.degree();
        let mut total = log_prior;
        for i in 0..self.n() {
            let y = self.y_now[i];
            let mut spline_part = 0.0;
            for (&k, &g) in knots.iter().zip(&state.gamma) {
                if y > k {
                    spline_part += g * (y - k).powi(q as i32);
                }
            }
            let u = dot(self.w1.row(i), &state.phi) + spline_part + self.covariate_term(i, state);
            total += self.s_star[i] * u - 0.5 * state.omega[i] * u * u;
        }
        total
    }

    /// One random-walk Metropolis step per sampled expansion constant.
    /// Rebuilds knots and `W2` on acceptance.
    pub fn update_knot_expansion<R: Rng + ?Sized>(
        &mut self,
        state: &mut ResponseState,
        rw_sd: f64,
        rng: &mut R,
    ) -> Result<KnotMoveStats> {
        let mut stats = KnotMoveStats::default();
        if self.anchors.is_none() || !self.spec.knot_strategy.is_adaptive() || self.spec.ignore_y {
            return Ok(stats);
        }
        if !(rw_sd > 0.0) {
            return invalid("random-walk standard deviation must be positive");
        }
        let coords: &[bool] = match self.spec.knot_strategy {
            KnotStrategy::AdaptiveSeparate => &[true, false],
            _ => &[true],
        };
        for &is_a in coords {
            let step = rw_sd * rng.sample::<f64, _>(StandardNormal);
            let (a_new, b_new) = match (self.spec.knot_strategy, is_a) {
                (KnotStrategy::AdaptiveShared, _) => (state.a_expand + step, state.a_expand + step),
                (_, true) => (state.a_expand + step, state.b_expand),
                (_, false) => (state.a_expand, state.b_expand + step),
            };
            stats.proposed += 1;
            if !(a_new > 0.0 && b_new > 0.0) {
                continue;
            }
            let current = self.knot_log_target(state.a_expand, state.b_expand, state);
            let proposed = self.knot_log_target(a_new, b_new, state);
            if metropolis_accept(proposed - current, rng) {
                state.a_expand = a_new;
                state.b_expand = b_new;
                self.set_expansion(a_new, b_new)?;
                stats.accepted += 1;
            }
        }
        Ok(stats)
    }

    /// Rebuild knots and `W2` for expansion constants `(a, b)`.
    pub fn set_expansion(&mut self, a: f64, b: f64) -> Result<()> {
        if let Some(anchors) = self.anchors {
            let knots = anchors.knots(self.spline.n_knots(), a, b)?;
            self.spline.set_knots(knots)?;
            for i in 0..self.n() {
                self.refresh_row(i);
            }
        }
        Ok(())
    }

    /// `Σ_i s_i log ψ(u_i) + (1 − s_i) log{1 − ψ(u_i)}` at the current
    /// completed responses. Probabilities are floored at `1e-300`.
    pub fn log_likelihood(&self, state: &ResponseState) -> f64 {
        (0..self.n())
            .map(|i| {
                let u = self.predictor(i, state);
                let p = crate::logistic(if self.s_star[i] > 0.0 { u } else { -u });
                p.max(1e-300).ln()
            })
            .sum()
    }
}

/// Stand-alone linear predictor for a single record: `w1'φ + w2'γ + c'β_c`.
pub fn linear_predictor(
    y: f64,
    covariate_row: &[f64],
    covariate_coefs: &[f64],
    phi: &[f64],
    gamma: &[f64],
    spline: &SplineBasisSpec,
) -> Result<f64> {
    if phi.len() != spline.degree() + 1 || gamma.len() != spline.n_knots() {
        return invalid("coefficient lengths do not match the spline");
    }
    if covariate_row.len() != covariate_coefs.len() {
        return invalid("covariate row and coefficients differ in length");
    }
    let (g, _) = spline.eval_with_derivative(y, phi, gamma);
    Ok(g + dot(covariate_row, covariate_coefs))
}

/// Gamma draw for a ridge precision given `dim` coefficients with sum of
/// squares `ss` and prior `Ga(c, c)` (shape, rate).
pub fn draw_penalty_precision<R: Rng + ?Sized>(
    c: f64,
    dim: usize,
    ss: f64,
    form: PrecisionConditional,
    rng: &mut R,
) -> Result<f64> {
    let (shape, rate) = penalty_precision_params(c, dim, ss, form);
    let g = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Numerical(format!("gamma conditional: {e}")))?;
    let draw = g.sample(rng);
    Ok(draw.max(f64::MIN_POSITIVE))
}

/// `(shape, rate)` of the penalty-precision conditional.
pub fn penalty_precision_params(c: f64, dim: usize, ss: f64, form: PrecisionConditional) -> (f64, f64) {
    match form {
        PrecisionConditional::Conjugate => (c + 0.5 * dim as f64, c + 0.5 * ss),
        PrecisionConditional::Doubled => (c + dim as f64, c + ss),
    }
}

/// Metropolis accept given a log acceptance ratio.
#[inline]
pub(crate) fn metropolis_accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio.is_nan() {
        return false;
    }
    log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
}
