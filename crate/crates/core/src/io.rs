//! CSV ingestion, run configuration and result files.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::data::{arm_time_polynomial, lagged_response_indicator, Dataset};
use crate::error::{Error, Result};
use crate::eval::{dic_from_logliks, posterior_summary, summarize_values, MetricsRow, RepEstimate, SimulatedData, SummaryRow};
use crate::mcmc::{Chain, Draws, McmcConfig, ModelSpec};
use crate::outcome::{OutcomeKind, OutcomePriors};
use crate::response::{KnotStrategy, PrecisionConditional, PriorConfig, ResponseKind, ResponseModelSpec};

/// Cell markers treated as a missing response.
pub const MISSING_MARKERS: [&str; 2] = ["", "NA"];

/// How the outcome design is built from the columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeDesign {
    /// Intercept plus the `z` and instrument columns.
    Columns,
    /// Per-arm polynomial in time (needs `arm` and `time`).
    ArmTimePolynomial,
}

/// Which columns play which role.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnRoles {
    pub response: String,
    /// Covariates entering both the outcome and the response model.
    pub z: Vec<String>,
    /// Covariates entering the outcome model only.
    pub instruments: Vec<String>,
    pub group: Option<String>,
    pub time: Option<String>,
    pub arm: Option<String>,
    pub outcome_design: OutcomeDesign,
    pub time_degree: usize,
    /// Append the previous-visit response indicator to `z`.
    pub lag_indicator: bool,
}

impl Default for ColumnRoles {
    fn default() -> Self {
        Self {
            response: "y".into(),
            z: Vec::new(),
            instruments: Vec::new(),
            group: None,
            time: None,
            arm: None,
            outcome_design: OutcomeDesign::Columns,
            time_degree: 3,
            lag_indicator: false,
        }
    }
}

impl ColumnRoles {
    pub fn validate(&self) -> Result<()> {
        if self.response.is_empty() {
            return Err(Error::Config("response column must be named".into()));
        }
        let z: HashSet<&String> = self.z.iter().collect();
        if let Some(c) = self.instruments.iter().find(|c| z.contains(c)) {
            return Err(Error::Config(format!("column '{c}' is both a z column and an instrument")));
        }
        if self.lag_indicator && (self.group.is_none() || self.time.is_none()) {
            return Err(Error::Config("lag_indicator needs group and time columns".into()));
        }
        if self.outcome_design == OutcomeDesign::ArmTimePolynomial && (self.arm.is_none() || self.time.is_none()) {
            return Err(Error::Config("arm_time_poly design needs arm and time columns".into()));
        }
        Ok(())
    }
}

/// A parsed CSV: header names and raw cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let headers = reader.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in reader.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        Ok(Self { headers, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("column '{name}' not found")))
    }

    /// A complete numeric column. Row numbers in errors count the header
    /// line as row 1.
    pub fn numeric(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let cell = row[j].as_str();
                if MISSING_MARKERS.contains(&cell) {
                    return Err(ingest(r, name, "missing covariate value".into()));
                }
                parse_cell(cell).map_err(|m| ingest(r, name, m))
            })
            .collect()
    }

    /// A numeric column in which missing markers become `None`.
    pub fn numeric_with_missing(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let j = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let cell = row[j].as_str();
                if MISSING_MARKERS.contains(&cell) {
                    Ok(None)
                } else {
                    parse_cell(cell).map(Some).map_err(|m| ingest(r, name, m))
                }
            })
            .collect()
    }
}

fn ingest(r: usize, column: &str, message: String) -> Error {
    Error::Ingest { row: r + 2, column: column.to_string(), message }
}

fn parse_cell(cell: &str) -> std::result::Result<f64, String> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(format!("non-finite value {v}")),
        Err(_) => Err(format!("cannot parse '{cell}' as a number")),
    }
}

/// Read a CSV file into a [`Dataset`] according to `roles`.
pub fn load_csv(path: &Path, roles: &ColumnRoles) -> Result<Dataset> {
    roles.validate()?;
    let table = Table::read(path)?;
    dataset_from_table(&table, roles)
}

pub fn dataset_from_table(table: &Table, roles: &ColumnRoles) -> Result<Dataset> {
    let n = table.rows.len();
    let response = table.numeric_with_missing(&roles.response)?;
    let observed: Vec<bool> = response.iter().map(Option::is_some).collect();
    let y: Vec<f64> = response.iter().map(|v| v.unwrap_or(f64::NAN)).collect();

    let read_all = |names: &[String]| -> Result<Vec<Vec<f64>>> { names.iter().map(|c| table.numeric(c)).collect() };
    let z_cols = read_all(&roles.z)?;
    let inst_cols = read_all(&roles.instruments)?;
    let time = roles.time.as_deref().map(|c| table.numeric(c)).transpose()?;
    let groups = roles.group.as_deref().map(|c| group_labels(table, c)).transpose()?;

    let mut z_names = roles.z.clone();
    let mut z_all = z_cols.clone();
    if roles.lag_indicator {
        let (g, t) = (groups.as_ref().expect("validated"), time.as_ref().expect("validated"));
        z_all.push(lagged_response_indicator(g, t, &observed));
        z_names.push("lag_observed".into());
    }
    let z = columns_to_matrix(n, &z_all);

    let (x, x_names) = match roles.outcome_design {
        OutcomeDesign::Columns => {
            let mut cols = vec![vec![1.0; n]];
            cols.extend(z_cols.iter().cloned());
            cols.extend(inst_cols.iter().cloned());
            let mut names = vec!["intercept".to_string()];
            names.extend(roles.z.iter().cloned());
            names.extend(roles.instruments.iter().cloned());
            (columns_to_matrix(n, &cols), names)
        }
        OutcomeDesign::ArmTimePolynomial => {
            let arm = table.numeric(roles.arm.as_deref().expect("validated"))?;
            arm_time_polynomial(&arm, time.as_ref().expect("validated"), roles.time_degree)
        }
    };

    let mut data = Dataset::new(y, observed, x, z)?.with_names(x_names, z_names)?;
    if let Some(g) = groups {
        data = data.with_groups(g)?;
    }
    Ok(data)
}

fn columns_to_matrix(n: usize, cols: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Map arbitrary subject identifiers to `0..G` in order of appearance.
fn group_labels(table: &Table, name: &str) -> Result<Vec<usize>> {
    let j = table.column_index(name)?;
    let mut map: BTreeMap<&str, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for (r, row) in table.rows.iter().enumerate() {
        let id = row[j].as_str();
        if MISSING_MARKERS.contains(&id) {
            return Err(ingest(r, name, "missing group label".into()));
        }
        let next = map.len();
        out.push(*map.entry(id).or_insert(next));
    }
    Ok(out)
}

/// Everything needed for a `fit` run. Keys of the configuration file are
/// the field names listed in [`RunConfig::set`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub roles: ColumnRoles,
    pub response: ResponseModelSpec,
    pub response_priors: PriorConfig,
    pub outcome: OutcomeKind,
    pub outcome_priors: OutcomePriors,
    pub mcmc: McmcConfig,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            roles: ColumnRoles::default(),
            response: ResponseModelSpec::semiparametric(),
            response_priors: PriorConfig::default(),
            outcome: OutcomeKind::Linear,
            outcome_priors: OutcomePriors::default(),
            mcmc: McmcConfig::default(),
            output: PathBuf::from("fit_output"),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean '{value}' for '{key}'"))),
    }
}

fn parse_list(value: &str) -> Vec<String> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

impl RunConfig {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", k + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Set one field by key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let r = &mut self.response;
        match key {
            "data" => self.data = Some(PathBuf::from(value)),
            "output" => self.output = PathBuf::from(value),
            "response" => self.roles.response = value.to_string(),
            "z" => self.roles.z = parse_list(value),
            "instruments" => self.roles.instruments = parse_list(value),
            "group" => self.roles.group = Some(value.to_string()),
            "time" => self.roles.time = Some(value.to_string()),
            "arm" => self.roles.arm = Some(value.to_string()),
            "time_degree" => self.roles.time_degree = parse_value(key, value)?,
            "lag_indicator" => self.roles.lag_indicator = parse_bool(key, value)?,
            "outcome_design" => {
                self.roles.outcome_design = match value {
                    "columns" => OutcomeDesign::Columns,
                    "arm_time_poly" => OutcomeDesign::ArmTimePolynomial,
                    _ => return Err(Error::Config(format!("unknown outcome_design '{value}'"))),
                }
            }
            "model" => {
                let kind: ResponseKind = value.parse()?;
                let keep = (r.degree, r.n_knots, r.n_rbf, r.rbf_scale, r.knot_strategy);
                *r = ResponseModelSpec::for_kind(kind);
                if kind != ResponseKind::Linear {
                    (r.degree, r.n_knots, r.n_rbf, r.rbf_scale, r.knot_strategy) = keep;
                }
            }
            "degree" => r.degree = parse_value(key, value)?,
            "knots" => r.n_knots = parse_value(key, value)?,
            "rbf" => r.n_rbf = parse_value(key, value)?,
            "rbf_scale" => r.rbf_scale = parse_value(key, value)?,
            "knot_positions" => {
                let knots: Result<Vec<f64>> = parse_list(value).iter().map(|v| parse_value(key, v)).collect();
                r.explicit_knots = Some(knots?);
            }
            "adaptive_knots" => {
                r.knot_strategy = match value {
                    "off" => KnotStrategy::Fixed { a: 0.5, b: 0.5 },
                    "a" => KnotStrategy::AdaptiveShared,
                    "ab" => KnotStrategy::AdaptiveSeparate,
                    _ => return Err(Error::Config(format!("adaptive_knots must be off, a or ab, got '{value}'"))),
                }
            }
            "knot_a" | "knot_b" => {
                let v: f64 = parse_value(key, value)?;
                let (mut a, mut b) = match r.knot_strategy {
                    KnotStrategy::Fixed { a, b } => (a, b),
                    _ => (0.5, 0.5),
                };
                if key == "knot_a" {
                    a = v;
                } else {
                    b = v;
                }
                r.knot_strategy = KnotStrategy::Fixed { a, b };
            }
            "ignore_y" => r.ignore_y = parse_bool(key, value)?,
            "lambda_conditional" => {
                r.precision_conditional = match value {
                    "conjugate" => PrecisionConditional::Conjugate,
                    "doubled" => PrecisionConditional::Doubled,
                    _ => return Err(Error::Config(format!("unknown lambda_conditional '{value}'"))),
                }
            }
            "outcome" => self.outcome = value.parse()?,
            "c_beta" => self.outcome_priors.c_beta = parse_value(key, value)?,
            "c_sigma" => self.outcome_priors.c_sigma = parse_value(key, value)?,
            "c_tau" => self.outcome_priors.c_tau = parse_value(key, value)?,
            "c_phi" => self.response_priors.c_phi = parse_value(key, value)?,
            "c_delta" => self.response_priors.c_delta = parse_value(key, value)?,
            "c_lambda" => self.response_priors.c_lambda = parse_value(key, value)?,
            "c_xi" => self.response_priors.c_xi = parse_value(key, value)?,
            "burn" => self.mcmc.n_burn = parse_value(key, value)?,
            "keep" => self.mcmc.n_keep = parse_value(key, value)?,
            "thin" => self.mcmc.thin = parse_value(key, value)?,
            "step_size" => self.mcmc.mala_step = parse_value(key, value)?,
            "rw_sd" => self.mcmc.rw_sd = parse_value(key, value)?,
            "seed" => self.mcmc.seed = parse_value(key, value)?,
            "adapt_mala" => self.mcmc.adapt_mala = parse_bool(key, value)?,
            "store_imputed" => self.mcmc.store_imputed = parse_bool(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            response: self.response.clone(),
            response_priors: self.response_priors,
            outcome: self.outcome,
            outcome_priors: self.outcome_priors,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.roles.validate()?;
        self.mcmc.validate()?;
        if self.outcome == OutcomeKind::Mixed && self.roles.group.is_none() {
            return Err(Error::Config("the mixed outcome model needs a group column".into()));
        }
        Ok(())
    }
}

/// Result of a `fit` run.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub n: usize,
    pub n_missing: usize,
    pub draws: Draws,
    pub dic: f64,
}

/// Load data, run the chain and write all result files to `cfg.output`.
pub fn run_fit(cfg: &RunConfig) -> Result<FitReport> {
    cfg.validate()?;
    let path = cfg.data.as_deref().ok_or_else(|| Error::Config("no data file given".into()))?;
    let data = load_csv(path, &cfg.roles)?;
    let (n, n_missing) = (data.n(), data.n_missing());
    let mut chain = Chain::initialize(data, cfg.model_spec(), cfg.mcmc.clone())?;
    let draws = chain.run()?;
    fs::create_dir_all(&cfg.output)?;
    write_draws(&cfg.output.join("draws.csv"), &draws)?;
    write_summary(&cfg.output.join("summary.csv"), &posterior_summary(&draws, &[])?)?;
    let dic = write_fit_info(&cfg.output.join("fit_info.csv"), n, n_missing, &draws)?;
    write_latent_means(&cfg.output, &draws)?;
    if let Some(imp) = &draws.imputed {
        write_imputed(&cfg.output.join("imputed.csv"), &draws.missing, imp)?;
    }
    Ok(FitReport { n, n_missing, draws, dic })
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        format!("{v}")
    }
}

/// One row per kept draw: parameters, observed-data and complete-data
/// log-likelihoods, `mu` and acceptance rates.
pub fn write_draws(path: &Path, draws: &Draws) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["iter".to_string()];
    header.extend(draws.layout.names.iter().cloned());
    header.extend(["loglik", "complete_loglik", "mu", "mala_acceptance", "knot_acceptance"].map(String::from));
    w.write_record(&header)?;
    for (t, p) in draws.params.iter().enumerate() {
        let mut rec = vec![(t + 1).to_string()];
        rec.extend(p.iter().map(|&v| fmt(v)));
        rec.extend([draws.observed_loglik[t], draws.loglik[t], draws.mu[t], draws.mala_rate[t], draws.knot_rate[t]].map(fmt));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["parameter", "mean", "sd", "q2.5", "q50", "q97.5"])?;
    for r in rows {
        w.write_record([r.name.clone(), fmt(r.mean), fmt(r.sd), fmt(r.q025), fmt(r.q50), fmt(r.q975)])?;
    }
    w.flush()?;
    Ok(())
}

/// Chain-level facts as `key,value` rows; returns the DIC.
pub fn write_fit_info(path: &Path, n: usize, n_missing: usize, draws: &Draws) -> Result<f64> {
    let dic = dic_from_logliks(&draws.observed_loglik, draws.observed_plugin_loglik)?;
    let d_bar = -2.0 * crate::stats::mean(&draws.observed_loglik);
    let d_hat = -2.0 * draws.observed_plugin_loglik;
    let complete_dic = dic_from_logliks(&draws.loglik, draws.plugin_loglik)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["key", "value"])?;
    for (k, v) in [
        ("n", n as f64),
        ("n_missing", n_missing as f64),
        ("n_draws", draws.n_draws() as f64),
        ("mala_acceptance", draws.mala_acceptance),
        ("knot_acceptance", draws.knot_acceptance),
        ("mean_step", draws.mean_step),
        ("d_bar", d_bar),
        ("d_hat", d_hat),
        ("p_d", d_bar - d_hat),
        ("dic", dic),
        ("complete_data_dic", complete_dic),
    ] {
        w.write_record([k.to_string(), fmt(v)])?;
    }
    w.flush()?;
    Ok(dic)
}

/// Posterior means of the missing responses (and random intercepts).
pub fn write_latent_means(dir: &Path, draws: &Draws) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join("imputed_means.csv"))?;
    w.write_record(["row", "posterior_mean"])?;
    for (&i, &m) in draws.missing.iter().zip(&draws.imputed_mean) {
        w.write_record([(i + 1).to_string(), fmt(m)])?;
    }
    w.flush()?;
    if let Some(v) = &draws.random_effect_mean {
        let mut w = csv::Writer::from_path(dir.join("random_effects.csv"))?;
        w.write_record(["subject", "posterior_mean"])?;
        for (g, &m) in v.iter().enumerate() {
            w.write_record([g.to_string(), fmt(m)])?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Every kept draw of every missing response; columns are data rows
/// (1-based).
pub fn write_imputed(path: &Path, missing: &[usize], imputed: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["iter".to_string()];
    header.extend(missing.iter().map(|i| format!("row_{}", i + 1)));
    w.write_record(&header)?;
    for (t, row) in imputed.iter().enumerate() {
        let mut rec = vec![(t + 1).to_string()];
        rec.extend(row.iter().map(|&v| fmt(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Scenario data with `y` blank where unobserved, plus the covariates, the
/// response indicator and the unmasked response.
pub fn write_simulated(path: &Path, sim: &SimulatedData) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["y", "x1", "x2", "s", "y_full", "pi"])?;
    let d = &sim.dataset;
    for i in 0..d.n() {
        let obs = d.observed()[i];
        w.write_record([
            if obs { fmt(sim.y_full[i]) } else { String::new() },
            fmt(sim.x1[i]),
            fmt(sim.x2[i]),
            u8::from(obs).to_string(),
            fmt(sim.y_full[i]),
            fmt(sim.pi[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Roles matching [`write_simulated`] output with `z = x1`.
pub fn simulated_roles() -> ColumnRoles {
    ColumnRoles { response: "y".into(), z: vec!["x1".into()], instruments: vec!["x2".into()], ..Default::default() }
}

pub const METRICS_HEADER: [&str; 19] = [
    "method", "scenario", "n", "reps", "failed", "mu_rmse", "mu_bias", "mu_cp", "mu_al", "b1_rmse", "b1_bias",
    "b1_cp", "b1_al", "b2_rmse", "b2_bias", "b2_cp", "b2_al", "dic", "scale",
];

/// Metrics table; every accuracy column is multiplied by 100.
pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        let mut rec = vec![r.method.label().to_string(), r.scenario.to_string(), r.n.to_string()];
        rec.push(r.reps.to_string());
        rec.push(r.failed.to_string());
        for v in [
            r.mu_rmse, r.mu_bias, r.mu_cp, r.mu_al, r.b1_rmse, r.b1_bias, r.b1_cp, r.b1_al, r.b2_rmse, r.b2_bias,
            r.b2_cp, r.b2_al, r.dic,
        ] {
            rec.push(fmt(v));
        }
        rec.push("x100".into());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-replication estimates, one row per method and replication.
pub fn write_replications(path: &Path, estimates: &[RepEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "method", "scenario", "n", "rep", "mu", "mu_lower", "mu_upper", "b1", "b1_lower", "b1_upper", "b2",
        "b2_lower", "b2_upper", "dic", "error",
    ])?;
    for e in estimates {
        let mut rec = vec![e.method.label().to_string(), e.scenario.to_string(), e.n.to_string(), e.rep.to_string()];
        match &e.result {
            Ok(m) => {
                for i in [m.mu, m.beta1, m.beta2] {
                    rec.extend([fmt(i.estimate), fmt(i.lower), fmt(i.upper)]);
                }
                rec.push(m.dic.map_or("NA".into(), fmt));
                rec.push(String::new());
            }
            Err(msg) => {
                rec.extend(std::iter::repeat_n("NA".to_string(), 10));
                rec.push(msg.clone());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Summaries and DIC recomputed from a `fit` output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSummary {
    pub rows: Vec<SummaryRow>,
    pub n_draws: usize,
    pub dic: f64,
}

pub fn summarize_fit_dir(dir: &Path, targets: &[String]) -> Result<FitSummary> {
    let table = Table::read(&dir.join("draws.csv"))?;
    if table.rows.is_empty() {
        return Err(Error::InvalidArgument("draws file has no rows".into()));
    }
    let skip = ["iter", "loglik", "complete_loglik", "mala_acceptance", "knot_acceptance"];
    let names: Vec<String> = if targets.is_empty() {
        table.headers.iter().filter(|h| !skip.contains(&h.as_str())).cloned().collect()
    } else {
        targets.to_vec()
    };
    let mut rows = Vec::with_capacity(names.len());
    for name in &names {
        let values: Vec<f64> = table.numeric_with_missing(name)?.into_iter().flatten().collect();
        rows.push(summarize_values(name, &values)?);
    }
    let loglik = table.numeric("loglik")?;
    let info = Table::read(&dir.join("fit_info.csv"))?;
    let d_hat = info
        .rows
        .iter()
        .find(|r| r[0] == "d_hat")
        .and_then(|r| r[1].parse::<f64>().ok())
        .ok_or_else(|| Error::Config("fit_info.csv lacks d_hat".into()))?;
    let dic = dic_from_logliks(&loglik, -0.5 * d_hat)?;
    Ok(FitSummary { rows, n_draws: table.rows.len(), dic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn roles() -> ColumnRoles {
        ColumnRoles { z: vec!["x".into()], ..Default::default() }
    }

    #[test]
    fn empty_cell_is_missing() {
        let f = write_tmp("y,x\n1.0,0.5\n,1.5\n2.0,NA2\n");
        assert!(matches!(load_csv(f.path(), &roles()), Err(Error::Ingest { row: 4, .. })));
        let f = write_tmp("y,x\n1.0,0.5\n,1.5\nNA,2\n");
        let d = load_csv(f.path(), &roles()).unwrap();
        assert_eq!((d.n(), d.n_missing()), (3, 2));
        assert_eq!(d.x_names(), &["intercept".to_string(), "x".into()]);
    }

    #[test]
    fn complete_file() {
        let f = write_tmp("y,x\n1,2\n3,4\n");
        assert_eq!(load_csv(f.path(), &roles()).unwrap().n_missing(), 0);
    }

    #[test]
    fn malformed_value_names_row_and_column() {
        let f = write_tmp("y,x\nabc,1\n");
        match load_csv(f.path(), &roles()) {
            Err(Error::Ingest { row, column, .. }) => assert_eq!((row, column.as_str()), (2, "y")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_covariate_rejected() {
        let f = write_tmp("y,x\n1,\n");
        assert!(matches!(load_csv(f.path(), &roles()), Err(Error::Ingest { row: 2, .. })));
    }

    #[test]
    fn roles_must_be_disjoint() {
        let r = ColumnRoles { z: vec!["a".into()], instruments: vec!["a".into()], ..Default::default() };
        assert!(r.validate().is_err());
    }

    #[test]
    fn config_parsing_and_overrides() {
        let mut cfg = RunConfig::parse(
            "# comment\ndata = d.csv\nz = x1, x2\nmodel = nr\nknots = 7\nadaptive_knots = ab\nburn = 10\noutcome = lmm\ngroup = id\n",
        )
        .unwrap();
        assert_eq!(cfg.roles.z, vec!["x1".to_string(), "x2".into()]);
        assert_eq!(cfg.response.kind, ResponseKind::Nonparametric);
        assert_eq!(cfg.response.n_knots, 7);
        assert_eq!(cfg.response.knot_strategy, KnotStrategy::AdaptiveSeparate);
        assert_eq!(cfg.mcmc.n_burn, 10);
        assert_eq!(cfg.outcome, OutcomeKind::Mixed);
        cfg.set("burn", "20").unwrap();
        assert_eq!(cfg.mcmc.n_burn, 20);
        assert!(cfg.set("bogus", "1").is_err());
        assert!(cfg.set("burn", "x").is_err());
        assert!(RunConfig::parse("novalue\n").is_err());
    }

    #[test]
    fn group_labels_in_order_of_appearance() {
        let f = write_tmp("y,id,t\n1,b,1\n2,a,1\n,b,2\n");
        let r = ColumnRoles {
            group: Some("id".into()),
            time: Some("t".into()),
            lag_indicator: true,
            ..Default::default()
        };
        let d = load_csv(f.path(), &r).unwrap();
        assert_eq!(d.groups().unwrap(), &[0, 1, 0]);
        assert_eq!(d.z_names(), &["lag_observed".to_string()]);
    }
}
