use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// Model-ready data: responses with a missingness mask, the outcome design
/// `x`, the response-model covariates `z`, and optional subject grouping.
#[derive(Debug, Clone)]
pub struct Dataset {
    y: Vec<f64>,
    observed: Vec<bool>,
    x: DMatrix<f64>,
    z: DMatrix<f64>,
    groups: Option<Vec<usize>>,
    n_groups: usize,
    x_names: Vec<String>,
    z_names: Vec<String>,
}

impl Dataset {
    /// Values of `y` at unobserved positions are ignored and stored as NaN.
    pub fn new(y: Vec<f64>, observed: Vec<bool>, x: DMatrix<f64>, z: DMatrix<f64>) -> Result<Self> {
        let n = y.len();
        if observed.len() != n || x.nrows() != n || z.nrows() != n {
            return invalid(format!(
                "row counts disagree: y {n}, mask {}, x {}, z {}",
                observed.len(),
                x.nrows(),
                z.nrows()
            ));
        }
        if x.iter().chain(z.iter()).any(|v| !v.is_finite()) {
            return invalid("covariates must be finite");
        }
        let mut y = y;
        for (i, (v, &o)) in y.iter_mut().zip(&observed).enumerate() {
            if o {
                if !v.is_finite() {
                    return invalid(format!("observed response {i} is not finite"));
                }
            } else {
                *v = f64::NAN;
            }
        }
        let x_names = (0..x.ncols()).map(|j| format!("x{j}")).collect();
        let z_names = (0..z.ncols()).map(|j| format!("z{j}")).collect();
        Ok(Self { y, observed, x, z, groups: None, n_groups: 0, x_names, z_names })
    }

    /// Attach subject labels `0..G` for the random-intercept model.
    pub fn with_groups(mut self, groups: Vec<usize>) -> Result<Self> {
        if groups.len() != self.n() {
            return invalid("group labels must have one entry per row");
        }
        self.n_groups = groups.iter().max().map_or(0, |m| m + 1);
        self.groups = Some(groups);
        Ok(self)
    }

    pub fn with_names(mut self, x_names: Vec<String>, z_names: Vec<String>) -> Result<Self> {
        if x_names.len() != self.x.ncols() || z_names.len() != self.z.ncols() {
            return invalid("column name count mismatch");
        }
        self.x_names = x_names;
        self.z_names = z_names;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn observed(&self) -> &[bool] {
        &self.observed
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn groups(&self) -> Option<&[usize]> {
        self.groups.as_deref()
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn x_names(&self) -> &[String] {
        &self.x_names
    }

    pub fn z_names(&self) -> &[String] {
        &self.z_names
    }

    pub fn missing_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.observed[i]).collect()
    }

    pub fn n_missing(&self) -> usize {
        self.observed.iter().filter(|o| !**o).count()
    }

    pub fn observed_values(&self) -> Vec<f64> {
        self.y
            .iter()
            .zip(&self.observed)
            .filter_map(|(&v, &o)| o.then_some(v))
            .collect()
    }

    /// Replace responses and mask; used when data are regenerated in
    /// joint-distribution tests.
    pub fn set_responses(&mut self, y: Vec<f64>, observed: Vec<bool>) -> Result<()> {
        let fresh = Dataset::new(y, observed, self.x.clone(), self.z.clone())?;
        self.y = fresh.y;
        self.observed = fresh.observed;
        Ok(())
    }
}

/// Missing responses compare equal to each other.
impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.observed == other.observed
            && self.y.iter().zip(&other.y).all(|(a, b)| a.to_bits() == b.to_bits() || a == b)
            && self.y.len() == other.y.len()
            && self.x == other.x
            && self.z == other.z
            && self.groups == other.groups
            && self.x_names == other.x_names
            && self.z_names == other.z_names
    }
}

/// `s_{i,t−1}` for each record: the response indicator of the same subject
/// at the previous time, with `s_{i0} = 1`.
pub fn lagged_response_indicator(groups: &[usize], times: &[f64], observed: &[bool]) -> Vec<f64> {
    let n = groups.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| groups[a].cmp(&groups[b]).then(times[a].total_cmp(&times[b])));
    let mut lag = vec![1.0; n];
    for w in order.windows(2) {
        let (prev, cur) = (w[0], w[1]);
        if groups[prev] == groups[cur] {
            lag[cur] = if observed[prev] { 1.0 } else { 0.0 };
        }
    }
    lag
}

/// Per-arm polynomial in time: columns `R_{ik} T^j` for arms `k ∈ {0, 1}`
/// and `j = 0..=degree`, arm 0 first.
pub fn arm_time_polynomial(arm: &[f64], time: &[f64], degree: usize) -> (DMatrix<f64>, Vec<String>) {
    let n = arm.len();
    let p = degree + 1;
    let x = DMatrix::from_fn(n, 2 * p, |i, c| {
        let k = c / p;
        let j = c % p;
        let indicator = if (arm[i] != 0.0) == (k == 1) { 1.0 } else { 0.0 };
        indicator * time[i].powi(j as i32)
    });
    let names = (0..2)
        .flat_map(|k| (0..p).map(move |j| format!("beta_{j}{k}")))
        .collect();
    (x, names)
}
