//! Truncated power spline and Gaussian radial-basis designs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{invalid, Error, Result};

/// Default spline degree.
pub const DEFAULT_DEGREE: usize = 2;
/// Default number of knots.
pub const DEFAULT_KNOTS: usize = 10;
/// Lower and upper quantile levels anchoring the outer knots.
pub const KNOT_QUANTILES: (f64, f64) = (0.10, 0.90);

/// Spline degree and an ordered knot sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineBasisSpec {
    degree: usize,
    knots: Vec<f64>,
}

impl SplineBasisSpec {
    /// `degree >= 1`, knots finite and strictly increasing. An empty knot
    /// vector gives a pure polynomial.
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if degree < 1 {
            return invalid("spline degree must be at least 1");
        }
        check_knots(&knots)?;
        Ok(Self { degree, knots })
    }

    /// Polynomial-only spec (no knots); degree 0 is allowed here.
    pub fn polynomial(degree: usize) -> Self {
        Self { degree, knots: Vec::new() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn n_knots(&self) -> usize {
        self.knots.len()
    }

    /// Replace the knots, keeping the degree.
    pub fn set_knots(&mut self, knots: Vec<f64>) -> Result<()> {
        check_knots(&knots)?;
        self.knots = knots;
        Ok(())
    }

    /// Write `(1, y, …, y^q)` into `w1` and `(y − κ_ℓ)_+^q` into `w2`.
    #[inline]
    pub fn fill(&self, y: f64, w1: &mut [f64], w2: &mut [f64]) {
        debug_assert_eq!(w1.len(), self.degree + 1);
        debug_assert_eq!(w2.len(), self.knots.len());
        let mut p = 1.0;
        for w in w1.iter_mut() {
            *w = p;
            p *= y;
        }
        for (w, &k) in w2.iter_mut().zip(&self.knots) {
            *w = if y > k { pow_usize(y - k, self.degree) } else { 0.0 };
        }
    }

    /// Derivatives in `y` of the polynomial and truncated power terms.
    #[inline]
    pub fn fill_derivative(&self, y: f64, d1: &mut [f64], d2: &mut [f64]) {
        let q = self.degree;
        let mut p = 1.0;
        d1[0] = 0.0;
        for j in 1..=q {
            d1[j] = j as f64 * p;
            p *= y;
        }
        for (d, &k) in d2.iter_mut().zip(&self.knots) {
            *d = if y > k { q as f64 * pow_usize(y - k, q - 1) } else { 0.0 };
        }
    }

    /// `g(y) = w1'φ + w2'γ` and its derivative, without allocating.
    #[inline]
    pub fn eval_with_derivative(&self, y: f64, phi: &[f64], gamma: &[f64]) -> (f64, f64) {
        let q = self.degree;
        let mut value = 0.0;
        let mut deriv = 0.0;
        let mut p = 1.0;
        for (j, &c) in phi.iter().enumerate() {
            value += c * p;
            if j < q {
                deriv += (j + 1) as f64 * phi[j + 1] * p;
            }
            p *= y;
        }
        for (&k, &g) in self.knots.iter().zip(gamma) {
            if y > k {
                let d = y - k;
                let lower = pow_usize(d, q - 1);
                value += g * lower * d;
                deriv += g * q as f64 * lower;
            }
        }
        (value, deriv)
    }
}

/// `(w1, w2)` for a single response value.
pub fn truncated_power_basis(y: f64, spec: &SplineBasisSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    if !y.is_finite() {
        return invalid(format!("basis evaluated at non-finite y = {y}"));
    }
    let mut w1 = vec![0.0; spec.degree + 1];
    let mut w2 = vec![0.0; spec.knots.len()];
    spec.fill(y, &mut w1, &mut w2);
    Ok((w1, w2))
}

#[inline]
fn pow_usize(x: f64, k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        2 => x * x,
        3 => x * x * x,
        _ => x.powi(k as i32),
    }
}

fn check_knots(knots: &[f64]) -> Result<()> {
    if knots.iter().any(|k| !k.is_finite()) {
        return invalid("knots must be finite");
    }
    if knots.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("knots must be strictly increasing");
    }
    Ok(())
}

/// Empirical quantile with linear interpolation between order statistics.
/// `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Outer knot anchors before expansion: the 10% and 90% quantiles of the
/// observed responses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnotAnchors {
    pub lower: f64,
    pub upper: f64,
}

impl KnotAnchors {
    pub fn from_observed(y_obs: &[f64]) -> Result<Self> {
        if y_obs.len() < 2 {
            return Err(Error::DegenerateRange("need at least two observed responses".into()));
        }
        let mut sorted = y_obs.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        if sorted[0] == sorted[sorted.len() - 1] {
            return Err(Error::DegenerateRange("all observed responses are identical".into()));
        }
        let lower = quantile_sorted(&sorted, KNOT_QUANTILES.0);
        let upper = quantile_sorted(&sorted, KNOT_QUANTILES.1);
        if lower >= upper {
            return Err(Error::DegenerateRange(format!(
                "10% and 90% quantiles coincide at {lower}"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// `K` knots after widening the lower end by `a` and the upper end by
    /// `b` half-ranges. Interior knots are equally spaced.
    pub fn knots(&self, k: usize, a: f64, b: f64) -> Result<Vec<f64>> {
        if !(a >= 0.0 && b >= 0.0) || !a.is_finite() || !b.is_finite() {
            return invalid(format!("expansion constants must be non-negative, got a={a}, b={b}"));
        }
        let half = 0.5 * (self.upper - self.lower);
        let lo = self.lower - a * half;
        let hi = self.upper + b * half;
        match k {
            0 => Ok(Vec::new()),
            1 => Ok(vec![0.5 * (lo + hi)]),
            _ => {
                let step = (hi - lo) / (k - 1) as f64;
                Ok((0..k)
                    .map(|l| if l == k - 1 { hi } else { lo + step * l as f64 })
                    .collect())
            }
        }
    }
}

/// Knots spanning the expanded quantile range of `y_obs`.
pub fn place_knots(y_obs: &[f64], k: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    if k < 2 {
        return invalid(format!("knot placement needs K >= 2, got {k}"));
    }
    KnotAnchors::from_observed(y_obs)?.knots(k, a, b)
}

/// Gaussian radial basis: centers and per-center scales.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfSpec {
    centers: Vec<Vec<f64>>,
    scales: Vec<f64>,
}

impl RbfSpec {
    pub fn new(centers: Vec<Vec<f64>>, scales: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return invalid("radial basis needs at least one center");
        }
        if centers.len() != scales.len() {
            return invalid(format!(
                "{} centers but {} scales",
                centers.len(),
                scales.len()
            ));
        }
        if scales.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return invalid("radial basis scales must be positive");
        }
        let dim = centers[0].len();
        if centers.iter().any(|c| c.len() != dim) {
            return invalid("radial basis centers differ in dimension");
        }
        Ok(Self { centers, scales })
    }

    /// Same scale for every center.
    pub fn with_common_scale(centers: Vec<Vec<f64>>, scale: f64) -> Result<Self> {
        let r = centers.len();
        Self::new(centers, vec![scale; r])
    }

    pub fn n_centers(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }
}

/// `Z_Φ` with entries `exp(−c_r ‖z_i − η_r‖²)`.
pub fn rbf_design(z: &DMatrix<f64>, spec: &RbfSpec) -> Result<DMatrix<f64>> {
    if z.ncols() != spec.dim() {
        return invalid(format!(
            "covariates have {} columns, centers have {}",
            z.ncols(),
            spec.dim()
        ));
    }
    Ok(DMatrix::from_fn(z.nrows(), spec.n_centers(), |i, r| {
        let d2: f64 = spec.centers[r]
            .iter()
            .enumerate()
            .map(|(j, &e)| {
                let d = z[(i, j)] - e;
                d * d
            })
            .sum();
        (-spec.scales[r] * d2).exp()
    }))
}

/// Number of random restarts in [`cluster_centers`].
pub const KMEANS_RESTARTS: usize = 25;
const KMEANS_MAX_ITER: usize = 300;

/// k-means (Lloyd) centers of the rows of `z`, best of
/// [`KMEANS_RESTARTS`] seeded random initializations.
pub fn cluster_centers<R: Rng + ?Sized>(z: &DMatrix<f64>, r: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let n = z.nrows();
    if r == 0 {
        return invalid("number of clusters must be at least 1");
    }
    if r > n {
        return invalid(format!("{r} clusters requested for {n} rows"));
    }
    let rows: Vec<DVector<f64>> = (0..n).map(|i| z.row(i).transpose()).collect();

    let mut best: Option<(f64, Vec<DVector<f64>>)> = None;
    for _ in 0..KMEANS_RESTARTS {
        let init = rand::seq::index::sample(rng, n, r);
        let mut centers: Vec<DVector<f64>> = init.iter().map(|i| rows[i].clone()).collect();
        let mut assign = vec![usize::MAX; n];
        for _ in 0..KMEANS_MAX_ITER {
            let mut changed = false;
            for (i, row) in rows.iter().enumerate() {
                let nearest = nearest_center(row, &centers);
                if assign[i] != nearest {
                    assign[i] = nearest;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let mut sums = vec![DVector::zeros(z.ncols()); r];
            let mut counts = vec![0usize; r];
            for (i, row) in rows.iter().enumerate() {
                sums[assign[i]] += row;
                counts[assign[i]] += 1;
            }
            for c in 0..r {
                if counts[c] > 0 {
                    centers[c] = &sums[c] / counts[c] as f64;
                }
            }
        }
        let inertia: f64 = rows
            .iter()
            .zip(&assign)
            .map(|(row, &a)| (row - &centers[a]).norm_squared())
            .sum();
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, centers));
        }
    }
    let (_, centers) = best.expect("at least one restart");
    Ok(centers.into_iter().map(|c| c.iter().copied().collect()).collect())
}

fn nearest_center(row: &DVector<f64>, centers: &[DVector<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = (row - center).norm_squared();
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_substitution_cases() {
        let s = SplineBasisSpec::new(2, vec![0.0]).unwrap();
        let (w1, w2) = truncated_power_basis(1.0, &s).unwrap();
        assert_eq!(w1, vec![1.0, 1.0, 1.0]);
        assert_eq!(w2, vec![1.0]);
        let (_, w2) = truncated_power_basis(-1.0, &s).unwrap();
        assert_eq!(w2, vec![0.0]);

        let s = SplineBasisSpec::new(3, vec![1.0, 5.0]).unwrap();
        let (w1, w2) = truncated_power_basis(2.0, &s).unwrap();
        assert_eq!(w1, vec![1.0, 2.0, 4.0, 8.0]);
        assert_eq!(w2, vec![1.0, 0.0]);
    }

    #[test]
    fn basis_rejects_non_finite() {
        let s = SplineBasisSpec::new(2, vec![0.0]).unwrap();
        assert!(truncated_power_basis(f64::NAN, &s).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(SplineBasisSpec::new(0, vec![0.0]).is_err());
        assert!(SplineBasisSpec::new(2, vec![1.0, 1.0]).is_err());
        assert!(SplineBasisSpec::new(2, vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn smoothness_at_knots() {
        // g is C^{q-1}: value and derivatives up to order q-1 agree on both sides.
        for q in 1..=3usize {
            let s = SplineBasisSpec::new(q, vec![0.3]).unwrap();
            let phi = vec![0.2; q + 1];
            let gamma = vec![1.7];
            let eps = 1e-6;
            let (lv, ld) = s.eval_with_derivative(0.3 - eps, &phi, &gamma);
            let (rv, rd) = s.eval_with_derivative(0.3 + eps, &phi, &gamma);
            assert!((lv - rv).abs() < 1e-5, "q={q} value jump");
            if q >= 2 {
                assert!((ld - rd).abs() < 1e-4, "q={q} derivative jump");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = SplineBasisSpec::new(3, vec![-0.5, 0.1, 0.9]).unwrap();
        let phi = [0.1, -0.4, 0.3, 0.05];
        let gamma = [0.8, -1.2, 0.6];
        for i in 0..40 {
            let y = -2.0 + 0.1 * i as f64 + 0.013;
            let h = 1e-5;
            let (_, d) = s.eval_with_derivative(y, &phi, &gamma);
            let fd = (s.eval_with_derivative(y + h, &phi, &gamma).0
                - s.eval_with_derivative(y - h, &phi, &gamma).0)
                / (2.0 * h);
            assert!((d - fd).abs() < 1e-6, "y={y}: {d} vs {fd}");
        }
    }

    #[test]
    fn knot_expansion() {
        let anchors = KnotAnchors { lower: 0.0, upper: 2.0 };
        let k = anchors.knots(5, 1.0, 1.0).unwrap();
        assert_eq!(k.first(), Some(&-1.0));
        assert_eq!(k.last(), Some(&3.0));
        let k = anchors.knots(5, 0.0, 0.0).unwrap();
        assert_eq!(k, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn knots_on_integer_grid() {
        let y: Vec<f64> = (0..=100).map(f64::from).collect();
        let k = place_knots(&y, 10, 0.0, 0.0).unwrap();
        assert_eq!(k.len(), 10);
        assert!((k[0] - 10.0).abs() < 1e-12);
        assert!((k[9] - 90.0).abs() < 1e-12);
        for w in k.windows(2) {
            assert!((w[1] - w[0] - 80.0 / 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn knots_reject_degenerate_data() {
        assert!(matches!(
            place_knots(&[3.0; 20], 5, 0.5, 0.5),
            Err(Error::DegenerateRange(_))
        ));
        assert!(place_knots(&[1.0, 2.0, 3.0], 1, 0.0, 0.0).is_err());
    }

    #[test]
    fn rbf_entries() {
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 3.0]);
        let spec = RbfSpec::with_common_scale(vec![vec![1.0, 2.0]], 1.0).unwrap();
        let d = rbf_design(&z, &spec).unwrap();
        assert_eq!(d[(0, 0)], 1.0);
        assert!((d[(1, 0)] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((d[(1, 0)] - 0.367_879).abs() < 1e-6);
    }

    #[test]
    fn rbf_rejects_bad_specs() {
        assert!(RbfSpec::with_common_scale(vec![vec![0.0]], 0.0).is_err());
        assert!(RbfSpec::new(vec![], vec![]).is_err());
        let spec = RbfSpec::with_common_scale(vec![vec![0.0, 0.0]], 1.0).unwrap();
        assert!(rbf_design(&DMatrix::zeros(3, 1), &spec).is_err());
    }

    #[test]
    fn clusters_singletons_and_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = DMatrix::from_row_slice(3, 1, &[0.0, 5.0, 9.0]);
        let mut c = cluster_centers(&z, 3, &mut rng).unwrap();
        c.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(c, vec![vec![0.0], vec![5.0], vec![9.0]]);

        let z = DMatrix::from_element(6, 2, 1.5);
        assert_eq!(cluster_centers(&z, 1, &mut rng).unwrap(), vec![vec![1.5, 1.5]]);
        assert!(cluster_centers(&z, 7, &mut rng).is_err());
    }

    #[test]
    fn clusters_separate_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut vals = Vec::new();
        for i in 0..20 {
            let jitter = (i as f64) * 0.01;
            vals.extend_from_slice(&[jitter, jitter]);
            vals.extend_from_slice(&[10.0 + jitter, 10.0 - jitter]);
        }
        let z = DMatrix::from_row_slice(40, 2, &vals);
        let mut c = cluster_centers(&z, 2, &mut rng).unwrap();
        c.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert!(c[0][0] >= 0.0 && c[0][0] <= 0.19);
        assert!(c[1][0] >= 10.0 && c[1][0] <= 10.19);
    }

    #[test]
    fn clusters_deterministic_given_seed() {
        let z = DMatrix::from_fn(50, 2, |i, j| ((i * 7 + j * 3) % 11) as f64);
        let a = cluster_centers(&z, 4, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = cluster_centers(&z, 4, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn placed_knots_strictly_increasing(
            ys in proptest::collection::vec(-50.0f64..50.0, 2..60),
            k in 2usize..15,
            a in 0.0f64..3.0,
            b in 0.0f64..3.0,
        ) {
            if let Ok(knots) = place_knots(&ys, k, a, b) {
                prop_assert_eq!(knots.len(), k);
                prop_assert!(knots.windows(2).all(|w| w[0] < w[1]));
            }
        }

        #[test]
        fn rbf_row_permutation_equivariant(
            vals in proptest::collection::vec(-3.0f64..3.0, 12),
            shift in 0usize..6,
        ) {
            let z = DMatrix::from_row_slice(6, 2, &vals);
            let spec = RbfSpec::new(vec![vec![0.0, 0.5], vec![-1.0, 1.0]], vec![1.0, 0.3]).unwrap();
            let perm: Vec<usize> = (0..6).map(|i| (i + shift) % 6).collect();
            let zp = DMatrix::from_fn(6, 2, |i, j| z[(perm[i], j)]);
            let d = rbf_design(&z, &spec).unwrap();
            let dp = rbf_design(&zp, &spec).unwrap();
            for i in 0..6 {
                for r in 0..2 {
                    prop_assert_eq!(dp[(i, r)], d[(perm[i], r)]);
                    prop_assert!(d[(i, r)] > 0.0 && d[(i, r)] <= 1.0);
                }
            }
        }
    }
}
