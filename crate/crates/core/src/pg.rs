//! Pólya-gamma random variates.
//!
//! `PG(1, c)` is drawn exactly with the alternating-series accept-reject
//! scheme: the Jacobi-type density `J*(1, c/2)` is enveloped by a mixture of a
//! truncated inverse-Gaussian (left of `t = 0.64`) and a truncated exponential
//! (right of `t`), and the piecewise alternating series decides acceptance.
//! `PG(1, c) = J*(1, c/2) / 4`.
//!
//! [`pg_series_oracle`] draws from a truncation of the infinite gamma
//! convolution. It is slow and only used as a reference in tests.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};

const TRUNC: f64 = 0.64;
const PI_SQ: f64 = PI * PI;

/// Parameters of `PG(b, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgParams {
    b: f64,
    c: f64,
}

impl PgParams {
    pub fn new(b: f64, c: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return invalid(format!("PG shape must be positive and finite, got {b}"));
        }
        if !c.is_finite() {
            return invalid(format!("PG tilt must be finite, got {c}"));
        }
        Ok(Self { b, c })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Exact draw from `PG(1, c)`.
pub fn sample_pg1<R: Rng + ?Sized>(c: f64, rng: &mut R) -> Result<f64> {
    if !c.is_finite() {
        return invalid(format!("PG tilt must be finite, got {c}"));
    }
    Ok(draw_pg1(c, rng))
}

/// `PG(1, c)` for a tilt already known to be finite.
pub(crate) fn draw_pg1<R: Rng + ?Sized>(c: f64, rng: &mut R) -> f64 {
    0.25 * draw_jstar1(0.5 * c.abs(), rng)
}

/// Truncated-series approximation of `PG(b, c)` using `n_terms` gamma terms.
pub fn pg_series_oracle<R: Rng + ?Sized>(b: f64, c: f64, n_terms: usize, rng: &mut R) -> Result<f64> {
    let params = PgParams::new(b, c)?;
    if n_terms < 1 {
        return invalid("series oracle needs at least one term");
    }
    let gamma = Gamma::new(params.b, 1.0)
        .map_err(|e| crate::Error::InvalidArgument(format!("gamma shape: {e}")))?;
    let tilt = params.c * params.c / (4.0 * PI_SQ);
    let mut sum = 0.0;
    for k in 1..=n_terms {
        let half = k as f64 - 0.5;
        let g: f64 = gamma.sample(rng);
        sum += g / (half * half + tilt);
    }
    Ok(sum / (2.0 * PI_SQ))
}

/// Draw from `J*(1, z)` with `z >= 0`.
fn draw_jstar1<R: Rng + ?Sized>(z: f64, rng: &mut R) -> f64 {
    let k = PI_SQ / 8.0 + 0.5 * z * z;
    let p = (0.5 * PI / k) * (-k * TRUNC).exp();
    let q = 2.0 * (-z).exp() * inverse_gaussian_cdf(TRUNC, z);
    let left_weight = q / (p + q);

    loop {
        let x = if rng.random::<f64>() < left_weight {
            truncated_inverse_gaussian(z, rng)
        } else {
            let e: f64 = Exp1.sample(rng);
            TRUNC + e / k
        };

        let mut s = series_coef(0, x);
        let y = rng.random::<f64>() * s;
        let mut n = 0;
        loop {
            n += 1;
            if n % 2 == 1 {
                s -= series_coef(n, x);
                if y <= s {
                    return x;
                }
            } else {
                s += series_coef(n, x);
                if y > s {
                    break;
                }
            }
        }
    }
}

/// Piecewise coefficient `a_n(x)` of the alternating series for `J*(1)`.
#[inline]
fn series_coef(n: u32, x: f64) -> f64 {
    let half = n as f64 + 0.5;
    if x > TRUNC {
        PI * half * (-0.5 * half * half * PI_SQ * x).exp()
    } else {
        PI * half * (2.0 / (PI * x)).powf(1.5) * (-2.0 * half * half / x).exp()
    }
}

/// CDF at `x` of the inverse Gaussian with mean `1/z` and shape 1.
/// `z = 0` is the Lévy limit.
fn inverse_gaussian_cdf(x: f64, z: f64) -> f64 {
    let std = Normal::standard();
    let root = x.sqrt().recip();
    if z == 0.0 {
        return 2.0 * std.cdf(-root);
    }
    let a = std.cdf(root * (x * z - 1.0));
    // exp(2z) Φ(-(xz+1)/√x), combined in log space to avoid overflow.
    let tail = std.cdf(-root * (x * z + 1.0));
    let b = if tail > 0.0 { (2.0 * z + tail.ln()).exp() } else { 0.0 };
    a + b
}

/// Inverse Gaussian `IG(1/z, 1)` truncated to `(0, TRUNC]`.
fn truncated_inverse_gaussian<R: Rng + ?Sized>(z: f64, rng: &mut R) -> f64 {
    let mu = if z > 0.0 { z.recip() } else { f64::INFINITY };
    if mu > TRUNC {
        // Lévy proposal truncated to (0, t], thinned by the exponential tilt.
        loop {
            let x = loop {
                let e1: f64 = Exp1.sample(rng);
                let e2: f64 = Exp1.sample(rng);
                if e1 * e1 <= 2.0 * e2 / TRUNC {
                    let d = 1.0 + TRUNC * e1;
                    break TRUNC / (d * d);
                }
            };
            let alpha = (-0.5 * z * z * x).exp();
            if rng.random::<f64>() <= alpha {
                return x;
            }
        }
    } else {
        loop {
            let n: f64 = StandardNormal.sample(rng);
            let y = n * n;
            let my = mu * y;
            let mut x = mu + 0.5 * mu * my - 0.5 * mu * (4.0 * my + my * my).sqrt();
            if rng.random::<f64>() > mu / (mu + x) {
                x = mu * mu / x;
            }
            if x <= TRUNC {
                return x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn analytic_mean(c: f64) -> f64 {
        if c == 0.0 {
            0.25
        } else {
            (0.5 * c).tanh() / (2.0 * c)
        }
    }

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn rejects_non_finite_tilt() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_pg1(f64::NAN, &mut rng).is_err());
        assert!(sample_pg1(f64::INFINITY, &mut rng).is_err());
    }

    #[test]
    fn params_validate_shape() {
        assert!(PgParams::new(0.0, 1.0).is_err());
        assert!(PgParams::new(-1.0, 1.0).is_err());
        assert!(PgParams::new(1.0, f64::NAN).is_err());
        let p = PgParams::new(2.0, -1.5).unwrap();
        assert_eq!((p.b(), p.c()), (2.0, -1.5));
    }

    #[test]
    fn oracle_single_term_is_scaled_gamma() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let draw = pg_series_oracle(1.0, 0.0, 1, &mut a).unwrap();
        let g: f64 = Gamma::new(1.0, 1.0).unwrap().sample(&mut b);
        assert!((draw - 2.0 * g / PI_SQ).abs() < 1e-14);
    }

    #[test]
    fn oracle_rejects_bad_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(pg_series_oracle(0.0, 0.0, 10, &mut rng).is_err());
        assert!(pg_series_oracle(1.0, 0.0, 0, &mut rng).is_err());
    }

    #[test]
    fn oracle_mean_for_shape_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..20_000)
            .map(|_| pg_series_oracle(2.0, 0.0, 2_000, &mut rng).unwrap())
            .collect();
        let (m, se) = mean_and_se(&xs);
        // Truncation drops about b / (2π² N) of the mean.
        assert!((m - 0.5).abs() < 4.0 * se + 1e-4, "mean {m}, se {se}");
        assert!(xs.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn exact_sampler_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &c in &[0.0, 0.5, 2.0, 6.0, 30.0] {
            let xs: Vec<f64> = (0..100_000).map(|_| draw_pg1(c, &mut rng)).collect();
            let (m, se) = mean_and_se(&xs);
            let target = analytic_mean(c);
            assert!((m - target).abs() < 4.0 * se, "c={c}: mean {m} vs {target} (se {se})");
            assert!(xs.iter().all(|&x| x > 0.0 && x.is_finite()));
        }
    }

    #[test]
    fn c_two_mean_near_reference() {
        // tanh(1) / 4
        assert!((analytic_mean(2.0) - 0.190_399).abs() < 1e-6);
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = ChaCha8Rng::seed_from_u64(77);
        let mut b = ChaCha8Rng::seed_from_u64(77);
        let xa: Vec<f64> = (0..100).map(|i| draw_pg1(i as f64 * 0.1, &mut a)).collect();
        let xb: Vec<f64> = (0..100).map(|i| draw_pg1(i as f64 * 0.1, &mut b)).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn ig_cdf_is_continuous_in_tilt() {
        let at_zero = inverse_gaussian_cdf(TRUNC, 0.0);
        let near_zero = inverse_gaussian_cdf(TRUNC, 1e-9);
        assert!((at_zero - near_zero).abs() < 1e-6);
    }
}
