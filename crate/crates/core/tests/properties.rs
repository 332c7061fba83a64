use proptest::prelude::*;

use spline_mnar::basis::{truncated_power_basis, SplineBasisSpec};
use spline_mnar::eval::{dic_from_logliks, metrics_row, summarize_values, Interval, Method, MethodEstimate};
use spline_mnar::outcome::{gaussian_grad, gaussian_logpdf};

fn interval(v: f64) -> Interval {
    Interval { estimate: v, lower: v - 0.2, upper: v + 0.3 }
}

proptest! {
    #[test]
    fn rmse_squared_is_bias_squared_plus_variance(values in prop::collection::vec(-3.0f64..3.0, 1..60)) {
        let ests: Vec<MethodEstimate> = values
            .iter()
            .map(|&v| MethodEstimate { mu: interval(v), beta1: interval(v * 0.5), beta2: interval(-v), dic: None })
            .collect();
        let row = metrics_row(Method::Linear, 2, 100, &ests, 0);
        let n = values.len() as f64;
        for (rmse, bias, vals) in [
            (row.mu_rmse, row.mu_bias, values.clone()),
            (row.b1_rmse, row.b1_bias, values.iter().map(|v| v * 0.5).collect()),
            (row.b2_rmse, row.b2_bias, values.iter().map(|v| -v).collect::<Vec<_>>()),
        ] {
            let m = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            let (r, b) = (rmse / 100.0, bias / 100.0);
            prop_assert!((r * r - (b * b + var)).abs() < 1e-10);
        }
    }

    #[test]
    fn dic_shifts_with_constant(ll in prop::collection::vec(-500.0f64..0.0, 1..40), shift in -50.0f64..50.0) {
        let plugin = ll.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let base = dic_from_logliks(&ll, plugin).unwrap();
        let moved: Vec<f64> = ll.iter().map(|v| v + shift).collect();
        let after = dic_from_logliks(&moved, plugin + shift).unwrap();
        prop_assert!((after - (base - 2.0 * shift)).abs() < 1e-8 * (1.0 + base.abs()));
    }

    #[test]
    fn summary_quantiles_are_ordered(values in prop::collection::vec(-10.0f64..10.0, 1..80)) {
        let s = summarize_values("p", &values).unwrap();
        prop_assert!(s.q025 <= s.q50 && s.q50 <= s.q975);
    }

    #[test]
    fn gaussian_gradient_matches_difference(y in -5.0f64..5.0, m in -5.0f64..5.0, v in 0.1f64..5.0) {
        let h = 1e-5;
        let fd = (gaussian_logpdf(y + h, m, v) - gaussian_logpdf(y - h, m, v)) / (2.0 * h);
        let g = gaussian_grad(y, m, v);
        prop_assert!((g - fd).abs() <= 1e-6 * (1.0 + g.abs()));
    }

    #[test]
    fn basis_is_continuous_across_knots(q in 1usize..4, k in -2.0f64..2.0) {
        let spec = SplineBasisSpec::new(q, vec![k]).unwrap();
        let (a1, a2) = truncated_power_basis(k - 1e-9, &spec).unwrap();
        let (b1, b2) = truncated_power_basis(k + 1e-9, &spec).unwrap();
        for (x, y) in a1.iter().zip(&b1).chain(a2.iter().zip(&b2)) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }
}
