//! Batch-means confidence intervals for ratio estimators.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Two-sided 95% Student-t critical value with `dof` degrees of freedom.
pub fn t_critical_95(dof: usize) -> f64 {
    if dof == 0 {
        return f64::INFINITY;
    }
    StudentsT::new(0.0, 1.0, dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975)
}

/// Point estimate and 95% half-width of `sum(num) / sum(den)` from per-batch
/// numerators and denominators.
///
/// Batches are treated as i.i.d.; the variance is the usual delta-method
/// one, `sum (num_b - R den_b)^2 / ((m - 1) m den_bar^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEstimate {
    pub value: f64,
    pub half_width: f64,
}

pub fn ratio_estimate(num: &[f64], den: &[f64]) -> RatioEstimate {
    assert_eq!(num.len(), den.len(), "batch series lengths differ");
    let m = num.len();
    let total_num: f64 = num.iter().sum();
    let total_den: f64 = den.iter().sum();
    let value = total_num / total_den;
    if m < 2 {
        return RatioEstimate { value, half_width: f64::INFINITY };
    }
    let den_bar = total_den / m as f64;
    let ss: f64 = num
        .iter()
        .zip(den)
        .map(|(n, d)| {
            let z = n - value * d;
            z * z
        })
        .sum();
    let var = ss / ((m - 1) as f64 * m as f64 * den_bar * den_bar);
    RatioEstimate { value, half_width: t_critical_95(m - 1) * var.sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_values() {
        assert!((t_critical_95(1) - 12.706).abs() < 1e-3);
        assert!((t_critical_95(9) - 2.262).abs() < 1e-3);
        assert!((t_critical_95(10_000) - 1.960).abs() < 1e-3);
    }

    #[test]
    fn equal_denominators_reduce_to_sample_mean() {
        let num = [1.0, 2.0, 3.0, 4.0];
        let den = [1.0; 4];
        let r = ratio_estimate(&num, &den);
        assert_eq!(r.value, 2.5);
        // sd = sqrt(5/3), se = sd / 2
        let expected = t_critical_95(3) * (5.0f64 / 3.0).sqrt() / 2.0;
        assert!((r.half_width - expected).abs() < 1e-12);
    }

    #[test]
    fn proportional_batches_have_zero_width() {
        let r = ratio_estimate(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]);
        assert_eq!(r.value, 2.0);
        assert_eq!(r.half_width, 0.0);
    }
}
