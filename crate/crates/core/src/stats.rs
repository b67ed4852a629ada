//! Small numerical helpers shared by the estimators.

use statrs::function::erf::erfc;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MeanEstimate {
    /// Two-pass estimate over `values` in slice order. For `n < 2` the
    /// standard error is reported as 0.
    pub fn from_slice(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: 0.0,
                n,
            };
        }
        let mean = compensated_sum(values.iter().copied()) / n as f64;
        if n < 2 {
            return Self {
                mean,
                stderr: 0.0,
                n,
            };
        }
        let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
        let var = ss / (n - 1) as f64;
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        }
    }
}

/// Upper tail of the standard normal, accurate far into the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Standard error of an empirical probability.
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / n as f64).sqrt()
}

/// Gumbel distribution function.
pub fn gumbel_cdf(z: f64) -> f64 {
    (-(-z).exp()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn mean_estimate_single_value_has_zero_stderr() {
        let m = MeanEstimate::from_slice(&[3.0]);
        assert_eq!(m.mean, 3.0);
        assert_eq!(m.stderr, 0.0);
    }

    #[test]
    fn mean_estimate_matches_closed_form() {
        let m = MeanEstimate::from_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m.mean - 2.5).abs() < 1e-15);
        // var = 5/3, stderr = sqrt(5/12)
        assert!((m.stderr - (5.0_f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normal_tail_values() {
        assert!((normal_sf(0.0) - 0.5).abs() < 1e-15);
        let q = normal_sf(1.959963984540054);
        // statrs erfc is good to ~1e-11 here
        assert!((q - 0.025).abs() < 1e-10, "{q}");
        // far tail stays relative-accurate
        let t = normal_sf(10.0);
        assert!((t / 7.619853024160527e-24 - 1.0).abs() < 1e-10);
    }
}
