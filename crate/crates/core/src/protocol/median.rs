//! Sample median with a distribution-free 95% confidence interval.
//!
//! For sorted samples `x_(1) <= ... <= x_(n)`, the interval
//! `[x_(j), x_(n-j+1)]` covers the population median with probability
//! `1 - 2 P(B <= j - 1)`, `B ~ Binomial(n, 1/2)`. The largest `j` keeping that
//! coverage at or above 95% is used.

use crate::error::{Error, Result};
use crate::fitting::ln_gamma;

/// Smallest sample count accepted by [`median_with_ci`].
pub const MIN_SAMPLES: usize = 8;

const TAIL_MASS: f64 = 0.025;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianCi {
    pub median: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_samples: usize,
}

/// Middle order statistic (mean of the two middle values for even counts).
pub fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// 1-based rank `j` of the lower interval endpoint, or `None` if even
/// `[x_(1), x_(n)]` covers less than 95%.
pub fn lower_rank(n: usize) -> Option<usize> {
    let ln_half_n = n as f64 * std::f64::consts::LN_2;
    let ln_fact_n = ln_gamma(n as f64 + 1.0);
    let mut cdf = 0.0;
    let mut rank = None;
    for k in 0..n {
        let ln_pmf = ln_fact_n - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0) - ln_half_n;
        cdf += ln_pmf.exp();
        if cdf > TAIL_MASS {
            break;
        }
        rank = Some(k + 1);
    }
    rank
}

pub fn median_with_ci(samples: &[f64]) -> Result<MedianCi> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::input(format!(
            "median confidence interval needs at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::input("samples contain NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let j = lower_rank(n).expect("eight or more samples always admit a 95% interval");
    Ok(MedianCi {
        median: median_of_sorted(&sorted),
        ci_low: sorted[j - 1],
        ci_high: sorted[n - j],
        n_samples: n,
    })
}
