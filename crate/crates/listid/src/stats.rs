//! Confidence intervals, goodness-of-fit and randomness tests.

use statrs::distribution::{Beta, ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Beta quantile by bisection on the (precise) forward CDF; the library
/// default inverse is too coarse for tail intervals.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let d = Beta::new(a, b).unwrap();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if d.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact (Clopper-Pearson) two-sided confidence interval for a binomial
/// proportion with `x` successes out of `n`.
pub fn clopper_pearson(x: u64, n: u64, alpha: f64) -> (f64, f64) {
    assert!(n > 0);
    let lo = if x == 0 {
        0.0
    } else {
        beta_quantile(x as f64, (n - x + 1) as f64, alpha / 2.0)
    };
    let hi = if x == n {
        1.0
    } else {
        beta_quantile((x + 1) as f64, (n - x) as f64, 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Chi-square test (1 degree of freedom) for 0/1 balance.
pub fn chi_square_uniformity_pvalue(zeros: u64, ones: u64) -> f64 {
    let n = (zeros + ones) as f64;
    if n == 0.0 {
        return 1.0;
    }
    let d = zeros as f64 - ones as f64;
    let stat = d * d / n;
    1.0 - ChiSquared::new(1.0).unwrap().cdf(stat)
}

/// Wald-Wolfowitz runs test for serial independence of a bit stream.
pub fn runs_test_pvalue(bits: &[bool]) -> f64 {
    let n = bits.len();
    if n < 2 {
        return 1.0;
    }
    let n1 = bits.iter().filter(|&&b| b).count() as f64;
    let n0 = n as f64 - n1;
    if n0 == 0.0 || n1 == 0.0 {
        return 0.0;
    }
    let runs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let mean = 2.0 * n0 * n1 / (n0 + n1) + 1.0;
    let var = (mean - 1.0) * (mean - 2.0) / (n0 + n1 - 1.0);
    if var <= 0.0 {
        return 0.0;
    }
    let z = (runs as f64 - mean) / var.sqrt();
    let phi = Normal::new(0.0, 1.0).unwrap().cdf(z.abs());
    2.0 * (1.0 - phi)
}

#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of y against x.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Config("least squares needs two paired points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("degenerate x values in fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let p = intercept + slope * x;
            (y - p) * (y - p)
        })
        .sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res.abs() < 1e-12 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}
