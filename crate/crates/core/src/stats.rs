//! Order-independent reductions and small regression helpers.
//!
//! Every ensemble reduction in the crate goes through [`det_sum`], which sorts
//! its input before a pairwise sum. The result depends only on the multiset of
//! values, so serial, parallel and permuted ensembles agree bit for bit.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Sum that is invariant under permutation of `values`.
pub fn det_sum(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    pairwise(&sorted)
}

fn pairwise(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().fold(0.0, |acc, x| acc + x);
    }
    let mid = v.len() / 2;
    pairwise(&v[..mid]) + pairwise(&v[mid..])
}

/// Permutation-invariant arithmetic mean; 0 for an empty slice.
pub fn det_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        det_sum(values) / values.len() as f64
    }
}

/// Mean and its standard error, `s / sqrt(M)` with the unbiased sample
/// deviation. A single sample has standard error 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { mean: 0.0, se: 0.0 };

    pub fn from_samples(values: &[f64]) -> Self {
        let m = values.len();
        let mean = det_mean(values);
        if m < 2 {
            return Estimate { mean, se: 0.0 };
        }
        let sq: Vec<f64> = values.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = det_sum(&sq) / (m - 1) as f64;
        Estimate {
            mean,
            se: (var / m as f64).sqrt(),
        }
    }
}

/// Ordinary least-squares line `y = intercept + slope x` with a two-sided
/// confidence interval on the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
}

/// Fits `y` against `x`; needs at least 3 points for a finite interval.
pub fn fit_line(x: &[f64], y: &[f64], confidence: f64) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_se, half) = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let r = b - intercept - slope * a;
                r * r
            })
            .sum();
        let se = (rss / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0)
            .map(|d| d.inverse_cdf(0.5 + confidence / 2.0))
            .unwrap_or(f64::INFINITY);
        (se, t * se)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Some(LineFit {
        slope,
        intercept,
        slope_se,
        ci_low: slope - half,
        ci_high: slope + half,
        confidence,
    })
}

/// Slope of `log(y)` against `log(x)`.
pub fn log_log_fit(x: &[f64], y: &[f64], confidence: f64) -> Option<LineFit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly, confidence)
}

/// Observed order between errors at step sizes `h_coarse` and `h_fine`.
pub fn observed_order(h_coarse: f64, e_coarse: f64, h_fine: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

/// Composite trapezoid rule on a possibly nonuniform grid.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tt, yy)| 0.5 * (tt[1] - tt[0]) * (yy[0] + yy[1]))
        .sum()
}

/// Running trapezoid integral, starting at 0.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    if !t.is_empty() {
        out.push(0.0);
    }
    for k in 1..t.len().min(y.len()) {
        acc += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
        out.push(acc);
    }
    out
}
