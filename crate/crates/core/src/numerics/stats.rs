//! Moment statistics for trajectory samples.

use serde::{Deserialize, Serialize};

/// Population moments of a sample. Kurtosis is excess kurtosis, so a
/// Gaussian gives 0. When the variance vanishes the standardized
/// moments are undefined; they are reported as 0 with `degenerate` set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub degenerate: bool,
}

/// Computes mean, population variance, skewness and excess kurtosis.
pub fn moments(samples: &[f64]) -> Moments {
    assert!(!samples.is_empty(), "moments need at least one sample");
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    if m2 <= 0.0 {
        return Moments {
            mean,
            variance: 0.0,
            skewness: 0.0,
            excess_kurtosis: 0.0,
            degenerate: true,
        };
    }
    Moments {
        mean,
        variance: m2,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        degenerate: false,
    }
}
