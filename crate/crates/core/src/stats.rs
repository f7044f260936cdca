//! Small Monte-Carlo summary helpers.

use serde::{Deserialize, Serialize};

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// Number of standard errors separating the estimate from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.se
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn mean(values: &[f64]) -> f64 {
    let mut s = CompensatedSum::default();
    values.iter().for_each(|&v| s.add(v));
    s.value() / values.len() as f64
}

/// Sample mean and the i.i.d. standard error `sd / sqrt(n)`.
pub fn mean_se(values: &[f64]) -> Estimate {
    let n = values.len() as f64;
    let m = mean(values);
    let mut ss = CompensatedSum::default();
    values.iter().for_each(|&v| ss.add((v - m) * (v - m)));
    let var = if values.len() > 1 { ss.value() / (n - 1.0) } else { 0.0 };
    Estimate { mean: m, se: (var / n).sqrt() }
}

/// Mean with a batch-means standard error over `batches` contiguous batches.
/// Trailing values that do not fill a batch count towards the mean only.
pub fn batch_means(values: &[f64], batches: usize) -> Estimate {
    let m = mean(values);
    let size = values.len() / batches.max(1);
    if batches < 2 || size == 0 {
        return mean_se(values);
    }
    let means: Vec<f64> = values.chunks_exact(size).take(batches).map(mean).collect();
    Estimate { mean: m, se: mean_se(&means).se }
}
