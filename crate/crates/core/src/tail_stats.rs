//! Empirical tail diagnostics: Hill's estimator, the smoothed Cramér curve
//! and its plateau, and Kolmogorov-Smirnov distances.

use crate::error::{Error, Result};
use crate::stats::mean_se;
use serde::{Deserialize, Serialize};

/// Asymptotic Kolmogorov-Smirnov constant at level 0.01.
pub const KS_C_001: f64 = 1.628;

/// Number of strided sub-batches behind the plateau standard error.
pub const PLATEAU_BATCHES: usize = 10;
/// Lower plateau window edge, as a quantile of the sample.
pub const PLATEAU_LOWER_QUANTILE: f64 = 0.95;
/// The upper plateau edge leaves this many exceedances above it.
pub const PLATEAU_TOP_EXCEEDANCES: usize = 50;
pub const PLATEAU_MIN_TAIL: usize = 500;
const PLATEAU_GRID: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub chi_hat: f64,
    pub chi_se: f64,
    pub c_hat: f64,
    pub c_se: f64,
    pub k_order_stats: usize,
    pub n: usize,
    /// Index used to build the plateau estimate of `c_hat`.
    pub chi_for_constant: f64,
}

/// `ceil(n^(2/3))`, capped at `n - 1`.
pub fn default_k(n: usize) -> usize {
    let k = (n as f64).powf(2.0 / 3.0).ceil() as usize;
    k.min(n.saturating_sub(1)).max(1)
}

/// Hill's estimator from the `k` largest values of a descending sample.
/// Returns `(chi_hat, chi_hat / sqrt(k))`.
pub fn hill_estimate(sorted_desc: &[f64], k: usize) -> Result<(f64, f64)> {
    let n = sorted_desc.len();
    if k == 0 || k >= n {
        return Err(Error::Domain(format!("Hill needs 1 <= k < n, got k={k}, n={n}")));
    }
    if sorted_desc.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("Hill needs finite positive values".into()));
    }
    if sorted_desc.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Domain("Hill input must be sorted in descending order".into()));
    }
    let threshold = sorted_desc[k];
    if sorted_desc[0] == threshold {
        return Err(Error::DegenerateInput("top k+1 order statistics are all equal".into()));
    }
    let mean_log = sorted_desc[..k].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64;
    let chi = 1.0 / mean_log;
    Ok((chi, chi / (k as f64).sqrt()))
}

fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `(v, r(v), r~(v))` on a grid, with `r(v) = e^{chi v} P(A > e^v)` and
/// `r~ = r * K`, `K(t) = e^{-t} 1{t > 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub v: f64,
    pub r: f64,
    pub r_smooth: f64,
}

fn check_curve_args(chi: f64, grid: &[f64]) -> Result<()> {
    if !(chi > 0.0 && chi.is_finite()) {
        return Err(Error::Domain(format!("smoothed curve needs chi > 0, got {chi}")));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Cramér curve of the empirical distribution.
///
/// Against the empirical measure the kernel integral has the closed form
/// `r~(t) = e^{chi t} / (n (1 + chi)) * sum_i exp((1 + chi) (min(v_i, t) - t))`
/// where `v_i = ln x_i`, which is evaluated in one sweep over the grid.
pub fn smoothed_cramer_curve(values: &[f64], chi: f64, grid: &[f64]) -> Result<Vec<CurvePoint>> {
    check_curve_args(chi, grid)?;
    if values.is_empty() || values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("curve needs a nonempty sample of positive values".into()));
    }
    let mut logs: Vec<f64> = values.iter().map(|x| x.ln()).collect();
    logs.sort_by(f64::total_cmp);
    let n = logs.len();
    let nf = n as f64;
    let rate = 1.0 + chi;

    let mut out = Vec::with_capacity(grid.len());
    let mut below = 0usize; // logs[..below] < t
    let mut acc = 0.0; // sum over those of exp(rate (v_i - t))
    let mut prev_t = f64::NEG_INFINITY;
    for &t in grid {
        if prev_t.is_finite() {
            acc *= (-rate * (t - prev_t)).exp();
        }
        while below < n && logs[below] < t {
            acc += (rate * (logs[below] - t)).exp();
            below += 1;
        }
        prev_t = t;
        let above_or_at = (n - below) as f64;
        // strictly above t for the survival function itself
        let strictly_above = n - logs.partition_point(|&v| v <= t);
        let growth = (chi * t).exp();
        out.push(CurvePoint {
            v: t,
            r: growth * strictly_above as f64 / nf,
            r_smooth: growth * (acc + above_or_at) / (nf * rate),
        });
    }
    Ok(out)
}

/// Cramér curve of a known tail function `t -> P(A > t)`, by Simpson
/// quadrature of `int_0^inf e^{-u} r(v - u) du`.
pub fn smoothed_curve_from_tail(tail: impl Fn(f64) -> f64, chi: f64, grid: &[f64]) -> Result<Vec<CurvePoint>> {
    check_curve_args(chi, grid)?;
    let r = |v: f64| (chi * v).exp() * tail(v.exp());
    let simpson = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| {
        let n = 4000;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    };
    Ok(grid
        .iter()
        .map(|&t| {
            let integrand = |u: f64| (-u).exp() * r(t - u);
            let upper = 60.0 + chi * t.max(0.0);
            // split at u = t, where tails supported on [1, inf) have a kink
            let r_smooth = if t > 0.0 && t < upper {
                simpson(0.0, t, &integrand) + simpson(t, upper, &integrand)
            } else {
                simpson(0.0, upper, &integrand)
            };
            CurvePoint { v: t, r: r(t), r_smooth }
        })
        .collect())
}

/// Average of the smoothed curve over a set of grid points.
pub fn plateau_average(points: &[CurvePoint]) -> f64 {
    points.iter().map(|p| p.r_smooth).sum::<f64>() / points.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauEstimate {
    pub c_hat: f64,
    pub c_se: f64,
    /// Window `[v_lo, v_hi]` in log scale.
    pub window: (f64, f64),
}

/// Window on the log scale from the 0.95 quantile up to the point with 50
/// exceedances.
pub fn plateau_window(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if n <= PLATEAU_TOP_EXCEEDANCES {
        return Err(Error::InsufficientTail(format!("only {n} values")));
    }
    let lo = sorted[((PLATEAU_LOWER_QUANTILE * n as f64).ceil() as usize).clamp(1, n) - 1];
    let hi = sorted[n - PLATEAU_TOP_EXCEEDANCES - 1];
    let exceed = n - sorted.partition_point(|&v| v <= lo);
    if exceed < PLATEAU_MIN_TAIL {
        return Err(Error::InsufficientTail(format!(
            "{exceed} values exceed the window start, need {PLATEAU_MIN_TAIL}"
        )));
    }
    if !(hi > lo) || !(lo > 0.0) {
        return Err(Error::InsufficientTail("plateau window is empty".into()));
    }
    Ok((lo.ln(), hi.ln()))
}

/// Plateau estimate of `C`: the mean of `r~` over the window, with a
/// standard error from 10 strided sub-batches.
pub fn estimate_c_plateau(values: &[f64], chi: f64) -> Result<PlateauEstimate> {
    if !(chi > 0.0) {
        return Err(Error::Domain(format!("plateau needs chi > 0, got {chi}")));
    }
    let (lo, hi) = plateau_window(values)?;
    let grid: Vec<f64> = (0..PLATEAU_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (PLATEAU_GRID - 1) as f64)
        .collect();
    let c_hat = plateau_average(&smoothed_cramer_curve(values, chi, &grid)?);
    let sub: Vec<f64> = (0..PLATEAU_BATCHES)
        .map(|b| {
            let part: Vec<f64> = values.iter().skip(b).step_by(PLATEAU_BATCHES).copied().collect();
            smoothed_cramer_curve(&part, chi, &grid).map(|c| plateau_average(&c))
        })
        .collect::<Result<_>>()?;
    Ok(PlateauEstimate { c_hat, c_se: mean_se(&sub).se, window: (lo, hi) })
}

/// Hill index plus plateau constant. The constant uses `chi_for_constant`
/// when given (e.g. the solved Cramér root), else the Hill estimate.
pub fn fit_tail(values: &[f64], k: Option<usize>, chi_for_constant: Option<f64>) -> Result<TailFit> {
    let sorted = sorted_desc(values);
    let k = k.unwrap_or_else(|| default_k(values.len()));
    let (chi_hat, chi_se) = hill_estimate(&sorted, k)?;
    let chi_c = chi_for_constant.unwrap_or(chi_hat);
    let plateau = estimate_c_plateau(values, chi_c)?;
    Ok(TailFit {
        chi_hat,
        chi_se,
        c_hat: plateau.c_hat,
        c_se: plateau.c_se,
        k_order_stats: k,
        n: values.len(),
        chi_for_constant: chi_c,
    })
}

/// KS statistic and the 1% critical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical: f64,
}

impl KsResult {
    pub fn rejects(&self) -> bool {
        self.statistic > self.critical
    }
}

/// Two-sample sup distance between empirical CDFs.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsResult> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Domain("KS needs two nonempty samples".into()));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n && j < m {
        let v = a[i].min(b[j]);
        while i < n && a[i] == v {
            i += 1;
        }
        while j < m && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let (nf, mf) = (n as f64, m as f64);
    Ok(KsResult { statistic: d, critical: KS_C_001 * ((nf + mf) / (nf * mf)).sqrt() })
}

/// One-sample sup distance to a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if xs.is_empty() {
        return Err(Error::Domain("KS needs a nonempty sample".into()));
    }
    let mut a = xs.to_vec();
    a.sort_by(f64::total_cmp);
    let n = a.len() as f64;
    let d = a.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    });
    Ok(KsResult { statistic: d, critical: KS_C_001 / n.sqrt() })
}

/// `v,r,r_smooth` CSV for plotting.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from("v,r,r_smooth\n");
    for p in points {
        s.push_str(&format!("{},{},{}\n", p.v, p.r, p.r_smooth));
    }
    s
}
