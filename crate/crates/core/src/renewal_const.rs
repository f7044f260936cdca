//! Monte-Carlo estimation of the tail constant through the exponential-time
//! decomposition, and the ladder-height Wald check on the tilted process.
//!
//! With `Theta ~ Exp(1)` independent of the path,
//! `A_inf = A_Theta + e^{xi_Theta} A~` where `A~` is an independent copy of
//! `A_inf`, and
//!
//! ```text
//! C = E[ A_inf^chi - (e^{xi_Theta} A~)^chi ] / (chi m),   m = -phi'(chi).
//! ```

use crate::error::{Error, Result};
use crate::levy_model::{esscher_tilt, phi, phi_prime, CramerSolution, LevyModel};
use crate::path_sim::{finite_functional, perpetuity_draw, sample_increment, Horizon, Step};
use crate::rng::{derive_seed, substream};
use crate::stats::{batch_means, mean, mean_se, CompensatedSum, Estimate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const SEED_TAG_HORIZON: u64 = 1;
const SEED_TAG_TAIL_COPY: u64 = 2;
const SEED_TAG_LADDER: u64 = 3;
const SE_BATCHES: usize = 20;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub c_hat: f64,
    pub c_se: f64,
    pub m: f64,
    pub chi: f64,
    pub n: usize,
    pub step: Step,
    pub tol: f64,
    /// Mean of `A_inf^chi`.
    pub mean_a_chi: f64,
    /// Mean of `(e^{xi_Theta} A~)^chi = (A_inf - A_Theta)^chi`.
    pub mean_shifted_chi: f64,
    /// Mean of the per-replicate difference.
    pub mean_difference: f64,
}

fn check_cramer(model: &LevyModel, cramer: &CramerSolution) -> Result<()> {
    let at = phi(model, cramer.chi)?;
    if at.abs() > 1e-8 {
        return Err(Error::Domain(format!("chi = {} is not a root for {model} (phi = {at:e})", cramer.chi)));
    }
    if !(cramer.tilt_mean_m > 0.0) {
        return Err(Error::Domain(format!("tilted drift m = {} must be positive", cramer.tilt_mean_m)));
    }
    Ok(())
}

/// `x^chi - y^chi` for `x = y + d`, `d >= 0`, without cancellation.
fn power_gap(y: f64, d: f64, chi: f64) -> f64 {
    if y <= 0.0 {
        return d.powf(chi);
    }
    y.powf(chi) * (chi * (d / y).ln_1p()).exp_m1()
}

/// Monte-Carlo estimate of the tail constant `C`.
pub fn estimate_constant(
    model: &LevyModel,
    cramer: &CramerSolution,
    n: usize,
    h: f64,
    tol: f64,
    seed: u64,
) -> Result<ConstantEstimate> {
    model.validate()?;
    check_cramer(model, cramer)?;
    if n < 2 {
        return Err(Error::Domain("estimate_constant needs n >= 2".into()));
    }
    let chi = cramer.chi;
    let horizon_seed = derive_seed(seed, SEED_TAG_HORIZON);
    let copy_seed = derive_seed(seed, SEED_TAG_TAIL_COPY);
    let draws = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let head = finite_functional(model, Horizon::Exponential, h, &mut substream(horizon_seed, i))?;
            let copy = perpetuity_draw(model, h, tol, &mut substream(copy_seed, i), i)?;
            let shifted = head.xi_end.exp() * copy;
            let full = head.integral + shifted;
            Ok((full.powf(chi), shifted.powf(chi), power_gap(shifted, head.integral, chi)))
        })
        .collect::<Result<Vec<_>>>()?;

    let diffs: Vec<f64> = draws.iter().map(|d| d.2).collect();
    let mut a_chi = CompensatedSum::default();
    let mut s_chi = CompensatedSum::default();
    for d in &draws {
        a_chi.add(d.0);
        s_chi.add(d.1);
    }
    let est = batch_means(&diffs, SE_BATCHES);
    let scale = chi * cramer.tilt_mean_m;
    Ok(ConstantEstimate {
        c_hat: est.mean / scale,
        c_se: est.se / scale,
        m: cramer.tilt_mean_m,
        chi,
        n,
        step: if model.jump_params().is_some() { Step::Exact } else { Step::Grid(h) },
        tol,
        mean_a_chi: a_chi.value() / n as f64,
        mean_shifted_chi: s_chi.value() / n as f64,
        mean_difference: est.mean,
    })
}

/// `m = -phi'(chi)`.
pub fn tilted_drift(model: &LevyModel, cramer: &CramerSolution) -> Result<f64> {
    Ok(-phi_prime(model, cramer.chi)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftCheck {
    pub m: f64,
    /// Mean tilted skeleton increment divided by `h`.
    pub mc_mean: Estimate,
    pub agrees: bool,
}

/// Compares `m` with the simulated mean increment of the tilted process
/// (4 standard errors).
pub fn tilted_drift_check(model: &LevyModel, cramer: &CramerSolution, h: f64, n: usize, seed: u64) -> Result<DriftCheck> {
    let m = tilted_drift(model, cramer)?;
    let tilted = esscher_tilt(model, cramer.chi)?;
    let incs: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| sample_increment(&tilted, h, &mut substream(seed, i)) / h)
        .collect();
    let mc_mean = mean_se(&incs);
    Ok(DriftCheck { m, agrees: mc_mean.z_score(m) <= 4.0, mc_mean })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaldReport {
    pub model: String,
    pub tilted_model: String,
    pub step: f64,
    pub n: usize,
    pub mean_height: Estimate,
    pub mean_epoch: Estimate,
    /// `h m`, the mean skeleton increment.
    pub step_mean: f64,
    pub ratio: f64,
    pub ratio_se: f64,
    pub timeouts: usize,
    pub pass: bool,
}

/// First strict ascending ladder epoch and height of the tilted skeleton, or
/// `None` past `max_steps`.
fn ladder<R: rand::Rng + ?Sized>(model: &LevyModel, h: f64, max_steps: usize, rng: &mut R) -> Option<(f64, f64)> {
    let mut x = 0.0;
    for j in 1..=max_steps {
        x += sample_increment(model, h, rng);
        if x > 0.0 {
            return Some((x, j as f64));
        }
    }
    None
}

/// Wald's identity `E H = (h m) E tau` for the first ladder of the
/// `h`-skeleton of the tilted process. PASS when the ratio is within three
/// delta-method standard errors of 1.
pub fn wald_ladder_check(
    model: &LevyModel,
    cramer: &CramerSolution,
    h: f64,
    n: usize,
    max_steps: usize,
    seed: u64,
) -> Result<WaldReport> {
    check_cramer(model, cramer)?;
    let tilted = esscher_tilt(model, cramer.chi)?;
    if !(h > 0.0) || n < 2 {
        return Err(Error::Domain("wald check needs h > 0 and n >= 2".into()));
    }
    let ladder_seed = derive_seed(seed, SEED_TAG_LADDER);
    let results: Vec<Option<(f64, f64)>> = (0..n as u64)
        .into_par_iter()
        .map(|i| ladder(&tilted, h, max_steps, &mut substream(ladder_seed, i)))
        .collect();
    let timeouts = results.iter().filter(|r| r.is_none()).count();
    if timeouts as f64 > 0.001 * n as f64 {
        return Err(Error::LadderTimeout { timeouts, n });
    }
    let heights: Vec<f64> = results.iter().flatten().map(|r| r.0).collect();
    let epochs: Vec<f64> = results.iter().flatten().map(|r| r.1).collect();
    let hs = mean_se(&heights);
    let ts = mean_se(&epochs);
    let step_mean = h * cramer.tilt_mean_m;
    let ratio = hs.mean / (step_mean * ts.mean);

    // delta method for a ratio of correlated means
    let k = heights.len() as f64;
    let (mh, mt) = (mean(&heights), mean(&epochs));
    let cov = heights.iter().zip(&epochs).map(|(a, b)| (a - mh) * (b - mt)).sum::<f64>() / (k - 1.0) / k;
    let rel_var = (hs.se / hs.mean).powi(2) + (ts.se / ts.mean).powi(2) - 2.0 * cov / (hs.mean * ts.mean);
    let ratio_se = ratio * rel_var.max(0.0).sqrt();

    Ok(WaldReport {
        model: model.to_string(),
        tilted_model: tilted.to_string(),
        step: h,
        n,
        mean_height: hs,
        mean_epoch: ts,
        step_mean,
        ratio,
        ratio_se,
        timeouts,
        pass: (ratio - 1.0).abs() <= 3.0 * ratio_se,
    })
}
