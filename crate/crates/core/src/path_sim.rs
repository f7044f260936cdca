//! Path simulation and sampling of exponential functionals.
//!
//! A path is cut into unit blocks. Each block yields `M = exp(xi_1)` and
//! `Q = int_0^1 exp(xi_s) ds`, and the functional is rebuilt from blocks as
//! `A = Q_1 + M_1 Q_2 + M_1 M_2 Q_3 + ...` until the running product drops
//! below the truncation tolerance.
//!
//! Brownian and stable paths live on a grid of step `h`; each cell is
//! integrated with the geometric trapezoid `h e^{x0} (e^{x1-x0} - 1)/(x1-x0)`,
//! which is exact for piecewise-linear exponents. Compound-Poisson paths are
//! simulated event by event and integrated in closed form.

use crate::error::{Error, Result};
use crate::levy_model::LevyModel;
use crate::rng::substream;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

/// Abort a perpetuity replicate after this many blocks.
pub const MAX_BLOCKS: usize = 1_000_000;
pub const DEFAULT_STEP: f64 = 1.0 / 256.0;
pub const DEFAULT_TOL: f64 = 1e-8;

/// Discretization used for a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// Event-driven simulation with no discretization error.
    Exact,
    Grid(f64),
}

impl Step {
    fn for_model(model: &LevyModel, h: f64) -> Step {
        if model.jump_params().is_some() {
            Step::Exact
        } else {
            Step::Grid(h)
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Exact => f.write_str("exact"),
            Step::Grid(h) => write!(f, "{h}"),
        }
    }
}

impl std::str::FromStr for Step {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Step::Exact),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|h| *h > 0.0 && h.is_finite())
                .map(Step::Grid)
                .ok_or_else(|| Error::Format(format!("bad step `{other}`"))),
        }
    }
}

/// Time horizon of a functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Infinite,
    Fixed(f64),
    /// An independent standard exponential time, drawn per replicate.
    Exponential,
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Infinite => f.write_str("infinity"),
            Horizon::Exponential => f.write_str("exp"),
            Horizon::Fixed(t) => write!(f, "{t}"),
        }
    }
}

impl std::str::FromStr for Horizon {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "infinity" | "inf" => Ok(Horizon::Infinite),
            "exp" => Ok(Horizon::Exponential),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|t| *t > 0.0 && t.is_finite())
                .map(Horizon::Fixed)
                .ok_or_else(|| Error::Format(format!("bad horizon `{other}`"))),
        }
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                match self.as_number() {
                    Some(x) => s.serialize_f64(x),
                    None => s.serialize_str(&self.to_string()),
                }
            }
        }
        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                #[derive(Deserialize)]
                #[serde(untagged)]
                enum Repr {
                    Num(f64),
                    Str(String),
                }
                let text = match Repr::deserialize(d)? {
                    Repr::Num(x) => format!("{x}"),
                    Repr::Str(s) => s,
                };
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

impl Step {
    fn as_number(&self) -> Option<f64> {
        match self {
            Step::Grid(h) => Some(*h),
            Step::Exact => None,
        }
    }
}

impl Horizon {
    fn as_number(&self) -> Option<f64> {
        match self {
            Horizon::Fixed(t) => Some(*t),
            _ => None,
        }
    }
}

string_serde!(Step);
string_serde!(Horizon);

/// One unit-time block of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathBlock {
    /// `M = exp(xi_1)`.
    pub m_factor: f64,
    /// `Q = int_0^1 exp(xi_s) ds`.
    pub q_integral: f64,
    pub step: Step,
    pub model: LevyModel,
}

/// Endpoint and exponential integral of a path piece started at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub xi_end: f64,
    pub integral: f64,
}

/// `int_0^dt exp(x0 + (d/dt) s) ds` divided by `exp(x0)`, given `em1 = e^d - 1`.
#[inline]
fn cell_factor(dt: f64, d: f64, em1: f64) -> f64 {
    if d.abs() < 1e-12 {
        dt * (1.0 + 0.5 * d)
    } else {
        dt * em1 / d
    }
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("step must be positive, got {h}")))
    }
}

/// Simulates `xi` on `[0, length]` from 0 and integrates `exp(xi)`.
///
/// Grid models use `floor(length / h)` full cells followed by one short
/// cell, so a shorter horizon consumes a prefix of the same variates as a
/// longer one.
pub fn simulate_segment<R: Rng + ?Sized>(model: &LevyModel, length: f64, h: f64, rng: &mut R) -> Segment {
    match *model {
        LevyModel::BrownianDrift { sigma, nu } => grid_segment(length, h, rng, |dt, rng| {
            let z: f64 = rng.sample(StandardNormal);
            nu * dt + sigma * dt.sqrt() * z
        }),
        LevyModel::StableSubordinatorDrift { alpha, a_drift } => grid_segment(length, h, rng, |dt, rng| {
            a_drift * dt - dt.powf(1.0 / alpha) * sample_stable_one_sided(alpha, rng)
        }),
        _ => {
            let j = model.jump_params().expect("compound Poisson");
            let drift_integral = |dt: f64| {
                if j.drift == 0.0 {
                    dt
                } else {
                    (j.drift * dt).exp_m1() / j.drift
                }
            };
            let mut x = 0.0f64;
            let mut t = 0.0;
            let mut integral = 0.0;
            loop {
                let wait = if j.rate > 0.0 {
                    rng.sample::<f64, _>(Exp1) / j.rate
                } else {
                    f64::INFINITY
                };
                let remaining = length - t;
                let dt = wait.min(remaining);
                integral += x.exp() * drift_integral(dt);
                x += j.drift * dt;
                if wait >= remaining {
                    break;
                }
                t += dt;
                x += rng.sample::<f64, _>(Exp1) / j.scale;
            }
            Segment { xi_end: x, integral }
        }
    }
}

fn grid_segment<R: Rng + ?Sized>(
    length: f64,
    h: f64,
    rng: &mut R,
    mut increment: impl FnMut(f64, &mut R) -> f64,
) -> Segment {
    let full = (length / h * (1.0 + 1e-12)).floor();
    let rem = length - full * h;
    let mut x = 0.0;
    let mut ex = 1.0;
    let mut integral = 0.0;
    let mut cell = |dt: f64, rng: &mut R| {
        let d = increment(dt, rng);
        let em1 = d.exp_m1();
        integral += ex * cell_factor(dt, d, em1);
        ex *= 1.0 + em1;
        x += d;
    };
    for _ in 0..full as u64 {
        cell(h, rng);
    }
    if rem > 1e-12 * h {
        cell(rem, rng);
    }
    Segment { xi_end: x, integral }
}

/// Simulates one unit block.
pub fn sample_block<R: Rng + ?Sized>(model: &LevyModel, h: f64, rng: &mut R) -> Result<PathBlock> {
    check_step(h)?;
    let seg = simulate_segment(model, 1.0, h, rng);
    Ok(PathBlock {
        m_factor: seg.xi_end.exp(),
        q_integral: seg.integral,
        step: Step::for_model(model, h),
        model: *model,
    })
}

/// Exact increment `xi_dt` (in law) for any family.
pub fn sample_increment<R: Rng + ?Sized>(model: &LevyModel, dt: f64, rng: &mut R) -> f64 {
    match *model {
        LevyModel::BrownianDrift { sigma, nu } => {
            let z: f64 = rng.sample(StandardNormal);
            nu * dt + sigma * dt.sqrt() * z
        }
        LevyModel::StableSubordinatorDrift { alpha, a_drift } => {
            a_drift * dt - dt.powf(1.0 / alpha) * sample_stable_one_sided(alpha, rng)
        }
        _ => {
            let j = model.jump_params().expect("compound Poisson");
            let mut x = j.drift * dt;
            if j.rate > 0.0 {
                let mut t = rng.sample::<f64, _>(Exp1) / j.rate;
                while t < dt {
                    x += rng.sample::<f64, _>(Exp1) / j.scale;
                    t += rng.sample::<f64, _>(Exp1) / j.rate;
                }
            }
            x
        }
    }
}

/// Maximum of the skeleton `xi_0 = 0, xi_h, ..., xi_{n h}`.
pub fn skeleton_max<R: Rng + ?Sized>(model: &LevyModel, h: f64, n_steps: usize, rng: &mut R) -> f64 {
    let mut x = 0.0f64;
    let mut best = 0.0f64;
    for _ in 0..n_steps {
        x += sample_increment(model, h, rng);
        best = best.max(x);
    }
    best
}

/// Standard one-sided stable variate, `E exp(-lambda S) = exp(-lambda^alpha)`,
/// by Kanter's representation `S = sin(aU) sin((1-a)U)^((1-a)/a) / sin(U)^(1/a) * E^(-(1-a)/a)`
/// with `U ~ Unif(0, pi)` and `E ~ Exp(1)`.
pub fn sample_stable_one_sided<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = loop {
        let u = PI * rng.random::<f64>();
        if u > 0.0 {
            break u;
        }
    };
    let e: f64 = rng.sample(Exp1);
    let k = (1.0 - alpha) / alpha;
    (alpha * u).sin() * ((1.0 - alpha) * u).sin().powf(k) / u.sin().powf(1.0 / alpha) * e.powf(-k)
}

/// One perpetuity draw of `A_inf`.
pub fn perpetuity_draw<R: Rng + ?Sized>(
    model: &LevyModel,
    h: f64,
    tol: f64,
    rng: &mut R,
    replicate: u64,
) -> Result<f64> {
    let mut a = 0.0;
    let mut log_prod = 0.0f64;
    let log_tol = tol.ln();
    for _ in 0..MAX_BLOCKS {
        let seg = simulate_segment(model, 1.0, h, rng);
        a += log_prod.exp() * seg.integral;
        log_prod += seg.xi_end;
        if log_prod < log_tol {
            return Ok(a);
        }
    }
    Err(Error::NonTermination { replicate, blocks: MAX_BLOCKS })
}

/// A batch of i.i.d. functional draws with everything needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub model: LevyModel,
    pub seed: u64,
    pub step: Step,
    pub truncation_tol: f64,
    pub horizon: Horizon,
}

/// An `A_T` batch together with the endpoints `xi_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteBatch {
    pub batch: SampleBatch,
    pub endpoints: Vec<f64>,
}

fn check_batch_args(model: &LevyModel, n: usize, h: f64) -> Result<()> {
    model.validate()?;
    check_step(h)?;
    if n == 0 {
        return Err(Error::Domain("batch size must be at least 1".into()));
    }
    Ok(())
}

/// Samples `n` independent copies of `A_inf` by the perpetuity recursion.
/// Replicate `i` uses substream `i` of `seed`.
pub fn sample_a_infinity(model: &LevyModel, n: usize, h: f64, tol: f64, seed: u64) -> Result<SampleBatch> {
    check_batch_args(model, n, h)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("truncation tolerance must lie in (0, 1), got {tol}")));
    }
    let values = (0..n as u64)
        .into_par_iter()
        .map(|i| perpetuity_draw(model, h, tol, &mut substream(seed, i), i))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        values,
        model: *model,
        seed,
        step: Step::for_model(model, h),
        truncation_tol: tol,
        horizon: Horizon::Infinite,
    })
}

/// `(A_T, xi_T)` for a path started at 0. For [`Horizon::Exponential`] the
/// time `T ~ Exp(1)` is drawn first from the same stream.
pub fn finite_functional<R: Rng + ?Sized>(model: &LevyModel, horizon: Horizon, h: f64, rng: &mut R) -> Result<Segment> {
    let t = match horizon {
        Horizon::Fixed(t) => t,
        Horizon::Exponential => rng.sample(Exp1),
        Horizon::Infinite => return Err(Error::Domain("finite_functional needs a finite horizon".into())),
    };
    let full = t.floor();
    let mut a = 0.0;
    let mut x = 0.0f64;
    for _ in 0..full as u64 {
        let seg = simulate_segment(model, 1.0, h, rng);
        a += x.exp() * seg.integral;
        x += seg.xi_end;
    }
    let rem = t - full;
    if rem > 0.0 {
        let seg = simulate_segment(model, rem, h, rng);
        a += x.exp() * seg.integral;
        x += seg.xi_end;
    }
    Ok(Segment { xi_end: x, integral: a })
}

/// Samples `n` pairs `(A_T, xi_T)`.
pub fn sample_a_finite(model: &LevyModel, horizon: Horizon, n: usize, h: f64, seed: u64) -> Result<FiniteBatch> {
    check_batch_args(model, n, h)?;
    if horizon == Horizon::Infinite {
        return Err(Error::Domain("use sample_a_infinity for an infinite horizon".into()));
    }
    let segs = (0..n as u64)
        .into_par_iter()
        .map(|i| finite_functional(model, horizon, h, &mut substream(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FiniteBatch {
        batch: SampleBatch {
            values: segs.iter().map(|s| s.integral).collect(),
            model: *model,
            seed,
            step: Step::for_model(model, h),
            truncation_tol: 0.0,
            horizon,
        },
        endpoints: segs.iter().map(|s| s.xi_end).collect(),
    })
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    model: String,
    seed: u64,
    step: Step,
    tol: f64,
    horizon: Horizon,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    endpoints: Option<Vec<f64>>,
}

/// On-disk batch formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchFormat {
    Csv,
    Json,
}

impl SampleBatch {
    /// One value per line after `# key=value` metadata comments.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# model={}\n# seed={}\n# step={}\n# tol={}\n# horizon={}\n# n={}\n",
            self.model,
            self.seed,
            self.step,
            self.truncation_tol,
            self.horizon,
            self.values.len()
        );
        for v in &self.values {
            out.push_str(&format!("{v}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut model = None;
        let mut seed = None;
        let mut step = None;
        let mut tol = None;
        let mut horizon = Horizon::Infinite;
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let Some((k, v)) = meta.trim().split_once('=') else { continue };
                let v = v.trim();
                match k.trim() {
                    "model" => model = Some(v.parse::<LevyModel>()?),
                    "seed" => seed = Some(v.parse::<u64>().map_err(|_| Error::Format(format!("bad seed `{v}`")))?),
                    "step" => step = Some(v.parse::<Step>()?),
                    "tol" => tol = Some(v.parse::<f64>().map_err(|_| Error::Format(format!("bad tol `{v}`")))?),
                    "horizon" => horizon = v.parse()?,
                    _ => {}
                }
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Format(format!("line {}: `{line}` is not a number", lineno + 1)))?;
            values.push(v);
        }
        let missing = |k: &str| Error::Format(format!("missing `# {k}=` header"));
        Self::checked(SampleBatch {
            values,
            model: model.ok_or_else(|| missing("model"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            step: step.ok_or_else(|| missing("step"))?,
            truncation_tol: tol.ok_or_else(|| missing("tol"))?,
            horizon,
        })
    }

    pub fn to_json(&self) -> String {
        self.envelope(None)
    }

    fn envelope(&self, endpoints: Option<&[f64]>) -> String {
        let env = Envelope {
            model: self.model.to_string(),
            seed: self.seed,
            step: self.step,
            tol: self.truncation_tol,
            horizon: self.horizon,
            values: self.values.clone(),
            endpoints: endpoints.map(<[f64]>::to_vec),
        };
        serde_json::to_string(&env).expect("batch serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::checked(SampleBatch {
            values: env.values,
            model: env.model.parse()?,
            seed: env.seed,
            step: env.step,
            truncation_tol: env.tol,
            horizon: env.horizon,
        })
    }

    fn checked(batch: SampleBatch) -> Result<Self> {
        if batch.values.is_empty() {
            return Err(Error::Format("batch has no values".into()));
        }
        if let Some(bad) = batch.values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Format(format!("batch value {bad} is not finite and positive")));
        }
        Ok(batch)
    }

    pub fn render(&self, format: BatchFormat) -> String {
        match format {
            BatchFormat::Csv => self.to_csv(),
            BatchFormat::Json => self.to_json(),
        }
    }

    /// Reads either format, sniffing JSON by its leading brace.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if text.trim_start().starts_with('{') {
            Self::from_json(&text)
        } else {
            Self::from_csv(&text)
        }
    }
}

impl FiniteBatch {
    /// JSON envelope with an extra `endpoints` array.
    pub fn to_json(&self) -> String {
        self.batch.envelope(Some(&self.endpoints))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::{phi, solve_cramer};
    use crate::stats::mean_se;

    fn bm() -> LevyModel {
        LevyModel::brownian(2f64.sqrt(), -1.0).unwrap()
    }
    fn cpp() -> LevyModel {
        LevyModel::compound_poisson(0.5, 1.0).unwrap()
    }

    fn block_stat(model: &LevyModel, n: u64, h: f64, seed: u64, f: impl Fn(&PathBlock) -> f64) -> crate::stats::Estimate {
        let v: Vec<f64> = (0..n)
            .map(|i| f(&sample_block(model, h, &mut substream(seed, i)).unwrap()))
            .collect();
        mean_se(&v)
    }

    #[test]
    fn pure_drift_block_is_deterministic() {
        let b = sample_block(&LevyModel::pure_drift(), 0.1, &mut substream(1, 0)).unwrap();
        assert!((b.m_factor - (-1f64).exp()).abs() < 1e-15);
        assert!((b.q_integral - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert_eq!(b.step, Step::Exact);
    }

    #[test]
    fn grid_drift_cells_are_exact() {
        // a Brownian model with negligible volatility behaves like pure drift
        let m = LevyModel::brownian(1e-300, -1.0).unwrap();
        let b = sample_block(&m, 1.0 / 7.0, &mut substream(1, 0)).unwrap();
        assert!((b.q_integral - (1.0 - (-1f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn martingale_identity_bm() {
        let e = block_stat(&bm(), 100_000, 1.0 / 16.0, 11, |b| b.m_factor);
        assert!(e.z_score(1.0) < 4.0, "{e:?}");
    }

    #[test]
    fn laplace_check_cpp_quarter() {
        let target = (-1.0f64 / 12.0).exp();
        assert!((target - 0.920_044).abs() < 1e-6);
        let e = block_stat(&cpp(), 100_000, 0.1, 12, |b| b.m_factor.powf(0.25));
        assert!(e.z_score(target) < 4.0, "{e:?}");
    }

    #[test]
    fn laplace_check_all_models() {
        let models = [bm(), cpp(), LevyModel::stable(0.5, 2.0).unwrap()];
        for (k, m) in models.iter().enumerate() {
            let chi = solve_cramer(m).unwrap().chi;
            for lambda in [chi / 2.0, chi] {
                let target = (-phi(m, lambda).unwrap()).exp();
                let v: Vec<f64> = (0..100_000u64)
                    .map(|i| (lambda * sample_increment(m, 1.0, &mut substream(20 + k as u64, i))).exp())
                    .collect();
                let e = mean_se(&v);
                assert!(e.z_score(target) < 4.0, "{m} lambda={lambda}: {e:?} vs {target}");
            }
        }
    }

    #[test]
    fn stable_laplace_transform() {
        let n = 1_000_000u64;
        let mut rng = substream(5, 0);
        let draws: Vec<f64> = (0..n).map(|_| sample_stable_one_sided(0.5, &mut rng)).collect();
        assert!(draws.iter().all(|&s| s > 0.0));
        let e1 = mean_se(&draws.iter().map(|s| (-s).exp()).collect::<Vec<_>>());
        let e4 = mean_se(&draws.iter().map(|s| (-4.0 * s).exp()).collect::<Vec<_>>());
        assert!(e1.z_score((-1f64).exp()) < 4.0, "{e1:?}");
        assert!(e4.z_score((-2f64).exp()) < 4.0, "{e4:?}");
    }

    #[test]
    fn stable_laplace_other_indices() {
        for alpha in [0.2, 0.7, 0.9] {
            let mut rng = substream(6, (alpha * 10.0) as u64);
            let v: Vec<f64> = (0..200_000).map(|_| (-2.0 * sample_stable_one_sided(alpha, &mut rng)).exp()).collect();
            let e = mean_se(&v);
            assert!(e.z_score((-(2f64.powf(alpha))).exp()) < 4.0, "alpha={alpha}: {e:?}");
        }
    }

    #[test]
    fn pure_drift_functional_is_one() {
        let b = sample_a_infinity(&LevyModel::pure_drift(), 10, 0.1, 1e-8, 3).unwrap();
        for v in b.values {
            assert!((v - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn pure_drift_finite_horizon() {
        let f = sample_a_finite(&LevyModel::pure_drift(), Horizon::Fixed(1.0), 3, 0.1, 3).unwrap();
        for (a, x) in f.batch.values.iter().zip(&f.endpoints) {
            assert!((a - (1.0 - (-1f64).exp())).abs() < 1e-15);
            assert_eq!(*x, -1.0);
        }
    }

    #[test]
    fn exponential_horizon_identities_bm() {
        let f = sample_a_finite(&bm(), Horizon::Exponential, 100_000, 1.0 / 64.0, 8).unwrap();
        let a = mean_se(&f.batch.values);
        assert!(a.z_score(1.0) < 4.0, "{a:?}");
        let w = mean_se(&f.endpoints.iter().map(|x| x.exp()).collect::<Vec<_>>());
        assert!(w.z_score(1.0) < 4.0, "{w:?}");
    }

    #[test]
    fn exponential_horizon_martingale_cpp() {
        let f = sample_a_finite(&cpp(), Horizon::Exponential, 100_000, 0.1, 9).unwrap();
        let w = mean_se(&f.endpoints.iter().map(|x| (0.5 * x).exp()).collect::<Vec<_>>());
        assert!(w.z_score(1.0) < 4.0, "{w:?}");
    }

    #[test]
    fn batches_are_reproducible() {
        let a = sample_a_infinity(&cpp(), 200, 0.1, 1e-8, 77).unwrap();
        let b = sample_a_infinity(&cpp(), 200, 0.1, 1e-8, 77).unwrap();
        assert_eq!(a, b);
        let c = sample_a_infinity(&cpp(), 200, 0.1, 1e-8, 78).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn finite_prefix_is_below_infinite_draw() {
        for model in [bm(), cpp()] {
            for i in 0..200u64 {
                let inf = perpetuity_draw(&model, 1.0 / 32.0, 1e-10, &mut substream(4, i), i).unwrap();
                for t in [0.5, 1.0, 2.5, 3.0] {
                    let fin = finite_functional(&model, Horizon::Fixed(t), 1.0 / 32.0, &mut substream(4, i)).unwrap();
                    assert!(fin.integral > 0.0);
                    assert!(fin.integral <= inf * (1.0 + 1e-12), "{model} T={t}");
                }
            }
        }
    }

    #[test]
    fn refinement_shrinks_bias() {
        let mean_q = |h: f64| block_stat(&bm(), 20_000, h, 31, |b| b.q_integral).mean;
        let (q6, q8, q10) = (mean_q(1.0 / 64.0), mean_q(1.0 / 256.0), mean_q(1.0 / 1024.0));
        assert!((q6 - q8).abs() > (q8 - q10).abs(), "{q6} {q8} {q10}");
    }

    #[test]
    fn doob_bound_on_running_max() {
        let n = 20_000u64;
        let maxima: Vec<f64> = (0..n)
            .map(|i| skeleton_max(&bm(), 1.0 / 16.0, 40 * 16, &mut substream(40, i)))
            .collect();
        for a in [1.0, 2.0, 3.0] {
            let hits: Vec<f64> = maxima.iter().map(|&m| if m > a { 1.0 } else { 0.0 }).collect();
            let e = mean_se(&hits);
            assert!(e.mean <= (-a).exp() + 3.0 * e.se, "a={a}: {e:?}");
        }
    }

    #[test]
    fn csv_and_json_round_trip() {
        let f = sample_a_finite(&bm(), Horizon::Fixed(2.0), 20, 0.125, 5).unwrap();
        let b = sample_a_infinity(&cpp(), 20, 0.1, 1e-8, 5).unwrap();
        for batch in [&f.batch, &b] {
            assert_eq!(&SampleBatch::from_csv(&batch.to_csv()).unwrap(), batch);
            assert_eq!(&SampleBatch::from_json(&batch.to_json()).unwrap(), batch);
        }
        let v: serde_json::Value = serde_json::from_str(&f.to_json()).unwrap();
        assert_eq!(v["endpoints"].as_array().unwrap().len(), 20);
        assert_eq!(v["step"], 0.125);
        assert_eq!(serde_json::from_str::<serde_json::Value>(&b.to_json()).unwrap()["step"], "exact");
    }

    #[test]
    fn csv_header_errors() {
        assert!(matches!(SampleBatch::from_csv("1.0\n2.0\n"), Err(Error::Format(_))));
        let text = "# model=cpp:a=0.5,b=1\n# seed=1\n# step=exact\n# tol=1e-8\n-1.0\n";
        assert!(matches!(SampleBatch::from_csv(text), Err(Error::Format(_))));
    }
}
