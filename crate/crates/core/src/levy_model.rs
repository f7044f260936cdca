//! Model families, the Laplace exponent and Cramér's condition.
//!
//! Sign convention throughout: `E exp(lambda xi_t) = exp(-t phi(lambda))`, so
//! `phi` is concave with `phi(0) = 0`, positive on `(0, chi)` and zero at the
//! Cramér root `chi`.

use crate::error::{Error, Result};
use crate::path_sim::{sample_block, Step};
use crate::rng::substream;
use crate::stats::{mean_se, Estimate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A one-dimensional Lévy process from one of the supported families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LevyModel {
    /// `xi_t = sigma B_t + nu t` with `nu < 0`.
    BrownianDrift { sigma: f64, nu: f64 },
    /// `xi_t = -t + (compound Poisson with rate a+b-1 and Exp(b) upward jumps)`,
    /// with `0 < a < 1 < a + b`.
    CompoundPoissonDrift { a: f64, b: f64 },
    /// Raw compound-Poisson form: linear drift plus upward jumps of law
    /// `Exp(scale)` arriving at `rate`. Esscher tilts of the `(a, b)` family
    /// land here.
    CompoundPoisson { rate: f64, scale: f64, drift: f64 },
    /// `xi_t = -S_t + a_drift t` with `S` a standard `alpha`-stable subordinator.
    StableSubordinatorDrift { alpha: f64, a_drift: f64 },
}

/// Jump/drift description of a compound-Poisson model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpParams {
    pub rate: f64,
    pub scale: f64,
    pub drift: f64,
}

impl LevyModel {
    pub fn brownian(sigma: f64, nu: f64) -> Result<Self> {
        LevyModel::BrownianDrift { sigma, nu }.validated()
    }

    pub fn compound_poisson(a: f64, b: f64) -> Result<Self> {
        LevyModel::CompoundPoissonDrift { a, b }.validated()
    }

    pub fn compound_poisson_raw(rate: f64, scale: f64, drift: f64) -> Result<Self> {
        LevyModel::CompoundPoisson { rate, scale, drift }.validated()
    }

    pub fn stable(alpha: f64, a_drift: f64) -> Result<Self> {
        LevyModel::StableSubordinatorDrift { alpha, a_drift }.validated()
    }

    /// The pure-drift path `xi_s = -s` (a compound-Poisson model with no jumps).
    pub fn pure_drift() -> Self {
        LevyModel::CompoundPoisson { rate: 0.0, scale: 1.0, drift: -1.0 }
    }

    /// Checks the family invariants.
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            LevyModel::BrownianDrift { sigma, nu } => {
                if !finite(&[sigma, nu]) || sigma <= 0.0 || nu >= 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "bm needs sigma > 0 and nu < 0, got sigma={sigma}, nu={nu}"
                    )));
                }
            }
            LevyModel::CompoundPoissonDrift { a, b } => {
                if !finite(&[a, b]) || !(0.0 < a && a < 1.0 && a + b > 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "cpp needs 0 < a < 1 < a + b, got a={a}, b={b}"
                    )));
                }
            }
            LevyModel::CompoundPoisson { rate, scale, drift } => {
                if !finite(&[rate, scale, drift]) || rate < 0.0 || scale <= 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "cpp-raw needs rate >= 0 and scale > 0, got rate={rate}, scale={scale}"
                    )));
                }
            }
            LevyModel::StableSubordinatorDrift { alpha, a_drift } => {
                if !finite(&[alpha, a_drift]) || !(0.0 < alpha && alpha < 1.0) || a_drift <= 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "stable needs 0 < alpha < 1 and a > 0, got alpha={alpha}, a={a_drift}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn validated(self) -> Result<Self> {
        self.validate().map(|_| self)
    }

    /// Rate, jump scale and drift for the compound-Poisson families.
    pub fn jump_params(&self) -> Option<JumpParams> {
        match *self {
            LevyModel::CompoundPoissonDrift { a, b } => Some(JumpParams {
                rate: a + b - 1.0,
                scale: b,
                drift: -1.0,
            }),
            LevyModel::CompoundPoisson { rate, scale, drift } => Some(JumpParams { rate, scale, drift }),
            _ => None,
        }
    }

    /// Upper end of the interval on which `phi` is finite.
    pub fn domain_limit(&self) -> f64 {
        match self.jump_params() {
            Some(j) if j.rate > 0.0 => j.scale,
            _ => f64::INFINITY,
        }
    }

    /// Short family tag used in reports.
    pub fn family(&self) -> &'static str {
        match self {
            LevyModel::BrownianDrift { .. } => "bm",
            LevyModel::CompoundPoissonDrift { .. } => "cpp",
            LevyModel::CompoundPoisson { .. } => "cpp-raw",
            LevyModel::StableSubordinatorDrift { .. } => "stable",
        }
    }

    /// Closed-form Cramér root, when the family has one.
    pub fn closed_form_root(&self) -> Option<f64> {
        match *self {
            LevyModel::BrownianDrift { sigma, nu } => Some(-2.0 * nu / (sigma * sigma)),
            LevyModel::StableSubordinatorDrift { alpha, a_drift } => Some(a_drift.powf(1.0 / (alpha - 1.0))),
            _ => {
                let j = self.jump_params()?;
                // -d (s - chi) = r
                (j.drift < 0.0 && j.rate > 0.0).then(|| j.scale + j.rate / j.drift)
            }
        }
    }
}

impl fmt::Display for LevyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LevyModel::BrownianDrift { sigma, nu } => write!(f, "bm:sigma={sigma},nu={nu}"),
            LevyModel::CompoundPoissonDrift { a, b } => write!(f, "cpp:a={a},b={b}"),
            LevyModel::CompoundPoisson { rate, scale, drift } => {
                write!(f, "cpp-raw:rate={rate},scale={scale},drift={drift}")
            }
            LevyModel::StableSubordinatorDrift { alpha, a_drift } => {
                write!(f, "stable:alpha={alpha},a={a_drift}")
            }
        }
    }
}

impl FromStr for LevyModel {
    type Err = Error;

    /// Parses `bm:sigma=<f>,nu=<f>`, `cpp:a=<f>,b=<f>`, `stable:alpha=<f>,a=<f>`
    /// or `cpp-raw:rate=<f>,scale=<f>,drift=<f>`, then checks the invariants.
    fn from_str(spec: &str) -> Result<Self> {
        let err = |reason: String| Error::Parse { spec: spec.to_string(), reason };
        let (family, rest) = spec
            .trim()
            .split_once(':')
            .ok_or_else(|| err("expected `<family>:<key>=<value>,...`".into()))?;
        let mut pairs = Vec::new();
        for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{item}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| err(format!("`{}` is not a number", v.trim())))?;
            pairs.push((k.trim(), v));
        }
        let take = |keys: &[&str]| -> Result<Vec<f64>> {
            if pairs.len() != keys.len() {
                return Err(err(format!("expected keys {keys:?}")));
            }
            keys.iter()
                .map(|key| {
                    pairs
                        .iter()
                        .find(|(k, _)| k == key)
                        .map(|&(_, v)| v)
                        .ok_or_else(|| err(format!("missing key `{key}`")))
                })
                .collect()
        };
        let model = match family.trim() {
            "bm" => {
                let v = take(&["sigma", "nu"])?;
                LevyModel::BrownianDrift { sigma: v[0], nu: v[1] }
            }
            "cpp" => {
                let v = take(&["a", "b"])?;
                LevyModel::CompoundPoissonDrift { a: v[0], b: v[1] }
            }
            "cpp-raw" => {
                let v = take(&["rate", "scale", "drift"])?;
                LevyModel::CompoundPoisson { rate: v[0], scale: v[1], drift: v[2] }
            }
            "stable" => {
                let v = take(&["alpha", "a"])?;
                LevyModel::StableSubordinatorDrift { alpha: v[0], a_drift: v[1] }
            }
            other => return Err(err(format!("unknown family `{other}`"))),
        };
        model.validated()
    }
}

/// Laplace exponent `phi(lambda) = -log E exp(lambda xi_1)`.
///
/// Returns [`Error::PhiInfinite`] where the exponential moment diverges
/// (`lambda >= b` for compound Poisson, `lambda < 0` for the stable family).
pub fn phi(model: &LevyModel, lambda: f64) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be finite, got {lambda}")));
    }
    match *model {
        LevyModel::BrownianDrift { sigma, nu } => Ok(-(0.5 * sigma * sigma * lambda * lambda + nu * lambda)),
        LevyModel::StableSubordinatorDrift { alpha, a_drift } => {
            if lambda < 0.0 {
                Err(Error::PhiInfinite { lambda })
            } else {
                Ok(lambda.powf(alpha) - a_drift * lambda)
            }
        }
        _ => {
            let j = model.jump_params().expect("compound Poisson");
            if j.rate == 0.0 {
                return Ok(-j.drift * lambda);
            }
            if lambda >= j.scale {
                return Err(Error::PhiInfinite { lambda });
            }
            Ok(-j.drift * lambda - j.rate * lambda / (j.scale - lambda))
        }
    }
}

/// Analytic derivative of [`phi`].
pub fn phi_prime(model: &LevyModel, lambda: f64) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be finite, got {lambda}")));
    }
    match *model {
        LevyModel::BrownianDrift { sigma, nu } => Ok(-(sigma * sigma * lambda + nu)),
        LevyModel::StableSubordinatorDrift { alpha, a_drift } => {
            if lambda <= 0.0 {
                // slope is +inf at 0 and the exponent is -inf below it
                Err(Error::Domain(format!(
                    "phi' of the stable family needs lambda > 0, got {lambda}"
                )))
            } else {
                Ok(alpha * lambda.powf(alpha - 1.0) - a_drift)
            }
        }
        _ => {
            let j = model.jump_params().expect("compound Poisson");
            if j.rate == 0.0 {
                return Ok(-j.drift);
            }
            if lambda >= j.scale {
                return Err(Error::PhiInfinite { lambda });
            }
            let gap = j.scale - lambda;
            Ok(-j.drift - j.rate * j.scale / (gap * gap))
        }
    }
}

/// Central-difference derivative of [`phi`], usable for any family.
pub fn phi_prime_numeric(model: &LevyModel, lambda: f64) -> Result<f64> {
    let h = 1e-5 * lambda.abs().max(1e-2);
    Ok((phi(model, lambda + h)? - phi(model, lambda - h)?) / (2.0 * h))
}

/// The Cramér root together with the slope data the renewal argument needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CramerSolution {
    pub chi: f64,
    pub phi_prime_at_chi: f64,
    /// `m = -phi'(chi)`, the drift of the tilted process.
    pub tilt_mean_m: f64,
    pub bracket: (f64, f64),
    pub iterations: u32,
}

const BRACKET_WIDTH: f64 = 1e-12;
const MAX_BRACKET_STEPS: u32 = 200;

/// Finds the unique positive root of `phi`.
///
/// The closed form (when the family has one) only seeds the bracket; the
/// returned root always comes from bisection down to width `1e-12`.
pub fn solve_cramer(model: &LevyModel) -> Result<CramerSolution> {
    model.validate()?;
    let limit = model.domain_limit();
    let no_root = |why: &str| Error::NoRoot(format!("{model}: {why}"));

    let mut guess = model.closed_form_root().filter(|g| g.is_finite() && *g > 0.0).unwrap_or(1.0);
    if guess >= limit {
        guess = 0.5 * limit;
    }

    let mut iterations = 0u32;
    let mut lo = guess;
    while phi(model, lo)? <= 0.0 {
        lo *= 0.5;
        iterations += 1;
        if iterations > MAX_BRACKET_STEPS || lo < f64::MIN_POSITIVE {
            return Err(no_root("phi is not positive near 0 (mean of xi_1 is not negative)"));
        }
    }
    let mut hi = guess;
    loop {
        match phi(model, hi) {
            Ok(v) if v < 0.0 => break,
            Ok(_) => {}
            Err(Error::PhiInfinite { .. }) => break,
            Err(e) => return Err(e),
        }
        hi = if limit.is_finite() { 0.5 * (hi + limit) } else { 2.0 * hi };
        iterations += 1;
        if iterations > 2 * MAX_BRACKET_STEPS || hi >= limit {
            return Err(no_root("phi stays positive on its domain"));
        }
    }
    // hi may sit where phi = -inf only if the bracket walked into the edge,
    // which can only happen for a limit-hugging root; pull it back inside.
    while phi(model, hi).is_err() {
        hi = 0.5 * (lo + hi);
        iterations += 1;
    }
    if phi(model, hi)? >= 0.0 {
        return Err(no_root("sign change not found"));
    }

    while hi - lo > BRACKET_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(model, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let chi = 0.5 * (lo + hi);
    let slope = phi_prime(model, chi)?;
    if slope >= 0.0 {
        return Err(no_root("slope at the root is not negative"));
    }
    Ok(CramerSolution {
        chi,
        phi_prime_at_chi: slope,
        tilt_mean_m: -slope,
        bracket: (lo, hi),
        iterations,
    })
}

/// Exponentially tilted model under `dQ = exp(chi xi_t) dP`, whose exponent is
/// `phi(lambda + chi)`.
pub fn esscher_tilt(model: &LevyModel, chi: f64) -> Result<LevyModel> {
    if let LevyModel::StableSubordinatorDrift { .. } = model {
        return Err(Error::UnsupportedTilt(model.to_string()));
    }
    let at = phi(model, chi)?;
    if at.abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "tilt parameter {chi} is not a root of phi (phi = {at:e})"
        )));
    }
    match *model {
        LevyModel::BrownianDrift { sigma, nu } => Ok(LevyModel::BrownianDrift {
            sigma,
            nu: nu + sigma * sigma * chi,
        }),
        _ => {
            let j = model.jump_params().expect("compound Poisson");
            let scale = j.scale - chi;
            Ok(LevyModel::CompoundPoisson {
                rate: j.rate * j.scale / scale,
                scale,
                drift: j.drift,
            })
        }
    }
}

/// Kesten's conditions for the unit-time pair `(M, Q)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KestenReport {
    pub model: String,
    pub chi: f64,
    pub epsilon: f64,
    /// `exp(-phi(chi))`, which must be exactly 1.
    pub analytic_m_chi: f64,
    /// `(1/eps) exp(-phi(chi + eps))`, an upper bound on `E[M^chi log+ M]`.
    pub log_moment_bound: f64,
    pub mc_m_chi: Estimate,
    pub mc_m_chi_log_plus: Estimate,
    pub mc_q_chi: Estimate,
    pub n_mc: usize,
    pub step: Step,
}

/// Analytic and Monte-Carlo check of `E M^chi = 1`, `E M^chi log+ M < inf`
/// and `E Q^chi < inf`, using `n_mc` unit blocks.
pub fn kesten_report(
    model: &LevyModel,
    chi: f64,
    epsilon: f64,
    n_mc: usize,
    step: f64,
    seed: u64,
) -> Result<KestenReport> {
    if !(epsilon > 0.0) || !(chi > 0.0) || n_mc == 0 {
        return Err(Error::Domain("kesten_report needs chi > 0, epsilon > 0, n_mc >= 1".into()));
    }
    let analytic_m_chi = (-phi(model, chi)?).exp();
    let log_moment_bound = (-phi(model, chi + epsilon)?).exp() / epsilon;

    let blocks = (0..n_mc as u64)
        .into_par_iter()
        .map(|i| sample_block(model, step, &mut substream(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let mut m_chi = Vec::with_capacity(n_mc);
    let mut m_log = Vec::with_capacity(n_mc);
    let mut q_chi = Vec::with_capacity(n_mc);
    for b in &blocks {
        let xi1 = b.m_factor.ln();
        let w = (chi * xi1).exp();
        m_chi.push(w);
        m_log.push(w * xi1.max(0.0));
        q_chi.push(b.q_integral.powf(chi));
    }
    Ok(KestenReport {
        model: model.to_string(),
        chi,
        epsilon,
        analytic_m_chi,
        log_moment_bound,
        mc_m_chi: mean_se(&m_chi),
        mc_m_chi_log_plus: mean_se(&m_log),
        mc_q_chi: mean_se(&q_chi),
        n_mc,
        step: blocks.first().map(|b| b.step).unwrap_or(Step::Exact),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bm() -> LevyModel {
        LevyModel::brownian(2f64.sqrt(), -1.0).unwrap()
    }
    fn cpp() -> LevyModel {
        LevyModel::compound_poisson(0.5, 1.0).unwrap()
    }
    fn stable() -> LevyModel {
        LevyModel::stable(0.5, 2.0).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert!(phi(&bm(), 1.0).unwrap().abs() < 1e-15);
        for m in [bm(), cpp(), stable(), LevyModel::pure_drift()] {
            assert_eq!(phi(&m, 0.0).unwrap(), 0.0);
        }
        assert!((phi(&cpp(), 0.25).unwrap() - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn phi_domain_edges() {
        assert_eq!(phi(&cpp(), 1.0), Err(Error::PhiInfinite { lambda: 1.0 }));
        assert_eq!(phi(&cpp(), 3.0), Err(Error::PhiInfinite { lambda: 3.0 }));
        assert!(matches!(phi(&stable(), -0.1), Err(Error::PhiInfinite { .. })));
        assert!(matches!(phi(&bm(), f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn phi_prime_examples() {
        assert!((phi_prime(&bm(), 1.0).unwrap() + 1.0).abs() < 1e-15);
        assert!((phi_prime(&bm(), 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((phi_prime(&cpp(), 0.5).unwrap() + 1.0).abs() < 1e-14);
        assert!((phi_prime(&stable(), 0.25).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn phi_prime_matches_central_differences() {
        let cases = [(bm(), [0.1, 0.7, 1.3]), (cpp(), [0.1, 0.5, 0.8]), (stable(), [0.05, 0.25, 1.0])];
        for (m, lambdas) in cases {
            for l in lambdas {
                let a = phi_prime(&m, l).unwrap();
                let n = phi_prime_numeric(&m, l).unwrap();
                assert!((a - n).abs() <= 1e-6 * a.abs().max(1.0), "{m} at {l}: {a} vs {n}");
            }
        }
    }

    #[test]
    fn cramer_roots() {
        let s = solve_cramer(&bm()).unwrap();
        assert!((s.chi - 1.0).abs() < 1e-11);
        assert!((s.tilt_mean_m - 1.0).abs() < 1e-10);
        let s = solve_cramer(&cpp()).unwrap();
        assert!((s.chi - 0.5).abs() < 1e-11);
        let s = solve_cramer(&stable()).unwrap();
        assert!((s.chi - 0.25).abs() < 1e-11);
        for m in [bm(), cpp(), stable()] {
            let s = solve_cramer(&m).unwrap();
            assert!(phi(&m, s.chi).unwrap().abs() <= 1e-10);
            assert_eq!(s.tilt_mean_m, -s.phi_prime_at_chi);
            assert!(s.bracket.1 - s.bracket.0 <= 1e-12);
        }
    }

    #[test]
    fn no_root_for_pure_drift() {
        assert!(matches!(solve_cramer(&LevyModel::pure_drift()), Err(Error::NoRoot(_))));
        let up = LevyModel::compound_poisson_raw(1.0, 0.5, -1.0).unwrap(); // mean +1
        assert!(matches!(solve_cramer(&up), Err(Error::NoRoot(_))));
    }

    #[test]
    fn root_solver_handles_general_cpp() {
        let m = LevyModel::compound_poisson_raw(0.3, 2.0, -0.4).unwrap();
        let s = solve_cramer(&m).unwrap();
        assert!((s.chi - (2.0 + 0.3 / -0.4)).abs() < 1e-11);
    }

    #[test]
    fn tilt_examples() {
        let t = esscher_tilt(&bm(), 1.0).unwrap();
        assert_eq!(t, LevyModel::BrownianDrift { sigma: 2f64.sqrt(), nu: -1.0 + 2f64.sqrt().powi(2) });
        assert!((-phi_prime(&t, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(esscher_tilt(&bm(), 0.0).unwrap(), bm());

        let t = esscher_tilt(&cpp(), 0.5).unwrap();
        let j = t.jump_params().unwrap();
        assert!((j.rate - 1.0).abs() < 1e-15 && (j.scale - 0.5).abs() < 1e-15 && j.drift == -1.0);
        assert!((-phi_prime(&t, 0.0).unwrap() - 1.0).abs() < 1e-12);

        assert!(matches!(esscher_tilt(&stable(), 0.25), Err(Error::UnsupportedTilt(_))));
        assert!(matches!(esscher_tilt(&bm(), 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn tilt_exponent_identity() {
        for m in [bm(), cpp()] {
            let chi = solve_cramer(&m).unwrap().chi;
            let t = esscher_tilt(&m, chi).unwrap();
            let top = m.domain_limit().min(3.0) - chi;
            for i in 0..20 {
                let l = top * (i as f64) / 20.5;
                let d = phi(&t, l).unwrap() - phi(&m, l + chi).unwrap();
                assert!(d.abs() < 1e-10, "{m} at {l}: {d}");
            }
        }
    }

    #[test]
    fn kesten_analytic_values() {
        let r = kesten_report(&bm(), 1.0, 0.5, 100, 1.0 / 16.0, 1).unwrap();
        assert!((r.analytic_m_chi - 1.0).abs() <= 1e-12);
        assert!((r.log_moment_bound - 2.0 * 0.75f64.exp()).abs() < 1e-12);
        assert!((r.log_moment_bound - 4.234).abs() < 1e-3);
        assert!(matches!(kesten_report(&cpp(), 0.5, 0.5, 10, 0.1, 1), Err(Error::PhiInfinite { .. })));
    }

    #[test]
    fn parse_grammar() {
        assert_eq!("bm:sigma=1.5,nu=-1".parse::<LevyModel>().unwrap(), LevyModel::BrownianDrift { sigma: 1.5, nu: -1.0 });
        assert_eq!("cpp:b=1,a=0.5".parse::<LevyModel>().unwrap(), cpp());
        assert_eq!("stable:alpha=0.5,a=2".parse::<LevyModel>().unwrap(), stable());
        assert!(matches!("cpp:a=1.5,b=1".parse::<LevyModel>(), Err(Error::InvalidModel(_))));
        assert!(matches!("bm:sigma=1".parse::<LevyModel>(), Err(Error::Parse { .. })));
        assert!(matches!("gauss:x=1".parse::<LevyModel>(), Err(Error::Parse { .. })));
        assert!(matches!("bm:sigma=x,nu=-1".parse::<LevyModel>(), Err(Error::Parse { .. })));
    }

    fn any_model() -> impl Strategy<Value = LevyModel> {
        prop_oneof![
            (0.1f64..3.0, -3.0f64..-0.05).prop_map(|(s, n)| LevyModel::BrownianDrift { sigma: s, nu: n }),
            (0.05f64..0.95, 0.1f64..4.0).prop_map(|(a, b)| LevyModel::CompoundPoissonDrift { a, b: b.max(1.05 - a) }),
            (0.1f64..0.9, 0.2f64..4.0).prop_map(|(al, a)| LevyModel::StableSubordinatorDrift { alpha: al, a_drift: a }),
        ]
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(m in any_model()) {
            let back: LevyModel = m.to_string().parse().unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn phi_is_concave(m in any_model(), u in 0.0f64..1.0, v in 0.0f64..1.0, w in 0.0f64..1.0) {
            let top = m.domain_limit().min(4.0) * 0.999;
            let mut ls = [u * top, v * top, w * top];
            ls.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assume!(ls[2] - ls[0] > 1e-6);
            let [l1, l2, l3] = ls;
            let t = (l2 - l1) / (l3 - l1);
            let interp = (1.0 - t) * phi(&m, l1).unwrap() + t * phi(&m, l3).unwrap();
            let scale = phi(&m, l1).unwrap().abs().max(phi(&m, l3).unwrap().abs()).max(1.0);
            prop_assert!(phi(&m, l2).unwrap() >= interp - 1e-12 * scale);
        }

        #[test]
        fn root_sandwich(m in any_model()) {
            let s = solve_cramer(&m).unwrap();
            prop_assert!(phi(&m, s.chi).unwrap().abs() <= 1e-10);
            prop_assert!(phi(&m, s.chi / 2.0).unwrap() > 0.0);
            if s.chi * 1.1 < m.domain_limit() {
                prop_assert!(phi(&m, s.chi * 1.1).unwrap() < 0.0);
            }
            prop_assert!(s.tilt_mean_m > 0.0);
        }
    }
}
