//! Exact laws of `A_inf` for the Brownian and compound-Poisson families.

use crate::error::{Error, Result};
use crate::levy_model::LevyModel;
use crate::specfun::{log_gamma, ln_beta, reg_inc_beta, reg_inc_gamma};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExactLaw {
    /// `A = scale / G` with `G ~ Gamma(m, 1)`.
    InverseGamma { m: f64, scale: f64 },
    /// `A = 1 / B` with `B ~ Beta(p, q)`.
    InverseBeta { p: f64, q: f64 },
}

/// The law of `A_inf` for `model`, when known.
pub fn exact_law_of(model: &LevyModel) -> Result<ExactLaw> {
    model.validate()?;
    match *model {
        LevyModel::BrownianDrift { sigma, nu } => {
            let s2 = sigma * sigma;
            Ok(ExactLaw::InverseGamma { m: -2.0 * nu / s2, scale: 2.0 / s2 })
        }
        LevyModel::CompoundPoissonDrift { a, b } => Ok(ExactLaw::InverseBeta { p: 1.0 - a, q: a + b - 1.0 }),
        LevyModel::CompoundPoisson { rate, scale, drift } => {
            // only the raw form of the (a, b) family is covered
            let a = rate + 1.0 - scale;
            if drift == -1.0 && rate > 0.0 && 0.0 < a && a < 1.0 {
                Ok(ExactLaw::InverseBeta { p: 1.0 - a, q: rate })
            } else {
                Err(Error::NoClosedForm(model.to_string()))
            }
        }
        LevyModel::StableSubordinatorDrift { .. } => Err(Error::NoClosedForm(model.to_string())),
    }
}

impl ExactLaw {
    /// Tail index of the law (equal to the Cramér root of the model).
    pub fn index(&self) -> f64 {
        match *self {
            ExactLaw::InverseGamma { m, .. } => m,
            ExactLaw::InverseBeta { p, .. } => p,
        }
    }

    /// `P(A > t)`.
    pub fn tail(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return 1.0;
        }
        match *self {
            ExactLaw::InverseGamma { m, scale } => reg_inc_gamma(m, scale / t).expect("valid law"),
            ExactLaw::InverseBeta { p, q } => {
                if t <= 1.0 {
                    1.0
                } else {
                    reg_inc_beta(p, q, 1.0 / t).expect("valid law")
                }
            }
        }
    }

    /// `P(A <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.tail(t)
    }

    /// `C` in `P(A > t) ~ C t^(-index)`.
    pub fn tail_constant(&self) -> f64 {
        match *self {
            ExactLaw::InverseGamma { m, scale } => (m * scale.ln() - m.ln() - log_gamma(m).expect("m > 0")).exp(),
            ExactLaw::InverseBeta { p, q } => (-p.ln() - ln_beta(p, q).expect("p, q > 0")).exp(),
        }
    }

    /// `E A^alpha`, infinite for `alpha >= index`.
    pub fn moment(&self, alpha: f64) -> f64 {
        if alpha == 0.0 {
            return 1.0;
        }
        if alpha >= self.index() {
            return f64::INFINITY;
        }
        let lg = |x: f64| log_gamma(x).expect("positive argument");
        match *self {
            ExactLaw::InverseGamma { m, scale } => (alpha * scale.ln() + lg(m - alpha) - lg(m)).exp(),
            ExactLaw::InverseBeta { p, q } => (lg(p - alpha) + lg(p + q) - lg(p) - lg(p + q - alpha)).exp(),
        }
    }
}

pub fn tail(law: &ExactLaw, t: f64) -> f64 {
    law.tail(t)
}

pub fn tail_constant(law: &ExactLaw) -> f64 {
    law.tail_constant()
}

pub fn exact_moment(law: &ExactLaw, alpha: f64) -> f64 {
    law.moment(alpha)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const IG11: ExactLaw = ExactLaw::InverseGamma { m: 1.0, scale: 1.0 };
    const IB: ExactLaw = ExactLaw::InverseBeta { p: 0.5, q: 0.5 };

    #[test]
    fn laws_of_examples() {
        match exact_law_of(&LevyModel::brownian(2f64.sqrt(), -1.0).unwrap()).unwrap() {
            // sqrt(2)^2 is 2 only up to rounding
            ExactLaw::InverseGamma { m, scale } => {
                assert!((m - 1.0).abs() < 1e-15 && (scale - 1.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(exact_law_of(&LevyModel::compound_poisson(0.5, 1.0).unwrap()).unwrap(), IB);
        assert!(matches!(exact_law_of(&LevyModel::stable(0.5, 2.0).unwrap()), Err(Error::NoClosedForm(_))));
        let raw = LevyModel::compound_poisson_raw(0.5, 1.0, -1.0).unwrap();
        assert_eq!(exact_law_of(&raw).unwrap(), IB);
    }

    #[test]
    fn tail_examples() {
        assert!((tail(&IG11, 1.0) - (1.0 - (-1f64).exp())).abs() < 1e-14);
        assert!((tail(&IG11, 1.0) - 0.632_121).abs() < 1e-6);
        assert_eq!(tail(&IB, 1.0), 1.0);
        assert_eq!(tail(&IB, 0.3), 1.0);
        assert!((tail(&IB, 4.0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tail_constant_examples() {
        assert!((tail_constant(&IG11) - 1.0).abs() < 1e-14);
        assert!((tail_constant(&IB) - 2.0 / PI).abs() < 1e-14);
        let law = exact_law_of(&LevyModel::brownian(1.0, -1.0).unwrap()).unwrap();
        assert_eq!(law, ExactLaw::InverseGamma { m: 2.0, scale: 2.0 });
        assert!((tail_constant(&law) - 2.0).abs() < 1e-13);
    }

    /// `t^m P(A > t)` as `t -> inf` by quadrature of the density near zero,
    /// after the substitution that removes the `w^(m-1)` singularity.
    fn quadrature_constant(law: &ExactLaw) -> f64 {
        let x = 1e-12;
        let simpson = |f: &dyn Fn(f64) -> f64| {
            let n = 2000;
            let h = 1.0 / n as f64;
            let mut s = f(0.0) + f(1.0);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            s * h / 3.0
        };
        match *law {
            // Gamma(1) = 1, Gamma(2) = 1
            ExactLaw::InverseGamma { m, scale } => {
                let gamma_m = if m == 1.0 || m == 2.0 { 1.0 } else { panic!("oracle only for m in {{1, 2}}") };
                scale.powf(m) / (m * gamma_m) * simpson(&|y: f64| (-x * y.powf(1.0 / m)).exp())
            }
            // B(1/2, 1/2) = pi
            ExactLaw::InverseBeta { p, q } => {
                assert!(p == 0.5 && q == 0.5);
                1.0 / (p * PI) * simpson(&|y: f64| (1.0 - x * y.powf(1.0 / p)).powf(q - 1.0))
            }
        }
    }

    #[test]
    fn tail_constants_agree_with_quadrature() {
        for law in [IG11, IB, ExactLaw::InverseGamma { m: 2.0, scale: 2.0 }] {
            let q = quadrature_constant(&law);
            assert!((q - tail_constant(&law)).abs() < 1e-8, "{law:?}: {q}");
        }
    }

    #[test]
    fn tail_ratio_converges() {
        for (t, tol) in [(1e2, 0.05), (1e3, 0.005), (1e4, 0.0005)] {
            let ratio = tail(&IG11, t) * t / tail_constant(&IG11);
            assert!((ratio - 1.0).abs() < tol, "t={t}: {ratio}");
        }
    }

    #[test]
    fn tail_is_monotone() {
        for law in [IG11, IB] {
            let mut prev = 1.0;
            for i in 1..400 {
                let t = 0.01 * 1.05f64.powi(i);
                let v = tail(&law, t);
                assert!(v <= prev + 1e-15);
                prev = v;
            }
        }
        assert!(tail(&IG11, 1e-6) > 1.0 - 1e-12);
    }

    #[test]
    fn moment_examples() {
        assert!((exact_moment(&IG11, 0.5) - PI.sqrt()).abs() < 1e-12);
        assert!((exact_moment(&IG11, 0.5) - 1.772_454).abs() < 1e-6);
        assert_eq!(exact_moment(&IG11, 0.0), 1.0);
        assert_eq!(exact_moment(&IB, 0.0), 1.0);
        assert_eq!(exact_moment(&IG11, 1.0), f64::INFINITY);
        assert!((exact_moment(&IG11, 0.9) - 9.513_507_698_668_731).abs() < 1e-9);
        // E[B^-1/4] for B ~ Beta(1/2, 1/2)
        let want = (crate::specfun::log_gamma(0.25).unwrap() - crate::specfun::log_gamma(0.5).unwrap()
            - crate::specfun::log_gamma(0.75).unwrap())
        .exp();
        assert!((exact_moment(&IB, 0.25) - want).abs() < 1e-12);
    }

    #[test]
    fn moment_finite_iff_below_index() {
        for law in [IG11, IB, ExactLaw::InverseGamma { m: 2.0, scale: 2.0 }] {
            let chi = law.index();
            for k in 0..20 {
                let a = chi * k as f64 / 10.0;
                assert_eq!(exact_moment(&law, a).is_finite(), a < chi, "{law:?} alpha={a}");
            }
        }
    }
}
