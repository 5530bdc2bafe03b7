//! Weight functions `W(s)` on `(0, 1]` and the discrete weights `mu_{i,k}`.
//!
//! The estimators evaluate `W` at `s = i/k`, so `s = 1` is part of the domain.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::check_negative;
use crate::quadrature::integrate_unit;

/// Weighting of the rescaled log-spacings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightScheme {
    /// Constant weight, the conditional Hill estimator.
    Hill,
    /// Least-squares slope of the Pareto quantile plot. Estimated through
    /// exact discrete weights; `W(s) = -ln s` only drives the asymptotics.
    Zipf,
    /// Bias-cancelling Hill/Zipf blend at an assumed `rho_star`.
    HillZipf { rho_star: f64 },
    /// Minimum-variance unbiased weight at an assumed `rho_star`.
    Optimal { rho_star: f64 },
    /// `alpha W_1 + (1 - alpha) W_2`.
    Combination {
        alpha: f64,
        first: Box<WeightScheme>,
        second: Box<WeightScheme>,
    },
}

impl WeightScheme {
    pub fn hill_zipf(rho_star: f64) -> Result<Self> {
        check_negative("rho_star", rho_star)?;
        Ok(WeightScheme::HillZipf { rho_star })
    }

    pub fn optimal(rho_star: f64) -> Result<Self> {
        check_negative("rho_star", rho_star)?;
        Ok(WeightScheme::Optimal { rho_star })
    }

    /// The assumed second-order parameter, for schemes that carry one.
    pub fn rho_star(&self) -> Option<f64> {
        match self {
            WeightScheme::HillZipf { rho_star } | WeightScheme::Optimal { rho_star } => {
                Some(*rho_star)
            }
            _ => None,
        }
    }

    /// Continuous weight `W(s)` for `0 < s <= 1`.
    pub fn weight(&self, s: f64) -> Result<f64> {
        check_unit(s)?;
        Ok(self.weight_unchecked(s))
    }

    pub(crate) fn weight_unchecked(&self, s: f64) -> f64 {
        match self {
            WeightScheme::Hill => 1.0,
            WeightScheme::Zipf => -s.ln(),
            WeightScheme::HillZipf { rho_star } => hz(s, *rho_star),
            WeightScheme::Optimal { rho_star } => opt(s, *rho_star),
            WeightScheme::Combination {
                alpha,
                first,
                second,
            } => alpha * first.weight_unchecked(s) + (1.0 - alpha) * second.weight_unchecked(s),
        }
    }

    /// True for schemes estimated only through discrete weights.
    pub fn is_discrete_only(&self) -> bool {
        matches!(self, WeightScheme::Zipf)
    }

    /// Weights applied to `C_1..C_k`: exact `mu^Z` for Zipf, `W(i/k)` otherwise.
    pub fn discrete_weights(&self, k: usize) -> Vec<f64> {
        match self {
            WeightScheme::Zipf => zipf_mu(k),
            _ => {
                let kf = k as f64;
                (1..=k).map(|i| self.weight_unchecked(i as f64 / kf)).collect()
            }
        }
    }

    /// Validates the parameters of this scheme and every component.
    pub fn check(&self) -> Result<()> {
        match self {
            WeightScheme::Hill | WeightScheme::Zipf => Ok(()),
            WeightScheme::HillZipf { rho_star } | WeightScheme::Optimal { rho_star } => {
                check_negative("rho_star", *rho_star)
            }
            WeightScheme::Combination {
                alpha,
                first,
                second,
            } => {
                if !alpha.is_finite() {
                    return Err(Error::Domain(format!("alpha must be finite, got {alpha}")));
                }
                first.check()?;
                second.check()
            }
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightScheme::Hill => write!(f, "hill"),
            WeightScheme::Zipf => write!(f, "zipf"),
            WeightScheme::HillZipf { rho_star } => write!(f, "hz({rho_star})"),
            WeightScheme::Optimal { rho_star } => write!(f, "opt({rho_star})"),
            WeightScheme::Combination {
                alpha,
                first,
                second,
            } => write!(f, "{alpha}*{first}+{}*{second}", 1.0 - alpha),
        }
    }
}

fn check_unit(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("weight argument must lie in (0, 1], got {s}")))
    }
}

fn hz(s: f64, rho_star: f64) -> f64 {
    1.0 / rho_star - (1.0 - 1.0 / rho_star) * s.ln()
}

fn opt(s: f64, rho: f64) -> f64 {
    (rho - 1.0) / (rho * rho) * (rho - 1.0 + (1.0 - 2.0 * rho) * s.powf(-rho))
}

pub fn weight_hill(s: f64) -> Result<f64> {
    WeightScheme::Hill.weight(s)
}

/// Continuous Zipf weight `-ln s`.
pub fn weight_zipf(s: f64) -> Result<f64> {
    WeightScheme::Zipf.weight(s)
}

/// `1/rho* - (1 - 1/rho*) ln s`
pub fn weight_hz(s: f64, rho_star: f64) -> Result<f64> {
    check_unit(s)?;
    check_negative("rho_star", rho_star)?;
    Ok(hz(s, rho_star))
}

/// `((rho-1)/rho^2) (rho - 1 + (1 - 2 rho) s^{-rho})` at `rho = rho*`.
pub fn weight_opt(s: f64, rho_star: f64) -> Result<f64> {
    check_unit(s)?;
    check_negative("rho_star", rho_star)?;
    Ok(opt(s, rho_star))
}

/// Exact Zipf weight `mu_{i,k} = sum_{l=i+1}^{k} 1/l` (zero at `i = k`).
pub fn weight_zipf_mu(i: usize, k: usize) -> Result<f64> {
    if i == 0 || i > k {
        return Err(Error::Domain(format!("Zipf weight index {i} outside 1..={k}")));
    }
    Ok(((i + 1)..=k).rev().map(|l| 1.0 / l as f64).sum())
}

/// All Zipf weights `mu_{1,k}, ..., mu_{k,k}`.
pub fn zipf_mu(k: usize) -> Vec<f64> {
    let mut mu = vec![0.0; k];
    for i in (1..k).rev() {
        mu[i - 1] = mu[i] + 1.0 / (i + 1) as f64;
    }
    mu
}

/// `alpha W_1 + (1 - alpha) W_2`.
pub fn combine(first: WeightScheme, second: WeightScheme, alpha: f64) -> Result<WeightScheme> {
    if first == second {
        return Err(Error::IdenticalSchemes);
    }
    let scheme = WeightScheme::Combination {
        alpha,
        first: Box::new(first),
        second: Box::new(second),
    };
    scheme.check()?;
    Ok(scheme)
}

/// The `alpha` that zeroes `alpha AB_1 + (1 - alpha) AB_2`.
pub fn alpha_unbias(ab1: f64, ab2: f64) -> Result<f64> {
    if ab1 == ab2 {
        return Err(Error::EqualBiases(ab1));
    }
    Ok(ab2 / (ab2 - ab1))
}

/// Combination of two schemes with zero asymptotic bias at `rho`.
pub fn combine_unbiased(first: WeightScheme, second: WeightScheme, rho: f64) -> Result<WeightScheme> {
    if first == second {
        return Err(Error::IdenticalSchemes);
    }
    let ab1 = crate::asymptotics::ab_av(&first, rho)?.ab;
    let ab2 = crate::asymptotics::ab_av(&second, rho)?.ab;
    let alpha = alpha_unbias(ab1, ab2).map_err(|_| Error::IdenticalSchemes)?;
    combine(first, second, alpha)
}

/// Numeric checks of normalization and `2 + delta` integrability (`delta = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightReport {
    /// Quadrature of `W` over `(0, 1)`.
    pub integral: Option<f64>,
    /// Quadrature of `|W|^3` over `(0, 1)`.
    pub cubic_moment: Option<f64>,
    pub problems: Vec<String>,
}

impl WeightReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }
}

pub const NORMALIZATION_TOL: f64 = 1e-8;

pub fn validate_weight(scheme: &WeightScheme) -> WeightReport {
    let mut problems = Vec::new();
    if let Err(e) = scheme.check() {
        problems.push(e.to_string());
        return WeightReport {
            integral: None,
            cubic_moment: None,
            problems,
        };
    }
    let integral = match integrate_unit(|s| scheme.weight_unchecked(s)) {
        Ok(v) => {
            if (v - 1.0).abs() > NORMALIZATION_TOL {
                problems.push(format!("weight integrates to {v}, expected 1"));
            }
            Some(v)
        }
        Err(e) => {
            problems.push(format!("normalization: {e}"));
            None
        }
    };
    let cubic_moment = match integrate_unit(|s| scheme.weight_unchecked(s).abs().powi(3)) {
        Ok(v) => Some(v),
        Err(e) => {
            problems.push(format!("|W|^3 not integrable: {e}"));
            None
        }
    };
    WeightReport {
        integral,
        cubic_moment,
        problems,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn hill_is_constant() {
        assert_eq!(weight_hill(0.5).unwrap(), 1.0);
        assert_eq!(weight_hill(0.001).unwrap(), 1.0);
        assert!(weight_hill(0.0).is_err());
        assert!(weight_hill(1.5).is_err());
    }

    #[test]
    fn zipf_mu_small_cases() {
        assert!(close(weight_zipf_mu(1, 3).unwrap(), 5.0 / 6.0, 1e-15));
        assert!(close(weight_zipf_mu(2, 3).unwrap(), 1.0 / 3.0, 1e-15));
        assert_eq!(weight_zipf_mu(3, 3).unwrap(), 0.0);
        for k in [1, 7, 250] {
            assert_eq!(weight_zipf_mu(k, k).unwrap(), 0.0);
        }
        assert!(weight_zipf_mu(0, 3).is_err());
        assert!(weight_zipf_mu(4, 3).is_err());
    }

    #[test]
    fn zipf_mu_vector_matches_pointwise() {
        let mu = zipf_mu(40);
        for (i, m) in mu.iter().enumerate() {
            assert!(close(*m, weight_zipf_mu(i + 1, 40).unwrap(), 1e-14));
        }
    }

    #[test]
    fn zipf_mu_at_large_k() {
        let k = 1000;
        let mu = weight_zipf_mu(1, k).unwrap();
        // direct harmonic oracle: H_1000 - 1
        let harmonic: f64 = (1..=k).map(|l| 1.0 / l as f64).sum();
        assert!(close(mu, harmonic - 1.0, 1e-12));
        let upper = (k as f64).ln();
        let lower = upper - (1.0 - 1.0 / k as f64);
        assert!(mu <= upper && mu >= lower, "{lower} <= {mu} <= {upper}");
    }

    #[test]
    fn hz_values() {
        let s = (-1f64).exp();
        assert!(close(weight_hz(s, -1.0).unwrap(), 1.0, 1e-15));
        assert!(close(weight_hz(0.3, -1.0).unwrap(), -1.0 - 2.0 * 0.3f64.ln(), 1e-15));
        for rho_star in [-0.2, -1.0, -3.0] {
            assert!(close(weight_hz(1.0, rho_star).unwrap(), 1.0 / rho_star, 1e-15));
        }
        assert!(weight_hz(0.5, 0.5).is_err());
    }

    #[test]
    fn opt_values() {
        for s in [0.1, 0.25, 0.9] {
            assert!(close(weight_opt(s, -1.0).unwrap(), 4.0 - 6.0 * s, 1e-14));
        }
        assert!(close(weight_opt(1.0, -1.0).unwrap(), -2.0, 1e-15));
        assert!(weight_opt(0.5, 0.0).is_err());
    }

    #[test]
    fn hill_zipf_combination_is_hz() {
        // AB(H) = 1/2, AB(Z) = 1/4 at rho = -1
        let alpha = alpha_unbias(0.5, 0.25).unwrap();
        assert!(close(alpha, -1.0, 1e-15));
        let w = combine(WeightScheme::Hill, WeightScheme::Zipf, alpha).unwrap();
        for s in [1e-6, 0.01, 0.3, 0.77, 1.0] {
            assert!(close(w.weight(s).unwrap(), weight_hz(s, -1.0).unwrap(), 1e-13));
        }
    }

    #[test]
    fn combination_identities() {
        let one = combine(WeightScheme::Hill, WeightScheme::Zipf, 1.0).unwrap();
        let zero = combine(WeightScheme::Hill, WeightScheme::Zipf, 0.0).unwrap();
        for s in [0.05, 0.5, 1.0] {
            assert_eq!(one.weight(s).unwrap(), 1.0);
            assert_eq!(zero.weight(s).unwrap(), -s.ln());
        }
        assert_eq!(
            combine(WeightScheme::Hill, WeightScheme::Hill, 0.3).unwrap_err(),
            Error::IdenticalSchemes
        );
        assert_eq!(
            combine_unbiased(WeightScheme::Zipf, WeightScheme::Zipf, -1.0).unwrap_err(),
            Error::IdenticalSchemes
        );
    }

    #[test]
    fn unbiased_combination_from_asymptotics() {
        let w = combine_unbiased(WeightScheme::Hill, WeightScheme::Zipf, -2.0).unwrap();
        for s in [0.1, 0.6] {
            assert!(close(w.weight(s).unwrap(), weight_hz(s, -2.0).unwrap(), 1e-13));
        }
    }

    #[test]
    fn alpha_unbias_edge_cases() {
        assert_eq!(alpha_unbias(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(alpha_unbias(0.3, 0.3).unwrap_err(), Error::EqualBiases(0.3));
    }

    proptest! {
        #[test]
        fn alpha_unbias_cancels(ab1 in -5.0f64..5.0, ab2 in -5.0f64..5.0) {
            prop_assume!((ab1 - ab2).abs() > 1e-3);
            let a = alpha_unbias(ab1, ab2).unwrap();
            prop_assert!((a * ab1 + (1.0 - a) * ab2).abs() < 1e-14 * (1.0 + a.abs()) * 10.0);
        }

        #[test]
        fn zipf_mu_sandwich(k in 2usize..400, frac in 0.0f64..1.0) {
            let i = 1 + ((k - 1) as f64 * frac) as usize;
            prop_assume!(i < k);
            let mu = weight_zipf_mu(i, k).unwrap();
            let gap = -((i as f64) / k as f64).ln() - mu;
            prop_assert!(gap >= -1e-13);
            prop_assert!(gap <= 1.0 / i as f64 - 1.0 / k as f64 + 1e-13);
        }
    }

    #[test]
    fn validation_reports() {
        let hill = validate_weight(&WeightScheme::Hill);
        assert!(hill.is_valid());
        assert!(close(hill.integral.unwrap(), 1.0, 1e-12));
        assert!(close(hill.cubic_moment.unwrap(), 1.0, 1e-12));

        // Gamma(4) = 6
        let zipf = validate_weight(&WeightScheme::Zipf);
        assert!(zipf.is_valid());
        assert!(close(zipf.integral.unwrap(), 1.0, 1e-9));
        assert!(close(zipf.cubic_moment.unwrap(), 6.0, 1e-8));

        let opt = validate_weight(&WeightScheme::optimal(-1.0).unwrap());
        assert!(opt.is_valid());
        assert!(close(opt.integral.unwrap(), 1.0, 1e-12));

        let bad = validate_weight(&WeightScheme::Combination {
            alpha: 2.0,
            first: Box::new(WeightScheme::Hill),
            second: Box::new(WeightScheme::Combination {
                alpha: 0.5,
                first: Box::new(WeightScheme::Hill),
                second: Box::new(WeightScheme::HillZipf { rho_star: 1.0 }),
            }),
        });
        assert!(!bad.is_valid());
    }
}
