//! Weighted log-spacings estimators and their normal confidence intervals.

use crate::asymptotics;
use crate::error::{Error, Result};
use crate::model::{check_negative, Interval, LogSpacings, TailFit, Window};
use crate::special::normal_quantile;
use crate::weights::{zipf_mu, WeightScheme};
use crate::window::log_spacings;

fn weighted_mean(values: &[f64], weights: &[f64]) -> Result<(f64, f64)> {
    let weight_sum: f64 = weights.iter().sum();
    if weight_sum == 0.0 || !weight_sum.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    let num: f64 = values.iter().zip(weights).map(|(c, w)| c * w).sum();
    Ok((num / weight_sum, weight_sum))
}

/// `sum_i C_i W(i/k) / sum_i W(i/k)` for a continuous weight function.
pub fn estimate_family(spacings: &LogSpacings, scheme: &WeightScheme) -> Result<TailFit> {
    if scheme.is_discrete_only() {
        return Err(Error::DiscreteOnly("zipf"));
    }
    scheme.check()?;
    let weights = scheme.discrete_weights(spacings.k());
    fit(spacings, &weights, scheme)
}

/// `sum_i C_i mu_i / sum_i mu_i`.
///
/// `scheme` names the continuous weight the `mu_i` approximate; it supplies
/// the asymptotic variance of the fit.
pub fn estimate_extended(
    spacings: &LogSpacings,
    mu: &[f64],
    scheme: &WeightScheme,
) -> Result<TailFit> {
    if mu.len() != spacings.k() {
        return Err(Error::Domain(format!(
            "{} weights supplied for {} spacings",
            mu.len(),
            spacings.k()
        )));
    }
    fit(spacings, mu, scheme)
}

fn fit(spacings: &LogSpacings, weights: &[f64], scheme: &WeightScheme) -> Result<TailFit> {
    let (gamma_hat, weight_sum) = weighted_mean(spacings.values(), weights)?;
    Ok(TailFit {
        gamma_hat,
        k: spacings.k(),
        h: None,
        m: None,
        scheme: scheme.clone(),
        weight_sum,
        av: asymptotics::av(scheme)?,
        ab: None,
        ci: None,
    })
}

/// Any shipped scheme from a window: Zipf through its exact discrete weights,
/// the others through `W(i/k)`.
pub fn estimate(window: &Window, k: usize, scheme: &WeightScheme) -> Result<TailFit> {
    let spacings = log_spacings(window, k)?;
    estimate_spacings(&spacings, scheme).map(|f| f.with_window(window))
}

/// Like [`estimate`], from precomputed spacings.
pub fn estimate_spacings(spacings: &LogSpacings, scheme: &WeightScheme) -> Result<TailFit> {
    match scheme {
        WeightScheme::Zipf => estimate_extended(spacings, &zipf_mu(spacings.k()), scheme),
        _ => estimate_family(spacings, scheme),
    }
}

/// Conditional Hill estimator.
pub fn estimate_hill(window: &Window, k: usize) -> Result<TailFit> {
    estimate(window, k, &WeightScheme::Hill)
}

/// Conditional Zipf estimator.
pub fn estimate_zipf(window: &Window, k: usize) -> Result<TailFit> {
    estimate(window, k, &WeightScheme::Zipf)
}

/// Least-squares slope of `log Z_{m-i+1,m}` on `tau_i = sum_{j=i}^{m} 1/j`
/// over the `k` largest responses.
///
/// Algebraically identical to [`estimate_zipf`]; computed here from the
/// regression form directly.
pub fn zipf_least_squares(window: &Window, k: usize) -> Result<f64> {
    let sorted = window.sorted_responses();
    let m = sorted.len();
    if k == 0 || k >= m {
        return Err(Error::InsufficientData { k, m });
    }
    if let Some(&z) = sorted[m - k..].iter().find(|z| !(**z > 0.0)) {
        return Err(Error::NonPositiveResponse { value: z });
    }
    // tau[i-1] = sum_{j=i}^{m} 1/j for i = 1..k
    let mut tail: f64 = ((k + 1)..=m).rev().map(|j| 1.0 / j as f64).sum();
    let mut tau = vec![0.0; k];
    for i in (1..=k).rev() {
        tail += 1.0 / i as f64;
        tau[i - 1] = tail;
    }
    let mean = tau.iter().sum::<f64>() / k as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, t) in tau.iter().enumerate() {
        let centered = t - mean;
        num += centered * sorted[m - 1 - i].ln();
        den += centered * t;
    }
    Ok(num / den)
}

/// Attaches the asymptotic bias multiplier for a given `rho`.
pub fn with_bias(mut fit: TailFit, rho: f64) -> Result<TailFit> {
    fit.ab = Some(asymptotics::ab_av(&fit.scheme, rho)?.ab);
    Ok(fit)
}

/// Normal interval `center -/+ z gamma_hat sqrt(AV / k)`.
///
/// `center` is `gamma_hat`, or `gamma_hat - b AB` when a bias value `b` is
/// supplied; that correction needs `rho` unless the fit already carries `AB`.
pub fn confidence_interval(
    fit: &TailFit,
    rho: Option<f64>,
    b: Option<f64>,
    level: f64,
) -> Result<Interval> {
    if !(0.0..1.0).contains(&level) {
        return Err(Error::Domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    if fit.k == 0 || !(fit.av > 0.0) {
        return Err(Error::Domain("fit has no usable asymptotic variance".into()));
    }
    let center = match b {
        None => fit.gamma_hat,
        Some(b) => {
            let ab = match (fit.ab, rho) {
                (_, Some(rho)) => {
                    check_negative("rho", rho)?;
                    asymptotics::ab_av(&fit.scheme, rho)?.ab
                }
                (Some(ab), None) => ab,
                (None, None) => return Err(Error::MissingRho),
            };
            fit.gamma_hat - b * ab
        }
    };
    let z = normal_quantile(0.5 + level / 2.0);
    let half = z * fit.gamma_hat.abs() * (fit.av / fit.k as f64).sqrt();
    Ok(Interval {
        lower: center - half,
        upper: center + half,
        level,
    })
}
