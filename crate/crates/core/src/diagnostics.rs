//! Checks that rescaled log-spacings look like scaled standard exponentials.

use crate::error::{Error, Result};
use crate::model::{check_negative, check_positive, LogSpacings};
use crate::special::chi2_sf;

/// Default number of equiprobable cells.
pub const DEFAULT_BINS: usize = 10;

/// Minimum expected count per cell.
pub const MIN_EXPECTED_PER_BIN: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Chi2Test {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub counts: Vec<usize>,
}

/// Exp(1) cell of `v` among `bins` equiprobable cells with boundaries
/// `-ln(1 - j / bins)`.
fn exponential_cell(v: f64, bins: usize) -> usize {
    let u = -(-v).exp_m1();
    ((u * bins as f64) as usize).min(bins - 1)
}

/// Pearson chi-square distance of `C_i / gamma_hat` to Exp(1).
///
/// `gamma_hat` is taken as given, so `df = bins - 1`; when it is estimated
/// from the same spacings the test is conservative.
pub fn chi2_exponential(spacings: &LogSpacings, gamma_hat: f64, bins: usize) -> Result<Chi2Test> {
    check_positive("gamma_hat", gamma_hat)?;
    if bins < 2 {
        return Err(Error::Domain(format!("need at least 2 bins, got {bins}")));
    }
    let k = spacings.k();
    let needed = MIN_EXPECTED_PER_BIN * bins;
    if k < needed {
        return Err(Error::TooFewSpacings { k, needed, bins });
    }
    let mut counts = vec![0usize; bins];
    for c in spacings.values() {
        counts[exponential_cell(c / gamma_hat, bins)] += 1;
    }
    let expected = k as f64 / bins as f64;
    let statistic = counts
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum::<f64>();
    let df = bins - 1;
    Ok(Chi2Test {
        statistic,
        df,
        p_value: chi2_sf(statistic, df as f64),
        counts,
    })
}

/// Approximate mean `gamma + b (i / (k + 1))^{-rho}` of `C_i`.
pub fn theoretical_spacing_mean(i: usize, k: usize, gamma: f64, b: f64, rho: f64) -> Result<f64> {
    if i == 0 || i > k {
        return Err(Error::Domain(format!("spacing index {i} outside 1..={k}")));
    }
    check_positive("gamma", gamma)?;
    check_negative("rho", rho)?;
    Ok(gamma + b * (i as f64 / (k + 1) as f64).powf(-rho))
}

/// Pairs `(-ln(1 - i/(k+1)), (C/gamma_hat)_(i))` for an exponential QQ plot.
pub fn exponential_qq(spacings: &LogSpacings, gamma_hat: f64) -> Result<Vec<(f64, f64)>> {
    check_positive("gamma_hat", gamma_hat)?;
    let mut observed: Vec<f64> = spacings.values().iter().map(|c| c / gamma_hat).collect();
    observed.sort_by(f64::total_cmp);
    let k1 = (observed.len() + 1) as f64;
    Ok(observed
        .into_iter()
        .enumerate()
        .map(|(i, o)| (-(-((i + 1) as f64) / k1).ln_1p(), o))
        .collect())
}

/// Ordinary least-squares slope of observed on theoretical quantiles.
pub fn qq_slope(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxy, sxx) = pairs.iter().fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spacings(v: Vec<f64>) -> LogSpacings {
        LogSpacings::from_values(v).unwrap()
    }

    #[test]
    fn perfect_fit_is_zero() {
        let bins = 10;
        let per_cell = 7;
        let mut v = Vec::new();
        for j in 0..bins {
            let mid = -(1.0 - (j as f64 + 0.5) / bins as f64).ln();
            v.extend(std::iter::repeat_n(mid * 0.4, per_cell));
        }
        let t = chi2_exponential(&spacings(v), 0.4, bins).unwrap();
        assert_eq!(t.counts, vec![per_cell; bins]);
        assert!(t.statistic.abs() < 1e-12);
        assert_eq!(t.df, 9);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_spacings_fill_one_cell() {
        let k = 80;
        let bins = 10;
        let t = chi2_exponential(&spacings(vec![1.0; k]), 1.0, bins).unwrap();
        assert_eq!(t.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert!((t.statistic - (k * (bins - 1)) as f64).abs() < 1e-9);
        assert!(t.p_value < 1e-50);
    }

    #[test]
    fn rescaling_is_exact() {
        let v: Vec<f64> = (1..=60).map(|i| (i as f64 * 0.37).sin().abs() * 2.0).collect();
        let a = chi2_exponential(&spacings(v.clone()), 0.8, 6).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| x * 4.0).collect();
        let b = chi2_exponential(&spacings(scaled), 3.2, 6).unwrap();
        assert_eq!(a.statistic, b.statistic);
    }

    #[test]
    fn too_few_spacings() {
        assert_eq!(
            chi2_exponential(&spacings(vec![1.0; 49]), 1.0, 10).unwrap_err(),
            Error::TooFewSpacings { k: 49, needed: 50, bins: 10 }
        );
        assert!(chi2_exponential(&spacings(vec![1.0; 49]), 0.0, 2).is_err());
    }

    #[test]
    fn spacing_means() {
        for i in [1, 5, 9] {
            assert_eq!(theoretical_spacing_mean(i, 9, 0.3, 0.0, -1.0).unwrap(), 0.3);
        }
        let v = theoretical_spacing_mean(1, 9, 0.3, 0.03, -1.0).unwrap();
        assert!((v - 0.303).abs() < 1e-15);
        let k = 100_000;
        let top = theoretical_spacing_mean(k, k, 0.5, 0.1, -1.0).unwrap();
        assert!((top - 0.6).abs() < 1e-5);
        assert!(theoretical_spacing_mean(0, 9, 0.3, 0.0, -1.0).is_err());
        assert!(theoretical_spacing_mean(10, 9, 0.3, 0.0, -1.0).is_err());
    }

    #[test]
    fn qq_pairs() {
        let one = exponential_qq(&spacings(vec![0.6]), 2.0).unwrap();
        assert!((one[0].0 - 2f64.ln()).abs() < 1e-15);
        assert_eq!(one[0].1, 0.3);

        let k = 50;
        let exact: Vec<f64> = (1..=k)
            .map(|i| -(1.0 - i as f64 / (k + 1) as f64).ln())
            .rev()
            .collect();
        let pairs = exponential_qq(&spacings(exact), 1.0).unwrap();
        for (x, y) in &pairs {
            assert!((x - y).abs() < 1e-13);
        }
        assert!((qq_slope(&pairs) - 1.0).abs() < 1e-12);
    }
}
