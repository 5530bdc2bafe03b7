//! Moving-window selection and rescaled log-spacings.

use crate::error::{Error, Result};
use crate::model::{Dataset, LogSpacings, Metric, Window};

fn check_query(dataset: &Dataset, t: &[f64], h: f64) -> Result<()> {
    if t.len() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            expected: dataset.dim(),
            got: t.len(),
        });
    }
    if !(h >= 0.0) {
        return Err(Error::Domain(format!("window radius must be non-negative, got {h}")));
    }
    Ok(())
}

/// Collects the responses whose covariates lie in the closed ball `B(t, h)`.
///
/// Boundary points (`d(x_i, t) == h`) are members. Responses are sorted with
/// a stable total order so equal values keep their dataset order.
pub fn select_window(dataset: &Dataset, t: &[f64], h: f64, metric: Metric) -> Result<Window> {
    check_query(dataset, t, h)?;
    let members: Vec<usize> = dataset
        .iter()
        .enumerate()
        .filter(|(_, (x, _))| metric.distance(x, t) <= h)
        .map(|(i, _)| i)
        .collect();
    if members.is_empty() {
        return Err(Error::EmptyWindow { h });
    }
    let mut sorted_responses: Vec<f64> = members.iter().map(|&i| dataset.response(i)).collect();
    sorted_responses.sort_by(f64::total_cmp);
    Ok(Window {
        center: t.to_vec(),
        radius: h,
        members,
        sorted_responses,
        n_total: dataset.len(),
    })
}

/// Proportion of design points in `B(t, h)`. Zero is a valid answer.
pub fn phi(dataset: &Dataset, t: &[f64], h: f64, metric: Metric) -> Result<f64> {
    check_query(dataset, t, h)?;
    if dataset.is_empty() {
        return Ok(0.0);
    }
    let count = dataset
        .iter()
        .filter(|(x, _)| metric.distance(x, t) <= h)
        .count();
    Ok(count as f64 / dataset.len() as f64)
}

/// Rescaled log-spacings of the `k` largest responses of a window.
pub fn log_spacings(window: &Window, k: usize) -> Result<LogSpacings> {
    spacings_from_sorted(window.sorted_responses(), k)
}

pub(crate) fn spacings_from_sorted(sorted: &[f64], k: usize) -> Result<LogSpacings> {
    let m = sorted.len();
    if k == 0 || k >= m {
        return Err(Error::InsufficientData { k, m });
    }
    let threshold_index = m - k - 1;
    let floor = sorted[threshold_index];
    if !(floor > 0.0) {
        return Err(Error::NonPositiveResponse { value: floor });
    }
    // tail[0] = Z_{m,m}, tail[k] = Z_{m-k,m}
    let values = sorted[threshold_index..]
        .iter()
        .rev()
        .collect::<Vec<_>>()
        .windows(2)
        .enumerate()
        .map(|(j, pair)| {
            let i = (j + 1) as f64;
            // ln of ratio, so equal neighbours give exactly 0
            i * (pair[0] / pair[1]).ln()
        })
        .collect();
    Ok(LogSpacings {
        values,
        threshold_index: m - k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_dataset() -> Dataset {
        let xs: Vec<Vec<f64>> = (1..=10).map(|i| vec![i as f64 / 10.0]).collect();
        let ys: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        Dataset::new(xs, ys).unwrap()
    }

    fn brute_members(d: &Dataset, t: &[f64], h: f64, metric: Metric) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..d.len() {
            if metric.distance(d.covariate(i), t) <= h {
                out.push(i);
            }
        }
        out
    }

    #[test]
    fn one_dimensional_window() {
        let d = line_dataset();
        let w = select_window(&d, &[0.5], 0.15, Metric::Sup).unwrap();
        assert_eq!(w.members(), brute_members(&d, &[0.5], 0.15, Metric::Sup).as_slice());
        assert_eq!(w.members(), &[3, 4, 5]);
        assert_eq!(w.size(), 3);
        assert_eq!(w.phi(), 0.3);
        assert_eq!(w.sorted_responses(), &[4.0, 5.0, 6.0]);
        assert_eq!(phi(&d, &[0.5], 0.15, Metric::Sup).unwrap(), 0.3);
    }

    #[test]
    fn covering_radius_takes_everything() {
        let d = line_dataset();
        let w = select_window(&d, &[0.5], 10.0, Metric::Euclidean).unwrap();
        assert_eq!(w.size(), 10);
        assert_eq!(w.phi(), 1.0);
    }

    #[test]
    fn far_center_is_empty() {
        let d = line_dataset();
        let err = select_window(&d, &[50.0], 0.1, Metric::Sup).unwrap_err();
        assert!(matches!(err, Error::EmptyWindow { .. }));
        assert_eq!(phi(&d, &[50.0], 0.1, Metric::Sup).unwrap(), 0.0);
    }

    #[test]
    fn zero_radius_off_design() {
        let d = line_dataset();
        assert_eq!(phi(&d, &[0.55], 0.0, Metric::Sup).unwrap(), 0.0);
    }

    #[test]
    fn boundary_ties_included() {
        let d = Dataset::new(vec![vec![0.0], vec![1.0], vec![2.0]], vec![1.0, 2.0, 3.0]).unwrap();
        let w = select_window(&d, &[1.0], 1.0, Metric::Sup).unwrap();
        assert_eq!(w.size(), 3);
    }

    #[test]
    fn wrong_dimension() {
        let d = line_dataset();
        assert!(matches!(
            select_window(&d, &[0.5, 0.5], 0.1, Metric::Sup),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn spacings_of_powers_of_two() {
        let w = Window::from_responses(vec![8.0, 1.0, 4.0, 2.0]).unwrap();
        let c = log_spacings(&w, 3).unwrap();
        let l2 = 2f64.ln();
        let expected = [l2, 2.0 * l2, 3.0 * l2];
        for (a, b) in c.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(c.k(), 3);
        assert_eq!(c.threshold_index(), 1);
    }

    #[test]
    fn equal_responses_give_zero_spacings() {
        let w = Window::from_responses(vec![3.0; 6]).unwrap();
        let c = log_spacings(&w, 5).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn k_out_of_range() {
        let w = Window::from_responses(vec![1.0, 2.0, 4.0, 8.0]).unwrap();
        assert_eq!(log_spacings(&w, 4).unwrap_err(), Error::InsufficientData { k: 4, m: 4 });
        assert_eq!(log_spacings(&w, 0).unwrap_err(), Error::InsufficientData { k: 0, m: 4 });
    }

    #[test]
    fn non_positive_threshold() {
        let err = spacings_from_sorted(&[-1.0, 0.0, 2.0, 3.0], 2).unwrap_err();
        assert_eq!(err, Error::NonPositiveResponse { value: 0.0 });
    }
}
