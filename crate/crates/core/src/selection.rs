//! Joint choice of the window radius `h` and the number of spacings `k`.
//!
//! The criterion is the worst disagreement over a covariate grid between the
//! conditional Hill and Zipf estimates,
//! `min_{h,k} max_{t in T} |hill(t) - zipf(t)|`, with `h` and `k` shared
//! by every grid point.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::estimate_spacings;
use crate::model::{Dataset, Metric};
use crate::weights::WeightScheme;
use crate::window::{select_window, spacings_from_sorted};

/// Objectives closer than this are ties, resolved by smallest `h` then `k`.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// One evaluated `(h, k)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRow {
    pub h: f64,
    pub k: usize,
    /// `max_t |hill - zipf|`; `None` when the pair is infeasible.
    pub objective: Option<f64>,
    /// Grid index of the first point whose window has `m_t <= k`.
    pub infeasible_at: Option<usize>,
    /// Smallest window size over the grid (0 if some window is empty).
    pub min_window: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub h: f64,
    pub k: usize,
    pub objective: f64,
    /// Every candidate pair, `h`-major in input order.
    pub table: Vec<SelectionRow>,
}

/// Hill-minus-Zipf discrepancy of one window's sorted responses.
fn discrepancy(sorted: &[f64], k: usize) -> Result<f64> {
    let spacings = spacings_from_sorted(sorted, k)?;
    let hill = estimate_spacings(&spacings, &WeightScheme::Hill)?.gamma_hat;
    let zipf = estimate_spacings(&spacings, &WeightScheme::Zipf)?.gamma_hat;
    Ok((hill - zipf).abs())
}

fn evaluate_h(
    dataset: &Dataset,
    t_grid: &[Vec<f64>],
    h: f64,
    k_candidates: &[usize],
    metric: Metric,
) -> Result<Vec<SelectionRow>> {
    let mut windows = Vec::with_capacity(t_grid.len());
    for t in t_grid {
        match select_window(dataset, t, h, metric) {
            Ok(w) => windows.push(w.sorted_responses().to_vec()),
            Err(Error::EmptyWindow { .. }) => windows.push(Vec::new()),
            Err(e) => return Err(e),
        }
    }
    let min_window = windows.iter().map(Vec::len).min().unwrap_or(0);
    k_candidates
        .iter()
        .map(|&k| {
            if let Some(i) = windows.iter().position(|w| w.len() <= k || k == 0) {
                return Ok(SelectionRow {
                    h,
                    k,
                    objective: None,
                    infeasible_at: Some(i),
                    min_window,
                });
            }
            let mut worst = 0.0f64;
            for w in &windows {
                worst = worst.max(discrepancy(w, k)?);
            }
            Ok(SelectionRow {
                h,
                k,
                objective: Some(worst),
                infeasible_at: None,
                min_window,
            })
        })
        .collect()
}

/// Exhaustive scan of all `(h, k)` pairs.
pub fn select_h_k(
    dataset: &Dataset,
    t_grid: &[Vec<f64>],
    h_candidates: &[f64],
    k_candidates: &[usize],
    metric: Metric,
) -> Result<Selection> {
    if t_grid.is_empty() {
        return Err(Error::Domain("empty t-grid".into()));
    }
    if h_candidates.is_empty() || k_candidates.is_empty() {
        return Err(Error::Domain("empty candidate grid".into()));
    }
    if let Some(h) = h_candidates.iter().find(|h| !(**h > 0.0)) {
        return Err(Error::Domain(format!("candidate radius {h} must be positive")));
    }
    let table: Vec<SelectionRow> = h_candidates
        .par_iter()
        .map(|&h| evaluate_h(dataset, t_grid, h, k_candidates, metric))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let best = best_row(&table).ok_or(Error::NoFeasiblePair)?;
    Ok(Selection {
        h: best.h,
        k: best.k,
        objective: best.objective.expect("feasible"),
        table,
    })
}

/// Feasible row with minimal objective; near-ties go to smallest `h`, then `k`.
pub fn best_row(table: &[SelectionRow]) -> Option<&SelectionRow> {
    let min = table
        .iter()
        .filter_map(|r| r.objective)
        .min_by(f64::total_cmp)?;
    table
        .iter()
        .filter(|r| r.objective.is_some_and(|o| o <= min + TIE_TOLERANCE))
        .min_by(|a, b| a.h.total_cmp(&b.h).then(a.k.cmp(&b.k)))
}

/// Cartesian product of per-coordinate axes, last axis fastest.
pub fn product_grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Years 1969..=2005 crossed with mid-month days 15, 45, ..., 345.
pub fn year_day_grid() -> Vec<Vec<f64>> {
    let years: Vec<f64> = (1969..=2005).map(f64::from).collect();
    let days: Vec<f64> = (0..12).map(|j| f64::from(15 + 30 * j)).collect();
    product_grid(&[years, days])
}

/// Quantiles (at `1/(count+1), ..., count/(count+1)`) of pairwise covariate
/// distances, from at most 1000 evenly strided points.
pub fn default_h_candidates(dataset: &Dataset, metric: Metric, count: usize) -> Vec<f64> {
    let n = dataset.len();
    let stride = n.div_ceil(1000).max(1);
    let idx: Vec<usize> = (0..n).step_by(stride).collect();
    let mut d = Vec::with_capacity(idx.len() * idx.len() / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let v = metric.distance(dataset.covariate(i), dataset.covariate(j));
            if v > 0.0 {
                d.push(v);
            }
        }
    }
    if d.is_empty() {
        return Vec::new();
    }
    d.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = (1..=count)
        .map(|q| {
            let pos = q as f64 / (count + 1) as f64 * (d.len() - 1) as f64;
            d[pos.round() as usize]
        })
        .collect();
    out.dedup();
    out
}

/// Geometric ladder of `k` from 10 up to `floor(m_min / 2)`.
pub fn default_k_candidates(m_min: usize, count: usize) -> Vec<usize> {
    let top = m_min / 2;
    if top < 10 || count == 0 {
        return if top >= 1 { vec![top] } else { Vec::new() };
    }
    if count == 1 {
        return vec![10];
    }
    let ratio = (top as f64 / 10.0).powf(1.0 / (count - 1) as f64);
    let mut out: Vec<usize> = (0..count)
        .map(|j| ((10.0 * ratio.powi(j as i32)).round() as usize).min(top))
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two clusters whose top spacings are all equal to `c`.
    fn exponential_quantile_clusters(m: usize, c: f64) -> Dataset {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for center in [0.0, 10.0] {
            let mut log_z = 0.0;
            for i in 0..m {
                if i > 0 {
                    log_z -= c / i as f64;
                }
                xs.push(vec![center + 0.001 * (i % 7) as f64]);
                ys.push(f64::exp(log_z + 3.0));
            }
        }
        Dataset::new(xs, ys).unwrap()
    }

    #[test]
    fn equal_spacings_give_zero_objective_and_tie_break() {
        let d = exponential_quantile_clusters(60, 0.4);
        let grid = vec![vec![0.0], vec![10.0]];
        let sel = select_h_k(&d, &grid, &[0.5, 0.1, 1.0], &[40, 20, 30], Metric::Sup).unwrap();
        assert!(sel.objective < 1e-12);
        assert_eq!((sel.h, sel.k), (0.1, 20));
        assert_eq!(sel.table.len(), 9);
    }

    #[test]
    fn infeasible_everywhere() {
        let d = exponential_quantile_clusters(30, 0.4);
        let grid = vec![vec![0.0], vec![10.0]];
        assert_eq!(
            select_h_k(&d, &grid, &[0.5], &[30, 45], Metric::Sup).unwrap_err(),
            Error::NoFeasiblePair
        );
        // an empty window makes the pair infeasible rather than erroring
        let far = vec![vec![0.0], vec![5.0]];
        assert_eq!(
            select_h_k(&d, &far, &[0.5], &[5], Metric::Sup).unwrap_err(),
            Error::NoFeasiblePair
        );
    }

    #[test]
    fn empty_grid() {
        let d = exponential_quantile_clusters(30, 0.4);
        assert_eq!(
            select_h_k(&d, &[], &[0.5], &[5], Metric::Sup).unwrap_err().to_string(),
            "domain error: empty t-grid"
        );
    }

    #[test]
    fn year_day_preset() {
        let g = year_day_grid();
        assert_eq!(g.len(), 37 * 12);
        assert_eq!(g[0], vec![1969.0, 15.0]);
        assert_eq!(g[11], vec![1969.0, 345.0]);
        assert_eq!(g.last().unwrap(), &vec![2005.0, 345.0]);
    }

    #[test]
    fn default_grids() {
        assert_eq!(default_k_candidates(1000, 5), vec![10, 27, 71, 188, 500]);
        assert_eq!(default_k_candidates(12, 4), vec![6]);
        let d = Dataset::new((0..20).map(|i| vec![i as f64]).collect(), vec![1.0; 20]).unwrap();
        let h = default_h_candidates(&d, Metric::Sup, 3);
        assert_eq!(h.len(), 3);
        assert!(h.windows(2).all(|w| w[0] < w[1]));
    }
}
