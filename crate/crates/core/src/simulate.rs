//! Ground-truth generators and Monte Carlo harnesses.
//!
//! Responses are drawn by inversion with a uniform `u` on `(0, 1)` used
//! directly as the survival level. The Burr family is parameterized by its
//! tail index `gamma` and second-order parameter `rho`:
//!
//! ```text
//! P(Y > y) = (1 + y^{-rho/gamma})^{1/rho},   U(y) = y^gamma (1 - y^rho)^{-gamma/rho}
//! ```
//!
//! so its bias function is `b(y) = gamma y^rho (1 + o(1))`.
//!
//! Every replication `r` draws from its own ChaCha stream `r` under the
//! master seed, so results do not depend on scheduling.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::asymptotics::ab_av;
use crate::error::{Error, Result};
use crate::estimator::estimate;
use crate::model::{
    check_negative, check_positive, CovariateFn, Dataset, DesignSpec, Family, Margin, Metric,
    SimSpec,
};
use crate::special::{chi2_sf, normal_cdf};
use crate::weights::WeightScheme;
use crate::window::select_window;

fn check_level(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("survival level must lie in (0, 1), got {u}")))
    }
}

/// Burr response at survival level `u`: `(u^rho - 1)^{-gamma/rho}`.
pub fn burr_quantile(u: f64, gamma: f64, rho: f64) -> Result<f64> {
    check_level(u)?;
    check_positive("gamma", gamma)?;
    check_negative("rho", rho)?;
    Ok(burr_unchecked(u, gamma, rho))
}

fn burr_unchecked(u: f64, gamma: f64, rho: f64) -> f64 {
    // u^rho - 1 without cancellation near u = 1
    (rho * u.ln()).exp_m1().powf(-gamma / rho)
}

/// Burr survival function `(1 + y^{-rho/gamma})^{1/rho}`.
pub fn burr_survival(y: f64, gamma: f64, rho: f64) -> f64 {
    if y <= 0.0 {
        return 1.0;
    }
    (1.0 + y.powf(-rho / gamma)).powf(1.0 / rho)
}

/// Pure Pareto response at survival level `u`: `u^{-gamma}`.
pub fn pareto_quantile(u: f64, gamma: f64) -> Result<f64> {
    check_level(u)?;
    check_positive("gamma", gamma)?;
    Ok(u.powf(-gamma))
}

/// Pure Pareto survival function `y^{-1/gamma}` on `[1, inf)`.
pub fn pareto_survival(y: f64, gamma: f64) -> f64 {
    if y <= 1.0 {
        1.0
    } else {
        y.powf(-1.0 / gamma)
    }
}

/// Bias function of the Burr family at threshold level `y`.
pub fn burr_bias(y: f64, gamma: f64, rho: f64) -> f64 {
    gamma * y.powf(rho)
}

/// Bias value `b(m/k)` of a window of `m` responses using `k` spacings.
pub fn window_bias(family: Family, gamma: f64, rho: f64, m: usize, k: usize) -> f64 {
    match family {
        Family::PurePareto => 0.0,
        Family::Burr => burr_bias(m as f64 / k as f64, gamma, rho),
    }
}

/// Product lattice of `n` points with coordinates
/// `G_j^{-1}((beta_j - 1) / (n^{1/p} - 1))`, `beta_j = 1..n^{1/p}`.
///
/// The last coordinate varies fastest.
pub fn lattice_design<F: Fn(f64) -> f64>(n: usize, p: usize, margins: &[F]) -> Result<Vec<Vec<f64>>> {
    if p == 0 || margins.len() != p {
        return Err(Error::Domain(format!(
            "lattice needs p >= 1 margins, got p = {p} with {} margins",
            margins.len()
        )));
    }
    let side = integer_root(n, p).ok_or(Error::NotAPerfectPower { n, p })?;
    if side < 2 {
        return Err(Error::Domain(format!("lattice needs at least 2 points per axis, got {side}")));
    }
    let axes: Vec<Vec<f64>> = margins
        .iter()
        .map(|g| {
            (0..side)
                .map(|b| g(b as f64 / (side - 1) as f64))
                .collect()
        })
        .collect();
    let mut points = Vec::with_capacity(n);
    let mut beta = vec![0usize; p];
    for _ in 0..n {
        points.push(beta.iter().enumerate().map(|(j, &b)| axes[j][b]).collect());
        for j in (0..p).rev() {
            beta[j] += 1;
            if beta[j] < side {
                break;
            }
            beta[j] = 0;
        }
    }
    Ok(points)
}

fn integer_root(n: usize, p: usize) -> Option<usize> {
    let guess = (n as f64).powf(1.0 / p as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|r| r.checked_pow(p as u32) == Some(n))
}

/// Covariates of a design.
pub fn design_points(design: &DesignSpec) -> Result<Vec<Vec<f64>>> {
    match design {
        DesignSpec::Lattice { n, p, margins } => {
            let margins: Vec<Margin> = if margins.is_empty() {
                vec![Margin::default(); *p]
            } else {
                margins.clone()
            };
            let fns: Vec<_> = margins.iter().map(|m| move |u| m.quantile(u)).collect();
            lattice_design(*n, *p, &fns)
        }
        DesignSpec::Explicit { points } => {
            if points.is_empty() {
                return Err(Error::Domain("explicit design has no points".into()));
            }
            Ok(points.clone())
        }
    }
}

/// RNG for replication `rep` under `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Tail parameters at each design point, validated.
fn parameters(spec: &SimSpec, points: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
    points
        .iter()
        .map(|x| {
            let gamma = spec.gamma.eval(x);
            check_positive("gamma", gamma)
                .map_err(|_| Error::Domain(format!("gamma({x:?}) = {gamma} must be positive")))?;
            let rho = match spec.family {
                Family::PurePareto => -1.0,
                Family::Burr => {
                    let rho = spec.rho.eval(x);
                    check_negative("rho", rho)
                        .map_err(|_| Error::Domain(format!("rho({x:?}) = {rho} must be negative")))?;
                    rho
                }
            };
            Ok((gamma, rho))
        })
        .collect()
}

/// Checks a spec without drawing anything.
pub fn validate_spec(spec: &SimSpec) -> Result<()> {
    let points = design_points(&spec.design)?;
    parameters(spec, &points).map(|_| ())
}

fn draw(family: Family, u: f64, gamma: f64, rho: f64) -> f64 {
    match family {
        Family::PurePareto => u.powf(-gamma),
        Family::Burr => burr_unchecked(u, gamma, rho),
    }
}

/// One response per design point, from stream 0 of `spec.seed`.
pub fn generate_conditional(spec: &SimSpec) -> Result<Dataset> {
    generate_replication(spec, 0)
}

/// One response per design point, from stream `rep` of `spec.seed`.
pub fn generate_replication(spec: &SimSpec, rep: u64) -> Result<Dataset> {
    let points = design_points(&spec.design)?;
    let params = parameters(spec, &points)?;
    let mut rng = replication_rng(spec.seed, rep);
    let responses = params
        .iter()
        .map(|&(gamma, rho)| {
            let u: f64 = rng.sample(Open01);
            draw(spec.family, u, gamma, rho)
        })
        .collect();
    Dataset::new(points, responses)
}

/// `m` i.i.d. responses from one family, as a sorted sample.
pub fn sample_sorted(
    family: Family,
    gamma: f64,
    rho: f64,
    m: usize,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let mut out: Vec<f64> = (0..m)
        .map(|_| draw(family, rng.sample(Open01), gamma, rho))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Monte Carlo setting: one window of one conditional model.
#[derive(Debug, Clone)]
pub struct MonteCarlo<'a> {
    pub spec: &'a SimSpec,
    pub t: &'a [f64],
    pub h: f64,
    pub k: usize,
    pub reps: usize,
    pub metric: Metric,
}

/// Estimates of several schemes computed on the same replications.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloDraws {
    pub schemes: Vec<WeightScheme>,
    /// `estimates[s][r]`: scheme `s`, replication `r`.
    pub estimates: Vec<Vec<f64>>,
    /// Window size, identical across replications for a fixed design.
    pub m: usize,
}

impl MonteCarlo<'_> {
    /// Runs every replication in parallel and keeps replication order.
    pub fn run(&self, schemes: &[WeightScheme]) -> Result<MonteCarloDraws> {
        let points = design_points(&self.spec.design)?;
        parameters(self.spec, &points)?;
        let rows: Vec<(usize, Vec<f64>)> = (0..self.reps as u64)
            .into_par_iter()
            .map(|rep| {
                let data = generate_replication(self.spec, rep)?;
                let window = select_window(&data, self.t, self.h, self.metric)?;
                let fits = schemes
                    .iter()
                    .map(|s| estimate(&window, self.k, s).map(|f| f.gamma_hat))
                    .collect::<Result<Vec<_>>>()?;
                Ok((window.size(), fits))
            })
            .collect::<Result<_>>()?;
        let m = rows.first().map(|r| r.0).unwrap_or(0);
        let mut estimates = vec![Vec::with_capacity(self.reps); schemes.len()];
        for (_, fits) in rows {
            for (slot, v) in fits.into_iter().enumerate() {
                estimates[slot].push(v);
            }
        }
        Ok(MonteCarloDraws {
            schemes: schemes.to_vec(),
            estimates,
            m,
        })
    }

    /// True tail parameters at the window center.
    pub fn truth(&self) -> (f64, f64) {
        (self.spec.gamma.eval(self.t), self.spec.rho.eval(self.t))
    }

    /// Checks `sqrt(k) (gamma_hat - gamma - b AB) / (gamma sqrt(AV))` against N(0, 1).
    pub fn normality(&self, scheme: &WeightScheme) -> Result<NormalityReport> {
        let mut reports = self.reports(std::slice::from_ref(scheme))?;
        Ok(reports.remove(0))
    }

    /// Normality reports for several schemes computed on the same draws.
    pub fn reports(&self, schemes: &[WeightScheme]) -> Result<Vec<NormalityReport>> {
        if self.reps < 100 {
            return Err(Error::Domain(format!("need at least 100 replications, got {}", self.reps)));
        }
        let draws = self.run(schemes)?;
        let (gamma, rho) = self.truth();
        let rho = match self.spec.family {
            Family::PurePareto => -1.0,
            Family::Burr => rho,
        };
        let b = window_bias(self.spec.family, gamma, rho, draws.m, self.k);
        schemes
            .iter()
            .zip(&draws.estimates)
            .map(|(s, est)| NormalityReport::new(est, gamma, rho, b, s, self.k, draws.m))
            .collect()
    }
}

/// Summary of a Monte Carlo normality check.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalityReport {
    pub reps: usize,
    pub k: usize,
    pub m: usize,
    pub gamma: f64,
    pub b: f64,
    pub ab: f64,
    pub av: f64,
    pub mean_estimate: f64,
    pub std_estimate: f64,
    /// Mean of the standardized statistic.
    pub mean: f64,
    /// Standard deviation of the standardized statistic.
    pub std: f64,
    pub jarque_bera_p: f64,
    pub kolmogorov_p: f64,
}

impl NormalityReport {
    pub fn new(
        estimates: &[f64],
        gamma: f64,
        rho: f64,
        b: f64,
        scheme: &WeightScheme,
        k: usize,
        m: usize,
    ) -> Result<Self> {
        let c = ab_av(scheme, rho)?;
        let scale = (k as f64).sqrt() / (gamma * c.av.sqrt());
        let z: Vec<f64> = estimates
            .iter()
            .map(|g| (g - gamma - b * c.ab) * scale)
            .collect();
        let (mean_estimate, std_estimate) = mean_std(estimates);
        let (mean, std) = mean_std(&z);
        Ok(Self {
            reps: estimates.len(),
            k,
            m,
            gamma,
            b,
            ab: c.ab,
            av: c.av,
            mean_estimate,
            std_estimate,
            mean,
            std,
            jarque_bera_p: jarque_bera(&z),
            kolmogorov_p: kolmogorov_normal(&z),
        })
    }
}

/// Sample mean and (n - 1)-normalized standard deviation.
pub fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Jarque-Bera normality test p-value (chi-square, 2 degrees of freedom).
pub fn jarque_bera(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let moment = |p: i32| x.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / n;
    let m2 = moment(2);
    let skew = moment(3) / m2.powf(1.5);
    let kurt = moment(4) / (m2 * m2);
    let stat = n / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0);
    chi2_sf(stat, 2.0)
}

/// Kolmogorov-Smirnov p-value of `x` against N(0, 1).
pub fn kolmogorov_normal(x: &[f64]) -> f64 {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let d = kolmogorov_distance(&sorted, normal_cdf);
    kolmogorov_sf(d, sorted.len())
}

/// `sup |F_n - F|` for a sorted sample.
pub fn kolmogorov_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov tail probability with the Stephens correction.
pub fn kolmogorov_sf(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Spec with a constant tail index on an explicit single-point design.
pub fn single_window_spec(family: Family, gamma: f64, rho: f64, m: usize, seed: u64) -> SimSpec {
    SimSpec {
        gamma: CovariateFn::Constant { value: gamma },
        rho: CovariateFn::Constant { value: rho },
        family,
        design: DesignSpec::Explicit {
            points: vec![vec![0.0]; m],
        },
        seed,
    }
}
