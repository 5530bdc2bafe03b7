//! Domain types shared across the crate.
//!
//! Everything here is immutable once built. Validation happens at
//! construction so downstream code can rely on the invariants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightScheme;

/// Covariate-indexed positive responses `(x_i, y_i)`, `x_i` in `R^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    covariates: Vec<f64>,
    responses: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from row-wise covariates and responses.
    pub fn new(covariates: Vec<Vec<f64>>, responses: Vec<f64>) -> Result<Self> {
        if covariates.len() != responses.len() {
            return Err(Error::InvalidDataset(format!(
                "{} covariate rows but {} responses",
                covariates.len(),
                responses.len()
            )));
        }
        let dim = covariates.first().map(Vec::len).unwrap_or(1);
        let mut flat = Vec::with_capacity(dim * covariates.len());
        for row in &covariates {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(dim, flat, responses)
    }

    /// Builds a dataset from a row-major covariate buffer of `n * dim` values.
    pub fn from_flat(dim: usize, covariates: Vec<f64>, responses: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDataset("covariate dimension must be >= 1".into()));
        }
        if covariates.len() != dim * responses.len() {
            return Err(Error::InvalidDataset(format!(
                "covariate buffer has {} values, expected {} x {}",
                covariates.len(),
                responses.len(),
                dim
            )));
        }
        if let Some((i, y)) = responses
            .iter()
            .enumerate()
            .find(|(_, y)| !(y.is_finite() && **y > 0.0))
        {
            return Err(Error::InvalidDataset(format!(
                "response {i} is {y}; responses must be finite and positive"
            )));
        }
        if let Some(v) = covariates.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("non-finite covariate {v}")));
        }
        Ok(Self {
            dim,
            covariates,
            responses,
        })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    /// Covariate dimension `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn covariate(&self, i: usize) -> &[f64] {
        &self.covariates[i * self.dim..(i + 1) * self.dim]
    }

    pub fn response(&self, i: usize) -> f64 {
        self.responses[i]
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.covariates
            .chunks_exact(self.dim)
            .zip(self.responses.iter().copied())
    }

    /// Returns a copy with every response multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_flat(
            self.dim,
            self.covariates.clone(),
            self.responses.iter().map(|y| y * c).collect(),
        )
    }

    /// Returns a copy with covariate `j` divided by `scales[j]`, so that a
    /// single radius covers a different extent along each axis.
    pub fn with_covariate_scales(&self, scales: &[f64]) -> Result<Self> {
        let scales = check_scales(self.dim, scales)?;
        let covariates = self
            .covariates
            .chunks_exact(self.dim)
            .flat_map(|row| row.iter().zip(scales).map(|(x, s)| x / s))
            .collect();
        Self::from_flat(self.dim, covariates, self.responses.clone())
    }
}

/// Divides each grid point coordinate-wise by `scales`.
pub fn scale_points(points: &[Vec<f64>], scales: &[f64]) -> Result<Vec<Vec<f64>>> {
    let dim = points.first().map_or(scales.len(), Vec::len);
    let scales = check_scales(dim, scales)?;
    points
        .iter()
        .map(|p| {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            Ok(p.iter().zip(scales).map(|(x, s)| x / s).collect())
        })
        .collect()
}

fn check_scales(dim: usize, scales: &[f64]) -> Result<&[f64]> {
    if scales.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: scales.len(),
        });
    }
    for &s in scales {
        check_positive("covariate scale", s)?;
    }
    Ok(scales)
}

/// Distance on the covariate space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// `max_j |x_j - y_j|`
    #[default]
    Sup,
    Euclidean,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Metric::Sup => diffs.fold(0.0, f64::max),
            Metric::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        }
    }
}

/// The ball `B(t, h)` and the responses of its members.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub(crate) center: Vec<f64>,
    pub(crate) radius: f64,
    pub(crate) members: Vec<usize>,
    pub(crate) sorted_responses: Vec<f64>,
    pub(crate) n_total: usize,
}

impl Window {
    /// Builds a window directly from member responses, outside any dataset.
    /// The window then stands alone: `phi` is 1.
    pub fn from_responses(mut responses: Vec<f64>) -> Result<Self> {
        if responses.is_empty() {
            return Err(Error::EmptyWindow { h: 0.0 });
        }
        responses.sort_by(f64::total_cmp);
        let n = responses.len();
        Ok(Self {
            center: Vec::new(),
            radius: 0.0,
            members: (0..n).collect(),
            sorted_responses: responses,
            n_total: n,
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Indices into the originating dataset, in dataset order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Member responses in ascending order.
    pub fn sorted_responses(&self) -> &[f64] {
        &self.sorted_responses
    }

    /// Number of members `m_t`.
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Proportion `m_t / n` of design points inside the ball.
    pub fn phi(&self) -> f64 {
        self.size() as f64 / self.n_total as f64
    }
}

/// Rescaled log-spacings `C_i = i log(Z_{m-i+1,m} / Z_{m-i,m})`, `i = 1..k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSpacings {
    pub(crate) values: Vec<f64>,
    pub(crate) threshold_index: usize,
}

impl LogSpacings {
    /// Wraps precomputed spacings, e.g. exponential draws in calibration runs.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData { k: 0, m: 0 });
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("spacing {v} is not a finite non-negative value")));
        }
        Ok(Self {
            values,
            threshold_index: 0,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// Rank `m - k` of the threshold order statistic `Z_{m-k,m}`.
    pub fn threshold_index(&self) -> usize {
        self.threshold_index
    }
}

/// Confidence interval around a tail-index estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

/// A fitted tail index with its asymptotic calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    pub gamma_hat: f64,
    pub k: usize,
    /// Window radius, when the fit came from a window.
    pub h: Option<f64>,
    /// Window size, when the fit came from a window.
    pub m: Option<usize>,
    pub scheme: WeightScheme,
    pub weight_sum: f64,
    /// Asymptotic variance multiplier of the scheme.
    pub av: f64,
    /// Asymptotic bias multiplier, once a second-order parameter is supplied.
    pub ab: Option<f64>,
    pub ci: Option<Interval>,
}

impl TailFit {
    /// Sign-changing weights can yield a negative estimate; it is kept as is.
    pub fn is_negative(&self) -> bool {
        self.gamma_hat < 0.0
    }

    pub(crate) fn with_window(mut self, window: &Window) -> Self {
        self.h = Some(window.radius);
        self.m = Some(window.size());
        self
    }
}

/// Second-order setting used by the bias/variance calculus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticSpec {
    /// True second-order parameter.
    pub rho: f64,
    /// Value plugged into the bias-aware weights.
    pub rho_star: f64,
    /// Bias function value `b_{n,t}`, when known.
    pub b: Option<f64>,
}

impl AsymptoticSpec {
    pub fn new(rho: f64, rho_star: f64, b: Option<f64>) -> Result<Self> {
        check_negative("rho", rho)?;
        check_negative("rho_star", rho_star)?;
        Ok(Self { rho, rho_star, b })
    }
}

pub(crate) fn check_negative(name: &str, value: f64) -> Result<()> {
    if value < 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and negative, got {value}")))
    }
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and positive, got {value}")))
    }
}

/// A covariate-dependent parameter such as `gamma(x)` or `rho(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovariateFn {
    Constant { value: f64 },
    /// `base + amplitude * sin(2 pi frequency x_1)`
    Sine {
        base: f64,
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
    },
    /// `intercept + sum_j slopes_j x_j`
    Linear { intercept: f64, slopes: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl CovariateFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            CovariateFn::Constant { value } => *value,
            CovariateFn::Sine {
                base,
                amplitude,
                frequency,
            } => base + amplitude * (2.0 * std::f64::consts::PI * frequency * x[0]).sin(),
            CovariateFn::Linear { intercept, slopes } => {
                intercept + slopes.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
            }
        }
    }
}

/// Response distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Survival `y^{-1/gamma}` on `[1, inf)`.
    PurePareto,
    /// Survival `(1 + y^{-rho/gamma})^{1/rho}`.
    Burr,
}

/// Inverse marginal distribution used to lay out a lattice coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Margin {
    Uniform { lower: f64, upper: f64 },
}

impl Margin {
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Margin::Uniform { lower, upper } => lower + u * (upper - lower),
        }
    }
}

impl Default for Margin {
    fn default() -> Self {
        Margin::Uniform {
            lower: 0.0,
            upper: 1.0,
        }
    }
}

/// Fixed (non-random) covariate design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignSpec {
    /// Product lattice with `n^{1/p}` points per axis.
    Lattice {
        n: usize,
        p: usize,
        #[serde(default)]
        margins: Vec<Margin>,
    },
    Explicit { points: Vec<Vec<f64>> },
}

/// Everything needed to draw a reproducible conditional sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub gamma: CovariateFn,
    /// Ignored for the pure Pareto family.
    pub rho: CovariateFn,
    pub family: Family,
    pub design: DesignSpec,
    pub seed: u64,
}
