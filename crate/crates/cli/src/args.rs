//! Argument types shared by several subcommands.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use condtail::model::{scale_points, Dataset, Metric};
use condtail::selection::{product_grid, year_day_grid};
use condtail::weights::WeightScheme;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Sup,
    Euclid,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Sup => Metric::Sup,
            MetricArg::Euclid => Metric::Euclidean,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Hill,
    Zipf,
    Hz,
    Opt,
}

pub fn scheme(kind: SchemeArg, rho_star: Option<f64>) -> Result<WeightScheme> {
    let need = |name: &str| rho_star.with_context(|| format!("--scheme {name} needs --rho-star"));
    Ok(match kind {
        SchemeArg::Hill => WeightScheme::Hill,
        SchemeArg::Zipf => WeightScheme::Zipf,
        SchemeArg::Hz => WeightScheme::hill_zipf(need("hz")?)?,
        SchemeArg::Opt => WeightScheme::optimal(need("opt")?)?,
    })
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    /// Years 1969-2005 crossed with days 15, 45, ..., 345
    YearDay,
}

/// Where the covariate grid comes from.
#[derive(Debug, Args)]
pub struct GridArgs {
    /// CSV file with one grid point per row (header optional)
    #[arg(long, conflicts_with_all = ["axis", "preset"])]
    pub grid: Option<PathBuf>,

    /// Grid axis `lo:hi:n`; repeat for a product grid
    #[arg(long, allow_hyphen_values = true)]
    pub axis: Vec<String>,

    /// Named product grid
    #[arg(long, value_enum, conflicts_with = "axis")]
    pub preset: Option<Preset>,
}

impl GridArgs {
    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        let points = if let Some(path) = &self.grid {
            let file = std::fs::File::open(path)
                .with_context(|| format!("cannot open grid {}", path.display()))?;
            condtail::io::read_grid(file)?
        } else if let Some(Preset::YearDay) = self.preset {
            year_day_grid()
        } else if self.axis.is_empty() {
            Vec::new()
        } else {
            let axes = self.axis.iter().map(|a| parse_axis(a)).collect::<Result<Vec<_>>>()?;
            product_grid(&axes)
        };
        if points.is_empty() {
            bail!("empty t-grid");
        }
        Ok(points)
    }
}

/// `lo:hi:n` with `n` evenly spaced points including both ends.
pub fn parse_axis(spec: &str) -> Result<Vec<f64>> {
    let (lo, hi, n) = parse_range(spec)?;
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

/// `n` cell midpoints of `[lo, hi]`, from `lo:hi:n` or `lo:hi` with `n` given.
pub fn parse_midpoints(spec: &str, n: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 2 {
        bail!("range {spec:?} must look like lo:hi");
    }
    let lo: f64 = parts[0].trim().parse().with_context(|| format!("bad range {spec:?}"))?;
    let hi: f64 = parts[1].trim().parse().with_context(|| format!("bad range {spec:?}"))?;
    if n == 0 {
        bail!("resolution must be at least 1");
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
        .collect())
}

fn parse_range(spec: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("axis {spec:?} must look like lo:hi:n");
    }
    let lo: f64 = parts[0].trim().parse().with_context(|| format!("bad axis {spec:?}"))?;
    let hi: f64 = parts[1].trim().parse().with_context(|| format!("bad axis {spec:?}"))?;
    let n: usize = parts[2].trim().parse().with_context(|| format!("bad axis {spec:?}"))?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        bail!("axis {spec:?} needs finite ends and n >= 1");
    }
    Ok((lo, hi, n))
}

/// Data file plus metric and optional per-axis pre-scaling.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with header x1,...,xp,y
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long, value_enum, default_value = "sup")]
    pub metric: MetricArg,

    /// Divide covariate j by the j-th value before measuring distances
    #[arg(long, value_delimiter = ',')]
    pub scale: Vec<f64>,
}

impl DataArgs {
    pub fn load(&self) -> Result<Dataset> {
        let data = condtail::io::read_dataset_file(&self.data)
            .with_context(|| format!("cannot read {}", self.data.display()))?;
        if self.scale.is_empty() {
            Ok(data)
        } else {
            Ok(data.with_covariate_scales(&self.scale)?)
        }
    }

    pub fn scale_grid(&self, grid: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if self.scale.is_empty() {
            Ok(grid.to_vec())
        } else {
            Ok(scale_points(grid, &self.scale)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes() {
        assert_eq!(parse_axis("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_axis("2:5:1").unwrap(), vec![2.0]);
        assert!(parse_axis("0:1").is_err());
        assert!(parse_axis("0:1:0").is_err());
        assert_eq!(parse_midpoints("-1:-1", 1).unwrap(), vec![-1.0]);
        assert_eq!(parse_midpoints("-4:0", 2).unwrap(), vec![-3.0, -1.0]);
    }

    #[test]
    fn schemes() {
        assert_eq!(scheme(SchemeArg::Hill, None).unwrap(), WeightScheme::Hill);
        assert!(scheme(SchemeArg::Opt, None).is_err());
        assert!(scheme(SchemeArg::Hz, Some(0.5)).is_err());
        assert_eq!(
            scheme(SchemeArg::Hz, Some(-1.0)).unwrap(),
            WeightScheme::HillZipf { rho_star: -1.0 }
        );
    }
}
