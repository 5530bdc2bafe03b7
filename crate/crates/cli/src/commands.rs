use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Deserialize;

use condtail::asymptotics::{asymptotic_law, region_classify, Estimator};
use condtail::diagnostics::{chi2_exponential, DEFAULT_BINS};
use condtail::error::Error;
use condtail::estimator::{self, confidence_interval};
use condtail::model::{Metric, SimSpec};
use condtail::selection::{default_h_candidates, default_k_candidates, select_h_k};
use condtail::simulate::{generate_conditional, validate_spec, MonteCarlo};
use condtail::weights::WeightScheme;
use condtail::window::{log_spacings, select_window};

use crate::args::{parse_midpoints, scheme, DataArgs, GridArgs, SchemeArg};
use crate::output::{num, opt_num, write_manifest, Table};

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Window radius
    #[arg(long)]
    h: f64,
    /// Number of top log-spacings
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "hill")]
    scheme: SchemeArg,
    /// Assumed second-order parameter for hz and opt
    #[arg(long, allow_hyphen_values = true)]
    rho_star: Option<f64>,
    /// Add a normal confidence interval at this level
    #[arg(long)]
    ci: Option<f64>,
    /// Add a chi-square exponentiality p-value
    #[arg(long)]
    chi2: bool,
    /// Cells for the chi-square check
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Emit empty estimates instead of failing where the window is too small
    #[arg(long)]
    skip_infeasible: bool,
    #[arg(long)]
    out: PathBuf,
}

struct EstimateRow {
    m: usize,
    gamma_hat: Option<f64>,
    ci: Option<(f64, f64)>,
    chi2: Option<(f64, f64)>,
}

fn describe(t: &[f64]) -> String {
    let parts: Vec<String> = t.iter().map(|v| num(*v)).collect();
    format!("({})", parts.join(", "))
}

pub fn estimate(a: EstimateArgs) -> Result<()> {
    let scheme = scheme(a.scheme, a.rho_star)?;
    let data = a.data.load()?;
    let grid = a.grid.points()?;
    let scaled = a.data.scale_grid(&grid)?;
    let metric: Metric = a.data.metric.into();
    if !(a.h >= 0.0) {
        bail!("--h must be non-negative");
    }
    if let Some(level) = a.ci {
        if !(level > 0.0 && level < 1.0) {
            bail!("--ci must lie in (0, 1)");
        }
    }
    let rows: Vec<Result<EstimateRow>> = scaled
        .par_iter()
        .map(|t| {
            let window = match select_window(&data, t, a.h, metric) {
                Ok(w) => w,
                Err(Error::EmptyWindow { .. }) => {
                    return Ok(EstimateRow { m: 0, gamma_hat: None, ci: None, chi2: None })
                }
                Err(e) => return Err(e.into()),
            };
            let m = window.size();
            if m <= a.k {
                return Ok(EstimateRow { m, gamma_hat: None, ci: None, chi2: None });
            }
            let fit = estimator::estimate(&window, a.k, &scheme)?;
            let ci = match a.ci {
                Some(level) => {
                    let iv = confidence_interval(&fit, None, None, level)?;
                    Some((iv.lower, iv.upper))
                }
                None => None,
            };
            let chi2 = if a.chi2 && fit.gamma_hat > 0.0 {
                let test = chi2_exponential(&log_spacings(&window, a.k)?, fit.gamma_hat, a.bins)?;
                Some((test.statistic, test.p_value))
            } else {
                None
            };
            Ok(EstimateRow { m, gamma_hat: Some(fit.gamma_hat), ci, chi2 })
        })
        .collect();

    let dim = grid[0].len();
    let mut header: Vec<String> = (1..=dim).map(|j| format!("t{j}")).collect();
    header.extend(["m".into(), "gamma_hat".into()]);
    if a.ci.is_some() {
        header.extend(["ci_lower".into(), "ci_upper".into()]);
    }
    if a.chi2 {
        header.extend(["chi2_statistic".into(), "chi2_p_value".into()]);
    }
    let mut table = Table::create(&a.out, &header)?;
    for (i, (t, row)) in grid.iter().zip(rows).enumerate() {
        let row = row.with_context(|| format!("grid point {} {}", i + 1, describe(t)))?;
        if row.gamma_hat.is_none() && !a.skip_infeasible {
            bail!(
                "infeasible grid point {} {}: window holds {} observations, need more than k = {}",
                i + 1,
                describe(t),
                row.m,
                a.k
            );
        }
        let mut fields: Vec<String> = t.iter().map(|v| num(*v)).collect();
        fields.push(row.m.to_string());
        fields.push(opt_num(row.gamma_hat));
        if a.ci.is_some() {
            fields.push(opt_num(row.ci.map(|c| c.0)));
            fields.push(opt_num(row.ci.map(|c| c.1)));
        }
        if a.chi2 {
            fields.push(opt_num(row.chi2.map(|c| c.0)));
            fields.push(opt_num(row.chi2.map(|c| c.1)));
        }
        table.row(&fields)?;
    }
    table.finish()?;
    write_manifest(&a.out, "estimate", None, &[&a.out])
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Candidate radii (default: quantiles of pairwise covariate distances)
    #[arg(long, value_delimiter = ',')]
    h: Vec<f64>,
    /// Candidate spacing counts (default: geometric ladder from 10)
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Size of each default candidate list
    #[arg(long, default_value_t = 10)]
    candidates: usize,
    /// Objective table output
    #[arg(long)]
    out: PathBuf,
}

pub fn select(a: SelectArgs) -> Result<()> {
    let data = a.data.load()?;
    let grid = a.grid.points()?;
    let scaled = a.data.scale_grid(&grid)?;
    let metric: Metric = a.data.metric.into();
    let h = if a.h.is_empty() {
        default_h_candidates(&data, metric, a.candidates)
    } else {
        a.h.clone()
    };
    if h.is_empty() {
        bail!("no candidate radii");
    }
    let k = if a.k.is_empty() {
        let widest = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut m_min = usize::MAX;
        for t in &scaled {
            let m = match select_window(&data, t, widest, metric) {
                Ok(w) => w.size(),
                Err(Error::EmptyWindow { .. }) => 0,
                Err(e) => return Err(e.into()),
            };
            m_min = m_min.min(m);
        }
        default_k_candidates(m_min, a.candidates)
    } else {
        a.k.clone()
    };
    if k.is_empty() {
        bail!("no candidate spacing counts: some grid window is nearly empty");
    }
    let sel = select_h_k(&data, &scaled, &h, &k, metric)?;
    let header: Vec<String> = ["h", "k", "objective", "feasible", "min_window", "infeasible_at"]
        .map(String::from)
        .to_vec();
    let mut table = Table::create(&a.out, &header)?;
    for row in &sel.table {
        table.row(&[
            num(row.h),
            row.k.to_string(),
            opt_num(row.objective),
            row.objective.is_some().to_string(),
            row.min_window.to_string(),
            row.infeasible_at.map(|i| (i + 1).to_string()).unwrap_or_default(),
        ])?;
    }
    table.finish()?;
    write_manifest(&a.out, "select", None, &[&a.out])?;
    println!("h={} k={} objective={}", num(sel.h), sel.k, num(sel.objective));
    Ok(())
}

/// Optional Monte Carlo section of a simulation spec.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonteCarloSection {
    t: Vec<f64>,
    h: f64,
    k: usize,
    reps: usize,
    #[serde(default)]
    metric: Metric,
    schemes: Vec<WeightScheme>,
}

#[derive(Debug, Deserialize)]
struct SimulationFile {
    #[serde(flatten)]
    spec: SimSpec,
    monte_carlo: Option<MonteCarloSection>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON simulation spec
    #[arg(long)]
    spec: PathBuf,
    /// Override the seed in the spec
    #[arg(long)]
    seed: Option<u64>,
    /// Dataset CSV output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo report CSV (needs a monte_carlo section in the spec)
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.spec)
        .with_context(|| format!("cannot read {}", a.spec.display()))?;
    let mut file: SimulationFile =
        serde_json::from_str(&text).with_context(|| format!("invalid spec {}", a.spec.display()))?;
    if let Some(seed) = a.seed {
        file.spec.seed = seed;
    }
    validate_spec(&file.spec).context("invalid spec")?;
    if a.out.is_none() && a.report.is_none() {
        bail!("nothing to do: pass --out and/or --report");
    }
    let seed = Some(file.spec.seed);
    if let Some(out) = &a.out {
        let data = generate_conditional(&file.spec)?;
        let f = std::fs::File::create(out).with_context(|| format!("cannot create {}", out.display()))?;
        condtail::io::write_dataset(std::io::BufWriter::new(f), &data)?;
        write_manifest(out, "simulate", seed, &[out])?;
    }
    if let Some(report) = &a.report {
        let mc = file
            .monte_carlo
            .as_ref()
            .context("--report needs a monte_carlo section in the spec")?;
        for s in &mc.schemes {
            s.check()?;
        }
        let harness = MonteCarlo {
            spec: &file.spec,
            t: &mc.t,
            h: mc.h,
            k: mc.k,
            reps: mc.reps,
            metric: mc.metric,
        };
        let reports = harness.reports(&mc.schemes)?;
        let header: Vec<String> = [
            "scheme", "reps", "k", "m", "gamma", "b", "ab", "av", "mean_estimate", "std_estimate",
            "mean_standardized", "std_standardized", "jarque_bera_p", "kolmogorov_p",
        ]
        .map(String::from)
        .to_vec();
        let mut table = Table::create(report, &header)?;
        for (s, r) in mc.schemes.iter().zip(&reports) {
            table.row(&[
                s.to_string(),
                r.reps.to_string(),
                r.k.to_string(),
                r.m.to_string(),
                num(r.gamma),
                num(r.b),
                num(r.ab),
                num(r.av),
                num(r.mean_estimate),
                num(r.std_estimate),
                num(r.mean),
                num(r.std),
                num(r.jarque_bera_p),
                num(r.kolmogorov_p),
            ])?;
        }
        table.finish()?;
        write_manifest(report, "simulate", seed, &[report])?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct RegionsArgs {
    /// Range of rho as lo:hi
    #[arg(long, default_value = "-10:0", allow_hyphen_values = true)]
    rho: String,
    /// Range of rho* as lo:hi
    #[arg(long, default_value = "-4:0", allow_hyphen_values = true)]
    rho_star: String,
    /// Cells per axis as RHOxRHO_STAR
    #[arg(long, default_value = "200x200")]
    resolution: String,
    #[arg(long)]
    out: PathBuf,
}

fn order_label(order: &[Estimator; 4]) -> String {
    order.iter().map(|e| e.short_name()).collect::<Vec<_>>().join("<")
}

pub fn regions(a: RegionsArgs) -> Result<()> {
    let (nr, ns) = a
        .resolution
        .split_once('x')
        .context("--resolution must look like 200x200")?;
    let nr: usize = nr.parse().context("bad --resolution")?;
    let ns: usize = ns.parse().context("bad --resolution")?;
    let rhos = parse_midpoints(&a.rho, nr)?;
    let stars = parse_midpoints(&a.rho_star, ns)?;
    let header: Vec<String> = ["rho", "rho_star", "area", "half_plane", "bias_order", "var_order", "area_agrees"]
        .map(String::from)
        .to_vec();
    let mut table = Table::create(&a.out, &header)?;
    for &rho in &rhos {
        for &rho_star in &stars {
            let r = region_classify(rho, rho_star)
                .with_context(|| format!("point ({rho}, {rho_star})"))?;
            table.row(&[
                num(rho),
                num(rho_star),
                r.area.label().to_string(),
                format!("{:?}", r.half_plane),
                order_label(&r.bias_order),
                order_label(&r.var_order),
                r.area_agrees().to_string(),
            ])?;
        }
    }
    table.finish()?;
    write_manifest(&a.out, "regions", None, &[&a.out])
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long, allow_hyphen_values = true)]
    rho_star: f64,
    #[arg(long)]
    k: usize,
    /// Bias function value at the threshold
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    b: f64,
    /// Number of abscissae
    #[arg(long, default_value_t = 401)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

pub fn density(a: DensityArgs) -> Result<()> {
    let laws = Estimator::ALL
        .iter()
        .map(|e| asymptotic_law(a.gamma, a.rho, &e.scheme(a.rho_star), a.k, a.b))
        .collect::<condtail::error::Result<Vec<_>>>()?;
    let lo = laws.iter().map(|l| l.mean - 4.0 * l.std).fold(f64::INFINITY, f64::min);
    let hi = laws.iter().map(|l| l.mean + 4.0 * l.std).fold(f64::NEG_INFINITY, f64::max);
    if a.points < 2 {
        bail!("--points must be at least 2");
    }
    let mut header = vec!["x".to_string()];
    header.extend(Estimator::ALL.iter().map(|e| e.short_name().to_lowercase()));
    let mut table = Table::create(&a.out, &header)?;
    for i in 0..a.points {
        let x = lo + (hi - lo) * i as f64 / (a.points - 1) as f64;
        let mut fields = vec![num(x)];
        fields.extend(laws.iter().map(|l| num(l.density(x))));
        table.row(&fields)?;
    }
    table.finish()?;
    write_manifest(&a.out, "density", None, &[&a.out])
}

#[derive(Debug, Args)]
pub struct EncodeDailyArgs {
    /// CSV with columns date (YYYY-MM-DD) and value
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

pub fn encode_daily(a: EncodeDailyArgs) -> Result<()> {
    let f = std::fs::File::open(&a.input).with_context(|| format!("cannot open {}", a.input.display()))?;
    let data = condtail::io::read_daily_series(f)?;
    let out = std::fs::File::create(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    condtail::io::write_dataset(std::io::BufWriter::new(out), &data)?;
    write_manifest(&a.out, "encode-daily", None, &[&a.out])
}
