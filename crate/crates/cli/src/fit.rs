use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::anyhow;
use quads_core::fitting::{restricted_fit, Z_95};
use quads_core::io::{read_medians_csv, write_fits_csv, write_rows, FitRow};
use quads_core::{DataPoint, Error, FitResult, ModelKind, CODE_VERSION};
use serde::Serialize;

use crate::{ensure_dir, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelChoice {
    Power,
    Exp,
    Both,
}

impl ModelChoice {
    fn models(self) -> &'static [ModelKind] {
        match self {
            ModelChoice::Power => &[ModelKind::PowerLaw],
            ModelChoice::Exp => &[ModelKind::Exponential],
            ModelChoice::Both => &[ModelKind::PowerLaw, ModelKind::Exponential],
        }
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once(['-', ':'])
        .ok_or_else(|| format!("range '{s}' should look like 7-10"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("range '{s}': {e}"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(format!("range '{s}' is empty"));
    }
    Ok((lo, hi))
}

#[derive(clap::Args)]
pub struct Args {
    /// medians.csv from a campaign.
    #[arg(long, short = 'i')]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    model: ModelChoice,
    /// Inclusive N range such as 7-10; repeatable. Defaults to all points.
    #[arg(long = "range", value_parser = parse_range)]
    ranges: Vec<(usize, usize)>,
    #[arg(long, short = 'o', default_value = "fits")]
    out: PathBuf,
    /// Fit-curve samples per unit of N in the plot data.
    #[arg(long, default_value_t = 10)]
    samples_per_n: usize,
}

#[derive(Serialize)]
struct PointRow {
    p_bar: f64,
    n_bits: usize,
    median: f64,
    ci_low: f64,
    ci_high: f64,
    sigma: f64,
}

#[derive(Serialize)]
struct CurveRow {
    model: ModelKind,
    p_bar: f64,
    n_min: usize,
    n_max: usize,
    n: f64,
    value: f64,
}

fn curve(fit: &FitResult, p_bar: f64, per_n: usize) -> Vec<CurveRow> {
    let steps = (fit.n_max - fit.n_min) * per_n.max(1);
    (0..=steps)
        .map(|i| {
            let n = fit.n_min as f64 + i as f64 / per_n.max(1) as f64;
            CurveRow {
                model: fit.model,
                p_bar,
                n_min: fit.n_min,
                n_max: fit.n_max,
                n,
                value: fit.predict(n),
            }
        })
        .collect()
}

pub fn execute(args: Args) -> anyhow::Result<Status> {
    let medians = read_medians_csv(&args.input)
        .map_err(|e| anyhow!("reading {}: {e}", args.input.display()))?;
    let mut by_power: BTreeMap<u64, Vec<DataPoint>> = BTreeMap::new();
    let mut points = Vec::new();
    for m in &medians {
        let d = DataPoint::from_median(m)?;
        points.push(PointRow {
            p_bar: m.p_bar,
            n_bits: m.n_bits,
            median: m.median,
            ci_low: m.ci_low,
            ci_high: m.ci_high,
            sigma: d.sigma,
        });
        by_power.entry(m.p_bar.to_bits()).or_default().push(d);
    }

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for (bits, data) in &by_power {
        let p_bar = f64::from_bits(*bits);
        let ranges = if args.ranges.is_empty() {
            let lo = data.iter().map(|d| d.n_bits).min().unwrap_or(0);
            let hi = data.iter().map(|d| d.n_bits).max().unwrap_or(0);
            vec![(lo, hi)]
        } else {
            args.ranges.clone()
        };
        for &(lo, hi) in &ranges {
            for &model in args.model.models() {
                let fit = match restricted_fit(data, lo, hi, model) {
                    Ok(f) => f,
                    Err(Error::FitNonConvergence { best, .. }) => {
                        log::warn!("{model} fit at P={p_bar} on N {lo}-{hi} did not converge; reporting best iterate");
                        *best
                    }
                    Err(e) => {
                        log::warn!("skipping {model} fit at P={p_bar} on N {lo}-{hi}: {e}");
                        continue;
                    }
                };
                curves.extend(curve(&fit, p_bar, args.samples_per_n));
                rows.push(FitRow::new(p_bar, &fit));
            }
        }
    }

    ensure_dir(&args.out)?;
    let header = format!(
        "# {CODE_VERSION}; source: {}; weights: sigma = (ci_high - ci_low) / 2 / {Z_95}; dof = points - 2",
        args.input.display()
    );
    write_fits_csv(&args.out.join("fits.csv"), Some(&header), &rows)?;
    write_rows(&args.out.join("plot_points.csv"), Some(&header), &points)?;
    write_rows(&args.out.join("plot_curves.csv"), Some(&header), &curves)?;
    for r in &rows {
        println!(
            "{:<11} P={:<6} N {:>2}-{:<2} a={:<12.6e} b={:<9.5} chi2={:<9.4} p={:.4}",
            r.model.name(),
            r.p_bar,
            r.n_min,
            r.n_max,
            r.a,
            r.b,
            r.chi2,
            r.p_value
        );
    }
    Ok(Status::Ok)
}
