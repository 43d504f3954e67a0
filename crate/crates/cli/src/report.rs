use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use quads_core::io::{read_fits_csv, read_json, read_medians_csv, read_runtimes_csv, Provenance};
use quads_core::protocol::DEGRADED_FRACTION;

use crate::Status;

#[derive(clap::Args)]
pub struct Args {
    /// Campaign output directory (campaign.json, runtimes.csv, medians.csv).
    #[arg(long, short = 'i', default_value = "campaign")]
    input: PathBuf,
    /// fits.csv to include; defaults to `<input>/fits.csv` when present.
    #[arg(long)]
    fits: Option<PathBuf>,
    /// Write the report here as well as to stdout.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

pub fn execute(args: Args) -> anyhow::Result<Status> {
    let provenance: Provenance = read_json(&args.input.join("campaign.json"))
        .with_context(|| format!("reading {}/campaign.json", args.input.display()))?;
    let runtimes = read_runtimes_csv(&args.input.join("runtimes.csv"))
        .with_context(|| format!("reading {}/runtimes.csv", args.input.display()))?;
    let medians = read_medians_csv(&args.input.join("medians.csv"))
        .with_context(|| format!("reading {}/medians.csv", args.input.display()))?;
    let fits_path = args.fits.clone().unwrap_or_else(|| args.input.join("fits.csv"));
    let fits = if fits_path.exists() {
        read_fits_csv(&fits_path).with_context(|| format!("reading {}", fits_path.display()))?
    } else {
        Vec::new()
    };

    // (runs, quarantined) per (N, P̄)
    let mut counts: BTreeMap<(usize, u64), (usize, usize)> = BTreeMap::new();
    for r in &runtimes {
        let c = counts.entry((r.n_bits, r.p_bar.to_bits())).or_default();
        c.0 += 1;
        c.1 += usize::from(r.quarantined);
    }

    let c = &provenance.config;
    let mut text = String::new();
    writeln!(text, "{}", provenance.code_version)?;
    writeln!(
        text,
        "master_seed={} threshold={} instances/N={} envs/instance={} sigma={} tau={} {:?} {:?}",
        c.master_seed,
        c.success_threshold,
        c.instances_per_n,
        c.envs_per_instance,
        c.sigma,
        c.tau,
        c.polarization,
        c.uniformity
    )?;
    writeln!(text, "integrator: {}", provenance.integrator)?;
    writeln!(text)?;
    writeln!(text, "{:>3} {:>7} {:>10} {:>21} {:>6} {:>11}", "N", "P", "median", "95% CI", "runs", "quarantined")?;
    let mut degraded = false;
    for m in &medians {
        let (runs, bad) = counts.get(&(m.n_bits, m.p_bar.to_bits())).copied().unwrap_or_default();
        let flag = bad as f64 > DEGRADED_FRACTION * runs as f64;
        degraded |= flag;
        writeln!(
            text,
            "{:>3} {:>7} {:>10.3} [{:>8.3}, {:>9.3}] {:>6} {:>11}{}",
            m.n_bits,
            m.p_bar,
            m.median,
            m.ci_low,
            m.ci_high,
            runs,
            bad,
            if flag { "  degraded" } else { "" }
        )?;
    }
    if !fits.is_empty() {
        writeln!(text)?;
        writeln!(text, "{:<11} {:>7} {:>7} {:>12} {:>9} {:>9} {:>7}", "model", "P", "N", "a", "b", "chi2", "p")?;
        for f in &fits {
            writeln!(
                text,
                "{:<11} {:>7} {:>7} {:>12.5e} {:>9.4} {:>9.4} {:>7.4}",
                f.model.name(),
                f.p_bar,
                format!("{}-{}", f.n_min, f.n_max),
                f.a,
                f.b,
                f.chi2,
                f.p_value
            )?;
        }
    }
    print!("{text}");
    if let Some(out) = &args.out {
        std::fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(if degraded { Status::Degraded } else { Status::Ok })
}
