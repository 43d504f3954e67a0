use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use quads_core::io::{
    read_instance, write_json, write_medians_csv, write_runtimes_csv, EnvironmentFile, Provenance,
};
use quads_core::protocol::{job_environment, run_campaign_on, generate_instances, InstanceSet};
use quads_core::{CampaignConfig, CampaignResult};

use crate::{ensure_dir, Status};

#[derive(clap::Args)]
pub struct Args {
    /// Campaign config (TOML); unknown keys are rejected.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `success_threshold`.
    #[arg(long)]
    threshold: Option<f64>,
    /// Worker threads; defaults to the number of cores. Never affects results.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, short = 'o', default_value = "campaign")]
    out: PathBuf,
    /// Load instances from `ec3_N{N}_inst{k}.json` files instead of generating them.
    #[arg(long)]
    instances: Option<PathBuf>,
    /// Also write the noise environment of every converged noisy run, sampled at its runtime.
    #[arg(long)]
    dump_envs: bool,
    /// Validate the config and write campaign.json only.
    #[arg(long)]
    dry_run: bool,
}

pub fn load_config(path: &Path) -> anyhow::Result<CampaignConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

fn load_instances(dir: &Path, config: &CampaignConfig) -> anyhow::Result<InstanceSet> {
    if !config.shared_instances {
        bail!("--instances needs shared_instances = true");
    }
    let mut set = InstanceSet::new();
    for key in config.instance_keys() {
        let path = dir.join(quads_core::io::instance_file_name(key.n_bits, key.instance_id));
        let (instance, _) =
            read_instance(&path).with_context(|| format!("loading {}", path.display()))?;
        set.insert(key, instance);
    }
    Ok(set)
}

fn dump_environments(out: &Path, config: &CampaignConfig, result: &CampaignResult) -> anyhow::Result<usize> {
    let dir = out.join("environments");
    ensure_dir(&dir)?;
    let mut written = 0;
    for record in result.records.iter().filter(|r| r.p_bar > 0.0 && !r.quarantined) {
        let job = record.key();
        let Some(environment) = job_environment(config, &job, record.t_star)? else {
            continue;
        };
        let name = format!(
            "env_N{}_P{}_inst{}_env{}.json",
            job.n_bits, job.p_bar, job.instance_id, job.env_id
        );
        let file = EnvironmentFile {
            seed: job.env_seed(config.master_seed),
            environment,
        };
        write_json(&dir.join(name), &file)?;
        written += 1;
    }
    Ok(written)
}

pub fn execute(args: Args) -> anyhow::Result<Status> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(threshold) = args.threshold {
        config.success_threshold = threshold;
    }
    config.jobs = args.jobs;
    config.validate()?;

    ensure_dir(&args.out)?;
    let provenance = Provenance::new(&config);
    write_json(&args.out.join("campaign.json"), &provenance)?;
    let job_count = config.job_keys().len();
    if args.dry_run {
        println!("config ok: {job_count} jobs; wrote {}", args.out.join("campaign.json").display());
        return Ok(Status::Ok);
    }

    let instances = match &args.instances {
        Some(dir) => load_instances(dir, &config)?,
        None => generate_instances(&config)?,
    };
    log::info!("running {job_count} jobs");
    let result = run_campaign_on(&config, &instances)?;

    write_runtimes_csv(&args.out.join("runtimes.csv"), &provenance, &result.records)?;
    write_medians_csv(&args.out.join("medians.csv"), &provenance, &result.medians)?;
    if args.dump_envs {
        let n = dump_environments(&args.out, &config, &result)?;
        log::info!("wrote {n} environment files");
    }

    println!(
        "{} runs, {} quarantined, {} median points; outputs in {}",
        result.records.len(),
        result.quarantined.len(),
        result.medians.len(),
        args.out.display()
    );
    for key in &result.quarantined {
        println!(
            "quarantined: N={} P={} instance={} env={}",
            key.n_bits, key.p_bar, key.instance_id, key.env_id
        );
    }
    if result.any_degraded() {
        for m in result.medians.iter().filter(|m| m.degraded) {
            println!("degraded: N={} P={} (over 2% of runs quarantined)", m.n_bits, m.p_bar);
        }
        return Ok(Status::Degraded);
    }
    Ok(Status::Ok)
}
