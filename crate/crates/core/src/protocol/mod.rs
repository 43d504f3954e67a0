//! Campaign orchestration: instances × noise environments per (N, P̄),
//! required runtimes, and noise-averaged medians.
//!
//! Every job draws its randomness from a seed derived from the master seed
//! and its key, and results are merged in canonical key order, so the output
//! is independent of the worker count.

mod median;
mod search;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use median::{lower_rank, median_of_sorted, median_with_ci, MedianCi, MIN_SAMPLES};
pub use search::{required_runtime, ProbePolicy, RuntimeSearch};

use crate::dynamics::EvolutionConfig;
use crate::ec3::{generate_usa_instance, Ec3Instance};
use crate::error::{Error, Result};
use crate::hamiltonian::SearchHamiltonian;
use crate::noise::{sample_environment, NoiseEnvironment, NoiseParams, Polarization, Uniformity};
use crate::seed;

/// Fraction of quarantined runs above which a median is flagged degraded.
pub const DEGRADED_FRACTION: f64 = 0.02;

/// Campaign settings. Unknown keys are rejected when deserializing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignConfig {
    pub n_range: Vec<usize>,
    pub p_bar_list: Vec<f64>,
    pub instances_per_n: usize,
    pub envs_per_instance: usize,
    pub success_threshold: f64,
    pub master_seed: u64,
    /// Reuse the same instances for every P̄ at a given N.
    pub shared_instances: bool,
    pub sigma: f64,
    pub tau: f64,
    pub polarization: Polarization,
    pub uniformity: Uniformity,
    pub t_initial: f64,
    pub t_growth: f64,
    pub bisection_width: f64,
    pub t_ceiling: f64,
    pub steps_per_time: usize,
    pub max_step: f64,
    pub renorm_tolerance: f64,
    /// Worker count; never serialized so outputs do not depend on it.
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        let noise = NoiseParams::default();
        let probe = ProbePolicy::default();
        let evolution = EvolutionConfig::default();
        Self {
            n_range: Vec::new(),
            p_bar_list: vec![0.0],
            instances_per_n: 75,
            envs_per_instance: 10,
            success_threshold: 0.125,
            master_seed: 0,
            shared_instances: true,
            sigma: noise.sigma,
            tau: noise.tau,
            polarization: noise.polarization,
            uniformity: noise.uniformity,
            t_initial: probe.t_initial,
            t_growth: probe.growth,
            bisection_width: probe.bisection_width,
            t_ceiling: probe.ceiling,
            steps_per_time: evolution.steps_per_time,
            max_step: evolution.max_step,
            renorm_tolerance: evolution.renorm_tolerance,
            jobs: None,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_range.is_empty() || self.p_bar_list.is_empty() {
            return Err(Error::input("n_range and p_bar_list must be non-empty"));
        }
        if let Some(&n) = self.n_range.iter().find(|&&n| n < 4) {
            return Err(Error::input(format!("N = {n} admits no unique-solution instance")));
        }
        if self.instances_per_n == 0 || self.envs_per_instance == 0 {
            return Err(Error::input("instances_per_n and envs_per_instance must be >= 1"));
        }
        if !(self.success_threshold > 0.0 && self.success_threshold < 1.0) {
            return Err(Error::input(format!(
                "success threshold {} outside (0, 1)",
                self.success_threshold
            )));
        }
        for &p in &self.p_bar_list {
            self.noise_params(p).validate()?;
        }
        self.probe_policy().validate()?;
        self.evolution().validate()?;
        Ok(())
    }

    pub fn noise_params(&self, p_bar: f64) -> NoiseParams {
        NoiseParams {
            sigma: self.sigma,
            tau: self.tau,
            p_bar,
            polarization: self.polarization,
            uniformity: self.uniformity,
        }
    }

    pub fn probe_policy(&self) -> ProbePolicy {
        ProbePolicy {
            t_initial: self.t_initial,
            growth: self.t_growth,
            bisection_width: self.bisection_width,
            ceiling: self.t_ceiling,
        }
    }

    pub fn evolution(&self) -> EvolutionConfig {
        EvolutionConfig {
            steps_per_time: self.steps_per_time,
            max_step: self.max_step,
            renorm_tolerance: self.renorm_tolerance,
            ..EvolutionConfig::default()
        }
    }

    /// Noise environments run per instance at `p_bar`; a silent campaign
    /// needs only one since every environment is empty.
    pub fn envs_for(&self, p_bar: f64) -> usize {
        if p_bar == 0.0 {
            1
        } else {
            self.envs_per_instance
        }
    }

    fn sorted_n(&self) -> Vec<usize> {
        let mut ns = self.n_range.clone();
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    fn sorted_powers(&self) -> Vec<f64> {
        let mut ps = self.p_bar_list.clone();
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        ps
    }

    /// Instance keys the campaign needs, in canonical order.
    pub fn instance_keys(&self) -> Vec<InstanceKey> {
        let mut keys = Vec::new();
        for n in self.sorted_n() {
            let powers: Vec<Option<f64>> = if self.shared_instances {
                vec![None]
            } else {
                self.sorted_powers().into_iter().map(Some).collect()
            };
            for p in powers {
                for id in 0..self.instances_per_n {
                    keys.push(InstanceKey {
                        n_bits: n,
                        p_bar_bits: p.map(f64::to_bits),
                        instance_id: id,
                    });
                }
            }
        }
        keys
    }

    /// Every job in canonical (N, P̄, instance, env) order.
    pub fn job_keys(&self) -> Vec<JobKey> {
        let mut keys = Vec::new();
        for n in self.sorted_n() {
            for p in self.sorted_powers() {
                for instance_id in 0..self.instances_per_n {
                    for env_id in 0..self.envs_for(p) {
                        keys.push(JobKey {
                            n_bits: n,
                            p_bar: p,
                            instance_id,
                            env_id,
                        });
                    }
                }
            }
        }
        keys
    }

    pub fn instance_key_for(&self, job: &JobKey) -> InstanceKey {
        InstanceKey {
            n_bits: job.n_bits,
            p_bar_bits: (!self.shared_instances).then(|| job.p_bar.to_bits()),
            instance_id: job.instance_id,
        }
    }
}

/// Identifies one generated instance; `p_bar_bits` is set only when
/// instances are not shared across noise powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceKey {
    pub n_bits: usize,
    pub p_bar_bits: Option<u64>,
    pub instance_id: usize,
}

impl InstanceKey {
    pub fn seed(&self, master: u64) -> u64 {
        match self.p_bar_bits {
            None => seed::instance_seed(master, self.n_bits, self.instance_id),
            Some(bits) => seed::instance_seed_for_power(
                master,
                self.n_bits,
                f64::from_bits(bits),
                self.instance_id,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JobKey {
    pub n_bits: usize,
    pub p_bar: f64,
    pub instance_id: usize,
    pub env_id: usize,
}

impl JobKey {
    pub fn env_seed(&self, master: u64) -> u64 {
        seed::environment_seed(master, self.n_bits, self.p_bar, self.instance_id, self.env_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRecord {
    pub n_bits: usize,
    pub p_bar: f64,
    pub instance_id: usize,
    pub env_id: usize,
    /// Required runtime; for a quarantined run, the last probed runtime.
    pub t_star: f64,
    pub success_prob: f64,
    /// Largest failing probe below `t_star` with its success probability.
    #[serde(skip)]
    pub lower: Option<(f64, f64)>,
    pub quarantined: bool,
}

impl RuntimeRecord {
    pub fn key(&self) -> JobKey {
        JobKey {
            n_bits: self.n_bits,
            p_bar: self.p_bar,
            instance_id: self.instance_id,
            env_id: self.env_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianPoint {
    pub n_bits: usize,
    pub p_bar: f64,
    pub median: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_samples: usize,
    /// More than 2% of the runs at this point were quarantined.
    #[serde(skip)]
    pub degraded: bool,
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub records: Vec<RuntimeRecord>,
    pub medians: Vec<MedianPoint>,
    pub quarantined: Vec<JobKey>,
}

impl CampaignResult {
    pub fn any_degraded(&self) -> bool {
        self.medians.iter().any(|m| m.degraded)
    }
}

pub type InstanceSet = BTreeMap<InstanceKey, Ec3Instance>;

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Generates every instance the campaign needs from the master seed.
pub fn generate_instances(config: &CampaignConfig) -> Result<InstanceSet> {
    let keys = config.instance_keys();
    let master = config.master_seed;
    let generated = with_pool(config.jobs, || {
        keys.par_iter()
            .map(|key| {
                let mut rng = ChaCha8Rng::seed_from_u64(key.seed(master));
                generate_usa_instance(key.n_bits, &mut rng).map(|inst| (*key, inst))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(generated.into_iter().collect())
}

/// Samples the environment of `job` for a probe of length `horizon`.
pub fn job_environment(
    config: &CampaignConfig,
    job: &JobKey,
    horizon: f64,
) -> Result<Option<NoiseEnvironment>> {
    if job.p_bar == 0.0 {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(job.env_seed(config.master_seed));
    sample_environment(&config.noise_params(job.p_bar), horizon, job.n_bits, &mut rng).map(Some)
}

/// Runs one job; runtime-ceiling and instability failures become quarantined records.
pub fn run_job(config: &CampaignConfig, ham: &SearchHamiltonian, job: &JobKey) -> Result<RuntimeRecord> {
    let started = Instant::now();
    let search = required_runtime(
        ham,
        |t| job_environment(config, job, t),
        config.success_threshold,
        &config.probe_policy(),
        &config.evolution(),
    );
    let record = |t_star, success_prob, lower, quarantined| RuntimeRecord {
        n_bits: job.n_bits,
        p_bar: job.p_bar,
        instance_id: job.instance_id,
        env_id: job.env_id,
        t_star,
        success_prob,
        lower,
        quarantined,
    };
    let out = match search {
        Ok(s) => record(s.t_star, s.success, s.lower, false),
        Err(Error::RuntimeCeiling {
            last_time,
            last_success,
            ..
        }) => {
            log::warn!("quarantined {job:?}: no success up to the runtime ceiling");
            record(last_time, last_success, None, true)
        }
        Err(Error::NumericalInstability(msg)) => {
            log::warn!("quarantined {job:?}: {msg}");
            record(f64::NAN, 0.0, None, true)
        }
        Err(e) => return Err(e),
    };
    log::debug!(
        "job N={} P={} inst={} env={} T*={} in {:.2?}",
        job.n_bits,
        job.p_bar,
        job.instance_id,
        job.env_id,
        out.t_star,
        started.elapsed()
    );
    Ok(out)
}

/// Groups records by (N, P̄) and summarizes each group.
pub fn summarize(records: &[RuntimeRecord]) -> Vec<MedianPoint> {
    let mut groups: BTreeMap<(usize, u64), (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        // Non-negative floats order like their bit patterns.
        let entry = groups.entry((r.n_bits, r.p_bar.to_bits())).or_default();
        if r.quarantined {
            entry.1 += 1;
        } else {
            entry.0.push(r.t_star);
        }
    }
    groups
        .into_iter()
        .filter_map(|((n_bits, p_bits), (samples, quarantined))| {
            let p_bar = f64::from_bits(p_bits);
            let total = samples.len() + quarantined;
            let degraded = quarantined as f64 > DEGRADED_FRACTION * total as f64;
            if samples.is_empty() {
                log::warn!("no usable runtimes at N={n_bits}, P={p_bar}");
                return None;
            }
            let ci = median_with_ci(&samples).unwrap_or_else(|_| {
                log::warn!(
                    "only {} runtimes at N={n_bits}, P={p_bar}; interval spans the full sample",
                    samples.len()
                );
                let mut sorted = samples.clone();
                sorted.sort_by(f64::total_cmp);
                MedianCi {
                    median: median_of_sorted(&sorted),
                    ci_low: sorted[0],
                    ci_high: sorted[sorted.len() - 1],
                    n_samples: sorted.len(),
                }
            });
            Some(MedianPoint {
                n_bits,
                p_bar,
                median: ci.median,
                ci_low: ci.ci_low,
                ci_high: ci.ci_high,
                n_samples: ci.n_samples,
                degraded,
            })
        })
        .collect()
}

pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignResult> {
    config.validate()?;
    let instances = generate_instances(config)?;
    run_campaign_on(config, &instances)
}

/// Runs the campaign against a prepared instance set (for example, loaded from files).
pub fn run_campaign_on(config: &CampaignConfig, instances: &InstanceSet) -> Result<CampaignResult> {
    config.validate()?;
    let mut hamiltonians: BTreeMap<InstanceKey, Arc<SearchHamiltonian>> = BTreeMap::new();
    for key in config.instance_keys() {
        let inst = instances.get(&key).ok_or_else(|| {
            Error::input(format!(
                "missing instance N={} id={}",
                key.n_bits, key.instance_id
            ))
        })?;
        if inst.n_bits() != key.n_bits {
            return Err(Error::input(format!(
                "instance N={} id={} has {} bits",
                key.n_bits,
                key.instance_id,
                inst.n_bits()
            )));
        }
        hamiltonians.insert(key, Arc::new(SearchHamiltonian::from_instance(inst)?));
    }

    let jobs = config.job_keys();
    let records = with_pool(config.jobs, || {
        jobs.par_iter()
            .map(|job| run_job(config, &hamiltonians[&config.instance_key_for(job)], job))
            .collect::<Result<Vec<_>>>()
    })??;

    let quarantined: Vec<JobKey> = records
        .iter()
        .filter(|r| r.quarantined)
        .map(RuntimeRecord::key)
        .collect();
    if !quarantined.is_empty() {
        log::warn!("{} of {} runs quarantined", quarantined.len(), records.len());
    }
    let medians = summarize(&records);
    Ok(CampaignResult {
        records,
        medians,
        quarantined,
    })
}
