//! On-disk formats: instance and environment JSON, campaign CSVs, and the
//! provenance record.
//!
//! CSV outputs open with a single `#` comment line carrying the provenance
//! summary; readers here skip it.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ec3::{Assignment, Clause, Ec3Instance};
use crate::error::{Error, Result};
use crate::fitting::{FitResult, ModelKind};
use crate::noise::NoiseEnvironment;
use crate::protocol::{CampaignConfig, MedianPoint, RuntimeRecord};
use crate::CODE_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n_bits: usize,
    pub clauses: Vec<[usize; 3]>,
    pub seed: u64,
    /// The unique satisfying assignment, `z_1` first.
    pub solution: Vec<u8>,
}

impl InstanceFile {
    /// Records `instance`, which must have exactly one solution.
    pub fn new(instance: &Ec3Instance, seed: u64) -> Result<Self> {
        let solutions = instance.enumerate_solutions()?;
        let [solution] = solutions.as_slice() else {
            return Err(Error::input(format!(
                "instance has {} solutions, expected exactly one",
                solutions.len()
            )));
        };
        Ok(Self {
            n_bits: instance.n_bits(),
            clauses: instance.clauses().iter().map(Clause::indices).collect(),
            seed,
            solution: solution.to_bits(),
        })
    }

    /// Rebuilds the instance and checks the recorded solution still solves it uniquely.
    pub fn to_instance(&self) -> Result<Ec3Instance> {
        let clauses = self
            .clauses
            .iter()
            .map(|&[a, b, c]| Clause::new(a, b, c))
            .collect::<Result<Vec<_>>>()?;
        let instance = Ec3Instance::new(self.n_bits, clauses)?;
        let recorded = Assignment::from_bits(&self.solution)?;
        let solutions = instance.enumerate_solutions()?;
        if solutions != [recorded] {
            return Err(Error::input(
                "recorded solution is not the unique solution of the clauses",
            ));
        }
        Ok(instance)
    }
}

pub fn instance_file_name(n_bits: usize, id: usize) -> String {
    format!("ec3_N{n_bits}_inst{id}.json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

pub fn write_instance(dir: &Path, id: usize, instance: &Ec3Instance, seed: u64) -> Result<PathBuf> {
    let path = dir.join(instance_file_name(instance.n_bits(), id));
    write_json(&path, &InstanceFile::new(instance, seed)?)?;
    Ok(path)
}

pub fn read_instance(path: &Path) -> Result<(Ec3Instance, u64)> {
    let file: InstanceFile = read_json(path)?;
    Ok((file.to_instance()?, file.seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: usize,
    pub seed: u64,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceManifest {
    pub code_version: String,
    pub n_bits: usize,
    pub master_seed: u64,
    pub instances: Vec<ManifestEntry>,
}

/// Audit record of one sampled noise environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentFile {
    pub seed: u64,
    pub environment: NoiseEnvironment,
}

/// Everything needed to reproduce a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub code_version: String,
    pub integrator: String,
    pub config: CampaignConfig,
}

impl Provenance {
    pub fn new(config: &CampaignConfig) -> Self {
        Self {
            code_version: CODE_VERSION.to_string(),
            integrator: "fixed-step classical RK4, steps aligned to pulse edges".to_string(),
            config: config.clone(),
        }
    }

    /// One-line summary written at the top of each CSV.
    pub fn summary_line(&self) -> String {
        let c = &self.config;
        format!(
            "# {}; master_seed={}; success_threshold={}; integrator=rk4 steps_per_time={} max_step={} renorm_tolerance={}; full record: campaign.json",
            self.code_version, c.master_seed, c.success_threshold, c.steps_per_time, c.max_step, c.renorm_tolerance
        )
    }
}

fn write_csv<T: Serialize>(path: &Path, header_comment: Option<&str>, rows: &[T]) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    if let Some(line) = header_comment {
        debug_assert!(line.starts_with('#'));
        writeln!(file, "{line}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<T>, _>>()?;
    Ok(rows)
}

pub fn write_runtimes_csv(path: &Path, provenance: &Provenance, records: &[RuntimeRecord]) -> Result<()> {
    write_csv(path, Some(&provenance.summary_line()), records)
}

pub fn read_runtimes_csv(path: &Path) -> Result<Vec<RuntimeRecord>> {
    read_csv(path)
}

pub fn write_medians_csv(path: &Path, provenance: &Provenance, points: &[MedianPoint]) -> Result<()> {
    write_csv(path, Some(&provenance.summary_line()), points)
}

pub fn read_medians_csv(path: &Path) -> Result<Vec<MedianPoint>> {
    read_csv(path)
}

/// One row of `fits.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub model: ModelKind,
    pub p_bar: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub a: f64,
    pub b: f64,
    pub chi2: f64,
    pub p_value: f64,
    pub dof: usize,
}

impl FitRow {
    pub fn new(p_bar: f64, fit: &FitResult) -> Self {
        Self {
            model: fit.model,
            p_bar,
            n_min: fit.n_min,
            n_max: fit.n_max,
            a: fit.a,
            b: fit.b,
            chi2: fit.chi2,
            p_value: fit.p_value,
            dof: fit.dof,
        }
    }
}

pub fn write_fits_csv(path: &Path, header_comment: Option<&str>, rows: &[FitRow]) -> Result<()> {
    write_csv(path, header_comment, rows)
}

pub fn read_fits_csv(path: &Path) -> Result<Vec<FitRow>> {
    read_csv(path)
}

/// Generic row writer for plot-data files.
pub fn write_rows<T: Serialize>(path: &Path, header_comment: Option<&str>, rows: &[T]) -> Result<()> {
    write_csv(path, header_comment, rows)
}
