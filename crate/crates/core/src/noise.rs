//! Classical square-pulse noise fields and their Zeeman coupling.
//!
//! Each qubit field `N_j(t)` is a sum of square pulses of half-width `τ`,
//! centered at times uniform on `[0, T]`, with Gaussian heights of variance
//! `σ²` on every active axis. Pulse counts are Poisson with mean `n̄ T`, where
//! `n̄ = P̄ / (2 σ² τ)` fixes the time-averaged power `P̄`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    X,
    Y,
    Z,
    Xyz,
}

impl Polarization {
    /// Axes (0 = x, 1 = y, 2 = z) that carry a nonzero height.
    pub fn active_axes(self) -> &'static [usize] {
        match self {
            Polarization::X => &[0],
            Polarization::Y => &[1],
            Polarization::Z => &[2],
            Polarization::Xyz => &[0, 1, 2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Uniformity {
    /// All qubits see one shared field.
    Uniform,
    /// Every qubit has an independently sampled field.
    NonUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    pub sigma: f64,
    pub tau: f64,
    pub p_bar: f64,
    pub polarization: Polarization,
    pub uniformity: Uniformity,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            sigma: 0.2,
            tau: 1.0,
            p_bar: 0.0,
            polarization: Polarization::Y,
            uniformity: Uniformity::NonUniform,
        }
    }
}

impl NoiseParams {
    pub fn with_power(p_bar: f64) -> Self {
        Self {
            p_bar,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::input(format!("sigma = {} must be positive", self.sigma)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::input(format!("tau = {} must be positive", self.tau)));
        }
        if !(self.p_bar >= 0.0 && self.p_bar.is_finite()) {
            return Err(Error::input(format!("p_bar = {} must be >= 0", self.p_bar)));
        }
        Ok(())
    }

    /// Average fluctuation rate `n̄ = P̄ / (2 σ² τ)`.
    pub fn rate(&self) -> f64 {
        self.p_bar / (2.0 * self.sigma * self.sigma * self.tau)
    }

    pub fn is_silent(&self) -> bool {
        self.p_bar == 0.0
    }
}

/// One square pulse: `heights` on `[center - τ, center + τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fluctuation {
    pub center: f64,
    pub heights: [f64; 3],
}

/// One realization of the per-qubit noise fields over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseEnvironment {
    pub params: NoiseParams,
    pub horizon: f64,
    pub per_qubit: Vec<Vec<Fluctuation>>,
}

fn sample_pulses(params: &NoiseParams, horizon: f64, seed: u64) -> Vec<Fluctuation> {
    let mean = params.rate() * horizon;
    if mean <= 0.0 {
        return Vec::new();
    }
    // Counts and pulse shapes come from separate streams, so for a fixed seed
    // pulse k keeps its relative position and heights when the horizon changes.
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut count_rng = ChaCha8Rng::seed_from_u64(seeds.random());
    let mut pulse_rng = ChaCha8Rng::seed_from_u64(seeds.random());
    let count = Poisson::new(mean)
        .expect("positive finite Poisson mean")
        .sample(&mut count_rng) as usize;
    let normal = Normal::new(0.0, params.sigma).expect("positive sigma");
    (0..count)
        .map(|_| {
            let center = horizon * pulse_rng.random::<f64>();
            let mut heights = [0.0; 3];
            for &axis in params.polarization.active_axes() {
                heights[axis] = normal.sample(&mut pulse_rng);
            }
            Fluctuation { center, heights }
        })
        .collect()
}

pub fn sample_environment<R: Rng + ?Sized>(
    params: &NoiseParams,
    horizon: f64,
    n_qubits: usize,
    rng: &mut R,
) -> Result<NoiseEnvironment> {
    params.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::input(format!("horizon {horizon} must be positive")));
    }
    let per_qubit = match params.uniformity {
        Uniformity::Uniform => {
            let shared = sample_pulses(params, horizon, rng.random());
            vec![shared; n_qubits]
        }
        Uniformity::NonUniform => {
            let seeds: Vec<u64> = (0..n_qubits).map(|_| rng.random()).collect();
            seeds
                .into_iter()
                .map(|seed| sample_pulses(params, horizon, seed))
                .collect()
        }
    };
    Ok(NoiseEnvironment {
        params: *params,
        horizon,
        per_qubit,
    })
}

impl NoiseEnvironment {
    /// Environment with no pulses at all.
    pub fn silent(params: NoiseParams, horizon: f64, n_qubits: usize) -> Self {
        Self {
            params,
            horizon,
            per_qubit: vec![Vec::new(); n_qubits],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.per_qubit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_qubit.iter().all(Vec::is_empty)
    }

    pub fn fluctuation_count(&self) -> usize {
        self.per_qubit.iter().map(Vec::len).sum()
    }

    /// Field on qubit `qubit` (0-based) at time `t`; overlapping pulses add.
    pub fn field_at(&self, qubit: usize, t: f64) -> Result<[f64; 3]> {
        let pulses = self.per_qubit.get(qubit).ok_or_else(|| {
            Error::input(format!("qubit {qubit} out of range for {} qubits", self.n_qubits()))
        })?;
        Ok(field_of(pulses, self.params.tau, t))
    }

    /// Fields on every qubit at time `t`.
    pub fn fields_at(&self, t: f64) -> Vec<[f64; 3]> {
        self.per_qubit
            .iter()
            .map(|p| field_of(p, self.params.tau, t))
            .collect()
    }

    /// Sorted, deduplicated pulse edges lying strictly inside `(0, horizon)`.
    pub fn pulse_edges(&self) -> Vec<f64> {
        let tau = self.params.tau;
        let mut edges: Vec<f64> = self
            .per_qubit
            .iter()
            .flatten()
            .flat_map(|p| [p.center - tau, p.center + tau])
            .filter(|&e| e > 0.0 && e < self.horizon)
            .collect();
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        edges
    }

    /// `Σ_j max_t |N_j(t)|_1`, an upper bound on the operator norm of `H_int`.
    pub fn max_field_l1(&self) -> f64 {
        let tau = self.params.tau;
        self.per_qubit
            .iter()
            .map(|pulses| {
                // Sweep pulse starts (+) and ends (-) in time order; ends first on ties.
                let mut events: Vec<(f64, bool, [f64; 3])> = pulses
                    .iter()
                    .flat_map(|p| [(p.center - tau, true, p.heights), (p.center + tau, false, p.heights)])
                    .collect();
                events.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
                let mut field = [0.0f64; 3];
                let mut max: f64 = 0.0;
                for (_, start, heights) in events {
                    let sign = if start { 1.0 } else { -1.0 };
                    for (f, h) in field.iter_mut().zip(heights) {
                        *f += sign * h;
                    }
                    max = max.max(field.iter().map(|f| f.abs()).sum());
                }
                max
            })
            .sum()
    }

    /// `(1 / (N T)) Σ_j ∫_0^T |N_j(t)|² dt`, integrated exactly over the
    /// piecewise-constant fields.
    pub fn measured_average_power(&self) -> f64 {
        if self.n_qubits() == 0 || self.horizon <= 0.0 {
            return 0.0;
        }
        let tau = self.params.tau;
        let total: f64 = self
            .per_qubit
            .iter()
            .map(|pulses| {
                let mut cuts = vec![0.0, self.horizon];
                for p in pulses {
                    for e in [p.center - tau, p.center + tau] {
                        if e > 0.0 && e < self.horizon {
                            cuts.push(e);
                        }
                    }
                }
                cuts.sort_by(f64::total_cmp);
                cuts.windows(2)
                    .map(|w| {
                        let f = field_of(pulses, tau, 0.5 * (w[0] + w[1]));
                        (w[1] - w[0]) * (f[0] * f[0] + f[1] * f[1] + f[2] * f[2])
                    })
                    .sum::<f64>()
            })
            .sum();
        total / (self.n_qubits() as f64 * self.horizon)
    }
}

fn field_of(pulses: &[Fluctuation], tau: f64, t: f64) -> [f64; 3] {
    let mut field = [0.0; 3];
    for p in pulses {
        if t >= p.center - tau && t < p.center + tau {
            for (f, h) in field.iter_mut().zip(p.heights) {
                *f += h;
            }
        }
    }
    field
}

/// `H_int(t) psi = -Σ_j σ_j · N_j(t) psi`.
pub fn apply_interaction(env: &NoiseEnvironment, t: f64, psi: &StateVector) -> Result<StateVector> {
    psi.check_dim(1 << env.n_qubits())?;
    let amps = psi.amplitudes();
    let mut out = StateVector::zeros(env.n_qubits())?;
    let dst = out.amplitudes_mut();
    for (j, [nx, ny, nz]) in env.fields_at(t).into_iter().enumerate() {
        let bit = 1 << j;
        for (k, slot) in dst.iter_mut().enumerate() {
            let partner = amps[k ^ bit];
            let set = k & bit != 0;
            // σ_y|0⟩ = i|1⟩, σ_y|1⟩ = -i|0⟩
            let sy = if set {
                Complex64::i() * partner
            } else {
                -Complex64::i() * partner
            };
            let sz = if set { -amps[k] } else { amps[k] };
            *slot -= nx * partner + ny * sy + nz * sz;
        }
    }
    Ok(out)
}

/// Probability that a pulse covers `t = 0` (or `t = T`): `P̄ τ / (2 σ² T)`.
pub fn endpoint_fluctuation_probability(params: &NoiseParams, total_time: f64) -> Result<f64> {
    if params.sigma == 0.0 {
        return Err(Error::input("sigma must be nonzero"));
    }
    if !(total_time > 0.0) {
        return Err(Error::input(format!("total time {total_time} must be positive")));
    }
    Ok(params.p_bar * params.tau / (2.0 * params.sigma * params.sigma * total_time))
}
