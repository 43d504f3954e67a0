//! Interpolating search Hamiltonian `H(s) = (1 - s) H_i + s H_P`.
//!
//! `H_i = Σ_j (d_j / 2)(1 - σ_x^j)` with `d_j` the number of clauses touching
//! bit `j`; its ground state is the uniform superposition with energy 0.
//! `H_P` is diagonal with the clause-violation count of each basis state.
//! Operators are applied matrix-free: `σ_x^j` pairs index `k` with `k ^ (1 << j)`.

use num_complex::Complex64;

use crate::ec3::{Ec3Instance, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Violation count of every basis state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemDiagonal {
    costs: Vec<u32>,
}

impl ProblemDiagonal {
    pub fn new(costs: Vec<u32>) -> Result<Self> {
        if costs.is_empty() || !costs.len().is_power_of_two() {
            return Err(Error::input("problem diagonal length must be a power of two"));
        }
        Ok(Self { costs })
    }

    pub fn costs(&self) -> &[u32] {
        &self.costs
    }

    pub fn dim(&self) -> usize {
        self.costs.len()
    }

    /// Basis indices with zero cost.
    pub fn ground_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.costs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .map(|(k, _)| k)
    }

    pub fn min_cost(&self) -> u32 {
        self.costs.iter().copied().min().unwrap_or(0)
    }

    pub fn max_cost(&self) -> u32 {
        self.costs.iter().copied().max().unwrap_or(0)
    }
}

pub fn build_problem_diagonal(instance: &Ec3Instance) -> Result<ProblemDiagonal> {
    let n = instance.n_bits();
    if n > DEFAULT_ENUMERATION_CAP {
        return Err(Error::Resource(format!(
            "problem diagonal over {n} bits exceeds the cap of {DEFAULT_ENUMERATION_CAP}"
        )));
    }
    let costs = (0..1usize << n).map(|k| instance.violations_at(k)).collect();
    ProblemDiagonal::new(costs)
}

/// Clause degree of every bit, 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeVector {
    degrees: Vec<u32>,
}

impl DegreeVector {
    pub fn new(degrees: Vec<u32>) -> Self {
        Self { degrees }
    }

    pub fn from_instance(instance: &Ec3Instance) -> Self {
        Self::new(instance.degrees())
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn n_qubits(&self) -> usize {
        self.degrees.len()
    }

    pub fn total(&self) -> u32 {
        self.degrees.iter().sum()
    }
}

/// Linear schedule `s = t / T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationSchedule {
    total_time: f64,
}

impl InterpolationSchedule {
    pub fn new(total_time: f64) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::input(format!("total time {total_time} must be positive")));
        }
        Ok(Self { total_time })
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn s(&self, t: f64) -> f64 {
        (t / self.total_time).clamp(0.0, 1.0)
    }
}

/// Uniform superposition, the ground state of `H_i`.
pub fn ground_state_initial(n_bits: usize) -> Result<StateVector> {
    if n_bits == 0 {
        return Err(Error::input("register needs at least one qubit"));
    }
    let mut state = StateVector::zeros(n_bits)?;
    let amp = Complex64::new((state.dim() as f64).sqrt().recip(), 0.0);
    state.amplitudes_mut().iter_mut().for_each(|a| *a = amp);
    Ok(state)
}

pub fn apply_initial(degrees: &DegreeVector, psi: &StateVector) -> Result<StateVector> {
    psi.check_dim(1 << degrees.n_qubits())?;
    let amps = psi.amplitudes();
    let mut out = StateVector::zeros(degrees.n_qubits())?;
    let dst = out.amplitudes_mut();
    for (j, &d) in degrees.degrees().iter().enumerate() {
        let half = 0.5 * f64::from(d);
        let bit = 1 << j;
        for (k, slot) in dst.iter_mut().enumerate() {
            *slot += half * (amps[k] - amps[k ^ bit]);
        }
    }
    Ok(out)
}

pub fn apply_interpolated(
    s: f64,
    degrees: &DegreeVector,
    diag: &ProblemDiagonal,
    psi: &StateVector,
) -> Result<StateVector> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::input(format!("interpolation parameter {s} outside [0, 1]")));
    }
    if diag.dim() != 1 << degrees.n_qubits() {
        return Err(Error::input("degree vector and problem diagonal disagree on N"));
    }
    psi.check_dim(diag.dim())?;
    let mut out = apply_initial(degrees, psi)?;
    for ((o, a), &c) in out
        .amplitudes_mut()
        .iter_mut()
        .zip(psi.amplitudes())
        .zip(diag.costs())
    {
        *o = (1.0 - s) * *o + s * f64::from(c) * a;
    }
    Ok(out)
}

/// Precomputed `H(s)` data for one instance, with a fused kernel that also
/// folds in a piecewise-constant Zeeman noise term.
#[derive(Debug, Clone)]
pub struct SearchHamiltonian {
    degrees: DegreeVector,
    diag: ProblemDiagonal,
    half_degrees: Vec<f64>,
    costs: Vec<f64>,
    initial_offset: f64,
}

impl SearchHamiltonian {
    pub fn new(degrees: DegreeVector, diag: ProblemDiagonal) -> Result<Self> {
        if diag.dim() != 1 << degrees.n_qubits() {
            return Err(Error::input("degree vector and problem diagonal disagree on N"));
        }
        let half_degrees: Vec<f64> = degrees.degrees().iter().map(|&d| 0.5 * f64::from(d)).collect();
        Ok(Self {
            initial_offset: half_degrees.iter().sum(),
            costs: diag.costs().iter().map(|&c| f64::from(c)).collect(),
            half_degrees,
            degrees,
            diag,
        })
    }

    pub fn from_instance(instance: &Ec3Instance) -> Result<Self> {
        Self::new(
            DegreeVector::from_instance(instance),
            build_problem_diagonal(instance)?,
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.degrees.n_qubits()
    }

    pub fn dim(&self) -> usize {
        self.diag.dim()
    }

    pub fn degrees(&self) -> &DegreeVector {
        &self.degrees
    }

    pub fn diagonal(&self) -> &ProblemDiagonal {
        &self.diag
    }

    /// Upper bound on the operator norm of `H(s) + H_int` for the given
    /// fields: `max(Σ d_j, max cost) + Σ_j |N_j|_1`.
    pub fn norm_bound(&self, max_field_l1: f64) -> f64 {
        f64::from(self.degrees.total()).max(f64::from(self.diag.max_cost())) + max_field_l1
    }

    /// Writes `(H(s) + H_int) psi` into `out`, where `H_int = -Σ_j σ_j · N_j`
    /// and `fields[j]` is `N_j` (x, y, z). `fields = None` means no noise.
    pub fn apply_into(
        &self,
        s: f64,
        fields: Option<&[[f64; 3]]>,
        psi: &[Complex64],
        out: &mut [Complex64],
    ) {
        debug_assert_eq!(psi.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        let w_init = 1.0 - s;
        let offset = w_init * self.initial_offset;
        for ((o, &a), &c) in out.iter_mut().zip(psi).zip(&self.costs) {
            *o = (offset + s * c) * a;
        }
        for (j, &half) in self.half_degrees.iter().enumerate() {
            let [nx, ny, nz] = fields.map_or([0.0; 3], |f| f[j]);
            let real = -w_init * half - nx;
            // Coefficient on the partner amplitude for a target with bit j clear / set.
            let off_clear = Complex64::new(real, ny);
            let off_set = Complex64::new(real, -ny);
            let bit = 1usize << j;
            if ny == 0.0 && nz == 0.0 {
                for base in (0..psi.len()).step_by(bit << 1) {
                    let (lo_out, hi_out) = out[base..base + 2 * bit].split_at_mut(bit);
                    let (lo_in, hi_in) = psi[base..base + 2 * bit].split_at(bit);
                    for i in 0..bit {
                        lo_out[i] += real * hi_in[i];
                        hi_out[i] += real * lo_in[i];
                    }
                }
            } else if nz == 0.0 {
                for base in (0..psi.len()).step_by(bit << 1) {
                    for k0 in base..base + bit {
                        let k1 = k0 | bit;
                        out[k0] += off_clear * psi[k1];
                        out[k1] += off_set * psi[k0];
                    }
                }
            } else {
                for base in (0..psi.len()).step_by(bit << 1) {
                    for k0 in base..base + bit {
                        let k1 = k0 | bit;
                        out[k0] += off_clear * psi[k1] - nz * psi[k0];
                        out[k1] += off_set * psi[k0] + nz * psi[k1];
                    }
                }
            }
        }
    }

    pub fn apply(&self, s: f64, fields: Option<&[[f64; 3]]>, psi: &StateVector) -> Result<StateVector> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::input(format!("interpolation parameter {s} outside [0, 1]")));
        }
        psi.check_dim(self.dim())?;
        if let Some(f) = fields {
            if f.len() != self.n_qubits() {
                return Err(Error::input("one noise field per qubit required"));
            }
        }
        let mut out = StateVector::zeros(self.n_qubits())?;
        self.apply_into(s, fields, psi.amplitudes(), out.amplitudes_mut());
        Ok(out)
    }

    /// ⟨psi| H(s) |psi⟩ without noise.
    pub fn energy(&self, s: f64, psi: &StateVector) -> Result<f64> {
        let h_psi = self.apply(s, None, psi)?;
        Ok(psi.inner(&h_psi)?.re)
    }
}
