use num_complex::Complex64;

use crate::error::{Error, Result};

/// Register state: `2^N` complex amplitudes indexed by computational basis
/// state, qubit `j` being bit `1 << j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Largest register the simulator accepts.
    pub const MAX_QUBITS: usize = 26;

    pub fn zeros(n_qubits: usize) -> Result<Self> {
        if n_qubits > Self::MAX_QUBITS {
            return Err(Error::Resource(format!(
                "{n_qubits} qubits exceeds the state-vector limit of {}",
                Self::MAX_QUBITS
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes: vec![Complex64::new(0.0, 0.0); 1 << n_qubits],
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::input(format!(
                "state dimension {dim} is not a power of two"
            )));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zeros(n_qubits)?;
        let dim = state.dim();
        let slot = state
            .amplitudes
            .get_mut(index)
            .ok_or_else(|| Error::input(format!("basis index {index} >= {dim}")))?;
        *slot = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same_dim(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&self, factor: Complex64) -> StateVector {
        StateVector {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::input(format!(
                "state dimension {} does not match operator dimension {dim}",
                self.dim()
            )));
        }
        Ok(())
    }

    fn check_same_dim(&self, other: &StateVector) -> Result<()> {
        self.check_dim(other.dim())
    }
}
