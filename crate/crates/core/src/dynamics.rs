//! Schrödinger evolution under `H(t) + H_int(t)` with fixed-step RK4.
//!
//! Steps never straddle a pulse edge: the horizon is cut at every edge and
//! each piece is divided into equal steps no longer than the base step, so
//! the noise term is constant within every step.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{ground_state_initial, ProblemDiagonal, SearchHamiltonian};
use crate::noise::NoiseEnvironment;
use crate::state::StateVector;

/// Integration settings. `base_step = None` selects `T / steps_per_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub total_time: f64,
    pub base_step: Option<f64>,
    /// Default step count over the whole horizon.
    pub steps_per_time: usize,
    /// Upper bound on any step; tightened to `τ / 10` when noise is present.
    pub max_step: f64,
    /// Upper bound on `step * ‖H‖` for RK4 stability.
    pub stability_limit: f64,
    pub renorm_tolerance: f64,
    /// Per-step norm drift treated as a failed integration.
    pub instability_tolerance: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            total_time: 1.0,
            base_step: None,
            steps_per_time: 2000,
            max_step: 0.1,
            stability_limit: 1.0,
            renorm_tolerance: 1e-8,
            instability_tolerance: 1e-4,
        }
    }
}

impl EvolutionConfig {
    pub fn new(total_time: f64) -> Self {
        Self {
            total_time,
            ..Self::default()
        }
    }

    pub fn with_total_time(self, total_time: f64) -> Self {
        Self { total_time, ..self }
    }

    pub fn with_step(self, step: f64) -> Self {
        Self {
            base_step: Some(step),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(Error::input(format!(
                "total time {} must be positive",
                self.total_time
            )));
        }
        if let Some(step) = self.base_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::input(format!("step {step} must be positive")));
            }
        }
        if self.steps_per_time == 0 || !(self.max_step > 0.0) || !(self.stability_limit > 0.0) {
            return Err(Error::input("step policy parameters must be positive"));
        }
        Ok(())
    }

    /// Step size before edge alignment.
    pub fn step_size(&self, tau: Option<f64>, norm_bound: f64) -> f64 {
        let mut step = self
            .base_step
            .unwrap_or(self.total_time / self.steps_per_time as f64);
        if self.base_step.is_none() {
            step = step.min(self.max_step);
            if norm_bound > 0.0 {
                step = step.min(self.stability_limit / norm_bound);
            }
        }
        if let Some(tau) = tau {
            step = step.min(tau / 10.0);
        }
        step
    }
}

/// `(start, length)` of every integration step.
pub fn step_schedule(total_time: f64, step: f64, edges: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts = Vec::with_capacity(edges.len() + 2);
    cuts.push(0.0);
    cuts.extend(edges.iter().copied().filter(|&e| e > 0.0 && e < total_time));
    cuts.push(total_time);
    let mut steps = Vec::new();
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let count = ((len / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = len / count as f64;
        steps.extend((0..count).map(|i| (w[0] + i as f64 * h, h)));
    }
    steps
}

#[derive(Debug, Clone)]
pub struct EvolutionOutcome {
    pub state: StateVector,
    pub steps: usize,
    pub renormalizations: usize,
}

/// The step schedule `evolve` uses for this Hamiltonian, environment and config.
pub fn schedule_for(
    ham: &SearchHamiltonian,
    env: Option<&NoiseEnvironment>,
    config: &EvolutionConfig,
) -> Vec<(f64, f64)> {
    let active = env.filter(|e| !e.is_empty());
    let max_field = active.map_or(0.0, NoiseEnvironment::max_field_l1);
    let step = config.step_size(
        active.map(|e| e.params.tau),
        ham.norm_bound(max_field),
    );
    let edges = active.map(NoiseEnvironment::pulse_edges).unwrap_or_default();
    step_schedule(config.total_time, step, &edges)
}

/// Evolves the ground state of `H_i` to `t = T`.
pub fn evolve(
    ham: &SearchHamiltonian,
    env: Option<&NoiseEnvironment>,
    config: &EvolutionConfig,
) -> Result<EvolutionOutcome> {
    evolve_from(ham, env, config, ground_state_initial(ham.n_qubits())?)
}

pub fn evolve_from(
    ham: &SearchHamiltonian,
    env: Option<&NoiseEnvironment>,
    config: &EvolutionConfig,
    initial: StateVector,
) -> Result<EvolutionOutcome> {
    config.validate()?;
    initial.check_dim(ham.dim())?;
    if let Some(e) = env {
        if e.n_qubits() != ham.n_qubits() {
            return Err(Error::input(format!(
                "environment has {} qubits, Hamiltonian has {}",
                e.n_qubits(),
                ham.n_qubits()
            )));
        }
        let mismatch = (e.horizon - config.total_time).abs();
        if mismatch > 1e-12 * config.total_time.max(1.0) {
            return Err(Error::input(format!(
                "environment horizon {} differs from runtime {}",
                e.horizon, config.total_time
            )));
        }
    }
    let active = env.filter(|e| !e.is_empty());
    let schedule = schedule_for(ham, env, config);

    let total = config.total_time;
    let dim = ham.dim();
    let zero = Complex64::new(0.0, 0.0);
    let mut psi = initial;
    let mut k1 = vec![zero; dim];
    let mut k2 = vec![zero; dim];
    let mut k3 = vec![zero; dim];
    let mut k4 = vec![zero; dim];
    let mut probe = vec![zero; dim];
    let mut renormalizations = 0;
    let mut norm_sqr = psi.norm_sqr();

    for &(t0, h) in &schedule {
        let fields = active.map(|e| e.fields_at(t0 + 0.5 * h));
        let fields = fields.as_deref();
        let s = |t: f64| (t / total).clamp(0.0, 1.0);
        // k_i holds H y_i; the -i factor is folded into the combination weights.
        let half = Complex64::new(0.0, -0.5 * h);
        let full = Complex64::new(0.0, -h);
        let y = psi.amplitudes_mut();

        ham.apply_into(s(t0), fields, y, &mut k1);
        for ((p, &a), &k) in probe.iter_mut().zip(y.iter()).zip(&k1) {
            *p = a + half * k;
        }
        ham.apply_into(s(t0 + 0.5 * h), fields, &probe, &mut k2);
        for ((p, &a), &k) in probe.iter_mut().zip(y.iter()).zip(&k2) {
            *p = a + half * k;
        }
        ham.apply_into(s(t0 + 0.5 * h), fields, &probe, &mut k3);
        for ((p, &a), &k) in probe.iter_mut().zip(y.iter()).zip(&k3) {
            *p = a + full * k;
        }
        ham.apply_into(s(t0 + h), fields, &probe, &mut k4);
        let sixth = Complex64::new(0.0, -h / 6.0);
        for (i, a) in y.iter_mut().enumerate() {
            *a += sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }

        let new_norm_sqr = psi.norm_sqr();
        let step_drift = (new_norm_sqr.sqrt() - norm_sqr.sqrt()).abs();
        if !new_norm_sqr.is_finite() || step_drift > config.instability_tolerance {
            return Err(Error::NumericalInstability(format!(
                "norm changed by {step_drift:e} in one step at t = {t0} (h = {h}); reduce the step"
            )));
        }
        norm_sqr = new_norm_sqr;
        if (norm_sqr.sqrt() - 1.0).abs() > config.renorm_tolerance {
            log::debug!(
                "renormalizing at t = {t0}: norm drifted to {}",
                norm_sqr.sqrt()
            );
            psi.normalize();
            norm_sqr = psi.norm_sqr();
            renormalizations += 1;
        }
    }

    if renormalizations > 0 {
        log::debug!("{renormalizations} renormalizations over {} steps", schedule.len());
    }
    Ok(EvolutionOutcome {
        state: psi,
        steps: schedule.len(),
        renormalizations,
    })
}

/// Probability of measuring a zero-cost basis state.
pub fn success_probability(psi: &StateVector, diag: &ProblemDiagonal) -> Result<f64> {
    psi.check_dim(diag.dim())?;
    let mut any = false;
    let mut p = 0.0;
    for k in diag.ground_indices() {
        any = true;
        p += psi.amplitudes()[k].norm_sqr();
    }
    if !any {
        return Err(Error::input("instance is unsatisfiable: no zero-cost state"));
    }
    Ok(p.min(1.0))
}
