//! Required-runtime search: geometric scan then bisection on `T`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, success_probability, EvolutionConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::SearchHamiltonian;
use crate::noise::NoiseEnvironment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePolicy {
    pub t_initial: f64,
    pub growth: f64,
    /// Bisection stops once `(hi - lo) <= bisection_width * lo`.
    pub bisection_width: f64,
    pub ceiling: f64,
}

impl Default for ProbePolicy {
    fn default() -> Self {
        Self {
            t_initial: 1.0,
            growth: 1.3,
            bisection_width: 0.05,
            ceiling: 1e4,
        }
    }
}

impl ProbePolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_initial > 0.0) || !(self.growth > 1.0) || !(self.bisection_width > 0.0) {
            return Err(Error::input("probe policy needs t_initial > 0, growth > 1, width > 0"));
        }
        if !(self.ceiling >= self.t_initial) {
            return Err(Error::input("runtime ceiling below the first probe"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeSearch {
    pub t_star: f64,
    pub success: f64,
    /// Largest probed runtime below `t_star` and its success probability;
    /// `None` when the first probe already succeeded.
    pub lower: Option<(f64, f64)>,
    pub probes: Vec<(f64, f64)>,
}

/// Smallest probed `T` whose success probability reaches `threshold`.
///
/// `env_for(T)` supplies the noise realization for a probe of length `T`.
pub fn required_runtime<F>(
    ham: &SearchHamiltonian,
    mut env_for: F,
    threshold: f64,
    policy: &ProbePolicy,
    evolution: &EvolutionConfig,
) -> Result<RuntimeSearch>
where
    F: FnMut(f64) -> Result<Option<NoiseEnvironment>>,
{
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::input(format!("threshold {threshold} outside (0, 1)")));
    }
    policy.validate()?;
    let mut probes = Vec::new();
    let mut probe = |t: f64| -> Result<f64> {
        let env = env_for(t)?;
        let outcome = evolve(ham, env.as_ref(), &evolution.with_total_time(t))?;
        let p = success_probability(&outcome.state, ham.diagonal())?;
        probes.push((t, p));
        Ok(p)
    };

    let mut t = policy.t_initial;
    let mut lower: Option<(f64, f64)> = None;
    let (mut hi, mut hi_success) = loop {
        let p = probe(t)?;
        if p >= threshold {
            break (t, p);
        }
        lower = Some((t, p));
        let next = t * policy.growth;
        if next > policy.ceiling {
            return Err(Error::RuntimeCeiling {
                ceiling: policy.ceiling,
                threshold,
                last_time: t,
                last_success: p,
            });
        }
        t = next;
    };

    if let Some((mut lo, mut lo_success)) = lower {
        while hi - lo > policy.bisection_width * lo {
            let mid = 0.5 * (lo + hi);
            let p = probe(mid)?;
            if p >= threshold {
                hi = mid;
                hi_success = p;
            } else {
                lo = mid;
                lo_success = p;
            }
        }
        lower = Some((lo, lo_success));
    }

    Ok(RuntimeSearch {
        t_star: hi,
        success: hi_success,
        lower,
        probes,
    })
}
