//! Power-law and exponential scaling fits of median runtime against `N`.
//!
//! Both models have two parameters and are fitted by weighted least squares:
//! an unweighted linearized regression seeds a damped Gauss–Newton
//! iteration with analytic Jacobians. Goodness of fit is the χ² upper-tail
//! probability with `points - 2` degrees of freedom.

mod gamma;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use gamma::{ln_gamma, regularized_gamma_q};

use crate::error::{Error, Result};
use crate::protocol::MedianPoint;

/// Normal quantile for a central 95% interval.
pub const Z_95: f64 = 1.959_963_984_540_054;

const MAX_ITERATIONS: usize = 500;
const GRADIENT_TOLERANCE: f64 = 1e-10;
const STALL_STEP_TOLERANCE: f64 = 1e-9;
const FLAT_STEP_TOLERANCE: f64 = 1e-6;
const POLISH_STEP_TOLERANCE: f64 = 1e-13;
const MAX_POLISH_STEPS: usize = 50;
const FLAT_CHI2_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub n_bits: usize,
    pub value: f64,
    pub sigma: f64,
}

impl DataPoint {
    pub fn new(n_bits: usize, value: f64, sigma: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::input(format!("data value {value} must be positive")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::input(format!("data sigma {sigma} must be positive")));
        }
        Ok(Self { n_bits, value, sigma })
    }

    /// Symmetrized standard error from a 95% interval: half-width / 1.96.
    /// A zero-width interval falls back to 0.1% of the median.
    pub fn from_median(point: &MedianPoint) -> Result<Self> {
        let mut sigma = 0.5 * (point.ci_high - point.ci_low) / Z_95;
        if !(sigma > 0.0) {
            sigma = 1e-3 * point.median;
        }
        Self::new(point.n_bits, point.median, sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `a N^b`
    PowerLaw,
    /// `a (exp(b N) - 1)`
    Exponential,
}

impl ModelKind {
    pub fn eval(self, a: f64, b: f64, n: f64) -> f64 {
        match self {
            ModelKind::PowerLaw => a * n.powf(b),
            ModelKind::Exponential => a * (b * n).exp_m1(),
        }
    }

    /// `(∂f/∂a, ∂f/∂b)` at `n`.
    fn jacobian(self, a: f64, b: f64, n: f64) -> (f64, f64) {
        match self {
            ModelKind::PowerLaw => {
                let p = n.powf(b);
                (p, a * p * n.ln())
            }
            ModelKind::Exponential => ((b * n).exp_m1(), a * n * (b * n).exp()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::PowerLaw => "power_law",
            ModelKind::Exponential => "exponential",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power_law" | "power" => Ok(ModelKind::PowerLaw),
            "exponential" | "exp" => Ok(ModelKind::Exponential),
            other => Err(Error::input(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub a: f64,
    pub b: f64,
    pub chi2: f64,
    pub p_value: f64,
    pub dof: usize,
    pub n_min: usize,
    pub n_max: usize,
}

impl FitResult {
    pub fn predict(&self, n: f64) -> f64 {
        self.model.eval(self.a, self.b, n)
    }
}

/// `P(χ² > chi2)` for `dof` degrees of freedom.
pub fn chi_square_tail(chi2: f64, dof: usize) -> Result<f64> {
    if dof == 0 {
        return Err(Error::input("chi-square needs at least one degree of freedom"));
    }
    if chi2.is_nan() || chi2 < 0.0 {
        return Err(Error::input(format!("chi2 = {chi2} must be >= 0")));
    }
    Ok(regularized_gamma_q(0.5 * dof as f64, 0.5 * chi2))
}

/// Weighted sum of squared residuals.
pub fn chi_square(model: ModelKind, a: f64, b: f64, points: &[DataPoint]) -> f64 {
    points
        .iter()
        .map(|p| {
            let r = (p.value - model.eval(a, b, p.n_bits as f64)) / p.sigma;
            r * r
        })
        .sum()
}

fn validate_points(points: &[DataPoint]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::input(format!(
            "need at least 3 points to fit, got {}",
            points.len()
        )));
    }
    let mut ns: Vec<usize> = points.iter().map(|p| p.n_bits).collect();
    ns.sort_unstable();
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::input("fit points must have distinct N"));
    }
    if ns[0] == 0 {
        return Err(Error::input("N = 0 cannot be fitted"));
    }
    Ok(())
}

/// Unweighted least-squares line `y = intercept + slope x`.
fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::input("degenerate design: all N equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

fn initial_guess(model: ModelKind, points: &[DataPoint]) -> Result<(f64, f64)> {
    let ln_y: Vec<f64> = points.iter().map(|p| p.value.ln()).collect();
    match model {
        ModelKind::PowerLaw => {
            let ln_n: Vec<f64> = points.iter().map(|p| (p.n_bits as f64).ln()).collect();
            let (intercept, slope) = linear_regression(&ln_n, &ln_y)?;
            Ok((intercept.exp(), slope))
        }
        ModelKind::Exponential => {
            let ns: Vec<f64> = points.iter().map(|p| p.n_bits as f64).collect();
            let (_, slope) = linear_regression(&ns, &ln_y)?;
            let b0 = slope.max(1e-6);
            let first = points
                .iter()
                .min_by_key(|p| p.n_bits)
                .expect("validated non-empty");
            Ok((first.value / (b0 * first.n_bits as f64).exp_m1(), b0))
        }
    }
}

/// Gradient of chi2 and the Gauss–Newton step at `(a, b)`.
fn gauss_newton_step(model: ModelKind, a: f64, b: f64, points: &[DataPoint]) -> ([f64; 2], Option<[f64; 2]>) {
    let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let n = p.n_bits as f64;
        let (da, db) = model.jacobian(a, b, n);
        let (da, db) = (da / p.sigma, db / p.sigma);
        let r = (p.value - model.eval(a, b, n)) / p.sigma;
        jaa += da * da;
        jab += da * db;
        jbb += db * db;
        ga += da * r;
        gb += db * r;
    }
    let gradient = [-2.0 * ga, -2.0 * gb];
    let det = jaa * jbb - jab * jab;
    let step = (det.is_finite() && det.abs() > f64::MIN_POSITIVE)
        .then(|| [(jbb * ga - jab * gb) / det, (jaa * gb - jab * ga) / det]);
    (gradient, step)
}

/// Relative size of a Gauss-Newton step.
fn relative_size(step: [f64; 2], a: f64, b: f64) -> f64 {
    (step[0] / a).abs().max((step[1] / b.abs().max(1.0)).abs())
}

/// Full Gauss-Newton steps from a point where chi2 no longer resolves progress.
/// The step comes from the gradient, which stays informative below chi2's
/// rounding floor; iteration stops once steps stop shrinking.
fn polish(model: ModelKind, mut a: f64, mut b: f64, points: &[DataPoint]) -> (f64, f64) {
    let mut last = f64::INFINITY;
    for _ in 0..MAX_POLISH_STEPS {
        let (_, Some(step)) = gauss_newton_step(model, a, b, points) else {
            break;
        };
        let size = relative_size(step, a, b);
        if !(size < last) || size > FLAT_STEP_TOLERANCE {
            break;
        }
        a += step[0];
        b += step[1];
        if size < POLISH_STEP_TOLERANCE {
            break;
        }
        last = size;
    }
    (a, b)
}

fn fit_model(model: ModelKind, points: &[DataPoint]) -> Result<FitResult> {
    validate_points(points)?;
    let (mut a, mut b) = initial_guess(model, points)?;
    let mut chi2 = chi_square(model, a, b, points);
    let dof = points.len() - 2;
    let n_min = points.iter().map(|p| p.n_bits).min().unwrap_or(0);
    let n_max = points.iter().map(|p| p.n_bits).max().unwrap_or(0);
    let result = |a: f64, b: f64, chi2: f64| -> Result<FitResult> {
        Ok(FitResult {
            model,
            a,
            b,
            chi2,
            p_value: chi_square_tail(chi2.max(0.0), dof)?,
            dof,
            n_min,
            n_max,
        })
    };
    if !chi2.is_finite() {
        return Err(Error::input("initial guess produced a non-finite chi2"));
    }

    for iteration in 0..MAX_ITERATIONS {
        let (gradient, step) = gauss_newton_step(model, a, b, points);
        if gradient[0].hypot(gradient[1]) < GRADIENT_TOLERANCE {
            return result(a, b, chi2);
        }
        let Some(step) = step else {
            return Err(Error::FitNonConvergence {
                iterations: iteration,
                best: Box::new(result(a, b, chi2)?),
            });
        };
        // Halve the step until chi2 does not increase.
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let (ta, tb) = (a + lambda * step[0], b + lambda * step[1]);
            let trial = chi_square(model, ta, tb, points);
            if trial.is_finite() && trial <= chi2 {
                accepted = Some((ta, tb, trial));
                break;
            }
            lambda *= 0.5;
        }
        let relative_step = relative_size(step, a, b);
        let tiny_step = relative_step < STALL_STEP_TOLERANCE;
        match accepted {
            Some((na, nb, nchi2)) => {
                let flat = chi2 - nchi2 <= FLAT_CHI2_TOLERANCE * chi2.max(1.0);
                let stalled = (nchi2 == chi2 && tiny_step)
                    || (flat && relative_step < FLAT_STEP_TOLERANCE);
                a = na;
                b = nb;
                chi2 = nchi2;
                if stalled {
                    let (a, b) = polish(model, a, b, points);
                    return result(a, b, chi_square(model, a, b, points));
                }
            }
            None if tiny_step => {
                let (a, b) = polish(model, a, b, points);
                return result(a, b, chi_square(model, a, b, points));
            }
            None => {
                return Err(Error::FitNonConvergence {
                    iterations: iteration,
                    best: Box::new(result(a, b, chi2)?),
                })
            }
        }
    }
    Err(Error::FitNonConvergence {
        iterations: MAX_ITERATIONS,
        best: Box::new(result(a, b, chi2)?),
    })
}

pub fn fit_power_law(points: &[DataPoint]) -> Result<FitResult> {
    fit_model(ModelKind::PowerLaw, points)
}

pub fn fit_exponential(points: &[DataPoint]) -> Result<FitResult> {
    fit_model(ModelKind::Exponential, points)
}

pub fn fit(model: ModelKind, points: &[DataPoint]) -> Result<FitResult> {
    fit_model(model, points)
}

/// Fit restricted to `n_min <= N <= n_max`.
pub fn restricted_fit(
    points: &[DataPoint],
    n_min: usize,
    n_max: usize,
    model: ModelKind,
) -> Result<FitResult> {
    let subset: Vec<DataPoint> = points
        .iter()
        .filter(|p| (n_min..=n_max).contains(&p.n_bits))
        .copied()
        .collect();
    if subset.len() < 3 {
        return Err(Error::input(format!(
            "only {} points in N range [{n_min}, {n_max}]",
            subset.len()
        )));
    }
    let mut fit = fit_model(model, &subset)?;
    fit.n_min = n_min;
    fit.n_max = n_max;
    Ok(fit)
}
