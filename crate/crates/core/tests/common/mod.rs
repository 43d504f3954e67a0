//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the matrix-free kernels: Hamiltonians are built as
//! dense matrices from Kronecker products of 2×2 Pauli matrices, violation
//! counts are recomputed from clause bit tests, and chi-square tails come from
//! closed forms checked against quadrature.

#![allow(dead_code)]

use num_complex::Complex64;
use quads_core::{Ec3Instance, NoiseEnvironment};

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect())
        .collect()
}

pub fn pauli_x() -> Matrix {
    vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]
}

pub fn pauli_y() -> Matrix {
    vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]
}

pub fn pauli_z() -> Matrix {
    vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// `op` acting on qubit `j` (0-based, qubit 0 least significant) of `n`.
pub fn embed(op: &Matrix, j: usize, n: usize) -> Matrix {
    // Most significant qubit is the leftmost Kronecker factor.
    let mut out = identity(1);
    for q in (0..n).rev() {
        let factor = if q == j { op.clone() } else { identity(2) };
        out = kron(&out, &factor);
    }
    out
}

pub fn add_scaled(acc: &mut Matrix, m: &Matrix, w: f64) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (x, y) in ra.iter_mut().zip(rm) {
            *x += w * y;
        }
    }
}

pub fn mat_vec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Number of clauses violated by basis index `k`, from explicit bit tests.
pub fn violations(inst: &Ec3Instance, k: usize) -> usize {
    inst.clauses()
        .iter()
        .filter(|cl| {
            let ones = cl
                .indices()
                .iter()
                .filter(|&&i| (k >> (i - 1)) & 1 == 1)
                .count();
            ones != 1
        })
        .count()
}

pub fn clause_degrees(inst: &Ec3Instance) -> Vec<f64> {
    let mut d = vec![0.0; inst.n_bits()];
    for cl in inst.clauses() {
        for i in cl.indices() {
            d[i - 1] += 1.0;
        }
    }
    d
}

/// Dense `(1-s) H_i + s H_P - Σ_j σ_j · N_j`.
pub fn dense_hamiltonian(inst: &Ec3Instance, s: f64, fields: Option<&[[f64; 3]]>) -> Matrix {
    let n = inst.n_bits();
    let dim = 1 << n;
    let mut h = vec![vec![c(0.0, 0.0); dim]; dim];
    let id = identity(dim);
    for (j, d) in clause_degrees(inst).into_iter().enumerate() {
        add_scaled(&mut h, &id, (1.0 - s) * d / 2.0);
        add_scaled(&mut h, &embed(&pauli_x(), j, n), -(1.0 - s) * d / 2.0);
    }
    for (k, row) in h.iter_mut().enumerate() {
        row[k] += s * violations(inst, k) as f64;
    }
    if let Some(fields) = fields {
        for (j, f) in fields.iter().enumerate() {
            add_scaled(&mut h, &embed(&pauli_x(), j, n), -f[0]);
            add_scaled(&mut h, &embed(&pauli_y(), j, n), -f[1]);
            add_scaled(&mut h, &embed(&pauli_z(), j, n), -f[2]);
        }
    }
    h
}

/// Classical RK4 on `i dψ/dt = H(t) ψ` over the given steps, with the noise
/// field frozen at each step midpoint.
pub fn dense_rk4(
    inst: &Ec3Instance,
    env: Option<&NoiseEnvironment>,
    total: f64,
    steps: &[(f64, f64)],
    psi0: &[Complex64],
) -> Vec<Complex64> {
    let mut psi = psi0.to_vec();
    let minus_i = c(0.0, -1.0);
    for &(t0, h) in steps {
        let fields = env.map(|e| e.fields_at(t0 + 0.5 * h));
        let rhs = |t: f64, y: &[Complex64]| -> Vec<Complex64> {
            let m = dense_hamiltonian(inst, (t / total).clamp(0.0, 1.0), fields.as_deref());
            mat_vec(&m, y).into_iter().map(|v| minus_i * v).collect()
        };
        let axpy = |y: &[Complex64], k: &[Complex64], w: f64| -> Vec<Complex64> {
            y.iter().zip(k).map(|(a, b)| a + w * b).collect()
        };
        let k1 = rhs(t0, &psi);
        let k2 = rhs(t0 + 0.5 * h, &axpy(&psi, &k1, 0.5 * h));
        let k3 = rhs(t0 + 0.5 * h, &axpy(&psi, &k2, 0.5 * h));
        let k4 = rhs(t0 + h, &axpy(&psi, &k3, h));
        for i in 0..psi.len() {
            psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    psi
}

/// Uniform superposition, the ground state of `H_i` when every degree is positive.
pub fn uniform_state(n: usize) -> Vec<Complex64> {
    let dim = 1 << n;
    vec![c((dim as f64).sqrt().recip(), 0.0); dim]
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (simpson(f, a, m), simpson(f, m, b));
        if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
            return l + r + (l + r - whole) / 15.0;
        }
        rec(f, a, m, l, 0.5 * tol, depth - 1) + rec(f, m, b, r, 0.5 * tol, depth - 1)
    }
    rec(f, a, b, simpson(f, a, b), tol, 40)
}

/// `erfc(z)` for `z >= 0` as `(2/√π) ∫_z^∞ e^{-t²} dt`, truncated where the
/// integrand drops below double precision.
pub fn erfc(z: f64) -> f64 {
    let upper = z.max(0.0) + 40.0_f64.sqrt();
    2.0 / std::f64::consts::PI.sqrt() * integrate(&|t| (-t * t).exp(), z, upper, 1e-16)
}

/// `Γ(i + 1/2)` for integer `i >= 0`.
fn gamma_half(i: usize) -> f64 {
    let mut g = std::f64::consts::PI.sqrt();
    for m in 0..i {
        g *= m as f64 + 0.5;
    }
    g
}

/// Closed-form upper tail of the chi-square distribution.
pub fn chi2_tail_closed_form(x: f64, k: usize) -> f64 {
    let h = 0.5 * x;
    if k.is_multiple_of(2) {
        let mut term = 1.0;
        let mut sum = 1.0;
        for i in 1..k / 2 {
            term *= h / i as f64;
            sum += term;
        }
        (-h).exp() * sum
    } else {
        let tail: f64 = (1..=(k - 1) / 2)
            .map(|i| h.powf(i as f64 - 0.5) / gamma_half(i))
            .sum();
        erfc(h.sqrt()) + (-h).exp() * tail
    }
}

/// The tail as `1 - ∫_0^x` of the density, for moderate `x`.
pub fn chi2_tail_quadrature(x: f64, k: usize) -> f64 {
    let half_k = 0.5 * k as f64;
    let norm = 2f64.powf(half_k) * gamma_of_half_integer(k);
    if k == 1 {
        // Substitute t = u² to remove the endpoint singularity.
        let inner = integrate(&|u: f64| 2.0 * (-0.5 * u * u).exp(), 0.0, x.sqrt(), 1e-14);
        return 1.0 - inner / norm;
    }
    let pdf = |t: f64| t.powf(half_k - 1.0) * (-0.5 * t).exp();
    1.0 - integrate(&pdf, 0.0, x, 1e-14) / norm
}

/// `Γ(k/2)`.
fn gamma_of_half_integer(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        (1..k / 2).map(|m| m as f64).product()
    } else {
        gamma_half((k - 1) / 2)
    }
}

/// p-value of a Pearson goodness-of-fit test of `counts` against Poisson(`mean`),
/// with tail bins merged until every expected count is at least 5.
pub fn poisson_gof_p_value(counts: &[usize], mean: f64) -> f64 {
    let total = counts.len() as f64;
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut observed = vec![0.0; max + 2];
    for &k in counts {
        observed[k] += 1.0;
    }
    let mut pmf = Vec::with_capacity(max + 2);
    let mut p = (-mean).exp();
    for k in 0..=max {
        pmf.push(p);
        p *= mean / (k + 1) as f64;
    }
    // Last bin collects everything above `max`.
    pmf.push((1.0 - pmf.iter().sum::<f64>()).max(0.0));

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (o, q) in observed.iter().zip(&pmf) {
        acc.0 += o;
        acc.1 += q * total;
        if acc.1 >= 5.0 {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if let Some(last) = bins.last_mut() {
        last.0 += acc.0;
        last.1 += acc.1;
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    quads_core::chi_square_tail(stat, bins.len() - 1).unwrap()
}

/// Two-sided normal p-value.
pub fn normal_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Two-sided p-values for the mean, variance, skewness and excess kurtosis of
/// `xs` against Normal(0, sigma).
pub fn normal_moment_p_values(xs: &[f64], sigma: f64) -> [f64; 4] {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;

    let p_mean = normal_two_sided(mean / (sigma / n.sqrt()));
    let dof = xs.len() - 1;
    let stat = n * m2 / (sigma * sigma);
    let upper = quads_core::chi_square_tail(stat, dof).unwrap();
    let p_var = 2.0 * upper.min(1.0 - upper);
    let p_skew = normal_two_sided((m3 / m2.powf(1.5)) / (6.0 / n).sqrt());
    let p_kurt = normal_two_sided((m4 / (m2 * m2) - 3.0) / (24.0 / n).sqrt());
    [p_mean, p_var, p_skew, p_kurt]
}
