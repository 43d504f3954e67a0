//! Fixtures shared by the benchmarks.

use quads_core::ec3::generate_usa_instance;
use quads_core::fitting::ModelKind;
use quads_core::{DataPoint, SearchHamiltonian};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Search Hamiltonian for a seeded unique-solution instance.
pub fn hamiltonian(n_bits: usize, seed: u64) -> SearchHamiltonian {
    let instance = generate_usa_instance(n_bits, &mut ChaCha8Rng::seed_from_u64(seed))
        .expect("instance generation");
    SearchHamiltonian::from_instance(&instance).expect("hamiltonian")
}

/// Power-law medians for N = 7..=16 with a deterministic ±3% ripple.
pub fn median_series() -> Vec<DataPoint> {
    (7..=16)
        .map(|n| {
            let ripple = if n % 2 == 0 { 1.03 } else { 0.97 };
            let v = ModelKind::PowerLaw.eval(0.1, 2.1, n as f64) * ripple;
            DataPoint::new(n, v, 0.05 * v).expect("data point")
        })
        .collect()
}
