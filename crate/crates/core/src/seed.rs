//! Deterministic seed derivation for campaign jobs.
//!
//! Every job seed is a pure function of the master seed and the job key, so
//! any single record can be recomputed in isolation and worker scheduling
//! never influences the random streams.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a sequence of words into one seed.
pub fn derive(master: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix64(master), |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

const INSTANCE_DOMAIN: u64 = 1;
const ENVIRONMENT_DOMAIN: u64 = 2;

/// Seed of instance `instance_id` at `n_bits`, shared across noise powers.
pub fn instance_seed(master: u64, n_bits: usize, instance_id: usize) -> u64 {
    derive(master, &[INSTANCE_DOMAIN, n_bits as u64, instance_id as u64])
}

/// Seed of an instance generated separately for one noise power.
pub fn instance_seed_for_power(master: u64, n_bits: usize, p_bar: f64, instance_id: usize) -> u64 {
    derive(
        master,
        &[INSTANCE_DOMAIN, n_bits as u64, p_bar.to_bits(), instance_id as u64],
    )
}

/// Seed of noise environment `env_id` for one (N, P̄, instance) job.
pub fn environment_seed(
    master: u64,
    n_bits: usize,
    p_bar: f64,
    instance_id: usize,
    env_id: usize,
) -> u64 {
    derive(
        master,
        &[
            ENVIRONMENT_DOMAIN,
            n_bits as u64,
            p_bar.to_bits(),
            instance_id as u64,
            env_id as u64,
        ],
    )
}
