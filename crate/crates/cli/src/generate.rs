use std::path::PathBuf;

use anyhow::Context;
use quads_core::ec3::generate_usa_instance;
use quads_core::io::{instance_file_name, write_instance, write_json, InstanceManifest, ManifestEntry};
use quads_core::seed::instance_seed;
use quads_core::CODE_VERSION;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{ensure_dir, Status};

#[derive(clap::Args)]
pub struct Args {
    /// Number of bits per instance.
    #[arg(long, short = 'n')]
    n_bits: usize,
    /// Number of instances.
    #[arg(long, short = 'c')]
    count: usize,
    /// Master seed; instance k uses the same seed a campaign would.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short = 'o', default_value = "instances")]
    out: PathBuf,
}

pub fn execute(args: Args) -> anyhow::Result<Status> {
    ensure_dir(&args.out)?;
    let mut entries = Vec::with_capacity(args.count);
    for id in 0..args.count {
        let seed = instance_seed(args.seed, args.n_bits, id);
        let instance = generate_usa_instance(args.n_bits, &mut ChaCha8Rng::seed_from_u64(seed))
            .with_context(|| format!("generating instance {id}"))?;
        write_instance(&args.out, id, &instance, seed)?;
        entries.push(ManifestEntry {
            id,
            seed,
            file: instance_file_name(args.n_bits, id),
        });
    }
    let manifest = InstanceManifest {
        code_version: CODE_VERSION.to_string(),
        n_bits: args.n_bits,
        master_seed: args.seed,
        instances: entries,
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;
    log::info!("wrote {} instances to {}", args.count, args.out.display());
    Ok(Status::Ok)
}
