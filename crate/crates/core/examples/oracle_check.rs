//! Cross-checks Prim's reconstruction against the exhaustive solver on
//! random noiseless and noisy instances.
//!
//! ```bash
//! cargo run --release -p spanrec --example oracle_check -- [instances] [alpha]
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spanrec::bench::{add_noise, generate_instance, ExperimentConfig};
use spanrec::oracle::{exact_superposition, MAX_ARITY_MASS};
use spanrec::reconstruct::prims_reconstruct;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let instances: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let alpha: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.6);
    let config = ExperimentConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let (mut clean, mut optimal, mut truth, mut done) = (0, 0, 0, 0);
    while done < instances {
        let inst = generate_instance(&config, &mut rng)?;
        if inst.arity.total_mass() > MAX_ARITY_MASS {
            continue;
        }
        done += 1;
        let m = add_noise(&inst.matrix, 0.0, &mut rng)?;
        if prims_reconstruct(&m, &inst.arity)?.tree == exact_superposition(&m, &inst.arity)? {
            clean += 1;
        }
        let noisy = add_noise(&inst.matrix, alpha, &mut rng)?;
        let prims = prims_reconstruct(&noisy, &inst.arity)?.tree;
        let best = exact_superposition(&noisy, &inst.arity)?;
        optimal += usize::from(prims == best);
        truth += usize::from(best == inst.tree);
    }
    println!("noiseless: prims == exhaustive on {clean}/{instances}");
    println!("alpha {alpha}: prims == exhaustive on {optimal}/{instances}, exhaustive == truth on {truth}/{instances}");
    Ok(())
}
