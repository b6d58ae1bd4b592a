//! Reproduces the noise-robustness sweep and prints the rate table.
//!
//! ```bash
//! cargo run --release -p spanrec --example noise_sweep -- [trials] [seed]
//! ```

use std::time::Instant;

use spanrec::bench::{run_experiment, ExperimentConfig};
use spanrec::reconstruct::Algorithm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1000);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let config = ExperimentConfig {
        trials,
        seed,
        ..Default::default()
    };

    let start = Instant::now();
    let report = run_experiment(&config)?;
    let elapsed = start.elapsed();

    print!("{:<12}", "noise");
    for alpha in &config.alphas {
        print!("{alpha:>7.2}");
    }
    println!();
    for alg in Algorithm::ALL {
        print!("{:<12}", alg.name());
        for &alpha in &config.alphas {
            print!("{:>7.2}", report.rate(alg, alpha).unwrap_or(f64::NAN));
        }
        println!();
    }
    println!("\n{trials} trials, seed {seed}, {:.2?}", elapsed);
    Ok(())
}
