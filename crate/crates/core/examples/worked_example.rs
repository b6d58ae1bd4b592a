//! Reconstructs the worked six-vertex example with every algorithm.
//!
//! ```bash
//! cargo run -p spanrec --example worked_example
//! ```

use spanrec::io::parse_matrix;
use spanrec::oracle::exact_superposition;
use spanrec::reconstruct::Algorithm;

const NAMES: [&str; 7] = ["*", "+", "ln", "sin", "times", "exp", "x"];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (matrix, arity) = parse_matrix(include_str!("data/worked_example.txt"))?;
    let best = exact_superposition(&matrix, &arity)?;
    println!("exhaustive optimum, weight {:.1}:", best.weight(&matrix));
    for &(p, c) in best.edges() {
        println!("  {} -> {}", NAMES[p], NAMES[c]);
    }

    for alg in Algorithm::ALL {
        let r = alg.run(&matrix, &arity)?;
        let verdict = if r.tree == best {
            "matches"
        } else if r.complete {
            "differs"
        } else {
            "incomplete"
        };
        println!("{:<11} weight {:.1}  {verdict}", alg.name(), r.tree.weight(&matrix));
    }
    Ok(())
}
