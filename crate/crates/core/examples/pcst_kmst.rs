//! Prize-collecting Steiner tree and the k-MST trade-off as the uniform
//! prize grows.
//!
//! ```bash
//! cargo run -p spanrec --example pcst_kmst
//! ```

use spanrec::io::parse_graph;
use spanrec::oracle::exact_pcst;
use spanrec::pcst::{kmst_via_pcst, pcst_approximation_factor, pcst_solve};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = parse_graph(include_str!("data/steiner.txt"))?.with_root(0)?;
    let n = graph.n_vertices();

    println!("{:>6} {:>8} {:>10} {:>10} {:>8}", "lambda", "covered", "edge cost", "objective", "optimum");
    for step in 0..=8 {
        let lambda = 0.5 * step as f64;
        let kmst = kmst_via_pcst(&graph, n, lambda)?;
        let priced = graph.clone().with_prizes(vec![lambda; n])?;
        let opt = exact_pcst(&priced)?;
        println!(
            "{lambda:>6.1} {:>8} {:>10.2} {:>10.2} {:>8.2}",
            kmst.n_covered(),
            kmst.tree.edge_cost,
            kmst.tree.objective,
            opt.objective
        );
    }

    let priced = graph.with_prizes(vec![0.0, 0.2, 3.0, 0.4, 0.1, 2.5])?;
    let sol = pcst_solve(&priced)?;
    println!(
        "\nmixed prizes: tree {:?}, objective {:.2}, dual bound {:.2}, factor {:.2}",
        sol.edge_pairs(&priced),
        sol.objective,
        sol.dual_bound,
        pcst_approximation_factor(n)
    );
    Ok(())
}
