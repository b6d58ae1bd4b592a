//! Steiner forest on a small graph by the primal-dual method, with the dual
//! certificate printed after every merge.
//!
//! ```bash
//! cargo run -p spanrec --example gw_steiner_forest
//! ```

use spanrec::forest::{gw_solve_observed, steiner_cut_fn};
use spanrec::io::parse_graph;
use spanrec::oracle::exact_forest;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = parse_graph(include_str!("data/steiner.txt"))?;
    let terminals = [0, 3, 5];
    let f = steiner_cut_fn(graph.n_vertices(), &terminals)?;

    let mut step = 0;
    let sol = gw_solve_observed(&graph, &f, |state| {
        step += 1;
        let duals: Vec<String> = state.duals().iter().map(|d| format!("{d:.2}")).collect();
        println!("merge {step}: {} active, d = [{}]", state.n_active(), duals.join(", "));
        state.check_dual_feasible(&graph).expect("dual stays feasible");
    })?;

    println!("forest {:?}", sol.edge_pairs(&graph));
    println!(
        "cost {:.2}, dual bound {:.2}, guarantee {:.2}",
        sol.total_cost,
        sol.dual_bound,
        sol.guarantee()
    );
    let opt = exact_forest(&graph, &f)?;
    println!("optimum {:.2} via {:?}", opt.total_cost, opt.edge_pairs(&graph));
    Ok(())
}
