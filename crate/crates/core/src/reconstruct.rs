//! Superposition tree reconstruction from a (noisy, normalized) matrix.
//!
//! Seven procedures are provided: greedy depth-first and breadth-first
//! traversal, arity-constrained Prim's, the prize-collecting Steiner tree
//! relaxation on its own, and the Steiner tree used as a prior for each of
//! the three direct procedures.
//!
//! Ties between equal weights always go to the lowest column index.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{check_feasible, AritySpec, SuperpositionMatrix, SuperpositionTree, WeightedGraph};
use crate::pcst::{pcst_solve, PcstSolution};

/// Uniform vertex prize for the Steiner relaxation on a normalized matrix.
pub const KMST_PRIZE: f64 = 0.5;

/// A reconstructed tree. `complete` is false when the tree misses an
/// internal vertex or violates an arity; such trees never match a ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconstruction {
    pub tree: SuperpositionTree,
    pub complete: bool,
}

impl Reconstruction {
    fn checked(tree: SuperpositionTree, arity: &AritySpec) -> Result<Self> {
        let complete = check_feasible(&tree, arity, arity.default_k())?;
        Ok(Self { tree, complete })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraversalOrder {
    DepthFirst,
    BreadthFirst,
}

/// Second stage run after the Steiner relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Traverse {
    /// Orient the Steiner tree from the root and fill leftover slots with the variable.
    None,
    Dfs,
    Bfs,
    Prims,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Dfs,
    Bfs,
    Prims,
    Kmst,
    KmstDfs,
    KmstBfs,
    KmstPrims,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Dfs,
        Algorithm::Bfs,
        Algorithm::Prims,
        Algorithm::Kmst,
        Algorithm::KmstDfs,
        Algorithm::KmstBfs,
        Algorithm::KmstPrims,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dfs => "dfs",
            Algorithm::Bfs => "bfs",
            Algorithm::Prims => "prims",
            Algorithm::Kmst => "kmst",
            Algorithm::KmstDfs => "kmst-dfs",
            Algorithm::KmstBfs => "kmst-bfs",
            Algorithm::KmstPrims => "kmst-prims",
        }
    }

    pub fn run(self, matrix: &SuperpositionMatrix, arity: &AritySpec) -> Result<Reconstruction> {
        match self {
            Algorithm::Dfs => greedy_traverse(matrix, arity, TraversalOrder::DepthFirst),
            Algorithm::Bfs => greedy_traverse(matrix, arity, TraversalOrder::BreadthFirst),
            Algorithm::Prims => prims_reconstruct(matrix, arity),
            Algorithm::Kmst => kmst_reconstruct(matrix, arity, Traverse::None),
            Algorithm::KmstDfs => kmst_reconstruct(matrix, arity, Traverse::Dfs),
            Algorithm::KmstBfs => kmst_reconstruct(matrix, arity, Traverse::Bfs),
            Algorithm::KmstPrims => kmst_reconstruct(matrix, arity, Traverse::Prims),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

fn check_shape(matrix: &SuperpositionMatrix, arity: &AritySpec) -> Result<()> {
    if arity.len() != matrix.n_internal() {
        return Err(Error::Structural(format!(
            "{} arities for a {}-row matrix",
            arity.len(),
            matrix.n_internal()
        )));
    }
    Ok(())
}

/// Greedy traversal: each expanded vertex takes its arity-many heaviest
/// outgoing edges, one at a time, among columns not yet claimed as internal
/// vertices. The variable is never claimed, so once it is the heaviest
/// remaining column it fills every remaining slot.
pub fn greedy_traverse(
    matrix: &SuperpositionMatrix,
    arity: &AritySpec,
    order: TraversalOrder,
) -> Result<Reconstruction> {
    check_shape(matrix, arity)?;
    let n = matrix.n_internal();
    let mut used = vec![false; n];
    used[0] = true;
    let mut frontier = VecDeque::from([0usize]);
    let mut edges = Vec::new();

    while let Some(v) = match order {
        TraversalOrder::DepthFirst => frontier.pop_back(),
        TraversalOrder::BreadthFirst => frontier.pop_front(),
    } {
        let row = matrix.row(v);
        let mut children = Vec::with_capacity(arity.get(v));
        for _ in 0..arity.get(v) {
            let mut best = n;
            for c in 1..n {
                if !used[c] && (row[c] > row[best] || (best == n && row[c] == row[n])) {
                    best = c;
                }
            }
            if best < n {
                used[best] = true;
            }
            children.push(best);
            edges.push((v, best));
        }
        let internal = children.into_iter().filter(|&c| c < n);
        match order {
            // Reverse push so the heaviest child is expanded first.
            TraversalOrder::DepthFirst => {
                let mut internal: Vec<_> = internal.collect();
                internal.reverse();
                frontier.extend(internal);
            }
            TraversalOrder::BreadthFirst => frontier.extend(internal),
        }
    }
    Reconstruction::checked(SuperpositionTree::new(edges), arity)
}

/// Arity-constrained Prim's: one global pool of candidate edges from every
/// tree vertex with spare arity to every unclaimed internal column, plus one
/// variable edge per parent. The heaviest candidate is accepted each round.
/// Reaching a vertex claims it, which discards every other edge into it.
/// When the pool runs dry, spare slots are filled with further variable edges.
pub fn prims_reconstruct(matrix: &SuperpositionMatrix, arity: &AritySpec) -> Result<Reconstruction> {
    check_shape(matrix, arity)?;
    let n = matrix.n_internal();
    let var = n;
    let mut budget: Vec<usize> = arity.as_slice().to_vec();
    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    let mut var_taken = vec![false; n];
    let mut edges = Vec::new();

    loop {
        // (weight, column, parent); lowest column then lowest parent wins ties.
        let mut best: Option<(f64, usize, usize)> = None;
        for p in (0..n).filter(|&p| in_tree[p] && budget[p] > 0) {
            let row = matrix.row(p);
            let columns = (1..n).filter(|&c| !in_tree[c]).chain((!var_taken[p]).then_some(var));
            for c in columns {
                let better = match best {
                    None => true,
                    Some((w, bc, bp)) => row[c] > w || (row[c] == w && (c, p) < (bc, bp)),
                };
                if better {
                    best = Some((row[c], c, p));
                }
            }
        }
        let Some((_, c, p)) = best else { break };
        edges.push((p, c));
        budget[p] -= 1;
        if c == var {
            var_taken[p] = true;
        } else {
            in_tree[c] = true;
        }
    }

    for p in (0..n).filter(|&p| in_tree[p]) {
        edges.extend(std::iter::repeat_n((p, var), budget[p]));
    }
    Reconstruction::checked(SuperpositionTree::new(edges), arity)
}

/// Undirected Steiner instance on the internal block: complete graph with
/// cost `1 - (M'_ij + M'_ji) / 2`, root 0 and uniform prize `prize`.
pub fn steiner_instance(matrix: &SuperpositionMatrix, prize: f64) -> Result<WeightedGraph> {
    let block = matrix.internal_block();
    let n = block.len();
    WeightedGraph::complete(n, |i, j| (1.0 - 0.5 * (block[i][j] + block[j][i])).max(0.0))?
        .with_root(0)?
        .with_prizes(vec![prize; n])
}

/// Symmetric 0/1 indicator of the Steiner tree edges.
fn steiner_indicator(graph: &WeightedGraph, solution: &PcstSolution) -> Vec<Vec<f64>> {
    let n = graph.n_vertices();
    let mut ind = vec![vec![0.0; n]; n];
    for (u, v) in solution.edge_pairs(graph) {
        ind[u][v] = 1.0;
        ind[v][u] = 1.0;
    }
    ind
}

/// Averages the Steiner tree indicator into the internal block; the variable
/// column is left untouched and nothing is renormalized.
pub fn steiner_prior(matrix: &SuperpositionMatrix, prize: f64) -> Result<(SuperpositionMatrix, PcstSolution)> {
    let graph = steiner_instance(matrix, prize)?;
    let solution = pcst_solve(&graph)?;
    let ind = steiner_indicator(&graph, &solution);
    let block: Vec<Vec<f64>> = matrix
        .internal_block()
        .into_iter()
        .zip(&ind)
        .map(|(row, irow)| row.iter().zip(irow).map(|(&m, &i)| 0.5 * (i + m)).collect())
        .collect();
    let updated = SuperpositionMatrix::from_block_and_variable(&block, &matrix.variable_weights())?;
    Ok((updated, solution))
}

pub fn kmst_reconstruct(
    matrix: &SuperpositionMatrix,
    arity: &AritySpec,
    traverse: Traverse,
) -> Result<Reconstruction> {
    kmst_reconstruct_with_prize(matrix, arity, traverse, KMST_PRIZE)
}

pub fn kmst_reconstruct_with_prize(
    matrix: &SuperpositionMatrix,
    arity: &AritySpec,
    traverse: Traverse,
    prize: f64,
) -> Result<Reconstruction> {
    check_shape(matrix, arity)?;
    match traverse {
        Traverse::None => {
            let graph = steiner_instance(matrix, prize)?;
            let solution = pcst_solve(&graph)?;
            orient_and_fill(&graph, &solution, arity)
        }
        Traverse::Dfs | Traverse::Bfs | Traverse::Prims => {
            let (updated, _) = steiner_prior(matrix, prize)?;
            match traverse {
                Traverse::Dfs => greedy_traverse(&updated, arity, TraversalOrder::DepthFirst),
                Traverse::Bfs => greedy_traverse(&updated, arity, TraversalOrder::BreadthFirst),
                _ => prims_reconstruct(&updated, arity),
            }
        }
    }
}

/// Orients the undirected Steiner tree away from the root and gives every
/// tree vertex variable children for the slots its tree children leave open.
fn orient_and_fill(graph: &WeightedGraph, solution: &PcstSolution, arity: &AritySpec) -> Result<Reconstruction> {
    let n = graph.n_vertices();
    let mut adj = vec![Vec::new(); n];
    for (u, v) in solution.edge_pairs(graph) {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    let mut edges = Vec::new();
    let mut out = vec![0usize; n];
    while let Some(u) = queue.pop_front() {
        adj[u].sort_unstable();
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                edges.push((u, v));
                out[u] += 1;
                queue.push_back(v);
            }
        }
    }
    for v in (0..n).filter(|&v| seen[v]) {
        let spare = arity.get(v).saturating_sub(out[v]);
        edges.extend(std::iter::repeat_n((v, n), spare));
    }
    Reconstruction::checked(SuperpositionTree::new(edges), arity)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_example() -> (SuperpositionMatrix, AritySpec) {
        let m = SuperpositionMatrix::from_rows(vec![
            vec![0.2, 0.7, 0.5, 0.4, 0.5, 0.3, 0.2],
            vec![0.3, 0.2, 1.0, 0.8, 0.6, 0.3, 0.7],
            vec![0.3, 0.2, 0.0, 0.0, 0.1, 0.5, 0.5],
            vec![0.1, 0.4, 0.0, 0.5, 0.9, 0.2, 0.5],
            vec![0.3, 0.0, 0.3, 0.5, 0.0, 0.8, 0.6],
            vec![0.3, 0.3, 0.4, 0.1, 0.5, 0.4, 0.4],
        ])
        .unwrap();
        (m, AritySpec::new(vec![1, 3, 1, 1, 2, 1]).unwrap())
    }

    fn worked_tree() -> SuperpositionTree {
        SuperpositionTree::new(vec![
            (0, 1),
            (1, 2),
            (1, 3),
            (1, 6),
            (2, 6),
            (3, 4),
            (4, 5),
            (4, 6),
            (5, 6),
        ])
    }

    #[test]
    fn prims_recovers_worked_example() {
        let (m, a) = worked_example();
        let r = prims_reconstruct(&m, &a).unwrap();
        assert!(r.complete);
        assert_eq!(r.tree, worked_tree());
    }

    #[test]
    fn bfs_expands_plus_with_its_three_heaviest_edges() {
        let (m, a) = worked_example();
        let r = greedy_traverse(&m, &a, TraversalOrder::BreadthFirst).unwrap();
        assert_eq!(r.tree.children(0).collect::<Vec<_>>(), vec![1]);
        assert_eq!(r.tree.children(1).collect::<Vec<_>>(), vec![2, 3, 6]);
    }

    #[test]
    fn variable_fills_both_slots() {
        let m = SuperpositionMatrix::from_rows(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let a = AritySpec::new(vec![1, 2]).unwrap();
        for alg in Algorithm::ALL {
            let r = alg.run(&m, &a).unwrap();
            assert!(r.complete, "{alg}");
            assert_eq!(r.tree.multiplicity((1, 2)), 2, "{alg}");
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for alg in Algorithm::ALL {
            assert_eq!(alg.name().parse::<Algorithm>().unwrap(), alg);
        }
        assert!("prim".parse::<Algorithm>().is_err());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let (m, _) = worked_example();
        let a = AritySpec::new(vec![1, 1]).unwrap();
        assert!(prims_reconstruct(&m, &a).is_err());
        assert!(greedy_traverse(&m, &a, TraversalOrder::DepthFirst).is_err());
        assert!(kmst_reconstruct(&m, &a, Traverse::None).is_err());
    }

    #[test]
    fn root_only_steiner_tree_is_flagged_incomplete() {
        let (m, a) = worked_example();
        let r = kmst_reconstruct_with_prize(&m, &a, Traverse::None, 0.0).unwrap();
        assert_eq!(r.tree.edges(), &[(0, 6)]);
        assert!(!r.complete);
    }

    #[test]
    fn zero_prize_prior_halves_the_block_uniformly() {
        let (m, a) = worked_example();
        let (updated, sol) = steiner_prior(&m, 0.0).unwrap();
        assert_eq!(sol.vertices, vec![0]);
        for r in 0..6 {
            for c in 0..6 {
                assert!((updated.get(r, c) - 0.5 * m.get(r, c)).abs() < 1e-15);
            }
            assert_eq!(updated.get(r, 6), m.get(r, 6));
        }
        // Halving keeps the order inside the block, so greedy traversal of
        // rows without a competitive variable edge is unaffected.
        let r = kmst_reconstruct_with_prize(&m, &a, Traverse::Bfs, 0.0).unwrap();
        assert_eq!(r.tree.children(0).collect::<Vec<_>>(), vec![1]);
    }
}
