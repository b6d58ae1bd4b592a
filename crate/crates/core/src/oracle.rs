//! Exhaustive solvers for small instances. They share no code with the
//! approximation algorithms and serve as ground truth in tests.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::forest::{bitset_from_mask, CutFunction, ForestSolution};
use crate::graph::{check_feasible, AritySpec, DisjointSet, SuperpositionMatrix, SuperpositionTree, WeightedGraph};
use crate::pcst::PcstSolution;

/// Largest edge count accepted by [`exact_forest`] (2^20 edge subsets).
pub const MAX_FOREST_EDGES: usize = 20;
/// Largest vertex count accepted by [`exact_forest`] (2^16 cuts).
pub const MAX_FOREST_VERTICES: usize = 16;
/// Largest vertex count accepted by [`exact_pcst`].
pub const MAX_PCST_VERTICES: usize = 9;
/// Largest total arity accepted by [`exact_superposition`].
pub const MAX_ARITY_MASS: usize = 12;

fn bound(what: &'static str, actual: usize, limit: usize) -> Result<()> {
    if actual > limit {
        return Err(Error::SizeBound {
            what,
            actual,
            limit,
        });
    }
    Ok(())
}

/// Minimum-cost edge set crossing every cut `S` with `f(S) = 1`.
///
/// `dual_bound` of the result is the optimum itself.
pub fn exact_forest<F: CutFunction + ?Sized>(graph: &WeightedGraph, f: &F) -> Result<ForestSolution> {
    let n = graph.n_vertices();
    let m = graph.edges().len();
    bound("edges", m, MAX_FOREST_EDGES)?;
    bound("vertices", n, MAX_FOREST_VERTICES)?;

    // Crossing-edge mask of every demanded cut.
    let mut demanded: HashSet<u32> = HashSet::new();
    for s in 1..(1u64 << n) - 1 {
        if !f.value(&bitset_from_mask(n, s)) {
            continue;
        }
        let crossing = graph
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| (s >> e.u & 1) != (s >> e.v & 1))
            .fold(0u32, |acc, (i, _)| acc | 1 << i);
        if crossing == 0 {
            return Err(Error::Infeasible("a demanded cut has no crossing edge".into()));
        }
        demanded.insert(crossing);
    }
    let mut demanded: Vec<u32> = demanded.into_iter().collect();
    demanded.sort_by_key(|c| (c.count_ones(), *c));

    let costs: Vec<f64> = graph.edges().iter().map(|e| e.cost).collect();
    let mut best: Option<(u32, f64)> = None;
    for subset in 0..(1u32 << m) {
        let cost: f64 = (0..m).filter(|&i| subset >> i & 1 == 1).map(|i| costs[i]).sum();
        if best.is_some_and(|(_, b)| cost >= b) {
            continue;
        }
        if demanded.iter().all(|&c| c & subset != 0) {
            best = Some((subset, cost));
        }
    }
    let (subset, cost) = best.expect("the full edge set crosses every demanded cut");
    let active_vertices = (0..n)
        .filter(|&v| f.value(&bitset_from_mask(n, 1 << v)))
        .count();
    Ok(ForestSolution {
        edges: (0..m).filter(|&i| subset >> i & 1 == 1).collect(),
        dual_bound: cost,
        total_cost: cost,
        active_vertices,
    })
}

/// Optimal prize-collecting tree: for each vertex set through the root whose
/// induced subgraph is connected, the cheapest tree is that subgraph's MST.
pub fn exact_pcst(graph: &WeightedGraph) -> Result<PcstSolution> {
    let n = graph.n_vertices();
    bound("vertices", n, MAX_PCST_VERTICES)?;
    let root = graph
        .root()
        .ok_or_else(|| Error::Structural("prize-collecting instance needs a root".into()))?;

    let mut order: Vec<usize> = (0..graph.edges().len()).collect();
    order.sort_by(|&a, &b| graph.edges()[a].cost.total_cmp(&graph.edges()[b].cost));

    let mut best: Option<PcstSolution> = None;
    for mask in 0u32..1 << n {
        if mask >> root & 1 == 0 {
            continue;
        }
        let inside = |v: usize| mask >> v & 1 == 1;
        let mut dsu = DisjointSet::new(n);
        let mut tree = Vec::new();
        for &i in &order {
            let e = &graph.edges()[i];
            if inside(e.u) && inside(e.v) && dsu.union(e.u, e.v) {
                tree.push(i);
            }
        }
        if tree.len() + 1 != mask.count_ones() as usize {
            continue;
        }
        let candidate = PcstSolution::from_tree(graph, root, tree);
        if best.as_ref().is_none_or(|b| candidate.objective < b.objective) {
            best = Some(candidate);
        }
    }
    let mut best = best.expect("the root alone is always a candidate");
    best.dual_bound = best.objective;
    Ok(best)
}

struct SuperpositionSearch<'a> {
    matrix: &'a SuperpositionMatrix,
    arity: &'a AritySpec,
    row_max: Vec<f64>,
    slots: Vec<usize>,
    edges: Vec<(usize, usize)>,
    used: Vec<bool>,
    best: Option<(f64, Vec<(usize, usize)>)>,
}

impl SuperpositionSearch<'_> {
    fn optimistic(&self, next_slot: usize) -> f64 {
        let open: f64 = self.slots[next_slot..].iter().map(|&p| self.row_max[p]).sum();
        let pending: f64 = (0..self.used.len())
            .filter(|&v| !self.used[v])
            .map(|v| self.arity.get(v) as f64 * self.row_max[v])
            .sum();
        open + pending
    }

    fn search(&mut self, next_slot: usize, weight: f64) {
        let n = self.used.len();
        let unused = self.used.iter().filter(|&&u| !u).count();
        if next_slot == self.slots.len() {
            if unused == 0 && self.best.as_ref().is_none_or(|(b, _)| weight > *b) {
                self.best = Some((weight, self.edges.clone()));
            }
            return;
        }
        if let Some((b, _)) = &self.best {
            if weight + self.optimistic(next_slot) <= *b {
                return;
            }
        }
        let parent = self.slots[next_slot];
        // Slots of one parent are unordered: children must be non-decreasing.
        let floor = match self.edges.last() {
            Some(&(p, c)) if p == parent => c,
            _ => 0,
        };
        for child in floor.max(1)..=n {
            if child < n {
                if self.used[child] {
                    continue;
                }
                self.used[child] = true;
                let added = self.arity.get(child);
                self.slots.extend(std::iter::repeat_n(child, added));
                self.edges.push((parent, child));
                self.search(next_slot + 1, weight + self.matrix.get(parent, child));
                self.edges.pop();
                self.slots.truncate(self.slots.len() - added);
                self.used[child] = false;
            } else {
                // A variable on the last open slot would strand the unused vertices.
                if unused > 0 && next_slot + 1 == self.slots.len() {
                    continue;
                }
                self.edges.push((parent, n));
                self.search(next_slot + 1, weight + self.matrix.get(parent, n));
                self.edges.pop();
            }
        }
    }
}

/// Maximum-weight arity-complete superposition tree that uses every internal vertex.
pub fn exact_superposition(matrix: &SuperpositionMatrix, arity: &AritySpec) -> Result<SuperpositionTree> {
    let n = matrix.n_internal();
    if arity.len() != n {
        return Err(Error::Structural(format!(
            "{} arities for a {n}-row matrix",
            arity.len()
        )));
    }
    bound("total arity", arity.total_mass(), MAX_ARITY_MASS)?;

    let row_max = (0..n)
        .map(|r| matrix.row(r)[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut used = vec![false; n];
    used[0] = true;
    let mut search = SuperpositionSearch {
        matrix,
        arity,
        row_max,
        slots: vec![0; arity.get(0)],
        edges: Vec::new(),
        used,
        best: None,
    };
    search.search(0, 0.0);
    let (_, edges) = search
        .best
        .ok_or_else(|| Error::Infeasible("no arity-complete tree exists".into()))?;
    let tree = SuperpositionTree::new(edges);
    if !check_feasible(&tree, arity, arity.default_k())? {
        return Err(Error::Invariant("enumerated tree fails the feasibility check".into()));
    }
    Ok(tree)
}
