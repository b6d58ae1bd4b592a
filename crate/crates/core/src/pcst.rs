//! Rooted prize-collecting Steiner tree by primal-dual moat growing, and
//! the k-MST relaxation that runs it with one uniform prize per vertex.
//!
//! Every non-root singleton starts active. Active components raise their
//! duals uniformly until either an edge goes tight (the two components
//! merge, staying active unless the root joins) or a component has paid
//! out its whole prize (it is deactivated and its unmarked vertices are
//! marked with it). Pruning then discards every deactivated set that hangs
//! off the root tree without disconnecting anything else.

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::forest::{lexicographic_order, DUAL_TOLERANCE, TIE_EPS};
use crate::graph::{component_labels, Edge, WeightedGraph};

#[derive(Debug, Clone)]
struct Cluster {
    members: FixedBitSet,
    active: bool,
    /// Prize slack consumed so far, `w(C) = sum_{S ⊆ C} y_S`.
    w: f64,
    y: f64,
}

/// Snapshot of the growth stage: partition, per-vertex duals, per-component
/// prize slack and activity, and the per-vertex marks.
#[derive(Debug, Clone)]
pub struct PcstClusterState {
    root: usize,
    prizes: Vec<f64>,
    comp_of: Vec<usize>,
    comps: Vec<Option<Cluster>>,
    retired: Vec<(FixedBitSet, f64)>,
    d: Vec<f64>,
    marks: Vec<Option<usize>>,
    deactivated: Vec<FixedBitSet>,
}

impl PcstClusterState {
    fn singletons(n: usize, root: usize, prizes: Vec<f64>) -> Self {
        let comps = (0..n)
            .map(|v| {
                let mut members = FixedBitSet::with_capacity(n);
                members.insert(v);
                Some(Cluster {
                    members,
                    active: v != root,
                    w: 0.0,
                    y: 0.0,
                })
            })
            .collect();
        Self {
            root,
            prizes,
            comp_of: (0..n).collect(),
            comps,
            retired: Vec::new(),
            d: vec![0.0; n],
            marks: vec![None; n],
            deactivated: Vec::new(),
        }
    }

    fn live(&self) -> impl Iterator<Item = (usize, &Cluster)> {
        self.comps
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|c| (i, c)))
    }

    fn prize_of(&self, set: &FixedBitSet) -> f64 {
        set.ones().map(|v| self.prizes[v]).sum()
    }

    /// Current components as `(members, active, w)`.
    pub fn components(&self) -> impl Iterator<Item = (&FixedBitSet, bool, f64)> {
        self.live().map(|(_, c)| (&c.members, c.active, c.w))
    }

    pub fn n_active(&self) -> usize {
        self.live().filter(|(_, c)| c.active).count()
    }

    pub fn d(&self, v: usize) -> f64 {
        self.d[v]
    }

    /// Index into [`Self::deactivated_sets`] of the first deactivated set holding `v`.
    pub fn mark(&self, v: usize) -> Option<usize> {
        self.marks[v]
    }

    pub fn deactivated_sets(&self) -> &[FixedBitSet] {
        &self.deactivated
    }

    pub fn dual_sets(&self) -> impl Iterator<Item = (&FixedBitSet, f64)> {
        self.retired
            .iter()
            .map(|(s, y)| (s, *y))
            .chain(self.live().map(|(_, c)| (&c.members, c.y)))
    }

    pub fn edge_load(&self, e: &Edge) -> f64 {
        self.dual_sets()
            .filter(|(s, _)| s.contains(e.u) != s.contains(e.v))
            .map(|(_, y)| y)
            .sum()
    }

    /// Checks both dual constraint families: edge loads against costs, and
    /// for every raised set `T`, `sum_{S ⊆ T} y_S <= π(T)`. Also checks that
    /// `w(C)` tracks the nested dual sum and that root components are inactive.
    pub fn check_dual_feasible(&self, graph: &WeightedGraph) -> Result<()> {
        for e in graph.edges() {
            let load = self.edge_load(e);
            if load > e.cost + DUAL_TOLERANCE {
                return Err(Error::Invariant(format!(
                    "dual load {load} exceeds cost {} on edge ({}, {})",
                    e.cost, e.u, e.v
                )));
            }
            if self.comp_of[e.u] != self.comp_of[e.v] {
                let sum = self.d[e.u] + self.d[e.v];
                if (sum - load).abs() > DUAL_TOLERANCE {
                    return Err(Error::Invariant(format!(
                        "d({}) + d({}) = {sum} differs from dual load {load}",
                        e.u, e.v
                    )));
                }
            }
        }
        let sets: Vec<(&FixedBitSet, f64)> = self.dual_sets().collect();
        for (t, _) in &sets {
            let nested: f64 = sets
                .iter()
                .filter(|(s, _)| s.is_subset(t))
                .map(|(_, y)| y)
                .sum();
            let prize = self.prize_of(t);
            if nested > prize + DUAL_TOLERANCE {
                return Err(Error::Invariant(format!(
                    "nested duals {nested} exceed prize {prize} on {:?}",
                    t.ones().collect::<Vec<_>>()
                )));
            }
        }
        for (_, c) in self.live() {
            let nested: f64 = sets
                .iter()
                .filter(|(s, _)| s.is_subset(&c.members))
                .map(|(_, y)| y)
                .sum();
            if c.w < -DUAL_TOLERANCE || (c.w - nested).abs() > DUAL_TOLERANCE {
                return Err(Error::Invariant(format!(
                    "w = {} does not match nested duals {nested}",
                    c.w
                )));
            }
            if c.active && c.members.contains(self.root) {
                return Err(Error::Invariant("root component is active".into()));
            }
        }
        Ok(())
    }

    fn raise(&mut self, step: f64) -> usize {
        let mut active = 0;
        for c in self.comps.iter_mut().flatten() {
            if c.active {
                active += 1;
                c.w += step;
                c.y += step;
                for v in c.members.ones() {
                    self.d[v] += step;
                }
            }
        }
        active
    }

    fn deactivate(&mut self, id: usize) {
        let c = self.comps[id].as_mut().expect("live component");
        c.active = false;
        let label = self.deactivated.len();
        for v in c.members.ones() {
            self.marks[v].get_or_insert(label);
        }
        self.deactivated.push(c.members.clone());
    }

    fn merge(&mut self, a: usize, b: usize) {
        let (ca, cb) = (self.comp_of[a], self.comp_of[b]);
        let left = self.comps[ca].take().expect("live component");
        let right = self.comps[cb].take().expect("live component");
        let mut members = left.members.clone();
        members.union_with(&right.members);
        let w = left.w + right.w;
        self.retired.push((left.members, left.y));
        self.retired.push((right.members, right.y));
        let id = self.comps.len();
        for v in members.ones() {
            self.comp_of[v] = id;
        }
        let active = !members.contains(self.root);
        self.comps.push(Some(Cluster {
            members,
            active,
            w,
            y: 0.0,
        }));
    }
}

/// A tree through the root together with its prize-collecting objective.
#[derive(Debug, Clone, PartialEq)]
pub struct PcstSolution {
    /// Indices into `graph.edges()`, ascending.
    pub edges: Vec<usize>,
    /// Tree vertices in ascending order; always contains the root.
    pub vertices: Vec<usize>,
    pub edge_cost: f64,
    /// Prize of the vertices left out of the tree.
    pub missed_prize: f64,
    /// `edge_cost + missed_prize`.
    pub objective: f64,
    /// Accumulated dual objective of the growth stage.
    pub dual_bound: f64,
}

impl PcstSolution {
    pub fn edge_pairs(&self, graph: &WeightedGraph) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&e| (graph.edges()[e].u, graph.edges()[e].v))
            .collect()
    }

    /// Builds a solution from a tree edge set, filling in the objective terms.
    pub(crate) fn from_tree(graph: &WeightedGraph, root: usize, mut edges: Vec<usize>) -> Self {
        edges.sort_unstable();
        let mut in_tree = vec![false; graph.n_vertices()];
        in_tree[root] = true;
        for &e in &edges {
            in_tree[graph.edges()[e].u] = true;
            in_tree[graph.edges()[e].v] = true;
        }
        let edge_cost = graph.cost_of(&edges);
        let missed_prize = (0..graph.n_vertices())
            .filter(|&v| !in_tree[v] && v != root)
            .map(|v| graph.prize(v))
            .fold(0.0, |acc, p| acc + p);
        Self {
            vertices: (0..graph.n_vertices()).filter(|&v| in_tree[v]).collect(),
            edges,
            edge_cost,
            missed_prize,
            objective: edge_cost + missed_prize,
            dual_bound: 0.0,
        }
    }
}

/// `2 - 2/(n - 1)` for an `n`-vertex instance.
pub fn pcst_approximation_factor(n_vertices: usize) -> f64 {
    if n_vertices < 2 {
        1.0
    } else {
        2.0 - 2.0 / (n_vertices - 1) as f64
    }
}

fn instance_root(graph: &WeightedGraph) -> Result<usize> {
    graph
        .root()
        .ok_or_else(|| Error::Structural("prize-collecting instance needs a root".into()))
}

pub fn pcst_solve(graph: &WeightedGraph) -> Result<PcstSolution> {
    pcst_solve_observed(graph, |_| {})
}

/// [`pcst_solve`] with a hook that sees the cluster state after every event
/// (merge or deactivation).
pub fn pcst_solve_observed<O>(graph: &WeightedGraph, mut observer: O) -> Result<PcstSolution>
where
    O: FnMut(&PcstClusterState),
{
    let root = instance_root(graph)?;
    let n = graph.n_vertices();
    let edges = graph.edges();
    let order = lexicographic_order(edges);
    let mut prizes: Vec<f64> = (0..n).map(|v| graph.prize(v)).collect();
    prizes[root] = 0.0;
    let mut state = PcstClusterState::singletons(n, root, prizes);
    let mut chosen = Vec::new();
    let mut dual_bound = 0.0;

    while state.n_active() > 0 {
        let mut best_edge: Option<(usize, f64)> = None;
        for &i in &order {
            let e = &edges[i];
            let (cu, cv) = (state.comp_of[e.u], state.comp_of[e.v]);
            if cu == cv {
                continue;
            }
            let denom = [cu, cv]
                .iter()
                .filter(|&&c| state.comps[c].as_ref().is_some_and(|c| c.active))
                .count();
            if denom == 0 {
                continue;
            }
            let step = (e.cost - state.d[e.u] - state.d[e.v]) / denom as f64;
            if best_edge.is_none_or(|(_, b)| step < b - TIE_EPS) {
                best_edge = Some((i, step));
            }
        }
        let mut best_comp: Option<(usize, f64)> = None;
        for (id, c) in state.live().filter(|(_, c)| c.active) {
            let slack = state.prize_of(&c.members) - c.w;
            if best_comp.is_none_or(|(_, b)| slack < b - TIE_EPS) {
                best_comp = Some((id, slack));
            }
        }
        let Some((comp, eps2)) = best_comp else {
            return Err(Error::Invariant("active component vanished".into()));
        };
        let eps1 = best_edge.map_or(f64::INFINITY, |(_, s)| s);
        let step = eps1.min(eps2);
        if step < -DUAL_TOLERANCE {
            return Err(Error::Invariant(format!("negative step {step}")));
        }
        let step = step.max(0.0);
        let active = state.raise(step);
        dual_bound += step * active as f64;

        // Ties go to the merge branch.
        if eps1 > eps2 + TIE_EPS {
            state.deactivate(comp);
        } else {
            let (i, _) = best_edge.expect("finite edge step");
            chosen.push(i);
            state.merge(edges[i].u, edges[i].v);
        }
        observer(&state);
    }

    let tree = prune(graph, root, &chosen, &state);
    let mut sol = PcstSolution::from_tree(graph, root, tree);
    sol.dual_bound = dual_bound;
    Ok(sol)
}

/// Keeps the component of the root and then repeatedly drops any
/// deactivated set whose removal leaves the remaining tree connected.
fn prune(graph: &WeightedGraph, root: usize, chosen: &[usize], state: &PcstClusterState) -> Vec<usize> {
    let n = graph.n_vertices();
    let edges = graph.edges();
    let labels = component_labels(n, edges, chosen);
    let mut keep: Vec<bool> = (0..n).map(|v| labels[v] == labels[root]).collect();
    let tree_edges = |keep: &[bool]| -> Vec<usize> {
        chosen
            .iter()
            .copied()
            .filter(|&e| keep[edges[e].u] && keep[edges[e].v])
            .collect()
    };

    loop {
        let mut changed = false;
        for set in state.deactivated_sets() {
            if !set.ones().any(|v| keep[v]) {
                continue;
            }
            let mut trial = keep.clone();
            for v in set.ones() {
                trial[v] = false;
            }
            let rest = tree_edges(&trial);
            let l = component_labels(n, edges, &rest);
            if (0..n).filter(|&v| trial[v]).all(|v| l[v] == l[root]) {
                keep = trial;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    tree_edges(&keep)
}

/// Result of the k-MST relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct KmstSolution {
    pub tree: PcstSolution,
    /// `sum c_e + λ (excluded - (n - k))`, the Lagrangian k-MST objective.
    pub objective: f64,
}

impl KmstSolution {
    pub fn n_covered(&self) -> usize {
        self.tree.vertices.len()
    }
}

/// Runs [`pcst_solve`] with prize `lambda` on every vertex.
pub fn kmst_via_pcst(graph: &WeightedGraph, k: usize, lambda: f64) -> Result<KmstSolution> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Config(format!("prize level must be >= 0, got {lambda}")));
    }
    let n = graph.n_vertices();
    if k > n {
        return Err(Error::Config(format!("k = {k} exceeds {n} vertices")));
    }
    let root = instance_root(graph)?;
    let priced = graph.clone().with_prizes(vec![lambda; n])?.with_root(root)?;
    let tree = pcst_solve(&priced)?;
    let excluded = n - tree.vertices.len();
    let objective = tree.edge_cost + lambda * (excluded as f64 - (n - k) as f64);
    Ok(KmstSolution { tree, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rooted(n: usize, edges: &[(usize, usize, f64)], prizes: Vec<f64>) -> WeightedGraph {
        WeightedGraph::new(n, edges.iter().copied())
            .unwrap()
            .with_root(0)
            .unwrap()
            .with_prizes(prizes)
            .unwrap()
    }

    #[test]
    fn zero_prizes_keep_only_the_root() {
        let g = rooted(3, &[(0, 1, 1.0), (1, 2, 0.5)], vec![0.0; 3]);
        let sol = pcst_solve(&g).unwrap();
        assert!(sol.edges.is_empty());
        assert_eq!(sol.vertices, vec![0]);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn large_prize_pulls_vertex_in() {
        let g = rooted(2, &[(0, 1, 1.0)], vec![0.0, 10.0]);
        let sol = pcst_solve(&g).unwrap();
        assert_eq!(sol.edge_pairs(&g), vec![(0, 1)]);
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn root_prize_is_ignored() {
        let g = rooted(2, &[(0, 1, 1.0)], vec![100.0, 0.0]);
        let sol = pcst_solve(&g).unwrap();
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn path_with_expensive_tail() {
        // r - a costs 0.1, a - b costs 0.9, λ = 0.5; candidate trees are
        // {r}: 1.0, {r, a}: 0.6, {r, a, b}: 1.0.
        let g = WeightedGraph::new(3, [(0, 1, 0.1), (1, 2, 0.9)])
            .unwrap()
            .with_root(0)
            .unwrap();
        let sol = kmst_via_pcst(&g, 2, 0.5).unwrap();
        assert_eq!(sol.tree.edge_pairs(&g), vec![(0, 1)]);
        assert!((sol.tree.objective - 0.6).abs() < 1e-12);
        // excluded = 1, n - k = 1: the Lagrangian term vanishes.
        assert!((sol.objective - 0.1).abs() < 1e-12);
    }

    #[test]
    fn zero_lambda_covers_root_only() {
        let g = WeightedGraph::complete(4, |_, _| 0.3).unwrap().with_root(0).unwrap();
        let sol = kmst_via_pcst(&g, 1, 0.0).unwrap();
        assert_eq!(sol.n_covered(), 1);
    }

    #[test]
    fn bad_arguments() {
        let g = WeightedGraph::complete(3, |_, _| 1.0).unwrap();
        assert!(pcst_solve(&g).is_err());
        let g = g.with_root(0).unwrap();
        assert!(kmst_via_pcst(&g, 1, -1.0).is_err());
        assert!(kmst_via_pcst(&g, 4, 1.0).is_err());
    }

    #[test]
    fn deactivated_branch_is_pruned() {
        // b hangs off a with a cost larger than its prize; a is worth taking.
        let g = rooted(3, &[(0, 1, 0.2), (1, 2, 3.0)], vec![0.0, 1.0, 0.5]);
        let mut states = Vec::new();
        let sol = pcst_solve_observed(&g, |s| states.push(s.clone())).unwrap();
        assert_eq!(sol.vertices, vec![0, 1]);
        assert!((sol.objective - 0.7).abs() < 1e-12);
        for s in &states {
            s.check_dual_feasible(&g).unwrap();
        }
        assert_eq!(states.last().unwrap().mark(2), Some(0));
        assert_eq!(states.last().unwrap().mark(0), None);
    }

    #[test]
    fn early_merge_can_miss_the_optimum() {
        // a and b meet at t = 0.525, before either reaches the root, so the
        // tree pays for a - b. Best is r - b alone: 0.55 + 0.53 = 1.08.
        let g = rooted(3, &[(0, 1, 0.75), (0, 2, 0.55), (1, 2, 1.05)], vec![0.0, 0.53, 0.63]);
        let sol = pcst_solve(&g).unwrap();
        assert_eq!(sol.edge_pairs(&g), vec![(0, 2), (1, 2)]);
        assert!((sol.objective - 1.6).abs() < 1e-12);
        let ratio = sol.objective / 1.08;
        assert!(ratio > pcst_approximation_factor(3));
        assert!(ratio <= 2.0 - 1.0 / 2.0);
    }
}
