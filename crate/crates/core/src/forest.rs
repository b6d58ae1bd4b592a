//! Primal-dual approximation for constrained forest problems.
//!
//! Given an undirected graph with non-negative costs and a proper cut
//! function `f: 2^V -> {0, 1}`, find a cheap edge set crossing every cut `S`
//! with `f(S) = 1`. Stage one grows the duals of all active components at a
//! uniform rate and joins two components whenever an edge becomes tight.
//! Stage two deletes every edge that is not needed to keep all components
//! inactive. The result costs at most `(2 - 2/|A|)` times the accumulated
//! dual bound, where `A` is the set of vertices whose singleton is active.

use fixedbitset::FixedBitSet;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{component_labels, Edge, WeightedGraph};

/// Slack for dual constraints and for deciding that two step lengths tie.
pub const DUAL_TOLERANCE: f64 = 1e-9;
pub(crate) const TIE_EPS: f64 = 1e-12;

/// Exhaustive axiom checks up to this many vertices; random sampling above.
pub const EXHAUSTIVE_AXIOM_LIMIT: usize = 12;
const SAMPLED_AXIOM_CHECKS: usize = 1000;

/// A `{0, 1}`-valued function over vertex subsets.
pub trait CutFunction {
    fn value(&self, set: &FixedBitSet) -> bool;
}

impl<F> CutFunction for F
where
    F: Fn(&FixedBitSet) -> bool,
{
    fn value(&self, set: &FixedBitSet) -> bool {
        self(set)
    }
}

/// Steiner cut function: `f(S) = 1` iff `S` holds some but not all terminals.
#[derive(Debug, Clone)]
pub struct SteinerCut {
    terminals: FixedBitSet,
    count: usize,
}

impl SteinerCut {
    pub fn terminals(&self) -> impl Iterator<Item = usize> + '_ {
        self.terminals.ones()
    }

    pub fn n_terminals(&self) -> usize {
        self.count
    }
}

impl CutFunction for SteinerCut {
    fn value(&self, set: &FixedBitSet) -> bool {
        let inside = self.terminals.intersection(set).count();
        inside > 0 && inside < self.count
    }
}

/// Builds the Steiner cut function for `terminals` on an `n`-vertex graph.
pub fn steiner_cut_fn(n: usize, terminals: &[usize]) -> Result<SteinerCut> {
    if terminals.is_empty() {
        return Err(Error::Structural("terminal set is empty".into()));
    }
    let mut set = FixedBitSet::with_capacity(n);
    for &t in terminals {
        if t >= n {
            return Err(Error::Structural(format!(
                "terminal {t} out of range for {n} vertices"
            )));
        }
        set.insert(t);
    }
    let count = set.count_ones(..);
    Ok(SteinerCut {
        terminals: set,
        count,
    })
}

pub(crate) fn bitset_from_mask(n: usize, mask: u64) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    for v in 0..n {
        if mask >> v & 1 == 1 {
            s.insert(v);
        }
    }
    s
}

fn complement(n: usize, set: &FixedBitSet) -> FixedBitSet {
    let mut c = FixedBitSet::with_capacity(n);
    c.insert_range(..);
    c.difference_with(set);
    c
}

/// Verifies `f(V) = 0`, symmetry and disjunctivity. All subsets (and all
/// disjoint pairs) are checked when `n <= EXHAUSTIVE_AXIOM_LIMIT`; otherwise
/// 1000 random subsets and subset pairs are drawn from `rng`.
pub fn check_cut_axioms<F: CutFunction + ?Sized, R: Rng + ?Sized>(
    f: &F,
    n: usize,
    rng: &mut R,
) -> Result<()> {
    let mut full = FixedBitSet::with_capacity(n);
    full.insert_range(..);
    if f.value(&full) {
        return Err(Error::Invariant("cut function has f(V) = 1".into()));
    }

    let check_symmetric = |s: &FixedBitSet| -> Result<()> {
        if f.value(s) != f.value(&complement(n, s)) {
            return Err(Error::Invariant(format!(
                "cut function is not symmetric on {:?}",
                s.ones().collect::<Vec<_>>()
            )));
        }
        Ok(())
    };
    let check_disjunctive = |a: &FixedBitSet, b: &FixedBitSet| -> Result<()> {
        if !f.value(a) && !f.value(b) {
            let mut u = a.clone();
            u.union_with(b);
            if f.value(&u) {
                return Err(Error::Invariant(format!(
                    "cut function is not disjunctive on {:?} and {:?}",
                    a.ones().collect::<Vec<_>>(),
                    b.ones().collect::<Vec<_>>()
                )));
            }
        }
        Ok(())
    };

    if n <= EXHAUSTIVE_AXIOM_LIMIT {
        let total = 1u64 << n;
        let zero: Vec<u64> = (0..total)
            .filter(|&m| !f.value(&bitset_from_mask(n, m)))
            .collect();
        for mask in 0..total {
            check_symmetric(&bitset_from_mask(n, mask))?;
        }
        // Disjoint pairs of inactive sets whose union is active violate disjunctivity.
        let inactive: std::collections::HashSet<u64> = zero.iter().copied().collect();
        for (i, &a) in zero.iter().enumerate() {
            for &b in &zero[i + 1..] {
                if a & b == 0 && !inactive.contains(&(a | b)) {
                    check_disjunctive(&bitset_from_mask(n, a), &bitset_from_mask(n, b))?;
                }
            }
        }
    } else {
        for _ in 0..SAMPLED_AXIOM_CHECKS {
            let mut a = FixedBitSet::with_capacity(n);
            let mut b = FixedBitSet::with_capacity(n);
            for v in 0..n {
                match rng.random_range(0..3u8) {
                    0 => a.insert(v),
                    1 => b.insert(v),
                    _ => {}
                }
            }
            check_symmetric(&a)?;
            check_disjunctive(&a, &b)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Component {
    members: FixedBitSet,
    active: bool,
    /// Dual value `y_S` accumulated while this exact vertex set was a component.
    y: f64,
}

/// Snapshot of stage one: the current partition, per-vertex duals
/// `d(v) = sum_{S ∋ v} y_S`, and the laminar family of raised duals `y_S`.
#[derive(Debug, Clone)]
pub struct ClusterState {
    n: usize,
    comp_of: Vec<usize>,
    comps: Vec<Option<Component>>,
    retired: Vec<(FixedBitSet, f64)>,
    d: Vec<f64>,
}

impl ClusterState {
    fn singletons<F: CutFunction + ?Sized>(n: usize, f: &F) -> Self {
        let comps = (0..n)
            .map(|v| {
                let mut members = FixedBitSet::with_capacity(n);
                members.insert(v);
                let active = f.value(&members);
                Some(Component {
                    members,
                    active,
                    y: 0.0,
                })
            })
            .collect();
        Self {
            n,
            comp_of: (0..n).collect(),
            comps,
            retired: Vec::new(),
            d: vec![0.0; n],
        }
    }

    fn live(&self) -> impl Iterator<Item = (usize, &Component)> {
        self.comps
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|c| (i, c)))
    }

    /// Current components with their activity flags.
    pub fn components(&self) -> impl Iterator<Item = (&FixedBitSet, bool)> {
        self.live().map(|(_, c)| (&c.members, c.active))
    }

    pub fn n_active(&self) -> usize {
        self.live().filter(|(_, c)| c.active).count()
    }

    pub fn d(&self, v: usize) -> f64 {
        self.d[v]
    }

    pub fn duals(&self) -> &[f64] {
        &self.d
    }

    /// Every set with its dual value `y_S` raised so far (zero entries included).
    pub fn dual_sets(&self) -> impl Iterator<Item = (&FixedBitSet, f64)> {
        self.retired
            .iter()
            .map(|(s, y)| (s, *y))
            .chain(self.live().map(|(_, c)| (&c.members, c.y)))
    }

    pub fn same_component(&self, a: usize, b: usize) -> bool {
        self.comp_of[a] == self.comp_of[b]
    }

    /// `sum_{S : e ∈ δ(S)} y_S`, the left-hand side of the dual edge constraint.
    pub fn edge_load(&self, e: &Edge) -> f64 {
        self.dual_sets()
            .filter(|(s, _)| s.contains(e.u) != s.contains(e.v))
            .map(|(_, y)| y)
            .sum()
    }

    /// Checks every dual edge constraint `sum_{S : e ∈ δ(S)} y_S <= c_e`, the
    /// identity `load = d(u) + d(v)` for edges between distinct components,
    /// and `d(v) >= 0`.
    pub fn check_dual_feasible(&self, graph: &WeightedGraph) -> Result<()> {
        if let Some(v) = (0..self.n).find(|&v| self.d[v] < -DUAL_TOLERANCE) {
            return Err(Error::Invariant(format!("d({v}) = {} < 0", self.d[v])));
        }
        for e in graph.edges() {
            let load = self.edge_load(e);
            if load > e.cost + DUAL_TOLERANCE {
                return Err(Error::Invariant(format!(
                    "dual load {load} exceeds cost {} on edge ({}, {})",
                    e.cost, e.u, e.v
                )));
            }
            if !self.same_component(e.u, e.v) {
                let sum = self.d[e.u] + self.d[e.v];
                if (sum - load).abs() > DUAL_TOLERANCE {
                    return Err(Error::Invariant(format!(
                        "d({}) + d({}) = {sum} differs from dual load {load}",
                        e.u, e.v
                    )));
                }
            }
        }
        Ok(())
    }

    /// Raises every active component by `step` and returns how many were active.
    fn raise(&mut self, step: f64) -> usize {
        let mut active = 0;
        for c in self.comps.iter_mut().flatten() {
            if c.active {
                active += 1;
                c.y += step;
                for v in c.members.ones() {
                    self.d[v] += step;
                }
            }
        }
        active
    }

    fn merge<F: CutFunction + ?Sized>(&mut self, a: usize, b: usize, f: &F) {
        let (ca, cb) = (self.comp_of[a], self.comp_of[b]);
        let left = self.comps[ca].take().expect("live component");
        let right = self.comps[cb].take().expect("live component");
        let mut members = left.members.clone();
        members.union_with(&right.members);
        self.retired.push((left.members, left.y));
        self.retired.push((right.members, right.y));
        let id = self.comps.len();
        for v in members.ones() {
            self.comp_of[v] = id;
        }
        let active = f.value(&members);
        self.comps.push(Some(Component {
            members,
            active,
            y: 0.0,
        }));
    }
}

/// Output of [`gw_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForestSolution {
    /// Indices into `graph.edges()`, ascending.
    pub edges: Vec<usize>,
    /// Accumulated dual objective, a lower bound on the optimum.
    pub dual_bound: f64,
    pub total_cost: f64,
    /// `|A|`, the number of vertices whose singleton is active.
    pub active_vertices: usize,
}

impl ForestSolution {
    /// The `(u, v)` endpoint pairs of the selected edges.
    pub fn edge_pairs(&self, graph: &WeightedGraph) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&e| (graph.edges()[e].u, graph.edges()[e].v))
            .collect()
    }

    pub fn guarantee(&self) -> f64 {
        approximation_factor(self.active_vertices)
    }
}

/// `2 - 2/|A|`; with no active vertex the empty forest is optimal and the factor is 1.
pub fn approximation_factor(active_vertices: usize) -> f64 {
    if active_vertices == 0 {
        1.0
    } else {
        2.0 - 2.0 / active_vertices as f64
    }
}

/// Edge indices sorted by `(u, v)` then index, the tie-break order for step selection.
pub(crate) fn lexicographic_order(edges: &[Edge]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&i| (edges[i].u, edges[i].v, i));
    order
}

pub fn gw_solve<F: CutFunction + ?Sized>(graph: &WeightedGraph, f: &F) -> Result<ForestSolution> {
    gw_solve_observed(graph, f, |_| {})
}

/// [`gw_solve`] with a hook that sees the cluster state after every merge.
pub fn gw_solve_observed<F, O>(graph: &WeightedGraph, f: &F, mut observer: O) -> Result<ForestSolution>
where
    F: CutFunction + ?Sized,
    O: FnMut(&ClusterState),
{
    let n = graph.n_vertices();
    let edges = graph.edges();
    let order = lexicographic_order(edges);
    let mut state = ClusterState::singletons(n, f);
    let active_vertices = state.n_active();
    let mut chosen = Vec::new();
    let mut dual_bound = 0.0;

    while state.n_active() > 0 {
        let mut best: Option<(usize, f64)> = None;
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
            if best.is_none_or(|(_, b)| step < b - TIE_EPS) {
                best = Some((i, step));
            }
        }
        let Some((i, step)) = best else {
            return Err(Error::Infeasible(
                "active components remain but no edge leaves them".into(),
            ));
        };
        if step < -DUAL_TOLERANCE {
            return Err(Error::Invariant(format!(
                "negative step {step} on edge ({}, {})",
                edges[i].u, edges[i].v
            )));
        }
        let step = step.max(0.0);
        let active = state.raise(step);
        dual_bound += step * active as f64;
        chosen.push(i);
        state.merge(edges[i].u, edges[i].v, f);
        observer(&state);
    }

    let kept = prune(graph, f, chosen);
    let total_cost = graph.cost_of(&kept);
    Ok(ForestSolution {
        edges: kept,
        dual_bound,
        total_cost,
        active_vertices,
    })
}

/// Deletes edges whose removal leaves both sides inactive, heaviest first,
/// until no such edge remains.
fn prune<F: CutFunction + ?Sized>(graph: &WeightedGraph, f: &F, mut kept: Vec<usize>) -> Vec<usize> {
    let n = graph.n_vertices();
    let edges = graph.edges();
    kept.sort_by(|&a, &b| {
        edges[b]
            .cost
            .total_cmp(&edges[a].cost)
            .then((edges[a].u, edges[a].v, a).cmp(&(edges[b].u, edges[b].v, b)))
    });
    loop {
        let mut removed = false;
        let mut idx = 0;
        while idx < kept.len() {
            let e = kept[idx];
            let rest: Vec<usize> = kept.iter().copied().filter(|&x| x != e).collect();
            let labels = component_labels(n, edges, &rest);
            let side = |x: usize| {
                let mut s = FixedBitSet::with_capacity(n);
                for v in (0..n).filter(|&v| labels[v] == labels[x]) {
                    s.insert(v);
                }
                s
            };
            if !f.value(&side(edges[e].u)) && !f.value(&side(edges[e].v)) {
                kept.remove(idx);
                removed = true;
            } else {
                idx += 1;
            }
        }
        if !removed {
            break;
        }
    }
    kept.sort_unstable();
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_edge_instance() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let f = steiner_cut_fn(2, &[0, 1]).unwrap();
        let mut steps = Vec::new();
        let sol = gw_solve_observed(&g, &f, |s| steps.push(s.d(0))).unwrap();
        assert_eq!(steps, vec![0.5]);
        assert_eq!(sol.edges, vec![0]);
        assert!((sol.dual_bound - 1.0).abs() < 1e-12);
        assert!((sol.total_cost - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inactive_singletons_give_empty_forest() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let f = |_: &FixedBitSet| false;
        let sol = gw_solve(&g, &f).unwrap();
        assert!(sol.edges.is_empty());
        assert_eq!(sol.dual_bound, 0.0);
        assert_eq!(sol.total_cost, 0.0);
    }

    #[test]
    fn steiner_path_prunes_dangling_vertex() {
        // 0 - 1 - 2 with a cheap spur 0 - 3 that stage one picks up first.
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (0, 3, 0.1)]).unwrap();
        let f = steiner_cut_fn(4, &[0, 2]).unwrap();
        let sol = gw_solve(&g, &f).unwrap();
        assert_eq!(sol.edge_pairs(&g), vec![(0, 1), (1, 2)]);
        assert!((sol.total_cost - 2.0).abs() < 1e-12);
        assert!((sol.dual_bound - 2.0).abs() < 1e-12);
        assert!(sol.total_cost <= sol.guarantee() * sol.dual_bound + 1e-9);
    }

    #[test]
    fn disconnected_terminals_are_infeasible() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let f = steiner_cut_fn(4, &[0, 3]).unwrap();
        assert!(matches!(gw_solve(&g, &f), Err(Error::Infeasible(_))));
    }

    #[test]
    fn lexicographic_tie_break() {
        // Triangle with equal costs, all three terminals: the first two
        // edges in (u, v) order are picked.
        let g = WeightedGraph::new(3, [(1, 2, 1.0), (0, 2, 1.0), (0, 1, 1.0)]).unwrap();
        let f = steiner_cut_fn(3, &[0, 1, 2]).unwrap();
        let sol = gw_solve(&g, &f).unwrap();
        assert_eq!(sol.edge_pairs(&g), vec![(0, 2), (0, 1)]);
    }

    #[test]
    fn steiner_cut_values() {
        let f = steiner_cut_fn(3, &[0, 1]).unwrap();
        assert!(f.value(&bitset_from_mask(3, 0b001)));
        assert!(!f.value(&bitset_from_mask(3, 0b111)));
        assert!(!f.value(&bitset_from_mask(3, 0b100)));
        assert!(steiner_cut_fn(3, &[]).is_err());
        assert!(steiner_cut_fn(3, &[3]).is_err());
    }

    #[test]
    fn steiner_cut_is_symmetric_on_random_subsets() {
        let n = 20;
        let f = steiner_cut_fn(n, &[1, 4, 9, 17]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let s = bitset_from_mask(n, rng.random::<u64>() & ((1 << n) - 1));
            assert_eq!(f.value(&s), f.value(&complement(n, &s)));
        }
        check_cut_axioms(&f, n, &mut rng).unwrap();
    }

    #[test]
    fn axiom_checker_rejects_bad_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let all_one = |_: &FixedBitSet| true;
        assert!(check_cut_axioms(&all_one, 4, &mut rng).is_err());
        // Odd-size indicator on 4 vertices is proper (matching cut function).
        let odd = |s: &FixedBitSet| s.count_ones(..) % 2 == 1;
        check_cut_axioms(&odd, 4, &mut rng).unwrap();
        // "contains vertex 0" is not symmetric.
        let has_zero = |s: &FixedBitSet| s.contains(0) && s.count_ones(..) < 4;
        assert!(check_cut_axioms(&has_zero, 4, &mut rng).is_err());
        // Symmetric but not disjunctive: f(S) = 1 iff |S| = 2 on 4 vertices.
        let pairs = |s: &FixedBitSet| s.count_ones(..) == 2;
        assert!(check_cut_axioms(&pairs, 4, &mut rng).is_err());
    }
}
