//! Domain types shared by every solver: superposition matrices, arity
//! budgets, superposition trees and plain weighted undirected graphs.
//!
//! Vertex numbering for superpositions follows the matrix layout. Rows
//! `0..n` are internal vertices (primitive functions) with row 0 the root
//! `*`; column `n` is the variable `x`, which may occur any number of times
//! in one tree. Column indices `0..n` refer to the same vertices as the rows.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

/// A primitive function label together with its arity (the vertex color).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimitiveSpec {
    pub name: String,
    pub arity: usize,
}

impl PrimitiveSpec {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Self {
            name: name.into(),
            arity,
        }
    }

    /// The root `*`, which always has exactly one argument.
    pub fn root() -> Self {
        Self::new("*", 1)
    }

    pub fn variable(name: impl Into<String>) -> Self {
        Self::new(name, 0)
    }
}

/// Dense `n x (n + 1)` matrix of edge weights, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SuperpositionMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Structural("matrix needs at least one row".into()));
        }
        let mut entries = Vec::with_capacity(n * (n + 1));
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n + 1 {
                return Err(Error::Structural(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    n + 1
                )));
            }
            if let Some(bad) = row.iter().find(|w| !w.is_finite()) {
                return Err(Error::Structural(format!("row {i} holds non-finite weight {bad}")));
            }
            entries.extend(row);
        }
        Ok(Self { n, entries })
    }

    /// Builds a matrix by evaluating `weight(row, col)` on every cell.
    pub fn from_fn(n: usize, mut weight: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let rows = (0..n)
            .map(|r| (0..=n).map(|c| weight(r, c)).collect())
            .collect();
        Self::from_rows(rows)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _| 0.0)
    }

    /// Number of internal vertices (rows).
    pub fn n_internal(&self) -> usize {
        self.n
    }

    /// Column index of the variable.
    pub fn variable_column(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.n && col <= self.n, "index ({row}, {col}) out of range");
        self.entries[row * (self.n + 1) + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let width = self.n + 1;
        &self.entries[row * width..(row + 1) * width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.n + 1)
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Applies `f` to every entry.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|&w| f(w)).collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Affine rescale onto `[0, 1]` using the global minimum and maximum.
    ///
    /// A constant matrix has no meaningful rescale and maps to all zeros.
    pub fn normalize(&self) -> Self {
        let (lo, hi) = (self.min(), self.max());
        let span = hi - lo;
        if span <= 0.0 {
            return self.map(|_| 0.0);
        }
        self.map(|w| ((w - lo) / span).clamp(0.0, 1.0))
    }

    /// The square internal block, i.e. the matrix without its variable column.
    pub fn internal_block(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r[..self.n].to_vec()).collect()
    }

    /// Reassembles a matrix from a square internal block and a variable column.
    pub fn from_block_and_variable(block: &[Vec<f64>], variable: &[f64]) -> Result<Self> {
        let n = block.len();
        if variable.len() != n {
            return Err(Error::Structural(format!(
                "variable column has {} entries, expected {n}",
                variable.len()
            )));
        }
        let rows = block
            .iter()
            .zip(variable)
            .map(|(r, &x)| {
                let mut row = r.clone();
                row.push(x);
                row
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn variable_weights(&self) -> Vec<f64> {
        self.rows().map(|r| r[self.n]).collect()
    }
}

/// Normalizes `matrix`; free-function form of [`SuperpositionMatrix::normalize`].
pub fn normalize(matrix: &SuperpositionMatrix) -> SuperpositionMatrix {
    matrix.normalize()
}

/// Per-vertex out-degree budgets, index-aligned with matrix rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AritySpec(Vec<usize>);

impl AritySpec {
    /// `arities[0]` is the root and must be 1; every other entry must be at least 1.
    pub fn new(arities: Vec<usize>) -> Result<Self> {
        match arities.first() {
            None => return Err(Error::Structural("arity list is empty".into())),
            Some(&a) if a != 1 => {
                return Err(Error::Structural(format!("root arity must be 1, got {a}")))
            }
            _ => {}
        }
        if let Some(i) = arities.iter().position(|&a| a == 0) {
            return Err(Error::Structural(format!(
                "internal vertex {i} has arity 0"
            )));
        }
        Ok(Self(arities))
    }

    /// Prepends the root arity to the arities of the remaining functions.
    pub fn with_root(function_arities: &[usize]) -> Result<Self> {
        let mut all = Vec::with_capacity(function_arities.len() + 1);
        all.push(1);
        all.extend_from_slice(function_arities);
        Self::new(all)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, vertex: usize) -> usize {
        self.0[vertex]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Sum of all arities, i.e. the number of edges of a tree that uses every
    /// internal vertex.
    pub fn total_mass(&self) -> usize {
        self.0.iter().sum()
    }

    /// Vertex count of a tree in which every arity slot is filled.
    pub fn default_k(&self) -> usize {
        self.total_mass() + 1
    }
}

/// Rooted superposition tree stored as a multiset of `(parent_row, child_col)`
/// edges. Edges are kept sorted so that derived equality is multiset equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SuperpositionTree {
    edges: Vec<(usize, usize)>,
}

impl SuperpositionTree {
    pub fn new(mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort_unstable();
        Self { edges }
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn multiplicity(&self, edge: (usize, usize)) -> usize {
        self.edges.iter().filter(|&&e| e == edge).count()
    }

    /// Sum of matrix weights over the edge multiset.
    pub fn weight(&self, matrix: &SuperpositionMatrix) -> f64 {
        self.edges.iter().map(|&(p, c)| matrix.get(p, c)).sum()
    }

    /// Children of `parent` in sorted order (variable repeated per occurrence).
    pub fn children(&self, parent: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .filter(move |&&(p, _)| p == parent)
            .map(|&(_, c)| c)
    }

    /// 0/1 indicator matrix; repeated variable edges collapse to a single 1.
    pub fn to_indicator(&self, n_internal: usize) -> Result<SuperpositionMatrix> {
        let mut m = vec![vec![0.0; n_internal + 1]; n_internal];
        for &(p, c) in &self.edges {
            if p >= n_internal || c > n_internal {
                return Err(Error::Structural(format!(
                    "edge ({p}, {c}) outside a {n_internal}-row matrix"
                )));
            }
            m[p][c] = 1.0;
        }
        SuperpositionMatrix::from_rows(m)
    }
}

impl fmt::Display for SuperpositionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, c) in &self.edges {
            writeln!(f, "{p} {c}")?;
        }
        Ok(())
    }
}

/// Edge-multiset equality; multiplicity of variable edges counts.
pub fn tree_equal(a: &SuperpositionTree, b: &SuperpositionTree) -> bool {
    a == b
}

/// Checks a tree against the rooted-tree, in-degree, arity and coverage
/// constraints. `k` is the minimum number of covered vertices, where each
/// edge into the variable column counts as a separate vertex.
pub fn check_feasible(tree: &SuperpositionTree, arity: &AritySpec, k: usize) -> Result<bool> {
    let n = arity.len();
    let var = n;
    for &(p, c) in tree.edges() {
        if p >= n || c > n {
            return Err(Error::Structural(format!(
                "edge ({p}, {c}) out of range for {n} internal vertices"
            )));
        }
    }

    let mut in_degree = vec![0usize; n];
    let mut out_degree = vec![0usize; n];
    for &(p, c) in tree.edges() {
        out_degree[p] += 1;
        if c != var {
            in_degree[c] += 1;
        }
    }
    if in_degree[0] > 0 || in_degree.iter().any(|&d| d > 1) {
        return Ok(false);
    }

    // Walk from the root; with in-degree <= 1 everywhere this visits a tree.
    let mut reached = vec![false; n];
    reached[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for c in tree.children(v) {
            if c != var && !reached[c] {
                reached[c] = true;
                queue.push_back(c);
            }
        }
    }
    if tree.edges().iter().any(|&(p, _)| !reached[p]) {
        return Ok(false);
    }
    let arity_ok = (0..n)
        .filter(|&v| reached[v])
        .all(|v| out_degree[v] == arity.get(v));
    if !arity_ok {
        return Ok(false);
    }
    Ok(1 + tree.len() >= k)
}

/// Undirected edge with a non-negative cost. Endpoints are stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cost: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Weighted undirected graph with optional root and vertex prizes.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    root: Option<usize>,
    prizes: Option<Vec<f64>>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut out = Vec::new();
        for (u, v, cost) in edges {
            if u >= n || v >= n {
                return Err(Error::Structural(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::Structural(format!("self-loop at vertex {u}")));
            }
            if !(cost.is_finite() && cost >= 0.0) {
                return Err(Error::Structural(format!(
                    "edge ({u}, {v}) has invalid cost {cost}"
                )));
            }
            out.push(Edge {
                u: u.min(v),
                v: u.max(v),
                cost,
            });
        }
        Ok(Self {
            n,
            edges: out,
            root: None,
            prizes: None,
        })
    }

    /// Complete graph on `n` vertices with `cost(i, j)` for `i < j`.
    pub fn complete(n: usize, mut cost: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, cost(i, j)))
            .collect();
        Self::new(n, edges)
    }

    pub fn with_root(mut self, root: usize) -> Result<Self> {
        if root >= self.n {
            return Err(Error::Structural(format!(
                "root {root} out of range for {} vertices",
                self.n
            )));
        }
        self.root = Some(root);
        Ok(self)
    }

    pub fn with_prizes(mut self, prizes: Vec<f64>) -> Result<Self> {
        if prizes.len() != self.n {
            return Err(Error::Structural(format!(
                "{} prizes for {} vertices",
                prizes.len(),
                self.n
            )));
        }
        if let Some(p) = prizes.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::Structural(format!("invalid prize {p}")));
        }
        self.prizes = Some(prizes);
        Ok(self)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn prizes(&self) -> Option<&[f64]> {
        self.prizes.as_deref()
    }

    pub fn prize(&self, v: usize) -> f64 {
        self.prizes.as_ref().map_or(0.0, |p| p[v])
    }

    /// Total cost of the edges with the given indices.
    pub fn cost_of(&self, edge_ids: &[usize]) -> f64 {
        edge_ids.iter().map(|&e| self.edges[e].cost).fold(0.0, |acc, c| acc + c)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; self.n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Labels connected components of `(V, edge_ids)`; returns one label per vertex.
pub(crate) fn component_labels(n: usize, edges: &[Edge], edge_ids: &[usize]) -> Vec<usize> {
    let mut dsu = DisjointSet::new(n);
    for &e in edge_ids {
        dsu.union(edges[e].u, edges[e].v);
    }
    (0..n).map(|v| dsu.find(v)).collect()
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn worked_example() -> (SuperpositionMatrix, AritySpec) {
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
            (1, 6),
            (1, 3),
            (2, 6),
            (3, 4),
            (4, 6),
            (4, 5),
            (5, 6),
        ])
    }

    #[test]
    fn worked_tree_is_feasible() {
        let (_, arity) = worked_example();
        assert_eq!(arity.default_k(), 10);
        assert!(check_feasible(&worked_tree(), &arity, 10).unwrap());
    }

    #[test]
    fn every_single_edge_deletion_is_infeasible() {
        let (_, arity) = worked_example();
        let tree = worked_tree();
        for skip in 0..tree.len() {
            let edges = tree
                .edges()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &e)| e)
                .collect();
            let cut = SuperpositionTree::new(edges);
            assert!(!check_feasible(&cut, &arity, 10).unwrap(), "deleted edge {skip}");
        }
    }

    #[test]
    fn empty_tree_is_infeasible() {
        let arity = AritySpec::new(vec![1, 2]).unwrap();
        assert!(!check_feasible(&SuperpositionTree::default(), &arity, 1).unwrap());
    }

    #[test]
    fn in_degree_two_is_infeasible() {
        // root -> 1, 1 -> {2, 2}: vertex 2 entered twice.
        let arity = AritySpec::new(vec![1, 2, 1]).unwrap();
        let tree = SuperpositionTree::new(vec![(0, 1), (1, 2), (1, 2), (2, 3)]);
        assert!(!check_feasible(&tree, &arity, 1).unwrap());
    }

    #[test]
    fn edge_into_root_is_infeasible() {
        let arity = AritySpec::new(vec![1, 1]).unwrap();
        let tree = SuperpositionTree::new(vec![(0, 1), (1, 0)]);
        assert!(!check_feasible(&tree, &arity, 1).unwrap());
    }

    #[test]
    fn unreachable_parent_is_infeasible() {
        let arity = AritySpec::new(vec![1, 1, 1]).unwrap();
        // vertex 2 hangs on nothing
        let tree = SuperpositionTree::new(vec![(0, 1), (1, 3), (2, 3)]);
        assert!(!check_feasible(&tree, &arity, 1).unwrap());
    }

    #[test]
    fn coverage_below_k_is_infeasible() {
        let arity = AritySpec::new(vec![1, 1, 1]).unwrap();
        let tree = SuperpositionTree::new(vec![(0, 1), (1, 3)]);
        assert!(check_feasible(&tree, &arity, 3).unwrap());
        assert!(!check_feasible(&tree, &arity, arity.default_k()).unwrap());
    }

    #[test]
    fn out_of_range_edge_is_an_error() {
        let arity = AritySpec::new(vec![1, 1]).unwrap();
        let tree = SuperpositionTree::new(vec![(0, 5)]);
        assert!(matches!(
            check_feasible(&tree, &arity, 1),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn normalize_identity_affine_and_degenerate() {
        let m = SuperpositionMatrix::from_rows(vec![vec![0.0, 0.2, 0.7], vec![1.0, 0.5, 0.3]])
            .unwrap();
        assert_eq!(m.normalize(), m);

        let m = SuperpositionMatrix::from_rows(vec![vec![-0.3, 0.5, 1.3], vec![0.5, 1.3, -0.3]])
            .unwrap()
            .normalize();
        assert_eq!(m.entries(), &[0.0, 0.5, 1.0, 0.5, 1.0, 0.0]);

        let c = SuperpositionMatrix::from_fn(3, |_, _| 0.42).unwrap().normalize();
        assert!(c.entries().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn matrix_shape_is_checked() {
        assert!(SuperpositionMatrix::from_rows(vec![]).is_err());
        assert!(SuperpositionMatrix::from_rows(vec![vec![0.2, 0.7, 0.1]]).is_err());
        assert!(SuperpositionMatrix::from_rows(vec![vec![0.2, f64::NAN]]).is_err());
    }

    #[test]
    fn tree_equality_is_multiset_equality() {
        let a = SuperpositionTree::new(vec![(0, 1), (1, 2), (1, 2)]);
        let b = SuperpositionTree::new(vec![(1, 2), (0, 1), (1, 2)]);
        assert!(tree_equal(&a, &b));
        let c = SuperpositionTree::new(vec![(0, 1), (1, 2)]);
        assert!(!tree_equal(&a, &c));
        assert!(!tree_equal(&c, &a));
    }

    #[test]
    fn arity_validation() {
        assert!(AritySpec::new(vec![]).is_err());
        assert!(AritySpec::new(vec![2, 1]).is_err());
        assert!(AritySpec::new(vec![1, 0]).is_err());
        assert_eq!(AritySpec::with_root(&[3, 1]).unwrap().as_slice(), &[1, 3, 1]);
    }

    #[test]
    fn graph_validation() {
        assert!(WeightedGraph::new(2, [(0, 0, 1.0)]).is_err());
        assert!(WeightedGraph::new(2, [(0, 1, -1.0)]).is_err());
        assert!(WeightedGraph::new(2, [(0, 2, 1.0)]).is_err());
        let g = WeightedGraph::new(3, [(2, 0, 1.0)]).unwrap();
        assert_eq!((g.edges()[0].u, g.edges()[0].v), (0, 2));
        assert!(!g.is_connected());
        assert!(g.clone().with_prizes(vec![1.0]).is_err());
        assert!(g.clone().with_prizes(vec![1.0, -1.0, 0.0]).is_err());
        assert!(g.with_root(3).is_err());
    }

    #[test]
    fn indicator_collapses_variable_multiplicity() {
        let t = SuperpositionTree::new(vec![(0, 1), (1, 2), (1, 2)]);
        let m = t.to_indicator(2).unwrap();
        assert_eq!(m.row(1), &[0.0, 0.0, 1.0]);
        assert_eq!(t.multiplicity((1, 2)), 2);
    }
}
