#![allow(dead_code)]

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spanrec::bench::{generate_instance, ExperimentConfig, Instance};
use spanrec::graph::WeightedGraph;
use spanrec::oracle::MAX_ARITY_MASS;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected graph: a random spanning tree plus extra distinct edges
/// up to `max_edges`. Half the instances use small integer costs so that
/// ties occur.
pub fn connected_graph<R: Rng>(rng: &mut R, n: usize, max_edges: usize) -> WeightedGraph {
    let integer = rng.random_bool(0.5);
    let cost = |rng: &mut R| {
        if integer {
            rng.random_range(1..=4) as f64
        } else {
            rng.random::<f64>()
        }
    };
    let mut pairs = Vec::new();
    for v in 1..n {
        pairs.push((rng.random_range(0..v), v));
    }
    let all_pairs = n * (n - 1) / 2;
    let target = rng.random_range(n - 1..=max_edges.min(all_pairs));
    while pairs.len() < target {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        let (u, v) = (u.min(v), u.max(v));
        if u != v && !pairs.contains(&(u, v)) {
            pairs.push((u, v));
        }
    }
    let edges: Vec<_> = pairs.into_iter().map(|(u, v)| (u, v, cost(rng))).collect();
    WeightedGraph::new(n, edges).unwrap()
}

pub fn terminals<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<usize> {
    sample(rng, n, count.min(n)).into_vec()
}

/// Rooted at 0 with prizes uniform in `[0, 1)`, costs uniform in `[0, 1)`.
pub fn pcst_instance<R: Rng>(rng: &mut R, n: usize) -> WeightedGraph {
    let mut pairs = Vec::new();
    for v in 1..n {
        pairs.push((rng.random_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !pairs.contains(&(u, v)) && rng.random_bool(0.4) {
                pairs.push((u, v));
            }
        }
    }
    let edges: Vec<_> = pairs.into_iter().map(|(u, v)| (u, v, rng.random::<f64>())).collect();
    let prizes = (0..n).map(|_| rng.random::<f64>()).collect();
    WeightedGraph::new(n, edges)
        .unwrap()
        .with_root(0)
        .unwrap()
        .with_prizes(prizes)
        .unwrap()
}

/// Noiseless ground truth small enough for the exhaustive superposition solver.
pub fn small_instance<R: Rng>(rng: &mut R, config: &ExperimentConfig) -> Instance {
    loop {
        let inst = generate_instance(config, rng).unwrap();
        if inst.arity.total_mass() <= MAX_ARITY_MASS {
            return inst;
        }
    }
}
