//! Noise-robustness experiment: random ground-truth superpositions, uniform
//! entrywise noise followed by normalization, and exact-match rates of the
//! seven reconstruction algorithms.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{tree_equal, AritySpec, SuperpositionMatrix, SuperpositionTree};
use crate::reconstruct::Algorithm;

/// Noise levels of the reference sweep.
pub const DEFAULT_ALPHAS: [f64; 5] = [0.50, 0.52, 0.54, 0.56, 0.58];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Number of ground-truth instances `K`.
    pub trials: usize,
    pub alphas: Vec<f64>,
    /// Inclusive range for the number of internal vertices (root included).
    pub min_internal: usize,
    pub max_internal: usize,
    /// Non-root arities are `1 + Binomial(binomial_trials, binomial_p)`.
    pub binomial_trials: u64,
    pub binomial_p: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            alphas: DEFAULT_ALPHAS.to_vec(),
            min_internal: 4,
            max_internal: 8,
            binomial_trials: 2,
            binomial_p: 0.3,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("at least one trial is required".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::Config(format!("noise level must be >= 0, got {a}")));
        }
        if self.min_internal == 0 || self.min_internal > self.max_internal {
            return Err(Error::Config(format!(
                "invalid internal vertex range {}..={}",
                self.min_internal, self.max_internal
            )));
        }
        if !(0.0..=1.0).contains(&self.binomial_p) {
            return Err(Error::Config(format!(
                "binomial success probability {} outside [0, 1]",
                self.binomial_p
            )));
        }
        Ok(())
    }

    /// Deterministic generator for trial `trial`, independent of scheduling.
    pub fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }
}

/// One ground truth: the binary matrix, the arities and the tree itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub matrix: SuperpositionMatrix,
    pub arity: AritySpec,
    pub tree: SuperpositionTree,
}

/// Samples a ground-truth superposition that uses every internal vertex.
///
/// Vertices are attached in random order, each to a uniformly chosen open
/// arity slot of the tree built so far; slots left open at the end take the
/// variable. Attaching a vertex never reduces the number of open slots, so
/// the construction always succeeds.
pub fn generate_instance<R: Rng + ?Sized>(config: &ExperimentConfig, rng: &mut R) -> Result<Instance> {
    config.validate()?;
    let n = rng.random_range(config.min_internal..=config.max_internal);
    let bonus = Binomial::new(config.binomial_trials, config.binomial_p)
        .map_err(|e| Error::Config(format!("binomial arity distribution: {e}")))?;
    let mut arities = vec![1usize];
    arities.extend((1..n).map(|_| 1 + bonus.sample(rng) as usize));
    let arity = AritySpec::new(arities)?;

    let mut order: Vec<usize> = (1..n).collect();
    order.shuffle(rng);
    let mut open = vec![0usize];
    let mut edges = Vec::with_capacity(arity.total_mass());
    for v in order {
        let slot = rng.random_range(0..open.len());
        let parent = open.swap_remove(slot);
        edges.push((parent, v));
        open.extend(std::iter::repeat_n(v, arity.get(v)));
    }
    edges.extend(open.into_iter().map(|p| (p, n)));

    let tree = SuperpositionTree::new(edges);
    let matrix = tree.to_indicator(n)?;
    Ok(Instance {
        matrix,
        arity,
        tree,
    })
}

/// `normalize(M + U(-alpha, alpha))` with independent noise per entry.
pub fn add_noise<R: Rng + ?Sized>(matrix: &SuperpositionMatrix, alpha: f64, rng: &mut R) -> Result<SuperpositionMatrix> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::Config(format!("noise level must be >= 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(matrix.normalize());
    }
    Ok(matrix.map(|w| w + rng.random_range(-alpha..=alpha)).normalize())
}

/// Exact-match count of one algorithm at one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityRow {
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub matches: usize,
    pub trials: usize,
}

impl QualityRow {
    pub fn rate(&self) -> f64 {
        self.matches as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub seed: u64,
    pub trials: usize,
    pub alphas: Vec<f64>,
    /// Ordered by alpha (sweep order), then by [`Algorithm::ALL`].
    pub rows: Vec<QualityRow>,
}

fn fmt_alpha(alpha: f64) -> String {
    let two = format!("{alpha:.2}");
    if two.parse::<f64>() == Ok(alpha) {
        two
    } else {
        alpha.to_string()
    }
}

impl QualityReport {
    pub fn rate(&self, algorithm: Algorithm, alpha: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.alpha == alpha)
            .map(QualityRow::rate)
    }

    /// `algorithm,alpha,rate,k_trials,seed`, one row per (algorithm, alpha).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm,alpha,rate,k_trials,seed\n");
        for algorithm in Algorithm::ALL {
            for r in self.rows.iter().filter(|r| r.algorithm == algorithm) {
                let _ = writeln!(
                    out,
                    "{},{},{:.4},{},{}",
                    r.algorithm,
                    fmt_alpha(r.alpha),
                    r.rate(),
                    r.trials,
                    self.seed
                );
            }
        }
        out
    }

    /// The same rates pivoted: one row per alpha, one column per algorithm.
    pub fn to_plot_csv(&self) -> String {
        let mut out = String::from("alpha");
        for a in Algorithm::ALL {
            out.push(',');
            out.push_str(a.name());
        }
        out.push('\n');
        for &alpha in &self.alphas {
            out.push_str(&fmt_alpha(alpha));
            for a in Algorithm::ALL {
                let rate = self.rate(a, alpha).unwrap_or(f64::NAN);
                let _ = write!(out, ",{rate:.4}");
            }
            out.push('\n');
        }
        out
    }
}

/// Three binomial standard errors, `3 sqrt(q (1 - q) / K)`.
pub fn confidence_slack(rate: f64, trials: usize) -> f64 {
    3.0 * (rate * (1.0 - rate) / trials as f64).sqrt()
}

/// `high >= low` up to the combined confidence slack of both rates.
pub fn at_least_within_slack(high: f64, low: f64, trials: usize) -> bool {
    high + confidence_slack(high, trials) + confidence_slack(low, trials) >= low
}

/// Per-trial outcome: `hits[alpha_index][algorithm_index]`.
fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<Vec<[bool; 7]>> {
    let mut rng = config.trial_rng(trial);
    let instance = generate_instance(config, &mut rng)?;
    config
        .alphas
        .iter()
        .map(|&alpha| {
            let noisy = add_noise(&instance.matrix, alpha, &mut rng)?;
            let mut hits = [false; 7];
            for (slot, alg) in hits.iter_mut().zip(Algorithm::ALL) {
                let r = alg.run(&noisy, &instance.arity)?;
                *slot = r.complete && tree_equal(&r.tree, &instance.tree);
            }
            Ok(hits)
        })
        .collect()
}

/// Runs every trial (in parallel) and aggregates exact-match rates.
pub fn run_experiment(config: &ExperimentConfig) -> Result<QualityReport> {
    config.validate()?;
    let outcomes: Vec<Vec<[bool; 7]>> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(config.alphas.len() * 7);
    for (ai, &alpha) in config.alphas.iter().enumerate() {
        for (gi, algorithm) in Algorithm::ALL.into_iter().enumerate() {
            let matches = outcomes.iter().filter(|o| o[ai][gi]).count();
            rows.push(QualityRow {
                algorithm,
                alpha,
                matches,
                trials: config.trials,
            });
        }
    }
    Ok(QualityReport {
        seed: config.seed,
        trials: config.trials,
        alphas: config.alphas.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::check_feasible;

    #[test]
    fn two_vertex_instance_is_forced() {
        let config = ExperimentConfig {
            min_internal: 2,
            max_internal: 2,
            binomial_trials: 0,
            ..Default::default()
        };
        let inst = generate_instance(&config, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(inst.arity.as_slice(), &[1, 1]);
        assert_eq!(inst.tree.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn generated_trees_are_feasible() {
        let config = ExperimentConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let inst = generate_instance(&config, &mut rng).unwrap();
            assert!(check_feasible(&inst.tree, &inst.arity, inst.arity.default_k()).unwrap());
            assert_eq!(inst.matrix, inst.tree.to_indicator(inst.arity.len()).unwrap());
        }
    }

    #[test]
    fn arity_mean_matches_binomial_moment() {
        // Mean of 1 + Bin(2, 0.3) is 1.6, variance 0.42.
        let config = ExperimentConfig {
            min_internal: 2,
            max_internal: 2,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 10_000;
        let sum: usize = (0..draws)
            .map(|_| generate_instance(&config, &mut rng).unwrap().arity.get(1))
            .sum();
        let mean = sum as f64 / draws as f64;
        let sigma = (0.42f64 / draws as f64).sqrt();
        assert!((mean - 1.6).abs() <= 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn zero_noise_is_identity_on_binary_matrices() {
        let inst = generate_instance(&ExperimentConfig::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let noisy = add_noise(&inst.matrix, 0.0, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(noisy, inst.matrix);
        assert!(add_noise(&inst.matrix, -0.1, &mut ChaCha8Rng::seed_from_u64(2)).is_err());
    }

    #[test]
    fn half_noise_keeps_true_edges_on_top() {
        let config = ExperimentConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let inst = generate_instance(&config, &mut rng).unwrap();
            let noisy = add_noise(&inst.matrix, 0.5, &mut rng).unwrap();
            let (mut lo_true, mut hi_false) = (f64::INFINITY, f64::NEG_INFINITY);
            for (&b, &w) in inst.matrix.entries().iter().zip(noisy.entries()) {
                assert!((0.0..=1.0).contains(&w));
                if b == 1.0 {
                    lo_true = lo_true.min(w);
                } else {
                    hi_false = hi_false.max(w);
                }
            }
            assert!(lo_true >= hi_false);
        }
    }

    #[test]
    fn config_validation() {
        let bad = [
            ExperimentConfig { trials: 0, ..Default::default() },
            ExperimentConfig { alphas: vec![-0.1], ..Default::default() },
            ExperimentConfig { min_internal: 5, max_internal: 4, ..Default::default() },
            ExperimentConfig { binomial_p: 1.5, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn csv_layout() {
        let config = ExperimentConfig {
            trials: 3,
            alphas: vec![0.0, 0.525],
            ..Default::default()
        };
        let report = run_experiment(&config).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "algorithm,alpha,rate,k_trials,seed");
        assert_eq!(lines.len(), 1 + 7 * 2);
        assert_eq!(lines[1], "dfs,0.00,1.0000,3,0");
        assert!(lines[2].starts_with("dfs,0.525,"));
        let plot = report.to_plot_csv();
        assert!(plot.starts_with("alpha,dfs,bfs,prims,kmst,kmst-dfs,kmst-bfs,kmst-prims\n0.00,1.0000"));
    }

    #[test]
    fn slack_helpers() {
        assert_eq!(confidence_slack(1.0, 1000), 0.0);
        assert!(at_least_within_slack(0.5, 0.52, 1000));
        assert!(!at_least_within_slack(0.3, 0.6, 1000));
    }
}
