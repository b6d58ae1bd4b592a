//! The `spanrec` command line.
//!
//! Exit codes: 0 success, 2 usage or unreadable file, 3 malformed input,
//! 4 instance above an exact solver's size bound, 5 internal invariant breach.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{run_experiment, ExperimentConfig};
use crate::error::Error;
use crate::forest::{gw_solve, steiner_cut_fn};
use crate::graph::{AritySpec, SuperpositionMatrix, WeightedGraph};
use crate::io::{format_tree, parse_graph, parse_matrix};
use crate::oracle::{exact_forest, exact_pcst, exact_superposition};
use crate::pcst::{kmst_via_pcst, pcst_solve, PcstSolution};
use crate::reconstruct::{steiner_instance, Algorithm, KMST_PRIZE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_SIZE_BOUND: i32 = 4;
pub const EXIT_INVARIANT: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "spanrec", version, about = "Superposition tree reconstruction and primal-dual forest solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reconstruct a superposition tree from a weight matrix.
    Reconstruct {
        #[arg(long)]
        matrix: PathBuf,
        /// `from-file`, or a comma-separated list overriding the file's arity line.
        #[arg(long, default_value = "from-file")]
        arities: String,
        #[arg(long, value_parser = parse_algorithm)]
        algo: Algorithm,
    },
    /// Prize-collecting Steiner tree by the primal-dual method.
    Pcst {
        #[command(flatten)]
        input: PcstInput,
        /// Also report the k-MST objective with the uniform prize as multiplier.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Steiner forest by the primal-dual method.
    Gw {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        terminals: Vec<usize>,
    },
    /// Exhaustive solvers for small instances.
    Oracle {
        #[arg(long, value_enum)]
        mode: OracleMode,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value = "from-file")]
        arities: String,
        #[arg(long, value_delimiter = ',')]
        terminals: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        root: usize,
        #[arg(long, default_value_t = KMST_PRIZE)]
        prize: f64,
        #[arg(long, value_delimiter = ',')]
        prizes: Option<Vec<f64>>,
    },
    /// Exact-match rates of all reconstruction algorithms under noise.
    Bench {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.50,0.52,0.54,0.56,0.58")]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 4)]
        min_internal: usize,
        #[arg(long, default_value_t = 8)]
        max_internal: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// One row per alpha, one column per algorithm.
        #[arg(long)]
        plot_data: bool,
    },
}

#[derive(Debug, Args)]
struct PcstInput {
    /// Graph file; mutually exclusive with `--matrix`.
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    graph: Option<PathBuf>,
    /// Matrix file, turned into the undirected instance used by the k-MST reconstructions.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    root: usize,
    /// Uniform prize for every non-root vertex.
    #[arg(long, default_value_t = KMST_PRIZE)]
    prize: f64,
    /// Per-vertex prizes; overrides `--prize`.
    #[arg(long, value_delimiter = ',', conflicts_with = "matrix")]
    prizes: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleMode {
    Forest,
    Pcst,
    Superposition,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse::<Algorithm>().map_err(|e| e.to_string())
}

/// A failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Config(_) => EXIT_USAGE,
            Error::Parse { .. } | Error::Structural(_) | Error::Infeasible(_) => EXIT_PARSE,
            Error::SizeBound { .. } => EXIT_SIZE_BOUND,
            Error::Invariant(_) => EXIT_INVARIANT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn read_matrix(path: &Path, arities: &str) -> Result<(SuperpositionMatrix, AritySpec), Failure> {
    let (matrix, from_file) = parse_matrix(&read(path)?).map_err(|e| match e {
        Error::Parse { line, msg } => Failure {
            code: EXIT_PARSE,
            message: format!("{}:{line}: {msg}", path.display()),
        },
        other => other.into(),
    })?;
    if arities == "from-file" {
        return Ok((matrix, from_file));
    }
    let list = arities
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| usage(format!("invalid --arities {arities:?}")))?;
    let arity = AritySpec::new(list).map_err(|e| usage(e.to_string()))?;
    if arity.len() != matrix.n_internal() {
        return Err(usage(format!(
            "--arities has {} entries for a {}-row matrix",
            arity.len(),
            matrix.n_internal()
        )));
    }
    Ok((matrix, arity))
}

fn read_graph(path: &Path) -> Result<WeightedGraph, Failure> {
    parse_graph(&read(path)?).map_err(|e| match e {
        Error::Parse { line, msg } => Failure {
            code: EXIT_PARSE,
            message: format!("{}:{line}: {msg}", path.display()),
        },
        other => other.into(),
    })
}

/// Attaches root and prizes to a graph read from file.
fn rooted(graph: WeightedGraph, root: usize, prize: f64, prizes: Option<Vec<f64>>) -> Result<WeightedGraph, Failure> {
    let n = graph.n_vertices();
    let prizes = prizes.unwrap_or_else(|| vec![prize; n]);
    Ok(graph.with_root(root)?.with_prizes(prizes)?)
}

fn pcst_instance(input: PcstInput) -> Result<WeightedGraph, Failure> {
    match (input.graph, input.matrix) {
        (Some(g), _) => rooted(read_graph(&g)?, input.root, input.prize, input.prizes),
        (None, Some(m)) => {
            let (matrix, _) = read_matrix(&m, "from-file")?;
            Ok(steiner_instance(&matrix, input.prize)?)
        }
        (None, None) => Err(usage("one of --graph or --matrix is required")),
    }
}

fn edge_lines(out: &mut String, pairs: &[(usize, usize)]) {
    for (u, v) in pairs {
        let _ = writeln!(out, "{u} {v}");
    }
}

fn pcst_report(out: &mut String, graph: &WeightedGraph, sol: &PcstSolution) {
    edge_lines(out, &sol.edge_pairs(graph));
    let _ = writeln!(
        out,
        "# edge_cost={} missed_prize={} objective={} dual_bound={}",
        sol.edge_cost, sol.missed_prize, sol.objective, sol.dual_bound
    );
}

fn execute(command: Command, stdout: &mut String, stderr: &mut String) -> Result<(), Failure> {
    match command {
        Command::Reconstruct { matrix, arities, algo } => {
            let (m, arity) = read_matrix(&matrix, &arities)?;
            let r = algo.run(&m, &arity)?;
            if !r.complete {
                let _ = writeln!(stderr, "warning: {algo} produced an incomplete tree");
            }
            stdout.push_str(&format_tree(&r.tree));
        }
        Command::Pcst { input, k } => {
            let lambda = input.prize;
            let uniform = input.prizes.is_none();
            let graph = pcst_instance(input)?;
            let sol = pcst_solve(&graph)?;
            pcst_report(stdout, &graph, &sol);
            if let Some(k) = k {
                if !uniform {
                    return Err(usage("--k needs a uniform --prize"));
                }
                let kmst = kmst_via_pcst(&graph, k, lambda)?;
                let _ = writeln!(stdout, "# k={k} covered={} kmst_objective={}", kmst.n_covered(), kmst.objective);
            }
        }
        Command::Gw { graph, terminals } => {
            let g = read_graph(&graph)?;
            let f = steiner_cut_fn(g.n_vertices(), &terminals)?;
            let sol = gw_solve(&g, &f)?;
            edge_lines(stdout, &sol.edge_pairs(&g));
            let _ = writeln!(
                stdout,
                "# cost={} dual_bound={} factor={}",
                sol.total_cost,
                sol.dual_bound,
                sol.guarantee()
            );
        }
        Command::Oracle {
            mode,
            graph,
            matrix,
            arities,
            terminals,
            root,
            prize,
            prizes,
        } => match mode {
            OracleMode::Forest => {
                let path = graph.ok_or_else(|| usage("--mode forest needs --graph"))?;
                let g = read_graph(&path)?;
                let f = steiner_cut_fn(g.n_vertices(), &terminals)?;
                let sol = exact_forest(&g, &f)?;
                edge_lines(stdout, &sol.edge_pairs(&g));
                let _ = writeln!(stdout, "# cost={}", sol.total_cost);
            }
            OracleMode::Pcst => {
                let input = PcstInput {
                    graph,
                    matrix,
                    root,
                    prize,
                    prizes,
                };
                let g = pcst_instance(input)?;
                let sol = exact_pcst(&g)?;
                pcst_report(stdout, &g, &sol);
            }
            OracleMode::Superposition => {
                let path = matrix.ok_or_else(|| usage("--mode superposition needs --matrix"))?;
                let (m, arity) = read_matrix(&path, &arities)?;
                stdout.push_str(&format_tree(&exact_superposition(&m, &arity)?));
            }
        },
        Command::Bench {
            seed,
            trials,
            alphas,
            min_internal,
            max_internal,
            out,
            plot_data,
        } => {
            let config = ExperimentConfig {
                trials,
                alphas,
                min_internal,
                max_internal,
                seed,
                ..ExperimentConfig::default()
            };
            let report = run_experiment(&config)?;
            let csv = if plot_data {
                report.to_plot_csv()
            } else {
                report.to_csv()
            };
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?,
                None => stdout.push_str(&csv),
            }
        }
    }
    Ok(())
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                return EXIT_USAGE;
            }
            let _ = stdout.write_all(text.as_bytes());
            return EXIT_OK;
        }
    };
    let mut out = String::new();
    let mut err = String::new();
    let result = execute(cli.command, &mut out, &mut err);
    let _ = stderr.write_all(err.as_bytes());
    match result {
        Ok(()) => {
            let _ = stdout.write_all(out.as_bytes());
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

pub fn main() -> ! {
    let code = run(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code)
}
