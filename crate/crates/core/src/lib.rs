//! Reconstruction of superposition trees from noisy edge-probability
//! matrices, together with the primal-dual solvers it builds on: the
//! constrained forest method, prize-collecting Steiner trees and the k-MST
//! relaxation. Exhaustive oracles for small instances live in [`oracle`].

pub mod bench;
pub mod cli;
pub mod error;
pub mod forest;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod pcst;
pub mod reconstruct;
