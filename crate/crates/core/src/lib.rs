//! Learning DPP kernels from samples by the method of moments.
//!
//! Diagonal entries and off-diagonal magnitudes come from empirical
//! principal minors of size one and two. Off-diagonal signs are only
//! identified through cycles of the kernel's graph: the estimator takes a
//! shortest maximal cycle basis, estimates the sign of each basis cycle from
//! the corresponding higher-order minor, and solves a linear system over
//! GF(2) for edge signs consistent with them. Chordal graphs take a linear
//! time path through a perfect elimination ordering instead.
//!
//! Module map:
//!
//! | module | contents |
//! |---|---|
//! | [`linalg`] | symmetric matrices, LU determinants, Jacobi eigensolver |
//! | [`gf2`] | packed bit vectors, echelon accumulator, `Ax = b` solver |
//! | [`graph`] | undirected graphs, BFS, Lex-BFS / PEO, spanning forests |
//! | [`kernel`] | kernels, sign conjugation, `rho`, subset probabilities |
//! | [`sampler`] | brute-force and spectral exact samplers |
//! | [`cyclebasis`] | Horton candidates, shortest maximal cycle basis |
//! | [`estimator`] | moment tables, graph and sign recovery |
//! | [`bounds`] | sample-size calculators, lower-bound constructions |
//! | [`experiments`] | seeded Monte-Carlo recovery grids |
//! | [`cli`] | the `dpp-moments` command line |

#![forbid(unsafe_code)]

pub mod bounds;
pub mod cli;
pub mod cyclebasis;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod gf2;
pub mod graph;
pub mod kernel;
pub mod linalg;
pub mod sampler;

pub use error::{Error, Result};
