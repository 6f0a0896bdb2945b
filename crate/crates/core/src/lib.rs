//! Linear programming upper bounds on the size of binary linear codes.
//!
//! The crate builds the `DelsarteLin(r, n, d)` family of linear programs over
//! functions on `r x n` bit matrices, in both the cube form (one variable per
//! matrix, usable only at small scale) and the form symmetrized under column
//! permutations (one variable per composition of `n` into `2^r` parts, with
//! multivariate Krawtchouk constraint rows). Classic Delsarte is the `r = 1`
//! member. Models are solved with an exact rational simplex, optionally warm
//! started from a floating-point solve, or exported in LP/MPS format.
//!
//! Module map:
//! - [`cube`]: bit vectors/matrices, group actions and brute-force partial
//!   Fourier transforms.
//! - [`indexset`]: the index set `I_{r,n}`, its Walsh-Hadamard spectra and the
//!   `GL(r,2)` action and orbits.
//! - [`krawtchouk`]: multivariate and partial Krawtchouk values.
//! - [`lpbuild`]: every linear program as an abstract sparse rational model.
//! - [`solver`]: exact and floating-point simplex, and LP/MPS export.
//! - [`oracle`]: brute-force verification reports.

pub mod cube;
pub mod error;
pub mod indexset;
pub mod krawtchouk;
pub mod lpbuild;
pub mod oracle;
pub mod rational;
pub mod solver;

pub use error::{Error, Result};
pub use rational::Rational;
