//! Exact and Monte Carlo computations for the random-cluster, Potts and
//! Ising models on finite multigraphs, and their correspondence with the
//! Tutte polynomial.

pub mod association;
pub mod cli;
pub mod coupling;
pub mod error;
pub mod flows;
pub mod graph;
pub mod kn;
pub mod measures;
pub mod poly;
pub mod polynomials;
pub mod report;
pub mod suites;

pub use error::{Error, Result};
pub use graph::{EdgeSubset, GraphFamily, Multigraph};
pub use measures::{MeasureTable, PottsParams, RcParams};
pub use poly::{BivariatePolynomial, Rational};
