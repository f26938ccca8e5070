//! Zero-temperature asymptotic spectra of kinetic transition networks.
//!
//! A stochastic network over an energy landscape (states = local minima, edges =
//! saddles, Arrhenius rates) has a generator whose eigenvalues behave like
//! `lambda_k ~ exp(-Delta_k/T)` as `T -> 0` and whose eigenvectors approach indicator
//! functions of state subsets. This crate computes the full collection of exponents
//! `Delta_k`, eigenvector supports `S_k`, and Freidlin cycles `C_k` by cutting the
//! minimum spanning tree in barrier order ([`spectrum`]), verifies the construction
//! against exhaustive sink-graph optimization and dense finite-temperature linear
//! algebra ([`oracle`]), and ships the landscape file tooling around it ([`io`]).
//!
//! ```
//! use ktn::spectrum::{run, SpectrumOptions};
//!
//! let net = ktn::fixtures::seven_well();
//! let res = run(&net, &SpectrumOptions::default()).unwrap();
//! assert_eq!(res.records().len(), 6);
//! let sinks: Vec<u32> = res.sink_sequence().iter().map(|s| s.0).collect();
//! assert_eq!(sinks, [1, 2, 7, 5, 6, 3, 4]);
//! ```

pub mod fixtures;
pub mod io;
pub mod mstree;
pub mod network;
pub mod oracle;
pub mod spectrum;

pub use network::{EdgeId, EdgeRecord, Network, NetworkData, NetworkError, StateId, StateRecord};
