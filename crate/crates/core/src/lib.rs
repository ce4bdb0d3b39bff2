//! Gaussian boson sampling (GBS) toolkit for weighted dense-subgraph search.
//!
//! The pipeline: encode an interaction graph into a multimode Gaussian state,
//! compute Hafnian-weighted photon-pattern probabilities, draw reproducible
//! samples, post-process them into heavy cliques, and fit compact 1-/2-layer
//! beam-splitter circuits to the reference covariance so the whole experiment
//! can run holographically on 2-3 physical modes. A truncated Fock-space
//! simulator serves as the independent oracle for every Gaussian-side formula.

pub mod clique;
pub mod encoding;
pub mod fock;
pub mod graph;
pub mod hafnian;
pub mod holo;
pub mod linalg;
pub mod mps;
pub mod optim;
pub mod sampler;

pub use encoding::{GaussianState, KernelMatrix, TakagiFactors};
pub use graph::{InteractionGraph, WeightedEncoding};
pub use hafnian::{EncodingBundle, MatchingSum, PhotonPattern};
pub use sampler::{PatternDistribution, SampleHistogram};
