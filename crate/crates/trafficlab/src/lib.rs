//! Road-traffic congestion prediction over sensor graphs.
//!
//! The pipeline: build an undirected graph over traffic sensors, compute
//! node embeddings (spectral, random-walk, matrix-factorization, or
//! heat-wavelet), engineer previous-hour and previous-week congestion
//! density features, train tree-ensemble classifiers, and benchmark every
//! (feature set x embedding x classifier) combination on a held-out split.
//!
//! All randomness flows from one root seed through labeled derivation, so
//! every artifact is reproducible bit for bit, with or without the `parallel`
//! feature and at any thread count.

pub mod classify;
pub mod dataset;
pub mod embed;
pub mod experiment;
pub mod features;
pub mod graph;
pub mod oracle;
pub(crate) mod par;
pub mod rng;
pub mod spectral;
pub mod time;
