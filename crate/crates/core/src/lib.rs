//! Hand embeddings for contract bridge.
//!
//! A weight-shared encoder maps each 13-card hand to a short real vector and
//! is trained to predict averaged double-dummy trick counts for a pair of
//! hands. Around it sit the pieces needed to build and use it: a
//! double-dummy solver, duplicate scoring, dataset generation, a small dense
//! network engine, embedding-space queries, an opening-bid experiment and a
//! cross-entropy-method bidding agent.

pub mod cards;
pub mod dds;
pub mod config;
pub mod datagen;
pub mod scoring;
pub mod cli;
pub mod nn;
pub mod model;
pub mod vecspace;
pub mod opening;
pub mod rl;
