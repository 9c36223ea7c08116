//! Detect, quantify, and explain ranking personalization in grouped audit data.
//!
//! The crate works on *exposure lists*: the ordered comment lists that a set of
//! audit accounts observed on the same videos. Accounts belong to groups
//! (left-trained, right-trained, cold-start controls), and the question is
//! whether the platform showed different groups different comment sections.
//!
//! The pipeline, end to end:
//!
//! 1. [`data_model`] — load/save JSONL audit bundles (accounts, comments,
//!    exposures) with eager referential validation.
//! 2. [`rank_metrics`] — Jaccard distance over exposure sets and normalized
//!    Damerau–Levenshtein distance over exposure orderings, assembled into
//!    per-video dissimilarity matrices.
//! 3. [`stats`] — ANOSIM with seeded permutation tests, Mann–Whitney U,
//!    Spearman rank correlation, Cohen's kappa, Gini coefficient.
//! 4. [`features`] — per-video structural features (volume, engagement
//!    inequality, partisan imbalance), audit-protocol criteria, and positional
//!    partisan-exposure tests.
//! 5. [`structure`] — feature/metric correlation tables, PCA, k-means
//!    clustering, and cluster comparisons.
//! 6. [`stance`] — political-stance labeling: prompt rendering, an HTTP
//!    chat-completion client with disk caching, a deterministic offline stub,
//!    sampling estimators, and agreement evaluation.
//! 7. [`simulator`] — a synthetic audit generator with a controllable
//!    personalization strength, used to calibrate and power-test everything
//!    above.
//! 8. [`pipeline`] — orchestration and report emission for the CLI.
//!
//! All randomized computations take explicit seeds and derive per-task
//! substreams ([`seed`]), so results are bit-identical across runs and worker
//! counts.

pub mod data_model;
pub mod error;
pub mod features;
pub mod pipeline;
pub mod rank_metrics;
pub mod seed;
pub mod simulator;
pub mod stance;
pub mod stats;
pub mod structure;

pub use error::{Error, Result};
