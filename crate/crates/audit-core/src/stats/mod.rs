//! Inferential statistics used across the pipeline.
//!
//! Everything here is pure and deterministic; permutation procedures take
//! explicit seeds and derive one substream per permutation index, so serial
//! and parallel execution agree bit for bit.

mod anosim;
mod gini;
mod kappa;
mod mann_whitney;
mod rank;
mod spearman;

pub use anosim::{anosim_permutation_test, anosim_r, AnosimResult, GroupAssignment, NullSummary};
pub use gini::gini;
pub use kappa::{cohens_kappa, kappa_from_confusion};
pub use mann_whitney::{mann_whitney_u, MwuMethod, MwuResult};
pub use rank::average_ranks;
pub use spearman::{spearman_rho, SpearmanResult};
