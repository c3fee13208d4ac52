//! The quantitative compactness machinery: mollifier and cutoff utilities,
//! bootstrap norm ledgers with explicit constant chains, tail-decay
//! thresholds for the compact embeddings, and convergent-subsequence
//! extraction from bounded trajectory families.

pub mod extract;
pub mod ledger;
pub mod mollify;
pub mod tails;

pub use extract::{extract_convergent, trajectory_metric, ExtractionReport};
pub use ledger::{bootstrap_ledger, elementary_ledger, xi_compute, NormLedger};
pub use mollify::{bump, mollify, MollifierSpec};
pub use tails::{family_bound, tail_threshold, tail_verify, ScaleCurve, TailReport};
