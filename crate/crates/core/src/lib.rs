//! Hierarchical Bayesian three-groups models for gene classification.
//!
//! Each gene carries a latent label — null, deleterious, or beneficial — and
//! every data modality (a negative-binomial RNA-seq sub-model, a logistic
//! GWAS sub-model) is specified conditionally on those shared labels. A
//! Dirichlet prior over the group probabilities yields an automatic
//! multiplicity adjustment, and a reversible-jump sampler explores label
//! assignments together with the effect sizes, which may follow local
//! (half-normal) or non-local (half-piMOM) selection priors.

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod likelihood;
pub mod metrics;
pub mod priors;
pub mod sampler;
pub mod simulate;
pub mod trace;

pub use error::{Error, Result};
