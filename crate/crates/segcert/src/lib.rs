//! Certification engine for segmentation under randomized smoothing.
//!
//! The library turns per-component Monte Carlo class counts into sound,
//! FWER-controlled robustness certificates: a class-or-abstain decision per
//! component plus a single l2 radius for the whole input. It also ships the
//! synthetic oracle harness used to study the statistical power of the
//! certification procedures at desk scale.
//!
//! Modules:
//! - [`stats`]: exact binomial tests, Clopper-Pearson bounds, normal
//!   CDF/quantile, and the multiple-testing corrections (Bonferroni, Holm,
//!   Lehmann-Romano k-FWER step-down).
//! - [`smoothing`]: the certification algorithms themselves, from the
//!   single-input predict/certify pair to the per-component procedure and the
//!   two naive baselines.
//! - [`synthetic`]: reproducible oracle sampling and experiment sweeps.
//! - [`metrics`]: segmentation quality metrics over certified outputs.

pub mod error;
pub mod metrics;
pub mod smoothing;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
