//! Exact and Monte Carlo Kullback–Leibler prediction risks of Bayesian
//! predictive distributions for Wishart observations under the enriched
//! conjugate prior family.

// `!(x > lo)` is used on purpose so NaN fails domain checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone;
pub mod error;
pub mod exec;
pub mod montecarlo;
pub mod priors;
pub mod regions;
pub mod risk;
pub mod specfun;

pub use cone::{ConeElement, Partition, PhiParam};
pub use error::{Error, Result};
pub use exec::Execution;
pub use montecarlo::{McConfig, McEstimate};
pub use priors::{HyperS, HyperT, PriorKind};
pub use regions::{GridSpec, RegionGrid};
pub use risk::RiskReport;
pub use specfun::ConeSpec;
