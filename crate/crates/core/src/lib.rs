//! Greatest lower bounds of coherence measures from interval data.
//!
//! Given constraints `a_k <= Tr(rho O_k) <= b_k` on an unknown state, the
//! smallest coherence compatible with them equals the dual value
//!
//! ```text
//! sup_{mu, nu >= 0} inf_rho C(rho) + sum_k mu_k (a_k - Tr(rho O_k)) + nu_k (Tr(rho O_k) - b_k)
//! ```
//!
//! The inner infimum is replaced by a temperature-smoothed minimum over a
//! growing random sample of states ([`estimator::estimate`]). For convex-roof
//! measures the sample holds pure states only. [`oracles`] has closed-form
//! solutions of the two-photon example used to validate the estimator.

pub mod ascent;
pub mod constraints;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod measures;
pub mod oracles;
pub mod problem;
pub mod sampler;
pub mod tolerances;

pub use error::{Error, Result};
