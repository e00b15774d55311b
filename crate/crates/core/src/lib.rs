//! Certification of real-meromorphic nonintegrability for time-periodically
//! perturbed integrable systems near heteroclinic connections.
//!
//! The pipeline: describe the unperturbed system, its first integrals and a
//! connection orbit ([`model`]); construct the bounded solution of the
//! adjoint variational equation by two-sided shooting ([`adjoint`]); compute
//! the Fourier coefficients of the Melnikov function by adaptive quadrature
//! ([`melnikov`]); and turn a nonzero coefficient into a noncommuting
//! monodromy pair, i.e. a constructive nonintegrability certificate
//! ([`galois`]). The periodically forced rigid body ([`rigidbody`]) ships
//! with every quantity in closed form and serves as the oracle for the
//! whole numerical pipeline. See the crate examples for end-to-end usage.

pub mod adjoint;
pub mod autonomize;
pub mod cli;
pub mod error;
pub mod galois;
pub mod integrate;
pub mod melnikov;
pub mod model;
pub mod quad;
pub mod rigidbody;

pub use error::{Error, Result};
