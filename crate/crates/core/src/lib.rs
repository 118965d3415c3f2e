//! Subspace predictive repetitive control (SPRC) for periodic blade-load
//! rejection, a conventional individual-pitch benchmark, and the turbine and
//! wind surrogates they run against.

pub mod cipc;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod plant;
pub mod spectral;
pub mod sprc;
pub mod sysid;
pub mod windfield;

pub use error::{Error, Result};
