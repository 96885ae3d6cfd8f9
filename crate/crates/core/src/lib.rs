//! Hybrid Adam / Riemann-zeta optimizer with a small MLP training core and
//! an experiment harness for comparing it against Adam.

pub mod data;
pub mod error;
pub mod harness;
pub mod nn;
pub mod optim;
pub mod zeta;

pub use error::{Error, Result};
