//! Numerical toolkit for optimal quantum cloning of finite qubit sets.
//!
//! Small dense linear algebra ([`qlinalg`]), Bloch-sphere input sets
//! ([`states`]), cloning machines ([`cloners`]), single-copy fidelity and its
//! harmonic decomposition ([`fidelity`]), and a multi-start simplex search
//! for set-specific optimal machines ([`optimize`]).

pub mod cloners;
pub mod error;
pub mod fidelity;
pub mod optimize;
pub mod qlinalg;
pub mod states;

pub use error::{Error, Result};
