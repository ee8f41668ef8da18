//! Covariant quantum kernels on coset-structured data: statevector
//! simulation, coherent-noise models, closed-form moment predictions and a
//! Monte-Carlo experiment runner.

pub mod bounds_check;
pub mod dataset;
pub mod dense;
pub mod error;
pub mod experiment;
pub mod group;
pub mod kernel;
pub mod noise;
pub mod report;
pub mod statevector;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
