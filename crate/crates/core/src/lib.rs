//! Circuit knitting for variational quantum algorithms.
//!
//! Parameterized circuits are partitioned into device-sized fragments by cutting
//! cross-partition CX/CZ gates with a quasiprobability decomposition. Ansatz
//! architectures are searched under a sampling-overhead-aware fitness, and parameters
//! are trained with gradients that only re-simulate the fragments a parameter touches.

pub mod bench;
pub mod circuit;
pub mod error;
pub mod knit;
pub mod qas;
pub mod sim;
pub mod vqa;

pub use error::{Error, Result};
