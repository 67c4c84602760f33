pub mod circuit;
pub mod error;
pub mod gadgets;
pub mod harness;
pub mod hamming;
pub mod noise;
pub mod pauli;
pub mod sim;
pub mod steane;
pub mod threshold;

pub use error::{Error, Result};
