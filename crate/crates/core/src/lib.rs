pub mod cli;
pub mod error;
pub mod hyper;
pub mod mcwalk;
mod numeric;
pub mod potentials;
pub mod scaling;
pub mod specfn;
pub mod transfer;

pub use error::{Error, Result};
