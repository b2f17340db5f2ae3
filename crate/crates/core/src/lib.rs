pub mod cert;
pub mod choi;
pub mod error;
pub mod file;
pub mod hunter;
pub mod linalg;
pub mod product;
pub mod sample;
#[cfg(test)]
mod testutil;
pub mod zoo;

pub use error::{Error, Result};
