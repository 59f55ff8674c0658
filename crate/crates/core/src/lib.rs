pub mod channels;
pub mod cli;
pub mod correlations;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod protocol;
pub mod qstate;
pub mod search;

pub use error::{Error, Result};
