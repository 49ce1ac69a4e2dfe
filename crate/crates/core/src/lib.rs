pub mod curves;
pub mod error;
pub mod frenet;
pub mod frenetode;
pub mod jets;
pub mod job;
pub mod numerics;
pub mod rectify;

pub use error::{Error, Result};
