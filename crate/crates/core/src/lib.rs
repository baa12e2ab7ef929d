pub mod acceptance;
pub mod error;
pub mod estimators;
pub mod par;
pub mod source;
pub mod symbolic;
pub mod thermo;

pub use error::{Error, Result};
