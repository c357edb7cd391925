pub mod classical;
pub mod complex_oscillator;
pub mod error;
pub mod field;
pub mod gaussian;
pub mod hermite;
pub mod mehler;
pub mod operator;
pub mod pais_uhlenbeck;
pub mod report;

pub use error::{Error, Result};
