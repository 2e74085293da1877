pub mod ascent;
pub mod error;
pub mod estimates;
pub mod field;
pub mod fft;
pub mod harmonics;
pub mod legendre;
pub mod nls;
pub mod quadrature;
pub mod recorded;
pub mod report;
pub mod rng;
pub mod spacetime;
pub mod spectrum;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
