pub mod bound;
pub mod cli;
pub mod error;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod resonance;
pub mod roots;
pub mod scattering;
pub mod specfun;

pub use error::{Error, Result};
