pub mod config;
pub mod csvio;
pub(crate) mod dd;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod forward;
pub mod mittag_leffler;
pub(crate) mod numeric;
pub mod observation;
pub(crate) mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
