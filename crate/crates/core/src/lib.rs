pub mod engine;
pub mod error;
pub mod fourier;
pub mod harness;
pub mod likelihood;
pub mod postprocess;
pub mod simulator;
pub mod weights;
pub mod wrapped_normal;

pub use error::{Error, Result};
pub use fourier::FourierSeries;
pub use wrapped_normal::WrappedNormal;
