pub mod atmosphere;
pub mod beam;
pub mod error;
pub mod fading;
pub mod gaussian;
pub mod geometry;
pub mod numerics;
pub mod scenario;
pub mod sweep;
pub mod thermal;
pub mod validation;

pub use error::{Error, Result};
