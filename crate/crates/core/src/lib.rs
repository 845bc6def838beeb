//! Forward scattering and reverse-time-migration imaging for locally rough
//! surfaces in two dimensions.

pub mod error;
pub mod forward;
pub mod geometry;
pub mod greens;
pub mod imaging;
pub mod linalg;
pub mod quadrature;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use specfun::C64;
