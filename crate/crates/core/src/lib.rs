pub mod cgo;
pub mod cli;
pub mod error;
pub mod expr;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod holder;
pub mod jet;
pub mod medium;
pub mod point;
pub mod quadrature;
pub mod scene;
pub mod source;
pub mod transmission;
pub mod verify;
pub mod specfun;

pub use error::{Error, Result};
