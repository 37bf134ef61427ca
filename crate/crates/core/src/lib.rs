#![no_std]

extern crate alloc;

pub mod algebra;
pub mod error;
pub mod linalg;
pub mod model;
pub mod propagation;
pub mod readout;
pub mod schedule;

pub use error::{Error, Result};
