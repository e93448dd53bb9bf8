//! Telemetry fault simulation and cascaded fault detection.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. File formats, checkpoints
//! and the command-line tool live in the `faultlab` crate.
#![no_std]

extern crate alloc;

pub mod cascade;
pub mod changepoint;
pub mod eval;
pub mod nn;
pub mod segclass;
pub mod seed;
pub mod sim;
pub mod tensor;

pub use tensor::Tensor2;
