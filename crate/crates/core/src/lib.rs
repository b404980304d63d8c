#![no_std]
extern crate alloc;

pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod forward;
pub mod gallery;
pub mod hankel;
pub mod harmonic;
pub mod inverse;
pub mod jacobi;
pub mod linalg;

pub use error::{Error, Result};
pub type C64 = num_complex::Complex64;
