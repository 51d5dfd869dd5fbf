//! Exact lattice-point combinatorics, Krawtchouk polynomials, Fourier multiplier
//! symbols and discrete Hardy–Littlewood maximal operators over `ℓ^q` balls.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches files,
//! the command line or wall-clock time lives in the companion `lqlab` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod ball;
pub mod error;
pub mod krawtchouk;
pub mod lattice;
pub mod maximal;
pub mod multipliers;
pub mod numeric;
pub mod report;
pub mod rng;

pub use num_bigint;
pub use num_complex;
pub use num_rational;

pub use ball::LqBallSpec;
pub use error::{Error, Result};
pub use lattice::{BigCount, ValueProfile};
pub use report::{Status, Value, VerificationReport};
