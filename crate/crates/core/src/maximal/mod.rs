//! Averaging and maximal operators over `ℓ^q` balls on the periodic grid
//! `(Z/LZ)^d`. With `2N < L` the ball does not wrap, so for functions
//! supported away from the boundary the grid operator agrees with the one on
//! `Z^d`.

pub mod experiments;
pub mod fft;
mod grid;
pub mod ops;

pub use experiments::{
    check_maximal_properties, lambda_maximal_experiment, ratio_experiment, square_function_probe, test_function,
    Family, RatioReport, SquareFunctionReport, TrialRatios,
};
pub use grid::{grid_len, GridFunction};
pub use ops::{average, average_with, build_kernel, maximal, maximal_with, Convolution, DyadicRange, RangeKind};
