//! Fourier multiplier symbols on `T^d` and the sampled checks of their bounds.

pub mod beta;
pub mod checks;
mod frequency;
pub mod perm;
pub mod sampling;
pub mod symbol;

pub use beta::{beta_krawtchouk, beta_subsets, beta_symmetric, cosines};
pub use checks::{check_beta_bounds, check_beta_methods, check_gaussian_approximation, check_symbol_bounds};
pub use frequency::Frequency;
pub use perm::{check_permutation_average, check_permutation_batch, PermAverageInstance, PermMode};
pub use sampling::{Stratum, STRATA};
pub use symbol::{
    alternating_coefficient_exact, eval_alternating_coefficient, eval_lambda, eval_m, eval_m_blocks, eval_m_dense,
    eval_m_montecarlo, eval_s, eval_s_dense, Lambda, Method, SymbolValue,
};
