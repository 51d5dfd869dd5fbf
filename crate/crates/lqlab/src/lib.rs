//! Files, configuration and orchestration around `lqlab-core`: the experiment
//! suite runner, JSON-lines and CSV reports, golden-file comparison and the
//! binary grid format.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brute;
pub mod config;
pub mod golden;
pub mod gridio;
pub mod output;
pub mod suite;

use anyhow::{bail, Context, Result};

pub use config::ExperimentConfig;
pub use golden::compare_golden;
pub use suite::{run_points, run_suite, SuiteOutcome};

/// Environment variable overriding the high-precision float width.
pub const PRECISION_ENV: &str = "LQLAB_PRECISION_BITS";

/// Width for high-precision budget comparisons, from `LQLAB_PRECISION_BITS`
/// (default 128).
pub fn precision_bits() -> Result<usize> {
    match std::env::var(PRECISION_ENV) {
        Ok(s) => {
            let bits: usize = s.trim().parse().with_context(|| format!("{PRECISION_ENV}={s:?} is not an integer"))?;
            if !(64..=65536).contains(&bits) {
                bail!("{PRECISION_ENV} must lie in [64, 65536]");
            }
            Ok(bits)
        }
        Err(std::env::VarError::NotPresent) => Ok(lqlab_core::ball::DEFAULT_PRECISION_BITS),
        Err(e) => bail!("{PRECISION_ENV}: {e}"),
    }
}
