//! Parallel Monte Carlo estimation.
//!
//! Trials are cut into fixed chunks and each chunk is counted on its own.
//! Every trial owns its random stream, so the per-round counts, and hence the
//! ledger, equal the sequential ones regardless of thread count.

use faraday_ecp_core::montecarlo::{self, EmpiricalLedger, SimulationConfig};
use rayon::prelude::*;

use crate::Result;

const CHUNK: u64 = 2048;

pub fn estimate_parallel(config: &SimulationConfig) -> Result<EmpiricalLedger> {
    config.validate()?;
    let chunks: Vec<(u64, u64)> = (0..config.trials.div_ceil(CHUNK))
        .map(|i| (i * CHUNK, ((i + 1) * CHUNK).min(config.trials)))
        .collect();
    let counts = chunks
        .par_iter()
        .map(|&(lo, hi)| montecarlo::count_successes(config, lo..hi))
        .try_reduce(
            || vec![0u64; config.max_rounds],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    Ok(EmpiricalLedger::from_counts(config.trials, counts)?)
}
