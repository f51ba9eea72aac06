// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;

use super::{resolve_design, srswor_means, stream_rng, DOMAIN_SAMPLE};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, PreparedEstimator};
use crate::stats::{PopulationFrame, StratumId};
use crate::theory;

/// Replications per work unit. Partial sums are formed per block and
/// combined in block order, so results do not depend on thread count.
pub const BLOCK_SIZE: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRow {
    pub estimator: String,
    /// Exponent in use, after resolving the optimal marker.
    pub alpha: Option<f64>,
    pub empirical_mean: f64,
    pub empirical_bias: f64,
    pub empirical_mse: f64,
    /// Monte Carlo standard error of `empirical_mse`.
    pub mse_std_error: f64,
    pub theoretical_bias: f64,
    pub theoretical_mse: f64,
    /// Replications whose transformed auxiliary sample mean was negative.
    pub negative_auxiliary: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub rows: Vec<SimulationRow>,
    pub replications: u64,
    pub seed: u64,
    pub true_mean: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
    sum_quad: f64,
    negative: u64,
}

impl Moments {
    fn merge(&mut self, other: &Moments) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.sum_quad += other.sum_quad;
        self.negative += other.negative;
    }
}

/// Empirical bias and MSE of each estimator over `reps` replications,
/// next to its first-order values computed from the frame's exact
/// summaries.
pub fn run_replications(
    frame: &PopulationFrame,
    design: &[(StratumId, u64)],
    specs: &[EstimatorSpec],
    reps: u64,
    seed: u64,
) -> Result<SimulationReport> {
    run_replications_with(frame, design, specs, reps, seed, true)
}

/// [`run_replications`] with explicit control over parallel execution.
pub fn run_replications_with(
    frame: &PopulationFrame,
    design: &[(StratumId, u64)],
    specs: &[EstimatorSpec],
    reps: u64,
    seed: u64,
    parallel: bool,
) -> Result<SimulationReport> {
    if reps == 0 {
        return Err(Error::InvalidInput("reps must be positive".into()));
    }
    let strata = resolve_design(frame, design)?;
    let pop = frame.summarize(design)?;
    let truth = frame.mean_y();
    let prepared = specs
        .iter()
        .map(|s| PreparedEstimator::new(s, &pop))
        .collect::<Result<Vec<_>>>()?;
    let theoretical = specs
        .iter()
        .map(|s| theory::theoretical(s, &pop))
        .collect::<Result<Vec<_>>>()?;
    let weights = pop.weights();

    let run_block = |block: u64| -> Result<Vec<Moments>> {
        let start = block * BLOCK_SIZE;
        let end = (start + BLOCK_SIZE).min(reps);
        let mut acc = vec![Moments::default(); prepared.len()];
        let mut ybar = vec![0.0; strata.len()];
        let mut xbar = vec![0.0; strata.len()];
        for rep in start..end {
            for (k, (id, cols, n)) in strata.iter().enumerate() {
                let mut rng = stream_rng(seed, DOMAIN_SAMPLE, id, rep);
                (ybar[k], xbar[k]) = srswor_means(cols, *n, &mut rng);
            }
            for (est, m) in prepared.iter().zip(acc.iter_mut()) {
                let e = est.evaluate(weights, &ybar, &xbar).map_err(|e| Error::Replication {
                    index: rep,
                    source: Box::new(e),
                })?;
                let d = e.value - truth;
                let d2 = d * d;
                m.sum += e.value;
                m.sum_sq += d2;
                m.sum_quad += d2 * d2;
                m.negative += u64::from(e.negative_auxiliary);
            }
        }
        Ok(acc)
    };

    let blocks = reps.div_ceil(BLOCK_SIZE);
    let partials: Vec<Result<Vec<Moments>>> = if parallel {
        (0..blocks).into_par_iter().map(run_block).collect()
    } else {
        (0..blocks).map(run_block).collect()
    };
    let mut totals = vec![Moments::default(); prepared.len()];
    for part in partials {
        for (t, p) in totals.iter_mut().zip(part?) {
            t.merge(&p);
        }
    }

    let r = reps as f64;
    let rows = prepared
        .iter()
        .zip(&theoretical)
        .zip(&totals)
        .map(|((est, &(tb, tm)), m)| {
            let mean = m.sum / r;
            let mse = m.sum_sq / r;
            let var_sq = (m.sum_quad / r - mse * mse).max(0.0);
            SimulationRow {
                estimator: est.spec().name(),
                alpha: est.alpha(),
                empirical_mean: mean,
                empirical_bias: mean - truth,
                empirical_mse: mse,
                mse_std_error: (var_sq / r).sqrt(),
                theoretical_bias: tb,
                theoretical_mse: tm,
                negative_auxiliary: m.negative,
            }
        })
        .collect();

    Ok(SimulationReport {
        rows,
        replications: reps,
        seed,
        true_mean: truth,
    })
}
