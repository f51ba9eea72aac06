// SPDX-License-Identifier: Apache-2.0

use itertools::Itertools;

use super::resolve_design;
use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, PreparedEstimator};
use crate::stats::{PopulationFrame, StratumId};

/// Largest number of stratified samples `enumerate_exact` will visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Exact design moments of one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub estimator: String,
    pub mean: f64,
    pub bias: f64,
    pub mse: f64,
    pub combinations: u128,
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// `(exact_bias, exact_mse)` over every equally likely stratified SRSWOR
/// sample.
pub fn enumerate_exact(
    frame: &PopulationFrame,
    design: &[(StratumId, u64)],
    spec: &EstimatorSpec,
) -> Result<(f64, f64)> {
    let m = enumerate_exact_all(frame, design, std::slice::from_ref(spec))?;
    Ok((m[0].bias, m[0].mse))
}

/// Exact moments for several estimators from one pass over the samples.
pub fn enumerate_exact_all(
    frame: &PopulationFrame,
    design: &[(StratumId, u64)],
    specs: &[EstimatorSpec],
) -> Result<Vec<ExactMoments>> {
    let strata = resolve_design(frame, design)?;
    let combinations = strata.iter().fold(1u128, |acc, (_, cols, n)| {
        acc.saturating_mul(binomial(cols.len() as u128, *n as u128))
    });
    if combinations > ENUMERATION_LIMIT {
        return Err(Error::BudgetExceeded {
            combinations,
            limit: ENUMERATION_LIMIT,
        });
    }

    let pop = frame.summarize(design)?;
    let truth = frame.mean_y();
    let prepared = specs
        .iter()
        .map(|s| PreparedEstimator::new(s, &pop))
        .collect::<Result<Vec<_>>>()?;

    // Every subset mean of every stratum, in lexicographic subset order.
    let subset_means: Vec<Vec<(f64, f64)>> = strata
        .iter()
        .map(|(_, cols, n)| {
            (0..cols.len())
                .combinations(*n)
                .map(|idx| {
                    let y = idx.iter().map(|&i| cols.y[i]).sum::<f64>() / *n as f64;
                    let x = idx.iter().map(|&i| cols.x[i]).sum::<f64>() / *n as f64;
                    (y, x)
                })
                .collect()
        })
        .collect();

    let mut sums = vec![(0.0f64, 0.0f64); prepared.len()];
    let mut ybar = vec![0.0; strata.len()];
    let mut xbar = vec![0.0; strata.len()];
    for (index, choice) in subset_means
        .iter()
        .map(|v| v.iter())
        .multi_cartesian_product()
        .enumerate()
    {
        for (k, &&(y, x)) in choice.iter().enumerate() {
            ybar[k] = y;
            xbar[k] = x;
        }
        for (est, s) in prepared.iter().zip(sums.iter_mut()) {
            let v = est
                .evaluate(pop.weights(), &ybar, &xbar)
                .map_err(|e| Error::Replication {
                    index: index as u64,
                    source: Box::new(e),
                })?
                .value;
            s.0 += v;
            s.1 += (v - truth) * (v - truth);
        }
    }

    let total = combinations as f64;
    Ok(prepared
        .iter()
        .zip(sums)
        .map(|(est, (sum, sq))| ExactMoments {
            estimator: est.spec().name(),
            mean: sum / total,
            bias: sum / total - truth,
            mse: sq / total,
            combinations,
        })
        .collect())
}
