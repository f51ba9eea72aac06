// SPDX-License-Identifier: Apache-2.0

//! Neyman allocation of a total sample size across strata.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::stats::{PopulationSummary, StratumId};

#[derive(Debug, Clone, PartialEq)]
pub struct StratumAllocation {
    pub id: StratumId,
    /// `n N_h S_h / Σ N_h S_h`
    pub raw: f64,
    pub allocated: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub strata: Vec<StratumAllocation>,
    pub total: u64,
}

impl AllocationResult {
    pub fn design(&self) -> Vec<(StratumId, u64)> {
        self.strata.iter().map(|s| (s.id.clone(), s.allocated)).collect()
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.strata.iter().map(|s| s.allocated).collect()
    }
}

/// Allocates `n` proportionally to `N_h S_h`.
///
/// Raw shares are rounded to the nearest integer and clamped to
/// `[1, N_h]`; any remaining surplus or deficit is settled one unit at a
/// time by largest remainder `raw − allocated`, ties going to the lower
/// stratum id. Output keeps the input order.
pub fn neyman(strata: &[(StratumId, u64, f64)], n: u64) -> Result<AllocationResult> {
    if strata.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some((id, _, s)) = strata.iter().find(|(_, _, s)| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "stratum {id}: dispersion must be finite and non-negative, got {s}"
        )));
    }
    if let Some((id, _, _)) = strata.iter().find(|(_, size, _)| *size == 0) {
        return Err(Error::InvalidInput(format!("stratum {id}: N must be positive")));
    }
    let capacity: u64 = strata.iter().map(|(_, size, _)| size).sum();
    if n > capacity {
        return Err(Error::Infeasible(format!("n={n} exceeds population size {capacity}")));
    }
    if n < strata.len() as u64 {
        return Err(Error::Infeasible(format!(
            "n={n} is below one unit for each of {} strata",
            strata.len()
        )));
    }
    let total: f64 = strata.iter().map(|(_, size, s)| *size as f64 * s).sum();
    if total == 0.0 {
        return Err(Error::Infeasible("every stratum dispersion is zero".into()));
    }

    let raw: Vec<f64> = strata
        .iter()
        .map(|(_, size, s)| n as f64 * (*size as f64 * s) / total)
        .collect();
    let mut alloc: Vec<u64> = raw
        .iter()
        .zip(strata)
        .map(|(r, (_, size, _))| (r.round() as u64).clamp(1, *size))
        .collect();

    // Remainder order, best candidate for an extra unit first.
    let pick = |alloc: &[u64], eligible: &dyn Fn(usize) -> bool, largest: bool| -> usize {
        (0..strata.len())
            .filter(|&i| eligible(i))
            .min_by(|&i, &j| {
                let ri = raw[i] - alloc[i] as f64;
                let rj = raw[j] - alloc[j] as f64;
                let by_rem = if largest { rj.partial_cmp(&ri) } else { ri.partial_cmp(&rj) };
                by_rem
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| strata[i].0.cmp(&strata[j].0))
            })
            .expect("feasibility checked above")
    };

    let mut sum: u64 = alloc.iter().sum();
    while sum < n {
        let snapshot = alloc.clone();
        let i = pick(&snapshot, &|i| snapshot[i] < strata[i].1, true);
        alloc[i] += 1;
        sum += 1;
    }
    while sum > n {
        let snapshot = alloc.clone();
        let i = pick(&snapshot, &|i| snapshot[i] > 1, false);
        alloc[i] -= 1;
        sum -= 1;
    }

    Ok(AllocationResult {
        strata: strata
            .iter()
            .zip(raw)
            .zip(alloc)
            .map(|(((id, _, _), raw), allocated)| StratumAllocation {
                id: id.clone(),
                raw,
                allocated,
            })
            .collect(),
        total: n,
    })
}

/// Neyman allocation using each stratum's `N_h` and `S_yh`.
pub fn neyman_for(pop: &PopulationSummary, n: u64) -> Result<AllocationResult> {
    let input: Vec<_> = pop
        .strata()
        .iter()
        .map(|s| (s.id.clone(), s.pop_size, s.sd_y))
        .collect();
    neyman(&input, n)
}
