// SPDX-License-Identifier: Apache-2.0

//! Design-based validation of the first-order formulas: synthetic
//! populations, stratified SRSWOR draws, replication and exact
//! enumeration.
//!
//! # Random streams
//!
//! Every random draw comes from a ChaCha8 generator (`rand_chacha`) keyed
//! by 32 bytes: the user seed (8 bytes, little endian), the 64-bit FNV-1a
//! hash of the stratum label, a domain tag separating population
//! generation from sampling, and 8 zero bytes. The ChaCha stream number
//! is the replication index. A replication's sample therefore depends only
//! on `(seed, replication, stratum)`, never on scheduling.

mod enumerate;
mod generate;
mod replicate;

pub use enumerate::{enumerate_exact, enumerate_exact_all, ExactMoments, ENUMERATION_LIMIT};
pub use generate::{generate_population, GeneratedPopulation};
pub use replicate::{run_replications, run_replications_with, SimulationReport, SimulationRow, BLOCK_SIZE};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::stats::{PopulationFrame, SampleData, StratumColumns, StratumId, StratumSample};

pub(crate) const DOMAIN_SAMPLE: u64 = 0x5352_5357_4f52;
pub(crate) const DOMAIN_GENERATE: u64 = 0x4745_4e45_5241;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Deterministic generator for one `(seed, domain, stratum, index)` cell.
pub fn stream_rng(seed: u64, domain: u64, stratum: &StratumId, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a64(stratum.as_str().as_bytes()).to_le_bytes());
    key[16..24].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Means of a uniform size-`n` subset of `cols`.
pub(crate) fn srswor_means(cols: &StratumColumns, n: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let picked = rand::seq::index::sample(rng, cols.len(), n);
    let (mut y, mut x) = (0.0, 0.0);
    for i in picked.iter() {
        y += cols.y[i];
        x += cols.x[i];
    }
    (y / n as f64, x / n as f64)
}

/// Resolves a design against a frame, in stratum id order.
pub(crate) fn resolve_design<'a>(
    frame: &'a PopulationFrame,
    design: &[(StratumId, u64)],
) -> Result<Vec<(&'a StratumId, &'a StratumColumns, usize)>> {
    let mut out = Vec::with_capacity(design.len());
    for (id, n) in design {
        let (key, cols) = frame
            .strata()
            .find(|(k, _)| *k == id)
            .ok_or_else(|| Error::UnknownStratum(id.to_string()))?;
        if *n < 1 || *n as usize > cols.len() {
            return Err(Error::InvalidInput(format!(
                "stratum {id}: need 1 <= n <= N, got n={n} N={}",
                cols.len()
            )));
        }
        out.push((key, cols, *n as usize));
    }
    out.sort_by(|a, b| a.0.cmp(b.0));
    for pair in out.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::DuplicateStratum(pair[0].0.to_string()));
        }
    }
    Ok(out)
}

/// One stratified SRSWOR sample for replication `replication_index`.
pub fn draw_srswor(
    frame: &PopulationFrame,
    design: &[(StratumId, u64)],
    seed: u64,
    replication_index: u64,
) -> Result<SampleData> {
    let strata = resolve_design(frame, design)?;
    SampleData::new(
        strata
            .into_iter()
            .map(|(id, cols, n)| {
                let mut rng = stream_rng(seed, DOMAIN_SAMPLE, id, replication_index);
                let (mean_y, mean_x) = srswor_means(cols, n, &mut rng);
                StratumSample {
                    id: id.clone(),
                    sample_size: n as u64,
                    mean_y,
                    mean_x,
                }
            })
            .collect(),
    )
}
