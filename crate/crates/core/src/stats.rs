// SPDX-License-Identifier: Apache-2.0

//! Population and sample data types and stratum-level summary statistics.
//!
//! Dispersions follow the finite-population convention: variances and
//! covariances use divisor `N_h - 1`, while the kurtosis `beta2x` is the
//! non-excess ratio `m4 / m2^2` of central moments taken with divisor `N_h`.
//! Every accumulation runs in ascending stratum order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Relative tolerance used when validating a supplied covariance against
/// `rho * sd_y * sd_x`.
pub const COV_RHO_TOLERANCE: f64 = 1e-9;

/// Opaque stratum label.
///
/// Labels that both parse as integers order numerically (`"2" < "10"`);
/// anything else falls back to byte order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StratumId(String);

impl StratumId {
    pub fn new(label: impl Into<String>) -> Self {
        StratumId(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Ord for StratumId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0.parse::<i64>(), other.0.parse::<i64>()) {
            (Ok(a), Ok(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            _ => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for StratumId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for StratumId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StratumId {
    fn from(s: &str) -> Self {
        StratumId::new(s)
    }
}

impl From<String> for StratumId {
    fn from(s: String) -> Self {
        StratumId(s)
    }
}

/// Known population statistics of one stratum.
///
/// `sd_x` doubles as the stratum standard deviation `sigma_xh` used by the
/// GNS transformations. `cx` and `beta2x` are optional because aggregated
/// inputs may omit them; families that need them report the gap.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumSummary {
    pub id: StratumId,
    pub pop_size: u64,
    pub sample_size: u64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub sd_x: f64,
    pub sd_y: f64,
    pub rho: f64,
    pub cov_xy: f64,
    pub cx: Option<f64>,
    pub beta2x: Option<f64>,
}

/// Raw per-stratum statistics before reconciliation of `rho` and `cov_xy`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StratumInput {
    pub id: String,
    pub pop_size: u64,
    pub sample_size: u64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub sd_x: f64,
    pub sd_y: f64,
    pub rho: Option<f64>,
    pub cov_xy: Option<f64>,
    pub cx: Option<f64>,
    pub beta2x: Option<f64>,
}

impl StratumSummary {
    /// Builds a summary, filling whichever of `rho`/`cov_xy` is missing.
    ///
    /// When both are given the covariance is authoritative and `rho` must
    /// agree with it to [`COV_RHO_TOLERANCE`].
    pub fn from_input(input: StratumInput) -> Result<Self> {
        let id = StratumId::new(input.id);
        let bad = |msg: String| Error::InvalidInput(format!("stratum {id}: {msg}"));

        if input.sample_size < 1 || input.sample_size > input.pop_size {
            return Err(bad(format!(
                "need 1 <= n <= N, got n={} N={}",
                input.sample_size, input.pop_size
            )));
        }
        for (name, v) in [
            ("mean_x", input.mean_x),
            ("mean_y", input.mean_y),
            ("sd_x", input.sd_x),
            ("sd_y", input.sd_y),
        ] {
            if !v.is_finite() {
                return Err(bad(format!("{name} is not finite")));
            }
        }
        if input.sd_x < 0.0 || input.sd_y < 0.0 {
            return Err(bad("standard deviations must be non-negative".into()));
        }
        if let Some(cx) = input.cx {
            if !cx.is_finite() || cx < 0.0 {
                return Err(bad(format!("cx must be finite and non-negative, got {cx}")));
            }
        }
        if let Some(b) = input.beta2x {
            if !b.is_finite() {
                return Err(bad("beta2x is not finite".into()));
            }
        }

        let scale = input.sd_x * input.sd_y;
        let (rho, cov_xy) = match (input.rho, input.cov_xy) {
            (_, Some(cov)) if !cov.is_finite() => return Err(bad("cov_xy is not finite".into())),
            (Some(r), _) if !(-1.0..=1.0).contains(&r) => {
                return Err(bad(format!("rho must lie in [-1, 1], got {r}")))
            }
            (Some(r), Some(cov)) => {
                let implied = r * scale;
                let denom = cov.abs().max(implied.abs());
                if denom > 0.0 && (cov - implied).abs() > COV_RHO_TOLERANCE * denom {
                    return Err(bad(format!(
                        "cov_xy={cov} disagrees with rho*sd_y*sd_x={implied}"
                    )));
                }
                (r, cov)
            }
            (Some(r), None) => (r, r * scale),
            (None, Some(cov)) if cov == 0.0 && scale == 0.0 => (0.0, 0.0),
            (None, Some(cov)) => {
                if scale == 0.0 {
                    return Err(bad("rho undefined with zero standard deviation".into()));
                }
                let r = cov / scale;
                if r.abs() > 1.0 + COV_RHO_TOLERANCE {
                    return Err(bad(format!("implied rho {r} outside [-1, 1]")));
                }
                (r.clamp(-1.0, 1.0), cov)
            }
            (None, None) => return Err(bad("one of rho or cov_xy is required".into())),
        };

        Ok(StratumSummary {
            id,
            pop_size: input.pop_size,
            sample_size: input.sample_size,
            mean_x: input.mean_x,
            mean_y: input.mean_y,
            sd_x: input.sd_x,
            sd_y: input.sd_y,
            rho,
            cov_xy,
            cx: input.cx,
            beta2x: input.beta2x,
        })
    }

    /// Finite-population factor `1/n_h - 1/N_h`.
    pub fn gamma(&self) -> f64 {
        1.0 / self.sample_size as f64 - 1.0 / self.pop_size as f64
    }

    pub fn var_x(&self) -> f64 {
        self.sd_x * self.sd_x
    }

    pub fn var_y(&self) -> f64 {
        self.sd_y * self.sd_y
    }
}

/// Ordered strata with their weights, finite-population factors and
/// grand means.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSummary {
    strata: Vec<StratumSummary>,
    weights: Vec<f64>,
    gammas: Vec<f64>,
    grand_mean_x: f64,
    grand_mean_y: f64,
    pop_size: u64,
    sample_size: u64,
}

impl PopulationSummary {
    pub fn strata(&self) -> &[StratumSummary] {
        &self.strata
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// `X̄_st = Σ w_h X̄_h`.
    pub fn grand_mean_x(&self) -> f64 {
        self.grand_mean_x
    }

    /// `Ȳ_st = Σ w_h Ȳ_h`.
    pub fn grand_mean_y(&self) -> f64 {
        self.grand_mean_y
    }

    pub fn pop_size(&self) -> u64 {
        self.pop_size
    }

    pub fn sample_size(&self) -> u64 {
        self.sample_size
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    /// Population ratio `R = Ȳ_st / X̄_st`.
    pub fn ratio(&self) -> Result<f64> {
        if self.grand_mean_x == 0.0 {
            return Err(Error::DivisionByZero("grand mean of x is zero".into()));
        }
        Ok(self.grand_mean_y / self.grand_mean_x)
    }

    /// Per-stratum design weights `w_h^2 γ_h` shared by every first-order
    /// moment.
    pub fn variance_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .zip(&self.gammas)
            .map(|(w, g)| w * w * g)
    }

    /// `Σ w_h^2 γ_h f(stratum)` accumulated in stratum order.
    pub fn weighted_sum(&self, f: impl Fn(&StratumSummary) -> f64) -> f64 {
        self.variance_weights()
            .zip(&self.strata)
            .map(|(c, s)| c * f(s))
            .sum()
    }

    /// Every stratum fully enumerated (`n_h = N_h`), so every estimator
    /// here returns the population mean exactly.
    pub fn is_census(&self) -> bool {
        self.gammas.iter().all(|&g| g == 0.0)
    }

    pub fn index_of(&self, id: &StratumId) -> Option<usize> {
        self.strata.binary_search_by(|s| s.id.cmp(id)).ok()
    }

    /// Same population with a different per-stratum sample size.
    pub fn with_design(&self, design: &[(StratumId, u64)]) -> Result<PopulationSummary> {
        let sizes: BTreeMap<&StratumId, u64> = design.iter().map(|(id, n)| (id, *n)).collect();
        let mut strata = self.strata.clone();
        for s in &mut strata {
            let Some(&n) = sizes.get(&s.id) else {
                return Err(Error::InvalidInput(format!("design missing stratum {}", s.id)));
            };
            if n < 1 || n > s.pop_size {
                return Err(Error::InvalidInput(format!(
                    "stratum {}: need 1 <= n <= N, got n={n} N={}",
                    s.id, s.pop_size
                )));
            }
            s.sample_size = n;
        }
        for (id, _) in design {
            if self.index_of(id).is_none() {
                return Err(Error::UnknownStratum(id.to_string()));
            }
        }
        summarize_population(strata)
    }
}

/// Combines stratum summaries into a population summary ordered by id.
pub fn summarize_population(mut summaries: Vec<StratumSummary>) -> Result<PopulationSummary> {
    if summaries.is_empty() {
        return Err(Error::EmptyInput);
    }
    summaries.sort_by(|a, b| a.id.cmp(&b.id));
    for pair in summaries.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(Error::DuplicateStratum(pair[0].id.to_string()));
        }
    }

    let pop_size: u64 = summaries.iter().map(|s| s.pop_size).sum();
    let sample_size: u64 = summaries.iter().map(|s| s.sample_size).sum();
    let total = pop_size as f64;
    let weights: Vec<f64> = summaries
        .iter()
        .map(|s| s.pop_size as f64 / total)
        .collect();
    let gammas: Vec<f64> = summaries.iter().map(StratumSummary::gamma).collect();
    let grand_mean_x = weights.iter().zip(&summaries).map(|(w, s)| w * s.mean_x).sum();
    let grand_mean_y = weights.iter().zip(&summaries).map(|(w, s)| w * s.mean_y).sum();

    Ok(PopulationSummary {
        strata: summaries,
        weights,
        gammas,
        grand_mean_x,
        grand_mean_y,
        pop_size,
        sample_size,
    })
}

/// One population unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub stratum: StratumId,
    pub y: f64,
    pub x: f64,
}

/// Column view of one stratum's units.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StratumColumns {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
}

impl StratumColumns {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// A finite population of unit records, kept in input order with a
/// per-stratum column index.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationFrame {
    units: Vec<Unit>,
    columns: BTreeMap<StratumId, StratumColumns>,
}

impl PopulationFrame {
    /// Builds a frame; every stratum must hold at least two units.
    pub fn new(units: Vec<Unit>) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut columns: BTreeMap<StratumId, StratumColumns> = BTreeMap::new();
        for u in &units {
            let col = columns.entry(u.stratum.clone()).or_default();
            col.y.push(u.y);
            col.x.push(u.x);
        }
        if let Some((id, _)) = columns.iter().find(|(_, c)| c.len() < 2) {
            return Err(Error::DegenerateStratum(id.to_string()));
        }
        Ok(PopulationFrame { units, columns })
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn stratum_ids(&self) -> impl Iterator<Item = &StratumId> {
        self.columns.keys()
    }

    pub fn stratum(&self, id: &StratumId) -> Option<&StratumColumns> {
        self.columns.get(id)
    }

    pub fn strata(&self) -> impl Iterator<Item = (&StratumId, &StratumColumns)> {
        self.columns.iter()
    }

    pub fn num_strata(&self) -> usize {
        self.columns.len()
    }

    /// Mean of y over every unit.
    pub fn mean_y(&self) -> f64 {
        self.units.iter().map(|u| u.y).sum::<f64>() / self.units.len() as f64
    }

    /// Census design: `n_h = N_h` for every stratum.
    pub fn census_design(&self) -> Vec<(StratumId, u64)> {
        self.columns
            .iter()
            .map(|(id, c)| (id.clone(), c.len() as u64))
            .collect()
    }

    /// Summaries of every stratum under `design`, in id order.
    pub fn summarize(&self, design: &[(StratumId, u64)]) -> Result<PopulationSummary> {
        let sizes: BTreeMap<&StratumId, u64> = design.iter().map(|(id, n)| (id, *n)).collect();
        if let Some((id, _)) = design.iter().find(|(id, _)| !self.columns.contains_key(id)) {
            return Err(Error::UnknownStratum(id.to_string()));
        }
        let mut out = Vec::with_capacity(self.columns.len());
        for id in self.columns.keys() {
            let n = *sizes
                .get(id)
                .ok_or_else(|| Error::InvalidInput(format!("design missing stratum {id}")))?;
            out.push(summarize_stratum(self, id, n)?);
        }
        summarize_population(out)
    }
}

/// Population statistics of a single stratum of `frame`.
pub fn summarize_stratum(
    frame: &PopulationFrame,
    stratum_id: &StratumId,
    sample_size: u64,
) -> Result<StratumSummary> {
    let cols = frame
        .stratum(stratum_id)
        .ok_or_else(|| Error::UnknownStratum(stratum_id.to_string()))?;
    let size = cols.len();
    if size < 2 {
        return Err(Error::DegenerateStratum(stratum_id.to_string()));
    }
    if sample_size < 1 || sample_size > size as u64 {
        return Err(Error::InvalidInput(format!(
            "stratum {stratum_id}: need 1 <= n <= N, got n={sample_size} N={size}"
        )));
    }

    let nf = size as f64;
    let mean_x = cols.x.iter().sum::<f64>() / nf;
    let mean_y = cols.y.iter().sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy, mut m4) = (0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in cols.x.iter().zip(&cols.y) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
        m4 += dx * dx * dx * dx;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance {
            stratum: stratum_id.to_string(),
            variable: "x",
        });
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance {
            stratum: stratum_id.to_string(),
            variable: "y",
        });
    }
    if mean_x == 0.0 {
        return Err(Error::CxUndefined(stratum_id.to_string()));
    }

    let sd_x = (sxx / (nf - 1.0)).sqrt();
    let sd_y = (syy / (nf - 1.0)).sqrt();
    let cov_xy = sxy / (nf - 1.0);
    let rho = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let m2 = sxx / nf;
    let beta2x = (m4 / nf) / (m2 * m2);

    Ok(StratumSummary {
        id: stratum_id.clone(),
        pop_size: size as u64,
        sample_size,
        mean_x,
        mean_y,
        sd_x,
        sd_y,
        rho,
        cov_xy,
        cx: Some(sd_x / mean_x),
        beta2x: Some(beta2x),
    })
}

/// Sample means of one stratum.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumSample {
    pub id: StratumId,
    pub sample_size: u64,
    pub mean_y: f64,
    pub mean_x: f64,
}

/// Per-stratum sample means, ordered by stratum id.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleData {
    strata: Vec<StratumSample>,
}

impl SampleData {
    pub fn new(mut strata: Vec<StratumSample>) -> Result<Self> {
        if strata.is_empty() {
            return Err(Error::EmptyInput);
        }
        strata.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in strata.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicateStratum(pair[0].id.to_string()));
            }
        }
        Ok(SampleData { strata })
    }

    /// Sample whose means equal the population means.
    pub fn at_population_means(pop: &PopulationSummary) -> Self {
        SampleData {
            strata: pop
                .strata()
                .iter()
                .map(|s| StratumSample {
                    id: s.id.clone(),
                    sample_size: s.sample_size,
                    mean_y: s.mean_y,
                    mean_x: s.mean_x,
                })
                .collect(),
        }
    }

    pub fn strata(&self) -> &[StratumSample] {
        &self.strata
    }

    /// Errors unless the stratum ids match `pop` exactly.
    pub fn check_matches(&self, pop: &PopulationSummary) -> Result<()> {
        let ours: BTreeSet<&StratumId> = self.strata.iter().map(|s| &s.id).collect();
        let theirs: BTreeSet<&StratumId> = pop.strata().iter().map(|s| &s.id).collect();
        if ours != theirs {
            let diff = ours
                .symmetric_difference(&theirs)
                .map(|id| id.to_string())
                .collect::<Vec<_>>()
                .join(",");
            return Err(Error::InvalidInput(format!(
                "sample and population strata differ: {diff}"
            )));
        }
        Ok(())
    }

    /// `(ȳ_st, x̄_st)` under the population weights.
    pub fn stratified_means(&self, pop: &PopulationSummary) -> Result<(f64, f64)> {
        self.check_matches(pop)?;
        let mut y = 0.0;
        let mut x = 0.0;
        for (w, s) in pop.weights().iter().zip(&self.strata) {
            y += w * s.mean_y;
            x += w * s.mean_x;
        }
        Ok((y, x))
    }

    /// Columns of means in stratum order, for the hot loops.
    pub fn mean_columns(&self) -> (Vec<f64>, Vec<f64>) {
        self.strata.iter().map(|s| (s.mean_y, s.mean_x)).unzip()
    }
}
