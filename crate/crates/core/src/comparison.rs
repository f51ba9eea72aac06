// SPDX-License-Identifier: Apache-2.0

//! Efficiency conditions: when a transformed exponential estimator beats
//! the plain one, and the dominance of the optimal-α estimator.
//!
//! With `A = Σ w²γ S_yx` and `B = Σ w²γ S_x²`,
//! `MSE(t_fam) − MSE(t) = (R_fam − R)(B (R_fam + R)/4 − A)`. The family wins
//! when `(R_fam − R)(R_fam + R) > 0` and `B < 4A/(R_fam + R)`, or when the
//! product is negative and `B > 4A/(R_fam + R)`.

use crate::error::{Error, Result};
use crate::stats::PopulationSummary;
use crate::theory::{mse_exponential, mse_mk_min};
use crate::transforms::{ratio_and_theta, TransformFamily};

/// `R_fam` within this relative distance of `R` is a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Relative tolerance of the closed-form dominance identity.
pub const DOMINANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `(R_fam − R)(R_fam + R) > 0`, i.e. `|R_fam| > |R|`.
    LargerRatio,
    /// `(R_fam − R)(R_fam + R) < 0`, i.e. `|R_fam| < |R|`.
    SmallerRatio,
    /// `|R_fam| = |R|` up to the tie tolerance.
    Equal,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::LargerRatio => "larger_ratio",
            Branch::SmallerRatio => "smaller_ratio",
            Branch::Equal => "equal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    FamilyBetter,
    PlainBetter,
    Tie,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::FamilyBetter => "family_better",
            Decision::PlainBetter => "plain_better",
            Decision::Tie => "tie",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyVerdict {
    pub family: TransformFamily,
    pub a: f64,
    pub b: f64,
    /// `4A / (R_fam + R)`; `None` when `R_fam + R = 0`.
    pub threshold: Option<f64>,
    pub ratio: f64,
    pub plain_ratio: f64,
    pub branch: Branch,
    pub decision: Decision,
}

/// `(A, B) = (Σ w²γ S_yx, Σ w²γ S_x²)`.
pub fn moments_ab(pop: &PopulationSummary) -> (f64, f64) {
    (
        pop.weighted_sum(|s| s.cov_xy),
        pop.weighted_sum(|s| s.var_x()),
    )
}

pub fn compare_family_vs_plain(
    pop: &PopulationSummary,
    family: &TransformFamily,
) -> Result<EfficiencyVerdict> {
    let r = ratio_and_theta(pop, &TransformFamily::Identity)?.ratio;
    let r_fam = ratio_and_theta(pop, family)?.ratio;
    let (a, b) = moments_ab(pop);

    let sum = r_fam + r;
    let threshold = (sum != 0.0).then(|| 4.0 * a / sum);
    let tie = (r_fam - r).abs() <= TIE_TOLERANCE * r.abs().max(r_fam.abs());
    let product = (r_fam - r) * sum;
    let branch = if tie || product == 0.0 {
        Branch::Equal
    } else if product > 0.0 {
        Branch::LargerRatio
    } else {
        Branch::SmallerRatio
    };

    let decision = match (branch, threshold) {
        _ if tie => Decision::Tie,
        (Branch::LargerRatio, Some(th)) => order(b, th, true),
        (Branch::SmallerRatio, Some(th)) => order(b, th, false),
        // R_fam = −R: the difference reduces to −A (R_fam − R).
        _ => match (a * (r_fam - r)).partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => Decision::FamilyBetter,
            Some(std::cmp::Ordering::Less) => Decision::PlainBetter,
            _ => Decision::Tie,
        },
    };

    Ok(EfficiencyVerdict {
        family: family.clone(),
        a,
        b,
        threshold,
        ratio: r_fam,
        plain_ratio: r,
        branch,
        decision,
    })
}

fn order(b: f64, threshold: f64, family_wins_below: bool) -> Decision {
    if b == threshold {
        Decision::Tie
    } else if (b < threshold) == family_wins_below {
        Decision::FamilyBetter
    } else {
        Decision::PlainBetter
    }
}

/// `MSE(t_fam, α=1) − MSE_min`, checked against `(A − R_ab B/2)² / B`.
pub fn verify_mk_dominance(pop: &PopulationSummary, family: &TransformFamily) -> Result<f64> {
    let diff = mse_exponential(pop, family, 1.0)? - mse_mk_min(pop)?;
    let (a, b) = moments_ab(pop);
    let scale = pop.weighted_sum(|s| s.var_y());
    if b > 0.0 {
        let r = ratio_and_theta(pop, family)?.ratio;
        let closed = (a - r * b / 2.0).powi(2) / b;
        // The absolute floor covers the equality case, where both sides
        // are rounding noise around zero.
        let tol = DOMINANCE_TOLERANCE * closed.abs() + 1e-12 * scale;
        if (diff - closed).abs() > tol {
            return Err(Error::Invariant(format!(
                "dominance gap {diff} differs from closed form {closed} for family {family}"
            )));
        }
    }
    if diff < -DOMINANCE_TOLERANCE * scale {
        return Err(Error::Invariant(format!(
            "t_mk_opt MSE exceeds {} MSE by {}",
            family.estimator_name(),
            -diff
        )));
    }
    Ok(diff)
}
