// SPDX-License-Identifier: Apache-2.0

//! First-order bias and MSE of the ratio and exponential estimators, the
//! MSE-minimizing exponent, the combined correlation `ρ_c` and the
//! resulting minimum MSE.
//!
//! Every sum is over strata in id order and weighted by `w_h^2 γ_h`.
//! Writing `e_1` for the relative error of the transformed auxiliary mean,
//! the exponential estimator expands as
//! `ȳ_st (1 − α e_1/2 + α(α+2) e_1^2/8 + ...)`, which gives
//!
//! ```text
//! Bias = (θ_ab / X̄_st) Σ w²γ [α(α+2)/8 · R_ab S_x² − α/2 · S_yx]
//! MSE  = Σ w²γ [S_y² − α R_ab S_yx + α² R_ab² S_x² / 4]
//! ```
//!
//! At α = 2 both reduce to the ratio-estimator expressions.

use crate::error::{Error, Result};
use crate::estimators::{Alpha, EstimatorSpec};
use crate::stats::PopulationSummary;
use crate::transforms::{ratio_and_theta, TransformDerived, TransformFamily};

/// Slack, relative to the MSE scale, below which a negative MSE is
/// attributed to rounding.
pub const NEGATIVE_MSE_SLACK: f64 = 1e-9;

fn ratio_mse(pop: &PopulationSummary, ratio: f64, alpha: f64) -> f64 {
    pop.weighted_sum(|s| {
        s.var_y() - alpha * ratio * s.cov_xy + alpha * alpha * ratio * ratio / 4.0 * s.var_x()
    })
}

/// `Σ w²γ [S_y² + R² S_x² − 2 R S_yx]` with `R = Ȳ_st / X̄_st`.
pub fn mse_combined_ratio(pop: &PopulationSummary) -> Result<f64> {
    let r = pop.ratio()?;
    Ok(pop.weighted_sum(|s| s.var_y() + r * r * s.var_x() - 2.0 * r * s.cov_xy))
}

/// Ratio-estimator MSE with `R` replaced by the family's `R_ab`.
pub fn mse_kc(pop: &PopulationSummary, family: &TransformFamily) -> Result<f64> {
    let r = ratio_and_theta(pop, family)?.ratio;
    Ok(pop.weighted_sum(|s| s.var_y() + r * r * s.var_x() - 2.0 * r * s.cov_xy))
}

/// First-order bias of the ratio forms, `(θ_ab/X̄_st) Σ w²γ [R_ab S_x² − S_yx]`.
pub fn bias_kc(pop: &PopulationSummary, family: &TransformFamily) -> Result<f64> {
    bias_exponential(pop, family, 2.0)
}

pub fn bias_exponential(pop: &PopulationSummary, family: &TransformFamily, alpha: f64) -> Result<f64> {
    let TransformDerived { ratio, theta, .. } = ratio_and_theta(pop, family)?;
    let grand_x = pop.grand_mean_x();
    if grand_x == 0.0 {
        return Err(Error::DivisionByZero("grand mean of x is zero".into()));
    }
    let k = alpha * (alpha + 2.0) / 8.0;
    let sum = pop.weighted_sum(|s| k * ratio * s.var_x() - alpha / 2.0 * s.cov_xy);
    Ok(theta / grand_x * sum)
}

pub fn mse_exponential(pop: &PopulationSummary, family: &TransformFamily, alpha: f64) -> Result<f64> {
    let ratio = ratio_and_theta(pop, family)?.ratio;
    Ok(ratio_mse(pop, ratio, alpha))
}

/// `α* = 2 Σ w²γ S_yx / (R_ab Σ w²γ S_x²)`.
pub fn alpha_opt(pop: &PopulationSummary, family: &TransformFamily) -> Result<f64> {
    let ratio = ratio_and_theta(pop, family)?.ratio;
    let b = pop.weighted_sum(|s| s.var_x());
    if ratio == 0.0 || b == 0.0 {
        return Err(Error::DegenerateDesign(format!(
            "optimal alpha undefined for family {family} (R_ab={ratio}, Σw²γS_x²={b})"
        )));
    }
    let a = pop.weighted_sum(|s| s.cov_xy);
    Ok(2.0 * a / (ratio * b))
}

/// [`alpha_opt`], except that a census resolves to 1: with no sampling
/// error every exponent gives the population mean.
pub fn resolve_optimal(pop: &PopulationSummary, family: &TransformFamily) -> Result<f64> {
    if pop.is_census() {
        Ok(1.0)
    } else {
        alpha_opt(pop, family)
    }
}

/// `ρ_c² = (Σ w²γ ρ S_y S_x)² / (Σ w²γ S_y² · Σ w²γ S_x²)`.
pub fn rho_c_squared(pop: &PopulationSummary) -> Result<f64> {
    let num = pop.weighted_sum(|s| s.rho * s.sd_y * s.sd_x);
    let syy = pop.weighted_sum(|s| s.var_y());
    let sxx = pop.weighted_sum(|s| s.var_x());
    if syy <= 0.0 || sxx <= 0.0 {
        return Err(Error::DegenerateDesign(
            "combined correlation needs positive weighted dispersion in x and y".into(),
        ));
    }
    let r2 = num * num / (syy * sxx);
    if r2 > 1.0 + 1e-12 {
        return Err(Error::Invariant(format!("ρ_c² = {r2} exceeds 1")));
    }
    Ok(r2)
}

/// `Σ w²γ S_y² (1 − ρ_c²)`; the same for every transformation family.
pub fn mse_mk_min(pop: &PopulationSummary) -> Result<f64> {
    let r2 = rho_c_squared(pop)?;
    Ok(pop.weighted_sum(|s| s.var_y()) * (1.0 - r2))
}

/// First-order `(bias, mse)` of any estimator spec.
pub fn theoretical(spec: &EstimatorSpec, pop: &PopulationSummary) -> Result<(f64, f64)> {
    match spec {
        EstimatorSpec::CombinedRatio => Ok((
            bias_kc(pop, &TransformFamily::Identity)?,
            mse_combined_ratio(pop)?,
        )),
        EstimatorSpec::Kc(f) => Ok((bias_kc(pop, f)?, mse_kc(pop, f)?)),
        EstimatorSpec::Exponential { family, alpha } => {
            let a = match alpha {
                Alpha::Fixed(a) => *a,
                Alpha::Optimal => resolve_optimal(pop, family)?,
            };
            Ok((bias_exponential(pop, family, a)?, mse_exponential(pop, family, a)?))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub estimator: String,
    pub bias: f64,
    pub mse: f64,
}

/// Bias/MSE table over the exponential family.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoreticalReport {
    pub rows: Vec<ReportRow>,
    /// `R_ab`, `θ_ab` per family row, identity first.
    pub derived: Vec<(TransformFamily, TransformDerived)>,
    /// `None` only for a census design, where every MSE is zero.
    pub alpha_opt: Option<f64>,
    pub rho_c_squared: Option<f64>,
    pub mse_mk_min: f64,
    pub warnings: Vec<String>,
}

impl TheoreticalReport {
    pub fn row(&self, estimator: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.estimator == estimator)
    }
}

/// Rows for `t`, the six named families at α = 1, and `t_mk_opt`.
pub fn full_report(pop: &PopulationSummary) -> Result<TheoreticalReport> {
    report_for(pop, &TransformFamily::NAMED)
}

/// Like [`full_report`] restricted to `families`; the plain `t` row always
/// comes first and `t_mk_opt` last.
pub fn report_for(pop: &PopulationSummary, families: &[TransformFamily]) -> Result<TheoreticalReport> {
    let mut list = vec![TransformFamily::Identity];
    list.extend(
        families
            .iter()
            .filter(|f| !matches!(f, TransformFamily::Identity))
            .cloned(),
    );

    let scale = pop.weighted_sum(|s| s.var_y());
    let mut rows = Vec::with_capacity(list.len() + 1);
    let mut derived = Vec::with_capacity(list.len());
    let mut warnings = Vec::new();
    for family in &list {
        let d = ratio_and_theta(pop, family)?;
        let bias = bias_exponential(pop, family, 1.0)?;
        let mse = ratio_mse(pop, d.ratio, 1.0);
        if mse < -NEGATIVE_MSE_SLACK * scale {
            warnings.push(format!("{} has negative MSE {mse}", family.estimator_name()));
        }
        rows.push(ReportRow {
            estimator: family.estimator_name(),
            bias,
            mse,
        });
        derived.push((family.clone(), d));
    }

    let census = pop.is_census();
    let (alpha, rho_c2, min) = if census {
        (None, None, 0.0)
    } else {
        (
            Some(alpha_opt(pop, &TransformFamily::Identity)?),
            Some(rho_c_squared(pop)?),
            mse_mk_min(pop)?,
        )
    };
    for r in &rows {
        if min > r.mse + NEGATIVE_MSE_SLACK * scale.max(f64::MIN_POSITIVE) {
            warnings.push(format!("t_mk_opt MSE {min} exceeds {} MSE {}", r.estimator, r.mse));
        }
    }
    rows.push(ReportRow {
        estimator: "t_mk_opt".into(),
        bias: match alpha {
            Some(a) => bias_exponential(pop, &TransformFamily::Identity, a)?,
            None => 0.0,
        },
        mse: min,
    });

    Ok(TheoreticalReport {
        rows,
        derived,
        alpha_opt: alpha,
        rho_c_squared: rho_c2,
        mse_mk_min: min,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{summarize_population, StratumInput, StratumSummary};

    fn stratum(id: &str, big_n: u64, n: u64, sd_x: f64, sd_y: f64, cov: f64) -> StratumSummary {
        StratumSummary::from_input(StratumInput {
            id: id.into(),
            pop_size: big_n,
            sample_size: n,
            mean_x: 20.0,
            mean_y: 10.0,
            sd_x,
            sd_y,
            cov_xy: Some(cov),
            cx: Some(sd_x / 20.0),
            beta2x: Some(3.0),
            ..Default::default()
        })
        .unwrap()
    }

    fn one(n: u64, sd_x: f64, sd_y: f64, cov: f64) -> PopulationSummary {
        summarize_population(vec![stratum("a", 100, n, sd_x, sd_y, cov)]).unwrap()
    }

    #[test]
    fn census_is_exact() {
        let pop = one(100, 2.0, 1.0, 1.5);
        assert_eq!(mse_combined_ratio(&pop).unwrap(), 0.0);
        assert_eq!(mse_kc(&pop, &TransformFamily::Sd).unwrap(), 0.0);
        let rep = full_report(&pop).unwrap();
        assert!(rep.rows.iter().all(|r| r.bias == 0.0 && r.mse == 0.0));
        assert_eq!(rep.alpha_opt, None);
    }

    #[test]
    fn ratio_mse_when_cov_is_r_sx2() {
        // R = 0.5, so S_yx = R S_x^2 = 2 with S_x = 2.
        let pop = one(10, 2.0, 1.5, 2.0);
        let c = 0.1 - 0.01;
        let expected = c * (1.5f64.powi(2) - 0.25 * 4.0);
        assert!((mse_combined_ratio(&pop).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn alpha_zero_and_two() {
        let pop = one(10, 2.0, 1.5, 1.2);
        let id = TransformFamily::Identity;
        let v = pop.weighted_sum(|s| s.var_y());
        assert_eq!(mse_exponential(&pop, &id, 0.0).unwrap(), v);
        assert_eq!(bias_exponential(&pop, &id, 0.0).unwrap(), 0.0);
        let cr = mse_combined_ratio(&pop).unwrap();
        assert!((mse_exponential(&pop, &id, 2.0).unwrap() - cr).abs() <= 1e-12 * cr);
        assert_eq!(mse_kc(&pop, &id).unwrap(), cr);
    }

    #[test]
    fn alpha_one_bias_single_stratum() {
        let pop = one(10, 2.0, 1.5, 1.2);
        let r = 0.5;
        let c = 0.1 - 0.01;
        let expected = c / 20.0 * (3.0 * r / 8.0 * 4.0 - 0.5 * 1.2);
        let got = bias_exponential(&pop, &TransformFamily::Identity, 1.0).unwrap();
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
    }

    #[test]
    fn alpha_minus_two_without_covariance() {
        let pop = one(10, 2.0, 1.5, 0.0);
        assert_eq!(bias_exponential(&pop, &TransformFamily::Identity, -2.0).unwrap(), 0.0);
    }

    #[test]
    fn alpha_opt_cases() {
        let id = TransformFamily::Identity;
        assert_eq!(alpha_opt(&one(10, 2.0, 1.5, 0.0), &id).unwrap(), 0.0);
        // S_yx = R S_x^2 / 2 = 1 gives α* = 1.
        assert!((alpha_opt(&one(10, 2.0, 1.5, 1.0), &id).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            alpha_opt(&one(10, 0.0, 1.5, 0.0), &id),
            Err(Error::DegenerateDesign(_))
        ));
    }

    #[test]
    fn rho_c_extremes() {
        let pop = summarize_population(vec![
            stratum("a", 100, 10, 2.0, 1.0, 2.0),
            stratum("b", 80, 20, 4.0, 2.0, 8.0),
        ])
        .unwrap();
        assert!((rho_c_squared(&pop).unwrap() - 1.0).abs() < 1e-12);
        assert!(mse_mk_min(&pop).unwrap().abs() < 1e-12);
        let pop = one(10, 2.0, 1.5, 0.0);
        assert_eq!(rho_c_squared(&pop).unwrap(), 0.0);
        assert_eq!(mse_mk_min(&pop).unwrap(), pop.weighted_sum(|s| s.var_y()));
    }

    #[test]
    fn zero_covariance_report() {
        let pop = one(10, 2.0, 1.5, 0.0);
        let rep = full_report(&pop).unwrap();
        assert_eq!(rep.alpha_opt, Some(0.0));
        let last = rep.rows.last().unwrap();
        assert_eq!(last.estimator, "t_mk_opt");
        assert_eq!(last.mse, pop.weighted_sum(|s| s.var_y()));
        assert_eq!(rep.rows.len(), 8);
    }
}
