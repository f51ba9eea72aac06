// SPDX-License-Identifier: Apache-2.0

//! Point estimators of the population mean from a stratified sample.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::stats::{PopulationSummary, SampleData};
use crate::theory;
use crate::transforms::{transformed_means, TransformFamily, TransformedMeans};

/// Exponent applied to the exponential correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Fixed(f64),
    /// Resolved from population dispersions by [`theory::alpha_opt`].
    Optimal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorSpec {
    /// `(ȳ_st / x̄_st) X̄_st`
    CombinedRatio,
    /// `(ȳ_st / x̄_st,ab) X̄_st,ab`
    Kc(TransformFamily),
    /// `ȳ_st exp(α (X̄_st,ab − x̄_st,ab) / (X̄_st,ab + x̄_st,ab))`
    Exponential { family: TransformFamily, alpha: Alpha },
}

impl EstimatorSpec {
    pub fn exponential(family: TransformFamily) -> Self {
        EstimatorSpec::Exponential {
            family,
            alpha: Alpha::Fixed(1.0),
        }
    }

    pub fn optimal(family: TransformFamily) -> Self {
        EstimatorSpec::Exponential {
            family,
            alpha: Alpha::Optimal,
        }
    }

    /// `t`, the six transformed `t_*` at α = 1, then `t_mk_opt`.
    pub fn report_set() -> Vec<EstimatorSpec> {
        TransformFamily::all_named()
            .into_iter()
            .map(EstimatorSpec::exponential)
            .chain(std::iter::once(EstimatorSpec::optimal(TransformFamily::Identity)))
            .collect()
    }

    pub fn family(&self) -> &TransformFamily {
        match self {
            EstimatorSpec::CombinedRatio => &TransformFamily::Identity,
            EstimatorSpec::Kc(f) | EstimatorSpec::Exponential { family: f, .. } => f,
        }
    }

    pub fn name(&self) -> String {
        let suffix = |f: &TransformFamily| match f {
            TransformFamily::Identity => String::new(),
            other => format!("_{}", other.name()),
        };
        match self {
            EstimatorSpec::CombinedRatio => "cr".into(),
            EstimatorSpec::Kc(f) => format!("kc{}", suffix(f)),
            EstimatorSpec::Exponential {
                family,
                alpha: Alpha::Fixed(a),
            } if *a == 1.0 => family.estimator_name(),
            EstimatorSpec::Exponential {
                family,
                alpha: Alpha::Fixed(a),
            } => format!("t_mk{}@{a}", suffix(family)),
            EstimatorSpec::Exponential {
                family,
                alpha: Alpha::Optimal,
            } => format!("t_mk_opt{}", suffix(family)),
        }
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for EstimatorSpec {
    type Err = Error;

    /// Accepts `cr`, `kc[_fam]`, `t[_fam]`, `t_mk_opt[_fam]` and
    /// `t_mk[_fam]@<alpha>`.
    fn from_str(raw: &str) -> Result<Self> {
        let s = raw.trim().to_ascii_lowercase();
        let bad = || Error::InvalidInput(format!("unknown estimator `{raw}`"));
        let family = |rest: &str| -> Result<TransformFamily> {
            match rest {
                "" => Ok(TransformFamily::Identity),
                r => r.strip_prefix('_').ok_or_else(bad)?.parse().map_err(|_| bad()),
            }
        };
        if s == "cr" {
            return Ok(EstimatorSpec::CombinedRatio);
        }
        if let Some(rest) = s.strip_prefix("t_mk_opt") {
            return Ok(EstimatorSpec::optimal(family(rest)?));
        }
        if let Some(rest) = s.strip_prefix("t_mk") {
            let (fam, alpha) = rest.split_once('@').ok_or_else(bad)?;
            let alpha: f64 = alpha.parse().map_err(|_| bad())?;
            if !alpha.is_finite() {
                return Err(bad());
            }
            return Ok(EstimatorSpec::Exponential {
                family: family(fam)?,
                alpha: Alpha::Fixed(alpha),
            });
        }
        if let Some(rest) = s.strip_prefix("kc") {
            return Ok(EstimatorSpec::Kc(family(rest)?));
        }
        if let Some(rest) = s.strip_prefix('t') {
            return Ok(EstimatorSpec::exponential(family(rest)?));
        }
        Err(bad())
    }
}

/// `(ȳ_st / x̄_st) X̄_st`.
pub fn estimate_combined_ratio(sample: &SampleData, pop: &PopulationSummary) -> Result<f64> {
    let (ybar, xbar) = sample.stratified_means(pop)?;
    if xbar == 0.0 {
        return Err(Error::DivisionByZero("sample x̄_st is zero".into()));
    }
    Ok(ybar / xbar * pop.grand_mean_x())
}

/// `(ȳ_st / x̄_st,ab) X̄_st,ab`.
pub fn estimate_kc(sample: &SampleData, pop: &PopulationSummary, family: &TransformFamily) -> Result<f64> {
    let (ybar, _) = sample.stratified_means(pop)?;
    let means = transformed_means(pop, family)?;
    ratio_form(ybar, means.sample(sample, pop)?, means.population)
}

/// `ȳ_st exp(α (X̄_st,ab − x̄_st,ab) / (X̄_st,ab + x̄_st,ab))`.
pub fn estimate_exponential(
    sample: &SampleData,
    pop: &PopulationSummary,
    family: &TransformFamily,
    alpha: f64,
) -> Result<f64> {
    let (ybar, _) = sample.stratified_means(pop)?;
    let means = transformed_means(pop, family)?;
    exponential_form(ybar, means.sample(sample, pop)?, means.population, alpha)
}

fn ratio_form(ybar: f64, sample_aux: f64, pop_aux: f64) -> Result<f64> {
    if sample_aux == 0.0 {
        return Err(Error::DivisionByZero("transformed sample mean is zero".into()));
    }
    Ok(ybar / sample_aux * pop_aux)
}

fn exponential_form(ybar: f64, sample_aux: f64, pop_aux: f64, alpha: f64) -> Result<f64> {
    let denom = pop_aux + sample_aux;
    if denom == 0.0 {
        return Err(Error::SingularTransform(
            "X̄_st,ab + x̄_st,ab is zero".into(),
        ));
    }
    Ok(ybar * (alpha * (pop_aux - sample_aux) / denom).exp())
}

/// One evaluation of a prepared estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// The transformed auxiliary sample mean was negative.
    pub negative_auxiliary: bool,
}

/// An estimator with its population-side constants resolved once, for
/// repeated evaluation over many samples.
#[derive(Debug, Clone)]
pub struct PreparedEstimator {
    spec: EstimatorSpec,
    means: TransformedMeans,
    /// `None` for the ratio forms.
    alpha: Option<f64>,
}

impl PreparedEstimator {
    pub fn new(spec: &EstimatorSpec, pop: &PopulationSummary) -> Result<Self> {
        let means = transformed_means(pop, spec.family())?;
        let alpha = match spec {
            EstimatorSpec::CombinedRatio | EstimatorSpec::Kc(_) => None,
            EstimatorSpec::Exponential {
                alpha: Alpha::Fixed(a),
                ..
            } => Some(*a),
            EstimatorSpec::Exponential {
                family,
                alpha: Alpha::Optimal,
            } => Some(theory::resolve_optimal(pop, family)?),
        };
        Ok(PreparedEstimator {
            spec: spec.clone(),
            means,
            alpha,
        })
    }

    pub fn spec(&self) -> &EstimatorSpec {
        &self.spec
    }

    /// The α in use, after resolving [`Alpha::Optimal`].
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// Evaluates on stratum-ordered sample means and stratum weights.
    pub fn evaluate(&self, weights: &[f64], mean_y: &[f64], mean_x: &[f64]) -> Result<Estimate> {
        let ybar: f64 = weights.iter().zip(mean_y).map(|(w, y)| w * y).sum();
        let sample_aux = self.means.sample_from_means(mean_x);
        let value = match self.alpha {
            None => ratio_form(ybar, sample_aux, self.means.population)?,
            Some(a) => exponential_form(ybar, sample_aux, self.means.population, a)?,
        };
        Ok(Estimate {
            value,
            negative_auxiliary: sample_aux < 0.0,
        })
    }

    pub fn estimate(&self, sample: &SampleData, pop: &PopulationSummary) -> Result<Estimate> {
        sample.check_matches(pop)?;
        let (y, x) = sample.mean_columns();
        self.evaluate(pop.weights(), &y, &x)
    }
}

/// Evaluates any spec on a sample.
pub fn estimate(spec: &EstimatorSpec, sample: &SampleData, pop: &PopulationSummary) -> Result<f64> {
    Ok(PreparedEstimator::new(spec, pop)?.estimate(sample, pop)?.value)
}
