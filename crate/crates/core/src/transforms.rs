// SPDX-License-Identifier: Apache-2.0

//! Affine transformations `a_h x + b_h` of the auxiliary variable built
//! from known stratum constants, and the derived ratio `R_ab` and `θ_ab`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::stats::{PopulationSummary, SampleData, StratumId, StratumSummary};

/// Source of per-stratum `(a_h, b_h)`.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformFamily {
    /// `(1, 0)`: the untransformed auxiliary variable.
    Identity,
    /// `(1, C_xh)`
    Sd,
    /// `(1, β_2h)`
    Sk,
    /// `(β_2h, C_xh)`
    Us1,
    /// `(C_xh, β_2h)`
    Us2,
    /// `(1, σ_xh)`
    Gns1,
    /// `(β_2h, σ_xh)`
    Gns2,
    /// Explicit coefficients per stratum.
    Custom(BTreeMap<StratumId, (f64, f64)>),
}

impl TransformFamily {
    /// The six named transformed families, in report order.
    pub const NAMED: [TransformFamily; 6] = [
        TransformFamily::Sd,
        TransformFamily::Sk,
        TransformFamily::Us1,
        TransformFamily::Us2,
        TransformFamily::Gns1,
        TransformFamily::Gns2,
    ];

    /// Identity followed by the named families.
    pub fn all_named() -> Vec<TransformFamily> {
        std::iter::once(TransformFamily::Identity)
            .chain(Self::NAMED.iter().cloned())
            .collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            TransformFamily::Identity => "identity",
            TransformFamily::Sd => "sd",
            TransformFamily::Sk => "sk",
            TransformFamily::Us1 => "us1",
            TransformFamily::Us2 => "us2",
            TransformFamily::Gns1 => "gns1",
            TransformFamily::Gns2 => "gns2",
            TransformFamily::Custom(_) => "custom",
        }
    }

    /// Name of the exponential estimator built on this family at α = 1.
    pub fn estimator_name(&self) -> String {
        match self {
            TransformFamily::Identity => "t".into(),
            other => format!("t_{}", other.name()),
        }
    }

    pub fn coefficients(&self, stratum: &StratumSummary) -> Result<(f64, f64)> {
        let need = |field: &'static str, v: Option<f64>| {
            v.ok_or_else(|| Error::MissingField {
                family: self.name().into(),
                field,
                stratum: stratum.id.to_string(),
            })
        };
        Ok(match self {
            TransformFamily::Identity => (1.0, 0.0),
            TransformFamily::Sd => (1.0, need("cx", stratum.cx)?),
            TransformFamily::Sk => (1.0, need("beta2x", stratum.beta2x)?),
            TransformFamily::Us1 => (need("beta2x", stratum.beta2x)?, need("cx", stratum.cx)?),
            TransformFamily::Us2 => (need("cx", stratum.cx)?, need("beta2x", stratum.beta2x)?),
            TransformFamily::Gns1 => (1.0, stratum.sd_x),
            TransformFamily::Gns2 => (need("beta2x", stratum.beta2x)?, stratum.sd_x),
            TransformFamily::Custom(map) => {
                *map.get(&stratum.id).ok_or_else(|| Error::MissingField {
                    family: "custom".into(),
                    field: "a,b",
                    stratum: stratum.id.to_string(),
                })?
            }
        })
    }
}

impl fmt::Display for TransformFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "identity" | "t" => TransformFamily::Identity,
            "sd" => TransformFamily::Sd,
            "sk" => TransformFamily::Sk,
            "us1" => TransformFamily::Us1,
            "us2" => TransformFamily::Us2,
            "gns1" => TransformFamily::Gns1,
            "gns2" => TransformFamily::Gns2,
            other => return Err(Error::InvalidInput(format!("unknown family `{other}`"))),
        })
    }
}

/// Per-stratum coefficients of a family resolved against a population,
/// plus the transformed population mean `X̄_st,ab`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedMeans {
    pub population: f64,
    coefficients: Vec<(f64, f64)>,
    weights: Vec<f64>,
}

impl TransformedMeans {
    pub fn coefficients(&self) -> &[(f64, f64)] {
        &self.coefficients
    }

    /// `x̄_st,ab = Σ w_h (a_h x̄_h + b_h)`.
    pub fn sample(&self, sample: &SampleData, pop: &PopulationSummary) -> Result<f64> {
        sample.check_matches(pop)?;
        let (_, xbar) = sample.mean_columns();
        Ok(self.sample_from_means(&xbar))
    }

    /// Same as [`sample`](Self::sample) over stratum-ordered sample means.
    pub fn sample_from_means(&self, mean_x: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.coefficients)
            .zip(mean_x)
            .map(|((w, (a, b)), x)| w * (a * x + b))
            .sum()
    }
}

pub fn transformed_means(pop: &PopulationSummary, family: &TransformFamily) -> Result<TransformedMeans> {
    let coefficients = pop
        .strata()
        .iter()
        .map(|s| family.coefficients(s))
        .collect::<Result<Vec<_>>>()?;
    let population = pop
        .weights()
        .iter()
        .zip(&coefficients)
        .zip(pop.strata())
        .map(|((w, (a, b)), s)| w * (a * s.mean_x + b))
        .sum();
    Ok(TransformedMeans {
        population,
        coefficients,
        weights: pop.weights().to_vec(),
    })
}

/// `X̄_st,ab`, `R_ab` and `θ_ab` for one family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformDerived {
    pub mean_transformed: f64,
    pub ratio: f64,
    pub theta: f64,
}

/// `R_ab = Ȳ_st (Σ w_h a_h X̄_h) / (X̄_st,ab X̄_st)` and
/// `θ_ab = (Σ w_h a_h X̄_h) / X̄_st,ab`.
pub fn ratio_and_theta(pop: &PopulationSummary, family: &TransformFamily) -> Result<TransformDerived> {
    let means = transformed_means(pop, family)?;
    let grand_x = pop.grand_mean_x();
    if grand_x == 0.0 {
        return Err(Error::SingularTransform("X̄_st is zero".into()));
    }
    if means.population == 0.0 {
        return Err(Error::SingularTransform(format!(
            "transformed mean for family {family} is zero"
        )));
    }
    let scaled: f64 = pop
        .weights()
        .iter()
        .zip(&means.coefficients)
        .zip(pop.strata())
        .map(|((w, (a, _)), s)| w * a * s.mean_x)
        .sum();
    let (ratio, theta) = if matches!(family, TransformFamily::Identity) {
        (pop.grand_mean_y() / grand_x, 1.0)
    } else {
        (
            pop.grand_mean_y() * scaled / (means.population * grand_x),
            scaled / means.population,
        )
    };
    Ok(TransformDerived {
        mean_transformed: means.population,
        ratio,
        theta,
    })
}
