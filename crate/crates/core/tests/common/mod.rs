// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use expratio::io::read_aggregated;
use expratio::{summarize_population, PopulationSummary, StratumInput, StratumSummary};
use proptest::prelude::*;

pub const APPLES: &str = include_str!("../fixtures/apples.json");

pub fn apples() -> PopulationSummary {
    summarize_population(read_aggregated(APPLES).unwrap()).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[derive(Debug, Clone)]
pub struct StratumParams {
    pub pop_size: u64,
    pub sample_frac: f64,
    pub mean_x: f64,
    pub cv_x: f64,
    pub mean_y: f64,
    pub cv_y: f64,
    pub rho: f64,
    pub beta2x: f64,
}

pub fn stratum_params() -> impl Strategy<Value = StratumParams> {
    (
        5u64..400,
        0.0f64..1.0,
        1.0f64..1e4,
        0.05f64..1.5,
        1.0f64..1e4,
        0.05f64..1.5,
        -0.95f64..0.95,
        1.5f64..40.0,
    )
        .prop_map(
            |(pop_size, sample_frac, mean_x, cv_x, mean_y, cv_y, rho, beta2x)| StratumParams {
                pop_size,
                sample_frac,
                mean_x,
                cv_x,
                mean_y,
                cv_y,
                rho,
                beta2x,
            },
        )
}

pub fn build(params: &[StratumParams]) -> PopulationSummary {
    let strata: Vec<StratumSummary> = params
        .iter()
        .enumerate()
        .map(|(i, p)| {
            // At least one unit sampled, and at least one left out so γ_h > 0.
            let n = 1 + ((p.pop_size - 2) as f64 * p.sample_frac) as u64;
            StratumSummary::from_input(StratumInput {
                id: i.to_string(),
                pop_size: p.pop_size,
                sample_size: n,
                mean_x: p.mean_x,
                mean_y: p.mean_y,
                sd_x: p.cv_x * p.mean_x,
                sd_y: p.cv_y * p.mean_y,
                rho: Some(p.rho),
                cx: Some(p.cv_x),
                beta2x: Some(p.beta2x),
                ..Default::default()
            })
            .unwrap()
        })
        .collect();
    summarize_population(strata).unwrap()
}

pub fn population() -> impl Strategy<Value = PopulationSummary> {
    prop::collection::vec(stratum_params(), 1..8).prop_map(|p| build(&p))
}
