// SPDX-License-Identifier: Apache-2.0

//! Exponential ratio-type estimators of a finite-population mean under
//! stratified random sampling.
//!
//! The crate covers point estimation ([`estimators`]), first-order bias and
//! MSE ([`theory`]), efficiency conditions ([`comparison`]), Neyman
//! allocation ([`allocation`]) and a design-based simulation engine
//! ([`simulate`]) that checks the first-order formulas against exact
//! enumeration and Monte Carlo replication.

pub mod allocation;
pub mod comparison;
pub mod error;
pub mod estimators;
pub mod io;
pub mod simulate;
pub mod stats;
pub mod theory;
pub mod transforms;

pub use allocation::{neyman, neyman_for, AllocationResult, StratumAllocation};
pub use comparison::{
    compare_family_vs_plain, moments_ab, verify_mk_dominance, Branch, Decision, EfficiencyVerdict,
};
pub use error::{Error, Result};
pub use estimators::{
    estimate, estimate_combined_ratio, estimate_exponential, estimate_kc, Alpha, Estimate,
    EstimatorSpec, PreparedEstimator,
};
pub use simulate::{
    draw_srswor, enumerate_exact, enumerate_exact_all, generate_population, run_replications,
    run_replications_with, ExactMoments, GeneratedPopulation, SimulationReport, SimulationRow,
};
pub use stats::{
    summarize_population, summarize_stratum, PopulationFrame, PopulationSummary, SampleData,
    StratumId, StratumInput, StratumSample, StratumSummary, Unit,
};
pub use theory::{
    alpha_opt, bias_exponential, bias_kc, full_report, mse_combined_ratio, mse_exponential, mse_kc,
    mse_mk_min, report_for, resolve_optimal, rho_c_squared, theoretical, ReportRow, TheoreticalReport,
};
pub use transforms::{ratio_and_theta, transformed_means, TransformDerived, TransformFamily, TransformedMeans};
