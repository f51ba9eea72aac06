// SPDX-License-Identifier: Apache-2.0

//! Golden values on the published six-region apple data. Expected values
//! were frozen from an independent numpy recomputation over the same
//! columns, with `γ_h` and `w_h` derived from `N_h` and `n_h`.

mod common;

use common::{apples, rel};
use expratio::{
    alpha_opt, compare_family_vs_plain, full_report, moments_ab, mse_combined_ratio,
    mse_exponential, mse_kc, mse_mk_min, neyman_for, ratio_and_theta, rho_c_squared,
    transformed_means, verify_mk_dominance, Decision, TransformFamily,
};

/// (estimator, X̄_st,ab, R_ab, θ_ab, bias at α = 1, MSE at α = 1)
const ORACLE: [(&str, f64, f64, f64, f64, f64); 7] = [
    ("t", 37599.78103044496, 0.07792199945855234, 1.0, -23.66979823493875, 363925.7641624678),
    ("t_sd", 37602.10345433255, 0.07791718675138208, 0.9999382368624561, -23.67142195837709, 363940.35830967483),
    ("t_sk", 37641.9374941452, 0.07783473200739802, 0.9988800665824709, -23.699181541056387, 364190.51133543195),
    ("t_us1", 2086629.6105269322, 0.07792191273117532, 0.9999988869975408, -23.66982749861538, 363926.02714967204),
    ("t_us2", 102846.37697892272, 0.07789005943267957, 0.999590102588554, -23.68056711285059, 364022.6336464359),
    ("t_gns1", 140372.3161592506, 0.020871993832260637, 0.26785752389943107, -16.138254783550707, 589231.3826919053),
    ("t_gns2", 2189399.8232318503, 0.07426426579945318, 0.953059037441092, -24.79390874748185, 375232.2954112371),
];

const TOL: f64 = 1e-10;

#[test]
fn weights_and_factors() {
    let pop = apples();
    assert_eq!(pop.pop_size(), 854);
    assert_eq!(pop.sample_size(), 140);
    // Published to three decimals: γ₁ = 0.102, w₁² = 0.015.
    assert!((pop.gammas()[0] - 0.102).abs() < 5e-4);
    assert!((pop.weights()[0].powi(2) - 0.015).abs() < 5e-4);
    assert!((pop.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // X̄ = 37600 and Ȳ = 2930 up to rounding of the stratum means.
    assert!((pop.grand_mean_x() - 37600.0).abs() < 1.0);
    assert!((pop.grand_mean_y() - 2930.0).abs() < 1.0);
}

#[test]
fn named_coefficients() {
    let pop = apples();
    let s1 = &pop.strata()[0];
    let s4 = &pop.strata()[3];
    assert_eq!(TransformFamily::Sd.coefficients(s1).unwrap(), (1.0, 2.02));
    assert_eq!(TransformFamily::Us1.coefficients(s4).unwrap(), (97.60, 3.84));
    assert_eq!(TransformFamily::Gns1.coefficients(s4).unwrap(), (1.0, 285603.0));
}

#[test]
fn frozen_family_values() {
    let pop = apples();
    for (family, row) in TransformFamily::all_named().iter().zip(ORACLE) {
        assert_eq!(family.estimator_name(), row.0);
        let means = transformed_means(&pop, family).unwrap();
        let d = ratio_and_theta(&pop, family).unwrap();
        assert!(rel(means.population, row.1) < TOL, "{}", row.0);
        assert!(rel(d.ratio, row.2) < TOL, "{}", row.0);
        assert!(rel(d.theta, row.3) < TOL, "{}", row.0);
        let rep = full_report(&pop).unwrap();
        let r = rep.row(row.0).unwrap();
        assert!(rel(r.bias, row.4) < TOL, "{}: {} vs {}", row.0, r.bias, row.4);
        assert!(rel(r.mse, row.5) < TOL, "{}: {} vs {}", row.0, r.mse, row.5);
    }
}

#[test]
fn published_ratios() {
    let pop = apples();
    let r = |f: TransformFamily| ratio_and_theta(&pop, &f).unwrap().ratio;
    // Five printed digits.
    assert!((r(TransformFamily::Identity) - 0.07793).abs() < 1e-5);
    assert!((r(TransformFamily::Sd) - 0.07792).abs() < 5e-6);
    assert!((r(TransformFamily::Sk) - 0.07784).abs() < 1e-5);
    // The printed R_US1 = 0.07789 is not reproducible from the tabulated
    // columns: with C_xh tiny next to β_2h X̄_h the ratio stays at R.
    let us1 = r(TransformFamily::Us1);
    assert!((us1 - 0.07789).abs() > 3e-5);
    assert!(rel(us1, r(TransformFamily::Identity)) < 2e-6);
}

#[test]
fn scalar_goldens() {
    let pop = apples();
    let (a, b) = moments_ab(&pop);
    assert!(rel(a, 5537109.608725665) < TOL);
    assert!(rel(b, 64289095.480019) < TOL);
    assert!(rel(rho_c_squared(&pop).unwrap(), 0.6834360023080385) < TOL);
    assert!(rel(mse_mk_min(&pop).unwrap(), 220898.4123143001) < TOL);
    assert!(rel(alpha_opt(&pop, &TransformFamily::Identity).unwrap(), 2.210628235933822) < TOL);
    assert!(rel(mse_combined_ratio(&pop).unwrap(), 225227.84190191887) < TOL);
    assert!(rel(mse_kc(&pop, &TransformFamily::Sd).unwrap(), 225232.92151651406) < TOL);
}

#[test]
fn published_mse_within_rounding_tolerance() {
    let pop = apples();
    let rep = full_report(&pop).unwrap();
    for (name, printed) in [
        ("t", 359619.594),
        ("t_sd", 359649.688),
        ("t_sk", 359890.313),
        ("t_us1", 359739.875),
        ("t_us2", 359830.125),
    ] {
        let got = rep.row(name).unwrap().mse;
        assert!(rel(got, printed) < 0.02, "{name}: {got} vs {printed}");
    }
    let min = rep.row("t_mk_opt").unwrap().mse;
    assert!(rel(min, 218374.8898) < 0.10);
    assert!(rep.rows.iter().filter(|r| r.estimator != "t_mk_opt").all(|r| min < r.mse));
    assert!(rep.warnings.is_empty(), "{:?}", rep.warnings);
}

#[test]
fn neyman_reproduces_published_allocation() {
    let alloc = neyman_for(&apples(), 140).unwrap();
    assert_eq!(alloc.sizes(), [9, 17, 38, 67, 7, 2]);
}

#[test]
fn sd_verdict_plain_better() {
    let pop = apples();
    let v = compare_family_vs_plain(&pop, &TransformFamily::Sd).unwrap();
    assert!(v.ratio < v.plain_ratio);
    assert!(v.b < v.threshold.unwrap());
    assert_eq!(v.decision, Decision::PlainBetter);
}

#[test]
fn dominance_on_apples() {
    let pop = apples();
    let gap = verify_mk_dominance(&pop, &TransformFamily::Identity).unwrap();
    assert!(rel(gap, 363925.7641624678 - 220898.4123143001) < 1e-9);
    for f in TransformFamily::all_named() {
        let opt = alpha_opt(&pop, &f).unwrap();
        assert!(rel(mse_exponential(&pop, &f, opt).unwrap(), 220898.4123143001) < 1e-9);
    }
}
