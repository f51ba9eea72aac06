// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{build, population, stratum_params, StratumParams};
use expratio::{
    alpha_opt, bias_exponential, bias_kc, compare_family_vs_plain, estimate, moments_ab,
    mse_combined_ratio, mse_exponential, mse_kc, mse_mk_min, neyman, ratio_and_theta,
    rho_c_squared, summarize_population, verify_mk_dominance, Decision, EstimatorSpec,
    PopulationSummary, SampleData, StratumId, StratumSample, TransformFamily,
};
use proptest::prelude::*;

fn scale(pop: &PopulationSummary) -> f64 {
    pop.weighted_sum(|s| s.var_y())
}

fn sample(pop: &PopulationSummary, ky: &[f64], kx: &[f64]) -> SampleData {
    SampleData::new(
        pop.strata()
            .iter()
            .enumerate()
            .map(|(i, s)| StratumSample {
                id: s.id.clone(),
                sample_size: s.sample_size,
                mean_y: s.mean_y * ky[i % ky.len()],
                mean_x: s.mean_x * kx[i % kx.len()],
            })
            .collect(),
    )
    .unwrap()
}

fn specs() -> Vec<EstimatorSpec> {
    let mut v = EstimatorSpec::report_set();
    v.push(EstimatorSpec::CombinedRatio);
    v.extend(TransformFamily::all_named().into_iter().map(EstimatorSpec::Kc));
    v
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn weights_and_covariance(pop in population()) {
        prop_assert!((pop.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for s in pop.strata() {
            prop_assert!((s.cov_xy - s.rho * s.sd_x * s.sd_y).abs() <= 1e-12 * s.sd_x * s.sd_y);
            prop_assert!(s.gamma() > 0.0);
        }
    }

    #[test]
    fn input_order_is_irrelevant(params in prop::collection::vec(stratum_params(), 2..8)) {
        let forward = build(&params);
        let mut strata = forward.strata().to_vec();
        strata.reverse();
        let backward = summarize_population(strata).unwrap();
        for f in TransformFamily::all_named() {
            prop_assert_eq!(
                mse_exponential(&forward, &f, 1.0).unwrap(),
                mse_exponential(&backward, &f, 1.0).unwrap()
            );
        }
    }

    #[test]
    fn identity_constants(pop in population()) {
        let d = ratio_and_theta(&pop, &TransformFamily::Identity).unwrap();
        prop_assert_eq!(d.theta, 1.0);
        prop_assert_eq!(d.ratio, pop.grand_mean_y() / pop.grand_mean_x());
    }

    #[test]
    fn unit_slope_ratio_is_scaled_by_theta(pop in population()) {
        let r = pop.ratio().unwrap();
        for f in [TransformFamily::Sd, TransformFamily::Sk, TransformFamily::Gns1] {
            let d = ratio_and_theta(&pop, &f).unwrap();
            prop_assert!((d.ratio - r * d.theta).abs() <= 1e-12 * r.abs());
        }
    }

    #[test]
    fn vanishing_shift_approaches_identity(pop in population()) {
        let map = pop.strata().iter()
            .map(|s| (s.id.clone(), (1.0, 1e-6 * s.mean_x * s.cx.unwrap())))
            .collect();
        let near = mse_exponential(&pop, &TransformFamily::Custom(map), 1.0).unwrap();
        let plain = mse_exponential(&pop, &TransformFamily::Identity, 1.0).unwrap();
        let (_, b) = moments_ab(&pop);
        let r = pop.ratio().unwrap();
        prop_assert!((near - plain).abs() <= 1e-4 * (scale(&pop) + r * r * b));
    }

    #[test]
    fn exact_at_population_point(pop in population()) {
        let at = SampleData::at_population_means(&pop);
        let truth = pop.grand_mean_y();
        for spec in specs() {
            let v = estimate(&spec, &at, &pop).unwrap();
            prop_assert!((v - truth).abs() <= 1e-12 * truth.abs(), "{}", spec.name());
        }
    }

    #[test]
    fn scale_equivariant_in_y(
        pop in population(),
        ky in prop::collection::vec(0.5f64..1.5, 1..4),
        kx in prop::collection::vec(0.5f64..1.5, 1..4),
        c in 0.01f64..100.0,
    ) {
        let s = sample(&pop, &ky, &kx);
        let scaled_ky: Vec<f64> = ky.iter().map(|k| k * c).collect();
        let s_scaled = sample(&pop, &scaled_ky, &kx);
        for spec in specs().into_iter().filter(|s| !s.name().starts_with("t_mk_opt")) {
            let a = estimate(&spec, &s, &pop).unwrap();
            let b = estimate(&spec, &s_scaled, &pop).unwrap();
            prop_assert!((b - c * a).abs() <= 1e-10 * (c * a).abs(), "{}", spec.name());
        }
    }

    #[test]
    fn decreasing_in_auxiliary(pop in population(), k in 0.5f64..1.4, step in 0.01f64..0.1) {
        for f in TransformFamily::all_named() {
            let spec = EstimatorSpec::exponential(f);
            let lo = estimate(&spec, &sample(&pop, &[1.0], &[k]), &pop).unwrap();
            let hi = estimate(&spec, &sample(&pop, &[1.0], &[k + step]), &pop).unwrap();
            prop_assert!(hi < lo, "{}", spec.name());
        }
    }

    #[test]
    fn alpha_two_is_the_ratio_form(pop in population()) {
        let s = scale(&pop);
        for f in TransformFamily::all_named() {
            prop_assert!((mse_kc(&pop, &f).unwrap() - mse_exponential(&pop, &f, 2.0).unwrap()).abs() <= 1e-12 * s);
            prop_assert_eq!(bias_kc(&pop, &f).unwrap(), bias_exponential(&pop, &f, 2.0).unwrap());
        }
        let cr = mse_combined_ratio(&pop).unwrap();
        let kc = mse_kc(&pop, &TransformFamily::Identity).unwrap();
        prop_assert!((cr - kc).abs() <= 1e-12 * cr.abs().max(s));
    }

    #[test]
    fn mse_convex_in_alpha(pop in population(), a in -3.0f64..5.0, b in -3.0f64..5.0) {
        for f in TransformFamily::all_named() {
            let m = |x| mse_exponential(&pop, &f, x).unwrap();
            prop_assert!(m((a + b) / 2.0) <= (m(a) + m(b)) / 2.0 + 1e-9 * scale(&pop));
        }
    }

    #[test]
    fn optimum_is_family_invariant(pop in population()) {
        let min = mse_mk_min(&pop).unwrap();
        let rc2 = rho_c_squared(&pop).unwrap();
        prop_assert!((0.0..=1.0).contains(&rc2));
        let s = scale(&pop);
        prop_assert!((min - s * (1.0 - rc2)).abs() <= 1e-9 * s);
        for f in TransformFamily::all_named() {
            let opt = alpha_opt(&pop, &f).unwrap();
            prop_assert!((mse_exponential(&pop, &f, opt).unwrap() - min).abs() <= 1e-9 * s);
            let gap = verify_mk_dominance(&pop, &f).unwrap();
            prop_assert!(gap >= -1e-9 * s);
        }
    }

    #[test]
    fn verdict_matches_mse_difference(pop in population()) {
        let plain = mse_exponential(&pop, &TransformFamily::Identity, 1.0).unwrap();
        let (a, b) = moments_ab(&pop);
        let s = scale(&pop);
        for f in TransformFamily::all_named() {
            let v = compare_family_vs_plain(&pop, &f).unwrap();
            let diff = mse_exponential(&pop, &f, 1.0).unwrap() - plain;
            let closed = (v.ratio - v.plain_ratio) * (b * (v.ratio + v.plain_ratio) / 4.0 - a);
            prop_assert!((diff - closed).abs() <= 1e-9 * s);
            if diff.abs() > 1e-9 * s {
                let expected = if diff < 0.0 { Decision::FamilyBetter } else { Decision::PlainBetter };
                prop_assert_eq!(v.decision, expected, "{}", f);
            }
        }
    }

    #[test]
    fn allocation_respects_bounds(
        strata in prop::collection::vec((2u64..500, 0.0f64..100.0), 1..10),
        frac in 0.0f64..1.0,
    ) {
        prop_assume!(strata.iter().any(|s| s.1 > 0.0));
        let input: Vec<(StratumId, u64, f64)> = strata.iter().enumerate()
            .map(|(i, &(n, s))| (StratumId::new(i.to_string()), n, s))
            .collect();
        let cap: u64 = strata.iter().map(|s| s.0).sum();
        let l = strata.len() as u64;
        let n = l + ((cap - l) as f64 * frac) as u64;
        let alloc = neyman(&input, n).unwrap();
        prop_assert_eq!(alloc.sizes().iter().sum::<u64>(), n);
        for (a, (_, cap_h, _)) in alloc.strata.iter().zip(&input) {
            prop_assert!(a.allocated >= 1 && a.allocated <= *cap_h);
        }
        // Homogeneous of degree zero in S_h, and blind to input order.
        let scaled: Vec<_> = input.iter().map(|(id, n, s)| (id.clone(), *n, s * 8.0)).collect();
        prop_assert_eq!(neyman(&scaled, n).unwrap().sizes(), alloc.sizes());
        let mut rev = input.clone();
        rev.reverse();
        let by_id = |a: expratio::AllocationResult| {
            a.strata.into_iter().map(|s| (s.id, s.allocated)).collect::<std::collections::BTreeMap<_, _>>()
        };
        prop_assert_eq!(by_id(neyman(&rev, n).unwrap()), by_id(alloc));
    }
}

#[test]
fn ratio_form_agrees_to_second_order() {
    let params = [StratumParams {
        pop_size: 200,
        sample_frac: 0.2,
        mean_x: 50.0,
        cv_x: 0.3,
        mean_y: 20.0,
        cv_y: 0.4,
        rho: 0.7,
        beta2x: 3.0,
    }];
    let pop = build(&params);
    let gap = |eps: f64, alpha: f64| {
        let s = sample(&pop, &[1.0], &[1.0 + eps]);
        let exp = estimate(&EstimatorSpec::Exponential {
            family: TransformFamily::Identity,
            alpha: expratio::Alpha::Fixed(alpha),
        }, &s, &pop).unwrap();
        let ratio = estimate(&EstimatorSpec::Kc(TransformFamily::Identity), &s, &pop).unwrap();
        (exp - ratio).abs()
    };
    // α = 2 matches the ratio form beyond first order; α = 1 does not.
    assert!(gap(1e-3, 2.0) / gap(1e-2, 2.0) < 1.1e-2);
    let first = gap(1e-3, 1.0) / gap(1e-2, 1.0);
    assert!((first - 0.1).abs() < 0.01, "{first}");
}
