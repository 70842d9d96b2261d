use std::f64::consts::{FRAC_PI_4, PI};

use molring::protocols::{
    apply_phase_correction, fidelity_curve, fluctuation_sweep, generation_error, make_transfer_program,
    plan_w_from_center, plan_w_from_site, Branch, RatioAnchor, SiteWRequest, WSource,
};
use molring::star::{evolve_subspace, SubspaceState};
use molring::{Error, ErrorCategory};
use num_complex::Complex64;
use proptest::prelude::*;

fn site_request(c: f64, k: Option<u32>, branch: Branch) -> SiteWRequest {
    SiteWRequest {
        n: 3,
        source: 2,
        c,
        gamma: 1.0,
        anchor: RatioAnchor::Others,
        k,
        branch,
    }
}

#[test]
fn center_plans_give_exact_w_states() {
    for n in 2..=8 {
        for k in 0..3 {
            let plan = plan_w_from_center(n, 0.7, k).unwrap();
            let sum = plan.phase_sum().unwrap();
            assert!((sum.abs() - (2 * k + 1) as f64 * PI).abs() < 1e-9);
            let state = evolve_subspace(&plan.network, &plan.initial_state(), plan.t_w).unwrap();
            for q in &state.populations()[..n] {
                assert!((q - 1.0 / n as f64).abs() < 1e-12);
            }
            assert!(state.populations()[n] < 1e-12);
            assert!(plan.predicted_error <= 1e-12);
        }
    }
}

#[test]
fn site_plan_for_three_rings() {
    let plan = plan_w_from_site(&site_request(0.5, Some(1), Branch::Plus)).unwrap();
    assert_eq!(plan.source, WSource::Site(2));
    let omega = plan.network.omega();
    let expected = 2.0 * PI / (0.25 + omega * omega).sqrt();
    assert!((plan.t_w - expected).abs() < 1e-12);
    let sum = plan.phase_sum().unwrap();
    assert!((sum.abs() - 2.0 * PI).abs() < 1e-9);

    let raw = evolve_subspace(&plan.network, &plan.initial_state(), plan.t_w).unwrap();
    for q in &raw.populations()[..3] {
        assert!((q - 1.0 / 3.0).abs() < 1e-8);
    }
    assert!(raw.populations()[3] < 1e-8);
    let corrected = apply_phase_correction(&raw, 2, plan.chi).unwrap();
    assert!(generation_error(&corrected) <= 1e-8);
    assert!(plan.predicted_error <= 1e-8);
}

#[test]
fn both_branches_at_zero_c() {
    let plus = plan_w_from_site(&site_request(0.0, Some(1), Branch::Plus)).unwrap();
    let minus = plan_w_from_site(&site_request(0.0, Some(1), Branch::Minus)).unwrap();
    assert!((plus.p.unwrap() - (4.0 + 12f64.sqrt()) / 4.0).abs() < 1e-9);
    assert!((minus.p.unwrap() - (4.0 - 12f64.sqrt()) / 4.0).abs() < 1e-9);
}

#[test]
fn default_winding_is_smallest_feasible() {
    let req = site_request(1.0, None, Branch::Plus);
    assert!(matches!(
        plan_w_from_site(&SiteWRequest { k: Some(1), ..req }),
        Err(Error::Infeasible(_))
    ));
    let plan = plan_w_from_site(&req).unwrap();
    assert_eq!(plan.k, 2);
    assert!(plan.predicted_error <= 1e-8);
}

#[test]
fn infeasible_plan_is_categorized() {
    let err = plan_w_from_site(&SiteWRequest {
        n: 6,
        source: 0,
        c: 40.0,
        gamma: 1.0,
        anchor: RatioAnchor::Source,
        k: Some(1),
        branch: Branch::Plus,
    })
    .unwrap_err();
    assert_eq!(err.category(), ErrorCategory::Infeasible);
}

#[test]
fn site_plans_across_sizes() {
    for n in 2..=7 {
        for anchor in [RatioAnchor::Source, RatioAnchor::Others] {
            let plan = plan_w_from_site(&SiteWRequest {
                n,
                source: n - 1,
                c: 0.3,
                gamma: 0.8,
                anchor,
                k: None,
                branch: Branch::Plus,
            })
            .unwrap();
            let state = plan.generate().unwrap();
            assert!(generation_error(&state) <= 1e-8, "n={n}");
        }
    }
}

#[test]
fn fluctuation_sweep_is_monotone_per_side() {
    let plan = plan_w_from_site(&site_request(1.0, None, Branch::Plus)).unwrap();
    let deltas: Vec<f64> = (-20..=20).map(|j| j as f64 * 0.01).collect();
    let points = fluctuation_sweep(&plan, 2, &deltas).unwrap();
    assert_eq!(points.len(), deltas.len());
    for (p, d) in points.iter().zip(&deltas) {
        assert_eq!(p.delta, *d);
    }
    assert!(points[20].error <= 1e-8);
    for w in points[20..].windows(2) {
        assert!(w[1].error >= w[0].error);
    }
    for w in points[..=20].windows(2) {
        assert!(w[0].error >= w[1].error);
    }
    assert!(fluctuation_sweep(&plan, 2, &[1.0]).is_err());
}

#[test]
fn transfer_pattern_moves_and_idle_sites_stay_empty() {
    let c = [FRAC_PI_4.sin(), FRAC_PI_4.cos()];
    let program = make_transfer_program(5, 2, &c, 2f64.sqrt(), 0.0).unwrap();
    let times: Vec<f64> = (0..=400).map(|j| j as f64 * 4.0 * PI / 400.0).collect();
    let curve = fidelity_curve(&program, &times).unwrap();
    let best = curve.target_fidelity.iter().cloned().fold(0.0, f64::max);
    assert!(best >= 1.0 - 1e-8);
    assert!(curve.idle_population.iter().all(|&q| q <= 1e-12));
    assert!(curve
        .return_fidelity
        .iter()
        .chain(&curve.target_fidelity)
        .all(|&f| (0.0..=1.0).contains(&f)));
}

#[test]
fn transfer_with_unequal_pattern() {
    let c = [0.6, -0.8];
    let program = make_transfer_program(6, 2, &c, 1.3, 0.0).unwrap();
    let curve = fidelity_curve(&program, &[program.t_transfer]).unwrap();
    assert!(curve.target_fidelity[0] >= 1.0 - 1e-8);
    let omega = program.network.omega();
    assert!((program.t_transfer - 2.0 * PI / omega).abs() < 1e-6);
}

#[test]
fn transfer_ratios_hold() {
    let c = [0.5, 0.5, 0.5f64.sqrt()];
    let program = make_transfer_program(8, 3, &c, 0.9, 0.0).unwrap();
    let g = program.network.gammas();
    for i in 0..3 {
        for j in 0..3 {
            assert!((g[i] / g[j] - c[i] / c[j]).abs() < 1e-12);
            assert!((g[3 + i] / g[3 + j] - c[i] / c[j]).abs() < 1e-12);
        }
    }
    assert!(g[6..].iter().all(|&x| x == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn phase_correction_touches_one_site(
        re in proptest::collection::vec(-1.0f64..1.0, 4),
        im in proptest::collection::vec(-1.0f64..1.0, 4),
        site in 0usize..4,
        chi in -10.0f64..10.0,
    ) {
        let amps: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        prop_assume!(amps.iter().any(|z| z.norm() > 1e-3));
        let state = SubspaceState::normalized(amps).unwrap();
        let out = apply_phase_correction(&state, site, chi).unwrap();
        for j in 0..4 {
            if j != site {
                prop_assert_eq!(out.amplitudes()[j], state.amplitudes()[j]);
            }
        }
        prop_assert!((out.amplitudes()[site].norm() - state.amplitudes()[site].norm()).abs() < 1e-15);
    }
}
