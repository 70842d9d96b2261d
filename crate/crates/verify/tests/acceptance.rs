//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use molring::coupling::{
    effective_coupling, linker_ratio_crossings, AnisotropyTemplate, CrNiParams, CrossingKind, Linker, LinkerRatio,
};
use molring::linalg::{hermitian_eigendecompose, max_abs_diff, ComplexMatrix};
use molring::oracle::{propagate_full_space, ZConvention};
use molring::protocols::{
    apply_phase_correction, fidelity_curve, fluctuation_sweep, generation_error, make_transfer_program,
    plan_w_from_center, plan_w_from_site, Branch, RatioAnchor, SiteWRequest, TransferProgram, WGenerationPlan, WSource,
};
use molring::ring::{encode_ring, BondVariant, RingSpec, SpinComponent};
use molring::star::{
    analytic_eigensystem, build_effective_hamiltonian, closed_form_from_center, closed_form_from_site, StarNetwork,
    StarPropagator, SubspaceState,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPECTRUM_TOL: f64 = 1e-10;
const EIGVEC_RESIDUAL_TOL: f64 = 1e-9;
const SPECTRUM_BUDGET: Duration = Duration::from_secs(10);

const CLOSED_FORM_TOL: f64 = 1e-10;
const CLOSED_FORM_SAMPLES: usize = 1000;
const CLOSED_FORM_BUDGET: Duration = Duration::from_secs(30);

const CENTER_W_TOL: f64 = 1e-10;
const SITE_W_TOL: f64 = 1e-8;

const FLUCT_BASELINE_TOL: f64 = 1e-8;
const FLUCT_RATIO_BAND: (f64, f64) = (0.05, 0.15);
const FLUCT_RATIO_RANGE: f64 = 0.1;
const FLUCT_BUDGET: Duration = Duration::from_secs(5);

const PERIOD_TOL: f64 = 1e-9;
const TRANSFER_TOL: f64 = 1e-8;
const IDLE_TOL: f64 = 1e-12;
const TRANSFER_BUDGET: Duration = Duration::from_secs(5);

const SCALE_INVARIANCE_TOL: f64 = 1e-12;
const RING_BUDGET: Duration = Duration::from_secs(60);

const CLOSURE_TOL: f64 = 1e-8;
const LEAKAGE_TOL: f64 = 1e-12;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn random_constrained(rng: &mut impl Rng, n: usize) -> StarNetwork {
    let gammas = (0..n)
        .map(|_| rng.gen_range(0.1..3.0) * if rng.gen_bool(0.25) { -1.0 } else { 1.0 })
        .collect();
    StarNetwork::constrained(gammas, rng.gen_range(-3.0..3.0)).unwrap()
}

fn spectral_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_value, mut worst_residual) = (0.0f64, 0.0f64);
    for n in 2..=12 {
        for _ in 0..100 {
            let net = random_constrained(&mut rng, n);
            let h = build_effective_hamiltonian(&net);
            let numeric = hermitian_eigendecompose(&h).unwrap();
            let analytic = analytic_eigensystem(&net).unwrap();
            for (a, b) in analytic.sorted_values().iter().zip(numeric.values()) {
                worst_value = worst_value.max((a - b).abs());
            }
            for (lambda, v) in analytic.pairs() {
                let vc: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                let hv = h.mul_vec(&vc).unwrap();
                let lv: Vec<Complex64> = vc.iter().map(|z| z * lambda).collect();
                worst_residual = worst_residual.max(max_abs_diff(&hv, &lv));
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: worst_value <= SPECTRUM_TOL && worst_residual <= EIGVEC_RESIDUAL_TOL && elapsed < SPECTRUM_BUDGET,
        detail: format!(
            "max eigenvalue error {worst_value:.2e} (tol {SPECTRUM_TOL:.0e}), max residual {worst_residual:.2e} (tol {EIGVEC_RESIDUAL_TOL:.0e}), {elapsed:.2?}"
        ),
    }
}

fn closed_form_propagators() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..CLOSED_FORM_SAMPLES {
        let n = rng.gen_range(1..=10);
        let net = random_constrained(&mut rng, n);
        let t = rng.gen_range(0.0..20.0);
        let source = rng.gen_range(0..=n);
        let closed = if source == n {
            closed_form_from_center(&net, t).unwrap()
        } else {
            closed_form_from_site(&net, source, t).unwrap()
        };
        let numeric = StarPropagator::numerical(&net)
            .unwrap()
            .evolve(&SubspaceState::basis(n + 1, source).unwrap(), t)
            .unwrap();
        worst = worst.max(max_abs_diff(closed.amplitudes(), numeric.amplitudes()));
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: worst <= CLOSED_FORM_TOL && elapsed < CLOSED_FORM_BUDGET,
        detail: format!(
            "max deviation {worst:.2e} over {CLOSED_FORM_SAMPLES} samples (tol {CLOSED_FORM_TOL:.0e}), {elapsed:.2?}"
        ),
    }
}

fn center_plans() -> Vec<WGenerationPlan> {
    let mut plans = Vec::new();
    for n in 2..=8 {
        for (k, gamma) in [(0, 1.0), (1, 0.6), (2, 1.7)] {
            plans.push(plan_w_from_center(n, gamma, k).unwrap());
        }
    }
    plans
}

fn w_from_center() -> Outcome {
    let (mut worst_pop, mut worst_err, mut worst_phase) = (0.0f64, 0.0f64, 0.0f64);
    for plan in center_plans() {
        let n = plan.network.n();
        let state = StarPropagator::numerical(&plan.network)
            .unwrap()
            .evolve(&plan.initial_state(), plan.t_w)
            .unwrap();
        let pops = state.populations();
        for q in &pops[..n] {
            worst_pop = worst_pop.max((q - 1.0 / n as f64).abs());
        }
        worst_pop = worst_pop.max(pops[n]);
        worst_err = worst_err.max(generation_error(&state));
        let phase = plan.phase_sum().unwrap().abs();
        worst_phase = worst_phase.max((phase - (2 * plan.k + 1) as f64 * PI).abs());
    }
    Outcome {
        pass: worst_pop <= CENTER_W_TOL && worst_err <= CENTER_W_TOL && worst_phase <= 1e-9,
        detail: format!(
            "N=2..8, k=0..2: max population error {worst_pop:.2e}, max E_r {worst_err:.2e} (tol {CENTER_W_TOL:.0e}), phase-sum error {worst_phase:.2e}"
        ),
    }
}

fn three_ring_site_plan(c: f64) -> WGenerationPlan {
    plan_w_from_site(&SiteWRequest {
        n: 3,
        source: 2,
        c,
        gamma: 1.0,
        anchor: RatioAnchor::Others,
        k: Some(1),
        branch: Branch::Plus,
    })
    .unwrap()
}

fn w_from_site() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for c in [0.0, 0.25, 0.5] {
        let plan = three_ring_site_plan(c);
        let omega = plan.network.omega();
        let expected = 2.0 * plan.k as f64 * PI / (c * c + omega * omega).sqrt();
        let raw = StarPropagator::numerical(&plan.network)
            .unwrap()
            .evolve(&plan.initial_state(), plan.t_w)
            .unwrap();
        let corrected = apply_phase_correction(&raw, 2, plan.chi).unwrap();
        let err = generation_error(&corrected);
        let timing = (plan.t_w - expected).abs();
        pass &= timing <= 1e-12 && err <= SITE_W_TOL;
        details.push(format!(
            "C={c}: p={:.6}, t_W={:.6}, E_r={err:.1e}",
            plan.p.unwrap(),
            plan.t_w
        ));
    }
    Outcome {
        pass,
        detail: format!("{} (tol {SITE_W_TOL:.0e})", details.join("; ")),
    }
}

fn fluctuation_baseline() -> WGenerationPlan {
    plan_w_from_site(&SiteWRequest {
        n: 3,
        source: 2,
        c: 1.0,
        gamma: 1.0,
        anchor: RatioAnchor::Others,
        k: None,
        branch: Branch::Plus,
    })
    .unwrap()
}

fn fluctuation_reproduction() -> Outcome {
    let start = Instant::now();
    let plan = fluctuation_baseline();
    let deltas: Vec<f64> = (-20..=20).map(|j| j as f64 * 0.01).collect();
    let points = fluctuation_sweep(&plan, 2, &deltas).unwrap();
    let zero = points.iter().find(|p| p.delta == 0.0).unwrap().error;

    let mut ratios: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.delta != 0.0 && p.delta.abs() <= FLUCT_RATIO_RANGE + 1e-12)
        .map(|p| (p.delta, p.error / p.delta.abs()))
        .collect();
    ratios.sort_by(|a, b| a.1.total_cmp(&b.1));
    let in_band = ratios
        .iter()
        .all(|&(_, r)| (FLUCT_RATIO_BAND.0..=FLUCT_RATIO_BAND.1).contains(&r));
    let failing = ratios
        .iter()
        .filter(|&&(_, r)| !(FLUCT_RATIO_BAND.0..=FLUCT_RATIO_BAND.1).contains(&r))
        .count();

    let mid = deltas.len() / 2;
    let monotone = points[mid..].windows(2).all(|w| w[1].error >= w[0].error)
        && points[..=mid].windows(2).all(|w| w[0].error >= w[1].error);
    let at = |d: f64| points.iter().find(|p| (p.delta - d).abs() < 1e-12).unwrap().error;
    let elapsed = start.elapsed();
    Outcome {
        pass: zero <= FLUCT_BASELINE_TOL && in_band && monotone && elapsed < FLUCT_BUDGET,
        detail: format!(
            "baseline C=1, k={}, p={:.4}: E_r(0)={zero:.1e}; E_r(-0.1)={:.2e}, E_r(+0.1)={:.2e}; E_r/|delta| spans [{:.3}, {:.3}] with {failing}/{} grid points outside [{}, {}]; monotone per side: {monotone}; {elapsed:.2?}",
            plan.k,
            plan.p.unwrap(),
            at(-0.1),
            at(0.1),
            ratios.first().unwrap().1,
            ratios.last().unwrap().1,
            ratios.len(),
            FLUCT_RATIO_BAND.0,
            FLUCT_RATIO_BAND.1,
        ),
    }
}

fn transfer_program() -> TransferProgram {
    let c = [FRAC_PI_4.sin(), FRAC_PI_4.cos()];
    make_transfer_program(5, 2, &c, 2f64.sqrt(), 0.0).unwrap()
}

fn transfer_reproduction() -> Outcome {
    let start = Instant::now();
    let program = transfer_program();
    let omega = program.network.omega();
    let half = 2.0 * PI / omega;
    let period = 2.0 * half;
    let grid: Vec<f64> = (0..=2000).map(|j| j as f64 * 2.0 * period / 2000.0).collect();
    let curve = fidelity_curve(&program, &grid).unwrap();
    let marks = fidelity_curve(&program, &[0.0, half, period]).unwrap();
    let f0 = marks.return_fidelity[0];
    let f_period = marks.return_fidelity[2];
    let target = marks.target_fidelity[1];
    let idle = curve.idle_population.iter().cloned().fold(0.0, f64::max);
    let elapsed = start.elapsed();
    Outcome {
        pass: (f0 - 1.0).abs() <= PERIOD_TOL
            && (f_period - 1.0).abs() <= PERIOD_TOL
            && target >= 1.0 - TRANSFER_TOL
            && idle <= IDLE_TOL
            && elapsed < TRANSFER_BUDGET,
        detail: format!(
            "F(0)={f0:.12}, F({period:.4})={f_period:.12}, F_target({half:.4})={target:.12}, max idle population {idle:.1e}, {elapsed:.2?}"
        ),
    }
}

fn total_spin_squared(spec: &RingSpec) -> ComplexMatrix {
    let dim = spec.hilbert_dim();
    let mut s2 = ComplexMatrix::zeros(dim, dim);
    for c in [SpinComponent::X, SpinComponent::Y, SpinComponent::Z] {
        let mut total = ComplexMatrix::zeros(dim, dim);
        for site in 0..spec.len() {
            total = &total + &spec.site_operator(site, c);
        }
        s2 = &s2 + &(&total * &total);
    }
    s2
}

fn microscopic_layer() -> Outcome {
    let start = Instant::now();
    let params = CrNiParams {
        chromium: 3,
        j: 17.0,
        a: 0.9,
        d: 0.3,
        variant: BondVariant::Literal,
    };
    let spec = params.spec().unwrap();
    let ring = encode_ring(&spec).unwrap();
    let enc = &ring.encoding;
    let labels_ok = (enc.total_sz[0] + 0.5).abs() < 1e-9 && (enc.total_sz[1] - 0.5).abs() < 1e-9;
    let s2 = total_spin_squared(&spec);
    let s2_values: Vec<f64> = [&enc.ket0, &enc.ket1]
        .iter()
        .map(|k| s2.sandwich(k, k).unwrap().re)
        .collect();

    let template = AnisotropyTemplate {
        ring: params,
        linkers: vec![Linker::new(0, 1, 1.0), Linker::new(3, 3, 1.0)],
        ratio: Some(LinkerRatio {
            scaled: 1,
            reference: 0,
        }),
        gamma_scale: 1.0,
    };
    let grid: Vec<f64> = (0..=100).map(|j| 5.0 * j as f64 / 100.0).collect();
    let crossings = linker_ratio_crossings(&template, &grid, 0.0).unwrap();
    let roots: Vec<f64> = crossings
        .iter()
        .filter(|c| c.kind == CrossingKind::Continuous)
        .map(|c| c.location)
        .collect();
    let poles: Vec<f64> = crossings
        .iter()
        .filter(|c| c.kind == CrossingKind::Pole)
        .map(|c| c.location)
        .collect();

    let base = effective_coupling(&ring.elements, &ring.elements, &template.linkers).unwrap();
    let mut scale_dev = 0.0f64;
    for s in [1e-3, 0.5, 7.0, 1e3] {
        let scaled: Vec<Linker> = template
            .linkers
            .iter()
            .map(|l| Linker {
                exchange: s * l.exchange,
                ..*l
            })
            .collect();
        let p = effective_coupling(&ring.elements, &ring.elements, &scaled).unwrap();
        scale_dev = scale_dev.max((p.delta - base.delta).abs());
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: enc.gap > 0.0
            && labels_ok
            && roots.len() == 1
            && scale_dev <= SCALE_INVARIANCE_TOL
            && elapsed < RING_BUDGET,
        detail: format!(
            "gap {:.4}, S_z labels {:?}, <S^2> {:.4?}; delta(b) on [0,5]: sign change at b={:.4?}, pole at b={:.4?}; scale deviation {scale_dev:.1e}; {elapsed:.2?}",
            enc.gap, enc.total_sz, s2_values, roots, poles
        ),
    }
}

fn full_space_check(net: &StarNetwork, start: &SubspaceState, t: f64, worst: &mut f64, leak: &mut f64) {
    let reference = StarPropagator::numerical(net).unwrap().evolve(start, t).unwrap();
    for conv in [ZConvention::HalfSpin, ZConvention::Pauli] {
        let (amps, l) = propagate_full_space(net, conv, start, t).unwrap();
        *worst = worst.max(max_abs_diff(&amps, reference.amplitudes()));
        *leak = leak.max(l);
    }
}

fn oracle_closure() -> Outcome {
    let (mut worst, mut leak) = (0.0f64, 0.0f64);
    let mut protocol_err = 0.0f64;

    for plan in center_plans() {
        full_space_check(&plan.network, &plan.initial_state(), plan.t_w, &mut worst, &mut leak);
        let (amps, _) =
            propagate_full_space(&plan.network, ZConvention::HalfSpin, &plan.initial_state(), plan.t_w).unwrap();
        let state = SubspaceState::new(amps).unwrap();
        protocol_err = protocol_err.max(generation_error(&state));
    }

    let plan = three_ring_site_plan(0.0);
    assert_eq!(plan.source, WSource::Site(2));
    full_space_check(&plan.network, &plan.initial_state(), plan.t_w, &mut worst, &mut leak);
    let (amps, _) = propagate_full_space(&plan.network, ZConvention::Pauli, &plan.initial_state(), plan.t_w).unwrap();
    let corrected = apply_phase_correction(&SubspaceState::new(amps).unwrap(), 2, plan.chi).unwrap();
    protocol_err = protocol_err.max(generation_error(&corrected));

    let program = transfer_program();
    let half = 2.0 * PI / program.network.omega();
    for t in [0.0, 0.5 * half, half, 1.5 * half, 2.0 * half] {
        full_space_check(&program.network, &program.initial_state(), t, &mut worst, &mut leak);
    }
    let (amps, _) =
        propagate_full_space(&program.network, ZConvention::HalfSpin, &program.initial_state(), half).unwrap();
    let target = program.target_state().fidelity(&SubspaceState::new(amps).unwrap());
    protocol_err = protocol_err.max(1.0 - target);

    // reported only: the convention gap away from C = 0
    let gapped = three_ring_site_plan(0.5);
    let reference = StarPropagator::numerical(&gapped.network)
        .unwrap()
        .evolve(&gapped.initial_state(), gapped.t_w)
        .unwrap();
    let (half_amps, _) = propagate_full_space(
        &gapped.network,
        ZConvention::HalfSpin,
        &gapped.initial_state(),
        gapped.t_w,
    )
    .unwrap();
    let (pauli_amps, _) =
        propagate_full_space(&gapped.network, ZConvention::Pauli, &gapped.initial_state(), gapped.t_w).unwrap();

    Outcome {
        pass: worst <= CLOSURE_TOL && protocol_err <= CLOSURE_TOL && leak <= LEAKAGE_TOL,
        detail: format!(
            "C=0 amplitude deviation {worst:.2e}, protocol error {protocol_err:.2e} (tol {CLOSURE_TOL:.0e}), leakage {leak:.1e} (tol {LEAKAGE_TOL:.0e}); C=0.5 site plan deviation reported: halfspin {:.3e}, pauli {:.3e}",
            max_abs_diff(&half_amps, reference.amplitudes()),
            max_abs_diff(&pauli_amps, reference.amplitudes()),
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("spectral identity", spectral_identity),
        ("closed-form propagators", closed_form_propagators),
        ("W generation from center", w_from_center),
        ("W generation from site", w_from_site),
        ("fluctuation sweep", fluctuation_reproduction),
        ("L-qubit transfer", transfer_reproduction),
        ("microscopic ring layer", microscopic_layer),
        ("full-space closure", oracle_closure),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        if !outcome.pass {
            failures += 1;
        }
        println!(
            "criterion {} [{}] {name}: {}",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
