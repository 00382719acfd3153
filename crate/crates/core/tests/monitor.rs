//! Estimate-monitor validation on homogeneous and equivariant traces.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use once_cell::sync::Lazy;
use pinchflow_core::curvature::PinchingParams;
use pinchflow_core::equivariant::{
    run, DtPolicy, EquivariantScenario, ProfileSpec, SymmetryType,
};
use pinchflow_core::homogeneous;
use pinchflow_core::monitor::{
    self, check_estimates, class_c_bounds, convexity_frontier, isotonic_nonincreasing,
    lp_decay, residual_f_eta, ThetaVariant,
};
use pinchflow_core::trace::FlowTrace;

fn params(n: usize, m: usize, alpha: f64, k: f64) -> PinchingParams {
    PinchingParams::unbounded(n, m, alpha, k).unwrap()
}

fn dumbbell_params() -> PinchingParams {
    PinchingParams::new(4, 2, 0.25, 1.0, 8.0, 120.0).unwrap()
}

static DUMBBELL: Lazy<FlowTrace> = Lazy::new(|| {
    let pr = dumbbell_params();
    let scen = EquivariantScenario {
        sym: SymmetryType::new(1, 4).unwrap(),
        profile: ProfileSpec::Dumbbell { neck_ratio: 0.18, bulge_ratio: 0.7, neck_length: 0.5 },
        resolution: 256,
        horizon: 0.1,
        snapshot_dt: 5e-4,
        dt_policy: DtPolicy { singular_a2_over_k: 1e6, ..Default::default() },
    };
    run(&scen, &pr).unwrap()
});

#[test]
fn ancient_trace_decays_vacuously() {
    let pr = params(4, 2, 0.5, 1.0);
    let trace = homogeneous::ancient_hyperparallel(&pr, 1.5, -4.0, 0.05).unwrap();
    let report = check_estimates(&trace, &pr, &[0.01]).unwrap();
    // Umbilic spectra keep (f_0)_+ identically zero.
    assert!(report.decay.series.iter().all(|(_, v)| *v == 0.0));
    assert!(report.decay.satisfied);
    assert!(report.preservation.preserved);
    // ODE traces have no derivative norms: those sub-checks are flagged,
    // never silently passed.
    assert!(report.gradient.is_none());
    assert!(!report.not_applicable.is_empty());

    // L^p decay is a vacuous pass.
    let lp = lp_decay(&trace, &pr, 10.0, 0.05, 0.001).unwrap();
    assert!(lp.vacuous && lp.satisfied);
}

#[test]
fn equator_trace_is_trivial() {
    let pr = params(3, 1, 0.5, 1.0);
    let trace = homogeneous::hyperparallel_flow(
        &pr,
        std::f64::consts::FRAC_PI_2,
        1.0,
        0.05,
    )
    .unwrap();
    let report = check_estimates(&trace, &pr, &[0.01]).unwrap();
    assert!(report.decay.series.iter().all(|(_, v)| *v == 0.0));
    for c in &report.cylindrical {
        assert!(c.c_eta <= 0.0 + 1e-12);
    }
    // No singularity: the existence-time bound is trivially satisfied.
    assert!(report.t_bound.t_obs.is_none());
    assert!(report.t_bound.satisfied.is_none());
}

#[test]
fn class_bounds_identity_is_exact() {
    for (n, m, alpha, theta) in [(4usize, 2usize, 0.25, 120.0), (5, 2, 0.5, 10.0), (7, 3, 0.9, 3.0)]
    {
        let pr = PinchingParams::new(n, m, alpha, 2.0, 5.0, theta).unwrap();
        let b = class_c_bounds(&pr, ThetaVariant::Theta);
        let nf = n as f64;
        assert_relative_eq!(
            (2.0 * nf * b.lambda0_small).exp(),
            1.0 + nf / (nf + b.lambda0_big),
            max_relative = 1e-15
        );
        // The gradient window opens before the guaranteed existence time.
        assert!(b.t_lower > b.lambda0_small / pr.k);
    }
}

#[test]
fn cylindrical_constants_monotone_in_eta() {
    let pr = dumbbell_params();
    let report = check_estimates(&DUMBBELL, &pr, &[0.004, 0.008, 0.016]).unwrap();
    let c: Vec<f64> = report.cylindrical.iter().map(|c| c.c_eta).collect();
    assert!(c[0] >= c[1] && c[1] >= c[2], "{c:?}");
}

#[test]
fn subsampled_sups_never_exceed_full_trace() {
    let pr = dumbbell_params();
    let full = check_estimates(&DUMBBELL, &pr, &[0.01]).unwrap();
    let sub = check_estimates(&DUMBBELL.subsampled(3), &pr, &[0.01]).unwrap();
    assert!(sub.preservation.max_g.value <= full.preservation.max_g.value + 1e-12);
    assert!(
        sub.gradient.as_ref().unwrap().sup_crude.value
            <= full.gradient.as_ref().unwrap().sup_crude.value + 1e-12
    );
    assert!(sub.hessian.as_ref().unwrap().sup.value <= full.hessian.as_ref().unwrap().sup.value + 1e-12);
    for (a, b) in sub.decay.series.iter().zip(full.decay.series.iter().step_by(3)) {
        assert_abs_diff_eq!(a.0, b.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-12);
    }
}

#[test]
fn reports_are_parabolic_scale_invariant() {
    let pr = dumbbell_params();
    let c = 3.0;
    let scaled_trace = DUMBBELL.parabolic_scaled(c);
    let pr_scaled = PinchingParams::new(4, 2, 0.25, c * c, 8.0, 120.0).unwrap();
    let r1 = check_estimates(&DUMBBELL, &pr, &[0.01]).unwrap();
    let r2 = check_estimates(&scaled_trace, &pr_scaled, &[0.01]).unwrap();

    assert_relative_eq!(
        r1.decay.max_excess_factor,
        r2.decay.max_excess_factor,
        max_relative = 1e-8
    );
    assert_relative_eq!(r1.cylindrical[0].c_eta, r2.cylindrical[0].c_eta, max_relative = 1e-8);
    assert_relative_eq!(
        r1.gradient.as_ref().unwrap().sup_crude.value,
        r2.gradient.as_ref().unwrap().sup_crude.value,
        max_relative = 1e-8
    );
    assert_relative_eq!(
        r1.hessian.as_ref().unwrap().sup.value,
        r2.hessian.as_ref().unwrap().sup.value,
        max_relative = 1e-8
    );
    assert_relative_eq!(
        r1.kato.as_ref().unwrap().min_margin,
        r2.kato.as_ref().unwrap().min_margin,
        max_relative = 1e-6,
        epsilon = 1e-10
    );
    // e^{2nKT} is dimensionless.
    assert_relative_eq!(
        r1.t_bound.lhs.unwrap(),
        r2.t_bound.lhs.unwrap(),
        max_relative = 1e-8
    );
}

#[test]
fn residual_vanishes_on_the_equator() {
    let pr = params(3, 1, 0.5, 1.0);
    let scen = EquivariantScenario {
        sym: SymmetryType::new(2, 2).unwrap(),
        profile: ProfileSpec::GeodesicSphere { rho0: std::f64::consts::FRAC_PI_2 },
        resolution: 128,
        horizon: 0.02,
        snapshot_dt: 2e-3,
        dt_policy: DtPolicy::default(),
    };
    let trace = run(&scen, &pr).unwrap();
    let res = residual_f_eta(&trace, &pr, 3, 0.01).unwrap();
    assert!(res.max_abs < 1e-7 * res.scale.max(1.0), "{res:?}");
}

#[test]
fn residual_small_on_geodesic_sphere() {
    let pr = params(3, 1, 0.5, 1.0);
    let scen = EquivariantScenario {
        sym: SymmetryType::new(2, 2).unwrap(),
        profile: ProfileSpec::GeodesicSphere { rho0: 1.0 },
        resolution: 512,
        horizon: 0.02,
        snapshot_dt: 1e-3,
        dt_policy: DtPolicy::default(),
    };
    let trace = run(&scen, &pr).unwrap();
    let res = residual_f_eta(&trace, &pr, 5, 0.01).unwrap();
    assert!(
        res.max_abs < 1e-3 * res.scale,
        "residual {:.3e} vs scale {:.3e}",
        res.max_abs,
        res.scale
    );
}

#[test]
fn residual_order_under_grid_doubling() {
    // Smooth perturbed band; residual at a matched time must drop by at
    // least 3.5 when the grid doubles.
    let pr = params(4, 1, 0.3, 1.0);
    let run_at = |res: usize| -> FlowTrace {
        let scen = EquivariantScenario {
            sym: SymmetryType::new(2, 3).unwrap(),
            profile: ProfileSpec::CliffordBand { phi0: 0.7, amplitude: 0.08, mode: 2 },
            resolution: res,
            horizon: 6e-3,
            snapshot_dt: 3e-4,
            dt_policy: DtPolicy { regrid_tol: 0.2, ..Default::default() },
        };
        run(&scen, &pr).unwrap()
    };
    let coarse = run_at(192);
    let fine = run_at(384);
    let rc = residual_f_eta(&coarse, &pr, 8, 0.01).unwrap();
    let rf = residual_f_eta(&fine, &pr, 8, 0.01).unwrap();
    assert_abs_diff_eq!(rc.t, rf.t, epsilon = 1e-9);
    let factor = rc.max_abs / rf.max_abs;
    assert!(factor >= 3.5, "residual drop {factor:.2} ({:.3e} -> {:.3e})", rc.max_abs, rf.max_abs);
}

#[test]
fn convexity_frontier_shapes() {
    // Shrinking sphere: convex, frontier identically zero.
    let pr = params(3, 1, 0.5, 1.0);
    let trace = homogeneous::hyperparallel_flow(&pr, 1.0, 1.0, 0.01).unwrap();
    let frontier = convexity_frontier(&trace, &[0.05, 0.1, 0.2]);
    assert!(frontier.iter().all(|(_, h)| *h == 0.0));

    // Zero-amplitude band: lambda_1/|H| is constant along the trace, so the
    // frontier jumps from (trace max) to 0 at eta = -lambda_1/|H|.
    let pr4 = params(4, 1, 0.3, 1.0);
    let torus = homogeneous::clifford_flow(&pr4, 1.1, 1.0, 0.01).unwrap();
    let mut ratios = Vec::new();
    for s in &torus.snapshots {
        let p = &s.points[0];
        ratios.push(-p.lambda_min / p.h.abs());
    }
    let eta_star = ratios.iter().cloned().fold(0.0f64, f64::max);
    let lo = convexity_frontier(&torus, &[eta_star * 0.9]);
    let hi = convexity_frontier(&torus, &[eta_star * 1.1]);
    assert!(lo[0].1 > 0.0);
    assert_eq!(hi[0].1, 0.0);
}

#[test]
fn dumbbell_frontier_finite_and_monotone() {
    let frontier = convexity_frontier(&DUMBBELL, &[0.05, 0.1, 0.2]);
    let max_h = DUMBBELL
        .snapshots
        .iter()
        .map(|s| s.max_h_sq())
        .fold(0.0f64, f64::max)
        .sqrt();
    let cleaned = isotonic_nonincreasing(&frontier.iter().map(|f| f.1).collect::<Vec<_>>());
    for w in cleaned.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
    for (_, h) in &frontier {
        assert!(*h < 0.5 * max_h, "h_eta {h} vs max |H| {max_h}");
    }
}

#[test]
fn isotonic_cleanup_is_a_nonincreasing_projection() {
    let vals = [5.0, 6.0, 3.0, 3.5, 1.0];
    let fit = isotonic_nonincreasing(&vals);
    for w in fit.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
    // Pool-adjacent-violators preserves the total mass of pooled blocks.
    assert_relative_eq!(
        fit.iter().sum::<f64>(),
        vals.iter().sum::<f64>(),
        max_relative = 1e-12
    );
    // Already-monotone input is untouched.
    let mono = [4.0, 2.0, 1.0];
    assert_eq!(isotonic_nonincreasing(&mono), mono.to_vec());
}

#[test]
fn lp_decay_on_dumbbell_is_satisfied_across_p() {
    let pr = dumbbell_params();
    for p_exp in [5.0, 10.0, 20.0] {
        let sigma = monitor::LP_ELL / p_exp.sqrt();
        let lp = lp_decay(&DUMBBELL, &pr, p_exp, sigma, 0.01).unwrap();
        assert!(!lp.vacuous);
        assert!(lp.satisfied, "p = {p_exp}: {:?}", lp.fitted_rate);
        // The fitted rate must beat the guaranteed one.
        assert!(lp.fitted_rate.unwrap() <= lp.bound_rate);
    }
}
