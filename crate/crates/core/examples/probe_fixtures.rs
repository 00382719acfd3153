//! Candidate acceptance fixtures: class data, run character, timings.

use std::time::Instant;

use pinchflow_core::curvature::PinchingParams;
use pinchflow_core::equivariant::{
    classify_class_c, init_profile, run_from, DtPolicy, EquivariantScenario, ProfileSpec,
    SymmetryType,
};
use pinchflow_core::monitor;
use pinchflow_core::rescaler;

fn main() {
    // Dumbbell fixture.
    for res in [256usize, 384, 512] {
        let pr = PinchingParams::new(4, 2, 0.25, 1.0, 8.0, 120.0).unwrap();
        let sym = SymmetryType::new(1, 4).unwrap();
        let spec = ProfileSpec::Dumbbell { neck_ratio: 0.18, bulge_ratio: 0.7, neck_length: 0.5 };
        let t0 = Instant::now();
        let st = init_profile(&spec, sym, &pr, res).unwrap();
        let rep = classify_class_c(&st, &pr).unwrap();
        let scen = EquivariantScenario {
            sym,
            profile: spec,
            resolution: res,
            horizon: 0.1,
            snapshot_dt: 5e-4,
            dt_policy: DtPolicy { singular_a2_over_k: 1e6, ..Default::default() },
        };
        let trace = run_from(st, &scen, &pr).unwrap();
        let elapsed = t0.elapsed().as_secs_f64();
        let rec = rescaler::classify_type(&trace).unwrap();
        let report = monitor::check_estimates(&trace, &pr, &[0.005, 0.01]).unwrap();
        let grad = report.gradient.as_ref().unwrap();
        let hess = report.hessian.as_ref().unwrap();
        let kato = report.kato.as_ref().unwrap();
        let m_series = trace.max_a_norm_sq_series();
        let growth = m_series.iter().map(|x| x.1).fold(0.0f64, f64::max) / m_series[0].1;
        println!(
            "dumbbell N={res}: {:.2}s snaps={} in_class={} max_g={:+.2e} V={:.2} Th={:.1} \
             type={:?} sup={:.4} drift={:.3} growth={:.2e}",
            elapsed,
            trace.snapshots.len(),
            rep.in_class,
            rep.max_g,
            rep.v_measured,
            rep.theta_measured,
            rec.type_flag,
            rec.sup_functional,
            rec.sup_drift,
            growth
        );
        println!(
            "  decay: init={:.4} excess={:.4} | grad_crude={:.4e} hess={:.4e} kato_margin={:+.3e} preserved={} ({:+.3e} vs tol {:.3e})",
            report.decay.initial,
            report.decay.max_excess_factor,
            grad.sup_crude.value,
            hess.sup.value,
            kato.min_margin,
            report.preservation.preserved,
            report.preservation.max_g.value,
            report.preservation.tol,
        );
        let blow = rescaler::rescale_type_i(&trace, &pr).unwrap();
        let last = blow.rescaled.last().unwrap();
        println!(
            "  rescale: last best_k={} dist={:.4} cyl_ratio={:+.5} t_hat={:.5}",
            last.best_k, last.distance, last.cyl_ratio, blow.t_singular.unwrap()
        );
        let frontier = monitor::convexity_frontier(&trace, &[0.05, 0.1, 0.2]);
        println!("  frontier: {frontier:?}");
        println!("  t_bound: lhs={:?} rhs={:.4}", report.t_bound.lhs, report.t_bound.rhs_theta);
        for lp in &report.lp {
            println!(
                "  lp p={} sigma={:.4}: satisfied={} vacuous={} fitted={:?} bound={:.3}",
                lp.p, lp.sigma, lp.satisfied, lp.vacuous, lp.fitted_rate, lp.bound_rate
            );
        }
    }

    // Perturbed band fixture.
    let pr = PinchingParams::new(4, 2, 0.25, 1.0, 26.0, 40.0).unwrap();
    let sym = SymmetryType::new(2, 3).unwrap();
    let spec = ProfileSpec::CliffordBand { phi0: 0.3217, amplitude: 0.05, mode: 2 };
    let t0 = Instant::now();
    let st = init_profile(&spec, sym, &pr, 256).unwrap();
    let rep = classify_class_c(&st, &pr).unwrap();
    let scen = EquivariantScenario {
        sym,
        profile: spec,
        resolution: 256,
        horizon: 0.1,
        snapshot_dt: 5e-4,
        dt_policy: DtPolicy { singular_a2_over_k: 1e6, ..Default::default() },
    };
    let trace = run_from(st, &scen, &pr).unwrap();
    println!(
        "band N=256: {:.2}s snaps={} in_class={} max_g={:+.3e} V={:.2} Th={:.2} terminal={:?}",
        t0.elapsed().as_secs_f64(),
        trace.snapshots.len(),
        rep.in_class,
        rep.max_g,
        rep.v_measured,
        rep.theta_measured,
        trace.terminal
    );
    let rec = rescaler::classify_type(&trace).unwrap();
    println!("  type={:?} sup={:.4} drift={:.4}", rec.type_flag, rec.sup_functional, rec.sup_drift);
    let report = monitor::check_estimates(&trace, &pr, &[0.01]).unwrap();
    println!(
        "  decay init={:.4} excess={:.4} preserved={} kato={:+.3e}",
        report.decay.initial,
        report.decay.max_excess_factor,
        report.preservation.preserved,
        report.kato.as_ref().map(|k| k.min_margin).unwrap_or(f64::NAN)
    );
    let blow = rescaler::rescale_type_i(&trace, &pr).unwrap();
    let last = blow.rescaled.last().unwrap();
    println!("  rescale: best_k={} dist={:.4}", last.best_k, last.distance);
}
