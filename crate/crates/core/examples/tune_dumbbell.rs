//! Parameter scan for the dumbbell fixture: class membership of the initial
//! state and the singularity character of the run.

use pinchflow_core::curvature::PinchingParams;
use pinchflow_core::equivariant::{
    classify_class_c, init_profile, run_from, DtPolicy, EquivariantScenario, ProfileSpec,
    SymmetryType,
};
use pinchflow_core::rescaler;
use pinchflow_core::trace::TerminalEvent;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let full = args.iter().any(|a| a == "--run");
    let sym = SymmetryType::new(1, 4).unwrap();
    for alpha in [0.1, 0.25, 0.5] {
        let pr = PinchingParams::new(4, 2, alpha, 1.0, 100.0, 400.0).unwrap();
        for neck in [0.12, 0.18, 0.25] {
            for bulge in [0.5, 0.7, 0.9] {
                for tip in [0.3, 0.5, 0.8] {
                    for junction in [0.0] {
                        let _ = junction;
                        let spec = ProfileSpec::Dumbbell {
                            neck_ratio: neck,
                            bulge_ratio: bulge,
                            neck_length: tip,
                        };
                        let st = match init_profile(&spec, sym, &pr, 256) {
                            Ok(s) => s,
                            Err(e) => {
                                println!("a={alpha} n={neck} b={bulge} t={tip} j={junction}: INVALID {e}");
                                continue;
                            }
                        };
                        let rep = classify_class_c(&st, &pr).unwrap();
                        let mark = if rep.in_class { "IN " } else { "out" };
                        print!(
                            "a={alpha} n={neck} b={bulge} t={tip} j={junction}: {mark} max_g={:+.3e} V={:.1} Th={:.1}",
                            rep.max_g, rep.v_measured, rep.theta_measured
                        );
                        if full && rep.in_class {
                            let scen = EquivariantScenario {
                                sym,
                                profile: spec,
                                resolution: 256,
                                horizon: 2.0,
                                snapshot_dt: 0.002,
                                dt_policy: DtPolicy { singular_a2_over_k: 1e6, ..Default::default() },
                            };
                            match run_from(st, &scen, &pr) {
                                Ok(trace) => {
                                    let flag = rescaler::classify_type(&trace)
                                        .map(|r| format!("{:?} sup={:.3}", r.type_flag, r.sup_functional))
                                        .unwrap_or_else(|e| format!("({e})"));
                                    let diam_label = match &trace.terminal {
                                        TerminalEvent::Extinction { time } => format!("EXT t={time:.4}"),
                                        TerminalEvent::Singularity { time, .. } => format!("SING t={time:.4}"),
                                        other => format!("{other:?}"),
                                    };
                                    print!("  -> {diam_label} {flag}");
                                }
                                Err(e) => print!("  -> run error {e}"),
                            }
                        }
                        println!();
                    }
                }
            }
        }
    }
}
