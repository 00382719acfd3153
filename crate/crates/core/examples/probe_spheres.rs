//! Criterion-2 style sphere extinction matrix at N = 1024.

use std::time::Instant;

use pinchflow_core::curvature::PinchingParams;
use pinchflow_core::equivariant::{run, DtPolicy, EquivariantScenario, ProfileSpec, SymmetryType};
use pinchflow_core::homogeneous;
use pinchflow_core::rescaler;

fn main() {
    let t_all = Instant::now();
    for n in [3usize, 4] {
        for k in [1.0f64, 4.0] {
            for rho0 in [std::f64::consts::PI / 6.0, std::f64::consts::PI / 3.0] {
                let pr = PinchingParams::new(n, 1, 0.5, k, 1e6, 1e6).unwrap();
                let sym = SymmetryType::new(2, n - 1).unwrap();
                let t0 = Instant::now();
                let scen = EquivariantScenario {
                    sym,
                    profile: ProfileSpec::GeodesicSphere { rho0 },
                    resolution: 1024,
                    horizon: 10.0,
                    snapshot_dt: 0.002 / k,
                    dt_policy: DtPolicy { singular_a2_over_k: 1e4, rtol: 2e-5, ..Default::default() },
                };
                let trace = run(&scen, &pr).unwrap();
                let (t_est, _) = rescaler::estimate_singular_time(&trace).unwrap();
                let t_exact =
                    homogeneous::hyperparallel_extinction_time(n, k, rho0).unwrap();
                let rel = (t_est - t_exact).abs() / t_exact;
                println!(
                    "n={n} K={k} rho0={rho0:.4}: T_est={t_est:.8} T_exact={t_exact:.8} rel={rel:.2e} ({:.2}s, {} snaps)",
                    t0.elapsed().as_secs_f64(),
                    trace.snapshots.len()
                );
            }
        }
    }
    println!("total: {:.2}s", t_all.elapsed().as_secs_f64());
}
