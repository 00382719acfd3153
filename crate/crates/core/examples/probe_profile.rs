//! Pointwise diagnostics of one dumbbell profile.

use pinchflow_core::curvature::{g_m_alpha, PinchingParams};
use pinchflow_core::equivariant::{geometry, init_profile, ProfileSpec, SymmetryType};

fn main() {
    let pr = PinchingParams::new(4, 2, 0.25, 1.0, 100.0, 400.0).unwrap();
    let sym = SymmetryType::new(1, 4).unwrap();
    let spec = ProfileSpec::Dumbbell {
        neck_ratio: 0.18,
        bulge_ratio: 0.8,
        tip_angle: 2.0,
        junction: 0.5,
    };
    let st = init_profile(&spec, sym, &pr, 256).unwrap();
    let geo = geometry(&st).unwrap();
    let mut worst = (0usize, f64::NEG_INFINITY);
    for (i, g) in geo.iter().enumerate() {
        let gv = g_m_alpha(g.a_norm_sq, g.h, &pr);
        if gv > worst.1 {
            worst = (i, gv);
        }
    }
    println!("argmax g at {} of {}", worst.0, geo.len());
    for i in (0..geo.len()).step_by(8).chain([worst.0]) {
        let g = &geo[i];
        let p = st.grid[i];
        let gv = g_m_alpha(g.a_norm_sq, g.h, &pr);
        println!(
            "{:4} phi={:+.3} chi={:+.3} kappa={:+8.3} lam_b={:+8.3} H={:+8.3} |A|2={:9.3} g={:+9.3}",
            i,
            p[0].atan2(p[2]),
            p[1].asin(),
            g.kappa,
            g.lam_b,
            g.h,
            g.a_norm_sq,
            gv
        );
    }
}
