//! Profile initializers and arclength resampling.

use serde::{Deserialize, Serialize};

use super::{classify_class_c, cross, dist, normalize, AxisEnd, FlowState, SymmetryType, Topology};
use crate::curvature::PinchingParams;
use crate::error::{Error, Result};

/// Initial profile descriptors.
///
/// * `geodesic_sphere`: the latitude at intrinsic radius `rho0` about the
///   `z`-pole; collapses to a round point (or its antipode).
/// * `clifford_band`: the torus profile about the `a`-pole at radial angle
///   `phi0`, optionally perturbed by `amplitude * cos(mode * ...)` along the
///   band.
/// * `dumbbell`: two mirror-symmetric bulbs joined by a thin neck over an
///   `S^{p-1} x S^{q-1}` orbit; `neck_ratio` and `bulge_ratio` set the neck
///   and bulb heights as fractions of the quarter-meridian, `tip_angle` the
///   position of the bulb cap on the `{b = 0}` axis, and `bulb_exponent`
///   and bulb heights as fractions of the feasible range, `neck_length` the
///   arclength of the constant-radius neck tube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    GeodesicSphere {
        rho0: f64,
    },
    CliffordBand {
        phi0: f64,
        amplitude: f64,
        mode: usize,
    },
    Dumbbell {
        neck_ratio: f64,
        bulge_ratio: f64,
        /// Arclength of the straight neck tube between the mirror waist and
        /// the blend into the bulb.
        #[serde(default = "default_neck_length")]
        neck_length: f64,
    },
}

fn default_neck_length() -> f64 {
    0.5
}

/// Builds a valid [`FlowState`] at `t = 0` from a descriptor, resampled to
/// `resolution + 1` uniformly spaced points, with the class verdict
/// attached.
pub fn init_profile(
    spec: &ProfileSpec,
    sym: SymmetryType,
    params: &PinchingParams,
    resolution: usize,
) -> Result<FlowState> {
    if sym.n() != params.n {
        return Err(Error::Profile(format!(
            "symmetry (p, q) = ({}, {}) generates dimension {} but params.n = {}",
            sym.p,
            sym.q,
            sym.n(),
            params.n
        )));
    }
    if resolution < 16 {
        return Err(Error::Profile("resolution must be at least 16".into()));
    }
    let r = 1.0 / params.k.sqrt();

    let (curve, topology): (Box<dyn Fn(f64) -> [f64; 3]>, Topology) = match *spec {
        ProfileSpec::GeodesicSphere { rho0 } => {
            let theta = params.k.sqrt() * rho0;
            if !(theta > 0.0 && theta < std::f64::consts::PI) {
                return Err(Error::Profile(format!(
                    "rho0 = {rho0} outside (0, pi/sqrt(K))"
                )));
            }
            let f = move |tau: f64| {
                let psi = std::f64::consts::FRAC_PI_2 * tau;
                [
                    r * theta.sin() * psi.cos(),
                    r * theta.sin() * psi.sin(),
                    r * theta.cos(),
                ]
            };
            (Box::new(f) as _, Topology::Arc { start: AxisEnd::B, end: AxisEnd::A })
        }
        ProfileSpec::CliffordBand { phi0, amplitude, mode } => {
            if !(phi0 > 0.0 && phi0 < std::f64::consts::FRAC_PI_2) {
                return Err(Error::Profile(format!("phi0 = {phi0} outside (0, pi/2)")));
            }
            let room = phi0.min(std::f64::consts::FRAC_PI_2 - phi0);
            if amplitude.abs() >= 0.95 * room {
                return Err(Error::Profile(format!(
                    "amplitude {amplitude} leaves the band range at phi0 = {phi0}"
                )));
            }
            let f = move |tau: f64| {
                let chi = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * tau;
                let theta = phi0
                    + amplitude * (mode as f64 * (chi + std::f64::consts::FRAC_PI_2)).cos();
                [
                    r * theta.cos(),
                    r * theta.sin() * chi.cos(),
                    r * theta.sin() * chi.sin(),
                ]
            };
            (Box::new(f) as _, Topology::Arc { start: AxisEnd::B, end: AxisEnd::B })
        }
        ProfileSpec::Dumbbell { neck_ratio, bulge_ratio, neck_length } => {
            if !(neck_ratio > 0.0 && neck_ratio < 1.0 && bulge_ratio > 0.0 && bulge_ratio <= 1.0)
            {
                return Err(Error::Profile(format!(
                    "need neck_ratio ({neck_ratio}) in (0, 1) and bulge_ratio ({bulge_ratio}) \
                     in (0, 1]"
                )));
            }
            if !(0.05..=1.2).contains(&neck_length) {
                return Err(Error::Profile(format!(
                    "neck_length = {neck_length} outside [0.05, 1.2]"
                )));
            }
            let pts = dumbbell_polyline(neck_ratio, bulge_ratio, neck_length, r, resolution)?;
            let grid = resample_uniform(
                &pts,
                &Topology::Arc { start: AxisEnd::B, end: AxisEnd::A },
                resolution + 1,
                r,
            );
            let mut state = FlowState {
                sym,
                k: params.k,
                topology: Topology::Arc { start: AxisEnd::B, end: AxisEnd::A },
                grid,
                t: 0.0,
                regrid_epoch: 0,
                class_verdict: None,
            };
            state.validate()?;
            state.class_verdict = Some(classify_class_c(&state, params)?);
            return Ok(state);
        }
    };

    // Sample the analytic curve at near-uniform arclength (so every raw
    // point lies exactly on the curve and the spacing varies smoothly),
    // then run the high-order resampler.
    let raw = sample_arclength_uniform(curve.as_ref(), 4 * resolution);
    let grid = resample_uniform(&raw, &topology, resolution + 1, r);
    let mut state = FlowState {
        sym,
        k: params.k,
        topology,
        grid,
        t: 0.0,
        regrid_epoch: 0,
        class_verdict: None,
    };
    state.validate()?;
    state.class_verdict = Some(classify_class_c(&state, params)?);
    Ok(state)
}


/// Profile-curve ODE state on the unit orbit sphere: `P' = T`,
/// `T' = -kappa nu - P` with `nu = T x P`.
fn profile_rk4_step(p: &mut [f64; 3], t: &mut [f64; 3], kappa: impl Fn(f64) -> f64, s: f64, h: f64) {
    let f = |p: [f64; 3], t: [f64; 3], s: f64| -> ([f64; 3], [f64; 3]) {
        let nu = cross(t, p);
        let k = kappa(s);
        (t, [-k * nu[0] - p[0], -k * nu[1] - p[1], -k * nu[2] - p[2]])
    };
    let (k1p, k1t) = f(*p, *t, s);
    let adv = |p: &[f64; 3], t: &[f64; 3], dp: &[f64; 3], dt: &[f64; 3], c: f64| {
        (
            [p[0] + c * dp[0], p[1] + c * dp[1], p[2] + c * dp[2]],
            [t[0] + c * dt[0], t[1] + c * dt[1], t[2] + c * dt[2]],
        )
    };
    let (p2, t2) = adv(p, t, &k1p, &k1t, 0.5 * h);
    let (k2p, k2t) = f(p2, t2, s + 0.5 * h);
    let (p3, t3) = adv(p, t, &k2p, &k2t, 0.5 * h);
    let (k3p, k3t) = f(p3, t3, s + 0.5 * h);
    let (p4, t4) = adv(p, t, &k3p, &k3t, h);
    let (k4p, k4t) = f(p4, t4, s + h);
    for c in 0..3 {
        p[c] += h / 6.0 * (k1p[c] + 2.0 * k2p[c] + 2.0 * k3p[c] + k4p[c]);
        t[c] += h / 6.0 * (k1t[c] + 2.0 * k2t[c] + 2.0 * k3t[c] + k4t[c]);
    }
    // Re-project onto the unit sphere / unit tangent.
    let pn = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    for c in 0..3 {
        p[c] /= pn;
    }
    let tp = t[0] * p[0] + t[1] * p[1] + t[2] * p[2];
    for c in 0..3 {
        t[c] -= tp * p[c];
    }
    let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    for c in 0..3 {
        t[c] /= tn;
    }
}

fn smootherstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// Dumbbell profile built from three curvature regimes along arclength
/// (traversing waist -> tip): a constant-radius neck tube (`kappa =
/// tan(chi_n)` in the build orientation), a monotone smootherstep ramp, and
/// a geodesic-circle bulb (`kappa = -cot(rho_b)`). The blend length is shot
/// so the bulb circle centers exactly on the `{b = 0}` axis, which makes
/// the far crossing (the tip) orthogonal. Curvature never leaves
/// `[-cot(rho_b), tan(chi_n)]`, so every point of the profile has a
/// sphere- or tube-like spectrum.
///
/// Returns the polyline traversed tip-first (cap on `{b = 0}` first, waist
/// on `{a = 0}` last), scaled to the orbit sphere radius.
fn dumbbell_polyline(
    neck_ratio: f64,
    bulge_ratio: f64,
    neck_length: f64,
    radius: f64,
    resolution: usize,
) -> Result<Vec<[f64; 3]>> {
    let chi_n = neck_ratio * std::f64::consts::FRAC_PI_2;
    let rho_max = ((std::f64::consts::PI - neck_length - 1.15) / 2.0).min(1.2);
    if rho_max <= chi_n + 0.02 {
        return Err(Error::Profile(format!(
            "no room for a bulb above the neck (neck_ratio = {neck_ratio}, \
             neck_length = {neck_length})"
        )));
    }
    let rho_b = chi_n + bulge_ratio * (rho_max - chi_n);
    let kappa_tube = chi_n.tan();
    let kappa_bulb = -1.0 / rho_b.tan();
    // Build-direction curvature program (waist -> tip): neck tube, a
    // bounded concave flare that pitches the tangent outward (every
    // neck-to-bulb transition needs the trumpet-bell inflection, and the
    // pinching margin caps how hard it may turn), a free geodesic climb,
    // and the convex rejoin onto the bulb circle. The flare hold length is
    // shot so the bulb circle centers exactly on the `{b = 0}` axis.
    let a_flare = 0.9f64;
    let w_ramp = 0.15f64;
    let w_climb = 0.15f64;
    let w_join = 0.25f64;
    let kappa_prog = move |w_turn: f64, s: f64| -> f64 {
        let s1 = w_ramp;
        let s2 = s1 + w_turn;
        let s3 = s2 + w_ramp;
        let s4 = s3 + w_climb;
        let s5 = s4 + w_join;
        if s <= 0.0 {
            kappa_tube
        } else if s <= s1 {
            kappa_tube + (a_flare - kappa_tube) * smootherstep(s / w_ramp)
        } else if s <= s2 {
            a_flare
        } else if s <= s3 {
            a_flare * (1.0 - smootherstep((s - s2) / w_ramp))
        } else if s <= s4 {
            0.0
        } else if s <= s5 {
            kappa_bulb * smootherstep((s - s4) / w_join)
        } else {
            kappa_bulb
        }
    };
    let blend_len = move |w_turn: f64| 2.0 * w_ramp + w_turn + w_climb + w_join;

    // Center height of the bulb circle for a given flare hold length.
    let center_height = |w_turn: f64| -> f64 {
        let mut p = [0.0, chi_n.sin(), chi_n.cos()];
        let mut t = [1.0, 0.0, 0.0];
        let total = blend_len(w_turn);
        let steps = 1600usize;
        let h = total / steps as f64;
        let mut s = 0.0;
        for _ in 0..steps {
            profile_rk4_step(&mut p, &mut t, |s| kappa_prog(w_turn, s), s, h);
            s += h;
        }
        let nu = cross(t, p);
        p[1] * rho_b.cos() + nu[1] * rho_b.sin()
    };

    // Bracket and bisect on the hold length.
    let mut lo = 0.0f64;
    let mut f_lo = center_height(lo);
    let mut hi = lo;
    let mut found = false;
    for _ in 0..40 {
        hi += 0.1;
        if hi > 3.0 {
            break;
        }
        let f_hi = center_height(hi);
        if f_lo * f_hi <= 0.0 {
            found = true;
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    if !found {
        return Err(Error::Profile(
            "bulb blend does not close onto the axis; adjust neck/bulge".into(),
        ));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let f_mid = center_height(mid);
        if f_lo * f_mid <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    let w_turn = 0.5 * (lo + hi);

    // Full build: tube + blend + bulb until the axis crossing.
    let kappa_of = move |s: f64| -> f64 { kappa_prog(w_turn, s - neck_length) };
    let build = |h: f64, max_steps: usize| -> (Vec<[f64; 3]>, Option<f64>) {
        let mut p = [0.0, chi_n.sin(), chi_n.cos()];
        let mut t = [1.0, 0.0, 0.0];
        let mut pts = vec![p];
        let mut s = 0.0;
        for step in 0..max_steps {
            profile_rk4_step(&mut p, &mut t, kappa_of, s, h);
            s += h;
            pts.push(p);
            // Look for the tip once past the bulb top.
            if step > 10 && p[1] <= 0.0 {
                return (pts, Some(s));
            }
        }
        (pts, None)
    };

    let (_, crossing) = build(5e-4, 40_000);
    let Some(s_end_coarse) = crossing else {
        return Err(Error::Profile("bulb never returns to the {b = 0} axis".into()));
    };
    // Refine the crossing arclength by bisection on the last step.
    let locate = |s_hint: f64| -> f64 {
        let mut lo_s = (s_hint - 2e-3).max(0.0);
        let mut hi_s = s_hint + 2e-3;
        let b_at = |s_target: f64| -> f64 {
            let steps = 4000usize;
            let h = s_target / steps as f64;
            let mut p = [0.0, chi_n.sin(), chi_n.cos()];
            let mut t = [1.0, 0.0, 0.0];
            let mut s = 0.0;
            for _ in 0..steps {
                profile_rk4_step(&mut p, &mut t, kappa_of, s, h);
                s += h;
            }
            p[1]
        };
        for _ in 0..60 {
            let mid = 0.5 * (lo_s + hi_s);
            if b_at(mid) > 0.0 {
                lo_s = mid;
            } else {
                hi_s = mid;
            }
        }
        0.5 * (lo_s + hi_s)
    };
    let s_tip = locate(s_end_coarse);

    let n_dense = 4 * resolution;
    let h = s_tip / n_dense as f64;
    let mut p = [0.0, chi_n.sin(), chi_n.cos()];
    let mut t = [1.0, 0.0, 0.0];
    let mut pts = Vec::with_capacity(n_dense + 1);
    pts.push(p);
    let mut s = 0.0;
    for _ in 0..n_dense {
        profile_rk4_step(&mut p, &mut t, kappa_of, s, h);
        s += h;
        pts.push(p);
    }
    // Clamp the tip exactly onto the axis and sanity-check the extent.
    let tip = pts.last_mut().unwrap();
    if tip[1].abs() > 1e-6 {
        return Err(Error::Profile(format!(
            "tip failed to land on the axis (b = {:.3e})",
            tip[1]
        )));
    }
    tip[1] = 0.0;
    let tipn = (tip[0] * tip[0] + tip[2] * tip[2]).sqrt();
    tip[0] /= tipn;
    tip[2] /= tipn;
    let tip_angle = tip[0].atan2(tip[2]);
    if !(0.1..=std::f64::consts::PI - 0.05).contains(&tip_angle) {
        return Err(Error::Profile(format!(
            "dumbbell does not fit on the meridian (tip angle {tip_angle:.3})"
        )));
    }
    for q in &pts {
        if q[0] < -1e-9 || q[1] < -1e-9 {
            return Err(Error::Profile("dumbbell leaves the quarter sphere".into()));
        }
    }
    pts.reverse();
    for q in &mut pts {
        for c in 0..3 {
            q[c] *= radius;
        }
    }
    Ok(pts)
}

/// Evaluates `curve` on `[0, 1]` at parameter values chosen so the returned
/// points are spaced nearly uniformly in arclength. Every point lies exactly
/// on the analytic curve.
fn sample_arclength_uniform(
    curve: &dyn Fn(f64) -> [f64; 3],
    segments: usize,
) -> Vec<[f64; 3]> {
    let probe = 8 * segments;
    let mut cum = Vec::with_capacity(probe + 1);
    cum.push(0.0);
    let mut prev = curve(0.0);
    for j in 1..=probe {
        let p = curve(j as f64 / probe as f64);
        let l = dist(prev, p);
        cum.push(cum[j - 1] + l);
        prev = p;
    }
    let total = cum[probe];
    let mut out = Vec::with_capacity(segments + 1);
    let mut cursor = 0usize;
    for j in 0..=segments {
        let target = total * j as f64 / segments as f64;
        while cursor + 1 < probe && cum[cursor + 1] < target {
            cursor += 1;
        }
        let seg = (cum[cursor + 1] - cum[cursor]).max(1e-300);
        let frac = (target - cum[cursor]) / seg;
        let tau = (cursor as f64 + frac) / probe as f64;
        out.push(curve(tau.clamp(0.0, 1.0)));
    }
    out
}

/// Resamples a polyline on the orbit sphere to `n_out` points at uniform
/// arclength (cubic Hermite in the chord parameter, then re-projected).
/// Arc endpoints are preserved exactly.
pub fn resample_uniform(
    pts: &[[f64; 3]],
    topology: &Topology,
    n_out: usize,
    radius: f64,
) -> Vec<[f64; 3]> {
    let m = pts.len();
    let mut s = vec![0.0; m];
    for i in 1..m {
        s[i] = s[i - 1] + dist(pts[i], pts[i - 1]);
    }
    let closed = matches!(topology, Topology::ClosedLoop);
    let total = if closed {
        s[m - 1] + dist(pts[m - 1], pts[0])
    } else {
        s[m - 1]
    };

    // Point and arclength at an index extended one step past each end:
    // wrap-around for loops, mirror continuation across the axis planes for
    // arcs.
    let at = |i: isize| -> ([f64; 3], f64) {
        if i >= 0 && (i as usize) < m {
            return (pts[i as usize], s[i as usize]);
        }
        if closed {
            if i < 0 {
                let idx = (i + m as isize) as usize;
                (pts[idx], s[idx] - total)
            } else {
                let idx = i as usize - m;
                (pts[idx], s[idx] + total)
            }
        } else if i < 0 {
            let j = (-i) as usize;
            let mut p = pts[j];
            let c = start_axis_coord(topology);
            p[c] = -p[c];
            (p, -s[j])
        } else {
            let j = 2 * (m - 1) - i as usize;
            let mut p = pts[j];
            let c = end_axis_coord(topology);
            p[c] = -p[c];
            (p, 2.0 * s[m - 1] - s[j])
        }
    };

    // Fourth-order tangents via 5-point Lagrange differentiation (valid for
    // arbitrary knot spacing). Low-order tangents leave a grid-frequency
    // sawtooth in the resampled positions that survives into discrete
    // second derivatives of the curvature fields downstream.
    let tangent = |i: isize| -> [f64; 3] {
        let mut xs = [0.0; 5];
        let mut ps = [[0.0; 3]; 5];
        for (o, off) in (-2..=2).enumerate() {
            let (p, sv) = at(i + off);
            xs[o] = sv;
            ps[o] = p;
        }
        let xc = xs[2];
        let mut out = [0.0; 3];
        for (j, pj) in ps.iter().enumerate() {
            // L_j'(xc): derivative of the j-th Lagrange basis at the center
            // node.
            let w = if j == 2 {
                let mut sum = 0.0;
                for (i2, xi) in xs.iter().enumerate() {
                    if i2 != 2 {
                        sum += 1.0 / (xc - xi);
                    }
                }
                sum
            } else {
                let mut prod = 1.0 / (xs[j] - xc);
                for (i2, xi) in xs.iter().enumerate() {
                    if i2 != j && i2 != 2 {
                        prod *= (xc - xi) / (xs[j] - xi);
                    }
                }
                prod
            };
            for c in 0..3 {
                out[c] += w * pj[c];
            }
        }
        out
    };

    let segs_out = if closed { n_out } else { n_out - 1 };
    let mut out = Vec::with_capacity(n_out);
    let mut cursor = 0usize;
    for j in 0..n_out {
        let target = total * j as f64 / segs_out as f64;
        if !closed && j == 0 {
            out.push(pts[0]);
            continue;
        }
        if !closed && j == n_out - 1 {
            out.push(pts[m - 1]);
            continue;
        }
        while cursor + 2 < m && s[cursor + 1] < target {
            cursor += 1;
        }
        let (p0, s0) = at(cursor as isize);
        let (p1, s1) = at(cursor as isize + 1);
        let dsg = s1 - s0;
        let t = ((target - s0) / dsg).clamp(0.0, 1.0);
        let m0 = tangent(cursor as isize);
        let m1 = tangent(cursor as isize + 1);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let mut p = [0.0; 3];
        for c in 0..3 {
            p[c] = h00 * p0[c] + h10 * dsg * m0[c] + h01 * p1[c] + h11 * dsg * m1[c];
        }
        let p = normalize(p);
        out.push([p[0] * radius, p[1] * radius, p[2] * radius]);
    }

    // Clamp roundoff-negative radii near the axes.
    for p in &mut out {
        for c in 0..2 {
            if p[c] < 0.0 && p[c] > -1e-11 * radius {
                p[c] = 0.0;
            }
        }
    }
    out
}

fn start_axis_coord(topology: &Topology) -> usize {
    match topology {
        Topology::Arc { start: AxisEnd::A, .. } => 0,
        Topology::Arc { start: AxisEnd::B, .. } => 1,
        Topology::ClosedLoop => 0,
    }
}

fn end_axis_coord(topology: &Topology) -> usize {
    match topology {
        Topology::Arc { end: AxisEnd::A, .. } => 0,
        Topology::Arc { end: AxisEnd::B, .. } => 1,
        Topology::ClosedLoop => 0,
    }
}
