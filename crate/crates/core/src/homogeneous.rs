//! Exact ODE reductions of the flow for the two homogeneous families:
//! hyperparallels (geodesic spheres about a pole) and generalized Clifford
//! tori `S^m(r) x S^{n-m}(s)`.
//!
//! Orientation convention throughout: the normal is chosen so that geodesic
//! spheres of radius below the equator have `H > 0` and shrink, and so that
//! the torus mean curvature matches the closed form
//! `H = ((n-m) r^2 - m s^2)/(rs) sqrt(K)`.

use crate::curvature::{unit_sphere_volume, PinchingParams, ShapeSpectrum};
use crate::error::{Error, Result};
use crate::ode::integrate_to_times;
use crate::trace::{FlowTrace, PointSample, Snapshot, TerminalEvent, TraceKind};

/// Geodesic-sphere snapshot state: intrinsic radius and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperparallelState {
    pub rho: f64,
    pub t: f64,
}

/// Torus snapshot state: radial angle (`r = cos(phi)`, `s = sin(phi)`) and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliffordState {
    pub phi: f64,
    pub t: f64,
}

/// `H(rho) = n sqrt(K) cot(sqrt(K) rho)`; every principal curvature equals
/// `sqrt(K) cot(sqrt(K) rho)`.
pub fn hyperparallel_h(n: usize, k: f64, rho: f64) -> f64 {
    let u = k.sqrt() * rho;
    n as f64 * k.sqrt() * u.cos() / u.sin()
}

/// Extinction time of a geodesic sphere released at radius `rho0`:
/// `T = ln(1/|cos(sqrt(K) rho0)|) / (nK)` (the antipodal collapse for data
/// beyond the equator). `None` at the stationary equator.
pub fn hyperparallel_extinction_time(n: usize, k: f64, rho0: f64) -> Option<f64> {
    let c = (k.sqrt() * rho0).cos();
    if c.abs() < 1e-15 {
        None
    } else {
        Some((1.0 / c.abs()).ln() / (n as f64 * k))
    }
}

/// Radius at time `t` from the conservation `cos(u(t)) = cos(u0) e^{nKt}`.
pub fn hyperparallel_rho_at(n: usize, k: f64, rho0: f64, t: f64) -> f64 {
    let c = ((k.sqrt() * rho0).cos() * (n as f64 * k * t).exp()).clamp(-1.0, 1.0);
    c.acos() / k.sqrt()
}

/// Area of a geodesic sphere of intrinsic radius `rho`.
pub fn hyperparallel_area(n: usize, k: f64, rho: f64) -> f64 {
    let radius = (k.sqrt() * rho).sin() / k.sqrt();
    unit_sphere_volume(n) * radius.powi(n as i32)
}

/// Torus mean curvature as a function of the radial angle.
pub fn clifford_h(n: usize, m: usize, k: f64, phi: f64) -> f64 {
    let (c, s) = (phi.cos(), phi.sin());
    k.sqrt() * ((n - m) as f64 * c * c - m as f64 * s * s) / (c * s)
}

/// Radial angle of the minimal torus, `r^2 = m/n`.
pub fn minimal_clifford_angle(n: usize, m: usize) -> f64 {
    ((m as f64 / n as f64).sqrt()).acos()
}

/// `r^2(t) = m/n + (r0^2 - m/n) e^{2nKt}` along the torus flow.
pub fn clifford_r_sq_at(n: usize, m: usize, k: f64, phi0: f64, t: f64) -> f64 {
    let mn = m as f64 / n as f64;
    mn + (phi0.cos().powi(2) - mn) * (2.0 * n as f64 * k * t).exp()
}

fn hyperparallel_sample(n: usize, k: f64, rho: f64) -> PointSample {
    let u = k.sqrt() * rho;
    let c = k.sqrt() * u.cos() / u.sin();
    let radius = 1.0 / k.sqrt();
    PointSample {
        sigma: 0.0,
        a: radius * u.sin(),
        b: 0.0,
        z: radius * u.cos(),
        kappa: c,
        lam_a: c,
        lam_b: c,
        h: n as f64 * c,
        a_norm_sq: n as f64 * c * c,
        lambda_min: c,
        area_weight: hyperparallel_area(n, k, rho),
        grad_a_sq: None,
        hess_a_sq: None,
        grad_h_sq: None,
    }
}

fn clifford_sample(n: usize, m: usize, k: f64, phi: f64) -> PointSample {
    let (r, s) = (phi.cos(), phi.sin());
    let radius = 1.0 / k.sqrt();
    let spec = ShapeSpectrum::clifford(n, m, r, k).expect("interior phi");
    let lo = -(s / r) * k.sqrt();
    let hi = (r / s) * k.sqrt();
    let area = unit_sphere_volume(m) * (r * radius).powi(m as i32)
        * unit_sphere_volume(n - m) * (s * radius).powi((n - m) as i32);
    PointSample {
        sigma: 0.0,
        a: r * radius,
        b: s * radius,
        z: 0.0,
        kappa: hi,
        lam_a: lo,
        lam_b: hi,
        h: spec.h(),
        a_norm_sq: spec.a_norm_sq(),
        lambda_min: spec.lambda_min(),
        area_weight: area,
        grad_a_sq: None,
        hess_a_sq: None,
        grad_h_sq: None,
    }
}

/// Checkpoint times: uniform cadence over `[t0, t_max]`, plus a geometric
/// tail accumulating at `t_sing` when one is supplied (so singular traces
/// resolve several decades of curvature growth).
fn checkpoint_times(t0: f64, t_max: f64, snap_dt: f64, t_sing: Option<f64>) -> Vec<f64> {
    let mut times = Vec::new();
    let mut t = t0;
    while t < t_max - 1e-15 {
        times.push(t);
        t += snap_dt;
    }
    times.push(t_max);
    if let Some(ts) = t_sing {
        let mut gap = (ts - t0) * 0.25;
        for _ in 0..60 {
            let tc = ts - gap;
            if tc > t0 && tc < t_max {
                times.push(tc);
            }
            gap *= 0.25;
            if gap < (ts - t0) * 1e-11 {
                break;
            }
        }
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * (1.0 + a.abs()));
    times
}

/// Mean curvature flow of a geodesic sphere, `d(rho)/dt = -n sqrt(K)
/// cot(sqrt(K) rho)`, integrated adaptively with a switch to the closed-form
/// asymptotics once `sqrt(K) rho < 1e-4` (or its antipodal mirror).
pub fn hyperparallel_flow(
    params: &PinchingParams,
    rho0: f64,
    horizon: f64,
    snap_dt: f64,
) -> Result<FlowTrace> {
    let (n, k) = (params.n, params.k);
    let pole_gap = 1e-4 / k.sqrt();
    if !(rho0 > 0.0 && rho0 < std::f64::consts::PI / k.sqrt()) {
        return Err(Error::ParamRange(format!(
            "rho0 = {rho0} outside (0, pi/sqrt(K))"
        )));
    }
    if horizon <= 0.0 || snap_dt <= 0.0 {
        return Err(Error::ParamRange("horizon and snap_dt must be positive".into()));
    }

    let t_ext = hyperparallel_extinction_time(n, k, rho0);
    let equator = t_ext.is_none();
    let t_last = t_ext.map_or(horizon, |te| te.min(horizon));
    let times = checkpoint_times(0.0, t_last, snap_dt, t_ext.filter(|te| *te <= horizon));

    let mut snaps: Vec<Snapshot> = Vec::new();
    let u0 = k.sqrt() * rho0;
    // Normal speed is -H; the radial coordinate decreases at rate H for the
    // chosen orientation.
    let rhs = move |_t: f64, rho: f64| -hyperparallel_h(n, k, rho);

    let near_pole = move |rho: f64| {
        let u = k.sqrt() * rho;
        u < 1e-4 || u > std::f64::consts::PI - 1e-4
    };

    let (t_end, rho_end) = integrate_to_times(
        rhs,
        0.0,
        rho0,
        t_last,
        1e-12,
        1e-14 / k.sqrt(),
        &times,
        |t, rho| {
            let rho_c = rho.clamp(pole_gap * 1e-3, std::f64::consts::PI / k.sqrt() - pole_gap * 1e-3);
            snaps.push(Snapshot {
                t,
                regrid_epoch: 0,
                points: vec![hyperparallel_sample(n, k, rho_c)],
            });
        },
        move |_t, rho| near_pole(rho),
    );

    let terminal = if equator {
        TerminalEvent::Horizon
    } else if (t_last - horizon).abs() < 1e-14 && t_ext.map_or(true, |te| te > horizon) {
        TerminalEvent::Horizon
    } else {
        // Remaining time from the integrator endpoint via the conservation
        // law; the integrator stops just shy of the pole.
        let u_end = k.sqrt() * rho_end;
        let c_end = u_end.cos().abs().clamp(1e-300, 1.0);
        let t_exact = t_end + (1.0 / c_end).ln() / (n as f64 * k);
        TerminalEvent::Extinction { time: t_exact }
    };

    let mut events = Vec::new();
    if u0 > std::f64::consts::FRAC_PI_2 {
        events.push("antipodal collapse (initial radius beyond the equator)".to_string());
    }
    if equator {
        events.push("stationary hyperequator".to_string());
    }

    Ok(FlowTrace {
        kind: TraceKind::Hyperparallel,
        n,
        k,
        mults: [1, n - 1, 0],
        snapshots: snaps,
        terminal,
        events,
    })
}

/// Numerical ancient solution: integrates the hyperparallel ODE backwards
/// from `rho0` slightly below the equator, so `rho(t) -> pi/(2 sqrt(K))` as
/// `t -> -infinity`. Snapshots are returned in increasing time order.
pub fn ancient_hyperparallel(
    params: &PinchingParams,
    rho0: f64,
    t_min: f64,
    snap_dt: f64,
) -> Result<FlowTrace> {
    let (n, k) = (params.n, params.k);
    let equator = std::f64::consts::FRAC_PI_2 / k.sqrt();
    if !(rho0 > 0.0 && rho0 < equator) {
        return Err(Error::ParamRange(format!(
            "rho0 = {rho0} must lie strictly below the equator radius {equator}"
        )));
    }
    if t_min >= 0.0 {
        return Err(Error::ParamRange("t_min must be negative".into()));
    }

    let mut times: Vec<f64> = Vec::new();
    let mut t = 0.0;
    while t > t_min + 1e-15 {
        times.push(t);
        t -= snap_dt;
    }
    times.push(t_min);

    let rhs = move |_t: f64, rho: f64| -hyperparallel_h(n, k, rho);
    let mut snaps: Vec<Snapshot> = Vec::new();
    let mut reached_equator = false;
    let (t_end, _rho_end) = integrate_to_times(
        rhs,
        0.0,
        rho0,
        t_min,
        1e-12,
        1e-14 / k.sqrt(),
        &times,
        |t, rho| {
            snaps.push(Snapshot {
                t,
                regrid_epoch: 0,
                points: vec![hyperparallel_sample(n, k, rho)],
            });
        },
        |_t, rho| {
            // cos(u) underflows once the backward orbit is equator-close.
            (k.sqrt() * rho).cos() < 1e-13
        },
    );
    if t_end > t_min + 1e-12 {
        reached_equator = true;
    }

    snaps.reverse();
    let terminal = if reached_equator {
        TerminalEvent::Equilibrium { time: t_end }
    } else {
        TerminalEvent::Horizon
    };
    Ok(FlowTrace {
        kind: TraceKind::AncientHyperparallel,
        n,
        k,
        mults: [1, n - 1, 0],
        snapshots: snaps,
        terminal,
        events: vec!["ancient hyperparallel (backward orbit from below the equator)".into()],
    })
}

/// Torus flow `d(phi)/dt = -sqrt(K) H(phi)`; the minimal torus
/// `r^2 = m/n` is the unique (unstable) interior fixed point.
pub fn clifford_flow(
    params: &PinchingParams,
    phi0: f64,
    horizon: f64,
    snap_dt: f64,
) -> Result<FlowTrace> {
    let (n, m, k) = (params.n, params.m, params.k);
    if !(phi0 > 0.0 && phi0 < std::f64::consts::FRAC_PI_2) {
        return Err(Error::ParamRange(format!("phi0 = {phi0} outside (0, pi/2)")));
    }
    if m >= n {
        return Err(Error::ParamRange(format!("torus index m = {m} must be < n = {n}")));
    }

    let a2_threshold = 1e6 * k;
    let mn = m as f64 / n as f64;
    let w0 = phi0.cos().powi(2);
    // Closed-form collapse time from r^2(t) = m/n + (w0 - m/n) e^{2nKt},
    // used only for checkpoint placement (the integrator decides the run).
    let t_sing = if (w0 - mn).abs() < 1e-15 {
        None
    } else if w0 > mn {
        Some(((1.0 - mn) / (w0 - mn)).ln() / (2.0 * n as f64 * k))
    } else {
        Some((mn / (mn - w0)).ln() / (2.0 * n as f64 * k))
    };

    let t_last = t_sing.map_or(horizon, |ts| ts.min(horizon));
    let times = checkpoint_times(0.0, t_last, snap_dt, t_sing.filter(|ts| *ts <= horizon));

    let rhs = move |_t: f64, phi: f64| -k.sqrt() * clifford_h(n, m, k, phi);
    let mut snaps: Vec<Snapshot> = Vec::new();
    let blown = move |phi: f64| {
        let spec_a2 = {
            let (c, s) = (phi.cos(), phi.sin());
            let x = s * s / (c * c);
            k * (m as f64 * x + (n - m) as f64 / x)
        };
        spec_a2 >= a2_threshold || phi <= 1e-8 || phi >= std::f64::consts::FRAC_PI_2 - 1e-8
    };
    let (t_end, phi_end) = integrate_to_times(
        rhs,
        0.0,
        phi0,
        t_last,
        1e-12,
        1e-14,
        &times,
        |t, phi| {
            if phi > 1e-9 && phi < std::f64::consts::FRAC_PI_2 - 1e-9 {
                snaps.push(Snapshot {
                    t,
                    regrid_epoch: 0,
                    points: vec![clifford_sample(n, m, k, phi)],
                });
            }
        },
        move |_t, phi| blown(phi),
    );

    let mut events = Vec::new();
    let terminal = if blown(phi_end) {
        let collapsing = if phi_end < minimal_clifford_angle(n, m) {
            format!("S^{}(s) factor collapse (phi -> 0)", n - m)
        } else {
            format!("S^{}(r) factor collapse (phi -> pi/2)", m)
        };
        events.push(format!("degeneracy: {collapsing}"));
        let final_a2 = snaps.last().map_or(0.0, |s| s.max_a_norm_sq());
        TerminalEvent::Singularity {
            time: t_sing.unwrap_or(t_end),
            max_a_norm_sq: final_a2,
        }
    } else {
        TerminalEvent::Horizon
    };

    Ok(FlowTrace {
        kind: TraceKind::Clifford,
        n,
        k,
        mults: [0, m, n - m],
        snapshots: snaps,
        terminal,
        events,
    })
}
