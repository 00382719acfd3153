//! Discrete geometry of the profile curve: frame, principal curvatures,
//! derivative norms, and area weights.
//!
//! The induced metric of the generated hypersurface is the doubly warped
//! product `d sigma^2 + a(sigma)^2 g_{S^{p-1}} + b(sigma)^2 g_{S^{q-1}}`. In
//! the parallel orthonormal frame along `sigma` the second fundamental form
//! is `diag(kappa, lam_a I_{p-1}, lam_b I_{q-1})` and its (totally
//! symmetric) covariant derivative reduces to arclength derivatives of the
//! three curvatures plus rotational terms in `u = a'/a`, `v = b'/b`:
//!
//! ```text
//! |grad A|^2 = kappa'^2 + 3(p-1) lam_a'^2 + 3(q-1) lam_b'^2
//! |grad^2 A|^2 = kappa''^2 + 3(p-1) lam_a''^2 + 3(q-1) lam_b''^2
//!   + 3(p-1) [ (u(kappa'-2lam_a'))^2 + (p+1)(u lam_a')^2 + (q-1)(u lam_b')^2 ]
//!   + 3(q-1) [ (v(kappa'-2lam_b'))^2 + (q+1)(v lam_b')^2 + (p-1)(v lam_a')^2 ]
//! ```
//!
//! (both validated against a finite-difference oracle on an embedded
//! parametrization; see the crate tests). Near collapsing axes the products
//! `u f'` are evaluated through their smooth-cap limits `f''`.

use serde::{Deserialize, Serialize};

use super::{cross, dist, dot, normalize, AxisEnd, FlowState, Topology};
use crate::curvature::unit_sphere_volume;
use crate::error::{Error, Result};

const GHOSTS: usize = 3;

/// Per-point geometry of a [`FlowState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointGeometry {
    pub sigma: f64,
    pub kappa: f64,
    pub lam_a: f64,
    pub lam_b: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "A_norm_sq")]
    pub a_norm_sq: f64,
    #[serde(rename = "grad_A_sq")]
    pub grad_a_sq: f64,
    #[serde(rename = "hess_A_sq")]
    pub hess_a_sq: f64,
    #[serde(rename = "grad_H_sq")]
    pub grad_h_sq: f64,
    pub area_weight: f64,
}

/// Reflection matrix flipping one coordinate.
fn reflect(p: [f64; 3], coord: usize) -> [f64; 3] {
    let mut out = p;
    out[coord] = -out[coord];
    out
}

fn axis_coord(axis: AxisEnd) -> usize {
    match axis {
        AxisEnd::A => 0,
        AxisEnd::B => 1,
    }
}

/// Positions extended by `GHOSTS` points on each side (reflection across the
/// endpoint axes for arcs, wrap-around for loops), plus cumulative chord
/// arclength over the extended array.
pub(crate) struct Extended {
    pub pos: Vec<[f64; 3]>,
    pub s: Vec<f64>,
}

pub(crate) fn extend(state: &FlowState) -> Extended {
    let m = state.grid.len();
    let g = GHOSTS;
    let mut pos = vec![[0.0; 3]; m + 2 * g];
    pos[g..g + m].copy_from_slice(&state.grid);
    match state.topology {
        Topology::Arc { start, end } => {
            let cs = axis_coord(start);
            let ce = axis_coord(end);
            for j in 0..g {
                pos[g - 1 - j] = reflect(state.grid[1 + j], cs);
                pos[g + m + j] = reflect(state.grid[m - 2 - j], ce);
            }
        }
        Topology::ClosedLoop => {
            for j in 0..g {
                pos[g - 1 - j] = state.grid[m - 1 - j];
                pos[g + m + j] = state.grid[j];
            }
        }
    }
    let mut s = vec![0.0; pos.len()];
    for i in 1..pos.len() {
        s[i] = s[i - 1] + dist(pos[i], pos[i - 1]);
    }
    Extended { pos, s }
}

/// Nonuniform three-point first derivative at index `i` of `f` sampled at `s`.
fn d1_at(f: impl Fn(usize) -> f64, s: &[f64], i: usize) -> f64 {
    let hm = s[i] - s[i - 1];
    let hp = s[i + 1] - s[i];
    (f(i + 1) * hm * hm + f(i) * (hp * hp - hm * hm) - f(i - 1) * hp * hp)
        / (hp * hm * (hp + hm))
}

/// Nonuniform three-point second derivative.
fn d2_at(f: impl Fn(usize) -> f64, s: &[f64], i: usize) -> f64 {
    let hm = s[i] - s[i - 1];
    let hp = s[i + 1] - s[i];
    2.0 * (f(i - 1) * hp - f(i) * (hp + hm) + f(i + 1) * hm) / (hp * hm * (hp + hm))
}

/// Frame data on the core range: unit tangent, unit normal, the three
/// principal curvatures, and the arclength coordinate.
pub(crate) struct Frame {
    pub s: Vec<f64>,
    pub t_hat: Vec<[f64; 3]>,
    pub nu: Vec<[f64; 3]>,
    pub kappa: Vec<f64>,
    pub lam_a: Vec<f64>,
    pub lam_b: Vec<f64>,
    pub h_field: Vec<f64>,
    pub mean_h: f64,
}

pub(crate) fn frame(state: &FlowState) -> Result<Frame> {
    let m = state.grid.len();
    if m < 8 {
        return Err(Error::Profile("fewer than 8 grid points".into()));
    }
    let g = GHOSTS;
    let ext = extend(state);
    let rk = state.k.sqrt();
    let (p, q) = (state.sym.p, state.sym.q);

    // Frames on core +/- 1 (needed for the derivative branch of the
    // rotational curvatures).
    let lo = g - 1;
    let hi = g + m + 1;
    let mut t_hat_ext = vec![[0.0; 3]; ext.pos.len()];
    let mut nu_ext = vec![[0.0; 3]; ext.pos.len()];
    let mut d1n_ext = vec![0.0; ext.pos.len()];
    for e in lo..hi {
        let d1 = [
            d1_at(|j| ext.pos[j][0], &ext.s, e),
            d1_at(|j| ext.pos[j][1], &ext.s, e),
            d1_at(|j| ext.pos[j][2], &ext.s, e),
        ];
        let d1n = (d1[0] * d1[0] + d1[1] * d1[1] + d1[2] * d1[2]).sqrt();
        let t = [d1[0] / d1n, d1[1] / d1n, d1[2] / d1n];
        let n_q = [ext.pos[e][0] * rk, ext.pos[e][1] * rk, ext.pos[e][2] * rk];
        t_hat_ext[e] = t;
        nu_ext[e] = normalize(cross(t, n_q));
        d1n_ext[e] = d1n;
    }

    let mean_h = (ext.s[g + m - 1] - ext.s[g]) / (m - 1).max(1) as f64;
    let mut out = Frame {
        s: vec![0.0; m],
        t_hat: vec![[0.0; 3]; m],
        nu: vec![[0.0; 3]; m],
        kappa: vec![0.0; m],
        lam_a: vec![0.0; m],
        lam_b: vec![0.0; m],
        h_field: vec![0.0; m],
        mean_h,
    };

    // Rotational curvature with the cap limit near collapsing endpoints:
    // away from endpoints lam = nu_c / c; within a few spacings of an
    // endpoint on the matching axis, blend toward (d nu_c / ds) / T_c.
    let end_axis = |idx: usize| -> Option<AxisEnd> {
        match state.topology {
            Topology::Arc { start, end } => {
                if idx < 6 {
                    Some(start)
                } else if idx + 6 >= m {
                    Some(end)
                } else {
                    None
                }
            }
            Topology::ClosedLoop => None,
        }
    };

    for i in 0..m {
        let e = i + g;
        let d2 = [
            d2_at(|j| ext.pos[j][0], &ext.s, e),
            d2_at(|j| ext.pos[j][1], &ext.s, e),
            d2_at(|j| ext.pos[j][2], &ext.s, e),
        ];
        let nu = nu_ext[e];
        let t = t_hat_ext[e];
        let d1n = d1n_ext[e];
        let kappa = -dot(d2, nu) / (d1n * d1n);

        let mut lam = [0.0f64; 2];
        for coord in 0..2 {
            let c = ext.pos[e][coord];
            let ratio_ok = c > 3.0 * mean_h;
            let near_end = end_axis(i).map(axis_coord) == Some(coord);
            lam[coord] = if ratio_ok || !near_end {
                nu[coord] / c.max(1e-300)
            } else {
                let dnu = d1_at(|j| nu_ext[j][coord], &ext.s, e);
                let deriv = dnu / t[coord];
                if c <= 1.5 * mean_h {
                    deriv
                } else {
                    // Linear blend on [1.5h, 3h].
                    let w = (c / mean_h - 1.5) / 1.5;
                    w * (nu[coord] / c) + (1.0 - w) * deriv
                }
            };
        }

        out.s[i] = ext.s[e] - ext.s[g];
        out.t_hat[i] = t;
        out.nu[i] = nu;
        out.kappa[i] = kappa;
        out.lam_a[i] = lam[0];
        out.lam_b[i] = lam[1];
        out.h_field[i] = kappa + (p - 1) as f64 * lam[0] + (q - 1) as f64 * lam[1];
    }
    Ok(out)
}

/// Kappa/lambda arrays only (used by state validation).
pub(crate) struct FrameScalars {
    pub kappa: Vec<f64>,
    pub lam_a: Vec<f64>,
    pub lam_b: Vec<f64>,
}

pub(crate) fn frame_scalars(state: &FlowState) -> Result<FrameScalars> {
    let f = frame(state)?;
    Ok(FrameScalars { kappa: f.kappa, lam_a: f.lam_a, lam_b: f.lam_b })
}

/// Derivative of a scalar field along the profile, with parity ghosts.
///
/// Invariant scalars extend evenly across arc endpoints (mirror symmetry of
/// the generated hypersurface) and wrap around loops.
pub(crate) struct ScalarDerivs {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

pub(crate) fn scalar_derivs(field: &[f64], ext_s: &[f64], topology: &Topology) -> ScalarDerivs {
    let m = field.len();
    let g = GHOSTS;
    let mut vals = vec![0.0; m + 2 * g];
    vals[g..g + m].copy_from_slice(field);
    match topology {
        Topology::Arc { .. } => {
            for j in 0..g {
                vals[g - 1 - j] = field[1 + j];
                vals[g + m + j] = field[m - 2 - j];
            }
        }
        Topology::ClosedLoop => {
            for j in 0..g {
                vals[g - 1 - j] = field[m - 1 - j];
                vals[g + m + j] = field[j];
            }
        }
    }
    let mut d1 = vec![0.0; m];
    let mut d2 = vec![0.0; m];
    for i in 0..m {
        let e = i + g;
        d1[i] = d1_at(|j| vals[j], ext_s, e);
        d2[i] = d2_at(|j| vals[j], ext_s, e);
    }
    ScalarDerivs { d1, d2 }
}

/// `u f'` with `u = c'/c`, evaluated through the cap limit `f''` where the
/// coordinate collapses at an arc endpoint.
fn u_times(
    c: f64,
    t_c: f64,
    f1: f64,
    f2: f64,
    mean_h: f64,
    near_collapsing_end: bool,
) -> f64 {
    if !near_collapsing_end || c > 3.0 * mean_h {
        t_c * f1 / c.max(1e-300)
    } else if c <= 1.5 * mean_h {
        f2
    } else {
        let w = (c / mean_h - 1.5) / 1.5;
        w * (t_c * f1 / c) + (1.0 - w) * f2
    }
}

/// `(1, 2, 1)/4` smoothing with the parity/wrap ghost rules. Annihilates the
/// grid-frequency mode (which discrete curvature fields pick up at roundoff
/// scale from regridding and which second differences would amplify by
/// `4/h^2`) at an `O(h^2)` consistency cost.
pub(crate) fn smooth_121(field: &[f64], topology: &Topology) -> Vec<f64> {
    let m = field.len();
    let at = |i: isize| -> f64 {
        if i >= 0 && (i as usize) < m {
            field[i as usize]
        } else {
            match topology {
                Topology::Arc { .. } => {
                    if i < 0 {
                        field[(-i) as usize]
                    } else {
                        field[2 * (m - 1) - i as usize]
                    }
                }
                Topology::ClosedLoop => field[i.rem_euclid(m as isize) as usize],
            }
        }
    };
    (0..m)
        .map(|i| {
            let i = i as isize;
            0.25 * (at(i - 1) + 2.0 * at(i) + at(i + 1))
        })
        .collect()
}

/// Full per-point geometry, including the derivative norms and area weights.
pub fn geometry(state: &FlowState) -> Result<Vec<PointGeometry>> {
    let fr = frame(state)?;
    let m = state.grid.len();
    let (p, q) = (state.sym.p, state.sym.q);
    let (pf, qf) = ((p - 1) as f64, (q - 1) as f64);
    let ext = extend(state);
    let g = GHOSTS;

    let kappa_s = smooth_121(&fr.kappa, &state.topology);
    let lam_a_s = smooth_121(&fr.lam_a, &state.topology);
    let lam_b_s = smooth_121(&fr.lam_b, &state.topology);
    let dk = scalar_derivs(&kappa_s, &ext.s, &state.topology);
    let da = scalar_derivs(&lam_a_s, &ext.s, &state.topology);
    let db = scalar_derivs(&lam_b_s, &ext.s, &state.topology);

    let end_axis = |idx: usize| -> Option<AxisEnd> {
        match state.topology {
            Topology::Arc { start, end } => {
                if idx < 6 {
                    Some(start)
                } else if idx + 6 >= m {
                    Some(end)
                } else {
                    None
                }
            }
            Topology::ClosedLoop => None,
        }
    };

    let orbit_vol = unit_sphere_volume(p - 1) * unit_sphere_volume(q - 1);
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let e = i + g;
        let (a, b) = (ext.pos[e][0], ext.pos[e][1]);
        let t = fr.t_hat[i];
        let near_a = end_axis(i).map(axis_coord) == Some(0);
        let near_b = end_axis(i).map(axis_coord) == Some(1);

        let grad_a_sq = dk.d1[i] * dk.d1[i]
            + 3.0 * pf * da.d1[i] * da.d1[i]
            + 3.0 * qf * db.d1[i] * db.d1[i];
        let h1 = dk.d1[i] + pf * da.d1[i] + qf * db.d1[i];
        let grad_h_sq = h1 * h1;

        let mut hess = dk.d2[i] * dk.d2[i]
            + 3.0 * pf * da.d2[i] * da.d2[i]
            + 3.0 * qf * db.d2[i] * db.d2[i];
        if p > 1 {
            let uk = u_times(a, t[0], dk.d1[i] - 2.0 * da.d1[i], dk.d2[i] - 2.0 * da.d2[i], fr.mean_h, near_a);
            let ua = u_times(a, t[0], da.d1[i], da.d2[i], fr.mean_h, near_a);
            let ub = u_times(a, t[0], db.d1[i], db.d2[i], fr.mean_h, near_a);
            hess += 3.0 * pf * (uk * uk + (p + 1) as f64 * ua * ua + qf * ub * ub);
        }
        if q > 1 {
            let vk = u_times(b, t[1], dk.d1[i] - 2.0 * db.d1[i], dk.d2[i] - 2.0 * db.d2[i], fr.mean_h, near_b);
            let vb = u_times(b, t[1], db.d1[i], db.d2[i], fr.mean_h, near_b);
            let va = u_times(b, t[1], da.d1[i], da.d2[i], fr.mean_h, near_b);
            hess += 3.0 * qf * (vk * vk + (q + 1) as f64 * vb * vb + pf * va * va);
        }

        // Arclength quadrature weight: trapezoid with Gregory end
        // corrections on arcs (periodic trapezoid is already spectral on
        // loops). The corrected end weights (3/8, 7/6, 23/24) h recover
        // fourth-order accuracy against the closed-form areas.
        // Chord lengths underestimate arclength by l^2 (kappa_g^2 + K)/24
        // (the full space curvature of a spherical curve).
        let kc_sq = fr.kappa[i] * fr.kappa[i] + state.k;
        let arc = |l: f64| l * (1.0 + l * l * kc_sq / 24.0);
        let left = arc(ext.s[e] - ext.s[e - 1]);
        let right = arc(ext.s[e + 1] - ext.s[e]);
        let ds = match state.topology {
            Topology::Arc { .. } => {
                let base = if i == 0 {
                    0.5 * right
                } else if i == m - 1 {
                    0.5 * left
                } else {
                    0.5 * (left + right)
                };
                let factor = match i.min(m - 1 - i) {
                    0 => 0.75,
                    1 => 7.0 / 6.0,
                    2 => 23.0 / 24.0,
                    _ => 1.0,
                };
                base * factor
            }
            Topology::ClosedLoop => 0.5 * (left + right),
        };
        let area_weight = orbit_vol * a.max(0.0).powi((p - 1) as i32)
            * b.max(0.0).powi((q - 1) as i32)
            * ds;

        let (kappa, lam_a, lam_b) = (fr.kappa[i], fr.lam_a[i], fr.lam_b[i]);
        out.push(PointGeometry {
            sigma: fr.s[i],
            kappa,
            lam_a,
            lam_b,
            h: fr.h_field[i],
            a_norm_sq: kappa * kappa + pf * lam_a * lam_a + qf * lam_b * lam_b,
            grad_a_sq,
            hess_a_sq: hess,
            grad_h_sq,
            area_weight,
        });
    }
    Ok(out)
}

/// Statistics produced by a velocity evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct VelStats {
    pub max_a_norm_sq: f64,
    pub min_spacing: f64,
    pub axis_stiffness: f64,
    pub finite: bool,
}

/// Normal velocity `-H nu` of every grid point, written into `vel` (flat
/// `[x0, y0, z0, x1, ...]` layout). Endpoint velocities are projected onto
/// their boundary plane so arcs stay attached to the axes.
pub(crate) fn velocity(state: &FlowState, vel: &mut [f64]) -> Result<VelStats> {
    let fr = frame(state)?;
    let m = state.grid.len();
    let (p, q) = (state.sym.p, state.sym.q);
    let (pf, qf) = ((p - 1) as f64, (q - 1) as f64);
    let mut stats = VelStats {
        max_a_norm_sq: 0.0,
        min_spacing: f64::INFINITY,
        axis_stiffness: 0.0,
        finite: true,
    };
    let h_floor = fr.mean_h;
    for i in 0..m {
        let h = fr.h_field[i];
        let nu = fr.nu[i];
        let (kappa, la, lb) = (fr.kappa[i], fr.lam_a[i], fr.lam_b[i]);
        let a2 = kappa * kappa + pf * la * la + qf * lb * lb;
        stats.max_a_norm_sq = stats.max_a_norm_sq.max(a2);
        let (pa, pb) = (state.grid[i][0], state.grid[i][1]);
        stats.axis_stiffness = stats.axis_stiffness.max(
            pf / pa.max(h_floor).powi(2) + qf / pb.max(h_floor).powi(2),
        );
        let mut v = [-h * nu[0], -h * nu[1], -h * nu[2]];
        if let Topology::Arc { start, end } = state.topology {
            if i == 0 {
                v[axis_coord(start)] = 0.0;
            } else if i == m - 1 {
                v[axis_coord(end)] = 0.0;
            }
        }
        if !(v[0].is_finite() && v[1].is_finite() && v[2].is_finite()) {
            stats.finite = false;
        }
        vel[3 * i] = v[0];
        vel[3 * i + 1] = v[1];
        vel[3 * i + 2] = v[2];
    }
    for i in 1..m {
        stats.min_spacing = stats.min_spacing.min(fr.s[i] - fr.s[i - 1]);
    }
    Ok(stats)
}

