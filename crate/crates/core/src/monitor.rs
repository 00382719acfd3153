//! Evaluates the quantitative flow estimates along a trace: preservation of
//! pinching, exponential decay of the cylindrical ratio, per-eta cylindrical
//! constants, gradient/Hessian bounds, the Kato-type inequality, the
//! convexity frontier, L^p decay of the positive part, and the
//! existence-time bound.

use serde::{Deserialize, Serialize};

use crate::curvature::{coefficients, g_m_alpha, Coefficients, PinchingParams};
use crate::error::{Error, Result};
use crate::trace::{FlowTrace, Snapshot};

/// Calibrated constant of the `sigma <= ell / sqrt(p)` admissibility rule
/// for the L^p monitor (fixed once against the shipped fixtures).
pub const LP_ELL: f64 = 0.15;

/// Which power of `Theta` enters the universal bound. The class is defined
/// through `max H^2 <= Theta K`, so the linear variant makes `Lambda0 K` an
/// upper bound for `2 max |A|^2`; the squared variant is kept for
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaVariant {
    Theta,
    ThetaSq,
}

/// Universal interior bounds for the class: `Lambda0 / 2 = Theta/(n-m+alpha)
/// + 2(m-alpha)`, `e^{2n lambda0} = 1 + n/(n + Lambda0)`, and the
/// existence-time bound `T >= ln(1 + 2n/Lambda0) / (2nK)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassCBounds {
    #[serde(rename = "Lambda0")]
    pub lambda0_big: f64,
    #[serde(rename = "lambda0")]
    pub lambda0_small: f64,
    #[serde(rename = "T_lower")]
    pub t_lower: f64,
    pub variant: ThetaVariant,
}

pub fn class_c_bounds(params: &PinchingParams, variant: ThetaVariant) -> ClassCBounds {
    let n = params.n as f64;
    let m = params.m as f64;
    let theta_pow = match variant {
        ThetaVariant::Theta => params.theta,
        ThetaVariant::ThetaSq => params.theta * params.theta,
    };
    let lambda0_big = 2.0 * (theta_pow / (n - m + params.alpha) + 2.0 * (m - params.alpha));
    let lambda0_small = (1.0 + n / (n + lambda0_big)).ln() / (2.0 * n);
    let t_lower = (1.0 + 2.0 * n / lambda0_big).ln() / (2.0 * n * params.k);
    ClassCBounds { lambda0_big, lambda0_small, t_lower, variant }
}

/// Location and value of an extremum over a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreservationCheck {
    pub max_g: Witness,
    pub tol: f64,
    pub preserved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    /// `(t, sup_x (f_0)_+ / W)` per snapshot.
    pub series: Vec<(f64, f64)>,
    pub initial: f64,
    /// `4 delta K`.
    pub bound_rate: f64,
    /// Max over t of `ratio(t) / (ratio(0) e^{-4 delta K t})`.
    pub max_excess_factor: f64,
    pub fitted_exponent: Option<f64>,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylindricalCheck {
    pub eta: f64,
    /// Smallest constant with `f_eta <= C_eta K e^{-2 delta K t}` trace-wide.
    pub c_eta: f64,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    /// `(eta, sup |grad A|^2 / (G_eta G_0))` over `t >= lambda0 / K`.
    pub sup_ratio: Vec<(f64, Witness)>,
    /// `sup |grad A|^2 / (H^4 + K^2)` over the same window.
    pub sup_crude: Witness,
    pub window_start: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianCheck {
    /// `sup |grad^2 A|^2 / (H^6 + K^3)` over `t >= lambda0 / K`.
    pub sup: Witness,
    pub window_start: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KatoCheck {
    /// `min |grad A|^2 / |grad H|^2 - 3/(n+2)`.
    pub min_margin: f64,
    pub witness: Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TBoundCheck {
    pub t_obs: Option<f64>,
    /// `e^{2 n K T_obs}`.
    pub lhs: Option<f64>,
    /// `1 + 2n / Lambda0` for both Theta variants.
    pub rhs_theta: f64,
    pub rhs_theta_sq: f64,
    /// Verdict under the default (linear Theta) variant; `None` when the
    /// trace never became singular.
    pub satisfied: Option<bool>,
    pub variants_diverge: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpDecay {
    pub p: f64,
    pub sigma: f64,
    pub eta: f64,
    /// `(t, integral of f_+^p d mu)` per snapshot.
    pub series: Vec<(f64, f64)>,
    pub fitted_rate: Option<f64>,
    /// `-delta p K`.
    pub bound_rate: f64,
    pub satisfied: bool,
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub preservation: PreservationCheck,
    pub decay: DecayCheck,
    pub cylindrical: Vec<CylindricalCheck>,
    pub gradient: Option<GradientCheck>,
    pub hessian: Option<HessianCheck>,
    pub kato: Option<KatoCheck>,
    pub t_bound: TBoundCheck,
    pub lp: Vec<LpDecay>,
    pub bounds: ClassCBounds,
    /// Sub-checks skipped because the trace does not carry the needed data.
    pub not_applicable: Vec<String>,
}

fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    Some((intercept, slope))
}

/// Runs every pointwise estimate over the trace. `eta_list` entries must lie
/// in `(0, eta0)`.
pub fn check_estimates(
    trace: &FlowTrace,
    params: &PinchingParams,
    eta_list: &[f64],
) -> Result<EstimateReport> {
    if trace.snapshots.is_empty() {
        return Err(Error::NotApplicable("empty trace".into()));
    }
    let k = trace.k;
    let coeffs0 = coefficients(params, 0.0)?;
    let delta = coeffs0.delta;
    let mut eta_coeffs: Vec<(f64, Coefficients)> = Vec::new();
    for &eta in eta_list {
        eta_coeffs.push((eta, coefficients(params, eta)?));
    }
    let bounds = class_c_bounds(params, ThetaVariant::Theta);
    let bounds_sq = class_c_bounds(params, ThetaVariant::ThetaSq);
    let inv_nm1 = coeffs0.inv_n_m_plus_1();
    let nf = params.n as f64;

    let mut not_applicable = Vec::new();

    // Preservation + global curvature scale.
    let mut max_g = Witness { t: 0.0, index: 0, value: f64::NEG_INFINITY };
    let mut max_a2_trace = 0.0f64;
    for s in &trace.snapshots {
        for (j, p) in s.points.iter().enumerate() {
            max_a2_trace = max_a2_trace.max(p.a_norm_sq);
            let g = g_m_alpha(p.a_norm_sq, p.h, params);
            if g > max_g.value {
                max_g = Witness { t: s.t, index: j, value: g };
            }
        }
    }
    let tol = 1e-3 * (max_a2_trace + k);
    let preservation = PreservationCheck { max_g, tol, preserved: max_g.value <= tol };

    // Decay of sup (f_0)_+ / W.
    let mut decay_series = Vec::with_capacity(trace.snapshots.len());
    for s in &trace.snapshots {
        let mut sup = 0.0f64;
        for p in &s.points {
            let f0 = p.a_norm_sq - inv_nm1 * p.h * p.h;
            let w = coeffs0.a * p.h * p.h + coeffs0.b * k;
            sup = sup.max(f0.max(0.0) / w);
        }
        decay_series.push((s.t, sup));
    }
    let initial = decay_series[0].1;
    let t0 = decay_series[0].0;
    let mut max_excess = 0.0f64;
    let mut all_zero = true;
    for &(t, v) in &decay_series {
        if v > 0.0 {
            all_zero = false;
        }
        let bound = initial * (-4.0 * delta * k * (t - t0)).exp();
        if bound > 0.0 {
            max_excess = max_excess.max(v / bound);
        } else if v > 0.0 {
            max_excess = f64::INFINITY;
        }
    }
    let log_pts: Vec<(f64, f64)> = decay_series
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    let decay = DecayCheck {
        initial,
        bound_rate: 4.0 * delta * k,
        max_excess_factor: if all_zero { 0.0 } else { max_excess },
        fitted_exponent: linear_fit(&log_pts).map(|(_, slope)| slope),
        satisfied: all_zero || max_excess <= 1.02,
        series: decay_series,
    };

    // Cylindrical constants per eta.
    let mut cylindrical = Vec::new();
    for (eta, ce) in &eta_coeffs {
        let mut c_eta = Witness { t: t0, index: 0, value: 0.0 };
        for s in &trace.snapshots {
            let growth = (2.0 * delta * k * (s.t - t0)).exp();
            for (j, p) in s.points.iter().enumerate() {
                let f = ce.f_eta(p.a_norm_sq, p.h);
                let c = f * growth / k;
                if c > c_eta.value {
                    c_eta = Witness { t: s.t, index: j, value: c };
                }
            }
        }
        cylindrical.push(CylindricalCheck {
            eta: *eta,
            c_eta: c_eta.value.max(0.0),
            witness: c_eta,
        });
    }

    // Derivative-based checks.
    let has_derivs = trace.has_derivative_norms();
    let window_start = bounds.lambda0_small / k;
    let (gradient, hessian, kato) = if has_derivs {
        let mut sup_ratio: Vec<(f64, Witness)> = eta_coeffs
            .iter()
            .map(|(eta, _)| (*eta, Witness { t: window_start, index: 0, value: 0.0 }))
            .collect();
        let mut sup_crude = Witness { t: window_start, index: 0, value: 0.0 };
        let mut sup_hess = Witness { t: window_start, index: 0, value: 0.0 };
        let mut kato_min = Witness { t: t0, index: 0, value: f64::INFINITY };
        for s in &trace.snapshots {
            for (j, p) in s.points.iter().enumerate() {
                let (ga, hs, gh) = (
                    p.grad_a_sq.unwrap_or(0.0),
                    p.hess_a_sq.unwrap_or(0.0),
                    p.grad_h_sq.unwrap_or(0.0),
                );
                if gh > 0.0 {
                    let ratio = ga / gh;
                    if ratio < kato_min.value {
                        kato_min = Witness { t: s.t, index: j, value: ratio };
                    }
                }
                if s.t >= window_start {
                    let crude = ga / (p.h.powi(4) + k * k);
                    if crude > sup_crude.value {
                        sup_crude = Witness { t: s.t, index: j, value: crude };
                    }
                    let hess_ratio = hs / (p.h.powi(6) + k * k * k);
                    if hess_ratio > sup_hess.value {
                        sup_hess = Witness { t: s.t, index: j, value: hess_ratio };
                    }
                    for ((eta, _), slot) in eta_coeffs.iter().zip(sup_ratio.iter_mut()) {
                        let c_eta = cylindrical
                            .iter()
                            .find(|c| c.eta == *eta)
                            .map(|c| c.c_eta)
                            .unwrap_or(0.0)
                            .max(2.0);
                        let decay_term = 2.0 * c_eta * k * (-2.0 * delta * k * (s.t - t0)).exp();
                        let g_eta = decay_term + (eta + inv_nm1) * p.h * p.h - p.a_norm_sq;
                        let g_0 = 2.0 * coeffs0.c0 * k + 3.0 / (nf + 2.0) * p.h * p.h
                            - p.a_norm_sq;
                        if g_eta > 0.0 && g_0 > 0.0 {
                            let r = ga / (g_eta * g_0);
                            if r > slot.1.value {
                                slot.1 = Witness { t: s.t, index: j, value: r };
                            }
                        }
                    }
                }
            }
        }
        let kato = if kato_min.value.is_finite() {
            Some(KatoCheck {
                min_margin: kato_min.value - 3.0 / (nf + 2.0),
                witness: kato_min,
            })
        } else {
            not_applicable.push("kato: no point with nonzero |grad H|".into());
            None
        };
        (
            Some(GradientCheck { sup_ratio, sup_crude, window_start }),
            Some(HessianCheck { sup: sup_hess, window_start }),
            kato,
        )
    } else {
        not_applicable.push("gradient: trace lacks derivative norms".into());
        not_applicable.push("hessian: trace lacks derivative norms".into());
        not_applicable.push("kato: trace lacks derivative norms".into());
        (None, None, None)
    };

    // Existence-time bound.
    let t_obs = trace.terminal.singular_time();
    let rhs_theta = 1.0 + 2.0 * nf / bounds.lambda0_big;
    let rhs_theta_sq = 1.0 + 2.0 * nf / bounds_sq.lambda0_big;
    let lhs = t_obs.map(|t| (2.0 * nf * k * t).exp());
    let t_bound = TBoundCheck {
        t_obs,
        lhs,
        rhs_theta,
        rhs_theta_sq,
        satisfied: lhs.map(|l| l >= rhs_theta),
        variants_diverge: (rhs_theta - rhs_theta_sq).abs()
            > 1e-12 * (rhs_theta + rhs_theta_sq),
    };

    // L^p decay at the calibrated sigma(p).
    let mut lp = Vec::new();
    let lp_eta = eta_list.first().copied().unwrap_or(coeffs0.eta0 * 0.5);
    for p_exp in [5.0f64, 10.0, 20.0] {
        let sigma = LP_ELL / p_exp.sqrt();
        if let Ok(res) = lp_decay(trace, params, p_exp, sigma, lp_eta) {
            lp.push(res);
        }
    }

    Ok(EstimateReport {
        preservation,
        decay,
        cylindrical,
        gradient,
        hessian,
        kato,
        t_bound,
        lp,
        bounds,
        not_applicable,
    })
}

/// `int f_+^p d mu` per snapshot with `f_+ = max(e^{2 delta K t}
/// f_{sigma,eta}, 0)`, the fitted log-linear rate, and the domination
/// verdict against `C e^{-delta p K t}`.
pub fn lp_decay(
    trace: &FlowTrace,
    params: &PinchingParams,
    p_exp: f64,
    sigma: f64,
    eta: f64,
) -> Result<LpDecay> {
    if p_exp <= 1.0 {
        return Err(Error::ParamRange(format!("p = {p_exp} must exceed 1")));
    }
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::ParamRange(format!("sigma = {sigma} outside [0, 1)")));
    }
    let ce = coefficients(params, eta)?;
    let delta = ce.delta;
    let k = trace.k;
    let t0 = trace.snapshots.first().map(|s| s.t).unwrap_or(0.0);
    let inv_nm1 = ce.inv_n_m_plus_1();
    let mut series = Vec::with_capacity(trace.snapshots.len());
    for s in &trace.snapshots {
        let growth = (2.0 * delta * k * (s.t - t0)).exp();
        let mut integral = 0.0;
        for p in &s.points {
            let f_eta = p.a_norm_sq - (inv_nm1 + eta) * p.h * p.h;
            let w = ce.a * p.h * p.h + ce.b * k;
            let f_se = f_eta * w.powf(sigma - 1.0);
            let f_plus = (growth * f_se).max(0.0);
            integral += p.area_weight * f_plus.powf(p_exp);
        }
        series.push((s.t, integral));
    }
    let peak: f64 = series.iter().map(|x| x.1).fold(0.0, f64::max);
    let vacuous = peak <= 0.0;
    let bound_rate = -delta * p_exp * k;
    let log_pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    let fitted_rate = linear_fit(&log_pts).map(|(_, s)| s);
    // Dominated by C e^{-delta p K t} with the smallest admissible C iff the
    // weighted series peaks at the start (5% slack).
    let i0 = series.first().map(|x| x.1).unwrap_or(0.0);
    let c_min = series
        .iter()
        .map(|(t, v)| v * (delta * p_exp * k * (t - t0)).exp())
        .fold(0.0f64, f64::max);
    let satisfied = vacuous || (i0 > 0.0 && c_min <= 1.05 * i0);
    Ok(LpDecay { p: p_exp, sigma, eta, series, fitted_rate, bound_rate, satisfied, vacuous })
}

/// Convexity frontier: for each `eta`, the smallest `h` such that
/// `|H| >= h sqrt(K)` implies `lambda_1 >= -eta |H|` trace-wide (`0` when no
/// point violates, i.e. the trace is convex enough everywhere).
pub fn convexity_frontier(trace: &FlowTrace, eta_grid: &[f64]) -> Vec<(f64, f64)> {
    let rk = trace.k.sqrt();
    eta_grid
        .iter()
        .map(|&eta| {
            let mut h_eta = 0.0f64;
            for s in &trace.snapshots {
                for p in &s.points {
                    if p.lambda_min < -eta * p.h.abs() {
                        h_eta = h_eta.max(p.h.abs() / rk);
                    }
                }
            }
            (eta, h_eta)
        })
        .collect()
}

/// Pool-adjacent-violators fit of a nonincreasing sequence (used to clean
/// discretization noise off the frontier before asserting monotonicity).
pub fn isotonic_nonincreasing(values: &[f64]) -> Vec<f64> {
    // PAV on the negated sequence gives a nondecreasing fit.
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((-v, 1));
        while blocks.len() > 1 {
            let last = blocks[blocks.len() - 1];
            let prev = blocks[blocks.len() - 2];
            if prev.0 / prev.1 as f64 > last.0 / last.1 as f64 {
                blocks.pop();
                blocks.pop();
                blocks.push((prev.0 + last.0, prev.1 + last.1));
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (sum, count) in blocks {
        let mean = -(sum / count as f64);
        out.extend(std::iter::repeat(mean).take(count));
    }
    out
}

/// Max-norm residual of the discrete `(d_t - Laplacian) f_eta` against its
/// reaction-diffusion form
/// `2(|A|^2 + nK) f_eta - 4nK(|A|^2 - H^2/n) - 2(|grad A|^2 - (1/(n-m+1) +
/// eta)|grad H|^2)`,
/// evaluated at snapshot `t_index` using its two neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    /// `(max |A|^2 + K)^2 K`-type scale at the evaluated snapshot.
    pub scale: f64,
    pub t: f64,
}

pub fn residual_f_eta(
    trace: &FlowTrace,
    params: &PinchingParams,
    t_index: usize,
    eta: f64,
) -> Result<ResidualReport> {
    if trace.kind != crate::trace::TraceKind::Equivariant {
        return Err(Error::NotApplicable(
            "residual check needs an equivariant trace".into(),
        ));
    }
    if t_index == 0 || t_index + 1 >= trace.snapshots.len() {
        return Err(Error::NotApplicable("need snapshots on both sides".into()));
    }
    let (prev, mid, next) = (
        &trace.snapshots[t_index - 1],
        &trace.snapshots[t_index],
        &trace.snapshots[t_index + 1],
    );
    if prev.regrid_epoch != next.regrid_epoch || prev.regrid_epoch != mid.regrid_epoch {
        return Err(Error::NotApplicable(
            "grid was rebuilt inside the stencil window".into(),
        ));
    }
    let m = mid.points.len();
    if prev.points.len() != m || next.points.len() != m || m < 9 {
        return Err(Error::NotApplicable("snapshot sizes differ or too small".into()));
    }
    if !trace.has_derivative_norms() {
        return Err(Error::NotApplicable("trace lacks derivative norms".into()));
    }
    let ce = coefficients(params, eta)?;
    let inv_nm1 = ce.inv_n_m_plus_1();
    let (nf, k) = (params.n as f64, trace.k);
    let p_mult = trace.mults[1] as f64;
    let q_mult = trace.mults[2] as f64;

    let f_of = |s: &Snapshot, j: usize| -> f64 {
        let p = &s.points[j];
        p.a_norm_sq - (inv_nm1 + eta) * p.h * p.h
    };

    // Even ghost extension for invariant scalars at arc endpoints (detected
    // by a vanishing axis coordinate); otherwise skip boundary points.
    let r = 1.0 / k.sqrt();
    let start_on_axis = mid.points[0].a.abs() < 1e-8 * r || mid.points[0].b.abs() < 1e-8 * r;
    let end_on_axis =
        mid.points[m - 1].a.abs() < 1e-8 * r || mid.points[m - 1].b.abs() < 1e-8 * r;

    let sig = |j: isize| -> f64 {
        if j < 0 {
            -mid.points[(-j) as usize].sigma
        } else if (j as usize) < m {
            mid.points[j as usize].sigma
        } else {
            2.0 * mid.points[m - 1].sigma - mid.points[2 * (m - 1) - j as usize].sigma
        }
    };
    let fval = |j: isize| -> f64 {
        if j < 0 {
            f_of(mid, (-j) as usize)
        } else if (j as usize) < m {
            f_of(mid, j as usize)
        } else {
            f_of(mid, 2 * (m - 1) - j as usize)
        }
    };

    let dt_m = mid.t - prev.t;
    let dt_p = next.t - mid.t;
    let mean_h = mid.points[m - 1].sigma / (m - 1) as f64;

    let j_lo = if start_on_axis { 0 } else { 2 };
    let j_hi = if end_on_axis { m } else { m - 2 };
    let mut max_abs = 0.0f64;
    let mut scale = 0.0f64;
    for j in j_lo..j_hi {
        let p = &mid.points[j];
        scale = scale.max((p.a_norm_sq + k) * (p.a_norm_sq + k));

        // Nonuniform centered time derivative.
        let (fp, f0, fn_) = (f_of(prev, j), f_of(mid, j), f_of(next, j));
        let dt_f = (fn_ * dt_m * dt_m + f0 * (dt_p * dt_p - dt_m * dt_m) - fp * dt_p * dt_p)
            / (dt_p * dt_m * (dt_p + dt_m));

        // Invariant Laplacian: f'' + ((p-1) a'/a + (q-1) b'/b) f'.
        let ji = j as isize;
        let hm = sig(ji) - sig(ji - 1);
        let hp = sig(ji + 1) - sig(ji);
        let f1 = (fval(ji + 1) * hm * hm + fval(ji) * (hp * hp - hm * hm)
            - fval(ji - 1) * hp * hp)
            / (hp * hm * (hp + hm));
        let f2 = 2.0 * (fval(ji - 1) * hp - fval(ji) * (hp + hm) + fval(ji + 1) * hm)
            / (hp * hm * (hp + hm));

        // a' and b' by the same stencil on the position columns; a ghost
        // coordinate flips sign iff the mirrored endpoint lies on that axis.
        let col = |j: isize, c: usize| -> f64 {
            let (idx, end_idx) = if j < 0 {
                ((-j) as usize, 0usize)
            } else if (j as usize) < m {
                (j as usize, usize::MAX)
            } else {
                (2 * (m - 1) - j as usize, m - 1)
            };
            let pt = &mid.points[idx];
            let v = if c == 0 { pt.a } else { pt.b };
            if end_idx != usize::MAX {
                let e = &mid.points[end_idx];
                let on_axis = if c == 0 { e.a.abs() < 1e-8 * r } else { e.b.abs() < 1e-8 * r };
                if on_axis {
                    return -v;
                }
            }
            v
        };
        let mut lap = f2;
        for (c, mult) in [(0usize, p_mult), (1usize, q_mult)] {
            if mult == 0.0 {
                continue;
            }
            let val = if c == 0 { p.a } else { p.b };
            let d1c = (col(ji + 1, c) * hm * hm + col(ji, c) * (hp * hp - hm * hm)
                - col(ji - 1, c) * hp * hp)
                / (hp * hm * (hp + hm));
            if val > 3.0 * mean_h {
                lap += mult * d1c / val * f1;
            } else {
                // Cap limit: u f' -> f''.
                lap += mult * f2;
            }
        }

        let rhs = 2.0 * (p.a_norm_sq + nf * k) * f0
            - 4.0 * nf * k * (p.a_norm_sq - p.h * p.h / nf)
            - 2.0 * (p.grad_a_sq.unwrap() - (inv_nm1 + eta) * p.grad_h_sq.unwrap());

        let res = dt_f - lap - rhs;
        max_abs = max_abs.max(res.abs());
    }
    Ok(ResidualReport { max_abs, scale, t: mid.t })
}
