//! Type-I / type-II classification of finite-time singularities and
//! parabolic rescaling of near-singular regions against the sphere and
//! cylinder models.

use serde::{Deserialize, Serialize};

use crate::curvature::PinchingParams;
use crate::error::{Error, Result};
use crate::trace::{FlowTrace, TerminalEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeFlag {
    I,
    II,
    Undecided,
}

/// One rescaled near-singular snapshot: the spectrum at the curvature
/// maximum, normalized and compared against the `R^k x S^{n-k}` models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledSnapshot {
    pub t: f64,
    pub point_index: usize,
    /// Spectrum scaled by `sqrt(T - t)`.
    pub spectrum_rescaled: Vec<f64>,
    /// Unit-normalized spectrum.
    pub spectrum_hat: Vec<f64>,
    /// Best-matching model index (`k = 0` is the round sphere, `k >= 1` the
    /// `R^k x S^{n-k}` cylinders).
    pub best_k: usize,
    pub distance: f64,
    /// `(|A|^2 - H^2/(n-m+1)) / H^2` at the maximum point: the sharpness
    /// functional of the cylindrical estimate.
    pub cyl_ratio: f64,
    /// Competing curvature maxima within 1% of the global one.
    pub ambiguous_with: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRecord {
    pub type_flag: TypeFlag,
    /// Estimated singular time from the `1/max|A|^2` extrapolation.
    pub t_singular: Option<f64>,
    /// Running sup of `(T - t) max |A|^2`.
    pub sup_functional: f64,
    /// `(t, (T - t) max |A|^2)` per snapshot in the growth window.
    pub functional: Vec<(f64, f64)>,
    /// Relative increase of the running sup over the last decade of
    /// curvature growth (the type-I stabilization measure).
    pub sup_drift: f64,
    pub rescaled: Vec<RescaledSnapshot>,
}

/// Least-squares estimate of the singular time from the last decade of the
/// `1/max|A|^2` series. Also returns the first index of that decade.
pub fn estimate_singular_time(trace: &FlowTrace) -> Option<(f64, usize)> {
    let series = trace.max_a_norm_sq_series();
    if series.len() < 4 {
        return None;
    }
    let m_max = series.iter().map(|x| x.1).fold(0.0, f64::max);
    let decade_start = series.iter().position(|x| x.1 >= m_max / 10.0)?;
    let pts: Vec<(f64, f64)> = series[decade_start..]
        .iter()
        .filter(|(_, m)| *m > 0.0)
        .map(|(t, m)| (*t, 1.0 / m))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    if slope >= 0.0 {
        return None;
    }
    let t_hat = -intercept / slope;
    let t_last = series.last().unwrap().0;
    if t_hat <= t_last {
        return None;
    }
    Some((t_hat, decade_start))
}

/// Type-I/II verdict: requires a singular trace; `Undecided` when the trace
/// resolves less than one decade of curvature growth. The flag is `I` when
/// the running sup of `(T - t) max |A|^2` grows by less than 5% over the
/// last decade of curvature growth, `II` otherwise.
pub fn classify_type(trace: &FlowTrace) -> Result<BlowupRecord> {
    match trace.terminal {
        TerminalEvent::Extinction { .. } | TerminalEvent::Singularity { .. } => {}
        _ => {
            return Err(Error::NotApplicable(
                "trace did not terminate in a singular event".into(),
            ))
        }
    }
    let series = trace.max_a_norm_sq_series();
    let m_first = series.first().map(|x| x.1).unwrap_or(0.0);
    let m_max = series.iter().map(|x| x.1).fold(0.0, f64::max);
    if m_first <= 0.0 || m_max / m_first < 10.0 {
        return Ok(BlowupRecord {
            type_flag: TypeFlag::Undecided,
            t_singular: None,
            sup_functional: 0.0,
            functional: Vec::new(),
            sup_drift: 0.0,
            rescaled: Vec::new(),
        });
    }
    let Some((t_hat, decade_start)) = estimate_singular_time(trace) else {
        return Ok(BlowupRecord {
            type_flag: TypeFlag::Undecided,
            t_singular: None,
            sup_functional: 0.0,
            functional: Vec::new(),
            sup_drift: 0.0,
            rescaled: Vec::new(),
        });
    };

    let mut functional = Vec::new();
    let mut running_sup = 0.0f64;
    let mut sup_at_decade_start = 0.0f64;
    for (i, (t, m)) in series.iter().enumerate() {
        if *t >= t_hat {
            continue;
        }
        let f = (t_hat - t) * m;
        running_sup = running_sup.max(f);
        functional.push((*t, f));
        if i == decade_start {
            sup_at_decade_start = running_sup;
        }
    }
    let sup_drift = if sup_at_decade_start > 0.0 {
        running_sup / sup_at_decade_start - 1.0
    } else {
        f64::INFINITY
    };
    let type_flag = if sup_drift < 0.05 { TypeFlag::I } else { TypeFlag::II };
    Ok(BlowupRecord {
        type_flag,
        t_singular: Some(t_hat),
        sup_functional: running_sup,
        functional,
        sup_drift,
        rescaled: Vec::new(),
    })
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance from a unit spectrum to the model `(0^k, 1^{n-k})/sqrt(n-k)`,
/// invariant under permutation and orientation flip.
pub fn model_distance(spectrum_hat: &[f64], k: usize) -> f64 {
    let n = spectrum_hat.len();
    let mut model = vec![0.0; n];
    let c = 1.0 / ((n - k) as f64).sqrt();
    for v in model.iter_mut().skip(k) {
        *v = c;
    }
    let s1 = sorted(spectrum_hat.to_vec());
    let s2 = sorted(spectrum_hat.iter().map(|x| -x).collect());
    euclid(&s1, &model).min(euclid(&s2, &model))
}

/// Parabolic rescaling of a type-I trace: at each snapshot in the growth
/// window, the spectrum at the curvature maximum is scaled by
/// `sqrt(T - t)` and compared against the sphere (`k = 0`) and the
/// `R^k x S^{n-k}` cylinders with `k < m`.
pub fn rescale_type_i(trace: &FlowTrace, params: &PinchingParams) -> Result<BlowupRecord> {
    let mut record = classify_type(trace)?;
    if record.type_flag != TypeFlag::I {
        return Err(Error::NotApplicable(format!(
            "rescaling requires a type-I trace (got {:?})",
            record.type_flag
        )));
    }
    let t_hat = record.t_singular.unwrap();
    let series = trace.max_a_norm_sq_series();
    let m_max = series.iter().map(|x| x.1).fold(0.0, f64::max);
    let inv_nm1 = 1.0 / (params.n as f64 - params.m as f64 + 1.0);

    for (si, snap) in trace.snapshots.iter().enumerate() {
        let m_here = series[si].1;
        if m_here < m_max / 100.0 || snap.t >= t_hat {
            continue;
        }
        let jmax = snap.argmax_a_norm_sq();
        let peak = snap.points[jmax].a_norm_sq;
        // Competing local maxima within 1%.
        let mut ambiguous = Vec::new();
        for (j, p) in snap.points.iter().enumerate() {
            if j == jmax || p.a_norm_sq < 0.99 * peak {
                continue;
            }
            let left = j.checked_sub(1).map(|i| snap.points[i].a_norm_sq).unwrap_or(0.0);
            let right = snap.points.get(j + 1).map(|p| p.a_norm_sq).unwrap_or(0.0);
            if p.a_norm_sq >= left && p.a_norm_sq >= right && j.abs_diff(jmax) > 2 {
                ambiguous.push(j);
            }
        }

        let spectrum = trace.spectrum(&snap.points[jmax]);
        let scale = (t_hat - snap.t).sqrt();
        let rescaled: Vec<f64> = spectrum.iter().map(|l| l * scale).collect();
        let norm = spectrum.iter().map(|l| l * l).sum::<f64>().sqrt();
        let hat: Vec<f64> = spectrum.iter().map(|l| l / norm).collect();

        let mut best_k = 0usize;
        let mut best_d = f64::INFINITY;
        for k in 0..params.m.max(1) {
            let d = model_distance(&hat, k);
            if d < best_d {
                best_d = d;
                best_k = k;
            }
        }
        let p = &snap.points[jmax];
        let cyl_ratio = if p.h != 0.0 {
            (p.a_norm_sq - inv_nm1 * p.h * p.h) / (p.h * p.h)
        } else {
            f64::INFINITY
        };
        record.rescaled.push(RescaledSnapshot {
            t: snap.t,
            point_index: jmax,
            spectrum_rescaled: rescaled,
            spectrum_hat: hat,
            best_k,
            distance: best_d,
            cyl_ratio,
            ambiguous_with: ambiguous,
        });
    }
    Ok(record)
}

/// One picked point of a type-II blow-up sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PickedPoint {
    pub j: usize,
    pub t: f64,
    pub point_index: usize,
    /// `r_j = |A|^{-1}` at the picked point.
    pub r: f64,
    /// Value of the picking functional `|A|^2 (T - 1/j - t)`.
    pub value: f64,
}

/// Hamilton-style picking for type-II traces: for each `j`, the space-time
/// point maximizing `|A|^2(p, t) (T - 1/j - t)` over `t <= T - 1/j`.
/// Refused on type-I traces.
pub fn pick_type_ii_points(trace: &FlowTrace, j_max: usize) -> Result<Vec<PickedPoint>> {
    let record = classify_type(trace)?;
    if record.type_flag == TypeFlag::I {
        return Err(Error::NotApplicable(
            "type-II point picking refused: trace is type I".into(),
        ));
    }
    let t_hat = record
        .t_singular
        .or_else(|| trace.terminal.singular_time())
        .ok_or_else(|| Error::NotApplicable("no singular time".into()))?;
    let mut out = Vec::new();
    for j in 1..=j_max {
        let cutoff = t_hat - 1.0 / j as f64;
        let mut best: Option<PickedPoint> = None;
        for snap in &trace.snapshots {
            if snap.t > cutoff {
                continue;
            }
            for (pi, p) in snap.points.iter().enumerate() {
                let value = p.a_norm_sq * (cutoff - snap.t);
                if best.as_ref().map_or(true, |b| value > b.value) {
                    best = Some(PickedPoint {
                        j,
                        t: snap.t,
                        point_index: pi,
                        r: 1.0 / p.a_norm_sq.sqrt(),
                        value,
                    });
                }
            }
        }
        if let Some(b) = best {
            out.push(b);
        }
    }
    Ok(out)
}
