//! Deterministic trace/report export: CSV with fixed 17-significant-digit
//! float formatting, JSON through the serializers.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::rescaler::BlowupRecord;
use crate::trace::FlowTrace;

/// Column schema of a trace CSV (version 1); see `docs/formats.md`.
pub const TRACE_CSV_HEADER: &str =
    "t,sigma,a,b,z,kappa,lam_a,lam_b,H,A_norm_sq,grad_A_sq,hess_A_sq";

/// Fixed-width scientific formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// Renders the full trace as CSV (one row per grid point per snapshot).
pub fn trace_csv(trace: &FlowTrace) -> String {
    let mut out = String::new();
    out.push_str(TRACE_CSV_HEADER);
    out.push('\n');
    for snap in &trace.snapshots {
        for p in &snap.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_f64(snap.t),
                fmt_f64(p.sigma),
                fmt_f64(p.a),
                fmt_f64(p.b),
                fmt_f64(p.z),
                fmt_f64(p.kappa),
                fmt_f64(p.lam_a),
                fmt_f64(p.lam_b),
                fmt_f64(p.h),
                fmt_f64(p.a_norm_sq),
                fmt_f64(p.grad_a_sq.unwrap_or(f64::NAN)),
                fmt_f64(p.hess_a_sq.unwrap_or(f64::NAN)),
            );
        }
    }
    out
}

/// Per-snapshot rescaled-spectrum CSV of a blowup record.
pub fn rescaled_csv(record: &BlowupRecord) -> String {
    let mut out = String::from("t,point_index,best_k,distance,cyl_ratio,spectrum_hat\n");
    for r in &record.rescaled {
        let spec = r
            .spectrum_hat
            .iter()
            .map(|x| fmt_f64(*x))
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(r.t),
            r.point_index,
            r.best_k,
            fmt_f64(r.distance),
            fmt_f64(r.cyl_ratio),
            spec
        );
    }
    out
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_fixed_width_and_lossless() {
        for x in [1.0, -2.5e-17, 0.1 + 0.2, std::f64::consts::PI, 1e300] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }
}
