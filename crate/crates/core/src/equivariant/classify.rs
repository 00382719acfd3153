//! Class membership of an initial state: pinching, area, and mean curvature
//! bounds.

use serde::{Deserialize, Serialize};

use super::geometry::geometry;
use super::FlowState;
use crate::curvature::{g_m_alpha, PinchingParams};
use crate::error::Result;

/// Measured class data of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassCReport {
    #[serde(rename = "V_measured")]
    pub v_measured: f64,
    #[serde(rename = "Theta_measured")]
    pub theta_measured: f64,
    pub in_class: bool,
    /// Worst pinching margin over the state (`<= 0` means pinched).
    pub max_g: f64,
}

/// `V_measured = mu_0(M) K^{n/2}`, `Theta_measured = max H^2 / K`, and the
/// verdict `in_class <=> g_{m,alpha} <= 0 everywhere, V_measured <= V,
/// Theta_measured <= Theta`.
pub fn classify_class_c(state: &FlowState, params: &PinchingParams) -> Result<ClassCReport> {
    let geo = geometry(state)?;
    let n = state.n();
    let mut area = 0.0;
    let mut max_h_sq = 0.0f64;
    let mut max_g = f64::NEG_INFINITY;
    let mut max_a2 = 0.0f64;
    for g in &geo {
        area += g.area_weight;
        max_h_sq = max_h_sq.max(g.h * g.h);
        max_a2 = max_a2.max(g.a_norm_sq);
        max_g = max_g.max(g_m_alpha(g.a_norm_sq, g.h, params));
    }
    let v_measured = area * params.k.powf(n as f64 / 2.0);
    let theta_measured = max_h_sq / params.k;
    let tol = 1e-9 * (max_a2 + params.k);
    Ok(ClassCReport {
        v_measured,
        theta_measured,
        in_class: max_g <= tol && v_measured <= params.v && theta_measured <= params.theta,
        max_g,
    })
}
