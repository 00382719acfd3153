//! Exact pointwise algebra of principal curvature spectra.
//!
//! Everything in here is closed-form arithmetic on a spectrum
//! `lambda in R^n`: the quadratic pinching quantities, the derived
//! coefficients of the cylindrical and gradient estimates, the Simons
//! tensor norm, and the generalized Clifford torus family. No
//! discretization enters at this level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pinching class data `(n, m, alpha, K)` plus the initial-data bounds
/// `(V, Theta)`.
///
/// `n` is the hypersurface dimension, `m` the pinching index, `alpha` the
/// pinching slack, `K > 0` the ambient sectional curvature. `V` bounds the
/// initial area (`mu_0 <= V K^{-n/2}`) and `Theta` the initial mean
/// curvature (`max H^2 <= Theta K`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinchingParams {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "Theta")]
    pub theta: f64,
}

impl PinchingParams {
    /// Range-validated constructor. Admissibility (`m < alpha + min(n/2,
    /// 2(n-1)/3)`) is checked separately: inadmissible tuples are storable
    /// but rejected by [`Coefficients::for_params`].
    pub fn new(n: usize, m: usize, alpha: f64, k: f64, v: f64, theta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::ParamRange(format!("n = {n} must be >= 2")));
        }
        let m_max = n.div_ceil(2);
        if m < 1 || m > m_max {
            return Err(Error::ParamRange(format!(
                "m = {m} must satisfy 1 <= m <= ceil(n/2) = {m_max} for n = {n}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::ParamRange(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        if !(k > 0.0) {
            return Err(Error::ParamRange(format!("K = {k} must be positive")));
        }
        if !(v > 0.0) {
            return Err(Error::ParamRange(format!("V = {v} must be positive")));
        }
        if !(theta > 0.0) {
            return Err(Error::ParamRange(format!("Theta = {theta} must be positive")));
        }
        Ok(Self { n, m, alpha, k, v, theta })
    }

    /// Convenience constructor with placeholder class bounds `V`, `Theta`.
    pub fn unbounded(n: usize, m: usize, alpha: f64, k: f64) -> Result<Self> {
        Self::new(n, m, alpha, k, 1e6, 1e6)
    }

    /// `min(n/2, 2(n-1)/3)`: the preservation threshold appearing in the
    /// admissibility condition.
    pub fn preservation_threshold(&self) -> f64 {
        let n = self.n as f64;
        (n / 2.0).min(2.0 * (n - 1.0) / 3.0)
    }

    /// `m < alpha + min(n/2, 2(n-1)/3)`.
    pub fn admissible(&self) -> bool {
        (self.m as f64) < self.alpha + self.preservation_threshold()
    }

    pub fn require_admissible(&self) -> Result<()> {
        if self.admissible() {
            Ok(())
        } else {
            Err(Error::Inadmissible {
                n: self.n,
                m: self.m,
                alpha: self.alpha,
                threshold: self.alpha + self.preservation_threshold(),
            })
        }
    }
}

/// A principal curvature vector, stored sorted ascending so that
/// `lambda_1 = lambda[0]` is the least principal curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpectrum {
    lambda: Vec<f64>,
}

/// Derived scalar invariants of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "A_norm_sq")]
    pub a_norm_sq: f64,
    pub lambda_min: f64,
}

impl ShapeSpectrum {
    pub fn new(mut lambda: Vec<f64>) -> Self {
        lambda.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN curvature"));
        Self { lambda }
    }

    /// Umbilic spectrum `(c, ..., c)` of dimension `n`.
    pub fn umbilic(n: usize, c: f64) -> Self {
        Self { lambda: vec![c; n] }
    }

    /// The `S^m(r) x S^{n-m}(s)` torus spectrum in `S^{n+1}_K`, `s^2 = 1 - r^2`:
    /// value `-(s/r) sqrt(K)` with multiplicity `m` and `(r/s) sqrt(K)` with
    /// multiplicity `n - m`. The orientation matches the closed-form mean
    /// curvature `H = ((n-m) r^2 - m s^2) / (rs) * sqrt(K)`.
    pub fn clifford(n: usize, m: usize, r: f64, k: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::DegenerateTorus { r });
        }
        if m < 1 || m >= n {
            return Err(Error::ParamRange(format!(
                "torus index m = {m} must satisfy 1 <= m < n = {n}"
            )));
        }
        let s = (1.0 - r * r).sqrt();
        let rk = k.sqrt();
        let mut lambda = vec![-(s / r) * rk; m];
        lambda.extend(std::iter::repeat((r / s) * rk).take(n - m));
        Ok(Self::new(lambda))
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn h(&self) -> f64 {
        self.lambda.iter().sum()
    }

    pub fn a_norm_sq(&self) -> f64 {
        self.lambda.iter().map(|l| l * l).sum()
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda.first().copied().unwrap_or(0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut lambda: Vec<f64> = self.lambda.iter().map(|l| c * l).collect();
        if c < 0.0 {
            lambda.reverse();
        }
        Self { lambda }
    }
}

/// `H`, `|A|^2` and `lambda_1` of a spectrum.
pub fn invariants(spectrum: &ShapeSpectrum) -> Invariants {
    Invariants {
        h: spectrum.h(),
        a_norm_sq: spectrum.a_norm_sq(),
        lambda_min: spectrum.lambda_min(),
    }
}

/// Right-hand side of the strict quadratic pinching condition for `(n, m)`,
/// as a function of `H^2` and `K`. The four cases:
///
/// ```text
/// n = 2, m = 1:                 (3/4) H^2 + (4/3) K
/// n = 3, m = 2:                 (3/5) H^2 + (8/3) K
/// n >= 3, m <= floor(n/2):      1/(n-m) H^2 + 2 m K
/// n >= 4, m = ceil(n/2):        (2/n) H^2 + n K
/// ```
///
/// (For even `n >= 4` with `m = n/2` the last two coincide.)
pub fn strict_pinching_rhs(n: usize, m: usize, h_sq: f64, k: f64) -> Result<f64> {
    let nf = n as f64;
    let mf = m as f64;
    if n == 2 && m == 1 {
        Ok(0.75 * h_sq + (4.0 / 3.0) * k)
    } else if n == 3 && m == 2 {
        Ok(0.6 * h_sq + (8.0 / 3.0) * k)
    } else if n >= 3 && m >= 1 && m <= n / 2 {
        Ok(h_sq / (nf - mf) + 2.0 * mf * k)
    } else if n >= 4 && m == n.div_ceil(2) {
        Ok(2.0 / nf * h_sq + nf * k)
    } else {
        Err(Error::PinchingCase { n, m })
    }
}

/// Pointwise pinching diagnostics of a spectrum.
///
/// `strict_margin = |A|^2 - RHS(1.1)`; `g_m_alpha` and `f_eta = f_{m-1,eta}`
/// are the two constraint functions whose signs define the set
/// `U_{alpha,eta}`; `f_m_eta = f_{m,eta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinchingReport {
    pub strict_margin: f64,
    pub g_m_alpha: f64,
    pub f_eta: f64,
    pub f_m_eta: f64,
    #[serde(rename = "in_U")]
    pub in_u: bool,
}

/// `f_{m',eta}(lambda) = |A|^2 - H^2/(n - m') - eta H^2` for a raw index `m'`.
pub fn f_index(a_norm_sq: f64, h: f64, n: usize, m_index: usize, eta: f64) -> f64 {
    let h2 = h * h;
    a_norm_sq - h2 / (n as f64 - m_index as f64) - eta * h2
}

/// `g_{m,alpha}(lambda) = |A|^2 - H^2/(n - m + alpha) - 2(m - alpha) K`.
pub fn g_m_alpha(a_norm_sq: f64, h: f64, params: &PinchingParams) -> f64 {
    let (n, m, alpha) = (params.n as f64, params.m as f64, params.alpha);
    a_norm_sq - h * h / (n - m + alpha) - 2.0 * (m - alpha) * params.k
}

pub fn pinching_report(
    spectrum: &ShapeSpectrum,
    params: &PinchingParams,
    eta: f64,
) -> Result<PinchingReport> {
    params.require_admissible()?;
    if eta < 0.0 {
        return Err(Error::ParamRange(format!("eta = {eta} must be >= 0")));
    }
    if spectrum.n() != params.n {
        return Err(Error::ParamRange(format!(
            "spectrum dimension {} != n = {}",
            spectrum.n(),
            params.n
        )));
    }
    let inv = invariants(spectrum);
    let h2 = inv.h * inv.h;
    let rhs = strict_pinching_rhs(params.n, params.m, h2, params.k)?;
    let f_eta = f_index(inv.a_norm_sq, inv.h, params.n, params.m - 1, eta);
    let f_m_eta = f_index(inv.a_norm_sq, inv.h, params.n, params.m, eta);
    let g = g_m_alpha(inv.a_norm_sq, inv.h, params);
    Ok(PinchingReport {
        strict_margin: inv.a_norm_sq - rhs,
        g_m_alpha: g,
        f_eta,
        f_m_eta,
        in_u: f_eta >= 0.0 && g <= 0.0,
    })
}

/// All derived constants for an admissible `(n, m, alpha)` and active slack
/// `eta in [0, eta0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a_m: f64,
    pub b_m: f64,
    pub a: f64,
    pub b: f64,
    pub eta0: f64,
    pub delta: f64,
    pub beta: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub eta: f64,
}

impl Coefficients {
    /// Builds the coefficient set. Errors on inadmissible parameters or
    /// `eta` outside `[0, eta0)`.
    ///
    /// `eta0` is the largest value satisfying both linear constraints
    /// `n eta0 <= n/2 + alpha - m` and
    /// `n eta0 <= 1 - (n+2)/3 (1/(n-m+alpha) + eta0)`,
    /// solved in closed form; `delta = n eta0`.
    pub fn for_params(params: &PinchingParams, eta: f64) -> Result<Self> {
        params.require_admissible()?;
        let n = params.n as f64;
        let m = params.m as f64;
        let alpha = params.alpha;

        let a_m = 1.0 / (n - m + alpha);
        let b_m = 2.0 * (m - alpha);

        let bound1 = (n / 2.0 + alpha - m) / n;
        let bound2 = (1.0 - (n + 2.0) / (3.0 * (n - m + alpha))) / (n + (n + 2.0) / 3.0);
        let eta0 = bound1.min(bound2);
        debug_assert!(eta0 > 0.0, "admissibility guarantees eta0 > 0");

        if !(0.0..eta0).contains(&eta) {
            return Err(Error::EtaRange { eta, eta0 });
        }

        let a = a_m - 1.0 / (n - m + 1.0) + eta0 - eta;
        let beta = 0.5 * (3.0 / (n + 2.0) - 1.0 / (n - m + 1.0));

        Ok(Self {
            a_m,
            b_m,
            a,
            b: b_m,
            eta0,
            delta: n * eta0,
            beta,
            c0: b_m,
            eta,
        })
    }
}

/// Convenience wrapper matching the operation name in the interface docs.
pub fn coefficients(params: &PinchingParams, eta: f64) -> Result<Coefficients> {
    Coefficients::for_params(params, eta)
}

/// `W = a H^2 + b K > 0`.
pub fn w_value(spectrum: &ShapeSpectrum, coeffs: &Coefficients, k: f64) -> f64 {
    let h = spectrum.h();
    w_of_h_sq(h * h, coeffs, k)
}

pub fn w_of_h_sq(h_sq: f64, coeffs: &Coefficients, k: f64) -> f64 {
    coeffs.a * h_sq + coeffs.b * k
}

impl Coefficients {
    /// `1/(n - m + 1)`, recovered from `a = a_m - 1/(n-m+1) + eta0 - eta`.
    pub fn inv_n_m_plus_1(&self) -> f64 {
        self.a_m - self.a + self.eta0 - self.eta
    }

    /// `f_eta = |A|^2 - (1/(n-m+1) + eta) H^2` for the stored `eta`.
    pub fn f_eta(&self, a_norm_sq: f64, h: f64) -> f64 {
        a_norm_sq - (self.inv_n_m_plus_1() + self.eta) * h * h
    }
}

/// `f_{sigma,eta} = f_eta W^{sigma - 1}`, `sigma in [0, 1]`; `sigma = 1`
/// reduces to `f_eta` itself.
pub fn f_sigma_eta(
    spectrum: &ShapeSpectrum,
    coeffs: &Coefficients,
    k: f64,
    sigma: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::ParamRange(format!("sigma = {sigma} must lie in [0, 1]")));
    }
    let inv = invariants(spectrum);
    let f = coeffs.f_eta(inv.a_norm_sq, inv.h);
    let w = w_of_h_sq(inv.h * inv.h, coeffs, k);
    Ok(f * w.powf(sigma - 1.0))
}

/// Squared norm of the Simons tensor,
/// `|C|^2 = sum_{i,j} (lambda_j - lambda_i)^2 (lambda_i lambda_j + K)^2`,
/// with `K` restored from the unit-curvature display by scaling.
pub fn simons_c_norm_sq(spectrum: &ShapeSpectrum, k: f64) -> f64 {
    let l = spectrum.lambda();
    let mut sum = 0.0;
    for i in 0..l.len() {
        for j in 0..l.len() {
            let d = l[j] - l[i];
            let p = l[i] * l[j] + k;
            sum += d * d * p * p;
        }
    }
    sum
}

/// Closed forms for the torus family `S^m(r) x S^{n-m}(s)`, `r^2 + s^2 = 1`:
///
/// ```text
/// |A|^2  = (m s^4 + (n-m) r^4) / (r^2 s^2) * K
/// H      = ((n-m) r^2 - m s^2) / (r s) * sqrt(K)
/// excess = |A|^2 - H^2/(n-m) - 2 m K = m (n-2m)/(n-m) * s^2/r^2 * K
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliffordClosedForm {
    #[serde(rename = "A_norm_sq")]
    pub a_norm_sq: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub excess: f64,
}

pub fn clifford_closed_form(n: usize, m: usize, r: f64, k: f64) -> Result<CliffordClosedForm> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::DegenerateTorus { r });
    }
    if m < 1 || m >= n {
        return Err(Error::ParamRange(format!(
            "torus index m = {m} must satisfy 1 <= m < n = {n}"
        )));
    }
    let nf = n as f64;
    let mf = m as f64;
    let r2 = r * r;
    let s2 = 1.0 - r2;
    let s = s2.sqrt();
    let a_norm_sq = (mf * s2 * s2 + (nf - mf) * r2 * r2) / (r2 * s2) * k;
    let h = ((nf - mf) * r2 - mf * s2) / (r * s) * k.sqrt();
    let excess = mf * (nf - 2.0 * mf) / (nf - mf) * (s2 / r2) * k;
    Ok(CliffordClosedForm { a_norm_sq, h, excess })
}

/// Unit-sphere volume `omega_k = |S^k|` for `k >= 0`.
pub fn unit_sphere_volume(k: usize) -> f64 {
    // omega_k = 2 pi^{(k+1)/2} / Gamma((k+1)/2); Gamma at integer and
    // half-integer arguments by recurrence.
    let half = (k + 1) as f64 / 2.0;
    let pi = std::f64::consts::PI;
    let gamma_half = |mut x: f64| -> f64 {
        let mut acc = 1.0;
        while x > 1.0 + 1e-12 {
            x -= 1.0;
            acc *= x;
        }
        if (x - 0.5).abs() < 1e-12 {
            acc * pi.sqrt()
        } else {
            acc // x == 1
        }
    };
    2.0 * pi.powf(half) / gamma_half(half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn params(n: usize, m: usize, alpha: f64, k: f64) -> PinchingParams {
        PinchingParams::unbounded(n, m, alpha, k).unwrap()
    }

    #[test]
    fn invariants_trivial_cases() {
        let zero = ShapeSpectrum::umbilic(4, 0.0);
        let inv = invariants(&zero);
        assert_eq!((inv.h, inv.a_norm_sq, inv.lambda_min), (0.0, 0.0, 0.0));

        let umb = ShapeSpectrum::umbilic(3, 1.0);
        let inv = invariants(&umb);
        assert_eq!((inv.h, inv.a_norm_sq, inv.lambda_min), (3.0, 3.0, 1.0));
    }

    #[test]
    fn invariants_match_torus_displays() {
        // n = 4, m = 1, r = s = 1/sqrt(2): H = ((n-m) r^2 - m s^2)/(rs) = 2,
        // |A|^2 = (m s^4 + (n-m) r^4)/(r^2 s^2) = 4.
        let spec = ShapeSpectrum::clifford(4, 1, 0.5f64.sqrt(), 1.0).unwrap();
        let inv = invariants(&spec);
        assert_relative_eq!(inv.h, 2.0, max_relative = 1e-14);
        assert_relative_eq!(inv.a_norm_sq, 4.0, max_relative = 1e-14);
    }

    #[test]
    fn pinching_report_geodesic_equator() {
        let p = params(4, 2, 0.5, 1.0);
        let zero = ShapeSpectrum::umbilic(4, 0.0);
        let rep = pinching_report(&zero, &p, 0.0).unwrap();
        // strict margin is minus the constant term of the RHS; n >= 4 with
        // m = ceil(n/2) selects |A|^2 < (2/n) H^2 + n K.
        assert_relative_eq!(rep.strict_margin, -4.0, max_relative = 1e-14);
        assert_relative_eq!(rep.g_m_alpha, -2.0 * (2.0 - 0.5), max_relative = 1e-14);
        assert!(rep.strict_margin < 0.0 && rep.g_m_alpha < 0.0);
    }

    #[test]
    fn pinching_report_minimal_clifford_boundary() {
        // Minimal Clifford at r^2 = m/n sits exactly on the boundary of the
        // n >= 4 case. Oracle: the closed-form quantities at r^2 = m/n.
        let p = params(4, 2, 0.5, 1.0);
        let r = (2.0f64 / 4.0).sqrt();
        let cf = clifford_closed_form(4, 2, r, 1.0).unwrap();
        assert_abs_diff_eq!(cf.h, 0.0, epsilon = 1e-13);
        let spec = ShapeSpectrum::clifford(4, 2, r, 1.0).unwrap();
        let rep = pinching_report(&spec, &p, 0.0).unwrap();
        assert_abs_diff_eq!(rep.strict_margin, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pinching_report_cylinder_excess() {
        // n = 4, m = 1, r = s: |A|^2 - H^2/(n-m) - 2 m K = 2/3.
        let p = params(4, 1, 0.5, 1.0);
        let spec = ShapeSpectrum::clifford(4, 1, 0.5f64.sqrt(), 1.0).unwrap();
        let rep = pinching_report(&spec, &p, 0.0).unwrap();
        let inv = invariants(&spec);
        let excess = inv.a_norm_sq - inv.h * inv.h / 3.0 - 2.0;
        assert_relative_eq!(excess, 2.0 / 3.0, max_relative = 1e-13);
        // f_{m,eta=0} is exactly that excess minus nothing: f_{1,0} = |A|^2 - H^2/3.
        assert_relative_eq!(rep.f_m_eta, inv.a_norm_sq - inv.h * inv.h / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn case_table_rejects_out_of_range() {
        assert!(matches!(
            strict_pinching_rhs(4, 3, 1.0, 1.0),
            Err(Error::PinchingCase { .. })
        ));
        assert!(matches!(
            strict_pinching_rhs(2, 2, 1.0, 1.0),
            Err(Error::PinchingCase { .. })
        ));
    }

    #[test]
    fn coefficients_closed_forms() {
        let c = coefficients(&params(3, 1, 0.5, 1.0), 0.0).unwrap();
        assert_relative_eq!(c.a_m, 0.4, max_relative = 1e-15);
        assert_relative_eq!(c.b_m, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn coefficients_eta0_by_bisection_oracle() {
        // Oracle: bisect for the largest eta0 satisfying both constraints.
        let p = params(4, 2, 0.6, 1.0);
        let n = 4.0;
        let feasible = |e: f64| {
            n * e <= n / 2.0 + 0.6 - 2.0
                && n * e <= 1.0 - (n + 2.0) / 3.0 * (1.0 / (n - 2.0 + 0.6) + e)
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = coefficients(&p, 0.0).unwrap();
        assert_relative_eq!(c.eta0, lo, max_relative = 1e-12);
        assert_relative_eq!(c.eta0, 0.038_461_538_461_538_464, max_relative = 1e-12);
        assert_relative_eq!(c.delta, 4.0 * c.eta0, max_relative = 1e-15);
    }

    #[test]
    fn coefficients_reject_inadmissible() {
        // n = 2 requires m = 1 and alpha > 1/3.
        let p = params(2, 1, 0.3, 1.0);
        let err = coefficients(&p, 0.0).unwrap_err();
        match err {
            Error::Inadmissible { threshold, .. } => {
                assert_relative_eq!(threshold, 0.3 + 2.0 / 3.0, max_relative = 1e-14);
            }
            other => panic!("expected Inadmissible, got {other:?}"),
        }
        assert!(coefficients(&params(2, 1, 0.4, 1.0), 0.0).is_ok());
    }

    #[test]
    fn coefficients_reject_eta_out_of_range() {
        let p = params(4, 2, 0.6, 1.0);
        let c = coefficients(&p, 0.0).unwrap();
        assert!(matches!(
            coefficients(&p, c.eta0),
            Err(Error::EtaRange { .. })
        ));
        assert!(matches!(
            coefficients(&p, -0.01),
            Err(Error::EtaRange { .. })
        ));
    }

    #[test]
    fn non_vacuous_combinations_match_case_list() {
        // n = 2: m = 1, alpha > 1/3. n = 3: m = 1 any alpha, m = 2 alpha > 2/3.
        // Even n >= 4: all m <= n/2 any alpha. Odd n >= 5: m <= (n-1)/2 any
        // alpha; m = (n+1)/2 needs alpha > 1/2.
        let admissible = |n: usize, m: usize, alpha: f64| params(n, m, alpha, 1.0).admissible();
        assert!(!admissible(2, 1, 0.333));
        assert!(admissible(2, 1, 0.334));
        assert!(admissible(3, 1, 0.01));
        assert!(!admissible(3, 2, 0.666));
        assert!(admissible(3, 2, 0.667));
        for n in [4usize, 6, 8] {
            for m in 1..=n / 2 {
                assert!(admissible(n, m, 0.01), "(n, m) = ({n}, {m})");
            }
        }
        for n in [5usize, 7] {
            for m in 1..=(n - 1) / 2 {
                assert!(admissible(n, m, 0.01), "(n, m) = ({n}, {m})");
            }
            assert!(!admissible(n, (n + 1) / 2, 0.499));
            assert!(admissible(n, (n + 1) / 2, 0.501));
        }
    }

    #[test]
    fn w_and_f_sigma_eta() {
        let p = params(4, 2, 0.6, 1.0);
        let c = coefficients(&p, 0.01).unwrap();
        // lambda = 0: W = b K.
        let zero = ShapeSpectrum::umbilic(4, 0.0);
        assert_relative_eq!(w_value(&zero, &c, 1.0), c.b, max_relative = 1e-15);

        // sigma = 1: f_{sigma,eta} = f_eta.
        let spec = ShapeSpectrum::new(vec![0.3, -0.2, 1.4, 0.9]);
        let inv = invariants(&spec);
        let f_eta = inv.a_norm_sq - (1.0 / 3.0 + 0.01) * inv.h * inv.h;
        assert_relative_eq!(
            f_sigma_eta(&spec, &c, 1.0, 1.0).unwrap(),
            f_eta,
            max_relative = 1e-13
        );

        // Umbilic (1,1,1,1): W = a * 16 + 2.8; a recomputed from its three
        // summands independently.
        let umb = ShapeSpectrum::umbilic(4, 1.0);
        let eta0 = 0.038_461_538_461_538_464;
        let a_indep = 1.0 / 2.6 - 1.0 / 3.0 + eta0 - 0.01;
        assert_relative_eq!(w_value(&umb, &c, 1.0), a_indep * 16.0 + 2.8, max_relative = 1e-12);

        // When f_eta >= 0, f_{sigma,eta} <= W^sigma.
        let cyl = ShapeSpectrum::clifford(4, 1, 0.9, 1.0).unwrap();
        for sigma in [0.0, 0.3, 0.7] {
            let f = f_sigma_eta(&cyl, &c, 1.0, sigma).unwrap();
            let w = w_value(&cyl, &c, 1.0);
            if f >= 0.0 {
                assert!(f <= w.powf(sigma) * (1.0 + 1e-13));
            }
        }
    }

    #[test]
    fn simons_c_norm_examples() {
        assert_eq!(simons_c_norm_sq(&ShapeSpectrum::umbilic(5, 2.3), 1.0), 0.0);

        // Two groups with product -K annihilate every term.
        let spec = ShapeSpectrum::clifford(6, 2, 0.43, 1.0).unwrap();
        assert_abs_diff_eq!(simons_c_norm_sq(&spec, 1.0), 0.0, epsilon = 1e-10);

        // lambda = (2, 0, 0), K = 1: direct enumeration oracle gives 16.
        let spec = ShapeSpectrum::new(vec![2.0, 0.0, 0.0]);
        let l = spec.lambda();
        let mut oracle = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                oracle += (l[j] - l[i]).powi(2) * (l[i] * l[j] + 1.0).powi(2);
            }
        }
        assert_relative_eq!(oracle, 16.0, max_relative = 1e-15);
        assert_relative_eq!(simons_c_norm_sq(&spec, 1.0), 16.0, max_relative = 1e-15);
    }

    #[test]
    fn clifford_closed_form_examples() {
        let cf = clifford_closed_form(4, 1, 0.5f64.sqrt(), 1.0).unwrap();
        assert_relative_eq!(cf.excess, 2.0 / 3.0, max_relative = 1e-13);

        // m = n/2 kills the excess for any r.
        for r in [0.2, 0.5, 0.8] {
            let cf = clifford_closed_form(6, 3, r, 1.0).unwrap();
            assert_abs_diff_eq!(cf.excess, 0.0, epsilon = 1e-14);
        }

        // n = 5, m = 2, r^2 = 0.8: excess = (2 * 1/3)(0.2/0.8) = 1/6, and the
        // product formula agrees with |A|^2 - H^2/(n-m) - 2m to 1e-12.
        let cf = clifford_closed_form(5, 2, 0.8f64.sqrt(), 1.0).unwrap();
        assert_relative_eq!(cf.excess, 1.0 / 6.0, max_relative = 1e-12);
        let direct = cf.a_norm_sq - cf.h * cf.h / 3.0 - 4.0;
        assert_relative_eq!(cf.excess, direct, epsilon = 1e-12);

        assert!(clifford_closed_form(4, 1, 0.0, 1.0).is_err());
        assert!(clifford_closed_form(4, 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn clifford_spectrum_consistent_with_closed_form() {
        for n in 2..=8usize {
            for m in 1..n {
                for i in 1..40 {
                    let r = i as f64 / 40.0;
                    let cf = clifford_closed_form(n, m, r, 1.0).unwrap();
                    let spec = ShapeSpectrum::clifford(n, m, r, 1.0).unwrap();
                    let inv = invariants(&spec);
                    let excess = inv.a_norm_sq - inv.h * inv.h / (n as f64 - m as f64)
                        - 2.0 * m as f64;
                    let scale = cf.a_norm_sq.abs().max(1.0);
                    assert!(
                        (inv.a_norm_sq - cf.a_norm_sq).abs() <= 1e-12 * scale
                            && (inv.h - cf.h).abs() <= 1e-12 * scale.sqrt()
                            && (excess - cf.excess).abs() <= 1e-12 * scale,
                        "(n, m, r) = ({n}, {m}, {r})"
                    );
                }
            }
        }
    }

    #[test]
    fn coefficient_identities_over_admissible_grid() {
        for n in 2..=8usize {
            for m in 1..=n.div_ceil(2) {
                for ai in 1..10 {
                    let alpha = ai as f64 / 10.0;
                    let p = params(n, m, alpha, 1.0);
                    if !p.admissible() {
                        continue;
                    }
                    let c = coefficients(&p, 0.0).unwrap();
                    let nf = n as f64;
                    // a_m = 2/(2n - b_m) exactly.
                    assert_relative_eq!(c.a_m, 2.0 / (2.0 * nf - c.b_m), max_relative = 1e-14);
                    // a_m <= 3/(n+2) and n/(2n - b_m) <= 1.
                    assert!(c.a_m <= 3.0 / (nf + 2.0) + 1e-14);
                    assert!(nf / (2.0 * nf - c.b_m) <= 1.0 + 1e-14);
                    // beta > 0 for admissible parameters.
                    assert!(c.beta > 0.0);
                    assert!(c.eta0 > 0.0 && c.delta > 0.0);
                }
            }
        }
    }

    #[test]
    fn unit_sphere_volumes() {
        let pi = std::f64::consts::PI;
        assert_relative_eq!(unit_sphere_volume(0), 2.0, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_volume(1), 2.0 * pi, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_volume(2), 4.0 * pi, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_volume(3), 2.0 * pi * pi, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_volume(4), 8.0 * pi * pi / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn in_u_monotone_in_g() {
        // Set-membership logic: lowering g with f fixed can only keep or gain
        // membership.
        let member = |f: f64, g: f64| f >= 0.0 && g <= 0.0;
        for f in [-1.0, 0.0, 1.0] {
            for g in [-1.0, 0.0, 1.0] {
                if member(f, g) {
                    assert!(member(f, g - 0.5));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn scaling_covariance(
            raw in proptest::collection::vec(-3.0f64..3.0, 2..8),
            ci in 0usize..3,
        ) {
            let c = [0.5, 2.0, 10.0][ci];
            let n = raw.len();
            let m = 1usize;
            let spec = ShapeSpectrum::new(raw);
            let scaled = spec.scaled(c);
            let k = 1.0;
            let k2 = c * c;

            let inv = invariants(&spec);
            let inv_s = invariants(&scaled);
            prop_assert!((inv_s.h - c * inv.h).abs() <= 1e-10 * (1.0 + inv.h.abs() * c));
            prop_assert!((inv_s.a_norm_sq - c * c * inv.a_norm_sq).abs()
                <= 1e-10 * (1.0 + inv.a_norm_sq * c * c));

            let p1 = PinchingParams::unbounded(n, m, 0.4, k).unwrap();
            let p2 = PinchingParams::unbounded(n, m, 0.4, k2).unwrap();
            if p1.admissible() {
                let co1 = coefficients(&p1, 0.0).unwrap();
                let co2 = coefficients(&p2, 0.0).unwrap();
                let w1 = w_value(&spec, &co1, k);
                let w2 = w_value(&scaled, &co2, k2);
                prop_assert!((w2 - c * c * w1).abs() <= 1e-9 * (1.0 + w1.abs() * c * c));

                let r1 = pinching_report(&spec, &p1, 0.01).unwrap();
                let r2 = pinching_report(&scaled, &p2, 0.01).unwrap();
                let s2 = c * c;
                prop_assert!((r2.g_m_alpha - s2 * r1.g_m_alpha).abs()
                    <= 1e-9 * (1.0 + r1.g_m_alpha.abs() * s2));
                prop_assert!((r2.f_eta - s2 * r1.f_eta).abs()
                    <= 1e-9 * (1.0 + r1.f_eta.abs() * s2));
            }

            let c6 = c.powi(6);
            let s1 = simons_c_norm_sq(&spec, k);
            let s2 = simons_c_norm_sq(&scaled, k2);
            prop_assert!((s2 - c6 * s1).abs() <= 1e-8 * (1.0 + s1 * c6));
        }

        #[test]
        fn simons_vanishes_on_two_group_spectra(
            m in 1usize..7,
            extra in 1usize..7,
            t in 0.1f64..4.0,
        ) {
            let n = m + extra;
            if n <= 8 {
                let mut lambda = vec![t; m];
                lambda.extend(std::iter::repeat(-1.0 / t).take(n - m));
                let spec = ShapeSpectrum::new(lambda);
                let c2 = simons_c_norm_sq(&spec, 1.0);
                prop_assert!(c2.abs() <= 1e-9 * (1.0 + spec.a_norm_sq().powi(3)));
            }
        }
    }
}
