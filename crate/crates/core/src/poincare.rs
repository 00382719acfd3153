//! Numerical certification of the pointwise algebraic inequality
//! `gamma W^3 <= |C|^2 + 1` over the constraint set
//! `U = { f_{m-1,eta} >= 0 >= g_{m,alpha} }` (curvature normalized to 1),
//! by multistart projected-descent minimization of `(|C|^2 + 1)/W^3` over
//! spectrum space.
//!
//! The certificates are empirical lower-bound estimates: the structured
//! starts cover the degeneration modes (near-torus rays and spectra with a
//! null block), and every result is reproducible from `(seed, budget)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{coefficients, PinchingParams};
use crate::error::{Error, Result};

/// Ratio sample along the two-group ray `(t, ..., t, -1/t, ..., -1/t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySample {
    pub t: f64,
    #[serde(rename = "W")]
    pub w: f64,
    /// `(|C|^2 + 1) / W^3`; the Simons norm vanishes identically on the ray.
    pub ratio: f64,
    /// `g_{m,alpha}` of the (unnormalized) ray point: leaves `U` for large `t`.
    pub g_of_lambda: f64,
    /// Unit-normalized spectrum `lambda / sqrt(W)`.
    pub lambda_hat: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaCertificate {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub eta: f64,
    /// Estimated infimum of `(|C|^2 + 1)/W^3` over `U`.
    pub gamma_hat: f64,
    pub minimizer: Vec<f64>,
    /// Constraint values at the minimizer.
    pub f_at_min: f64,
    pub g_at_min: f64,
    pub budget: usize,
    pub seed: u64,
    pub unconstrained_ray: Vec<RaySample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub ell: usize,
    /// `(n-l) - (n-l)^2/(n-m+1) - eta (n-l)^2 >= 0` margin.
    pub margin_first: f64,
    /// `(n-l) - (n-l)^2/(n-m+alpha) <= 0` margin.
    pub margin_second: f64,
    pub both_hold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
    /// True iff no integer multiplicity satisfies both inequalities.
    pub pass: bool,
}

struct Objective {
    n: usize,
    a: f64,
    b: f64,
    c_f: f64,
    inv_nma: f64,
    g_const: f64,
}

impl Objective {
    fn new(params: &PinchingParams, eta: f64) -> Result<Self> {
        let ce = coefficients(params, eta)?;
        let nf = params.n as f64;
        let mf = params.m as f64;
        Ok(Self {
            n: params.n,
            a: ce.a,
            b: ce.b,
            c_f: ce.inv_n_m_plus_1() + eta,
            inv_nma: 1.0 / (nf - mf + params.alpha),
            g_const: 2.0 * (mf - params.alpha),
        })
    }

    fn h(&self, l: &[f64]) -> f64 {
        l.iter().sum()
    }

    fn norm_sq(&self, l: &[f64]) -> f64 {
        l.iter().map(|x| x * x).sum()
    }

    fn w(&self, l: &[f64]) -> f64 {
        let h = self.h(l);
        self.a * h * h + self.b
    }

    /// `f_{m-1,eta} = |l|^2 - (1/(n-m+1) + eta) H^2`.
    fn f_constraint(&self, l: &[f64]) -> f64 {
        let h = self.h(l);
        self.norm_sq(l) - self.c_f * h * h
    }

    /// `g_{m,alpha} = |l|^2 - H^2/(n-m+alpha) - 2(m-alpha)`.
    fn g_constraint(&self, l: &[f64]) -> f64 {
        let h = self.h(l);
        self.norm_sq(l) - self.inv_nma * h * h - self.g_const
    }

    fn c2(&self, l: &[f64]) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let d = l[j] - l[i];
                let p = l[i] * l[j] + 1.0;
                sum += d * d * p * p;
            }
        }
        sum
    }

    fn ratio(&self, l: &[f64]) -> f64 {
        let w = self.w(l);
        (self.c2(l) + 1.0) / (w * w * w)
    }

    fn ratio_grad(&self, l: &[f64], grad: &mut [f64]) {
        let w = self.w(l);
        let c2 = self.c2(l);
        let h = self.h(l);
        // d/dl_k of C2: each unordered pair appears twice in the double sum.
        for k in 0..self.n {
            let mut dc2 = 0.0;
            for j in 0..self.n {
                if j == k {
                    continue;
                }
                let d = l[j] - l[k];
                let p = l[k] * l[j] + 1.0;
                dc2 += 2.0 * (-2.0 * d * p * p + d * d * 2.0 * p * l[j]);
            }
            let dw = 2.0 * self.a * h;
            grad[k] = dc2 / (w * w * w) - 3.0 * (c2 + 1.0) * dw / (w * w * w * w);
        }
    }

    /// Projects onto `{f >= 0}` (a cone around the traceless subspace) and
    /// then scales into `{g <= 0}`; scaling preserves the sign of `f`.
    fn project(&self, l: &mut [f64]) {
        let n = self.n as f64;
        let kappa_sq = self.c_f * n - 1.0;
        if kappa_sq > 0.0 {
            let kappa = kappa_sq.sqrt();
            let le = self.h(l) / n.sqrt();
            let mut perp: Vec<f64> = l.iter().map(|x| x - le / n.sqrt()).collect();
            let wn = perp.iter().map(|x| x * x).sum::<f64>().sqrt();
            if wn < kappa * le.abs() {
                // Project (z, w) onto the half-line w = kappa |z|.
                let z = le.abs();
                let tstar = (z + kappa * wn) / (1.0 + kappa * kappa);
                let z_new = tstar * le.signum();
                let w_new = kappa * tstar;
                if wn > 1e-14 {
                    for p in &mut perp {
                        *p *= w_new / wn;
                    }
                } else {
                    // Degenerate: inject an arbitrary traceless direction.
                    let mut dir = vec![0.0; self.n];
                    dir[0] = std::f64::consts::FRAC_1_SQRT_2;
                    dir[1] = -std::f64::consts::FRAC_1_SQRT_2;
                    for (p, d) in perp.iter_mut().zip(dir) {
                        *p = w_new * d;
                    }
                }
                for (i, x) in l.iter_mut().enumerate() {
                    *x = z_new / n.sqrt() + perp[i];
                }
            }
        }
        // g-feasibility by scaling toward the origin.
        let h = self.h(l);
        let quad = self.norm_sq(l) - self.inv_nma * h * h;
        if quad > 0.0 {
            let g = quad - self.g_const;
            if g > 0.0 {
                let c = (self.g_const / quad).sqrt() * (1.0 - 1e-12);
                for x in l.iter_mut() {
                    *x *= c;
                }
            }
        }
    }
}

/// Multistart projected-descent minimization of `(|C|^2 + 1)/W^3` over `U`.
/// `budget` is the number of starts; each descent runs a bounded number of
/// backtracking iterations. Bit-for-bit reproducible from `(seed, budget)`.
pub fn min_ratio(
    params: &PinchingParams,
    eta: f64,
    budget: usize,
    seed: u64,
) -> Result<GammaCertificate> {
    params.require_admissible()?;
    if params.n < 3 {
        return Err(Error::ParamRange(
            "the verifier requires n >= 3 (behavior at n = 2 unspecified)".into(),
        ));
    }
    let nf = params.n as f64;
    let mf = params.m as f64;
    let eta_max = 1.0 / (nf - mf + params.alpha) - 1.0 / (nf - mf + 1.0);
    if !(eta > 0.0 && eta < eta_max) {
        return Err(Error::ParamRange(format!(
            "eta = {eta} outside (0, {eta_max}) required by the inequality"
        )));
    }
    let obj = Objective::new(params, eta)?;
    let n = params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best_val = f64::INFINITY;
    let mut best: Vec<f64> = Vec::new();
    let mut feasible_found = false;

    for start_idx in 0..budget {
        let mut l: Vec<f64> = match start_idx % 4 {
            0 => {
                let scale = [0.5, 2.0, 8.0][start_idx / 4 % 3];
                (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()
            }
            1 => {
                // Near-torus two-group spectra.
                let mm = 1 + start_idx / 4 % n.div_ceil(2).max(1);
                let t: f64 = [0.4, 1.0, 3.0, 10.0][start_idx / 8 % 4];
                let mut v: Vec<f64> = (0..n)
                    .map(|i| if i < mm { t } else { -1.0 / t })
                    .collect();
                for x in &mut v {
                    *x += 0.05 * rng.gen_range(-1.0..1.0);
                }
                v
            }
            2 => {
                // Null block of size ell plus an equal block.
                let ell = start_idx / 4 % n;
                let kap = [0.7, 2.0, -1.3][start_idx / 8 % 3];
                let mut v: Vec<f64> =
                    (0..n).map(|i| if i < ell { 0.0 } else { kap }).collect();
                for x in &mut v {
                    *x += 0.05 * rng.gen_range(-1.0..1.0);
                }
                v
            }
            _ => {
                let umb: f64 = rng.gen_range(0.2..2.0);
                (0..n).map(|_| umb + 0.3 * rng.gen_range(-1.0..1.0)).collect()
            }
        };
        obj.project(&mut l);
        if obj.f_constraint(&l) < -1e-9 || obj.g_constraint(&l) > 1e-9 {
            continue;
        }
        feasible_found = true;

        let mut val = obj.ratio(&l);
        let mut grad = vec![0.0; n];
        let mut step = 0.1;
        for _iter in 0..300 {
            obj.ratio_grad(&l, &mut grad);
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm < 1e-14 * (1.0 + val) {
                break;
            }
            let mut improved = false;
            for _bt in 0..25 {
                let mut cand: Vec<f64> =
                    l.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
                obj.project(&mut cand);
                let cval = obj.ratio(&cand);
                if cval < val - 1e-16 * (1.0 + val.abs()) {
                    l = cand;
                    val = cval;
                    improved = true;
                    step *= 1.3;
                    break;
                }
                step *= 0.5;
            }
            if !improved || step < 1e-15 {
                break;
            }
        }
        if val < best_val && obj.f_constraint(&l) >= -1e-9 && obj.g_constraint(&l) <= 1e-9 {
            best_val = val;
            best = l;
        }
    }

    if !feasible_found || best.is_empty() {
        return Err(Error::Infeasible(format!(
            "no feasible start among {budget} candidates for (n, m, alpha, eta) = \
             ({}, {}, {}, {eta})",
            params.n, params.m, params.alpha
        )));
    }

    best.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let f_at_min = obj.f_constraint(&best);
    let g_at_min = obj.g_constraint(&best);
    Ok(GammaCertificate {
        n: params.n,
        m: params.m,
        alpha: params.alpha,
        eta,
        gamma_hat: best_val,
        minimizer: best,
        f_at_min,
        g_at_min,
        budget,
        seed,
        unconstrained_ray: clifford_ray_witness(params, eta, &[10.0, 100.0, 1000.0])?,
    })
}

/// Samples of the ratio along the two-group ray
/// `lambda(t) = (t x m, -1/t x (n-m))`: the Simons norm vanishes exactly, so
/// the ratio is `1/W^3 -> 0`, while `g_{m,alpha}` eventually turns positive
/// (the ray leaves `U`).
pub fn clifford_ray_witness(
    params: &PinchingParams,
    eta: f64,
    ts: &[f64],
) -> Result<Vec<RaySample>> {
    let obj = Objective::new(params, eta)?;
    let (n, m) = (params.n, params.m);
    Ok(ts
        .iter()
        .map(|&t| {
            let l: Vec<f64> = (0..n).map(|i| if i < m { t } else { -1.0 / t }).collect();
            let w = obj.w(&l);
            let lambda_hat = l.iter().map(|x| x / w.sqrt()).collect();
            RaySample {
                t,
                w,
                ratio: obj.ratio(&l),
                g_of_lambda: obj.g_constraint(&l),
                lambda_hat,
            }
        })
        .collect())
}

/// Checks that no integer `ell` can satisfy both one-group limit
/// inequalities (the interval `(m-1, m-alpha]` contains no integer).
pub fn multiplicity_gap_check(params: &PinchingParams, eta: f64) -> Result<GapReport> {
    params.require_admissible()?;
    if eta <= 0.0 {
        return Err(Error::ParamRange("eta must be positive".into()));
    }
    let nf = params.n as f64;
    let mf = params.m as f64;
    let mut rows = Vec::new();
    let mut pass = true;
    for ell in 0..params.n {
        let r = nf - ell as f64;
        let margin_first = r - r * r / (nf - mf + 1.0) - eta * r * r;
        let margin_second = r - r * r / (nf - mf + params.alpha);
        let both_hold = margin_first >= 0.0 && margin_second <= 0.0;
        if both_hold {
            pass = false;
        }
        rows.push(GapRow { ell, margin_first, margin_second, both_hold });
    }
    Ok(GapReport { rows, pass })
}

/// General-curvature ratio `(|C|^2_K + K^3)/W_K^3`, used by the scaling
/// invariance checks.
pub fn ratio_with_curvature(params: &PinchingParams, eta: f64, l: &[f64], k: f64) -> Result<f64> {
    let ce = coefficients(params, eta)?;
    let h: f64 = l.iter().sum();
    let w = ce.a * h * h + ce.b * k;
    let mut c2 = 0.0;
    for i in 0..l.len() {
        for j in 0..l.len() {
            let d = l[j] - l[i];
            let p = l[i] * l[j] + k;
            c2 += d * d * p * p;
        }
    }
    Ok((c2 + k * k * k) / (w * w * w))
}
