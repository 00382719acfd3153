//! Equivariant solver validation: closed-form regressions against the
//! homogeneous families, convergence orders, and a finite-difference oracle
//! on the embedded parametrization in R^5 for the derivative-norm
//! reductions.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use pinchflow_core::curvature::{self, unit_sphere_volume, PinchingParams, ShapeSpectrum};
use pinchflow_core::equivariant::{
    self, classify_class_c, geometry, init_profile, run, step, DtPolicy, EquivariantScenario,
    ProfileSpec, SymmetryType,
};
use pinchflow_core::homogeneous;
use pinchflow_core::trace::TerminalEvent;

fn params(n: usize, m: usize, alpha: f64, k: f64) -> PinchingParams {
    PinchingParams::unbounded(n, m, alpha, k).unwrap()
}

#[test]
fn geodesic_sphere_state_is_umbilic() {
    for (n, p, q, k, rho0) in [
        (3usize, 2usize, 2usize, 1.0f64, 0.9f64),
        (4, 1, 4, 1.0, 1.1),
        (4, 2, 3, 4.0, 0.5),
    ] {
        let pr = params(n, 1, 0.5, k);
        let sym = SymmetryType::new(p, q).unwrap();
        let state =
            init_profile(&ProfileSpec::GeodesicSphere { rho0 }, sym, &pr, 256).unwrap();
        let geo = geometry(&state).unwrap();
        let c = k.sqrt() * (k.sqrt() * rho0).cos() / (k.sqrt() * rho0).sin();
        let h_rel = state.mean_spacing() * k.sqrt();
        let tol = 20.0 * h_rel * h_rel * (c.abs() + k.sqrt());
        for g in &geo {
            assert_abs_diff_eq!(g.kappa, c, epsilon = tol);
            assert_abs_diff_eq!(g.lam_a, c, epsilon = tol);
            assert_abs_diff_eq!(g.lam_b, c, epsilon = tol);
            assert_abs_diff_eq!(g.h, n as f64 * c, epsilon = n as f64 * tol);
            // Umbilic: derivative norms vanish at O(h^2).
            assert!(g.grad_a_sq < tol * tol * 100.0);
        }
    }
}

#[test]
fn zero_amplitude_band_matches_torus_spectrum() {
    // (p, q) = (2, 3) generates S^1(r) x S^3(s) in S^5: the torus index is
    // m = p - 1 = 1 with n = 4.
    let pr = params(4, 1, 0.5, 1.0);
    let sym = SymmetryType::new(2, 3).unwrap();
    let phi0 = 0.7f64;
    let state = init_profile(
        &ProfileSpec::CliffordBand { phi0, amplitude: 0.0, mode: 2 },
        sym,
        &pr,
        256,
    )
    .unwrap();
    let geo = geometry(&state).unwrap();
    let (r, s) = (phi0.cos(), phi0.sin());
    let h_rel = state.mean_spacing();
    let tol = 30.0 * h_rel * h_rel / (r * s).powi(2);
    for g in &geo {
        // Spectrum (-s/r with multiplicity 1, r/s with multiplicity 3):
        // kappa and lam_b sit on the r/s ray, lam_a on -s/r.
        assert_abs_diff_eq!(g.lam_a, -s / r, epsilon = tol);
        assert_abs_diff_eq!(g.kappa, r / s, epsilon = tol);
        assert_abs_diff_eq!(g.lam_b, r / s, epsilon = tol);
        assert!(g.grad_a_sq < tol * tol * 50.0, "grad {}", g.grad_a_sq);
    }
    let cf = curvature::clifford_closed_form(4, 1, r, 1.0).unwrap();
    let mid = &geo[geo.len() / 2];
    assert_relative_eq!(mid.h, cf.h, max_relative = 1e-4);
    assert_relative_eq!(mid.a_norm_sq, cf.a_norm_sq, max_relative = 1e-4);
}

#[test]
fn perturbed_band_excess_matches_closed_form_pointwise() {
    // Along any band profile the pointwise spectrum stays within the
    // two-group family, so the product formula for the excess holds with
    // the local radius.
    let pr = params(4, 1, 0.3, 1.0);
    let sym = SymmetryType::new(2, 3).unwrap();
    let state = init_profile(
        &ProfileSpec::CliffordBand { phi0: 0.7, amplitude: 0.0, mode: 1 },
        sym,
        &pr,
        512,
    )
    .unwrap();
    let geo = geometry(&state).unwrap();
    for g in geo.iter().step_by(37) {
        let rep = curvature::pinching_report(
            &ShapeSpectrum::new(vec![g.kappa, g.lam_a, g.lam_b, g.lam_b]),
            &pr,
            0.0,
        )
        .unwrap();
        let excess = g.a_norm_sq - g.h * g.h / 3.0 - 2.0;
        assert_relative_eq!(rep.f_m_eta - 2.0, excess, epsilon = 1e-10 * (1.0 + g.a_norm_sq));
    }
}

// ---------------------------------------------------------------------
// Embedding oracle: finite differences on the parametrized hypersurface in
// R^5 (n = 3, (p, q) = (2, 2)), fully independent of the production
// reductions.
// ---------------------------------------------------------------------

const THETA0: f64 = 0.8;
const AMP2: f64 = 0.12;
const AMP3: f64 = 0.06;

fn theta_of(chi: f64) -> f64 {
    let u = chi + std::f64::consts::FRAC_PI_2;
    THETA0 + AMP2 * (2.0 * u).cos() + AMP3 * (3.0 * u).cos()
}

/// Embedded parametrization X(chi, alpha, beta) of the band about the
/// a-pole: S^1(a) x S^1(b) fibered over the profile, inside S^4 in R^5.
fn embed(c: [f64; 3]) -> [f64; 5] {
    let (chi, al, be) = (c[0], c[1], c[2]);
    let th = theta_of(chi);
    let a = th.cos();
    let b = th.sin() * chi.cos();
    let z = th.sin() * chi.sin();
    [a * al.cos(), a * al.sin(), b * be.cos(), b * be.sin(), z]
}

fn add5(a: [f64; 5], b: [f64; 5], f: f64) -> [f64; 5] {
    [
        a[0] + f * b[0],
        a[1] + f * b[1],
        a[2] + f * b[2],
        a[3] + f * b[3],
        a[4] + f * b[4],
    ]
}

fn dot5(a: [f64; 5], b: [f64; 5]) -> f64 {
    (0..5).map(|i| a[i] * b[i]).sum()
}

/// Analytic profile derivatives (chain rule through theta).
fn profile_derivs(chi: f64) -> [[f64; 3]; 3] {
    let u = chi + std::f64::consts::FRAC_PI_2;
    let th = theta_of(chi);
    let th1 = -2.0 * AMP2 * (2.0 * u).sin() - 3.0 * AMP3 * (3.0 * u).sin();
    let th2 = -4.0 * AMP2 * (2.0 * u).cos() - 9.0 * AMP3 * (3.0 * u).cos();
    let (st, ct) = (th.sin(), th.cos());
    let (sc, cc) = (chi.sin(), chi.cos());
    let a = ct;
    let a1 = -st * th1;
    let a2 = -ct * th1 * th1 - st * th2;
    let b = st * cc;
    let b1 = ct * th1 * cc - st * sc;
    let b2 = (-st * th1 * th1 + ct * th2) * cc - 2.0 * ct * th1 * sc - st * cc;
    let z = st * sc;
    let z1 = ct * th1 * sc + st * cc;
    let z2 = (-st * th1 * th1 + ct * th2) * sc + 2.0 * ct * th1 * cc - st * sc;
    [[a, b, z], [a1, b1, z1], [a2, b2, z2]]
}

/// Analytic first partials of the embedding.
fn partial(c: [f64; 3], k: usize, _h: f64) -> [f64; 5] {
    let (chi, al, be) = (c[0], c[1], c[2]);
    let d = profile_derivs(chi);
    let (a, b) = (d[0][0], d[0][1]);
    match k {
        0 => {
            let (a1, b1, z1) = (d[1][0], d[1][1], d[1][2]);
            [a1 * al.cos(), a1 * al.sin(), b1 * be.cos(), b1 * be.sin(), z1]
        }
        1 => [-a * al.sin(), a * al.cos(), 0.0, 0.0, 0.0],
        _ => [0.0, 0.0, -b * be.sin(), b * be.cos(), 0.0],
    }
}

/// Analytic second partials of the embedding.
fn second_partial(c: [f64; 3], k: usize, l: usize, _h: f64) -> [f64; 5] {
    let (chi, al, be) = (c[0], c[1], c[2]);
    let d = profile_derivs(chi);
    let (a, b) = (d[0][0], d[0][1]);
    let (a1, b1) = (d[1][0], d[1][1]);
    let (a2, b2, z2) = (d[2][0], d[2][1], d[2][2]);
    let (lo, hi) = (k.min(l), k.max(l));
    match (lo, hi) {
        (0, 0) => [a2 * al.cos(), a2 * al.sin(), b2 * be.cos(), b2 * be.sin(), z2],
        (0, 1) => [-a1 * al.sin(), a1 * al.cos(), 0.0, 0.0, 0.0],
        (0, 2) => [0.0, 0.0, -b1 * be.sin(), b1 * be.cos(), 0.0],
        (1, 1) => [-a * al.cos(), -a * al.sin(), 0.0, 0.0, 0.0],
        (2, 2) => [0.0, 0.0, -b * be.cos(), -b * be.sin(), 0.0],
        _ => [0.0; 5],
    }
}

/// Unit vector orthogonal to four vectors in R^5 (generalized cross product
/// by cofactor expansion).
fn ortho5(rows: [[f64; 5]; 4]) -> [f64; 5] {
    let det4 = |m: [[f64; 4]; 4]| -> f64 {
        let mut det = 0.0;
        for j in 0..4 {
            let mut minor = [[0.0; 3]; 3];
            for (r, row) in m.iter().enumerate().skip(1) {
                let mut cc = 0;
                for (col, v) in row.iter().enumerate() {
                    if col != j {
                        minor[r - 1][cc] = *v;
                        cc += 1;
                    }
                }
            }
            let d3 = minor[0][0] * (minor[1][1] * minor[2][2] - minor[1][2] * minor[2][1])
                - minor[0][1] * (minor[1][0] * minor[2][2] - minor[1][2] * minor[2][0])
                + minor[0][2] * (minor[1][0] * minor[2][1] - minor[1][1] * minor[2][0]);
            det += if j % 2 == 0 { 1.0 } else { -1.0 } * m[0][j] * d3;
        }
        det
    };
    let mut v = [0.0; 5];
    for i in 0..5 {
        let mut m = [[0.0; 4]; 4];
        for (r, row) in rows.iter().enumerate() {
            let mut cc = 0;
            for (col, val) in row.iter().enumerate() {
                if col != i {
                    m[r][cc] = *val;
                    cc += 1;
                }
            }
        }
        v[i] = if i % 2 == 0 { 1.0 } else { -1.0 } * det4(m);
    }
    let n = dot5(v, v).sqrt();
    for x in &mut v {
        *x /= n;
    }
    v
}

/// Oracle metric at a coordinate point (3x3).
fn oracle_metric(c: [f64; 3]) -> [[f64; 3]; 3] {
    let h = 1e-6;
    let d: Vec<[f64; 5]> = (0..3).map(|k| partial(c, k, h)).collect();
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = dot5(d[i], d[j]);
        }
    }
    g
}

fn inv3(g: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut m = [[0.0; 2]; 2];
            let mut rr = 0;
            for r in 0..3 {
                if r == i {
                    continue;
                }
                let mut cc = 0;
                for col in 0..3 {
                    if col == j {
                        continue;
                    }
                    m[rr][cc] = g[r][col];
                    cc += 1;
                }
                rr += 1;
            }
            let cof = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            inv[j][i] = if (i + j) % 2 == 0 { cof } else { -cof } / det;
        }
    }
    inv
}

/// Second fundamental form (coordinate components) at `c`, with the normal
/// oriented to have positive mean curvature trace.
fn oracle_a(c: [f64; 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let h = 1e-5;
    let x = embed(c);
    let d: Vec<[f64; 5]> = (0..3).map(|k| partial(c, k, h)).collect();
    let mut nu = ortho5([x, d[0], d[1], d[2]]);
    let g = oracle_metric(c);
    let ginv = inv3(g);
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = -dot5(second_partial(c, i, j, h), nu);
        }
    }
    // Fix orientation: make tr(A) match the production convention (the
    // production normal gives the paper's torus H sign; for this profile the
    // trace is positive).
    let mut tr = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            tr += ginv[i][j] * a[i][j];
        }
    }
    if tr < 0.0 {
        for row in &mut a {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        for v in &mut nu {
            *v = -*v;
        }
    }
    (a, g)
}

fn oracle_christoffel(c: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
    let h = 1e-5;
    let mut dg = [[[0.0; 3]; 3]; 3]; // dg[k][i][j] = d_k g_ij
    for k in 0..3 {
        let mut cp = c;
        let mut cm = c;
        cp[k] += h;
        cm[k] -= h;
        let (gp, gm) = (oracle_metric(cp), oracle_metric(cm));
        for i in 0..3 {
            for j in 0..3 {
                dg[k][i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
            }
        }
    }
    let ginv = inv3(oracle_metric(c));
    let mut gam = [[[0.0; 3]; 3]; 3];
    for l in 0..3 {
        for k in 0..3 {
            for i in 0..3 {
                let mut s = 0.0;
                for m in 0..3 {
                    s += ginv[l][m] * (dg[k][m][i] + dg[i][m][k] - dg[m][k][i]);
                }
                gam[l][k][i] = 0.5 * s;
            }
        }
    }
    gam
}

/// Covariant derivative components (nabla A)_{kij} at `c`.
fn oracle_nabla_a(c: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
    let h = 1e-5;
    let gam = oracle_christoffel(c);
    let (a0, _) = oracle_a(c);
    let mut da = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        let mut cp = c;
        let mut cm = c;
        cp[k] += h;
        cm[k] -= h;
        let (ap, _) = oracle_a(cp);
        let (am, _) = oracle_a(cm);
        for i in 0..3 {
            for j in 0..3 {
                da[k][i][j] = (ap[i][j] - am[i][j]) / (2.0 * h);
            }
        }
    }
    let mut na = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut v = da[k][i][j];
                for l in 0..3 {
                    v -= gam[l][k][i] * a0[l][j] + gam[l][k][j] * a0[i][l];
                }
                na[k][i][j] = v;
            }
        }
    }
    na
}

fn oracle_grad_a_sq(c: [f64; 3]) -> f64 {
    let na = oracle_nabla_a(c);
    let ginv = inv3(oracle_metric(c));
    let mut s = 0.0;
    for k in 0..3 {
        for kk in 0..3 {
            for i in 0..3 {
                for ii in 0..3 {
                    for j in 0..3 {
                        for jj in 0..3 {
                            s += ginv[k][kk] * ginv[i][ii] * ginv[j][jj]
                                * na[k][i][j]
                                * na[kk][ii][jj];
                        }
                    }
                }
            }
        }
    }
    s
}

fn oracle_grad_h_sq(c: [f64; 3]) -> f64 {
    let h = 1e-5;
    let ginv = inv3(oracle_metric(c));
    let trace_at = |cc: [f64; 3]| -> f64 {
        let (a, g) = oracle_a(cc);
        let gi = inv3(g);
        let mut tr = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                tr += gi[i][j] * a[i][j];
            }
        }
        tr
    };
    let mut dh = [0.0; 3];
    for k in 0..3 {
        let mut cp = c;
        let mut cm = c;
        cp[k] += h;
        cm[k] -= h;
        dh[k] = (trace_at(cp) - trace_at(cm)) / (2.0 * h);
    }
    let mut s = 0.0;
    for k in 0..3 {
        for kk in 0..3 {
            s += ginv[k][kk] * dh[k] * dh[kk];
        }
    }
    s
}

fn oracle_hess_a_sq(c: [f64; 3]) -> f64 {
    let h = 1e-4;
    let gam = oracle_christoffel(c);
    let na0 = oracle_nabla_a(c);
    let mut dna = [[[[0.0; 3]; 3]; 3]; 3];
    for w in 0..3 {
        let mut cp = c;
        let mut cm = c;
        cp[w] += h;
        cm[w] -= h;
        let (nap, nam) = (oracle_nabla_a(cp), oracle_nabla_a(cm));
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    dna[w][k][i][j] = (nap[k][i][j] - nam[k][i][j]) / (2.0 * h);
                }
            }
        }
    }
    let mut s2 = [[[[0.0; 3]; 3]; 3]; 3];
    for w in 0..3 {
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut v = dna[w][k][i][j];
                    for l in 0..3 {
                        v -= gam[l][w][k] * na0[l][i][j]
                            + gam[l][w][i] * na0[k][l][j]
                            + gam[l][w][j] * na0[k][i][l];
                    }
                    s2[w][k][i][j] = v;
                }
            }
        }
    }
    let ginv = inv3(oracle_metric(c));
    let mut s = 0.0;
    for w in 0..3 {
        for ww in 0..3 {
            for k in 0..3 {
                for kk in 0..3 {
                    for i in 0..3 {
                        for ii in 0..3 {
                            for j in 0..3 {
                                for jj in 0..3 {
                                    s += ginv[w][ww]
                                        * ginv[k][kk]
                                        * ginv[i][ii]
                                        * ginv[j][jj]
                                        * s2[w][k][i][j]
                                        * s2[ww][kk][ii][jj];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    s
}

fn analytic_band_state(n_grid: usize) -> equivariant::FlowState {
    let pr = params(3, 1, 0.5, 1.0);
    let sym = SymmetryType::new(2, 2).unwrap();
    // Sample the analytic curve densely, then feed through the standard
    // resampler at the requested resolution.
    let dense = 8192;
    let pts: Vec<[f64; 3]> = (0..=dense)
        .map(|j| {
            let chi = -std::f64::consts::FRAC_PI_2
                + std::f64::consts::PI * j as f64 / dense as f64;
            let th = theta_of(chi);
            [th.cos(), th.sin() * chi.cos(), th.sin() * chi.sin()]
        })
        .collect();
    let mut state = init_profile(
        &ProfileSpec::CliffordBand { phi0: THETA0, amplitude: AMP2, mode: 2 },
        sym,
        &pr,
        n_grid,
    )
    .unwrap();
    // Replace the grid with the two-mode analytic curve.
    state.grid = equivariant::resample_uniform(&pts, &state.topology, n_grid + 1, 1.0);
    state.validate().unwrap();
    state
}

#[test]
fn derivative_norms_match_embedding_oracle() {
    let n_grid = 2048;
    let state = analytic_band_state(n_grid);
    let geo = geometry(&state).unwrap();

    for frac in [0.18, 0.33, 0.5, 0.71, 0.86] {
        let idx = (n_grid as f64 * frac) as usize;
        let pt = state.grid[idx];
        let chi = pt[2].atan2(pt[1]);
        let c = [chi, 0.3, 1.1];

        // Pointwise curvature data: eigenvalues of g^{-1} A.
        let (a, g) = oracle_a(c);
        let ginv = inv3(g);
        // g is diagonal and A is diagonal in these coordinates; the
        // principal curvatures are A_ii / g_ii.
        let eigs = [a[0][0] * ginv[0][0], a[1][1] * ginv[1][1], a[2][2] * ginv[2][2]];
        let mut oracle_spec = eigs.to_vec();
        oracle_spec.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let gp = &geo[idx];
        let mut solver_spec = vec![gp.kappa, gp.lam_a, gp.lam_b];
        solver_spec.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (s, o) in solver_spec.iter().zip(&oracle_spec) {
            assert_abs_diff_eq!(s, o, epsilon = 2e-4);
        }

        let o_grad = oracle_grad_a_sq(c);
        let o_gradh = oracle_grad_h_sq(c);
        let o_hess = oracle_hess_a_sq(c);
        assert_relative_eq!(gp.grad_a_sq, o_grad, max_relative = 2e-3, epsilon = 1e-6);
        assert_relative_eq!(gp.grad_h_sq, o_gradh, max_relative = 2e-3, epsilon = 1e-6);
        assert_relative_eq!(gp.hess_a_sq, o_hess, max_relative = 1e-2, epsilon = 1e-4);
    }
}

#[test]
fn derivative_norms_converge_at_order_two() {
    // Richardson against the embedding oracle at a fixed interior material
    // point.
    let mut errs = Vec::new();
    for n_grid in [256usize, 512, 1024] {
        let state = analytic_band_state(n_grid);
        let geo = geometry(&state).unwrap();
        let idx = n_grid / 2;
        let pt = state.grid[idx];
        let chi = pt[2].atan2(pt[1]);
        let o_grad = oracle_grad_a_sq([chi, 0.0, 0.0]);
        errs.push((geo[idx].grad_a_sq - o_grad).abs());
    }
    let order1 = (errs[0] / errs[1]).log2();
    let order2 = (errs[1] / errs[2]).log2();
    assert!(
        order1 > 1.8 && order2 > 1.6,
        "orders {order1:.2}, {order2:.2}, errs {errs:?}"
    );
}

#[test]
fn kato_inequality_pointwise() {
    // |grad A|^2 >= 3/(n+2) |grad H|^2 holds exactly for the reduced
    // tensors; assert it over a nontrivial evolving state.
    let pr = params(4, 2, 0.5, 1.0);
    let sym = SymmetryType::new(1, 4).unwrap();
    let state = init_profile(
        &ProfileSpec::Dumbbell {
            neck_ratio: 0.25,
            bulge_ratio: 0.8,
            neck_length: 0.5,
        },
        sym,
        &pr,
        384,
    )
    .unwrap();
    let geo = geometry(&state).unwrap();
    let bound = 3.0 / (4.0 + 2.0);
    for g in &geo {
        if g.grad_h_sq > 0.0 {
            assert!(
                g.grad_a_sq / g.grad_h_sq >= bound * (1.0 - 1e-6),
                "ratio {} at sigma {}",
                g.grad_a_sq / g.grad_h_sq,
                g.sigma
            );
        }
    }
}

#[test]
fn equator_state_is_a_fixed_point() {
    let pr = params(3, 1, 0.5, 1.0);
    let sym = SymmetryType::new(2, 2).unwrap();
    let state = init_profile(
        &ProfileSpec::GeodesicSphere { rho0: std::f64::consts::FRAC_PI_2 },
        sym,
        &pr,
        128,
    )
    .unwrap();
    let before = state.grid.clone();
    let (after, info) = step(&state, &DtPolicy::default()).unwrap();
    let mut max_disp = 0.0f64;
    for (a, b) in after.grid.iter().zip(&before) {
        for c in 0..3 {
            max_disp = max_disp.max((a[c] - b[c]).abs());
        }
    }
    assert!(max_disp < 1e-12, "displacement {max_disp} with dt {}", info.dt);
}

#[test]
fn sphere_extinction_matches_closed_form_midres() {
    // Full acceptance runs N = 1024 over the whole grid of configs; this is
    // the fast regression at N = 256.
    let pr = params(3, 1, 0.5, 1.0);
    let sym = SymmetryType::new(2, 2).unwrap();
    let scenario = EquivariantScenario {
        sym,
        profile: ProfileSpec::GeodesicSphere { rho0: std::f64::consts::PI / 3.0 },
        resolution: 256,
        horizon: 1.0,
        snapshot_dt: 0.005,
        dt_policy: DtPolicy { singular_a2_over_k: 1e4, ..Default::default() },
    };
    let trace = run(&scenario, &pr).unwrap();
    let t_exact = homogeneous::hyperparallel_extinction_time(3, 1.0, std::f64::consts::PI / 3.0)
        .unwrap();
    let (t_est, _) = pinchflow_core::rescaler::estimate_singular_time(&trace).unwrap();
    assert_relative_eq!(t_est, t_exact, max_relative = 5e-4);
    assert!(matches!(
        trace.terminal,
        TerminalEvent::Extinction { .. } | TerminalEvent::Singularity { .. }
    ));
}

#[test]
fn area_is_nonincreasing_along_runs() {
    let pr = params(3, 1, 0.5, 1.0);
    let sym = SymmetryType::new(2, 2).unwrap();
    let scenario = EquivariantScenario {
        sym,
        profile: ProfileSpec::CliffordBand { phi0: 0.6, amplitude: 0.05, mode: 2 },
        resolution: 192,
        horizon: 0.05,
        snapshot_dt: 0.005,
        dt_policy: DtPolicy::default(),
    };
    let trace = run(&scenario, &pr).unwrap();
    for w in trace.snapshots.windows(2) {
        let (a0, a1) = (w[0].area(), w[1].area());
        let dt = (w[1].t - w[0].t).max(1e-12);
        assert!(
            a1 <= a0 * (1.0 + 1e-3 * dt),
            "area grew: {a0} -> {a1} over dt {dt}"
        );
    }
}

#[test]
fn classify_equator_and_sphere_areas() {
    let pr = params(3, 1, 0.5, 1.0);
    let sym = SymmetryType::new(2, 2).unwrap();
    let eq = init_profile(
        &ProfileSpec::GeodesicSphere { rho0: std::f64::consts::FRAC_PI_2 },
        sym,
        &pr,
        512,
    )
    .unwrap();
    let rep = classify_class_c(&eq, &pr).unwrap();
    // Unit S^3 has area 2 pi^2 (quadrature vs closed form to 1e-8); the
    // equator is totally geodesic.
    assert_relative_eq!(rep.v_measured, 2.0 * std::f64::consts::PI.powi(2), max_relative = 1e-8);
    assert!(rep.theta_measured < 1e-12);

    for rho0 in [0.6, 1.1] {
        let st = init_profile(&ProfileSpec::GeodesicSphere { rho0 }, sym, &pr, 512).unwrap();
        let rep = classify_class_c(&st, &pr).unwrap();
        let exact = unit_sphere_volume(3) * rho0.sin().powi(3);
        assert_relative_eq!(rep.v_measured, exact, max_relative = 1e-8);
    }
}

#[test]
fn zero_amplitude_band_never_in_class() {
    // The same-index torus family violates the uniform pinching for every
    // admissible alpha.
    for alpha in [0.05, 0.5, 0.9] {
        let pr = params(4, 1, alpha, 1.0);
        let sym = SymmetryType::new(2, 3).unwrap();
        for phi0 in [0.4, minimal_phi(4, 1), 1.1] {
            let st = init_profile(
                &ProfileSpec::CliffordBand { phi0, amplitude: 0.0, mode: 1 },
                sym,
                &pr,
                128,
            )
            .unwrap();
            let rep = classify_class_c(&st, &pr).unwrap();
            assert!(!rep.in_class, "alpha {alpha}, phi0 {phi0}: {rep:?}");
            assert!(rep.max_g > 0.0);
        }
    }
}

fn minimal_phi(n: usize, m: usize) -> f64 {
    homogeneous::minimal_clifford_angle(n, m)
}

#[test]
fn axis_regularity_residual_is_second_order() {
    let pr = params(3, 1, 0.5, 1.0);
    let sym = SymmetryType::new(2, 2).unwrap();
    let mut residuals = Vec::new();
    for n_grid in [128usize, 256, 512] {
        let st = init_profile(&ProfileSpec::GeodesicSphere { rho0: 0.8 }, sym, &pr, n_grid)
            .unwrap();
        let d = st.validate().unwrap();
        residuals.push(d.axis_regularity_residual.max(1e-16));
    }
    let order = (residuals[0] / residuals[2]).log2() / 2.0;
    assert!(order > 1.5, "axis residual order {order:.2}: {residuals:?}");
}

#[test]
fn dumbbell_is_valid_and_classified() {
    let pr = params(4, 2, 0.5, 1.0);
    let sym = SymmetryType::new(1, 4).unwrap();
    let st = init_profile(
        &ProfileSpec::Dumbbell {
            neck_ratio: 0.15,
            bulge_ratio: 0.9,
            neck_length: 0.5,
        },
        sym,
        &pr,
        512,
    )
    .unwrap();
    assert!(st.class_verdict.is_some());
    st.validate().unwrap();
}
