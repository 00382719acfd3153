//! Cohomogeneity-one mean curvature flow in `S^{n+1}_K`.
//!
//! An `SO(p) x SO(q)`-invariant hypersurface (`p + q = n + 1`) is encoded by
//! its profile curve in the quarter-sphere orbit space
//! `{(a, b, z): a, b >= 0, a^2 + b^2 + z^2 = 1/K}`; a profile point `(a, b, z)`
//! generates the orbit `S^{p-1}(a) x S^{q-1}(b)`. The flow moves the profile
//! with normal speed `-H` inside the orbit space, where `H` collects the
//! profile curvature and the two rotational principal curvatures.
//!
//! Orientation convention: the profile normal is `nu = T x sqrt(K) gamma`
//! (tangent cross orbit-sphere normal), the profile curvature is
//! `kappa = -<gamma'', nu>`, and the rotational curvatures are `nu_a / a`,
//! `nu_b / b`. Initializers traverse profiles so that geodesic spheres below
//! the equator get `H > 0` and shrink.

mod classify;
mod geometry;
mod init;
mod rkc;
mod stepper;

pub use classify::{classify_class_c, ClassCReport};
pub use geometry::{geometry, PointGeometry};
pub use init::{init_profile, resample_uniform, ProfileSpec};
pub use stepper::{run, run_from, step, DtPolicy, EquivariantScenario, StepInfo};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Block sizes of the symmetry group `SO(p) x SO(q)`, `p + q = n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryType {
    pub p: usize,
    pub q: usize,
}

impl SymmetryType {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p < 1 || q < 1 {
            return Err(Error::ParamRange(format!("block sizes ({p}, {q}) must be >= 1")));
        }
        Ok(Self { p, q })
    }

    /// Hypersurface dimension `n = p + q - 1`.
    pub fn n(&self) -> usize {
        self.p + self.q - 1
    }
}

/// Which boundary meridian an arc endpoint lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisEnd {
    /// `{a = 0}`: the `S^{p-1}` orbit factor collapses.
    A,
    /// `{b = 0}`: the `S^{q-1}` orbit factor collapses.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    ClosedLoop,
    Arc { start: AxisEnd, end: AxisEnd },
}

/// Discretized profile-curve snapshot of the hypersurface.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub sym: SymmetryType,
    /// Ambient sectional curvature.
    pub k: f64,
    pub topology: Topology,
    /// Profile points `(a, b, z)` at (approximately) uniform arclength.
    pub grid: Vec<[f64; 3]>,
    pub t: f64,
    pub regrid_epoch: u32,
    /// Class-membership verdict computed at construction time, if any.
    pub class_verdict: Option<ClassCReport>,
}

/// Validation diagnostics; see [`FlowState::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateDiagnostics {
    pub sphere_residual: f64,
    pub spacing_nonuniformity: f64,
    pub orthogonality_residual: f64,
    pub axis_regularity_residual: f64,
    pub mean_spacing: f64,
}

impl FlowState {
    pub fn n(&self) -> usize {
        self.sym.n()
    }

    pub fn radius(&self) -> f64 {
        1.0 / self.k.sqrt()
    }

    pub fn mean_spacing(&self) -> f64 {
        let mut len = 0.0;
        for w in self.grid.windows(2) {
            len += dist(w[0], w[1]);
        }
        let segs = match self.topology {
            Topology::ClosedLoop => {
                len += dist(self.grid[self.grid.len() - 1], self.grid[0]);
                self.grid.len()
            }
            Topology::Arc { .. } => self.grid.len() - 1,
        };
        len / segs as f64
    }

    /// Max relative deviation of the segment lengths from their mean.
    pub fn spacing_nonuniformity(&self) -> f64 {
        let mean = self.mean_spacing();
        let mut worst = 0.0f64;
        let mut check = |a: [f64; 3], b: [f64; 3]| {
            worst = worst.max((dist(a, b) / mean - 1.0).abs());
        };
        for w in self.grid.windows(2) {
            check(w[0], w[1]);
        }
        if let Topology::ClosedLoop = self.topology {
            check(self.grid[self.grid.len() - 1], self.grid[0]);
        }
        worst
    }

    /// Checks the state invariants; hard-errors on violations gross enough
    /// to invalidate the geometry (off-sphere points, negative radii,
    /// endpoints off their axes, non-orthogonal axis meetings).
    pub fn validate(&self) -> Result<StateDiagnostics> {
        let r = self.radius();
        if self.grid.len() < 8 {
            return Err(Error::Profile("fewer than 8 grid points".into()));
        }
        let mut sphere_residual = 0.0f64;
        for p in &self.grid {
            let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            sphere_residual = sphere_residual.max((norm / r - 1.0).abs());
            if !(p[0] >= -1e-12 * r && p[1] >= -1e-12 * r) {
                return Err(Error::Profile(format!(
                    "profile leaves the quarter sphere: (a, b) = ({}, {})",
                    p[0], p[1]
                )));
            }
        }
        if sphere_residual > 1e-10 {
            return Err(Error::Profile(format!(
                "profile off the orbit sphere by {sphere_residual:.3e} (relative)"
            )));
        }

        let h = self.mean_spacing();
        let spacing_nonuniformity = self.spacing_nonuniformity();
        if spacing_nonuniformity > 0.06 {
            return Err(Error::Profile(format!(
                "arclength spacing nonuniform by {spacing_nonuniformity:.3}"
            )));
        }

        let mut orthogonality_residual = 0.0f64;
        if let Topology::Arc { start, end } = self.topology {
            let m = self.grid.len();
            for (idx0, idx1, idx2, axis) in
                [(0usize, 1usize, 2usize, start), (m - 1, m - 2, m - 3, end)]
            {
                let p0 = self.grid[idx0];
                let coord = match axis {
                    AxisEnd::A => 0,
                    AxisEnd::B => 1,
                };
                if p0[coord].abs() > 1e-9 * r {
                    return Err(Error::Profile(format!(
                        "arc endpoint off its axis by {}",
                        p0[coord]
                    )));
                }
                // Second-order one-sided tangent dotted with the boundary
                // meridian direction.
                let t_end = [
                    -3.0 * p0[0] + 4.0 * self.grid[idx1][0] - self.grid[idx2][0],
                    -3.0 * p0[1] + 4.0 * self.grid[idx1][1] - self.grid[idx2][1],
                    -3.0 * p0[2] + 4.0 * self.grid[idx1][2] - self.grid[idx2][2],
                ];
                let t_end = normalize(t_end);
                let boundary_dir = match axis {
                    AxisEnd::A => normalize([0.0, -p0[2], p0[1]]),
                    AxisEnd::B => normalize([-p0[2], 0.0, p0[0]]),
                };
                let res = (t_end[0] * boundary_dir[0]
                    + t_end[1] * boundary_dir[1]
                    + t_end[2] * boundary_dir[2])
                    .abs();
                orthogonality_residual = orthogonality_residual.max(res);
            }
            let h_rel = h / r;
            if orthogonality_residual > (10.0 * h_rel * h_rel).max(1e-3) {
                return Err(Error::Profile(format!(
                    "axis meeting not orthogonal: residual {orthogonality_residual:.3e} \
                     at spacing {h_rel:.3e}"
                )));
            }
        }

        // Axis regularity: the rotational curvature limit must agree with
        // the profile curvature at collapsing endpoints.
        let mut axis_regularity_residual = 0.0f64;
        if let Topology::Arc { .. } = self.topology {
            let geo = geometry::frame_scalars(self)?;
            let m = self.grid.len();
            for (idx, coord) in [(0usize, 0usize), (m - 1, 0), (0, 1), (m - 1, 1)] {
                if self.grid[idx][coord].abs() < 1e-9 * r {
                    let lam = if coord == 0 { geo.lam_a[idx] } else { geo.lam_b[idx] };
                    let scale = geo.kappa[idx].abs().max(self.k.sqrt());
                    let rel = (lam - geo.kappa[idx]).abs() / scale;
                    axis_regularity_residual = axis_regularity_residual.max(rel);
                    if rel > 0.2 {
                        return Err(Error::Resolution(format!(
                            "axis limit residual {rel:.3e} at endpoint {idx}; refine the grid"
                        )));
                    }
                }
            }
        }

        Ok(StateDiagnostics {
            sphere_residual,
            spacing_nonuniformity,
            orthogonality_residual,
            axis_regularity_residual,
            mean_spacing: h,
        })
    }
}

pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

pub(crate) fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
