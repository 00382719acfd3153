//! Flow traces: ordered snapshots of per-point geometry shared by the ODE
//! reductions, the cohomogeneity-one solver, and all post-processing.

use serde::{Deserialize, Serialize};

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TerminalEvent {
    /// The whole hypersurface degenerated to a point (round collapse).
    Extinction { time: f64 },
    /// Curvature blowup above the configured threshold (or the time step
    /// underflowed) while the surface stayed extended: a local singularity.
    Singularity { time: f64, max_a_norm_sq: f64 },
    /// The time horizon was reached with the flow still smooth.
    Horizon,
    /// The state stopped evolving to tolerance (stationary solution).
    Equilibrium { time: f64 },
    /// An invariant was violated mid-run; a diagnostic snapshot is appended.
    Degenerate { time: f64, reason: String },
}

impl TerminalEvent {
    /// Time of curvature blowup, if the run ended in one.
    pub fn singular_time(&self) -> Option<f64> {
        match self {
            TerminalEvent::Extinction { time } => Some(*time),
            TerminalEvent::Singularity { time, .. } => Some(*time),
            _ => None,
        }
    }
}

/// One grid point of one snapshot.
///
/// `kappa`, `lam_a`, `lam_b` are the distinct principal curvatures with
/// multiplicities given by the trace-level [`FlowTrace::mults`]; the scalar
/// invariants are derived consistently with those multiplicities. Derivative
/// norms are present only on traces that resolve them (the PDE solver).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    pub sigma: f64,
    pub a: f64,
    pub b: f64,
    pub z: f64,
    pub kappa: f64,
    pub lam_a: f64,
    pub lam_b: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "A_norm_sq")]
    pub a_norm_sq: f64,
    pub lambda_min: f64,
    pub area_weight: f64,
    pub grad_a_sq: Option<f64>,
    pub hess_a_sq: Option<f64>,
    pub grad_h_sq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    /// Number of regrids performed before this snapshot. Checks that need
    /// fixed point identities across snapshots (time derivatives) require
    /// equal epochs.
    pub regrid_epoch: u32,
    pub points: Vec<PointSample>,
}

impl Snapshot {
    pub fn max_a_norm_sq(&self) -> f64 {
        self.points.iter().map(|p| p.a_norm_sq).fold(0.0, f64::max)
    }

    pub fn max_h_sq(&self) -> f64 {
        self.points.iter().map(|p| p.h * p.h).fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        self.points.iter().map(|p| p.area_weight).sum()
    }

    pub fn argmax_a_norm_sq(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.points.iter().enumerate() {
            if p.a_norm_sq > self.points[best].a_norm_sq {
                best = i;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Hyperparallel,
    AncientHyperparallel,
    Clifford,
    Equivariant,
}

/// An ordered sequence of snapshots plus run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub kind: TraceKind,
    /// Hypersurface dimension.
    pub n: usize,
    /// Ambient sectional curvature.
    #[serde(rename = "K")]
    pub k: f64,
    /// Multiplicities of `(kappa, lam_a, lam_b)` in the spectrum; they sum
    /// to `n`.
    pub mults: [usize; 3],
    pub snapshots: Vec<Snapshot>,
    pub terminal: TerminalEvent,
    pub events: Vec<String>,
}

impl FlowTrace {
    /// Full sorted spectrum of a sample under this trace's multiplicities.
    pub fn spectrum(&self, p: &PointSample) -> Vec<f64> {
        let mut lambda = Vec::with_capacity(self.n);
        lambda.extend(std::iter::repeat(p.kappa).take(self.mults[0]));
        lambda.extend(std::iter::repeat(p.lam_a).take(self.mults[1]));
        lambda.extend(std::iter::repeat(p.lam_b).take(self.mults[2]));
        lambda.sort_by(|a, b| a.partial_cmp(b).unwrap());
        lambda
    }

    /// Per-snapshot series of the spatial curvature maximum.
    pub fn max_a_norm_sq_series(&self) -> Vec<(f64, f64)> {
        self.snapshots
            .iter()
            .map(|s| (s.t, s.max_a_norm_sq()))
            .collect()
    }

    pub fn has_derivative_norms(&self) -> bool {
        self.snapshots
            .iter()
            .all(|s| s.points.iter().all(|p| p.grad_a_sq.is_some()))
            && !self.snapshots.is_empty()
    }

    /// Shifts every snapshot time (and the terminal time) by `dt`.
    pub fn shift_time(&mut self, dt: f64) {
        for s in &mut self.snapshots {
            s.t += dt;
        }
        match &mut self.terminal {
            TerminalEvent::Extinction { time }
            | TerminalEvent::Singularity { time, .. }
            | TerminalEvent::Equilibrium { time }
            | TerminalEvent::Degenerate { time, .. } => *time += dt,
            TerminalEvent::Horizon => {}
        }
    }

    /// Applies the parabolic scaling `lambda -> c lambda`, `K -> c^2 K`,
    /// `t -> t / c^2` to the whole trace (areas scale by `c^{-n}`).
    pub fn parabolic_scaled(&self, c: f64) -> FlowTrace {
        let c2 = c * c;
        let mut out = self.clone();
        out.k = self.k * c2;
        for s in &mut out.snapshots {
            s.t /= c2;
            for p in &mut s.points {
                p.sigma /= c;
                p.a /= c;
                p.b /= c;
                p.z /= c;
                p.kappa *= c;
                p.lam_a *= c;
                p.lam_b *= c;
                p.h *= c;
                p.a_norm_sq *= c2;
                p.lambda_min *= c;
                p.area_weight /= c.powi(self.n as i32);
                p.grad_a_sq = p.grad_a_sq.map(|v| v * c2 * c2);
                p.hess_a_sq = p.hess_a_sq.map(|v| v * c2 * c2 * c2);
                p.grad_h_sq = p.grad_h_sq.map(|v| v * c2 * c2);
            }
        }
        match &mut out.terminal {
            TerminalEvent::Extinction { time }
            | TerminalEvent::Equilibrium { time }
            | TerminalEvent::Degenerate { time, .. } => *time /= c2,
            TerminalEvent::Singularity { time, max_a_norm_sq } => {
                *time /= c2;
                *max_a_norm_sq *= c2;
            }
            TerminalEvent::Horizon => {}
        }
        out
    }

    /// Keeps every `stride`-th snapshot (always keeping the last).
    pub fn subsampled(&self, stride: usize) -> FlowTrace {
        let mut out = self.clone();
        let last = self.snapshots.len().saturating_sub(1);
        out.snapshots = self
            .snapshots
            .iter()
            .enumerate()
            .filter(|(i, _)| i % stride == 0 || *i == last)
            .map(|(_, s)| s.clone())
            .collect();
        out
    }
}
