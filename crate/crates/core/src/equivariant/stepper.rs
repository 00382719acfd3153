//! Time stepping and the scenario run loop.

use serde::{Deserialize, Serialize};

use super::geometry::{self, velocity, VelStats};
use super::init::{init_profile, resample_uniform, ProfileSpec};
use super::rkc::{beta, rkc2_step, stages_for, Rkc2Work};
use super::{FlowState, SymmetryType};
use crate::curvature::PinchingParams;
use crate::error::{Error, Result};
use crate::trace::{FlowTrace, PointSample, Snapshot, TerminalEvent, TraceKind};

/// Time-step policy: curvature cap, temporal error control, and stopping
/// thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DtPolicy {
    /// Cap `dt <= c_cur / max |A|^2`.
    pub c_cur: f64,
    /// Relative temporal error tolerance of the step controller.
    pub rtol: f64,
    /// Step underflow threshold; below this a singularity event is raised.
    pub dt_min: f64,
    /// Stage cap of the stabilized stepper.
    pub max_stages: usize,
    /// Stop once `max |A|^2 / K` exceeds this.
    pub singular_a2_over_k: f64,
    /// Regrid when the spacing nonuniformity exceeds this.
    pub regrid_tol: f64,
    /// Collapse is classified as extinction when the profile diameter times
    /// `sqrt(K)` has dropped below this.
    pub extinction_diameter: f64,
}

impl Default for DtPolicy {
    fn default() -> Self {
        Self {
            c_cur: 0.05,
            rtol: 1e-6,
            dt_min: 1e-14,
            max_stages: 128,
            singular_a2_over_k: 1e6,
            regrid_tol: 0.05,
            extinction_diameter: 0.1,
        }
    }
}

/// A full equivariant run request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivariantScenario {
    pub sym: SymmetryType,
    pub profile: ProfileSpec,
    pub resolution: usize,
    pub horizon: f64,
    pub snapshot_dt: f64,
    #[serde(default)]
    pub dt_policy: DtPolicy,
}

/// Outcome of a single accepted step.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub dt: f64,
    pub stages: usize,
    pub regridded: bool,
    pub max_a_norm_sq: f64,
}

pub(crate) struct Stepper {
    pub state: FlowState,
    policy: DtPolicy,
    work: Rkc2Work,
    stage_state: FlowState,
    vel0: Vec<f64>,
    vel1: Vec<f64>,
    y: Vec<f64>,
    dt_next: f64,
    pub last_stats: VelStats,
}

pub(crate) enum StepOutcome {
    Advanced(StepInfo),
    Underflow,
    NonFinite,
}

impl Stepper {
    pub fn new(state: FlowState, policy: DtPolicy) -> Result<Self> {
        let npts = state.grid.len();
        let mut me = Self {
            stage_state: state.clone(),
            state,
            policy,
            work: Rkc2Work::new(),
            vel0: vec![0.0; 3 * npts],
            vel1: vec![0.0; 3 * npts],
            y: vec![0.0; 3 * npts],
            dt_next: 0.0,
            last_stats: VelStats::default(),
        };
        let stats = velocity(&me.state, &mut me.vel0)?;
        me.last_stats = stats;
        let r = me.state.radius();
        me.dt_next = (me.policy.c_cur / stats.max_a_norm_sq.max(1e-300)).min(1e-4 * r * r);
        Ok(me)
    }

    fn flatten(&mut self) {
        for (i, p) in self.state.grid.iter().enumerate() {
            self.y[3 * i] = p[0];
            self.y[3 * i + 1] = p[1];
            self.y[3 * i + 2] = p[2];
        }
    }

    fn spectral_radius(&self, stats: &VelStats) -> f64 {
        let h = stats.min_spacing.max(1e-300);
        let n = self.state.n() as f64;
        1.2 * (4.0 / (h * h)
            + stats.axis_stiffness
            + 2.0 * stats.max_a_norm_sq
            + 4.0 * n * self.state.k)
    }

    /// One accepted step of size at most `dt_cap`.
    pub fn advance(&mut self, dt_cap: f64) -> Result<StepOutcome> {
        let stats0 = velocity(&self.state, &mut self.vel0)?;
        if !stats0.finite {
            return Ok(StepOutcome::NonFinite);
        }
        self.last_stats = stats0;
        let rho = self.spectral_radius(&stats0);
        let r = self.state.radius();
        let err_scale = self.policy.rtol * r;

        let mut dt = self
            .dt_next
            .min(self.policy.c_cur / stats0.max_a_norm_sq.max(1e-300))
            .min(dt_cap);
        let npts = self.state.grid.len();

        for _attempt in 0..40 {
            if dt < self.policy.dt_min {
                return Ok(StepOutcome::Underflow);
            }
            let mut s = stages_for(dt * 1.1, rho);
            if s > self.policy.max_stages {
                s = self.policy.max_stages;
                dt = dt.min(beta(s) / (1.1 * rho));
            }

            self.flatten();
            let topology = self.state.topology;
            let sym = self.state.sym;
            let k = self.state.k;
            let stage_state = &mut self.stage_state;
            stage_state.sym = sym;
            stage_state.k = k;
            stage_state.topology = topology;
            let ok;
            {
                let mut f = |yv: &[f64], out: &mut [f64]| -> bool {
                    for (i, p) in stage_state.grid.iter_mut().enumerate() {
                        *p = [yv[3 * i], yv[3 * i + 1], yv[3 * i + 2]];
                    }
                    match velocity(stage_state, out) {
                        Ok(st) => st.finite,
                        Err(_) => false,
                    }
                };
                ok = rkc2_step(&mut f, &mut self.y, dt, s, &mut self.work);
            }
            if !ok {
                dt *= 0.5;
                continue;
            }

            // Error estimate: 0.8 (y0 - y1) + 0.4 dt (f0 + f1).
            for (i, p) in self.stage_state.grid.iter_mut().enumerate() {
                *p = [self.y[3 * i], self.y[3 * i + 1], self.y[3 * i + 2]];
            }
            let stats1 = match velocity(&self.stage_state, &mut self.vel1) {
                Ok(st) if st.finite => st,
                _ => {
                    dt *= 0.5;
                    continue;
                }
            };
            let mut err_sq = 0.0;
            for i in 0..3 * npts {
                let y0i = match i % 3 {
                    0 => self.state.grid[i / 3][0],
                    1 => self.state.grid[i / 3][1],
                    _ => self.state.grid[i / 3][2],
                };
                let est = 0.8 * (y0i - self.y[i]) + 0.4 * dt * (self.vel0[i] + self.vel1[i]);
                err_sq += (est / err_scale) * (est / err_scale);
            }
            let err = (err_sq / (3 * npts) as f64).sqrt();

            if err <= 1.0 {
                // Accept: copy state, project, clamp, maybe regrid.
                for (i, p) in self.state.grid.iter_mut().enumerate() {
                    *p = [self.y[3 * i], self.y[3 * i + 1], self.y[3 * i + 2]];
                }
                let rr = self.state.radius();
                for p in &mut self.state.grid {
                    let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    let f = rr / norm;
                    p[0] *= f;
                    p[1] *= f;
                    p[2] *= f;
                    for c in 0..2 {
                        if p[c] < 0.0 && p[c] > -1e-10 * rr {
                            p[c] = 0.0;
                        }
                    }
                }
                for p in &self.state.grid {
                    if p[0] < 0.0 || p[1] < 0.0 {
                        return Ok(StepOutcome::NonFinite);
                    }
                }
                self.state.t += dt;
                let grow = (0.8 / err.max(1e-8)).powf(1.0 / 3.0).clamp(0.2, 5.0);
                self.dt_next = dt * grow;

                let mut regridded = false;
                if self.state.spacing_nonuniformity() > self.policy.regrid_tol {
                    let n_out = self.state.grid.len();
                    self.state.grid = resample_uniform(
                        &self.state.grid,
                        &self.state.topology,
                        n_out,
                        self.state.radius(),
                    );
                    self.state.regrid_epoch += 1;
                    regridded = true;
                }
                return Ok(StepOutcome::Advanced(StepInfo {
                    dt,
                    stages: s,
                    regridded,
                    max_a_norm_sq: stats1.max_a_norm_sq,
                }));
            }
            dt *= (0.8 / err).powf(1.0 / 3.0).clamp(0.1, 0.9);
        }
        Ok(StepOutcome::Underflow)
    }
}

/// One accepted flow step (functional form).
pub fn step(state: &FlowState, policy: &DtPolicy) -> Result<(FlowState, StepInfo)> {
    let mut stepper = Stepper::new(state.clone(), *policy)?;
    match stepper.advance(f64::INFINITY)? {
        StepOutcome::Advanced(info) => Ok((stepper.state, info)),
        StepOutcome::Underflow => Err(Error::Profile("time step underflow".into())),
        StepOutcome::NonFinite => Err(Error::Profile("non-finite velocity".into())),
    }
}

fn snapshot_of(state: &FlowState) -> Result<Snapshot> {
    let geo = geometry::geometry(state)?;
    let (p, q) = (state.sym.p, state.sym.q);
    let points = geo
        .iter()
        .zip(&state.grid)
        .map(|(g, pos)| {
            let mut lmin = g.kappa;
            if p > 1 {
                lmin = lmin.min(g.lam_a);
            }
            if q > 1 {
                lmin = lmin.min(g.lam_b);
            }
            PointSample {
                sigma: g.sigma,
                a: pos[0],
                b: pos[1],
                z: pos[2],
                kappa: g.kappa,
                lam_a: g.lam_a,
                lam_b: g.lam_b,
                h: g.h,
                a_norm_sq: g.a_norm_sq,
                lambda_min: lmin,
                area_weight: g.area_weight,
                grad_a_sq: Some(g.grad_a_sq),
                hess_a_sq: Some(g.hess_a_sq),
                grad_h_sq: Some(g.grad_h_sq),
            }
        })
        .collect();
    Ok(Snapshot { t: state.t, regrid_epoch: state.regrid_epoch, points })
}

fn diameter(state: &FlowState) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in &state.grid {
        for c in 0..3 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2)).sqrt()
}

/// Runs a scenario to extinction, singularity, horizon, or abort, recording
/// snapshots at the configured cadence plus extra ones while the curvature
/// maximum grows.
pub fn run(scenario: &EquivariantScenario, params: &PinchingParams) -> Result<FlowTrace> {
    let state = init_profile(&scenario.profile, scenario.sym, params, scenario.resolution)?;
    run_from(state, scenario, params)
}

/// Same as [`run`] but starting from an existing state.
pub fn run_from(
    state: FlowState,
    scenario: &EquivariantScenario,
    params: &PinchingParams,
) -> Result<FlowTrace> {
    let policy = scenario.dt_policy;
    let k = params.k;
    let a2_stop = policy.singular_a2_over_k * k;
    let (p, q) = (state.sym.p, state.sym.q);
    let mults = [1, p - 1, q - 1];

    let mut snapshots = vec![snapshot_of(&state)?];
    let mut events: Vec<String> = Vec::new();
    let mut stepper = Stepper::new(state, policy)?;
    let mut last_snap_a2 = snapshots[0].max_a_norm_sq();
    let mut next_snap_t = scenario.snapshot_dt;

    let terminal;
    let mut steps: u64 = 0;
    const MAX_STEPS: u64 = 20_000_000;

    loop {
        steps += 1;
        if steps > MAX_STEPS {
            snapshots.push(snapshot_of(&stepper.state)?);
            terminal = TerminalEvent::Degenerate {
                time: stepper.state.t,
                reason: "step budget exhausted".into(),
            };
            break;
        }

        let t = stepper.state.t;
        if t >= scenario.horizon - 1e-13 * scenario.horizon.max(1.0) {
            if (snapshots.last().map(|s| s.t).unwrap_or(-1.0) - t).abs() > 1e-15 {
                snapshots.push(snapshot_of(&stepper.state)?);
            }
            terminal = TerminalEvent::Horizon;
            break;
        }
        let dt_cap = (next_snap_t - t).min(scenario.horizon - t).max(policy.dt_min);

        match stepper.advance(dt_cap)? {
            StepOutcome::Advanced(info) => {
                let t_now = stepper.state.t;
                let take_cadence = t_now >= next_snap_t - 1e-12 * next_snap_t.max(1.0);
                let take_growth = info.max_a_norm_sq >= 4.0 / 3.0 * last_snap_a2;
                if take_cadence || take_growth {
                    let snap = snapshot_of(&stepper.state)?;
                    last_snap_a2 = snap.max_a_norm_sq();
                    snapshots.push(snap);
                    if take_cadence {
                        next_snap_t += scenario.snapshot_dt;
                    }
                }
                if info.max_a_norm_sq >= a2_stop {
                    let last_t = snapshots.last().map(|s| s.t).unwrap_or(-1.0);
                    if (last_t - t_now).abs() > 1e-15 {
                        snapshots.push(snapshot_of(&stepper.state)?);
                    }
                    let diam = diameter(&stepper.state) * k.sqrt();
                    if diam < policy.extinction_diameter {
                        events.push(format!("global collapse at diameter {diam:.3e}"));
                        terminal = TerminalEvent::Extinction { time: t_now };
                    } else {
                        events.push(format!(
                            "curvature blowup: max |A|^2 / K = {:.3e}",
                            info.max_a_norm_sq / k
                        ));
                        terminal = TerminalEvent::Singularity {
                            time: t_now,
                            max_a_norm_sq: info.max_a_norm_sq,
                        };
                    }
                    break;
                }
            }
            StepOutcome::Underflow => {
                snapshots.push(snapshot_of(&stepper.state)?);
                events.push("time step underflow".into());
                terminal = TerminalEvent::Singularity {
                    time: stepper.state.t,
                    max_a_norm_sq: stepper.last_stats.max_a_norm_sq,
                };
                break;
            }
            StepOutcome::NonFinite => {
                snapshots.push(snapshot_of(&stepper.state)?);
                terminal = TerminalEvent::Degenerate {
                    time: stepper.state.t,
                    reason: "non-finite velocity or profile left the quadrant".into(),
                };
                break;
            }
        }
    }

    Ok(FlowTrace {
        kind: TraceKind::Equivariant,
        n: params.n,
        k,
        mults,
        snapshots,
        terminal,
        events,
    })
}
