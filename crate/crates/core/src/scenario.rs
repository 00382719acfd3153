//! Scenario configs (JSON, fail-closed), the run pipeline
//! `flow -> monitor -> rescaler`, and the assertion machinery behind the
//! command line's exit codes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curvature::PinchingParams;
use crate::equivariant::{self, EquivariantScenario};
use crate::error::{Error, Result};
use crate::export;
use crate::homogeneous;
use crate::monitor::{self, EstimateReport};
use crate::poincare;
use crate::rescaler::{self, BlowupRecord, TypeFlag};
use crate::trace::{FlowTrace, TerminalEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Hyperparallel,
    Clifford,
    Equivariant,
    Poincare,
    Monitor,
    Rescale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperparallelConfig {
    pub rho0: f64,
    pub horizon: f64,
    /// Integrate backwards from just below the equator instead.
    #[serde(default)]
    pub ancient: bool,
    #[serde(default)]
    pub t_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliffordConfig {
    /// Initial radial angle; alternatively `r0` with `phi0 = acos(r0)`.
    #[serde(default)]
    pub phi0: Option<f64>,
    #[serde(default)]
    pub r0: Option<f64>,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoincareConfig {
    pub eta: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_budget() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorConfig {
    pub eta_list: Vec<f64>,
    #[serde(default)]
    pub convexity_etas: Vec<f64>,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self { eta_list: vec![0.01], convexity_etas: vec![0.05, 0.1, 0.2] }
    }
}

/// Per-scenario pass/fail checks; the run exits nonzero when any fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum AssertionConfig {
    /// Extinction time against `ln(1/|cos(sqrt(K) rho0)|)/(nK)`.
    ExtinctionClosedForm { rel_tol: f64 },
    /// `max g_{m,alpha} <= rel_tol (max|A|^2 + K)` over the trace.
    Preservation { rel_tol: f64 },
    /// Decay of `sup (f_0)_+/W` under `e^{-4 delta K t}` with a slack factor.
    Decay { slack: f64 },
    /// `min |grad A|^2/|grad H|^2 >= 3/(n+2) - tol`.
    Kato { tol: f64 },
    /// Neck sharpness once `max H^2/K` crosses the threshold.
    NeckCylindrical { ratio_max: f64, h_sq_over_k_min: f64 },
    /// Type-I verdict, optionally pinning the limiting functional value.
    TypeI {
        #[serde(default)]
        functional: Option<f64>,
        #[serde(default = "default_functional_tol")]
        rel_tol: f64,
    },
    /// Curvature growth factor across the trace.
    GrowthMin { factor: f64 },
    /// `sup |grad A|^2/(H^4 + K^2)` stays below a recorded ceiling.
    GradientCeiling { ceiling: f64 },
    /// `sup |grad^2 A|^2/(H^6 + K^3)` stays below a recorded ceiling.
    HessianCeiling { ceiling: f64 },
    /// Existence-time bound `e^{2nKT} >= 1 + 2n/Lambda0`.
    TBound {},
    /// Initial state class membership.
    InClass { expect: bool },
    /// Area never increases along the trace (relative drift tolerance per
    /// unit time).
    AreaMonotone { tol: f64 },
    /// `gamma_hat > 0` with feasible witness.
    PoincarePositive {},
    /// Finite convexity frontier at each requested eta.
    FrontierFinite { etas: Vec<f64> },
}

fn default_functional_tol() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub params: PinchingParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub snapshot_cadence: Option<f64>,
    #[serde(default)]
    pub hyperparallel: Option<HyperparallelConfig>,
    #[serde(default)]
    pub clifford: Option<CliffordConfig>,
    #[serde(default)]
    pub equivariant: Option<EquivariantScenario>,
    #[serde(default)]
    pub poincare: Option<PoincareConfig>,
    #[serde(default)]
    pub monitor: Option<MonitorConfig>,
    #[serde(default)]
    pub assertions: Vec<AssertionConfig>,
}

impl ScenarioConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: ScenarioConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.params_valid()?;
        Ok(config)
    }

    fn params_valid(&self) -> Result<()> {
        // Round-trip through the validating constructor.
        PinchingParams::new(
            self.params.n,
            self.params.m,
            self.params.alpha,
            self.params.k,
            self.params.v,
            self.params.theta,
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: Mode,
    pub params: PinchingParams,
    pub seed: u64,
    pub terminal: Option<TerminalEvent>,
    pub snapshots: usize,
    pub max_a_norm_sq: Option<f64>,
    pub t_singular_estimate: Option<f64>,
    pub type_flag: Option<TypeFlag>,
    pub gamma_hat: Option<f64>,
    pub extinction_comparison: Option<ExtinctionComparison>,
    pub assertions: Vec<AssertionResult>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionComparison {
    pub observed: f64,
    pub closed_form: f64,
    pub rel_error: f64,
}

pub struct ScenarioOutcome {
    pub summary: RunSummary,
    pub trace: Option<FlowTrace>,
    pub report: Option<EstimateReport>,
    pub blowup: Option<BlowupRecord>,
    pub artifacts: Vec<PathBuf>,
}

impl ScenarioOutcome {
    pub fn all_passed(&self) -> bool {
        self.summary.all_passed
    }
}

fn closed_form_extinction(config: &ScenarioConfig) -> Option<f64> {
    let p = &config.params;
    match config.mode {
        Mode::Hyperparallel => {
            let h = config.hyperparallel.as_ref()?;
            homogeneous::hyperparallel_extinction_time(p.n, p.k, h.rho0)
        }
        Mode::Equivariant | Mode::Monitor | Mode::Rescale => {
            let e = config.equivariant.as_ref()?;
            match e.profile {
                equivariant::ProfileSpec::GeodesicSphere { rho0 } => {
                    homogeneous::hyperparallel_extinction_time(p.n, p.k, rho0)
                }
                _ => None,
            }
        }
        _ => None,
    }
}

fn observed_singular_time(trace: &FlowTrace) -> Option<f64> {
    rescaler::estimate_singular_time(trace)
        .map(|(t, _)| t)
        .or_else(|| trace.terminal.singular_time())
}

/// Runs the configured pipeline and writes artifacts into `out_dir` (when
/// given). Deterministic for a fixed `(config, seed)`.
pub fn run_scenario(config: &ScenarioConfig, out_dir: Option<&Path>) -> Result<ScenarioOutcome> {
    config.params_valid()?;
    let params = config.params;
    let cadence = config.snapshot_cadence.unwrap_or(0.01);

    let mut trace: Option<FlowTrace> = None;
    let mut gamma: Option<poincare::GammaCertificate> = None;

    match config.mode {
        Mode::Hyperparallel => {
            let hc = config
                .hyperparallel
                .as_ref()
                .ok_or_else(|| Error::Config("mode hyperparallel needs a [hyperparallel] section".into()))?;
            let t = if hc.ancient {
                let t_min = hc.t_min.unwrap_or(-5.0 / params.k);
                homogeneous::ancient_hyperparallel(&params, hc.rho0, t_min, cadence)?
            } else {
                homogeneous::hyperparallel_flow(&params, hc.rho0, hc.horizon, cadence)?
            };
            trace = Some(t);
        }
        Mode::Clifford => {
            let cc = config
                .clifford
                .as_ref()
                .ok_or_else(|| Error::Config("mode clifford needs a [clifford] section".into()))?;
            let phi0 = match (cc.phi0, cc.r0) {
                (Some(p), None) => p,
                (None, Some(r)) => r.acos(),
                (Some(_), Some(_)) => {
                    return Err(Error::Config("give either phi0 or r0, not both".into()))
                }
                (None, None) => return Err(Error::Config("give phi0 or r0".into())),
            };
            trace = Some(homogeneous::clifford_flow(&params, phi0, cc.horizon, cadence)?);
        }
        Mode::Equivariant | Mode::Monitor | Mode::Rescale => {
            let mut ec = config
                .equivariant
                .clone()
                .ok_or_else(|| Error::Config("this mode needs an [equivariant] section".into()))?;
            if config.snapshot_cadence.is_some() {
                ec.snapshot_dt = cadence;
            }
            trace = Some(equivariant::run(&ec, &params)?);
        }
        Mode::Poincare => {
            let pc = config
                .poincare
                .as_ref()
                .ok_or_else(|| Error::Config("mode poincare needs a [poincare] section".into()))?;
            gamma = Some(poincare::min_ratio(&params, pc.eta, pc.budget, config.seed)?);
        }
    }

    // Monitor / rescale stages.
    let monitor_cfg = config.monitor.clone().unwrap_or_default();
    let report = match (&trace, config.mode) {
        (Some(t), Mode::Monitor | Mode::Rescale) => {
            Some(monitor::check_estimates(t, &params, &monitor_cfg.eta_list)?)
        }
        _ => None,
    };
    let blowup = match (&trace, config.mode) {
        (Some(t), Mode::Rescale) => match rescaler::classify_type(t) {
            Ok(rec) if rec.type_flag == TypeFlag::I => {
                Some(rescaler::rescale_type_i(t, &params)?)
            }
            Ok(rec) => Some(rec),
            Err(_) => None,
        },
        _ => None,
    };

    // Assertions.
    let mut assertions = Vec::new();
    for spec in &config.assertions {
        assertions.push(evaluate_assertion(
            spec,
            config,
            trace.as_ref(),
            report.as_ref(),
            blowup.as_ref(),
            gamma.as_ref(),
        ));
    }
    let all_passed = assertions.iter().all(|a| a.pass);

    let extinction_comparison = match (closed_form_extinction(config), trace.as_ref()) {
        (Some(cf), Some(t)) => observed_singular_time(t).map(|obs| ExtinctionComparison {
            observed: obs,
            closed_form: cf,
            rel_error: (obs - cf).abs() / cf.abs().max(1e-300),
        }),
        _ => None,
    };

    let summary = RunSummary {
        mode: config.mode,
        params,
        seed: config.seed,
        terminal: trace.as_ref().map(|t| t.terminal.clone()),
        snapshots: trace.as_ref().map(|t| t.snapshots.len()).unwrap_or(0),
        max_a_norm_sq: trace.as_ref().map(|t| {
            t.max_a_norm_sq_series().iter().map(|x| x.1).fold(0.0, f64::max)
        }),
        t_singular_estimate: trace.as_ref().and_then(observed_singular_time),
        type_flag: blowup.as_ref().map(|b| b.type_flag),
        gamma_hat: gamma.as_ref().map(|g| g.gamma_hat),
        extinction_comparison,
        assertions,
        all_passed,
    };

    // Artifacts.
    let mut artifacts = Vec::new();
    if let Some(dir) = out_dir.or(config.output_dir.as_deref()) {
        std::fs::create_dir_all(dir)?;
        if let Some(t) = &trace {
            let p = dir.join("trace.csv");
            std::fs::write(&p, export::trace_csv(t))?;
            artifacts.push(p);
        }
        if let Some(r) = &report {
            let p = dir.join("report.json");
            export::write_json(&p, r)?;
            artifacts.push(p);
        }
        if let Some(b) = &blowup {
            let p = dir.join("blowup.json");
            export::write_json(&p, b)?;
            artifacts.push(p);
            let p = dir.join("rescaled.csv");
            std::fs::write(&p, export::rescaled_csv(b))?;
            artifacts.push(p);
        }
        if let Some(g) = &gamma {
            let p = dir.join("certificate.json");
            export::write_json(&p, g)?;
            artifacts.push(p);
        }
        let p = dir.join("summary.json");
        export::write_json(&p, &summary)?;
        artifacts.push(p);
        let p = dir.join("summary.txt");
        std::fs::write(&p, text_summary(&summary))?;
        artifacts.push(p);
    }

    Ok(ScenarioOutcome { summary, trace, report, blowup, artifacts })
}

fn evaluate_assertion(
    spec: &AssertionConfig,
    config: &ScenarioConfig,
    trace: Option<&FlowTrace>,
    report: Option<&EstimateReport>,
    blowup: Option<&BlowupRecord>,
    gamma: Option<&poincare::GammaCertificate>,
) -> AssertionResult {
    let fail = |name: &str, detail: String| AssertionResult {
        name: name.into(),
        pass: false,
        detail,
    };
    let params = &config.params;
    match spec {
        AssertionConfig::ExtinctionClosedForm { rel_tol } => {
            let name = "extinction_closed_form";
            let Some(cf) = closed_form_extinction(config) else {
                return fail(name, "no closed form for this scenario".into());
            };
            let Some(obs) = trace.and_then(observed_singular_time) else {
                return fail(name, "trace has no singular time".into());
            };
            let rel = (obs - cf).abs() / cf;
            AssertionResult {
                name: name.into(),
                pass: rel <= *rel_tol,
                detail: format!("observed {obs:.9e}, closed form {cf:.9e}, rel {rel:.3e}"),
            }
        }
        AssertionConfig::Preservation { rel_tol } => {
            let name = "preservation";
            let Some(t) = trace else { return fail(name, "no trace".into()) };
            match monitor_or(report, t, params) {
                Ok(r) => {
                    let scale = t
                        .max_a_norm_sq_series()
                        .iter()
                        .map(|x| x.1)
                        .fold(0.0, f64::max)
                        + t.k;
                    let pass = r.preservation.max_g.value <= rel_tol * scale;
                    AssertionResult {
                        name: name.into(),
                        pass,
                        detail: format!(
                            "max g = {:.3e} vs tol {:.3e}",
                            r.preservation.max_g.value,
                            rel_tol * scale
                        ),
                    }
                }
                Err(e) => fail(name, e.to_string()),
            }
        }
        AssertionConfig::Decay { slack } => {
            let name = "decay";
            let Some(t) = trace else { return fail(name, "no trace".into()) };
            match monitor_or(report, t, params) {
                Ok(r) => AssertionResult {
                    name: name.into(),
                    pass: r.decay.max_excess_factor <= *slack,
                    detail: format!(
                        "max excess factor {:.4} vs slack {slack}",
                        r.decay.max_excess_factor
                    ),
                },
                Err(e) => fail(name, e.to_string()),
            }
        }
        AssertionConfig::Kato { tol } => {
            let name = "kato";
            let Some(t) = trace else { return fail(name, "no trace".into()) };
            match monitor_or(report, t, params) {
                Ok(r) => match &r.kato {
                    Some(kc) => AssertionResult {
                        name: name.into(),
                        pass: kc.min_margin >= -tol,
                        detail: format!("min margin {:.3e}", kc.min_margin),
                    },
                    None => fail(name, "kato not applicable".into()),
                },
                Err(e) => fail(name, e.to_string()),
            }
        }
        AssertionConfig::NeckCylindrical { ratio_max, h_sq_over_k_min } => {
            let name = "neck_cylindrical";
            let Some(t) = trace else { return fail(name, "no trace".into()) };
            let inv_nm1 = 1.0 / (params.n as f64 - params.m as f64 + 1.0);
            let mut checked = 0usize;
            let mut worst: f64 = 0.0;
            for s in &t.snapshots {
                if s.max_h_sq() / t.k < *h_sq_over_k_min {
                    continue;
                }
                let j = s.argmax_a_norm_sq();
                let p = &s.points[j];
                if p.h * p.h > 0.0 {
                    let ratio = (p.a_norm_sq - inv_nm1 * p.h * p.h) / (p.h * p.h);
                    worst = worst.max(ratio);
                    checked += 1;
                }
            }
            if checked == 0 {
                return fail(name, "curvature never crossed the threshold".into());
            }
            AssertionResult {
                name: name.into(),
                pass: worst <= *ratio_max,
                detail: format!("worst neck ratio {worst:.4e} over {checked} snapshots"),
            }
        }
        AssertionConfig::TypeI { functional, rel_tol } => {
            let name = "type_i";
            let Some(t) = trace else { return fail(name, "no trace".into()) };
            let record = match blowup {
                Some(b) => b.clone(),
                None => match rescaler::classify_type(t) {
                    Ok(r) => r,
                    Err(e) => return fail(name, e.to_string()),
                },
            };
            let mut pass = record.type_flag == TypeFlag::I;
            let mut detail = format!(
                "flag {:?}, sup functional {:.4}, drift {:.3}",
                record.type_flag, record.sup_functional, record.sup_drift
            );
            if let Some(expect) = functional {
                let last = record.functional.last().map(|x| x.1).unwrap_or(0.0);
                let rel = (last - expect).abs() / expect;
                pass = pass && rel <= *rel_tol;
                detail.push_str(&format!(", final functional {last:.4} vs {expect} ({rel:.3e})"));
            }
            AssertionResult { name: name.into(), pass, detail }
        }
        AssertionConfig::GrowthMin { factor } => {
            let name = "growth_min";
            let Some(t) = trace else { return fail(name, "no trace".into()) };
            let series = t.max_a_norm_sq_series();
            let first = series.first().map(|x| x.1).unwrap_or(0.0);
            let max = series.iter().map(|x| x.1).fold(0.0, f64::max);
            let growth = if first > 0.0 { max / first } else { f64::INFINITY };
            AssertionResult {
                name: name.into(),
                pass: growth >= *factor,
                detail: format!("growth {growth:.3e} vs required {factor:.3e}"),
            }
        }
        AssertionConfig::GradientCeiling { ceiling } => {
            let name = "gradient_ceiling";
            let Some(t) = trace else { return fail(name, "no trace".into()) };
            match monitor_or(report, t, params) {
                Ok(r) => match &r.gradient {
                    Some(g) => AssertionResult {
                        name: name.into(),
                        pass: g.sup_crude.value <= *ceiling,
                        detail: format!(
                            "sup |grad A|^2/(H^4+K^2) = {:.4e} vs ceiling {ceiling:.4e}",
                            g.sup_crude.value
                        ),
                    },
                    None => fail(name, "gradient not applicable".into()),
                },
                Err(e) => fail(name, e.to_string()),
            }
        }
        AssertionConfig::HessianCeiling { ceiling } => {
            let name = "hessian_ceiling";
            let Some(t) = trace else { return fail(name, "no trace".into()) };
            match monitor_or(report, t, params) {
                Ok(r) => match &r.hessian {
                    Some(h) => AssertionResult {
                        name: name.into(),
                        pass: h.sup.value <= *ceiling,
                        detail: format!(
                            "sup |grad^2 A|^2/(H^6+K^3) = {:.4e} vs ceiling {ceiling:.4e}",
                            h.sup.value
                        ),
                    },
                    None => fail(name, "hessian not applicable".into()),
                },
                Err(e) => fail(name, e.to_string()),
            }
        }
        AssertionConfig::TBound {} => {
            let name = "t_bound";
            let Some(t) = trace else { return fail(name, "no trace".into()) };
            match monitor_or(report, t, params) {
                Ok(r) => match (r.t_bound.lhs, r.t_bound.satisfied) {
                    (Some(lhs), Some(ok)) => AssertionResult {
                        name: name.into(),
                        pass: ok,
                        detail: format!("e^(2nKT) = {lhs:.4} vs {:.4}", r.t_bound.rhs_theta),
                    },
                    _ => AssertionResult {
                        name: name.into(),
                        pass: true,
                        detail: "no singularity: bound trivially satisfied".into(),
                    },
                },
                Err(e) => fail(name, e.to_string()),
            }
        }
        AssertionConfig::InClass { expect } => {
            let name = "in_class";
            let verdict = match (config.mode, &config.equivariant) {
                (Mode::Equivariant | Mode::Monitor | Mode::Rescale, Some(ec)) => {
                    equivariant::init_profile(&ec.profile, ec.sym, params, ec.resolution)
                        .ok()
                        .and_then(|s| s.class_verdict)
                }
                _ => None,
            };
            match verdict {
                Some(v) => AssertionResult {
                    name: name.into(),
                    pass: v.in_class == *expect,
                    detail: format!(
                        "in_class = {}, V = {:.4}, Theta = {:.4}, max g = {:.4e}",
                        v.in_class, v.v_measured, v.theta_measured, v.max_g
                    ),
                },
                None => fail(name, "no initial state to classify".into()),
            }
        }
        AssertionConfig::AreaMonotone { tol } => {
            let name = "area_monotone";
            let Some(t) = trace else { return fail(name, "no trace".into()) };
            let mut worst = 0.0f64;
            for w in t.snapshots.windows(2) {
                let (a0, a1) = (w[0].area(), w[1].area());
                let dt = w[1].t - w[0].t;
                if dt > 0.0 && a0 > 0.0 {
                    worst = worst.max((a1 - a0) / a0 / dt.max(1e-12));
                }
            }
            AssertionResult {
                name: name.into(),
                pass: worst <= *tol,
                detail: format!("max relative area growth rate {worst:.3e}"),
            }
        }
        AssertionConfig::PoincarePositive {} => {
            let name = "poincare_positive";
            match gamma {
                Some(g) => {
                    let feasible = g.f_at_min >= -1e-9 && g.g_at_min <= 1e-9;
                    AssertionResult {
                        name: name.into(),
                        pass: g.gamma_hat > 0.0 && feasible,
                        detail: format!(
                            "gamma_hat = {:.6e}, f = {:.2e}, g = {:.2e}",
                            g.gamma_hat, g.f_at_min, g.g_at_min
                        ),
                    }
                }
                None => fail(name, "no certificate".into()),
            }
        }
        AssertionConfig::FrontierFinite { etas } => {
            let name = "frontier_finite";
            let Some(t) = trace else { return fail(name, "no trace".into()) };
            let frontier = monitor::convexity_frontier(t, etas);
            let max_h = t
                .snapshots
                .iter()
                .map(|s| s.max_h_sq())
                .fold(0.0f64, f64::max)
                .sqrt()
                / t.k.sqrt();
            let cleaned =
                monitor::isotonic_nonincreasing(&frontier.iter().map(|x| x.1).collect::<Vec<_>>());
            let finite = frontier.iter().all(|(_, h)| *h < 0.95 * max_h);
            let monotone = cleaned.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            AssertionResult {
                name: name.into(),
                pass: finite && monotone,
                detail: format!("frontier {frontier:?}, cleaned {cleaned:?}"),
            }
        }
    }
}

fn monitor_or(
    report: Option<&EstimateReport>,
    trace: &FlowTrace,
    params: &PinchingParams,
) -> Result<EstimateReport> {
    match report {
        Some(r) => Ok(r.clone()),
        None => monitor::check_estimates(trace, params, &[0.01]),
    }
}

fn text_summary(summary: &RunSummary) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "mode: {:?}", summary.mode);
    let _ = writeln!(
        out,
        "params: n={} m={} alpha={} K={} V={} Theta={}",
        summary.params.n,
        summary.params.m,
        summary.params.alpha,
        summary.params.k,
        summary.params.v,
        summary.params.theta
    );
    if let Some(term) = &summary.terminal {
        let _ = writeln!(out, "terminal: {term:?}");
    }
    let _ = writeln!(out, "snapshots: {}", summary.snapshots);
    if let Some(m) = summary.max_a_norm_sq {
        let _ = writeln!(out, "max |A|^2: {m:.6e}");
    }
    if let Some(t) = summary.t_singular_estimate {
        let _ = writeln!(out, "estimated singular time: {t:.9e}");
    }
    if let Some(c) = &summary.extinction_comparison {
        let _ = writeln!(
            out,
            "extinction time: observed {:.9e} vs closed form {:.9e} (rel {:.3e})",
            c.observed, c.closed_form, c.rel_error
        );
    }
    if let Some(f) = summary.type_flag {
        let _ = writeln!(out, "blow-up type: {f:?}");
    }
    if let Some(g) = summary.gamma_hat {
        let _ = writeln!(out, "gamma_hat: {g:.6e}");
    }
    for a in &summary.assertions {
        let _ = writeln!(
            out,
            "[{}] {}: {}",
            if a.pass { "PASS" } else { "FAIL" },
            a.name,
            a.detail
        );
    }
    let _ = writeln!(out, "result: {}", if summary.all_passed { "PASS" } else { "FAIL" });
    out
}
