//! Numerical laboratory for mean curvature flow of quadratically pinched
//! hypersurfaces in the round sphere `S^{n+1}_K`.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! curvature  ->  flows (homogeneous / equivariant)  ->  monitor  ->  rescaler
//! ```
//!
//! * [`curvature`] — exact pointwise algebra of principal curvature spectra:
//!   pinching quantities, derived coefficients, the Simons tensor norm, and
//!   the generalized Clifford torus closed forms.
//! * [`homogeneous`] — ODE reductions of the flow for geodesic spheres
//!   (hyperparallels) and generalized Clifford tori.
//! * [`equivariant`] — cohomogeneity-one solver: `SO(p) x SO(q)`-invariant
//!   hypersurfaces evolved through their profile curve in the quarter-sphere
//!   orbit space.
//! * [`monitor`] — evaluates the quantitative flow estimates along a trace
//!   (preservation, decay, cylindrical, gradient/Hessian, Kato, convexity,
//!   L^p decay, existence-time bound).
//! * [`rescaler`] — type-I/type-II classification and parabolic rescaling of
//!   near-singular regions against sphere/cylinder models.
//! * [`poincare`] — constrained global minimization certifying positivity of
//!   the pointwise ratio behind the Poincare-type inequality.
//! * [`scenario`] — JSON scenario configs, the run pipeline, and exporters
//!   shared with the command line interface.

pub mod curvature;
pub mod equivariant;
pub mod error;
pub mod export;
pub mod homogeneous;
pub mod monitor;
pub mod ode;
pub mod poincare;
pub mod rescaler;
pub mod scenario;
pub mod trace;

pub use curvature::{
    CliffordClosedForm, Coefficients, Invariants, PinchingParams, PinchingReport, ShapeSpectrum,
};
pub use equivariant::{ClassCReport, FlowState, PointGeometry, ProfileSpec, SymmetryType};
pub use error::{Error, Result};
pub use monitor::{ClassCBounds, EstimateReport};
pub use poincare::GammaCertificate;
pub use rescaler::{BlowupRecord, TypeFlag};
pub use trace::{FlowTrace, PointSample, Snapshot, TerminalEvent, TraceKind};
