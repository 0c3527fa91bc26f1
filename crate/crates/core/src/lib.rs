//! Predictive second-order sliding control (PSSC) for setpoint tracking of
//! constrained discrete-time linear systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: LTI models, relative degrees and the sliding-surface design
//!   (`G`, `H~`, terminal gains `K`, `L`).
//! * [`sliding`]: sliding variables and the unconstrained second-order DSMC law.
//! * [`lp`]: dense simplex used by the set machinery and as the QP phase 1.
//! * [`polytope`]: H-polyhedra, the maximal invariant set for tracking and
//!   Fourier-Motzkin projection.
//! * [`qp`]: primal active-set QP solver and the PSSC problem builder.
//! * [`pssc`]: receding-horizon controller, DSMC baseline, admissible-setpoint LP.
//! * [`estimation`]: discrete Kalman filter.
//! * [`plant`]: RCCI surrogate, closed-loop simulation, trace metrics and shipped scenarios.

pub mod error;
pub mod estimation;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod plant;
pub mod polytope;
pub mod pssc;
pub mod qp;
pub mod sliding;

pub use error::{Error, Result};
pub use estimation::KalmanFilter;
pub use model::{build_sliding_design, relative_degree, ConstraintSets, LtiModel, SlidingDesign};
pub use plant::metrics::{trace_metrics, TraceMetrics};
pub use plant::rcci::{RcciInput, RcciOperatingPoint, RcciState};
pub use plant::sim::{simulate, ControllerKind, PlantKind, SimConfig, SimRecord, SimTrace};
pub use polytope::invariant::{InvariantSetConfig, TrackingInvariantSet};
pub use polytope::Polyhedron;
pub use pssc::{PsscConfig, PsscController, PsscStepResult, StepStatus};
pub use qp::{QpProblem, QpSolution, QpStatus};

pub use nalgebra::{DMatrix, DVector};
