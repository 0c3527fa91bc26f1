//! Receding-horizon predictive sliding controller, the saturated DSMC
//! baseline and the closest-admissible-setpoint LP.

use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpOutcome};
use crate::model::{ConstraintSets, LtiModel, SlidingDesign};
use crate::polytope::invariant::{
    tracking_invariant_set, InvariantSetConfig, TrackingInvariantSet,
};
use crate::qp::builder::build_pssc_problem;
use crate::qp::{solve_qp_with, QpOptions, QpStatus, WarmStart};
use crate::sliding::{dsmc_control, saturate};

#[derive(Debug, Clone, PartialEq)]
pub struct PsscConfig {
    pub horizon: usize,
    pub lambda_offset: f64,
    pub qp: QpOptions,
    pub invariant: InvariantSetConfig,
}

impl Default for PsscConfig {
    fn default() -> Self {
        Self {
            horizon: 5,
            lambda_offset: 100.0,
            qp: QpOptions::default(),
            invariant: InvariantSetConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Optimal,
    /// Iteration cap hit; the feasible iterate was used.
    IterLimit,
    /// QP infeasible; the saturated terminal law was applied.
    Fallback,
    /// Baseline DSMC step.
    Dsmc,
}

impl StepStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepStatus::Optimal => "optimal",
            StepStatus::IterLimit => "iter_limit",
            StepStatus::Fallback => "fallback",
            StepStatus::Dsmc => "dsmc",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsscStepResult {
    pub u_applied: DVector<f64>,
    /// Input before clipping to the input box.
    pub u_unclipped: DVector<f64>,
    pub y_virtual: DVector<f64>,
    pub predicted_states: Vec<DVector<f64>>,
    pub predicted_inputs: Vec<DVector<f64>>,
    pub xi_norm: f64,
    pub status: StepStatus,
    pub qp_iterations: usize,
    pub solve_time: Duration,
}

/// Previous plan (states, inputs, virtual reference) and its active set.
type PreviousPlan = (
    Vec<DVector<f64>>,
    Vec<DVector<f64>>,
    DVector<f64>,
    Vec<usize>,
);

#[derive(Debug, Clone)]
pub struct PsscController {
    model: LtiModel,
    design: SlidingDesign,
    sets: ConstraintSets,
    invariant: Arc<TrackingInvariantSet>,
    config: PsscConfig,
    last_y_virtual: Option<DVector<f64>>,
    warm: Option<PreviousPlan>,
}

impl PsscController {
    /// Computes the terminal set and fails if it is not finitely determined.
    pub fn new(
        model: LtiModel,
        design: SlidingDesign,
        sets: ConstraintSets,
        config: PsscConfig,
    ) -> Result<Self> {
        let invariant = tracking_invariant_set(&model, &design, &sets, &config.invariant)?;
        invariant.require_determined()?;
        if invariant.t.is_certified_empty() {
            return Err(Error::InfeasibleTarget);
        }
        Self::with_invariant_set(model, design, sets, Arc::new(invariant), config)
    }

    /// Reuses a precomputed terminal set.
    pub fn with_invariant_set(
        model: LtiModel,
        design: SlidingDesign,
        sets: ConstraintSets,
        invariant: Arc<TrackingInvariantSet>,
        config: PsscConfig,
    ) -> Result<Self> {
        if config.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if invariant.t.dim() != model.n() + model.m() {
            return Err(Error::DimensionMismatch {
                context: "terminal set dimension",
                expected: model.n() + model.m(),
                found: invariant.t.dim(),
            });
        }
        Ok(Self {
            model,
            design,
            sets,
            invariant,
            config,
            last_y_virtual: None,
            warm: None,
        })
    }

    pub fn invariant_set(&self) -> &TrackingInvariantSet {
        &self.invariant
    }

    pub fn design(&self) -> &SlidingDesign {
        &self.design
    }

    pub fn model(&self) -> &LtiModel {
        &self.model
    }

    pub fn config(&self) -> &PsscConfig {
        &self.config
    }

    /// Forgets warm-start state.
    pub fn reset(&mut self) {
        self.last_y_virtual = None;
        self.warm = None;
    }

    /// One receding-horizon step from the estimate `x_hat`.
    pub fn step(&mut self, x_hat: &DVector<f64>, y_d: &DVector<f64>) -> Result<PsscStepResult> {
        let started = Instant::now();
        let horizon = self.config.horizon;
        let (prob, layout) = build_pssc_problem(
            &self.model,
            &self.design,
            &self.sets,
            &self.invariant,
            x_hat,
            y_d,
            horizon,
            self.config.lambda_offset,
        )?;
        let warm = self.warm_start(x_hat, y_d, &layout);
        let sol = solve_qp_with(&prob, warm.as_ref(), &self.config.qp)?;

        match sol.status {
            QpStatus::Optimal | QpStatus::IterLimit => {
                let states: Vec<_> = (0..=horizon).map(|j| layout.state(&sol.z, j)).collect();
                let inputs: Vec<_> = (0..horizon).map(|j| layout.input(&sol.z, j)).collect();
                let y_virtual = layout.y_virtual(&sol.z);
                let xi_norm = layout.xi(&sol.z).norm();
                let status = if sol.status == QpStatus::Optimal {
                    StepStatus::Optimal
                } else {
                    log::warn!("QP iteration limit reached; applying feasible iterate");
                    StepStatus::IterLimit
                };
                let u_applied = saturate_or_keep(&inputs[0], &self.sets)?;
                self.warm = Some((
                    states.clone(),
                    inputs.clone(),
                    y_virtual.clone(),
                    layout.shift_active(&sol.active_set),
                ));
                self.last_y_virtual = Some(y_virtual.clone());
                Ok(PsscStepResult {
                    u_applied,
                    u_unclipped: inputs[0].clone(),
                    y_virtual,
                    predicted_states: states,
                    predicted_inputs: inputs,
                    xi_norm,
                    status,
                    qp_iterations: sol.iterations,
                    solve_time: started.elapsed(),
                })
            }
            QpStatus::Infeasible | QpStatus::Unbounded => {
                let y_virtual = self.last_y_virtual.clone().unwrap_or_else(|| y_d.clone());
                log::warn!("PSSC QP {:?}; falling back to the terminal law", sol.status);
                let u = self.design.terminal_law(x_hat, &y_virtual);
                let u_applied = saturate_or_keep(&u, &self.sets)?;
                self.warm = None;
                Ok(PsscStepResult {
                    u_applied,
                    u_unclipped: u,
                    y_virtual,
                    predicted_states: Vec::new(),
                    predicted_inputs: Vec::new(),
                    xi_norm: f64::NAN,
                    status: StepStatus::Fallback,
                    qp_iterations: sol.iterations,
                    solve_time: started.elapsed(),
                })
            }
        }
    }

    /// Rolls the previous plan forward from the new estimate: inputs shifted
    /// by one, the terminal law appended, states re-simulated.
    fn warm_start(
        &self,
        x_hat: &DVector<f64>,
        y_d: &DVector<f64>,
        layout: &crate::qp::builder::PsscLayout,
    ) -> Option<WarmStart> {
        let (_, inputs, y_virtual, active) = self.warm.as_ref()?;
        let horizon = self.config.horizon;
        let mut states = vec![x_hat.clone()];
        let mut plan = Vec::with_capacity(horizon);
        for j in 0..horizon {
            let u = if j + 1 < inputs.len() {
                inputs[j + 1].clone()
            } else {
                self.design.terminal_law(&states[j], y_virtual)
            };
            states.push(self.model.step(&states[j], &u));
            plan.push(u);
        }
        Some(WarmStart {
            primal: Some(layout.pack(&states, &plan, y_virtual, y_d)),
            active: active.clone(),
        })
    }
}

/// Clips to the input box when the set is a box; otherwise keeps `u`.
fn saturate_or_keep(u: &DVector<f64>, sets: &ConstraintSets) -> Result<DVector<f64>> {
    match saturate(u, &sets.inputs) {
        Ok(v) => Ok(v),
        Err(Error::NonBoxInputSet) => Ok(u.clone()),
        Err(e) => Err(e),
    }
}

/// Saturated DSMC input.
pub fn dsmc_step(
    design: &SlidingDesign,
    model: &LtiModel,
    inputs: &crate::polytope::Polyhedron,
    x_hat: &DVector<f64>,
    href_now: &DVector<f64>,
    href_next: &DVector<f64>,
) -> Result<DVector<f64>> {
    saturate(
        &dsmc_control(design, model, x_hat, href_now, href_next),
        inputs,
    )
}

/// Admissible steady output nearest to `y_d` in the 1-norm:
///
/// ```text
/// min |yv - y_d|_1  s.t.  x_s = A x_s + B u_s,  yv = C x_s,
///                         x_s ∈ X,  u_s ∈ U,  (x_s, yv) ∈ T
/// ```
pub fn closest_admissible_setpoint(
    model: &LtiModel,
    sets: &ConstraintSets,
    invariant: &TrackingInvariantSet,
    y_d: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = model.n();
    let m = model.m();
    if y_d.len() != m {
        return Err(Error::DimensionMismatch {
            context: "reference",
            expected: m,
            found: y_d.len(),
        });
    }
    if invariant.t.is_certified_empty() {
        return Err(Error::InfeasibleTarget);
    }
    // Variables: (x_s, u_s, yv, t).
    let nu = n + 3 * m;
    let (xo, uo, yo, to) = (0, n, n + m, n + 2 * m);

    let mut f_eq = DMatrix::zeros(n + m, nu);
    f_eq.view_mut((0, xo), (n, n))
        .copy_from(&(model.a() - DMatrix::identity(n, n)));
    f_eq.view_mut((0, uo), (n, m)).copy_from(model.b());
    f_eq.view_mut((n, xo), (m, n)).copy_from(model.c());
    f_eq.view_mut((n, yo), (m, m))
        .copy_from(&(-DMatrix::identity(m, m)));
    let g_eq = DVector::zeros(n + m);

    let (fx, fu, ft) = (sets.states.f(), sets.inputs.f(), invariant.t.f());
    let rows = fx.nrows() + fu.nrows() + ft.nrows() + 2 * m;
    let mut f_in = DMatrix::zeros(rows, nu);
    let mut g_in = DVector::zeros(rows);
    let mut r = 0;
    f_in.view_mut((r, xo), (fx.nrows(), n)).copy_from(fx);
    g_in.rows_mut(r, fx.nrows()).copy_from(sets.states.g());
    r += fx.nrows();
    f_in.view_mut((r, uo), (fu.nrows(), m)).copy_from(fu);
    g_in.rows_mut(r, fu.nrows()).copy_from(sets.inputs.g());
    r += fu.nrows();
    f_in.view_mut((r, xo), (ft.nrows(), n))
        .copy_from(&ft.columns(0, n));
    f_in.view_mut((r, yo), (ft.nrows(), m))
        .copy_from(&ft.columns(n, m));
    g_in.rows_mut(r, ft.nrows()).copy_from(invariant.t.g());
    r += ft.nrows();
    for i in 0..m {
        f_in[(r, yo + i)] = 1.0;
        f_in[(r, to + i)] = -1.0;
        g_in[r] = y_d[i];
        f_in[(r + 1, yo + i)] = -1.0;
        f_in[(r + 1, to + i)] = -1.0;
        g_in[r + 1] = -y_d[i];
        r += 2;
    }
    let mut c = DVector::zeros(nu);
    c.rows_mut(to, m).fill(1.0);
    let program = LinearProgram::new(c, f_in, g_in).with_equalities(f_eq, g_eq);
    match lp::solve(&program)? {
        LpOutcome::Optimal { z, .. } => Ok(z.rows(yo, m).into_owned()),
        _ => Err(Error::InfeasibleTarget),
    }
}
