//! Receding-horizon QP for the predictive sliding controller.
//!
//! Decision vector `z = (x_0 .. x_N, u_0 .. u_{N-1}, yv, t)`. With
//! `s_j = G x_j - H~ yv` and `xi_j = s_{j+1} + beta s_j`, the cost is
//!
//! ```text
//! sum_{j=0}^{N-1} |xi_j|^2 + lambda_offset * sum_i t_i,   t >= |yv - y_d|
//! ```
//!
//! subject to `x_0 = x_hat`, the model dynamics, `x_1 .. x_{N-1} ∈ X`,
//! `u_j ∈ U` and `(x_N, yv) ∈ T`. The entries `xi_j` are linear in `z`, so
//! the quadratic term is `z' E'E z` for the map `E` kept in the layout.

use nalgebra::{DMatrix, DVector};

use super::QpProblem;
use crate::error::{Error, Result};
use crate::model::{ConstraintSets, LtiModel, SlidingDesign};
use crate::polytope::invariant::TrackingInvariantSet;

/// Where each named quantity lives inside `z` and the constraint rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PsscLayout {
    pub n: usize,
    pub m: usize,
    pub horizon: usize,
    pub nu: usize,
    /// `xi_map * z` stacks `xi_0 .. xi_{N-1}`.
    pub xi_map: DMatrix<f64>,
    state_rows: usize,
    input_rows: usize,
}

impl PsscLayout {
    pub fn x_offset(&self, j: usize) -> usize {
        j * self.n
    }

    pub fn u_offset(&self, j: usize) -> usize {
        (self.horizon + 1) * self.n + j * self.m
    }

    pub fn y_virtual_offset(&self) -> usize {
        (self.horizon + 1) * self.n + self.horizon * self.m
    }

    pub fn slack_offset(&self) -> usize {
        self.y_virtual_offset() + self.m
    }

    pub fn state(&self, z: &DVector<f64>, j: usize) -> DVector<f64> {
        z.rows(self.x_offset(j), self.n).into_owned()
    }

    pub fn input(&self, z: &DVector<f64>, j: usize) -> DVector<f64> {
        z.rows(self.u_offset(j), self.m).into_owned()
    }

    pub fn y_virtual(&self, z: &DVector<f64>) -> DVector<f64> {
        z.rows(self.y_virtual_offset(), self.m).into_owned()
    }

    pub fn slack(&self, z: &DVector<f64>) -> DVector<f64> {
        z.rows(self.slack_offset(), self.m).into_owned()
    }

    pub fn xi(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.xi_map * z
    }

    /// Packs trajectories into a decision vector with tight slacks.
    pub fn pack(
        &self,
        states: &[DVector<f64>],
        inputs: &[DVector<f64>],
        y_virtual: &DVector<f64>,
        y_d: &DVector<f64>,
    ) -> DVector<f64> {
        let mut z = DVector::zeros(self.nu);
        for (j, x) in states.iter().enumerate().take(self.horizon + 1) {
            z.rows_mut(self.x_offset(j), self.n).copy_from(x);
        }
        for (j, u) in inputs.iter().enumerate().take(self.horizon) {
            z.rows_mut(self.u_offset(j), self.m).copy_from(u);
        }
        z.rows_mut(self.y_virtual_offset(), self.m)
            .copy_from(y_virtual);
        let t = (y_virtual - y_d).abs();
        z.rows_mut(self.slack_offset(), self.m).copy_from(&t);
        z
    }

    /// Maps inequality rows active at one step to the rows they become
    /// after shifting the horizon by one.
    pub fn shift_active(&self, active: &[usize]) -> Vec<usize> {
        let x_block = self.horizon.saturating_sub(1) * self.state_rows;
        let u_block = self.horizon * self.input_rows;
        let mut out = Vec::new();
        for &i in active {
            if i < x_block {
                // State rows for x_1 .. x_{N-1}; the x_1 rows drop out.
                if i >= self.state_rows {
                    out.push(i - self.state_rows);
                }
            } else if i < x_block + u_block {
                let k = i - x_block;
                if k >= self.input_rows {
                    out.push(i - self.input_rows);
                }
            } else {
                out.push(i);
            }
        }
        out
    }
}

/// Assembles the QP for one control step.
#[allow(clippy::too_many_arguments)]
pub fn build_pssc_problem(
    model: &LtiModel,
    design: &SlidingDesign,
    sets: &ConstraintSets,
    invariant: &TrackingInvariantSet,
    x0: &DVector<f64>,
    y_d: &DVector<f64>,
    horizon: usize,
    lambda_offset: f64,
) -> Result<(QpProblem, PsscLayout)> {
    let n = model.n();
    let m = model.m();
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    if lambda_offset <= 0.0 || !lambda_offset.is_finite() {
        return Err(Error::InvalidConfig(
            "lambda_offset must be positive".into(),
        ));
    }
    for (context, found, expected) in [
        ("initial state", x0.len(), n),
        ("reference", y_d.len(), m),
        ("terminal set dimension", invariant.t.dim(), n + m),
    ] {
        if found != expected {
            return Err(Error::DimensionMismatch {
                context,
                expected,
                found,
            });
        }
    }
    let nn = horizon;
    let nu = (nn + 1) * n + nn * m + 2 * m;
    let mut layout = PsscLayout {
        n,
        m,
        horizon: nn,
        nu,
        xi_map: DMatrix::zeros(nn * m, nu),
        state_rows: sets.states.num_rows(),
        input_rows: sets.inputs.num_rows(),
    };

    // xi_j = G x_{j+1} + beta G x_j - (I + beta) H~ yv
    let g = design.g();
    let beta_g = design.beta() * g;
    let ref_gain = -((DMatrix::identity(m, m) + design.beta()) * design.h_tilde());
    let yv = layout.y_virtual_offset();
    for j in 0..nn {
        let row = j * m;
        layout
            .xi_map
            .view_mut((row, layout.x_offset(j + 1)), (m, n))
            .copy_from(g);
        layout
            .xi_map
            .view_mut((row, layout.x_offset(j)), (m, n))
            .copy_from(&beta_g);
        layout
            .xi_map
            .view_mut((row, yv), (m, m))
            .copy_from(&ref_gain);
    }
    let mut p = layout.xi_map.transpose() * &layout.xi_map * 2.0;
    crate::linalg::symmetrize(&mut p);
    let mut q = DVector::zeros(nu);
    q.rows_mut(layout.slack_offset(), m).fill(lambda_offset);

    // Equalities: initial condition and dynamics.
    let eq_rows = (nn + 1) * n;
    let mut f_eq = DMatrix::zeros(eq_rows, nu);
    let mut g_eq = DVector::zeros(eq_rows);
    f_eq.view_mut((0, 0), (n, n)).fill_with_identity();
    g_eq.rows_mut(0, n).copy_from(x0);
    for j in 0..nn {
        let r = (j + 1) * n;
        f_eq.view_mut((r, layout.x_offset(j + 1)), (n, n))
            .fill_with_identity();
        f_eq.view_mut((r, layout.x_offset(j)), (n, n))
            .copy_from(&(-model.a()));
        f_eq.view_mut((r, layout.u_offset(j)), (n, m))
            .copy_from(&(-model.b()));
    }

    // Inequalities.
    let fx = sets.states.f();
    let gx = sets.states.g();
    let fu = sets.inputs.f();
    let gu = sets.inputs.g();
    let ft = invariant.t.f();
    let gt = invariant.t.g();
    let rx = fx.nrows();
    let ru = fu.nrows();
    let rt = ft.nrows();
    let in_rows = (nn - 1) * rx + nn * ru + rt + 2 * m;
    let mut f_in = DMatrix::zeros(in_rows, nu);
    let mut g_in = DVector::zeros(in_rows);
    let mut r = 0;
    for j in 1..nn {
        f_in.view_mut((r, layout.x_offset(j)), (rx, n))
            .copy_from(fx);
        g_in.rows_mut(r, rx).copy_from(gx);
        r += rx;
    }
    for j in 0..nn {
        f_in.view_mut((r, layout.u_offset(j)), (ru, m))
            .copy_from(fu);
        g_in.rows_mut(r, ru).copy_from(gu);
        r += ru;
    }
    f_in.view_mut((r, layout.x_offset(nn)), (rt, n))
        .copy_from(&ft.columns(0, n));
    f_in.view_mut((r, yv), (rt, m)).copy_from(&ft.columns(n, m));
    g_in.rows_mut(r, rt).copy_from(gt);
    r += rt;
    let slack = layout.slack_offset();
    for i in 0..m {
        // yv_i - t_i <= y_d,i and -yv_i - t_i <= -y_d,i
        f_in[(r, yv + i)] = 1.0;
        f_in[(r, slack + i)] = -1.0;
        g_in[r] = y_d[i];
        f_in[(r + 1, yv + i)] = -1.0;
        f_in[(r + 1, slack + i)] = -1.0;
        g_in[r + 1] = -y_d[i];
        r += 2;
    }
    debug_assert_eq!(r, in_rows);

    let prob = QpProblem::new(p, q, f_in, g_in, f_eq, g_eq)?;
    Ok((prob, layout))
}
