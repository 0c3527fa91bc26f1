//! Dense convex QP by a primal active-set method.
//!
//! ```text
//! minimize   1/2 z'Pz + q'z
//! subject to F_in z <= g_in,   F_eq z = g_eq
//! ```
//!
//! A feasible start comes from the warm-start primal when it is feasible, or
//! from a phase-1 LP otherwise. Each iteration minimizes the model over the
//! null space of the working set (a QR of the working rows); zero-curvature
//! directions of the reduced Hessian are handled explicitly so positive
//! semidefinite `P` is fine.

pub mod builder;

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{self, LinearProgram, LpOutcome};

const FEAS_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-10;
const INDEPENDENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub f_in: DMatrix<f64>,
    pub g_in: DVector<f64>,
    pub f_eq: DMatrix<f64>,
    pub g_eq: DVector<f64>,
}

impl QpProblem {
    pub fn new(
        p: DMatrix<f64>,
        q: DVector<f64>,
        f_in: DMatrix<f64>,
        g_in: DVector<f64>,
        f_eq: DMatrix<f64>,
        g_eq: DVector<f64>,
    ) -> Result<Self> {
        let prob = Self {
            p,
            q,
            f_in,
            g_in,
            f_eq,
            g_eq,
        };
        prob.validate()?;
        Ok(prob)
    }

    /// Problem with inequalities only.
    pub fn inequality(
        p: DMatrix<f64>,
        q: DVector<f64>,
        f_in: DMatrix<f64>,
        g_in: DVector<f64>,
    ) -> Result<Self> {
        let nu = q.len();
        Self::new(p, q, f_in, g_in, DMatrix::zeros(0, nu), DVector::zeros(0))
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn validate(&self) -> Result<()> {
        let nu = self.dim();
        let shapes = [
            ("P rows", self.p.nrows(), nu),
            ("P columns", self.p.ncols(), nu),
            ("F_in columns", self.f_in.ncols(), nu),
            ("g_in length", self.g_in.len(), self.f_in.nrows()),
            ("F_eq columns", self.f_eq.ncols(), nu),
            ("g_eq length", self.g_eq.len(), self.f_eq.nrows()),
        ];
        for (context, found, expected) in shapes {
            if found != expected {
                return Err(Error::DimensionMismatch {
                    context,
                    expected,
                    found,
                });
            }
        }
        let scale = linalg::max_abs(&self.p).max(1.0);
        if !linalg::is_symmetric(&self.p, 1e-12 * scale) {
            return Err(Error::InvalidConfig(
                "QP cost matrix is not symmetric".into(),
            ));
        }
        Ok(())
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        0.5 * z.dot(&(&self.p * z)) + self.q.dot(z)
    }

    /// Plain-text dump for cross-checking with external solvers.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let fmt_row = |row: Vec<f64>| {
            row.iter()
                .map(|v| format!("{v:e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(
            out,
            "# qp nu {} in {} eq {}",
            self.dim(),
            self.f_in.nrows(),
            self.f_eq.nrows()
        );
        let _ = writeln!(out, "P");
        for i in 0..self.dim() {
            let _ = writeln!(out, "{}", fmt_row(self.p.row(i).iter().copied().collect()));
        }
        let _ = writeln!(out, "q");
        let _ = writeln!(out, "{}", fmt_row(self.q.iter().copied().collect()));
        for (name, f, g) in [
            ("in", &self.f_in, &self.g_in),
            ("eq", &self.f_eq, &self.g_eq),
        ] {
            let _ = writeln!(out, "{name}");
            for i in 0..f.nrows() {
                let mut row: Vec<f64> = f.row(i).iter().copied().collect();
                row.push(g[i]);
                let _ = writeln!(out, "{}", fmt_row(row));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let parse = |line: &str| -> Result<Vec<f64>> {
            line.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("{e}: {t}")))
                })
                .collect()
        };
        let expect = |got: Option<&str>, want: &str| -> Result<()> {
            if got == Some(want) {
                Ok(())
            } else {
                Err(Error::Parse(format!(
                    "expected section '{want}', found {got:?}"
                )))
            }
        };
        expect(lines.next(), "P")?;
        let mut p_rows: Vec<Vec<f64>> = Vec::new();
        let mut q = None;
        for line in lines.by_ref() {
            if line == "q" {
                q = Some(parse(lines.next().unwrap_or(""))?);
                break;
            }
            p_rows.push(parse(line)?);
        }
        let q = q.ok_or_else(|| Error::Parse("missing section 'q'".into()))?;
        let nu = q.len();
        if p_rows.len() != nu || p_rows.iter().any(|r| r.len() != nu) {
            return Err(Error::Parse("P must be square and match q".into()));
        }
        expect(lines.next(), "in")?;
        let mut in_rows: Vec<Vec<f64>> = Vec::new();
        let mut eq_rows: Vec<Vec<f64>> = Vec::new();
        let mut in_eq = false;
        for line in lines {
            if line == "eq" {
                in_eq = true;
                continue;
            }
            let row = parse(line)?;
            if row.len() != nu + 1 {
                return Err(Error::Parse(format!(
                    "constraint row needs {} numbers",
                    nu + 1
                )));
            }
            if in_eq {
                eq_rows.push(row);
            } else {
                in_rows.push(row);
            }
        }
        let split = |rows: &[Vec<f64>]| {
            let f = DMatrix::from_fn(rows.len(), nu, |i, j| rows[i][j]);
            let g = DVector::from_fn(rows.len(), |i, _| rows[i][nu]);
            (f, g)
        };
        let (f_in, g_in) = split(&in_rows);
        let (f_eq, g_eq) = split(&eq_rows);
        Self::new(
            DMatrix::from_fn(nu, nu, |i, j| p_rows[i][j]),
            DVector::from_vec(q),
            f_in,
            g_in,
            f_eq,
            g_eq,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    IterLimit,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub z: DVector<f64>,
    pub duals_in: DVector<f64>,
    pub duals_eq: DVector<f64>,
    pub status: QpStatus,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    /// Inequality rows in the final working set.
    pub active_set: Vec<usize>,
    /// Farkas certificate `(y_in, y_eq)` when infeasible.
    pub certificate: Option<(DVector<f64>, DVector<f64>)>,
}

/// Starting hints: a primal point and inequality rows to try first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WarmStart {
    pub primal: Option<DVector<f64>>,
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpOptions {
    pub max_iterations: usize,
}

impl Default for QpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2_000,
        }
    }
}

pub fn solve_qp(prob: &QpProblem, warm: Option<&WarmStart>) -> Result<QpSolution> {
    solve_qp_with(prob, warm, &QpOptions::default())
}

/// Rows scaled to unit norm; zero rows keep scale 1.
struct Scaled {
    f_in: DMatrix<f64>,
    g_in: DVector<f64>,
    s_in: DVector<f64>,
    f_eq: DMatrix<f64>,
    g_eq: DVector<f64>,
    s_eq: DVector<f64>,
}

fn scale_rows(f: &DMatrix<f64>, g: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let mut f = f.clone();
    let mut g = g.clone();
    let mut s = DVector::from_element(g.len(), 1.0);
    for i in 0..f.nrows() {
        let norm = f.row(i).norm();
        if norm > 0.0 {
            s[i] = norm;
            f.row_mut(i).unscale_mut(norm);
            g[i] /= norm;
        }
    }
    (f, g, s)
}

pub fn solve_qp_with(
    prob: &QpProblem,
    warm: Option<&WarmStart>,
    options: &QpOptions,
) -> Result<QpSolution> {
    prob.validate()?;
    let nu = prob.dim();
    let (f_in, g_in, s_in) = scale_rows(&prob.f_in, &prob.g_in);
    let (f_eq, g_eq, s_eq) = scale_rows(&prob.f_eq, &prob.g_eq);
    let sc = Scaled {
        f_in,
        g_in,
        s_in,
        f_eq,
        g_eq,
        s_eq,
    };
    let mi = sc.f_in.nrows();
    let me = sc.f_eq.nrows();

    let feasible_start = warm
        .and_then(|w| w.primal.as_ref())
        .filter(|z| z.len() == nu && is_feasible(&sc, z));
    let z0 = match feasible_start {
        Some(z) => z.clone(),
        None => {
            let lp = LinearProgram::new(DVector::zeros(nu), sc.f_in.clone(), sc.g_in.clone())
                .with_equalities(sc.f_eq.clone(), sc.g_eq.clone());
            match lp::solve(&lp)? {
                LpOutcome::Optimal { z, .. } => z,
                LpOutcome::Infeasible {
                    ineq_certificate,
                    eq_certificate,
                } => {
                    let y_in = ineq_certificate.component_div(&sc.s_in);
                    let y_eq = eq_certificate.component_div(&sc.s_eq);
                    return Ok(QpSolution {
                        z: DVector::zeros(nu),
                        duals_in: DVector::zeros(mi),
                        duals_eq: DVector::zeros(me),
                        status: QpStatus::Infeasible,
                        objective: f64::NAN,
                        kkt_residual: f64::INFINITY,
                        iterations: 0,
                        active_set: Vec::new(),
                        certificate: Some((y_in, y_eq)),
                    });
                }
                LpOutcome::Unbounded => unreachable!("zero-objective LP is never unbounded"),
            }
        }
    };

    let hints: &[usize] = warm.map(|w| w.active.as_slice()).unwrap_or(&[]);
    let mut state = ActiveSet::new(&sc, z0, hints);
    let p = &prob.p;
    let q = &prob.q;
    let hess_scale = linalg::max_abs(p).max(1.0);

    let mut iterations = 0;
    let status = loop {
        if iterations >= options.max_iterations {
            break QpStatus::IterLimit;
        }
        iterations += 1;

        let rows = state.working_rows(&sc);
        let (qmat, r) = linalg::row_space_factor(&rows);
        let w = rows.nrows();
        let z_basis = qmat.columns(w, nu - w).into_owned();
        let grad = p * &state.z + q;

        let step = null_space_step(p, &grad, &z_basis, hess_scale);
        let step_norm = step.direction.amax();
        if !step.is_ray && step_norm <= 1e-12 * (1.0 + state.z.amax()) {
            // Stationary on the working set: check multiplier signs.
            let y = qmat.columns(0, w).into_owned();
            let rhs = -(y.transpose() * &grad);
            let mu = r
                .solve_upper_triangular(&rhs)
                .ok_or_else(|| Error::IllConditioned("working-set factor is singular".into()))?;
            let neq = state.eq_rows.len();
            let mut drop: Option<(usize, f64)> = None;
            for (slot, &row) in state.in_rows.iter().enumerate() {
                let value = mu[neq + slot];
                let tol = DUAL_TOL * (1.0 + grad.amax());
                if value < -tol && drop.is_none_or(|(_, best)| value < best) {
                    drop = Some((row, value));
                }
            }
            match drop {
                Some((row, _)) => {
                    state.in_rows.retain(|&r| r != row);
                    continue;
                }
                None => break QpStatus::Optimal,
            }
        }

        // Ratio test along the step.
        let mut alpha = if step.is_ray { f64::INFINITY } else { 1.0 };
        let mut blocking: Option<usize> = None;
        let fp = &sc.f_in * &step.direction;
        let fz = &sc.f_in * &state.z;
        for i in 0..mi {
            if state.in_rows.contains(&i) || fp[i] <= 1e-12 * step_norm {
                continue;
            }
            let slack = (sc.g_in[i] - fz[i]).max(0.0);
            let ratio = slack / fp[i];
            if ratio < alpha {
                alpha = ratio;
                blocking = Some(i);
            }
        }
        if !alpha.is_finite() {
            break QpStatus::Unbounded;
        }
        state.z += &step.direction * alpha;
        if let Some(i) = blocking {
            state.in_rows.push(i);
        }
    };

    Ok(finish(prob, &sc, state, status, iterations))
}

struct Step {
    direction: DVector<f64>,
    is_ray: bool,
}

/// Minimizer of the quadratic model over `span(Z)`, or a descent ray along
/// zero curvature when the model is unbounded there.
fn null_space_step(
    p: &DMatrix<f64>,
    grad: &DVector<f64>,
    z_basis: &DMatrix<f64>,
    hess_scale: f64,
) -> Step {
    let nu = grad.len();
    if z_basis.ncols() == 0 {
        return Step {
            direction: DVector::zeros(nu),
            is_ray: false,
        };
    }
    let mut reduced = z_basis.transpose() * p * z_basis;
    linalg::symmetrize(&mut reduced);
    let g_red = z_basis.transpose() * grad;
    let eig = SymmetricEigen::new(reduced);
    let coeffs = eig.eigenvectors.transpose() * &g_red;
    let curvature_tol = 1e-10 * hess_scale;
    let grad_tol = 1e-11 * (1.0 + grad.amax());

    let mut ray = DVector::zeros(z_basis.ncols());
    let mut has_ray = false;
    for i in 0..coeffs.len() {
        if eig.eigenvalues[i] <= curvature_tol && coeffs[i].abs() > grad_tol {
            ray -= eig.eigenvectors.column(i) * coeffs[i];
            has_ray = true;
        }
    }
    if has_ray {
        let direction = z_basis * ray;
        let norm = direction.norm();
        return Step {
            direction: direction / norm,
            is_ray: true,
        };
    }
    let mut newton = DVector::zeros(z_basis.ncols());
    for i in 0..coeffs.len() {
        if eig.eigenvalues[i] > curvature_tol {
            newton -= eig.eigenvectors.column(i) * (coeffs[i] / eig.eigenvalues[i]);
        }
    }
    Step {
        direction: z_basis * newton,
        is_ray: false,
    }
}

fn is_feasible(sc: &Scaled, z: &DVector<f64>) -> bool {
    let fin = &sc.f_in * z - &sc.g_in;
    let feq = &sc.f_eq * z - &sc.g_eq;
    fin.iter().all(|v| *v <= FEAS_TOL) && feq.iter().all(|v| v.abs() <= FEAS_TOL)
}

struct ActiveSet {
    z: DVector<f64>,
    eq_rows: Vec<usize>,
    in_rows: Vec<usize>,
}

impl ActiveSet {
    /// Greedy independent working set at `z`: equalities first, then active
    /// inequalities with the hinted rows tried before the rest.
    fn new(sc: &Scaled, z: DVector<f64>, hints: &[usize]) -> Self {
        let nu = z.len();
        let mut basis: Vec<DVector<f64>> = Vec::new();
        let mut try_add = |row: DVector<f64>| -> bool {
            if basis.len() >= nu {
                return false;
            }
            let mut residual = row.clone();
            for b in &basis {
                let c = b.dot(&residual);
                residual -= b * c;
            }
            let norm = residual.norm();
            if norm > INDEPENDENCE_TOL * row.norm().max(1e-300) {
                basis.push(residual / norm);
                true
            } else {
                false
            }
        };
        let mut eq_rows = Vec::new();
        for i in 0..sc.f_eq.nrows() {
            if try_add(sc.f_eq.row(i).transpose()) {
                eq_rows.push(i);
            }
        }
        let fz = &sc.f_in * &z;
        let active = |i: usize| (fz[i] - sc.g_in[i]).abs() <= FEAS_TOL;
        let mut order: Vec<usize> = hints
            .iter()
            .copied()
            .filter(|&i| i < sc.f_in.nrows())
            .collect();
        order.extend((0..sc.f_in.nrows()).filter(|i| !hints.contains(i)));
        let mut in_rows = Vec::new();
        for i in order {
            if active(i) && !in_rows.contains(&i) && try_add(sc.f_in.row(i).transpose()) {
                in_rows.push(i);
            }
        }
        Self {
            z,
            eq_rows,
            in_rows,
        }
    }

    fn working_rows(&self, sc: &Scaled) -> DMatrix<f64> {
        let nu = self.z.len();
        let w = self.eq_rows.len() + self.in_rows.len();
        let mut rows = DMatrix::zeros(w, nu);
        for (k, &i) in self.eq_rows.iter().enumerate() {
            rows.row_mut(k).copy_from(&sc.f_eq.row(i));
        }
        let off = self.eq_rows.len();
        for (k, &i) in self.in_rows.iter().enumerate() {
            rows.row_mut(off + k).copy_from(&sc.f_in.row(i));
        }
        rows
    }
}

/// Least-squares multipliers on the working set, unscaled, plus the KKT
/// residual.
fn finish(
    prob: &QpProblem,
    sc: &Scaled,
    state: ActiveSet,
    status: QpStatus,
    iterations: usize,
) -> QpSolution {
    let mi = sc.f_in.nrows();
    let me = sc.f_eq.nrows();
    let grad = &prob.p * &state.z + &prob.q;
    let rows = state.working_rows(sc);
    let mut mu_in = DVector::zeros(mi);
    let mut mu_eq = DVector::zeros(me);
    if rows.nrows() > 0 {
        let (qmat, r) = linalg::row_space_factor(&rows);
        let w = rows.nrows();
        let y = qmat.columns(0, w).into_owned();
        if let Some(mu) = r.solve_upper_triangular(&-(y.transpose() * &grad)) {
            let neq = state.eq_rows.len();
            for (k, &i) in state.eq_rows.iter().enumerate() {
                mu_eq[i] = mu[k];
            }
            for (k, &i) in state.in_rows.iter().enumerate() {
                mu_in[i] = mu[neq + k];
            }
        }
    }

    // Residuals on the scaled rows.
    let stationarity = &grad + sc.f_in.transpose() * &mu_in + sc.f_eq.transpose() * &mu_eq;
    let stat_scale = 1.0 + (&prob.p * &state.z).amax() + prob.q.amax();
    let fin = &sc.f_in * &state.z - &sc.g_in;
    let feq = &sc.f_eq * &state.z - &sc.g_eq;
    let primal = fin
        .iter()
        .map(|v| v.max(0.0))
        .chain(feq.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    let dual = mu_in.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max) / stat_scale;
    let comp = mu_in
        .iter()
        .zip(fin.iter())
        .map(|(m, s)| (m * s).abs())
        .fold(0.0, f64::max)
        / stat_scale;
    let kkt = (stationarity.amax() / stat_scale)
        .max(primal)
        .max(dual)
        .max(comp);

    let mut active_set = state.in_rows.clone();
    active_set.sort_unstable();
    let objective = prob.objective(&state.z);
    QpSolution {
        z: state.z,
        duals_in: mu_in.component_div(&sc.s_in),
        duals_eq: mu_eq.component_div(&sc.s_eq),
        status,
        objective,
        kkt_residual: kkt,
        iterations,
        active_set,
        certificate: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn active_lower_bound() {
        // min z^2 s.t. z >= 1
        let prob = QpProblem::inequality(
            DMatrix::from_element(1, 1, 2.0),
            v(&[0.0]),
            DMatrix::from_element(1, 1, -1.0),
            v(&[-1.0]),
        )
        .unwrap();
        let sol = solve_qp(&prob, None).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.z[0] - 1.0).abs() < 1e-12);
        assert!((sol.duals_in[0] - 2.0).abs() < 1e-12);
        assert!(sol.kkt_residual < 1e-12);
    }

    #[test]
    fn unconstrained_minimum() {
        let prob = QpProblem::inequality(
            DMatrix::identity(3, 3) * 2.0,
            DVector::zeros(3),
            DMatrix::zeros(0, 3),
            DVector::zeros(0),
        )
        .unwrap();
        let sol = solve_qp(&prob, None).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!(sol.z.amax() < 1e-14);
    }

    #[test]
    fn equality_and_semidefinite() {
        // min (z0 - z1)^2 + z2 s.t. z0 + z1 = 2, z2 >= -1
        let p = DMatrix::from_row_slice(3, 3, &[2.0, -2.0, 0.0, -2.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        let prob = QpProblem::new(
            p,
            v(&[0.0, 0.0, 1.0]),
            DMatrix::from_row_slice(1, 3, &[0.0, 0.0, -1.0]),
            v(&[1.0]),
            DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]),
            v(&[2.0]),
        )
        .unwrap();
        let sol = solve_qp(&prob, None).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.z - v(&[1.0, 1.0, -1.0])).amax() < 1e-10);
        assert!(sol.kkt_residual < 1e-9);
    }

    #[test]
    fn linear_objective_unbounded() {
        let prob = QpProblem::inequality(
            DMatrix::zeros(1, 1),
            v(&[1.0]),
            DMatrix::from_element(1, 1, 1.0),
            v(&[0.0]),
        )
        .unwrap();
        assert_eq!(solve_qp(&prob, None).unwrap().status, QpStatus::Unbounded);
    }

    #[test]
    fn infeasible_with_certificate() {
        let f = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let g = v(&[0.0, -1.0]);
        let prob = QpProblem::inequality(DMatrix::identity(1, 1), v(&[0.0]), f.clone(), g.clone())
            .unwrap();
        let sol = solve_qp(&prob, None).unwrap();
        assert_eq!(sol.status, QpStatus::Infeasible);
        let (y, _) = sol.certificate.unwrap();
        assert!(y.iter().all(|v| *v >= 0.0));
        assert!((f.transpose() * &y).amax() < 1e-12);
        assert!(g.dot(&y) < 0.0);
    }

    #[test]
    fn iteration_limit_reported() {
        let prob = QpProblem::inequality(
            DMatrix::identity(5, 5),
            DVector::from_element(5, -10.0),
            DMatrix::identity(5, 5),
            DVector::from_element(5, 1.0),
        )
        .unwrap();
        let warm = WarmStart {
            primal: Some(DVector::zeros(5)),
            active: Vec::new(),
        };
        let sol = solve_qp_with(&prob, Some(&warm), &QpOptions { max_iterations: 2 }).unwrap();
        assert_eq!(sol.status, QpStatus::IterLimit);
        assert!(is_feasible_plain(&prob, &sol.z));
    }

    fn is_feasible_plain(prob: &QpProblem, z: &DVector<f64>) -> bool {
        (&prob.f_in * z - &prob.g_in).iter().all(|v| *v <= 1e-9)
    }

    #[test]
    fn warm_start_is_deterministic_and_consistent() {
        let prob = QpProblem::inequality(
            DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
            v(&[-3.0, -2.0]),
            DMatrix::from_row_slice(3, 2, &[1.0, 1.0, -1.0, 0.0, 0.0, -1.0]),
            v(&[1.0, 0.0, 0.0]),
        )
        .unwrap();
        let cold = solve_qp(&prob, None).unwrap();
        let again = solve_qp(&prob, None).unwrap();
        assert_eq!(cold, again);
        let warm = WarmStart {
            primal: Some(cold.z.clone()),
            active: cold.active_set.clone(),
        };
        let hot = solve_qp(&prob, Some(&warm)).unwrap();
        assert!((hot.z - &cold.z).amax() < 1e-12);
        assert!(hot.iterations <= cold.iterations);
    }

    #[test]
    fn text_round_trip() {
        let prob = QpProblem::new(
            DMatrix::from_row_slice(2, 2, &[2.0, 0.1, 0.1, 1.0]),
            v(&[1.0, -0.25]),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0 / 3.0]),
            v(&[0.5]),
            DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
            v(&[0.0]),
        )
        .unwrap();
        assert_eq!(QpProblem::from_text(&prob.to_text()).unwrap(), prob);
    }
}
