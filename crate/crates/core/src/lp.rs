//! Dense revised simplex for small linear programs.
//!
//! Problems are posed in inequality form over free variables,
//!
//! ```text
//! minimize c'z   subject to   A_in z <= b_in,   A_eq z = b_eq,
//! ```
//!
//! and solved through their dual, which is in standard form
//! (`min b'y, A'y = -c, y >= 0`) with only `dim(z)` rows. The polytope code
//! works in dimension 1..6 with hundreds of rows, so the dual basis stays tiny.
//! The primal optimum is read back from the simplex multipliers of the dual.
//!
//! Pricing is Dantzig's rule; after a run of degenerate pivots the method
//! switches to Bland's rule until progress resumes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPTIMALITY_TOL: f64 = 1e-10;
const FEASIBILITY_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_RUN_FOR_BLAND: usize = 30;

/// `minimize c'z` over free `z` subject to inequality and equality rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub c: DVector<f64>,
    pub a_in: DMatrix<f64>,
    pub b_in: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
}

impl LinearProgram {
    pub fn new(c: DVector<f64>, a_in: DMatrix<f64>, b_in: DVector<f64>) -> Self {
        let nu = c.len();
        Self {
            c,
            a_in,
            b_in,
            a_eq: DMatrix::zeros(0, nu),
            b_eq: DVector::zeros(0),
        }
    }

    pub fn with_equalities(mut self, a_eq: DMatrix<f64>, b_eq: DVector<f64>) -> Self {
        self.a_eq = a_eq;
        self.b_eq = b_eq;
        self
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    fn check(&self) -> Result<()> {
        let nu = self.dim();
        let shapes = [
            ("A_in columns", self.a_in.ncols(), nu),
            ("b_in length", self.b_in.len(), self.a_in.nrows()),
            ("A_eq columns", self.a_eq.ncols(), nu),
            ("b_eq length", self.b_eq.len(), self.a_eq.nrows()),
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
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        z: DVector<f64>,
        objective: f64,
        /// Nonnegative multipliers of the inequality rows.
        ineq_duals: DVector<f64>,
        eq_duals: DVector<f64>,
    },
    /// Farkas certificate: `A_in'y + A_eq'w = 0`, `y >= 0`, `b_in'y + b_eq'w < 0`.
    Infeasible {
        ineq_certificate: DVector<f64>,
        eq_certificate: DVector<f64>,
    },
    Unbounded,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

/// Solves an inequality-form LP.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.check()?;
    let nu = lp.dim();
    let mi = lp.a_in.nrows();
    let me = lp.a_eq.nrows();
    let cols = mi + 2 * me;

    let mut a_std = DMatrix::zeros(nu, cols);
    a_std
        .view_mut((0, 0), (nu, mi))
        .copy_from(&lp.a_in.transpose());
    let eq_t = lp.a_eq.transpose();
    a_std.view_mut((0, mi), (nu, me)).copy_from(&eq_t);
    a_std.view_mut((0, mi + me), (nu, me)).copy_from(&(-&eq_t));
    let mut c_std = DVector::zeros(cols);
    c_std.rows_mut(0, mi).copy_from(&lp.b_in);
    c_std.rows_mut(mi, me).copy_from(&lp.b_eq);
    c_std.rows_mut(mi + me, me).copy_from(&(-&lp.b_eq));

    let split = |y: &DVector<f64>| {
        let ineq = y.rows(0, mi).into_owned();
        let eq = y.rows(mi, me) - y.rows(mi + me, me);
        (ineq, eq)
    };

    match solve_standard(&a_std, &(-&lp.c), &c_std)? {
        StandardOutcome::Optimal { y, pi } => {
            let (ineq_duals, eq_duals) = split(&y);
            let objective = lp.c.dot(&pi);
            Ok(LpOutcome::Optimal {
                z: pi,
                objective,
                ineq_duals,
                eq_duals,
            })
        }
        StandardOutcome::Unbounded { ray } => {
            let (ineq_certificate, eq_certificate) = split(&ray);
            Ok(LpOutcome::Infeasible {
                ineq_certificate,
                eq_certificate,
            })
        }
        StandardOutcome::Infeasible => {
            // Dual infeasible: the primal is unbounded or infeasible. With a
            // zero objective the dual is trivially feasible, which separates the two.
            match solve_standard(&a_std, &DVector::zeros(nu), &c_std)? {
                StandardOutcome::Optimal { .. } => Ok(LpOutcome::Unbounded),
                StandardOutcome::Unbounded { ray } => {
                    let (ineq_certificate, eq_certificate) = split(&ray);
                    Ok(LpOutcome::Infeasible {
                        ineq_certificate,
                        eq_certificate,
                    })
                }
                StandardOutcome::Infeasible => Err(Error::IllConditioned(
                    "zero-objective dual reported infeasible".into(),
                )),
            }
        }
    }
}

/// Convenience: a feasible point of `{z : A z <= b}`, or `None` if empty.
pub fn feasible_point(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Option<DVector<f64>>> {
    let lp = LinearProgram::new(DVector::zeros(a.ncols()), a.clone(), b.clone());
    Ok(match solve(&lp)? {
        LpOutcome::Optimal { z, .. } => Some(z),
        _ => None,
    })
}

/// Supremum of `f'z` over `{z : A z <= b}`: `Some(value)`, `None` when the
/// set is empty, `Some(inf)` when unbounded.
pub fn support(a: &DMatrix<f64>, b: &DVector<f64>, f: &DVector<f64>) -> Result<Option<f64>> {
    let lp = LinearProgram::new(-f, a.clone(), b.clone());
    Ok(match solve(&lp)? {
        LpOutcome::Optimal { objective, .. } => Some(-objective),
        LpOutcome::Unbounded => Some(f64::INFINITY),
        LpOutcome::Infeasible { .. } => None,
    })
}

enum StandardOutcome {
    Optimal { y: DVector<f64>, pi: DVector<f64> },
    Infeasible,
    Unbounded { ray: DVector<f64> },
}

/// Revised simplex state for `min c'y, A y = b, y >= 0` with `p` artificial
/// columns appended (indices `r..r+p`).
struct Simplex<'a> {
    a: &'a DMatrix<f64>,
    sign: Vec<f64>,
    b: DVector<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: DMatrix<f64>,
    xb: DVector<f64>,
    pivots_since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded(DVector<f64>),
}

impl<'a> Simplex<'a> {
    fn new(a: &'a DMatrix<f64>, b: &DVector<f64>) -> Self {
        let p = a.nrows();
        let r = a.ncols();
        let sign: Vec<f64> = b
            .iter()
            .map(|v| if *v < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let b_signed = DVector::from_iterator(p, b.iter().zip(&sign).map(|(v, s)| v * s));
        let mut is_basic = vec![false; r + p];
        for flag in is_basic.iter_mut().skip(r) {
            *flag = true;
        }
        Self {
            a,
            sign,
            xb: b_signed.clone(),
            b: b_signed,
            basis: (r..r + p).collect(),
            is_basic,
            binv: DMatrix::identity(p, p),
            pivots_since_refactor: 0,
            iterations: 0,
            max_iterations: 20_000 + 50 * (p + r),
        }
    }

    fn p(&self) -> usize {
        self.a.nrows()
    }

    fn r(&self) -> usize {
        self.a.ncols()
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.r()
    }

    fn column(&self, j: usize) -> DVector<f64> {
        let p = self.p();
        if j < self.r() {
            DVector::from_iterator(
                p,
                self.a.column(j).iter().zip(&self.sign).map(|(v, s)| v * s),
            )
        } else {
            let mut e = DVector::zeros(p);
            e[j - self.r()] = 1.0;
            e
        }
    }

    /// `(binv row i) . column j` without materialising the column.
    fn row_dot_column(&self, i: usize, j: usize) -> f64 {
        if j < self.r() {
            let mut acc = 0.0;
            for k in 0..self.p() {
                acc += self.binv[(i, k)] * self.a[(k, j)] * self.sign[k];
            }
            acc
        } else {
            self.binv[(i, j - self.r())]
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let p = self.p();
        let mut bmat = DMatrix::zeros(p, p);
        for (i, &j) in self.basis.iter().enumerate() {
            bmat.set_column(i, &self.column(j));
        }
        self.binv = bmat
            .try_inverse()
            .ok_or_else(|| Error::IllConditioned("simplex basis became singular".into()))?;
        self.xb = &self.binv * &self.b;
        for v in self.xb.iter_mut() {
            if *v < 0.0 && *v > -FEASIBILITY_TOL {
                *v = 0.0;
            }
        }
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn multipliers(&self, cost: &dyn Fn(usize) -> f64) -> DVector<f64> {
        let cb = DVector::from_iterator(self.p(), self.basis.iter().map(|&j| cost(j)));
        self.binv.tr_mul(&cb)
    }

    fn pivot(&mut self, leave: usize, enter: usize, u: &DVector<f64>, theta: f64) {
        let p = self.p();
        for i in 0..p {
            self.xb[i] -= theta * u[i];
        }
        self.xb[leave] = theta;
        let piv = u[leave];
        for k in 0..p {
            self.binv[(leave, k)] /= piv;
        }
        for i in 0..p {
            if i != leave && u[i] != 0.0 {
                let f = u[i];
                for k in 0..p {
                    let delta = f * self.binv[(leave, k)];
                    self.binv[(i, k)] -= delta;
                }
            }
        }
        for v in self.xb.iter_mut() {
            if *v < 0.0 && *v > -FEASIBILITY_TOL {
                *v = 0.0;
            }
        }
        self.is_basic[self.basis[leave]] = false;
        self.is_basic[enter] = true;
        self.basis[leave] = enter;
        self.pivots_since_refactor += 1;
    }

    fn run_phase(&mut self, cost: &dyn Fn(usize) -> f64, phase_two: bool) -> Result<PhaseEnd> {
        let r = self.r();
        let p = self.p();
        let cost_scale = (0..r).map(|j| cost(j).abs()).fold(1.0, f64::max);
        let opt_tol = OPTIMALITY_TOL * cost_scale;
        let mut degenerate_run = 0usize;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::IllConditioned(format!(
                    "simplex exceeded {} iterations",
                    self.max_iterations
                )));
            }
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let bland = degenerate_run >= DEGENERATE_RUN_FOR_BLAND;
            let pi = self.multipliers(cost);

            let mut entering = None;
            let mut best = -opt_tol;
            for j in 0..r {
                if self.is_basic[j] {
                    continue;
                }
                let mut d = cost(j);
                for k in 0..p {
                    d -= pi[k] * self.a[(k, j)] * self.sign[k];
                }
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(enter) = entering else {
                return Ok(PhaseEnd::Optimal);
            };

            let u = &self.binv * self.column(enter);
            let u_scale = u.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
            let piv_tol = PIVOT_TOL * u_scale;
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..p {
                let ratio = if phase_two && self.is_artificial(self.basis[i]) {
                    if u[i].abs() > piv_tol {
                        0.0
                    } else {
                        continue;
                    }
                } else if u[i] > piv_tol {
                    self.xb[i].max(0.0) / u[i]
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio);
                        if ratio < best_ratio && !tie {
                            true
                        } else if tie {
                            if bland {
                                self.basis[i] < self.basis[l]
                            } else {
                                u[i].abs() > u[l].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some(i);
                    best_ratio = ratio;
                }
            }
            let Some(leave) = leave else {
                let mut ray = DVector::zeros(r);
                ray[enter] = 1.0;
                for i in 0..p {
                    if self.basis[i] < r {
                        ray[self.basis[i]] = -u[i];
                    }
                }
                return Ok(PhaseEnd::Unbounded(ray));
            };
            if best_ratio <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(leave, enter, &u, best_ratio);
        }
    }

    /// Pivots basic artificials out wherever a non-artificial column allows it.
    fn expel_artificials(&mut self) {
        let r = self.r();
        for i in 0..self.p() {
            if !self.is_artificial(self.basis[i]) {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..r {
                if self.is_basic[j] {
                    continue;
                }
                let v = self.row_dot_column(i, j);
                if v.abs() > 1e-9 && best.is_none_or(|(_, bv)| v.abs() > bv.abs()) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                let u = &self.binv * self.column(j);
                self.xb[i] = 0.0;
                self.pivot(i, j, &u, 0.0);
            }
        }
    }
}

fn solve_standard(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<StandardOutcome> {
    let r = a.ncols();
    let mut sx = Simplex::new(a, b);
    let b_scale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));

    let phase_one_cost = |j: usize| if j >= r { 1.0 } else { 0.0 };
    sx.run_phase(&phase_one_cost, false)?;
    let infeasibility: f64 = sx
        .basis
        .iter()
        .zip(sx.xb.iter())
        .filter(|(j, _)| **j >= r)
        .map(|(_, v)| v.abs())
        .sum();
    if infeasibility > 1e-8 * b_scale {
        return Ok(StandardOutcome::Infeasible);
    }
    sx.expel_artificials();

    let phase_two_cost = |j: usize| if j >= r { 0.0 } else { c[j] };
    match sx.run_phase(&phase_two_cost, true)? {
        PhaseEnd::Unbounded(ray) => Ok(StandardOutcome::Unbounded { ray }),
        PhaseEnd::Optimal => {
            sx.refactor()?;
            let pi_signed = sx.multipliers(&phase_two_cost);
            let pi = DVector::from_iterator(
                pi_signed.len(),
                pi_signed.iter().zip(&sx.sign).map(|(v, s)| v * s),
            );
            let mut y = DVector::zeros(r);
            for (i, &j) in sx.basis.iter().enumerate() {
                if j < r {
                    y[j] = sx.xb[i].max(0.0);
                }
            }
            Ok(StandardOutcome::Optimal { y, pi })
        }
    }
}
