//! Discrete LTI models and the second-order sliding-surface design.
//!
//! For a square plant `x+ = A x + B u`, `y = C x` with per-output relative
//! degrees `d_i`, the first-order sliding variable is
//!
//! ```text
//! s_i(k) = sum_{j=0}^{l_i} alpha_{i,j} e_i(k + j),   l_i = d_i - 1
//! s(k)   = G x(k) - H(k),   G_i = c_i * sum_j alpha_{i,j} A^j
//! ```
//!
//! With a fixed virtual reference `yv`, `H(k)` collapses to `H~ yv` where
//! `H~ = diag(sum_j alpha_{i,j})`, and the equivalent control of the
//! second-order variable `xi(k) = s(k+1) + beta s(k)` becomes the terminal law
//! `u = K x + L yv` with
//!
//! ```text
//! K = -(GB)^-1 (GA + beta G),   L = (GB)^-1 (I + beta) H~
//! ```

use std::f64::consts::{E, FRAC_1_PI, SQRT_2};

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::polytope::Polyhedron;

/// Relative tolerance under which `c_i A^j B` counts as zero.
pub const RELATIVE_DEGREE_TOL: f64 = 1e-9;
/// `G B` is rejected above this condition number.
pub const GB_CONDITION_LIMIT: f64 = 1e12;

/// Square discrete-time LTI plant `x+ = A x + B u`, `y = C x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl LtiModel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "A columns",
                expected: n,
                found: a.ncols(),
            });
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch {
                context: "B rows",
                expected: n,
                found: b.nrows(),
            });
        }
        let m = b.ncols();
        if m == 0 {
            return Err(Error::InvalidModel("plant needs at least one input".into()));
        }
        if c.nrows() != m {
            return Err(Error::InvalidModel(format!(
                "plant must be square: {} inputs but {} outputs",
                m,
                c.nrows()
            )));
        }
        if c.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "C columns",
                expected: n,
                found: c.ncols(),
            });
        }
        if n < m {
            return Err(Error::InvalidModel(format!("n = {n} must be >= m = {m}")));
        }
        if a.iter()
            .chain(b.iter())
            .chain(c.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidModel("non-finite matrix entry".into()));
        }
        Ok(Self { a, b, c })
    }

    /// Builds a model from row-major slices.
    pub fn from_rows(n: usize, m: usize, a: &[f64], b: &[f64], c: &[f64]) -> Result<Self> {
        if a.len() != n * n || b.len() != n * m || c.len() != m * n {
            return Err(Error::InvalidModel(
                "slice lengths do not match n, m".into(),
            ));
        }
        Self::new(
            DMatrix::from_row_slice(n, n, a),
            DMatrix::from_row_slice(n, m, b),
            DMatrix::from_row_slice(m, n, c),
        )
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input (= output) dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b * u
    }

    pub fn output(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.c * x
    }

    fn scale(&self) -> (f64, f64, f64) {
        (
            self.a.norm().max(f64::MIN_POSITIVE),
            self.b.norm().max(f64::MIN_POSITIVE),
            self.c.norm().max(f64::MIN_POSITIVE),
        )
    }
}

/// Relative degree of output `i` (zero-based): the smallest `d >= 1` with
/// `c_i A^(d-1) B != 0`.
pub fn relative_degree(model: &LtiModel, i: usize) -> Result<usize> {
    if i >= model.m() {
        return Err(Error::DimensionMismatch {
            context: "output index",
            expected: model.m(),
            found: i,
        });
    }
    let (na, nb, _) = model.scale();
    let ci = model.c.row(i).into_owned();
    let ci_norm = ci.norm();
    if ci_norm == 0.0 {
        return Err(Error::NoRelativeDegree { output: i });
    }
    let mut row = ci;
    for j in 0..=model.n() {
        let markov = &row * &model.b;
        let scale = ci_norm * na.max(1.0).powi(j as i32) * nb;
        if markov.norm() > RELATIVE_DEGREE_TOL * scale {
            return Ok(j + 1);
        }
        row = &row * &model.a;
    }
    Err(Error::NoRelativeDegree { output: i })
}

/// Invariant zeros of the square system `(A, B, C, 0)`.
///
/// Solves the generalized eigenproblem of the Rosenbrock pencil
/// `[[A, B], [C, 0]] - z [[I, 0], [0, 0]]` by shift-and-invert: with a shift
/// `sigma` that is not a zero, the finite zeros are `sigma + 1/mu` for the
/// nonzero eigenvalues `mu` of `(M - sigma N)^-1 N`.
pub fn transmission_zeros(model: &LtiModel) -> Result<Vec<Complex<f64>>> {
    let n = model.n();
    let m = model.m();
    let dim = n + m;
    let mut pencil = DMatrix::zeros(dim, dim);
    pencil.view_mut((0, 0), (n, n)).copy_from(&model.a);
    pencil.view_mut((0, n), (n, m)).copy_from(&model.b);
    pencil.view_mut((n, 0), (m, n)).copy_from(&model.c);
    let mut lhs_n = DMatrix::zeros(dim, dim);
    lhs_n.view_mut((0, 0), (n, n)).fill_with_identity();

    // Irrational shifts so that an exact zero is never hit by accident.
    for sigma in [FRAC_1_PI, -SQRT_2, E] {
        let shifted = &pencil - &lhs_n * sigma;
        if linalg::condition_number(&shifted) > 1e13 {
            continue;
        }
        let inv = shifted
            .try_inverse()
            .ok_or_else(|| Error::IllConditioned("Rosenbrock pencil".into()))?;
        let mu = linalg::eigenvalues(&(inv * &lhs_n))?;
        let mu_max = mu.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        let zeros = mu
            .into_iter()
            .filter(|z| z.norm() > 1e-7 * mu_max.max(1.0))
            .map(|z| Complex::new(sigma, 0.0) + Complex::new(1.0, 0.0) / z)
            .collect();
        return Ok(zeros);
    }
    Err(Error::IllConditioned(
        "no regular shift found for the system pencil".into(),
    ))
}

/// State and input constraint polyhedra.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSets {
    pub states: Polyhedron,
    pub inputs: Polyhedron,
}

impl ConstraintSets {
    pub fn new(states: Polyhedron, inputs: Polyhedron) -> Self {
        Self { states, inputs }
    }

    /// Box constraints on state and input.
    pub fn from_boxes(
        x_lower: &[f64],
        x_upper: &[f64],
        u_lower: &[f64],
        u_upper: &[f64],
    ) -> Result<Self> {
        Ok(Self {
            states: Polyhedron::from_box(x_lower, x_upper)?,
            inputs: Polyhedron::from_box(u_lower, u_upper)?,
        })
    }

    /// Checks dimensions, boundedness and that the origin is interior.
    pub fn validate(&self, model: &LtiModel) -> Result<()> {
        if self.states.dim() != model.n() {
            return Err(Error::DimensionMismatch {
                context: "state constraint dimension",
                expected: model.n(),
                found: self.states.dim(),
            });
        }
        if self.inputs.dim() != model.m() {
            return Err(Error::DimensionMismatch {
                context: "input constraint dimension",
                expected: model.m(),
                found: self.inputs.dim(),
            });
        }
        for (name, set) in [("state", &self.states), ("input", &self.inputs)] {
            let origin = DVector::zeros(set.dim());
            if !set.contains_strictly(&origin, 1e-9) {
                return Err(Error::InvalidConfig(format!(
                    "{name} constraint set must contain the origin in its interior"
                )));
            }
            if set.bounding_box()?.is_none() {
                return Err(Error::InvalidConfig(format!(
                    "{name} constraint set must be bounded"
                )));
            }
        }
        Ok(())
    }
}

/// Sliding-surface design and the derived terminal gains.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingDesign {
    relative_degrees: Vec<usize>,
    alpha: Vec<Vec<f64>>,
    beta: DMatrix<f64>,
    g: DMatrix<f64>,
    h_tilde: DMatrix<f64>,
    k: DMatrix<f64>,
    l: DMatrix<f64>,
    gb_inv: DMatrix<f64>,
    gb_condition: f64,
}

impl SlidingDesign {
    pub fn relative_degrees(&self) -> &[usize] {
        &self.relative_degrees
    }

    /// `l_i = d_i - 1` per output.
    pub fn lookahead(&self) -> Vec<usize> {
        self.relative_degrees.iter().map(|d| d - 1).collect()
    }

    pub fn alpha(&self) -> &[Vec<f64>] {
        &self.alpha
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn h_tilde(&self) -> &DMatrix<f64> {
        &self.h_tilde
    }

    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// `(GB)^-1`, cached at construction.
    pub fn gb_inv(&self) -> &DMatrix<f64> {
        &self.gb_inv
    }

    pub fn gb_condition(&self) -> f64 {
        self.gb_condition
    }

    pub fn m(&self) -> usize {
        self.g.nrows()
    }

    pub fn n(&self) -> usize {
        self.g.ncols()
    }

    /// Terminal law `K x + L yv`.
    pub fn terminal_law(&self, x: &DVector<f64>, y_virtual: &DVector<f64>) -> DVector<f64> {
        &self.k * x + &self.l * y_virtual
    }

    /// Longest reference lookahead needed by `H(k+1)`: `max_i l_i + 1`.
    pub fn preview(&self) -> usize {
        self.lookahead().into_iter().max().unwrap_or(0) + 1
    }
}

/// Default convergence-rate matrix, `-0.2 I`.
///
/// With `xi = 0` the sliding variable obeys `s(k+1) = -beta s(k)`, so a
/// negative diagonal gives monotone (non-alternating) convergence.
pub fn default_beta(m: usize) -> DMatrix<f64> {
    DMatrix::identity(m, m) * -0.2
}

/// Builds `G`, `H~`, `K`, `L` from per-output `alpha` lists and `beta`.
///
/// `alpha[i]` holds `alpha_{i,0} .. alpha_{i,l_i}` and must have exactly
/// `d_i` entries with a nonzero last entry.
pub fn build_sliding_design(
    model: &LtiModel,
    alpha: &[Vec<f64>],
    beta: &DMatrix<f64>,
) -> Result<SlidingDesign> {
    let n = model.n();
    let m = model.m();
    if alpha.len() != m {
        return Err(Error::DimensionMismatch {
            context: "alpha lists (one per output)",
            expected: m,
            found: alpha.len(),
        });
    }
    if beta.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            context: "beta (m x m)",
            expected: m,
            found: beta.nrows(),
        });
    }
    let rho = linalg::spectral_radius(beta)?;
    if rho >= 1.0 {
        return Err(Error::UnstableBeta {
            spectral_radius: rho,
        });
    }

    let mut relative_degrees = Vec::with_capacity(m);
    let mut g = DMatrix::zeros(m, n);
    let mut h_tilde = DMatrix::zeros(m, m);
    for (i, coeffs) in alpha.iter().enumerate() {
        let d = relative_degree(model, i)?;
        if coeffs.len() != d {
            return Err(Error::AlphaMismatch {
                output: i,
                expected: d,
                found: coeffs.len(),
            });
        }
        if coeffs[d - 1] == 0.0 {
            return Err(Error::AlphaLeadingZero { output: i });
        }
        let mut poly = DMatrix::zeros(n, n);
        let mut power = DMatrix::identity(n, n);
        for &a in coeffs {
            poly += &power * a;
            power = &power * model.a();
        }
        let row = model.c().row(i) * poly;
        g.row_mut(i).copy_from(&row);
        h_tilde[(i, i)] = coeffs.iter().sum();
        relative_degrees.push(d);
    }

    let gb = &g * model.b();
    let gb_condition = linalg::condition_number(&gb);
    if gb_condition > GB_CONDITION_LIMIT {
        return Err(Error::SingularGB {
            condition: gb_condition,
        });
    }
    let gb_inv = gb.try_inverse().ok_or(Error::SingularGB {
        condition: f64::INFINITY,
    })?;
    let k = -(&gb_inv * (&g * model.a() + beta * &g));
    let l = &gb_inv * (DMatrix::identity(m, m) + beta) * &h_tilde;

    let closed = model.a() + model.b() * &k;
    let rho_cl = linalg::spectral_radius(&closed)?;
    if rho_cl >= 1.0 {
        return Err(Error::UnstableTerminalLaw {
            spectral_radius: rho_cl,
        });
    }

    if let Ok(zeros) = transmission_zeros(model) {
        if let Some(z) = zeros.iter().find(|z| z.norm() >= 1.0 - 1e-9) {
            log::warn!("plant is not minimum-phase: invariant zero {z} on/outside the unit circle");
        }
    }

    Ok(SlidingDesign {
        relative_degrees,
        alpha: alpha.to_vec(),
        beta: beta.clone(),
        g,
        h_tilde,
        k,
        l,
        gb_inv,
        gb_condition,
    })
}

/// `H(k)`: component `i` is `sum_j alpha_{i,j} y_d,i(k + j)`.
///
/// The trajectory is not extrapolated; callers hold the last sample if
/// they need a longer window.
pub fn reference_window(
    design: &SlidingDesign,
    trajectory: &[DVector<f64>],
    k: usize,
) -> Result<DVector<f64>> {
    let m = design.m();
    let mut h = DVector::zeros(m);
    for (i, coeffs) in design.alpha.iter().enumerate() {
        let last = k + coeffs.len() - 1;
        if last >= trajectory.len() {
            return Err(Error::TrajectoryTooShort {
                needed: last,
                available: trajectory.len(),
            });
        }
        for (j, a) in coeffs.iter().enumerate() {
            let y = &trajectory[k + j];
            if y.len() != m {
                return Err(Error::DimensionMismatch {
                    context: "reference sample",
                    expected: m,
                    found: y.len(),
                });
            }
            h[i] += a * y[i];
        }
    }
    Ok(h)
}

/// Steady-state maps of the terminal law: `x_s = Mx yv`, `u_s = Mu yv`.
pub fn steady_state_maps(
    model: &LtiModel,
    design: &SlidingDesign,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = model.n();
    let closed = model.a() + model.b() * design.k();
    let lhs = DMatrix::identity(n, n) - closed;
    let mx = lhs
        .lu()
        .solve(&(model.b() * design.l()))
        .ok_or_else(|| Error::IllConditioned("I - (A + BK) is singular".into()))?;
    let mu = design.k() * &mx + design.l();
    Ok((mx, mu))
}
