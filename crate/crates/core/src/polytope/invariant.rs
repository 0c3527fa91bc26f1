//! Invariant sets for tracking.
//!
//! The terminal law `u = K x + L yv` with a constant virtual reference gives
//! the augmented dynamics on `w = (x, yv)`:
//!
//! ```text
//! w+ = A_eq w,   A_eq = [[A + BK, BL], [0, I]]
//! W_eq = { w : [I 0] w ∈ X,  [K L] w ∈ U }
//! T    = { w : A_eq^k w ∈ W_eq for all k >= 0 }
//! ```
//!
//! `T` is computed by the fixed-point iteration `Ω_{k+1} = Ω_k ∩ Pre(Ω_k)`.
//! Because the `yv` block has eigenvalue one the iteration need not
//! terminate. The optional tightening `lambda < 1` additionally requires the
//! steady state reached from `yv` to lie in `lambda X` and `lambda U`, which
//! restores finite determination and yields a subset of the `lambda = 1` set.

use nalgebra::{DMatrix, DVector};

use super::Polyhedron;
use crate::error::{Error, Result};
use crate::lp;
use crate::model::{steady_state_maps, ConstraintSets, LtiModel, SlidingDesign};

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSetConfig {
    /// Steady-state tightening factor in `(0, 1]`; `1` disables it.
    pub lambda: f64,
    pub max_iterations: usize,
    pub projection_row_cap: usize,
    /// Skip the projection onto the state space when false.
    pub compute_projection: bool,
}

impl Default for InvariantSetConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            max_iterations: 500,
            projection_row_cap: super::DEFAULT_PROJECTION_CAP,
            compute_projection: true,
        }
    }
}

/// Outcome of the Ω-iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaIteration {
    pub set: Polyhedron,
    /// Number of Ω-steps taken (the last one added no constraint when
    /// `determined` is true).
    pub iterations: usize,
    pub determined: bool,
    /// Row count of each iterate, starting with `Ω_0`.
    pub row_history: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingInvariantSet {
    pub a_eq: DMatrix<f64>,
    pub w_eq: Polyhedron,
    pub t: Polyhedron,
    pub z: Option<Polyhedron>,
    pub iterations: usize,
    /// False when the iteration cap was hit; `t` is then the last iterate,
    /// which contains the true maximal set but may not be invariant.
    pub determined: bool,
    pub lambda: f64,
    pub row_history: Vec<usize>,
    n: usize,
}

impl TrackingInvariantSet {
    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn reference_dim(&self) -> usize {
        self.a_eq.nrows() - self.n
    }

    pub fn require_determined(&self) -> Result<&Self> {
        if self.determined {
            Ok(self)
        } else {
            Err(Error::NotFinitelyDetermined {
                iterations: self.iterations,
            })
        }
    }

    /// Whether `(x, yv)` belongs to `T`.
    pub fn contains(&self, x: &DVector<f64>, y_virtual: &DVector<f64>) -> bool {
        let mut w = DVector::zeros(x.len() + y_virtual.len());
        w.rows_mut(0, x.len()).copy_from(x);
        w.rows_mut(x.len(), y_virtual.len()).copy_from(y_virtual);
        self.t.contains(&w)
    }
}

/// Builds `A_eq` and the minimized `W_eq`.
pub fn augment(
    model: &LtiModel,
    design: &SlidingDesign,
    sets: &ConstraintSets,
) -> Result<(DMatrix<f64>, Polyhedron)> {
    sets.validate(model)?;
    let n = model.n();
    let m = model.m();
    let mut a_eq = DMatrix::zeros(n + m, n + m);
    a_eq.view_mut((0, 0), (n, n))
        .copy_from(&(model.a() + model.b() * design.k()));
    a_eq.view_mut((0, n), (n, m))
        .copy_from(&(model.b() * design.l()));
    a_eq.view_mut((n, n), (m, m)).fill_with_identity();

    let mut select_x = DMatrix::zeros(n, n + m);
    select_x.view_mut((0, 0), (n, n)).fill_with_identity();
    let mut kl = DMatrix::zeros(m, n + m);
    kl.view_mut((0, 0), (m, n)).copy_from(design.k());
    kl.view_mut((0, n), (m, m)).copy_from(design.l());

    let w_eq = sets
        .states
        .preimage(&select_x)?
        .intersect(&sets.inputs.preimage(&kl)?)?;
    Ok((a_eq, w_eq))
}

/// Rows `{ (x, yv) : Mx yv ∈ lambda X, Mu yv ∈ lambda U }`.
fn steady_state_tightening(
    model: &LtiModel,
    design: &SlidingDesign,
    sets: &ConstraintSets,
    lambda: f64,
) -> Result<Polyhedron> {
    let n = model.n();
    let m = model.m();
    let (mx, mu) = steady_state_maps(model, design)?;
    let mut lift_x = DMatrix::zeros(n, n + m);
    lift_x.view_mut((0, n), (n, m)).copy_from(&mx);
    let mut lift_u = DMatrix::zeros(m, n + m);
    lift_u.view_mut((0, n), (m, m)).copy_from(&mu);
    sets.states
        .scale(lambda)
        .preimage(&lift_x)?
        .stack(&sets.inputs.scale(lambda).preimage(&lift_u)?)
}

/// Maximal `A`-invariant subset of `omega0` by the Ω-iteration.
///
/// Only the preimages of rows added in the previous step are new, so each
/// step maps those rows and keeps the ones not already implied.
pub fn max_invariant_set(
    a: &DMatrix<f64>,
    omega0: &Polyhedron,
    max_iterations: usize,
) -> Result<OmegaIteration> {
    if a.nrows() != omega0.dim() || a.ncols() != omega0.dim() {
        return Err(Error::DimensionMismatch {
            context: "invariant-set dynamics",
            expected: omega0.dim(),
            found: a.nrows(),
        });
    }
    let mut omega = omega0.minimize()?;
    let mut history = vec![omega.num_rows()];
    let mut fresh = omega.clone();
    for it in 1..=max_iterations {
        if omega.is_certified_empty() {
            return Ok(OmegaIteration {
                set: omega,
                iterations: it - 1,
                determined: true,
                row_history: history,
            });
        }
        let candidates = fresh.preimage(a)?;
        let mut added_f = Vec::new();
        let mut added_g = Vec::new();
        for i in 0..candidates.num_rows() {
            let row = candidates.f().row(i).transpose();
            let bound = candidates.g()[i];
            let implied = match lp::support(omega.f(), omega.g(), &row)? {
                Some(s) => s <= bound + 1e-9 * bound.abs().max(1.0),
                None => true,
            };
            if !implied {
                added_f.extend(row.iter().copied());
                added_g.push(bound);
            }
        }
        if added_g.is_empty() {
            return Ok(OmegaIteration {
                set: omega,
                iterations: it,
                determined: true,
                row_history: history,
            });
        }
        let new_rows = Polyhedron::new(
            DMatrix::from_row_slice(added_g.len(), a.ncols(), &added_f),
            DVector::from_vec(added_g),
        )?;
        omega = omega.intersect(&new_rows)?;
        history.push(omega.num_rows());
        // Rows that survived minimization are the ones whose preimages matter.
        fresh = surviving_rows(&omega, &new_rows)?;
        log::debug!("omega iteration {it}: {} rows", omega.num_rows());
    }
    Ok(OmegaIteration {
        set: omega,
        iterations: max_iterations,
        determined: false,
        row_history: history,
    })
}

fn surviving_rows(omega: &Polyhedron, added: &Polyhedron) -> Result<Polyhedron> {
    let mut f = Vec::new();
    let mut g = Vec::new();
    for i in 0..added.num_rows() {
        let row = added.f().row(i);
        let present = (0..omega.num_rows()).any(|j| {
            (omega.f().row(j) - row).amax() < 1e-12 && (omega.g()[j] - added.g()[i]).abs() < 1e-12
        });
        if present {
            f.extend(row.iter().copied());
            g.push(added.g()[i]);
        }
    }
    Polyhedron::new(
        DMatrix::from_row_slice(g.len(), added.dim(), &f),
        DVector::from_vec(g),
    )
}

/// Full tracking construction: augmentation, optional tightening, Ω-iteration
/// and projection onto the state space.
pub fn tracking_invariant_set(
    model: &LtiModel,
    design: &SlidingDesign,
    sets: &ConstraintSets,
    config: &InvariantSetConfig,
) -> Result<TrackingInvariantSet> {
    if !(config.lambda > 0.0 && config.lambda <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "invariant-set lambda must lie in (0, 1], got {}",
            config.lambda
        )));
    }
    let (a_eq, w_eq) = augment(model, design, sets)?;
    let omega0 = if config.lambda < 1.0 {
        w_eq.intersect(&steady_state_tightening(
            model,
            design,
            sets,
            config.lambda,
        )?)?
    } else {
        w_eq.clone()
    };
    let result = max_invariant_set(&a_eq, &omega0, config.max_iterations)?;
    if !result.determined {
        log::warn!(
            "invariant set not finitely determined after {} iterations; consider lambda < 1",
            result.iterations
        );
    }
    let n = model.n();
    let z = if config.compute_projection && !result.set.is_certified_empty() {
        let keep: Vec<usize> = (0..n).collect();
        Some(
            result
                .set
                .project_with_cap(&keep, config.projection_row_cap)?,
        )
    } else if result.set.is_certified_empty() {
        Some(Polyhedron::empty(n))
    } else {
        None
    };
    Ok(TrackingInvariantSet {
        a_eq,
        w_eq,
        t: result.set,
        z,
        iterations: result.iterations,
        determined: result.determined,
        lambda: config.lambda,
        row_history: result.row_history,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_sliding_design;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_setup() -> (LtiModel, SlidingDesign, ConstraintSets) {
        let model = LtiModel::from_rows(1, 1, &[0.5], &[1.0], &[1.0]).unwrap();
        let design =
            build_sliding_design(&model, &[vec![1.0]], &DMatrix::from_element(1, 1, 0.2)).unwrap();
        let sets = ConstraintSets::from_boxes(&[-1.0], &[1.0], &[-1.0], &[1.0]).unwrap();
        (model, design, sets)
    }

    #[test]
    fn scalar_augmentation() {
        let (model, design, sets) = scalar_setup();
        let (a_eq, w_eq) = augment(&model, &design, &sets).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[-0.2, 1.2, 0.0, 1.0]);
        assert!((a_eq - expected).amax() < 1e-15);
        assert!(w_eq.contains(&DVector::zeros(2)));
    }

    #[test]
    fn nilpotent_map_keeps_box() {
        let b = Polyhedron::from_box(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let r = max_invariant_set(&DMatrix::zeros(2, 2), &b, 10).unwrap();
        assert!(r.determined);
        assert_eq!(r.iterations, 1);
        assert!(r.set.set_equals(&b).unwrap());
    }

    #[test]
    fn scalar_tracking_set_is_invariant() {
        let (model, design, sets) = scalar_setup();
        let t =
            tracking_invariant_set(&model, &design, &sets, &InvariantSetConfig::default()).unwrap();
        assert!(t.determined);
        assert!(t.iterations >= 1);
        assert!(t.w_eq.contains_set(&t.t).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts = crate::polytope::sample::rejection(&t.t, &mut rng, 10_000, 200_000).unwrap();
        assert_eq!(pts.len(), 10_000);
        for w0 in pts {
            let mut w = w0;
            for _ in 0..100 {
                w = &t.a_eq * w;
                assert!(t.w_eq.contains_with_tol(&w, 1e-8));
            }
        }
    }

    #[test]
    fn scalar_projection_matches_grid_oracle() {
        let (model, design, sets) = scalar_setup();
        let t =
            tracking_invariant_set(&model, &design, &sets, &InvariantSetConfig::default()).unwrap();
        let z = t.z.clone().unwrap();
        for i in 0..=80 {
            let x = -2.0 + 4.0 * i as f64 / 80.0;
            let lifted = (0..=4000).any(|j| {
                let y = -2.0 + 4.0 * j as f64 / 4000.0;
                t.t.contains_with_tol(&DVector::from_vec(vec![x, y]), 1e-6)
            });
            let margin = z.max_violation(&DVector::from_vec(vec![x])).abs();
            if margin > 1e-3 {
                assert_eq!(z.contains(&DVector::from_vec(vec![x])), lifted, "x = {x}");
            }
        }
    }

    #[test]
    fn tightened_set_is_inside_untightened() {
        let (model, design, sets) = scalar_setup();
        let full =
            tracking_invariant_set(&model, &design, &sets, &InvariantSetConfig::default()).unwrap();
        let tight = tracking_invariant_set(
            &model,
            &design,
            &sets,
            &InvariantSetConfig {
                lambda: 0.99,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(tight.determined);
        assert!(full.t.contains_set(&tight.t).unwrap());
        assert!(!tight.t.contains_set(&full.t).unwrap());
    }

    #[test]
    fn iteration_is_monotone() {
        let (model, design, sets) = scalar_setup();
        let (a_eq, w_eq) = augment(&model, &design, &sets).unwrap();
        let mut prev = w_eq.clone();
        for cap in 1..6 {
            let r = max_invariant_set(&a_eq, &w_eq, cap).unwrap();
            assert!(prev.contains_set(&r.set).unwrap());
            prev = r.set;
        }
    }
}
