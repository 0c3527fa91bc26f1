//! Sliding variables and the unconstrained second-order DSMC law.

use nalgebra::DVector;

use crate::error::Result;
use crate::model::{LtiModel, SlidingDesign};
use crate::polytope::Polyhedron;

/// First- and second-order sliding values at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingState {
    pub s: DVector<f64>,
    pub xi: DVector<f64>,
}

/// `s = G x - H(k)`.
pub fn sliding_value(
    design: &SlidingDesign,
    x: &DVector<f64>,
    href: &DVector<f64>,
) -> DVector<f64> {
    design.g() * x - href
}

/// `xi = s(k+1) + beta s(k)`.
pub fn second_order_value(
    design: &SlidingDesign,
    s_next: &DVector<f64>,
    s_now: &DVector<f64>,
) -> DVector<f64> {
    s_next + design.beta() * s_now
}

/// Equivalent control of `xi(k) = 0`:
/// `u = -(GB)^-1 ((GA + beta G) x - (H(k+1) + beta H(k)))`.
pub fn dsmc_control(
    design: &SlidingDesign,
    model: &LtiModel,
    x: &DVector<f64>,
    href_now: &DVector<f64>,
    href_next: &DVector<f64>,
) -> DVector<f64> {
    let g = design.g();
    let drift = (g * model.a() + design.beta() * g) * x;
    let target = href_next + design.beta() * href_now;
    -(design.gb_inv() * (drift - target))
}

/// Componentwise clipping to an axis-aligned input box.
pub fn saturate(u: &DVector<f64>, inputs: &Polyhedron) -> Result<DVector<f64>> {
    let (lower, upper) = inputs.box_bounds()?;
    Ok(DVector::from_iterator(
        u.len(),
        u.iter()
            .zip(lower.iter().zip(upper.iter()))
            .map(|(v, (lo, hi))| v.clamp(*lo, *hi)),
    ))
}
