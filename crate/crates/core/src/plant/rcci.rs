//! Synthetic RCCI engine surrogate.
//!
//! The numbers here are not identified from an engine. They are a stable,
//! minimum-phase, relative-degree-one model with engine-like signs: an
//! earlier (more negative) start of injection advances CA50, more fuel
//! raises IMEP and retards CA50. The nonlinear surrogate adds saturating and
//! quadratic terms that vanish to first order at the linearization point, so
//! its Jacobian there equals [`linear_model`] exactly.
//!
//! Units: CA50 and SOI in crank-angle degrees after top dead center (SOI is
//! negative, i.e. before TDC), temperatures in K, pressures in kPa, fuel in
//! mg/cycle.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::LtiModel;

/// Cycle-to-cycle output variability (standard deviation): CA50, IMEP.
pub const OUTPUT_NOISE_STD: [f64; 2] = [2.0, 25.0];

pub const STATE_NAMES: [&str; 4] = ["CA50", "Tsoc", "Psoc", "IMEP"];
pub const INPUT_NAMES: [&str; 2] = ["SOI", "FQ"];
pub const OUTPUT_NAMES: [&str; 2] = ["CA50", "IMEP"];

const A: [f64; 16] = [
    0.35, -0.02, -0.004, 0.0, //
    1.5, 0.45, 0.0, 0.0, //
    0.0, 1.2, 0.30, 0.0, //
    -0.1, 0.0, 0.0, 0.55,
];
const B: [f64; 8] = [
    0.30, 0.25, //
    0.0, 1.5, //
    0.0, 4.0, //
    0.0, 9.0,
];
const C: [f64; 8] = [
    1.0, 0.0, 0.0, 0.0, //
    0.0, 0.0, 0.0, 1.0,
];

/// Scale of the SOI saturation, CAD.
const SOI_SATURATION: f64 = 30.0;
/// CA50 response to simultaneous fuel and timing changes, CAD/(mg CAD).
const FQ_SOI_COUPLING: f64 = 0.004;
/// IMEP loss from fuel excursions, kPa/mg^2.
const FQ_IMEP_CURVATURE: f64 = 0.01;
/// IMEP loss from off-optimal phasing, kPa/CAD^2.
const CA50_IMEP_CURVATURE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcciOperatingPoint {
    /// Premixed ratio, %.
    pub premixed_ratio: f64,
    /// Intake temperature, K.
    pub intake_temperature: f64,
    /// Intake pressure, kPa.
    pub intake_pressure: f64,
    /// Engine speed, RPM.
    pub engine_speed: f64,
}

impl Default for RcciOperatingPoint {
    fn default() -> Self {
        Self {
            premixed_ratio: 20.0,
            intake_temperature: 333.1,
            intake_pressure: 95.0,
            engine_speed: 1000.0,
        }
    }
}

impl RcciOperatingPoint {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("premixed_ratio", self.premixed_ratio),
            ("intake_temperature", self.intake_temperature),
            ("intake_pressure", self.intake_pressure),
            ("engine_speed", self.engine_speed),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "operating point {name} must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Linearization state. SOC temperature follows the intake temperature
    /// and SOC pressure scales with the intake pressure.
    pub fn nominal_state(&self) -> RcciState {
        RcciState {
            ca50: 8.0,
            t_soc: 870.0 + 1.1 * (self.intake_temperature - 333.1),
            p_soc: 3100.0 * self.intake_pressure / 95.0,
            imep: 500.0,
        }
    }

    pub fn nominal_input(&self) -> RcciInput {
        RcciInput {
            soi: -55.0,
            fq: 24.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcciState {
    pub ca50: f64,
    pub t_soc: f64,
    pub p_soc: f64,
    pub imep: f64,
}

impl RcciState {
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_vec(vec![self.ca50, self.t_soc, self.p_soc, self.imep])
    }

    pub fn from_vector(v: &DVector<f64>) -> Result<Self> {
        if v.len() != 4 {
            return Err(Error::DimensionMismatch {
                context: "RCCI state",
                expected: 4,
                found: v.len(),
            });
        }
        Ok(Self {
            ca50: v[0],
            t_soc: v[1],
            p_soc: v[2],
            imep: v[3],
        })
    }

    /// Measured outputs `(CA50, IMEP)`.
    pub fn outputs(&self) -> [f64; 2] {
        [self.ca50, self.imep]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcciInput {
    /// Start of injection, CAD aTDC.
    pub soi: f64,
    /// Fuel quantity, mg/cycle.
    pub fq: f64,
}

impl RcciInput {
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_vec(vec![self.soi, self.fq])
    }

    pub fn from_vector(v: &DVector<f64>) -> Result<Self> {
        if v.len() != 2 {
            return Err(Error::DimensionMismatch {
                context: "RCCI input",
                expected: 2,
                found: v.len(),
            });
        }
        Ok(Self {
            soi: v[0],
            fq: v[1],
        })
    }
}

/// Linearized model in deviation variables about the nominal point.
pub fn linear_model() -> LtiModel {
    LtiModel::from_rows(4, 2, &A, &B, &C).expect("shipped RCCI model is well formed")
}

/// Physical region where the surrogate is trusted.
pub fn validity_box() -> ([f64; 4], [f64; 4]) {
    ([-20.0, 600.0, 1500.0, 0.0], [40.0, 1200.0, 5500.0, 1200.0])
}

fn check_envelope(state: &RcciState) -> Result<()> {
    let (lo, hi) = validity_box();
    let v = [state.ca50, state.t_soc, state.p_soc, state.imep];
    for i in 0..4 {
        if !(v[i] >= lo[i] && v[i] <= hi[i]) {
            return Err(Error::OutOfEnvelope(format!(
                "{} = {} outside [{}, {}]",
                STATE_NAMES[i], v[i], lo[i], hi[i]
            )));
        }
    }
    Ok(())
}

/// One engine cycle of the nonlinear surrogate. Returns the next state and
/// its measured outputs `(CA50, IMEP)`, with `noise` added when given.
pub fn surrogate_rcci_step(
    state: &RcciState,
    input: &RcciInput,
    op: &RcciOperatingPoint,
    noise: Option<[f64; 2]>,
) -> Result<(RcciState, [f64; 2])> {
    op.validate()?;
    if !(input.soi.is_finite() && input.fq.is_finite()) || input.fq <= 0.0 {
        return Err(Error::OutOfEnvelope(format!(
            "input SOI = {}, FQ = {} is not physical",
            input.soi, input.fq
        )));
    }
    check_envelope(state)?;
    let x0 = op.nominal_state();
    let u0 = op.nominal_input();
    let dx = [
        state.ca50 - x0.ca50,
        state.t_soc - x0.t_soc,
        state.p_soc - x0.p_soc,
        state.imep - x0.imep,
    ];
    let dsoi_raw = input.soi - u0.soi;
    let dsoi = SOI_SATURATION * (dsoi_raw / SOI_SATURATION).tanh();
    let dfq = input.fq - u0.fq;
    let du = [dsoi, dfq];

    let mut next = [0.0; 4];
    for (i, slot) in next.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..4 {
            acc += A[4 * i + j] * dx[j];
        }
        for j in 0..2 {
            acc += B[2 * i + j] * du[j];
        }
        *slot = acc;
    }
    next[0] += FQ_SOI_COUPLING * dfq * dsoi_raw;
    next[3] -= FQ_IMEP_CURVATURE * dfq * dfq + CA50_IMEP_CURVATURE * dx[0] * dx[0];

    let new_state = RcciState {
        ca50: x0.ca50 + next[0],
        t_soc: x0.t_soc + next[1],
        p_soc: x0.p_soc + next[2],
        imep: x0.imep + next[3],
    };
    check_envelope(&new_state)?;
    let mut y = new_state.outputs();
    if let Some(v) = noise {
        y[0] += v[0];
        y[1] += v[1];
    }
    Ok((new_state, y))
}

/// Deviation-variable form of [`surrogate_rcci_step`] used by the simulator.
pub fn surrogate_step_deviation(
    dx: &DVector<f64>,
    du: &DVector<f64>,
    op: &RcciOperatingPoint,
) -> Result<DVector<f64>> {
    let x = RcciState::from_vector(&(op.nominal_state().to_vector() + dx))?;
    let u = RcciInput::from_vector(&(op.nominal_input().to_vector() + du))?;
    let (next, _) = surrogate_rcci_step(&x, &u, op, None)?;
    Ok(next.to_vector() - op.nominal_state().to_vector())
}
