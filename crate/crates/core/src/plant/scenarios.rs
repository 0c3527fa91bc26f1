//! Shipped scenarios.
//!
//! Reference timings and levels of the RCCI scenarios are approximations of
//! typical engine test profiles, not measured data.

use nalgebra::{DMatrix, DVector};

use crate::model::{default_beta, ConstraintSets, LtiModel};
use crate::plant::rcci::{self, RcciOperatingPoint, INPUT_NAMES, OUTPUT_NAMES, STATE_NAMES};
use crate::plant::sim::{ControllerKind, EstimatorConfig, EstimatorKind, PlantKind, SimConfig};
use crate::pssc::PsscConfig;

/// Lower FQ bound of the nominal RCCI scenarios, mg/cycle.
pub const FQ_MIN: f64 = 15.0;
/// Lower FQ bound of the reduced-authority scenario, mg/cycle.
pub const FQ_MIN_REDUCED: f64 = 19.0;
pub const FQ_MAX: f64 = 40.0;
pub const SOI_BOUNDS: (f64, f64) = (-80.0, -30.0);
/// Half-widths of the RCCI state box around the nominal point.
pub const STATE_HALF_WIDTHS: [f64; 4] = [15.0, 120.0, 400.0, 400.0];
/// Process-noise scale of the RCCI Kalman filter.
pub const PROCESS_NOISE_SCALE: f64 = 1e-4;

pub const NAMES: [&str; 7] = [
    "scalar",
    "double-integrator",
    "fig2",
    "fig3",
    "fig4a",
    "fig4b",
    "fig5",
];

/// Scenario by name.
pub fn builtin(name: &str) -> Option<SimConfig> {
    Some(match name {
        "scalar" => scalar_demo(),
        "double-integrator" => double_integrator(),
        "fig2" => fig2(),
        "fig3" => fig3(),
        "fig4a" => fig4a(),
        "fig4b" => fig4b(),
        "fig5" => fig5(),
        _ => return None,
    })
}

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

/// `x(k+1) = 0.5 x(k) + u(k)`, `|x| <= 1`, `|u| <= 1`.
pub fn scalar_demo() -> SimConfig {
    let model = LtiModel::from_rows(1, 1, &[0.5], &[1.0], &[1.0]).expect("valid model");
    SimConfig {
        name: "scalar".into(),
        state_offset: DVector::zeros(1),
        input_offset: DVector::zeros(1),
        state_names: names("x", 1),
        input_names: names("u", 1),
        output_names: names("y", 1),
        alpha: vec![vec![1.0]],
        beta: default_beta(1),
        sets: ConstraintSets::from_boxes(&[-1.0], &[1.0], &[-1.0], &[1.0]).expect("valid box"),
        pssc: PsscConfig::default(),
        controller: ControllerKind::Pssc,
        plant: PlantKind::Linear,
        operating_point: None,
        cycles: 40,
        reference: vec![(0, v(&[0.5])), (20, v(&[-0.5]))],
        output_noise_std: None,
        estimator: EstimatorConfig::true_state(1, 1),
        initial_state: DVector::zeros(1),
        seed: 0,
        record_solve_time: false,
        model,
    }
}

/// Double integrator with position, velocity and input limits.
pub fn double_integrator() -> SimConfig {
    let model = LtiModel::from_rows(2, 1, &[1.0, 1.0, 0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0])
        .expect("valid model");
    SimConfig {
        name: "double-integrator".into(),
        state_offset: DVector::zeros(2),
        input_offset: DVector::zeros(1),
        state_names: vec!["position".into(), "velocity".into()],
        input_names: vec!["force".into()],
        output_names: vec!["position".into()],
        alpha: vec![vec![-0.5, 1.0]],
        beta: default_beta(1),
        sets: ConstraintSets::from_boxes(&[-5.0, -2.0], &[5.0, 2.0], &[-1.0], &[1.0])
            .expect("valid box"),
        pssc: PsscConfig::default(),
        controller: ControllerKind::Pssc,
        plant: PlantKind::Linear,
        operating_point: None,
        cycles: 60,
        reference: vec![(0, v(&[2.0])), (30, v(&[-1.0]))],
        output_noise_std: None,
        estimator: EstimatorConfig::true_state(2, 1),
        initial_state: DVector::zeros(2),
        seed: 0,
        record_solve_time: false,
        model,
    }
}

/// RCCI constraint sets in deviation variables for a given FQ lower bound.
pub fn rcci_sets(op: &RcciOperatingPoint, fq_min: f64) -> ConstraintSets {
    let u0 = op.nominal_input();
    let lo: Vec<f64> = STATE_HALF_WIDTHS.iter().map(|h| -h).collect();
    ConstraintSets::from_boxes(
        &lo,
        &STATE_HALF_WIDTHS,
        &[SOI_BOUNDS.0 - u0.soi, fq_min - u0.fq],
        &[SOI_BOUNDS.1 - u0.soi, FQ_MAX - u0.fq],
    )
    .expect("valid RCCI box")
}

/// Kalman filter with `Q = scale diag(h^2)`, `R = diag(std^2)` and
/// `P0 = diag((0.01 h)^2)`, where `h` are the state-box half-widths.
pub fn kalman_estimator(
    process_noise_scale: f64,
    half_widths: &[f64],
    measurement_std: &[f64],
) -> EstimatorConfig {
    let diag = |it: Vec<f64>| DMatrix::from_diagonal(&DVector::from_vec(it));
    EstimatorConfig {
        kind: EstimatorKind::Kalman,
        process_noise: diag(
            half_widths
                .iter()
                .map(|h| process_noise_scale * h * h)
                .collect(),
        ),
        measurement_noise: diag(measurement_std.iter().map(|s| s * s).collect()),
        initial_covariance: diag(half_widths.iter().map(|h| (0.01 * h).powi(2)).collect()),
        initial_estimate: None,
    }
}

/// RCCI closed loop on the surrogate plant with a Kalman filter.
pub fn rcci(
    name: &str,
    fq_min: f64,
    cycles: usize,
    reference: Vec<(usize, [f64; 2])>,
) -> SimConfig {
    let op = RcciOperatingPoint::default();
    SimConfig {
        name: name.into(),
        model: rcci::linear_model(),
        state_offset: op.nominal_state().to_vector(),
        input_offset: op.nominal_input().to_vector(),
        state_names: STATE_NAMES.iter().map(|s| s.to_string()).collect(),
        input_names: INPUT_NAMES.iter().map(|s| s.to_string()).collect(),
        output_names: OUTPUT_NAMES.iter().map(|s| s.to_string()).collect(),
        alpha: vec![vec![1.0], vec![1.0]],
        beta: default_beta(2),
        sets: rcci_sets(&op, fq_min),
        pssc: PsscConfig::default(),
        controller: ControllerKind::Pssc,
        plant: PlantKind::Surrogate,
        operating_point: Some(op),
        cycles,
        reference: reference.into_iter().map(|(k, y)| (k, v(&y))).collect(),
        output_noise_std: None,
        estimator: kalman_estimator(
            PROCESS_NOISE_SCALE,
            &STATE_HALF_WIDTHS,
            &rcci::OUTPUT_NOISE_STD,
        ),
        initial_state: DVector::zeros(4),
        seed: 0,
        record_solve_time: false,
    }
}

/// Simultaneous CA50 and IMEP tracking, FQ_min = 15 mg/cycle.
pub fn fig2() -> SimConfig {
    rcci(
        "fig2",
        FQ_MIN,
        80,
        vec![
            (0, [8.0, 500.0]),
            (15, [10.0, 560.0]),
            (35, [6.0, 440.0]),
            (55, [9.0, 600.0]),
        ],
    )
}

/// FQ_min = 19 mg/cycle makes the 350 kPa IMEP level unreachable.
pub fn fig3() -> SimConfig {
    rcci(
        "fig3",
        FQ_MIN_REDUCED,
        80,
        vec![(0, [8.0, 500.0]), (20, [8.0, 350.0]), (50, [8.0, 550.0])],
    )
}

/// Constant CA50 with large IMEP steps.
pub fn fig4a() -> SimConfig {
    rcci(
        "fig4a",
        FQ_MIN,
        80,
        vec![
            (0, [8.0, 400.0]),
            (20, [8.0, 650.0]),
            (40, [8.0, 350.0]),
            (60, [8.0, 600.0]),
        ],
    )
}

/// Constant IMEP with CA50 steps; CA50 drops to 6 at the 41st cycle.
pub fn fig4b() -> SimConfig {
    rcci(
        "fig4b",
        FQ_MIN,
        80,
        vec![
            (0, [8.0, 600.0]),
            (20, [10.0, 600.0]),
            (40, [6.0, 600.0]),
            (60, [8.0, 600.0]),
        ],
    )
}

/// IMEP steps under cyclic variability.
pub fn fig5() -> SimConfig {
    let mut cfg = rcci(
        "fig5",
        FQ_MIN,
        100,
        vec![
            (0, [8.0, 450.0]),
            (25, [8.0, 600.0]),
            (50, [8.0, 400.0]),
            (75, [8.0, 550.0]),
        ],
    );
    cfg.output_noise_std = Some(v(&rcci::OUTPUT_NOISE_STD));
    cfg.seed = 5;
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_validates() {
        for name in NAMES {
            let cfg = builtin(name).unwrap();
            assert_eq!(cfg.name, name);
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn fig3_tightens_fuel_bound() {
        let (lo, _) = fig3().sets.inputs.box_bounds().unwrap();
        assert_eq!(lo[1] + 24.0, FQ_MIN_REDUCED);
        assert_eq!(fig2().cycles, 80);
    }
}
