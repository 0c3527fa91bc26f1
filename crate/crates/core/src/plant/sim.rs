//! Closed-loop simulation of a controller, an estimator and a plant.
//!
//! Everything inside the loop runs in deviation variables. References are
//! given in physical units and the trace is reported in physical units.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::estimation::KalmanFilter;
use crate::model::{build_sliding_design, reference_window, ConstraintSets, LtiModel};
use crate::plant::rcci::{surrogate_step_deviation, RcciOperatingPoint};
use crate::polytope::invariant::{tracking_invariant_set, TrackingInvariantSet};
use crate::pssc::{PsscConfig, PsscController, StepStatus};
use crate::sliding::{dsmc_control, saturate};

/// Inputs that differ from the unclipped command by more than this count
/// as saturated.
pub const CLIP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    Pssc,
    Dsmc,
}

impl ControllerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerKind::Pssc => "pssc",
            ControllerKind::Dsmc => "dsmc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlantKind {
    /// The design model itself.
    Linear,
    /// The nonlinear RCCI surrogate; needs an operating point.
    Surrogate,
}

impl PlantKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlantKind::Linear => "linear",
            PlantKind::Surrogate => "surrogate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Kalman,
    /// Full-state feedback from the true state.
    TrueState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    pub process_noise: DMatrix<f64>,
    pub measurement_noise: DMatrix<f64>,
    pub initial_covariance: DMatrix<f64>,
    /// Deviation-variable initial estimate; zero when absent.
    pub initial_estimate: Option<DVector<f64>>,
}

impl EstimatorConfig {
    pub fn true_state(n: usize, m: usize) -> Self {
        Self {
            kind: EstimatorKind::TrueState,
            process_noise: DMatrix::zeros(n, n),
            measurement_noise: DMatrix::identity(m, m),
            initial_covariance: DMatrix::identity(n, n),
            initial_estimate: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub name: String,
    /// Model in deviation variables.
    pub model: LtiModel,
    /// Physical value of the zero deviation state.
    pub state_offset: DVector<f64>,
    /// Physical value of the zero deviation input.
    pub input_offset: DVector<f64>,
    pub state_names: Vec<String>,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub alpha: Vec<Vec<f64>>,
    pub beta: DMatrix<f64>,
    /// Constraint sets in deviation variables.
    pub sets: ConstraintSets,
    pub pssc: PsscConfig,
    pub controller: ControllerKind,
    pub plant: PlantKind,
    pub operating_point: Option<RcciOperatingPoint>,
    pub cycles: usize,
    /// Piecewise-constant physical reference: `(first cycle, value)`.
    pub reference: Vec<(usize, DVector<f64>)>,
    /// Standard deviation of additive output noise.
    pub output_noise_std: Option<DVector<f64>>,
    pub estimator: EstimatorConfig,
    /// Deviation-variable initial plant state.
    pub initial_state: DVector<f64>,
    pub seed: u64,
    /// Record wall-clock solve times. Off by default so traces are
    /// bit-for-bit reproducible.
    pub record_solve_time: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.model.n();
        let m = self.model.m();
        let check = |context: &'static str, expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    context,
                    expected,
                    found,
                })
            }
        };
        check("state offset", n, self.state_offset.len())?;
        check("input offset", m, self.input_offset.len())?;
        check("state names", n, self.state_names.len())?;
        check("input names", m, self.input_names.len())?;
        check("output names", m, self.output_names.len())?;
        check("initial state", n, self.initial_state.len())?;
        if self.cycles == 0 {
            return Err(Error::InvalidConfig("cycles must be at least 1".into()));
        }
        if self.reference.is_empty() {
            return Err(Error::InvalidConfig(
                "reference needs at least one breakpoint".into(),
            ));
        }
        if self.reference[0].0 != 0 {
            return Err(Error::InvalidConfig(
                "first reference breakpoint must be at cycle 0".into(),
            ));
        }
        for w in self.reference.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidConfig(
                    "reference breakpoints must be strictly increasing".into(),
                ));
            }
        }
        for (_, y) in &self.reference {
            check("reference value", m, y.len())?;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(
                    "reference values must be finite".into(),
                ));
            }
        }
        if let Some(std) = &self.output_noise_std {
            check("output noise", m, std.len())?;
            if std.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                return Err(Error::InvalidConfig(
                    "noise std must be non-negative".into(),
                ));
            }
        }
        if self.plant == PlantKind::Surrogate {
            let op = self.operating_point.as_ref().ok_or_else(|| {
                Error::InvalidConfig("surrogate plant needs an operating point".into())
            })?;
            op.validate()?;
            check("surrogate state", 4, n)?;
            check("surrogate input", 2, m)?;
        }
        self.sets.validate(&self.model)
    }

    /// Output offset `C x_offset`.
    pub fn output_offset(&self) -> DVector<f64> {
        self.model.c() * &self.state_offset
    }

    /// Physical reference at every cycle, held `extra` cycles past the end.
    pub fn reference_trajectory(&self, extra: usize) -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(self.cycles + extra);
        let mut idx = 0;
        for k in 0..self.cycles + extra {
            while idx + 1 < self.reference.len() && self.reference[idx + 1].0 <= k {
                idx += 1;
            }
            out.push(self.reference[idx].1.clone());
        }
        out
    }
}

/// One cycle, physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub k: usize,
    pub x_true: DVector<f64>,
    pub x_est: DVector<f64>,
    pub y_true: DVector<f64>,
    pub y_meas: DVector<f64>,
    pub y_ref: DVector<f64>,
    /// Virtual reference chosen by PSSC; the reference itself for DSMC.
    pub y_virtual: DVector<f64>,
    pub u: DVector<f64>,
    pub clipped: Vec<bool>,
    pub s: DVector<f64>,
    /// One-step predicted second-order sliding value.
    pub xi: DVector<f64>,
    pub status: StepStatus,
    pub solve_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub name: String,
    pub controller: ControllerKind,
    pub plant: PlantKind,
    pub seed: u64,
    pub state_names: Vec<String>,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub records: Vec<SimRecord>,
}

impl SimTrace {
    pub fn csv_header(&self) -> Vec<String> {
        let n = self.state_names.len();
        let mut h = vec!["k".to_string()];
        h.extend((1..=n).map(|i| format!("x{i}")));
        h.extend((1..=n).map(|i| format!("x{i}_est")));
        h.extend(self.output_names.iter().cloned());
        h.extend(self.output_names.iter().map(|s| format!("{s}_ref")));
        h.extend(self.output_names.iter().map(|s| format!("{s}_virt")));
        h.extend(self.input_names.iter().cloned());
        let m = self.output_names.len();
        h.extend((1..=m).map(|i| format!("s{i}")));
        h.extend((1..=m).map(|i| format!("xi{i}")));
        h.push("status".into());
        h.push("solve_ms".into());
        h
    }

    /// One row per cycle with the measured outputs.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidConfig(format!("csv: {e}"));
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.csv_header()).map_err(io)?;
        for r in &self.records {
            let mut row = vec![r.k.to_string()];
            for v in [
                &r.x_true,
                &r.x_est,
                &r.y_meas,
                &r.y_ref,
                &r.y_virtual,
                &r.u,
                &r.s,
                &r.xi,
            ] {
                row.extend(v.iter().map(|x| x.to_string()));
            }
            row.push(r.status.as_str().to_string());
            row.push(r.solve_ms.to_string());
            w.write_record(&row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Runs the closed loop, computing the terminal set if PSSC needs it.
pub fn simulate(config: &SimConfig) -> Result<SimTrace> {
    simulate_with(config, None)
}

/// Terminal set for `config`, for reuse across runs.
pub fn invariant_set_for(config: &SimConfig) -> Result<Arc<TrackingInvariantSet>> {
    let design = build_sliding_design(&config.model, &config.alpha, &config.beta)?;
    let t = tracking_invariant_set(&config.model, &design, &config.sets, &config.pssc.invariant)?;
    Ok(Arc::new(t))
}

/// Runs the closed loop with an optional precomputed terminal set.
pub fn simulate_with(
    config: &SimConfig,
    invariant: Option<Arc<TrackingInvariantSet>>,
) -> Result<SimTrace> {
    config.validate()?;
    let model = &config.model;
    let n = model.n();
    let m = model.m();
    let design = build_sliding_design(model, &config.alpha, &config.beta)?;

    let mut pssc = match config.controller {
        ControllerKind::Pssc => {
            let t = match invariant {
                Some(t) => t,
                None => invariant_set_for(config)?,
            };
            t.require_determined()?;
            if t.t.is_certified_empty() {
                return Err(Error::InfeasibleTarget);
            }
            Some(PsscController::with_invariant_set(
                model.clone(),
                design.clone(),
                config.sets.clone(),
                t,
                config.pssc.clone(),
            )?)
        }
        ControllerKind::Dsmc => None,
    };

    let mut kf = match config.estimator.kind {
        EstimatorKind::Kalman => Some(KalmanFilter::new(
            model,
            config.estimator.process_noise.clone(),
            config.estimator.measurement_noise.clone(),
            config
                .estimator
                .initial_estimate
                .clone()
                .unwrap_or_else(|| DVector::zeros(n)),
            config.estimator.initial_covariance.clone(),
        )?),
        EstimatorKind::TrueState => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise: Option<Vec<Normal<f64>>> = config.output_noise_std.as_ref().map(|std| {
        std.iter()
            .map(|s| Normal::new(0.0, *s).expect("validated std"))
            .collect()
    });

    let y_offset = config.output_offset();
    let preview = design.preview();
    let reference: Vec<DVector<f64>> = config
        .reference_trajectory(preview + 1)
        .into_iter()
        .map(|r| r - &y_offset)
        .collect();

    let mut x = config.initial_state.clone();
    let mut records = Vec::with_capacity(config.cycles);
    for k in 0..config.cycles {
        let y_true = model.output(&x);
        let mut y_meas = y_true.clone();
        if let Some(dists) = &noise {
            for (i, d) in dists.iter().enumerate() {
                y_meas[i] += d.sample(&mut rng);
            }
        }
        let x_hat = match kf.as_mut() {
            Some(f) => {
                f.update(&y_meas)?;
                f.x_hat().clone()
            }
            None => x.clone(),
        };

        let r_now = &reference[k];
        let (u, u_raw, y_virtual, status, solve_ms) = match pssc.as_mut() {
            Some(ctrl) => {
                let res = ctrl.step(&x_hat, r_now)?;
                let ms = if config.record_solve_time {
                    res.solve_time.as_secs_f64() * 1e3
                } else {
                    0.0
                };
                (
                    res.u_applied,
                    res.u_unclipped,
                    res.y_virtual,
                    res.status,
                    ms,
                )
            }
            None => {
                let h_now = reference_window(&design, &reference, k)?;
                let h_next = reference_window(&design, &reference, k + 1)?;
                let raw = dsmc_control(&design, model, &x_hat, &h_now, &h_next);
                let u = saturate(&raw, &config.sets.inputs)?;
                (u, raw, r_now.clone(), StepStatus::Dsmc, 0.0)
            }
        };
        let clipped: Vec<bool> = (0..m).map(|i| (u[i] - u_raw[i]).abs() > CLIP_TOL).collect();

        // Sliding values relative to the reference the controller tracks.
        let target: Vec<DVector<f64>> = match config.controller {
            ControllerKind::Pssc => vec![y_virtual.clone(); preview + 1],
            ControllerKind::Dsmc => reference[k..=k + preview].to_vec(),
        };
        let h_now = reference_window(&design, &target, 0)?;
        let h_next = reference_window(&design, &target, 1)?;
        let s = design.g() * &x - &h_now;
        let x_pred = model.step(&x, &u);
        let xi = (design.g() * &x_pred - &h_next) + design.beta() * &s;

        let x_next = match config.plant {
            PlantKind::Linear => x_pred,
            PlantKind::Surrogate => surrogate_step_deviation(
                &x,
                &u,
                config.operating_point.as_ref().expect("validated"),
            )?,
        };
        if let Some(f) = kf.as_mut() {
            f.predict(&u);
        }

        records.push(SimRecord {
            k,
            x_true: &x + &config.state_offset,
            x_est: &x_hat + &config.state_offset,
            y_true: &y_true + &y_offset,
            y_meas: &y_meas + &y_offset,
            y_ref: r_now + &y_offset,
            y_virtual: &y_virtual + &y_offset,
            u: &u + &config.input_offset,
            clipped,
            s,
            xi,
            status,
            solve_ms,
        });
        x = x_next;
    }

    Ok(SimTrace {
        name: config.name.clone(),
        controller: config.controller,
        plant: config.plant,
        seed: config.seed,
        state_names: config.state_names.clone(),
        input_names: config.input_names.clone(),
        output_names: config.output_names.clone(),
        records,
    })
}
