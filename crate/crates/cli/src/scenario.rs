//! Scenario files: TOML schema, validation and resolution to a
//! [`SimConfig`].
//!
//! Validation runs in three passes so that a bad file reports every problem
//! at once: unknown keys, then types, then values.

use pssc_core::linalg::spectral_radius;
use pssc_core::plant::rcci::{self, RcciOperatingPoint};
use pssc_core::plant::scenarios as builtin;
use pssc_core::plant::sim::{EstimatorConfig, EstimatorKind};
use pssc_core::{
    ConstraintSets, ControllerKind, DMatrix, DVector, InvariantSetConfig, LtiModel, PlantKind,
    Polyhedron, PsscConfig, SimConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycles: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_solve_time: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operating_point: Option<OperatingPointSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sliding: Option<SlidingSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pssc: Option<PsscSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_set: Option<InvariantSetSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    /// `rcci` (shipped engine model) or `inline`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_names: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_names: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_names: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_offset: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_offset: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OperatingPointSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub premixed_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intake_temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intake_pressure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine_speed: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SlidingSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_lower: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_upper: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_lower: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PsscSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_offset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_qp_iterations: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InvariantSetSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSection {
    /// Rows `[cycle, y_1, .., y_m]` in physical units, held until the next row.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_std: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSection {
    /// `kalman` or `true_state`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process_noise_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement_std: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InitialSection {
    /// Physical initial state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<f64>>,
}

const TOP_KEYS: &[&str] = &[
    "name",
    "cycles",
    "controller",
    "plant",
    "seed",
    "record_solve_time",
];

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "model",
        &[
            "kind",
            "a",
            "b",
            "c",
            "state_names",
            "input_names",
            "output_names",
            "state_offset",
            "input_offset",
        ],
    ),
    (
        "operating_point",
        &[
            "premixed_ratio",
            "intake_temperature",
            "intake_pressure",
            "engine_speed",
        ],
    ),
    ("sliding", &["alpha", "beta"]),
    (
        "constraints",
        &["state_lower", "state_upper", "input_lower", "input_upper"],
    ),
    ("pssc", &["horizon", "lambda_offset", "max_qp_iterations"]),
    ("invariant_set", &["lambda", "max_iterations"]),
    ("reference", &["breakpoints"]),
    ("noise", &["output_std"]),
    (
        "estimator",
        &["kind", "process_noise_scale", "measurement_std"],
    ),
    ("initial", &["state"]),
];

/// Every key not in the schema, as dotted paths.
fn unknown_keys(table: &toml::Table) -> Vec<String> {
    let mut out = Vec::new();
    for (key, value) in table {
        if TOP_KEYS.contains(&key.as_str()) {
            continue;
        }
        match SECTIONS.iter().find(|(name, _)| name == key) {
            Some((_, keys)) => match value.as_table() {
                Some(section) => {
                    for inner in section.keys() {
                        if !keys.contains(&inner.as_str()) {
                            out.push(format!("{key}.{inner}: unknown key"));
                        }
                    }
                }
                None => out.push(format!("{key}: expected a table")),
            },
            None => out.push(format!("{key}: unknown key")),
        }
    }
    out
}

/// Parses and schema-checks a scenario document.
pub fn parse(text: &str) -> Result<ScenarioFile, CliError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Schema(vec![format!("TOML syntax: {e}")]))?;
    let unknown = unknown_keys(&table);
    if !unknown.is_empty() {
        return Err(CliError::Schema(unknown));
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Schema(vec![e.message().to_string()]))
}

/// Command-line overrides applied before resolution.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub controller: Option<String>,
}

impl ScenarioFile {
    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = Some(seed);
        }
        if let Some(controller) = &overrides.controller {
            self.controller = Some(controller.clone());
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

/// A validated scenario: the echo with every default filled in, and the
/// simulation configuration built from it.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub file: ScenarioFile,
    pub config: SimConfig,
    /// The state or input box is empty (only allowed when requested).
    pub empty_sets: bool,
}

struct Errors(Vec<String>);

impl Errors {
    fn push(&mut self, field: &str, msg: impl std::fmt::Display) {
        self.0.push(format!("{field}: {msg}"));
    }

    fn check_len(&mut self, field: &str, v: &[f64], len: usize) -> bool {
        if v.len() != len {
            self.push(field, format!("expected {len} values, found {}", v.len()));
            return false;
        }
        if v.iter().any(|x| !x.is_finite()) {
            self.push(field, "values must be finite");
            return false;
        }
        true
    }

    fn matrix(
        &mut self,
        field: &str,
        rows: &[Vec<f64>],
        shape: (usize, usize),
    ) -> Option<DMatrix<f64>> {
        if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
            self.push(field, format!("expected a {}x{} matrix", shape.0, shape.1));
            return None;
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        if flat.iter().any(|x| !x.is_finite()) {
            self.push(field, "entries must be finite");
            return None;
        }
        Some(DMatrix::from_row_slice(shape.0, shape.1, &flat))
    }
}

struct ModelParts {
    model: LtiModel,
    state_names: Vec<String>,
    input_names: Vec<String>,
    output_names: Vec<String>,
    state_offset: Vec<f64>,
    input_offset: Vec<f64>,
    operating_point: Option<RcciOperatingPoint>,
    is_rcci: bool,
}

fn resolve_model(file: &ScenarioFile, errors: &mut Errors) -> Option<ModelParts> {
    let section = file.model.clone().unwrap_or_default();
    let kind = section.kind.clone().unwrap_or_else(|| "rcci".into());
    match kind.as_str() {
        "rcci" => {
            for (field, present) in [
                ("model.a", section.a.is_some()),
                ("model.b", section.b.is_some()),
                ("model.c", section.c.is_some()),
            ] {
                if present {
                    errors.push(field, "not allowed with kind = \"rcci\"");
                }
            }
            let ops = file.operating_point.clone().unwrap_or_default();
            let defaults = RcciOperatingPoint::default();
            let op = RcciOperatingPoint {
                premixed_ratio: ops.premixed_ratio.unwrap_or(defaults.premixed_ratio),
                intake_temperature: ops
                    .intake_temperature
                    .unwrap_or(defaults.intake_temperature),
                intake_pressure: ops.intake_pressure.unwrap_or(defaults.intake_pressure),
                engine_speed: ops.engine_speed.unwrap_or(defaults.engine_speed),
            };
            if let Err(e) = op.validate() {
                errors.push("operating_point", e);
                return None;
            }
            let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
            Some(ModelParts {
                model: rcci::linear_model(),
                state_names: names(&rcci::STATE_NAMES),
                input_names: names(&rcci::INPUT_NAMES),
                output_names: names(&rcci::OUTPUT_NAMES),
                state_offset: op.nominal_state().to_vector().iter().copied().collect(),
                input_offset: op.nominal_input().to_vector().iter().copied().collect(),
                operating_point: Some(op),
                is_rcci: true,
            })
        }
        "inline" => {
            if file.operating_point.is_some() {
                errors.push("operating_point", "only allowed with model.kind = \"rcci\"");
            }
            let (Some(a), Some(b), Some(c)) = (&section.a, &section.b, &section.c) else {
                errors.push("model", "kind = \"inline\" needs a, b and c");
                return None;
            };
            let n = a.len();
            let m = b.first().map(|r| r.len()).unwrap_or(0);
            if n == 0 || m == 0 {
                errors.push("model", "a and b must be non-empty");
                return None;
            }
            let a = errors.matrix("model.a", a, (n, n));
            let b = errors.matrix("model.b", b, (n, m));
            let c = errors.matrix("model.c", c, (m, n));
            let (a, b, c) = (a?, b?, c?);
            let model = match LtiModel::new(a, b, c) {
                Ok(model) => model,
                Err(e) => {
                    errors.push("model", e);
                    return None;
                }
            };
            let default_names =
                |prefix: &str, k: usize| (1..=k).map(|i| format!("{prefix}{i}")).collect();
            let mut names =
                |field: &str, given: &Option<Vec<String>>, prefix: &str, k: usize| -> Vec<String> {
                    match given {
                        Some(v) if v.len() == k => v.clone(),
                        Some(v) => {
                            errors.push(field, format!("expected {k} names, found {}", v.len()));
                            default_names(prefix, k)
                        }
                        None => default_names(prefix, k),
                    }
                };
            let state_names = names("model.state_names", &section.state_names, "x", n);
            let input_names = names("model.input_names", &section.input_names, "u", m);
            let output_names = names("model.output_names", &section.output_names, "y", m);
            let state_offset = section.state_offset.clone().unwrap_or_else(|| vec![0.0; n]);
            let input_offset = section.input_offset.clone().unwrap_or_else(|| vec![0.0; m]);
            errors.check_len("model.state_offset", &state_offset, n);
            errors.check_len("model.input_offset", &input_offset, m);
            Some(ModelParts {
                model,
                state_names,
                input_names,
                output_names,
                state_offset,
                input_offset,
                operating_point: None,
                is_rcci: false,
            })
        }
        other => {
            errors.push(
                "model.kind",
                format!("expected \"rcci\" or \"inline\", found {other:?}"),
            );
            None
        }
    }
}

/// Box around `offset` in deviation variables; `None` if inverted.
fn deviation_box(
    errors: &mut Errors,
    field: &str,
    lower: &[f64],
    upper: &[f64],
    offset: &[f64],
    allow_empty: bool,
) -> Option<Polyhedron> {
    let inverted = lower.iter().zip(upper).any(|(l, u)| l >= u);
    if inverted {
        if !allow_empty {
            errors.push(field, "every lower bound must be below its upper bound");
        }
        return None;
    }
    if lower
        .iter()
        .zip(upper)
        .zip(offset)
        .any(|((l, u), o)| !(l < o && o < u))
    {
        errors.push(
            field,
            "the operating point must lie strictly inside the box",
        );
    }
    let lo: Vec<f64> = lower.iter().zip(offset).map(|(l, o)| l - o).collect();
    let hi: Vec<f64> = upper.iter().zip(offset).map(|(u, o)| u - o).collect();
    Polyhedron::from_box(&lo, &hi).ok()
}

/// Validates every field and builds the simulation configuration.
pub fn resolve(file: &ScenarioFile, allow_empty_sets: bool) -> Result<Resolved, CliError> {
    let mut errors = Errors(Vec::new());
    let name = file.name.clone().unwrap_or_else(|| "scenario".into());
    let cycles = file.cycles.unwrap_or(0);
    if cycles < 1 {
        errors.push("cycles", "must be a positive integer");
    }
    let controller = match file.controller.as_deref().unwrap_or("pssc") {
        "pssc" => Some(ControllerKind::Pssc),
        "dsmc" => Some(ControllerKind::Dsmc),
        other => {
            errors.push(
                "controller",
                format!("expected \"pssc\" or \"dsmc\", found {other:?}"),
            );
            None
        }
    };

    let Some(parts) = resolve_model(file, &mut errors) else {
        return Err(CliError::Schema(errors.0));
    };
    let n = parts.model.n();
    let m = parts.model.m();

    let default_plant = if parts.is_rcci { "surrogate" } else { "linear" };
    let plant = match file.plant.as_deref().unwrap_or(default_plant) {
        "linear" => Some(PlantKind::Linear),
        "surrogate" if parts.is_rcci => Some(PlantKind::Surrogate),
        "surrogate" => {
            errors.push("plant", "the surrogate plant needs model.kind = \"rcci\"");
            None
        }
        other => {
            errors.push(
                "plant",
                format!("expected \"linear\" or \"surrogate\", found {other:?}"),
            );
            None
        }
    };

    // Sliding design parameters.
    let sliding = file.sliding.clone().unwrap_or_default();
    let alpha = sliding.alpha.clone().unwrap_or_else(|| vec![vec![1.0]; m]);
    if alpha.len() != m {
        errors.push(
            "sliding.alpha",
            format!("expected {m} coefficient lists, found {}", alpha.len()),
        );
    }
    for (i, a) in alpha.iter().enumerate() {
        if a.last().is_none_or(|v| *v == 0.0) || a.iter().any(|v| !v.is_finite()) {
            errors.push(
                "sliding.alpha",
                format!("list {i} must be finite with a nonzero last coefficient"),
            );
        }
    }
    let beta_rows = sliding.beta.clone().unwrap_or_else(|| {
        (0..m)
            .map(|i| (0..m).map(|j| if i == j { -0.2 } else { 0.0 }).collect())
            .collect()
    });
    let beta = errors.matrix("sliding.beta", &beta_rows, (m, m));
    if let Some(b) = &beta {
        match spectral_radius(b) {
            Ok(r) if r < 1.0 => {}
            Ok(r) => errors.push(
                "sliding.beta",
                format!("spectral radius {r} must be below 1"),
            ),
            Err(e) => errors.push("sliding.beta", e),
        }
    }

    // Constraint boxes in physical units.
    let cons = file.constraints.clone().unwrap_or_default();
    let (def_sl, def_su, def_il, def_iu) = if parts.is_rcci {
        let so = &parts.state_offset;
        let h = builtin::STATE_HALF_WIDTHS;
        (
            Some((0..4).map(|i| so[i] - h[i]).collect::<Vec<_>>()),
            Some((0..4).map(|i| so[i] + h[i]).collect::<Vec<_>>()),
            Some(vec![builtin::SOI_BOUNDS.0, builtin::FQ_MIN]),
            Some(vec![builtin::SOI_BOUNDS.1, builtin::FQ_MAX]),
        )
    } else {
        (None, None, None, None)
    };
    let mut take =
        |field: &str, given: &Option<Vec<f64>>, default: Option<Vec<f64>>, len: usize| match given
            .clone()
            .or(default)
        {
            Some(v) => errors.check_len(field, &v, len).then_some(v),
            None => {
                errors.push(field, "required for inline models");
                None
            }
        };
    let state_lower = take("constraints.state_lower", &cons.state_lower, def_sl, n);
    let state_upper = take("constraints.state_upper", &cons.state_upper, def_su, n);
    let input_lower = take("constraints.input_lower", &cons.input_lower, def_il, m);
    let input_upper = take("constraints.input_upper", &cons.input_upper, def_iu, m);
    let mut empty_sets = false;
    let mut states = None;
    let mut inputs = None;
    if let (Some(lo), Some(hi)) = (&state_lower, &state_upper) {
        if parts.state_offset.len() == n {
            states = deviation_box(
                &mut errors,
                "constraints.state_lower/state_upper",
                lo,
                hi,
                &parts.state_offset,
                allow_empty_sets,
            );
            empty_sets |= states.is_none();
        }
    }
    if let (Some(lo), Some(hi)) = (&input_lower, &input_upper) {
        if parts.input_offset.len() == m {
            inputs = deviation_box(
                &mut errors,
                "constraints.input_lower/input_upper",
                lo,
                hi,
                &parts.input_offset,
                allow_empty_sets,
            );
            empty_sets |= inputs.is_none();
        }
    }

    // Controller and terminal set.
    let ps = file.pssc.clone().unwrap_or_default();
    let horizon = ps.horizon.unwrap_or(5);
    if horizon < 1 {
        errors.push("pssc.horizon", "must be at least 1");
    }
    let lambda_offset = ps.lambda_offset.unwrap_or(100.0);
    if !(lambda_offset.is_finite() && lambda_offset >= 0.0) {
        errors.push("pssc.lambda_offset", "must be finite and non-negative");
    }
    let max_qp = ps.max_qp_iterations.unwrap_or(2000);
    if max_qp < 1 {
        errors.push("pssc.max_qp_iterations", "must be at least 1");
    }
    let inv = file.invariant_set.clone().unwrap_or_default();
    let lambda = inv.lambda.unwrap_or(1.0);
    if !(lambda > 0.0 && lambda <= 1.0) {
        errors.push("invariant_set.lambda", "must lie in (0, 1]");
    }
    let max_iterations = inv.max_iterations.unwrap_or(500);
    if max_iterations < 1 {
        errors.push("invariant_set.max_iterations", "must be at least 1");
    }

    // Reference.
    let breakpoints = file
        .reference
        .as_ref()
        .and_then(|r| r.breakpoints.clone())
        .unwrap_or_default();
    let mut reference = Vec::new();
    if breakpoints.is_empty() {
        errors.push(
            "reference.breakpoints",
            "at least one breakpoint is required",
        );
    }
    for (i, row) in breakpoints.iter().enumerate() {
        if row.len() != m + 1 {
            errors.push(
                "reference.breakpoints",
                format!(
                    "row {i}: expected [cycle, {m} values], found {} entries",
                    row.len()
                ),
            );
            continue;
        }
        let cycle = row[0];
        if !(cycle >= 0.0 && cycle.fract() == 0.0 && cycle < 1e9) {
            errors.push(
                "reference.breakpoints",
                format!("row {i}: cycle must be a non-negative integer"),
            );
            continue;
        }
        if row[1..].iter().any(|v| !v.is_finite()) {
            errors.push(
                "reference.breakpoints",
                format!("row {i}: values must be finite"),
            );
            continue;
        }
        reference.push((cycle as usize, DVector::from_column_slice(&row[1..])));
    }
    if let Some((first, _)) = reference.first() {
        if *first != 0 {
            errors.push(
                "reference.breakpoints",
                "the first breakpoint must be at cycle 0",
            );
        }
    }
    if reference.windows(2).any(|w| w[1].0 <= w[0].0) {
        errors.push(
            "reference.breakpoints",
            "cycles must be strictly increasing",
        );
    }

    // Noise and estimation.
    let output_std = file.noise.as_ref().and_then(|s| s.output_std.clone());
    if let Some(std) = &output_std {
        if errors.check_len("noise.output_std", std, m) && std.iter().any(|s| *s < 0.0) {
            errors.push("noise.output_std", "must be non-negative");
        }
    }
    let est = file.estimator.clone().unwrap_or_default();
    let default_kind = if parts.is_rcci {
        "kalman"
    } else {
        "true_state"
    };
    let est_kind = match est.kind.as_deref().unwrap_or(default_kind) {
        "kalman" => Some(EstimatorKind::Kalman),
        "true_state" => Some(EstimatorKind::TrueState),
        other => {
            errors.push(
                "estimator.kind",
                format!("expected \"kalman\" or \"true_state\", found {other:?}"),
            );
            None
        }
    };
    let process_noise_scale = est
        .process_noise_scale
        .unwrap_or(builtin::PROCESS_NOISE_SCALE);
    if !(process_noise_scale.is_finite() && process_noise_scale >= 0.0) {
        errors.push(
            "estimator.process_noise_scale",
            "must be finite and non-negative",
        );
    }
    let measurement_std = est.measurement_std.clone().unwrap_or_else(|| {
        if parts.is_rcci {
            rcci::OUTPUT_NOISE_STD.to_vec()
        } else {
            vec![1.0; m]
        }
    });
    if errors.check_len("estimator.measurement_std", &measurement_std, m)
        && measurement_std.iter().any(|s| *s <= 0.0)
    {
        errors.push("estimator.measurement_std", "must be positive");
    }

    let initial = file
        .initial
        .as_ref()
        .and_then(|i| i.state.clone())
        .unwrap_or_else(|| parts.state_offset.clone());
    errors.check_len("initial.state", &initial, n);

    // The sliding design is cheap and catches alpha lists of the wrong
    // length for the model's relative degrees.
    if let Some(b) = beta
        .as_ref()
        .filter(|_| alpha.len() == m && errors.0.is_empty())
    {
        if let Err(e) = pssc_core::build_sliding_design(&parts.model, &alpha, b) {
            errors.push("sliding", e);
        }
    }

    if !errors.0.is_empty() {
        return Err(CliError::Schema(errors.0));
    }

    let (Some(controller), Some(plant), Some(beta), Some(est_kind)) =
        (controller, plant, beta, est_kind)
    else {
        unreachable!("errors were reported above");
    };
    let (state_lower, state_upper, input_lower, input_upper) = (
        state_lower.expect("validated"),
        state_upper.expect("validated"),
        input_lower.expect("validated"),
        input_upper.expect("validated"),
    );
    let sets = ConstraintSets::new(
        states.unwrap_or_else(|| Polyhedron::empty(n)),
        inputs.unwrap_or_else(|| Polyhedron::empty(m)),
    );
    let half_widths: Vec<f64> = state_lower
        .iter()
        .zip(&state_upper)
        .map(|(l, u)| (u - l) / 2.0)
        .collect();
    let estimator = match est_kind {
        EstimatorKind::Kalman => {
            builtin::kalman_estimator(process_noise_scale, &half_widths, &measurement_std)
        }
        EstimatorKind::TrueState => EstimatorConfig::true_state(n, m),
    };
    let state_offset = DVector::from_column_slice(&parts.state_offset);
    let seed = file.seed.unwrap_or(0);
    let record_solve_time = file.record_solve_time.unwrap_or(false);
    let config = SimConfig {
        name: name.clone(),
        model: parts.model.clone(),
        initial_state: DVector::from_column_slice(&initial) - &state_offset,
        state_offset,
        input_offset: DVector::from_column_slice(&parts.input_offset),
        state_names: parts.state_names.clone(),
        input_names: parts.input_names.clone(),
        output_names: parts.output_names.clone(),
        alpha: alpha.clone(),
        beta,
        sets,
        pssc: PsscConfig {
            horizon: horizon as usize,
            lambda_offset,
            qp: pssc_core::qp::QpOptions {
                max_iterations: max_qp as usize,
            },
            invariant: InvariantSetConfig {
                lambda,
                max_iterations: max_iterations as usize,
                ..Default::default()
            },
        },
        controller,
        plant,
        operating_point: parts.operating_point,
        cycles: cycles as usize,
        reference,
        output_noise_std: output_std.as_ref().map(|s| DVector::from_column_slice(s)),
        estimator,
        seed,
        record_solve_time,
    };

    let resolved_file = ScenarioFile {
        name: Some(name),
        cycles: Some(cycles),
        controller: Some(controller_name(controller).into()),
        plant: Some(plant.as_str().into()),
        seed: Some(seed),
        record_solve_time: Some(record_solve_time),
        model: Some(if parts.is_rcci {
            ModelSection {
                kind: Some("rcci".into()),
                ..Default::default()
            }
        } else {
            let rows = |mat: &DMatrix<f64>| {
                (0..mat.nrows())
                    .map(|i| mat.row(i).iter().copied().collect())
                    .collect()
            };
            ModelSection {
                kind: Some("inline".into()),
                a: Some(rows(parts.model.a())),
                b: Some(rows(parts.model.b())),
                c: Some(rows(parts.model.c())),
                state_names: Some(parts.state_names),
                input_names: Some(parts.input_names),
                output_names: Some(parts.output_names),
                state_offset: Some(parts.state_offset),
                input_offset: Some(parts.input_offset),
            }
        }),
        operating_point: parts.operating_point.map(|op| OperatingPointSection {
            premixed_ratio: Some(op.premixed_ratio),
            intake_temperature: Some(op.intake_temperature),
            intake_pressure: Some(op.intake_pressure),
            engine_speed: Some(op.engine_speed),
        }),
        sliding: Some(SlidingSection {
            alpha: Some(alpha),
            beta: Some(beta_rows),
        }),
        constraints: Some(ConstraintsSection {
            state_lower: Some(state_lower),
            state_upper: Some(state_upper),
            input_lower: Some(input_lower),
            input_upper: Some(input_upper),
        }),
        pssc: Some(PsscSection {
            horizon: Some(horizon),
            lambda_offset: Some(lambda_offset),
            max_qp_iterations: Some(max_qp),
        }),
        invariant_set: Some(InvariantSetSection {
            lambda: Some(lambda),
            max_iterations: Some(max_iterations),
        }),
        reference: Some(ReferenceSection {
            breakpoints: Some(breakpoints),
        }),
        noise: output_std.map(|s| NoiseSection {
            output_std: Some(s),
        }),
        estimator: Some(EstimatorSection {
            kind: Some(
                match est_kind {
                    EstimatorKind::Kalman => "kalman",
                    EstimatorKind::TrueState => "true_state",
                }
                .into(),
            ),
            process_noise_scale: Some(process_noise_scale),
            measurement_std: Some(measurement_std),
        }),
        initial: Some(InitialSection {
            state: Some(initial),
        }),
    };
    Ok(Resolved {
        file: resolved_file,
        config,
        empty_sets,
    })
}

pub fn controller_name(kind: ControllerKind) -> &'static str {
    kind.as_str()
}
