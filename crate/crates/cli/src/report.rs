//! Human- and machine-readable metrics reports.

use std::fmt::Write as _;

use pssc_core::plant::metrics::SeriesMetrics;
use pssc_core::{SimTrace, TraceMetrics};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputReport {
    pub name: String,
    pub overshoot: f64,
    pub overshoot_relative: f64,
    /// Largest per-segment steady-state error.
    pub steady_state_error: f64,
    pub segment_steady_state_errors: Vec<f64>,
    pub mean_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputSaturation {
    pub name: String,
    pub cycles: usize,
}

/// Content of `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub controller: String,
    pub plant: String,
    pub seed: u64,
    pub cycles: usize,
    pub saturation_cycles: usize,
    pub saturation_per_input: Vec<InputSaturation>,
    pub fallback_cycles: usize,
    pub iter_limit_cycles: usize,
    pub outputs: Vec<OutputReport>,
}

fn output_report(name: &str, s: &SeriesMetrics) -> OutputReport {
    OutputReport {
        name: name.to_string(),
        overshoot: s.overshoot,
        overshoot_relative: s.overshoot_relative,
        steady_state_error: s.steady_state_error(),
        segment_steady_state_errors: s.segment_steady_state_errors.clone(),
        mean_abs_error: s.mean_abs_error,
    }
}

impl MetricsReport {
    pub fn new(trace: &SimTrace, metrics: &TraceMetrics) -> Self {
        Self {
            scenario: trace.name.clone(),
            controller: trace.controller.as_str().into(),
            plant: trace.plant.as_str().into(),
            seed: trace.seed,
            cycles: metrics.cycles,
            saturation_cycles: metrics.saturation_cycles,
            saturation_per_input: metrics
                .saturation_per_input
                .iter()
                .map(|(name, cycles)| InputSaturation {
                    name: name.clone(),
                    cycles: *cycles,
                })
                .collect(),
            fallback_cycles: metrics.fallback_cycles,
            iter_limit_cycles: metrics.iter_limit_cycles,
            outputs: metrics
                .outputs
                .iter()
                .map(|o| output_report(&o.name, &o.series))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario    {}", self.scenario);
        let _ = writeln!(out, "controller  {}", self.controller);
        let _ = writeln!(out, "plant       {}", self.plant);
        let _ = writeln!(out, "seed        {}", self.seed);
        let _ = writeln!(out, "cycles      {}", self.cycles);
        let _ = writeln!(out);
        for o in &self.outputs {
            let _ = writeln!(out, "{}", o.name);
            let _ = writeln!(out, "  overshoot           {:.6}", o.overshoot);
            let _ = writeln!(out, "  overshoot relative  {:.6}", o.overshoot_relative);
            let _ = writeln!(out, "  steady-state error  {:.6}", o.steady_state_error);
            let _ = writeln!(out, "  mean |error|        {:.6}", o.mean_abs_error);
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "saturation cycles   {}", self.saturation_cycles);
        for s in &self.saturation_per_input {
            let _ = writeln!(out, "  {:<18}{}", s.name, s.cycles);
        }
        let _ = writeln!(out, "fallback cycles     {}", self.fallback_cycles);
        let _ = writeln!(out, "iter-limit cycles   {}", self.iter_limit_cycles);
        out
    }
}

/// Content of `comparison.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub seed: u64,
    pub runs: Vec<MetricsReport>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Side-by-side table, one column per run.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<(String, Vec<String>)> = vec![(
            "saturation cycles".into(),
            self.runs
                .iter()
                .map(|r| r.saturation_cycles.to_string())
                .collect(),
        )];
        if let Some(first) = self.runs.first() {
            for (i, o) in first.outputs.iter().enumerate() {
                let col = |f: fn(&OutputReport) -> f64| -> Vec<String> {
                    self.runs
                        .iter()
                        .map(|r| format!("{:.6}", f(&r.outputs[i])))
                        .collect()
                };
                rows.push((format!("{} overshoot", o.name), col(|o| o.overshoot)));
                rows.push((
                    format!("{} overshoot relative", o.name),
                    col(|o| o.overshoot_relative),
                ));
                rows.push((
                    format!("{} steady-state error", o.name),
                    col(|o| o.steady_state_error),
                ));
                rows.push((
                    format!("{} mean |error|", o.name),
                    col(|o| o.mean_abs_error),
                ));
            }
        }
        rows.push((
            "fallback cycles".into(),
            self.runs
                .iter()
                .map(|r| r.fallback_cycles.to_string())
                .collect(),
        ));
        let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(6);
        let mut out = String::new();
        let _ = writeln!(out, "scenario {}  seed {}", self.scenario, self.seed);
        let _ = write!(out, "{:<label_width$}", "metric");
        for r in &self.runs {
            let _ = write!(out, "  {:>14}", r.controller);
        }
        let _ = writeln!(out);
        for (label, values) in rows {
            let _ = write!(out, "{label:<label_width$}");
            for v in values {
                let _ = write!(out, "  {v:>14}");
            }
            let _ = writeln!(out);
        }
        out
    }
}
