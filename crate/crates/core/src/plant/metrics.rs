//! Tracking metrics of a closed-loop trace.

use crate::plant::sim::SimTrace;
use crate::pssc::StepStatus;

/// Fraction of each reference segment, counted from its end, used for the
/// steady-state error.
pub const STEADY_STATE_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMetrics {
    /// Largest excursion past the new setpoint over all segments.
    pub overshoot: f64,
    /// Overshoot divided by the step size, largest over all segments.
    pub overshoot_relative: f64,
    /// Mean absolute error over the tail of each segment.
    pub segment_steady_state_errors: Vec<f64>,
    pub mean_abs_error: f64,
}

impl SeriesMetrics {
    /// Largest per-segment steady-state error.
    pub fn steady_state_error(&self) -> f64 {
        self.segment_steady_state_errors
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputMetrics {
    pub name: String,
    pub series: SeriesMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMetrics {
    pub cycles: usize,
    pub outputs: Vec<OutputMetrics>,
    /// Cycles where at least one input was clipped.
    pub saturation_cycles: usize,
    pub saturation_per_input: Vec<(String, usize)>,
    pub fallback_cycles: usize,
    pub iter_limit_cycles: usize,
}

impl TraceMetrics {
    pub fn output(&self, name: &str) -> Option<&SeriesMetrics> {
        self.outputs
            .iter()
            .find(|o| o.name == name)
            .map(|o| &o.series)
    }
}

/// Segment boundaries `[start, end)` where the reference is constant.
pub fn segments(reference: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=reference.len() {
        if k == reference.len() || reference[k] != reference[start] {
            out.push((start, k));
            start = k;
        }
    }
    out
}

/// Metrics of a single output `y` against its reference `r`.
///
/// Overshoot in a segment is measured in the direction from the output at
/// the segment start toward the segment's setpoint; segments that start on
/// the setpoint contribute none.
pub fn series_metrics(y: &[f64], r: &[f64]) -> SeriesMetrics {
    assert_eq!(y.len(), r.len(), "output and reference lengths differ");
    let mut overshoot: f64 = 0.0;
    let mut overshoot_relative: f64 = 0.0;
    let mut ss = Vec::new();
    for (start, end) in segments(r) {
        let target = r[start];
        let step = target - y[start];
        if step.abs() > 1e-12 {
            let dir = step.signum();
            let past = y[start..end]
                .iter()
                .map(|v| dir * (v - target))
                .fold(0.0, f64::max);
            overshoot = overshoot.max(past);
            overshoot_relative = overshoot_relative.max(past / step.abs());
        }
        let len = end - start;
        let tail = ((len as f64 * STEADY_STATE_FRACTION).ceil() as usize).clamp(1, len);
        let err = y[end - tail..end]
            .iter()
            .map(|v| (v - target).abs())
            .sum::<f64>()
            / tail as f64;
        ss.push(err);
    }
    let mean_abs_error = if y.is_empty() {
        0.0
    } else {
        y.iter().zip(r).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64
    };
    SeriesMetrics {
        overshoot,
        overshoot_relative,
        segment_steady_state_errors: ss,
        mean_abs_error,
    }
}

/// Metrics on the true (noise-free) outputs.
pub fn trace_metrics(trace: &SimTrace) -> TraceMetrics {
    let outputs = trace
        .output_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let y: Vec<f64> = trace.records.iter().map(|r| r.y_true[i]).collect();
            let r: Vec<f64> = trace.records.iter().map(|r| r.y_ref[i]).collect();
            OutputMetrics {
                name: name.clone(),
                series: series_metrics(&y, &r),
            }
        })
        .collect();
    let saturation_per_input = trace
        .input_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let count = trace.records.iter().filter(|r| r.clipped[i]).count();
            (name.clone(), count)
        })
        .collect();
    TraceMetrics {
        cycles: trace.records.len(),
        outputs,
        saturation_cycles: trace
            .records
            .iter()
            .filter(|r| r.clipped.iter().any(|c| *c))
            .count(),
        saturation_per_input,
        fallback_cycles: trace
            .records
            .iter()
            .filter(|r| r.status == StepStatus::Fallback)
            .count(),
        iter_limit_cycles: trace
            .records
            .iter()
            .filter(|r| r.status == StepStatus::IterLimit)
            .count(),
    }
}
