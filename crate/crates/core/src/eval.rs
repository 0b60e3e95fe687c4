//! Error metrics against ground truth and method comparison.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::GroundTruthDisparity;
use crate::error::EvalError;
use crate::matcher::PipelineTrace;
use crate::raster::{is_valid_disparity, DisparityMap};

pub const BAD_THRESHOLDS: [f64; 3] = [1.0, 2.0, 4.0];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub total_evals: u64,
    /// Per level, coarsest first: `(level, trusted fraction)`.
    pub trust_fractions: Vec<(u32, f64)>,
}

impl TraceSummary {
    pub fn from_trace(trace: &PipelineTrace) -> Self {
        Self {
            total_evals: trace.total_evals(),
            trust_fractions: trace
                .levels
                .iter()
                .map(|l| (l.level, l.trust_fraction()))
                .collect(),
        }
    }

    pub fn from_total(total_evals: u64) -> Self {
        Self {
            total_evals,
            trust_fractions: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub bad_1_0: f64,
    pub bad_2_0: f64,
    pub bad_4_0: f64,
    pub avg_abs_err: f64,
    pub evaluated_pixels: u64,
    pub gt_invalid_pixels: u64,
    pub output_invalid_pixels: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metrics: Metrics,
    pub trace: Option<TraceSummary>,
}

#[derive(Default)]
struct Tally {
    evaluated: u64,
    gt_invalid: u64,
    out_invalid: u64,
    bad: [u64; 3],
    err_sum: f64,
}

/// Compares `d * scale` with `gt` on pixels valid in both.
///
/// Percentages are of evaluated pixels; GT-invalid pixels and invalid
/// outputs are excluded and counted separately (a pixel invalid in both
/// counts as GT-invalid).
pub fn evaluate(
    d: &DisparityMap,
    gt: &GroundTruthDisparity,
    scale: f64,
) -> Result<EvalReport, EvalError> {
    if d.dims() != gt.dims() {
        return Err(EvalError::DimensionMismatch {
            disparity: d.dims(),
            ground_truth: gt.dims(),
        });
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(EvalError::BadScale(scale));
    }
    let (w, h) = d.dims();
    let rows: Vec<Tally> = (0..h)
        .into_par_iter()
        .map(|i| {
            let mut t = Tally::default();
            for j in 0..w {
                let Some(truth) = gt.get(i, j) else {
                    t.gt_invalid += 1;
                    continue;
                };
                let v = d.get(i, j);
                if !is_valid_disparity(v) {
                    t.out_invalid += 1;
                    continue;
                }
                let err = (f64::from(v) * scale - f64::from(truth)).abs();
                t.evaluated += 1;
                t.err_sum += err;
                for (slot, tau) in t.bad.iter_mut().zip(BAD_THRESHOLDS) {
                    *slot += u64::from(err > tau);
                }
            }
            t
        })
        .collect();

    // row order is fixed, so the float sum does not depend on scheduling
    let mut total = Tally::default();
    for t in rows {
        total.evaluated += t.evaluated;
        total.gt_invalid += t.gt_invalid;
        total.out_invalid += t.out_invalid;
        total.err_sum += t.err_sum;
        for k in 0..3 {
            total.bad[k] += t.bad[k];
        }
    }
    let pct = |n: u64| {
        if total.evaluated == 0 {
            0.0
        } else {
            100.0 * n as f64 / total.evaluated as f64
        }
    };
    Ok(EvalReport {
        metrics: Metrics {
            bad_1_0: pct(total.bad[0]),
            bad_2_0: pct(total.bad[1]),
            bad_4_0: pct(total.bad[2]),
            avg_abs_err: if total.evaluated == 0 {
                0.0
            } else {
                total.err_sum / total.evaluated as f64
            },
            evaluated_pixels: total.evaluated,
            gt_invalid_pixels: total.gt_invalid,
            output_invalid_pixels: total.out_invalid,
        },
        trace: None,
    })
}

impl EvalReport {
    pub fn with_trace(mut self, trace: TraceSummary) -> Self {
        self.trace = Some(trace);
        self
    }

    /// Flat `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let m = &self.metrics;
        let mut s = String::new();
        let _ = writeln!(s, "bad_1.0={:.6}", m.bad_1_0);
        let _ = writeln!(s, "bad_2.0={:.6}", m.bad_2_0);
        let _ = writeln!(s, "bad_4.0={:.6}", m.bad_4_0);
        let _ = writeln!(s, "avg_abs_err={:.6}", m.avg_abs_err);
        let _ = writeln!(s, "evaluated_pixels={}", m.evaluated_pixels);
        let _ = writeln!(s, "gt_invalid_pixels={}", m.gt_invalid_pixels);
        let _ = writeln!(s, "output_invalid_pixels={}", m.output_invalid_pixels);
        if let Some(t) = &self.trace {
            let _ = writeln!(s, "total_evals={}", t.total_evals);
            for (level, f) in &t.trust_fractions {
                let _ = writeln!(s, "trust_fraction.level{level}={f:.6}");
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    /// `msibm - baseline` for each metric; negative means the hierarchy is better.
    pub delta_bad_1_0: f64,
    pub delta_bad_2_0: f64,
    pub delta_bad_4_0: f64,
    pub delta_avg_abs_err: f64,
    /// Hierarchical evaluations over baseline evaluations, when both are known.
    pub eval_ratio: Option<f64>,
}

pub fn compare(msibm: &EvalReport, baseline: &EvalReport) -> ComparisonSummary {
    let (a, b) = (&msibm.metrics, &baseline.metrics);
    let eval_ratio = match (&msibm.trace, &baseline.trace) {
        (Some(x), Some(y)) if y.total_evals > 0 => Some(x.total_evals as f64 / y.total_evals as f64),
        _ => None,
    };
    ComparisonSummary {
        delta_bad_1_0: a.bad_1_0 - b.bad_1_0,
        delta_bad_2_0: a.bad_2_0 - b.bad_2_0,
        delta_bad_4_0: a.bad_4_0 - b.bad_4_0,
        delta_avg_abs_err: a.avg_abs_err - b.avg_abs_err,
        eval_ratio,
    }
}
