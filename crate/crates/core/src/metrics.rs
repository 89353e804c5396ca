//! Accuracy against the exact HHH set, and update throughput.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::config::SketchConfig;
use crate::error::{Error, Result};
use crate::oracle::{AnySketch, HhhTruth};
use crate::probe::NoProbe;
use crate::report::HhhReport;
use crate::traces::PacketRecord;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct AccuracyResult {
    pub precision: f64,
    pub recall: f64,
    /// Mean `|Ŝ − S| / S` over true HHHs that were reported.
    pub relative_error: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores a report against the truth. Keys must match exactly, prefix
/// length included.
pub fn accuracy(report: &HhhReport, truth: &HhhTruth) -> Result<AccuracyResult> {
    if report.spec != truth.spec {
        return Err(Error::SpecMismatch);
    }
    let mut tp = 0;
    let mut err_sum = 0.0;
    let mut seen = std::collections::HashSet::new();
    for e in &report.entries {
        if !seen.insert(e.key) {
            continue;
        }
        if let Some(t) = truth.get(&e.key) {
            tp += 1;
            if t.count > 0 {
                err_sum += (e.count as f64 - t.count as f64).abs() / t.count as f64;
            }
        }
    }
    let fp = seen.len() - tp;
    let fn_ = truth.entries.len() - tp;
    Ok(AccuracyResult {
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        relative_error: if tp == 0 { 0.0 } else { err_sum / tp as f64 },
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    })
}

/// Element-wise mean of several results; counts are summed.
pub fn average(results: &[AccuracyResult]) -> AccuracyResult {
    if results.is_empty() {
        return AccuracyResult {
            precision: 1.0,
            recall: 1.0,
            ..Default::default()
        };
    }
    let n = results.len() as f64;
    AccuracyResult {
        precision: results.iter().map(|r| r.precision).sum::<f64>() / n,
        recall: results.iter().map(|r| r.recall).sum::<f64>() / n,
        relative_error: results.iter().map(|r| r.relative_error).sum::<f64>() / n,
        true_positives: results.iter().map(|r| r.true_positives).sum(),
        false_positives: results.iter().map(|r| r.false_positives).sum(),
        false_negatives: results.iter().map(|r| r.false_negatives).sum(),
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Throughput {
    /// Million updates per second, one per repetition.
    pub samples: Vec<f64>,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    /// Median Detect time over repetitions.
    pub detect_seconds: f64,
    pub mean_traversed: f64,
}

/// Times `reps` full update passes over an in-memory trace on fresh
/// sketches, Detect excluded. `None` for an empty trace.
pub fn throughput(
    config: &SketchConfig,
    records: &[PacketRecord],
    reps: usize,
    threshold: u64,
) -> Result<Option<Throughput>> {
    if records.is_empty() || reps == 0 {
        return Ok(None);
    }
    let mut samples = Vec::with_capacity(reps);
    let mut detects = Vec::with_capacity(reps);
    let mut mean_traversed = 0.0;
    for _ in 0..reps {
        let mut sketch = AnySketch::new(config.clone())?;
        let elapsed = time_updates(&mut sketch, records);
        samples.push(records.len() as f64 / elapsed.as_secs_f64().max(1e-12) / 1e6);
        mean_traversed = sketch.as_dyn().traversal_stats().mean();
        let start = Instant::now();
        std::hint::black_box(sketch.detect_probed(threshold, &mut NoProbe)?);
        detects.push(start.elapsed().as_secs_f64());
    }
    let mut sorted = samples.clone();
    Ok(Some(Throughput {
        min: samples.iter().copied().fold(f64::INFINITY, f64::min),
        max: samples.iter().copied().fold(0.0, f64::max),
        median: median(&mut sorted),
        detect_seconds: median(&mut detects),
        samples,
        mean_traversed,
    }))
}

fn time_updates(sketch: &mut AnySketch, records: &[PacketRecord]) -> Duration {
    let start = Instant::now();
    match sketch {
        AnySketch::One(s) => {
            for r in records {
                s.update(r.src, r.value as u64);
            }
        }
        AnySketch::Two(s) => {
            for r in records {
                s.update(r.src, r.dst, r.value as u64);
            }
        }
    }
    let elapsed = start.elapsed();
    std::hint::black_box(&*sketch);
    elapsed
}
