//! Agreement between framework decisions and human labels.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::annotations::TaskInterval;
use crate::interval::Interval;
use crate::metrics::{va_summary_with, FrequencyMode, MetricsError, VAMetrics};
use crate::segmentation::GazeEvent;
use crate::stats::mean_sd;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("prediction and truth lengths differ ({pred} vs {truth})")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("no frames to score")]
    EmptyInput,
    #[error("need at least {min} items, got {n}")]
    TooSmall { n: usize, min: usize },
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    InvalidRatios((f64, f64, f64)),
    #[error("need at least {k} items for {k}-fold cross-validation, got {n}")]
    TooFewItems { n: usize, k: usize },
    #[error("frame reference {0} appears more than once")]
    DuplicateFrame(u64),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_pairs(pred: &[bool], truth: &[bool]) -> Self {
        let mut c = Confusion::default();
        for (&p, &t) in pred.iter().zip(truth) {
            match (p, t) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Accuracy and F1 with onfocus as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameScores {
    pub accuracy: f64,
    /// Undefined when there are no positive predictions or labels.
    pub f1: Option<f64>,
}

impl From<Confusion> for FrameScores {
    fn from(c: Confusion) -> Self {
        let denom = 2 * c.tp + c.fp + c.fn_;
        FrameScores {
            accuracy: (c.tp + c.tn) as f64 / c.total() as f64,
            f1: (denom > 0).then(|| (2 * c.tp) as f64 / denom as f64),
        }
    }
}

pub fn frame_metrics(pred: &[bool], truth: &[bool]) -> Result<FrameScores, EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            pred: pred.len(),
            truth: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(Confusion::from_pairs(pred, truth).into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

pub const DEFAULT_SPLIT: (f64, f64, f64) = (0.8, 0.1, 0.1);

/// Random train/validation/test partition of `0..n`. Validation and test
/// sizes are the rounded ratios; train takes the remainder.
pub fn split_dataset(n: usize, ratios: (f64, f64, f64), seed: u64) -> Result<Split, EvalError> {
    if n < 10 {
        return Err(EvalError::TooSmall { n, min: 10 });
    }
    let (tr, va, te) = ratios;
    let ok = [tr, va, te].iter().all(|r| r.is_finite() && *r >= 0.0) && ((tr + va + te) - 1.0).abs() < 1e-9;
    if !ok {
        return Err(EvalError::InvalidRatios(ratios));
    }
    let n_val = (n as f64 * va).round() as usize;
    let n_test = (n as f64 * te).round() as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = idx.split_off(n - n_test);
    let val = idx.split_off(idx.len() - n_val);
    Ok(Split { train: idx, val, test })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledFrame {
    pub frame_index: u64,
    pub onfocus: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledFrameSet {
    items: Vec<LabeledFrame>,
}

impl LabeledFrameSet {
    pub fn new(items: Vec<LabeledFrame>) -> Result<Self, EvalError> {
        let mut seen = std::collections::HashSet::new();
        for it in &items {
            if !seen.insert(it.frame_index) {
                return Err(EvalError::DuplicateFrame(it.frame_index));
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[LabeledFrame] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Deterministic k-fold assignment: `0..n` shuffled with `seed`, then cut
/// into k contiguous folds whose sizes differ by at most one (larger folds first).
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k == 0 || n < k {
        return Err(EvalError::TooFewItems { n, k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub per_fold: Vec<FrameScores>,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    /// Over folds where F1 is defined.
    pub mean_f1: Option<f64>,
    pub sd_f1: Option<f64>,
}

impl AgreementReport {
    pub fn from_folds(per_fold: Vec<FrameScores>) -> Self {
        let acc: Vec<f64> = per_fold.iter().map(|f| f.accuracy).collect();
        let f1: Vec<f64> = per_fold.iter().filter_map(|f| f.f1).collect();
        let (mean_accuracy, sd_accuracy) = mean_sd(&acc);
        let (mean_f1, sd_f1) = mean_sd(&f1);
        AgreementReport {
            per_fold,
            mean_accuracy: mean_accuracy.unwrap_or(f64::NAN),
            sd_accuracy: sd_accuracy.unwrap_or(0.0),
            mean_f1,
            sd_f1: sd_f1.or(mean_f1.map(|_| 0.0)),
        }
    }
}

/// k-fold cross-validation. `scorer` receives the fold number, the training
/// items and the held-out items and returns the held-out scores.
pub fn cross_validate<F>(items: &LabeledFrameSet, k: usize, seed: u64, mut scorer: F) -> Result<AgreementReport, EvalError>
where
    F: FnMut(usize, &[LabeledFrame], &[LabeledFrame]) -> FrameScores,
{
    let folds = kfold_indices(items.len(), k, seed)?;
    let mut per_fold = Vec::with_capacity(k);
    for (f, held) in folds.iter().enumerate() {
        let mut in_test = vec![false; items.len()];
        for &i in held {
            in_test[i] = true;
        }
        let test: Vec<LabeledFrame> = held.iter().map(|&i| items.items[i]).collect();
        let train: Vec<LabeledFrame> = (0..items.len()).filter(|&i| !in_test[i]).map(|i| items.items[i]).collect();
        per_fold.push(scorer(f, &train, &test));
    }
    Ok(AgreementReport::from_folds(per_fold))
}

/// One row of the onfocus detection summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRow {
    pub model: String,
    pub dataset: String,
    pub report: AgreementReport,
}

pub const TABLE1_HEADER: &str = "model,dataset,accuracy,f1_score";

fn pct_cell(mean: f64, sd: f64) -> String {
    format!("{:.2}% ± {:.2}%", 100.0 * mean, 100.0 * sd)
}

fn f1_cell(mean: Option<f64>, sd: Option<f64>) -> String {
    match (mean, sd) {
        (Some(m), Some(s)) => format!("{m:.2} ± {s:.2}"),
        _ => "n/a".to_string(),
    }
}

/// CSV rows: `model,dataset,accuracy,f1_score`, cells formatted as
/// `89.22% ± 1.26%` and `0.87 ± 0.02`.
pub fn table1_csv(rows: &[ModelRow]) -> String {
    let mut out = String::from(TABLE1_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            csv_field(&r.model),
            csv_field(&r.dataset),
            pct_cell(r.report.mean_accuracy, r.report.sd_accuracy),
            f1_cell(r.report.mean_f1, r.report.sd_f1)
        );
    }
    out
}

/// Aligned plain-text rendering of the same table.
pub fn table1_text(rows: &[ModelRow]) -> String {
    let header = ["Model", "Dataset", "Accuracy", "F1-Score"];
    let body: Vec<[String; 4]> = rows
        .iter()
        .map(|r| {
            [
                r.model.clone(),
                r.dataset.clone(),
                pct_cell(r.report.mean_accuracy, r.report.sd_accuracy),
                f1_cell(r.report.mean_f1, r.report.sd_f1),
            ]
        })
        .collect();
    crate::report::aligned_table(&header, &body)
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricDeltas {
    pub frequency_per_5min: f64,
    pub mean_duration_s: Option<f64>,
    pub total_time_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossReference {
    pub framework: VAMetrics,
    pub human: VAMetrics,
    /// Framework minus human.
    pub delta: MetricDeltas,
}

/// Summarizes framework gaze events and human-labeled monitor interactions
/// over the same phase.
pub fn cross_reference(
    framework_events: &[GazeEvent],
    human_events: &[TaskInterval],
    phase: Interval,
    mode: FrequencyMode,
) -> Result<CrossReference, EvalError> {
    let human: Vec<GazeEvent> = human_events.iter().map(|t| GazeEvent::from_interval(t.interval)).collect();
    let framework = va_summary_with(framework_events, phase, mode)?;
    let human = va_summary_with(&human, phase, mode)?;
    let delta = MetricDeltas {
        frequency_per_5min: framework.frequency_per_5min - human.frequency_per_5min,
        mean_duration_s: framework.mean_duration_s.zip(human.mean_duration_s).map(|(a, b)| a - b),
        total_time_pct: framework.total_time_pct - human.total_time_pct,
    };
    Ok(CrossReference { framework, human, delta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_inverted() {
        let truth = [true, false, true, true, false];
        assert_eq!(frame_metrics(&truth, &truth).unwrap(), FrameScores { accuracy: 1.0, f1: Some(1.0) });
        let inv: Vec<bool> = truth.iter().map(|b| !b).collect();
        assert_eq!(frame_metrics(&inv, &truth).unwrap(), FrameScores { accuracy: 0.0, f1: Some(0.0) });
    }

    #[test]
    fn one_of_each_cell() {
        let s = frame_metrics(&[true, true, false, false], &[true, false, true, false]).unwrap();
        assert_eq!(s, FrameScores { accuracy: 0.5, f1: Some(0.5) });
    }

    #[test]
    fn f1_undefined_without_positives() {
        assert_eq!(frame_metrics(&[false, false], &[false, false]).unwrap().f1, None);
        assert_eq!(frame_metrics(&[], &[]), Err(EvalError::EmptyInput));
        assert!(matches!(frame_metrics(&[true], &[]), Err(EvalError::LengthMismatch { .. })));
    }

    #[test]
    fn split_sizes() {
        let s = split_dataset(100, DEFAULT_SPLIT, 7).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (80, 10, 10));
        let s = split_dataset(103, DEFAULT_SPLIT, 7).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (83, 10, 10));
        assert_eq!(split_dataset(103, DEFAULT_SPLIT, 7).unwrap(), s);
        assert_ne!(split_dataset(103, DEFAULT_SPLIT, 8).unwrap(), s);
        assert!(matches!(split_dataset(9, DEFAULT_SPLIT, 7), Err(EvalError::TooSmall { .. })));
        assert!(matches!(split_dataset(50, (0.5, 0.1, 0.1), 7), Err(EvalError::InvalidRatios(_))));
    }

    #[test]
    fn split_is_a_partition() {
        let s = split_dataset(57, DEFAULT_SPLIT, 1).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..57).collect::<Vec<_>>());
    }

    fn items(n: usize) -> LabeledFrameSet {
        LabeledFrameSet::new((0..n as u64).map(|i| LabeledFrame { frame_index: i, onfocus: i % 3 == 0 }).collect())
            .unwrap()
    }

    #[test]
    fn ten_items_five_folds() {
        let mut sizes = Vec::new();
        let report = cross_validate(&items(10), 5, 0, |_, train, test| {
            sizes.push((train.len(), test.len()));
            FrameScores { accuracy: 0.9, f1: Some(0.9) }
        })
        .unwrap();
        assert_eq!(sizes, vec![(8, 2); 5]);
        assert_eq!(report.mean_accuracy, 0.9);
        assert_eq!(report.sd_accuracy, 0.0);
        assert_eq!(report.per_fold.len(), 5);
    }

    #[test]
    fn too_few_items_and_duplicates() {
        assert!(matches!(
            cross_validate(&items(3), 5, 0, |_, _, _| FrameScores { accuracy: 1.0, f1: None }),
            Err(EvalError::TooFewItems { n: 3, k: 5 })
        ));
        let dup = vec![LabeledFrame { frame_index: 1, onfocus: true }; 2];
        assert_eq!(LabeledFrameSet::new(dup), Err(EvalError::DuplicateFrame(1)));
    }

    #[test]
    fn table1_formatting() {
        let report = AgreementReport {
            per_fold: vec![],
            mean_accuracy: 0.8922,
            sd_accuracy: 0.0126,
            mean_f1: Some(0.87),
            sd_f1: Some(0.02),
        };
        let csv = table1_csv(&[ModelRow {
            model: "Complete pipeline".into(),
            dataset: "Medical simulations".into(),
            report,
        }]);
        assert_eq!(csv, "model,dataset,accuracy,f1_score\nComplete pipeline,Medical simulations,89.22% ± 1.26%,0.87 ± 0.02\n");
    }

    fn ev(s: f64, e: f64) -> GazeEvent {
        GazeEvent::from_interval(Interval { start: s, end: e })
    }

    fn task(s: f64, e: f64) -> TaskInterval {
        TaskInterval {
            behavior: "Monitor interaction".into(),
            subject: "p".into(),
            interval: Interval { start: s, end: e },
            modifier: None,
        }
    }

    #[test]
    fn identical_sources_have_zero_deltas() {
        let phase = Interval { start: 0.0, end: 100.0 };
        let x = cross_reference(&[ev(10.0, 20.0)], &[task(10.0, 20.0)], phase, FrequencyMode::Phase).unwrap();
        assert_eq!(x.delta.frequency_per_5min, 0.0);
        assert_eq!(x.delta.total_time_pct, 0.0);
        assert_eq!(x.delta.mean_duration_s, Some(0.0));
    }

    #[test]
    fn shifted_human_labels_inside_phase() {
        let phase = Interval { start: 0.0, end: 100.0 };
        let x = cross_reference(&[ev(10.0, 20.0), ev(40.0, 45.0)], &[task(10.1, 20.1), task(40.1, 45.1)], phase, FrequencyMode::Phase)
            .unwrap();
        assert_eq!(x.delta.frequency_per_5min, 0.0);
        assert!(x.delta.total_time_pct.abs() < 1e-9);
    }
}
