//! Visual-attention summaries over an analysis phase and gaze/task overlap.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotations::TaskInterval;
use crate::interval::{self, Interval};
use crate::segmentation::GazeEvent;
use crate::stats::mean_sd;

pub use crate::stats::{paired_compare, ComparisonResult, PairedTest};

/// Seconds in the frequency normalization window.
pub const FREQUENCY_WINDOW_S: f64 = 300.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("phase [{start}, {end}] has no positive length")]
    EmptyPhase { start: f64, end: f64 },
    #[error("behavior {0:?} has zero labeled task time")]
    ZeroTaskTime(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyMode {
    /// Event count scaled to a 300 s denominator over the whole phase.
    #[default]
    Phase,
    /// Mean count over consecutive full 300 s windows from the phase start.
    /// Falls back to `Phase` when the phase is shorter than one window.
    Window,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VAMetrics {
    pub phase: Interval,
    pub n_events: usize,
    pub frequency_per_5min: f64,
    pub mean_duration_s: Option<f64>,
    pub sd_duration_s: Option<f64>,
    pub total_time_pct: f64,
}

/// Events clipped to `phase`; those with no overlap are dropped.
pub fn clip_events(events: &[GazeEvent], phase: &Interval) -> Vec<Interval> {
    events.iter().filter_map(|e| e.interval.clip(phase)).collect()
}

pub fn va_summary(events: &[GazeEvent], phase: Interval) -> Result<VAMetrics, MetricsError> {
    va_summary_with(events, phase, FrequencyMode::Phase)
}

pub fn va_summary_with(events: &[GazeEvent], phase: Interval, mode: FrequencyMode) -> Result<VAMetrics, MetricsError> {
    let phase_s = phase.duration();
    if !(phase_s > 0.0) {
        return Err(MetricsError::EmptyPhase {
            start: phase.start,
            end: phase.end,
        });
    }
    let clipped = clip_events(events, &phase);
    let durations: Vec<f64> = clipped.iter().map(Interval::duration).collect();
    let (mean, sd) = mean_sd(&durations);
    let covered = interval::union_measure(&clipped);

    let frequency = match mode {
        FrequencyMode::Window if phase_s >= FREQUENCY_WINDOW_S => {
            let windows = (phase_s / FREQUENCY_WINDOW_S).floor() as usize;
            let onsets_in = |w: usize| {
                let lo = phase.start + w as f64 * FREQUENCY_WINDOW_S;
                let hi = lo + FREQUENCY_WINDOW_S;
                clipped.iter().filter(|c| c.start >= lo && c.start < hi).count()
            };
            (0..windows).map(onsets_in).sum::<usize>() as f64 / windows as f64
        }
        _ => clipped.len() as f64 * FREQUENCY_WINDOW_S / phase_s,
    };

    Ok(VAMetrics {
        phase,
        n_events: clipped.len(),
        frequency_per_5min: frequency,
        mean_duration_s: mean,
        sd_duration_s: sd,
        total_time_pct: (100.0 * covered / phase_s).min(100.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapRow {
    pub behavior: String,
    pub task_time_s: f64,
    pub overlap_time_s: f64,
    pub overlap_pct: f64,
}

/// Share of each behavior's labeled time during which a gaze event was
/// active: `100 × |∪events ∩ ∪tasks(b)| / |∪tasks(b)|`. Rows are sorted by
/// behavior name.
pub fn task_overlap(events: &[GazeEvent], tasks: &[TaskInterval]) -> Result<Vec<OverlapRow>, MetricsError> {
    let gaze: Vec<Interval> = events.iter().map(|e| e.interval).collect();
    let mut by_behavior: BTreeMap<&str, Vec<Interval>> = BTreeMap::new();
    for t in tasks {
        by_behavior.entry(t.behavior.as_str()).or_default().push(t.interval);
    }
    by_behavior
        .into_iter()
        .map(|(behavior, spans)| {
            let task_time_s = interval::union_measure(&spans);
            if !(task_time_s > 0.0) {
                return Err(MetricsError::ZeroTaskTime(behavior.to_string()));
            }
            let overlap_time_s = interval::intersection_measure(&gaze, &spans);
            Ok(OverlapRow {
                behavior: behavior.to_string(),
                task_time_s,
                overlap_time_s,
                overlap_pct: 100.0 * overlap_time_s / task_time_s,
            })
        })
        .collect()
}
