//! Binary onfocus series to gaze events.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::Interval;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentationError {
    #[error("{name} = {value} must be finite and non-negative")]
    InvalidConfig { name: &'static str, value: f64 },
    #[error("sample {index}: timestamps must be strictly increasing")]
    NonMonotonic { index: usize },
    #[error("fps_nominal must be positive, got {0}")]
    InvalidFps(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub value: bool,
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinarySeries {
    pub samples: Vec<Sample>,
    pub fps_nominal: f64,
}

impl BinarySeries {
    pub fn from_values(timestamps: &[f64], values: &[bool], fps_nominal: f64) -> Result<Self, SegmentationError> {
        assert_eq!(timestamps.len(), values.len(), "timestamps and values differ in length");
        let series = BinarySeries {
            samples: timestamps
                .iter()
                .zip(values)
                .map(|(&t, &value)| Sample { t, value, confidence: None })
                .collect(),
            fps_nominal,
        };
        series.check()?;
        Ok(series)
    }

    pub fn check(&self) -> Result<(), SegmentationError> {
        if !(self.fps_nominal.is_finite() && self.fps_nominal > 0.0) {
            return Err(SegmentationError::InvalidFps(self.fps_nominal));
        }
        match self.samples.windows(2).position(|w| !(w[1].t > w[0].t)) {
            Some(i) => Err(SegmentationError::NonMonotonic { index: i + 1 }),
            None => Ok(()),
        }
    }

    pub fn period(&self) -> f64 {
        1.0 / self.fps_nominal
    }

    pub fn values(&self) -> impl Iterator<Item = bool> + '_ {
        self.samples.iter().map(|s| s.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegConfig {
    /// Events separated by at most this many seconds are merged.
    pub max_gap: f64,
    /// Merged events shorter than this are dropped.
    pub min_duration: f64,
}

impl Default for SegConfig {
    fn default() -> Self {
        Self {
            max_gap: 0.25,
            min_duration: 0.30,
        }
    }
}

impl SegConfig {
    pub const RAW: SegConfig = SegConfig {
        max_gap: 0.0,
        min_duration: 0.0,
    };

    pub fn validate(&self) -> Result<(), SegmentationError> {
        for (name, value) in [("max_gap", self.max_gap), ("min_duration", self.min_duration)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(SegmentationError::InvalidConfig { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazeEvent {
    pub interval: Interval,
    /// Onfocus samples inside the event (merged-over gap samples excluded).
    pub n_frames: usize,
    pub mean_confidence: Option<f64>,
}

impl GazeEvent {
    pub fn duration(&self) -> f64 {
        self.interval.duration()
    }

    /// Event without per-frame provenance, e.g. from a synthetic truth timeline.
    pub fn from_interval(interval: Interval) -> Self {
        GazeEvent {
            interval,
            n_frames: 1,
            mean_confidence: None,
        }
    }
}

/// Working event: sample index range plus time bounds.
struct Span {
    first: usize,
    last: usize,
    start: f64,
    end: f64,
}

/// Segments a binary series into gaze events.
///
/// Each maximal run of true samples becomes `[first t, last t + 1/fps)`, with
/// the end clamped to the next sample's timestamp so runs never overlap the
/// following sample. Runs whose gap is at most `max_gap` are merged, then
/// merged events shorter than `min_duration` are dropped.
pub fn segment(s: &BinarySeries, c: &SegConfig) -> Vec<GazeEvent> {
    let period = s.period();
    let samples = &s.samples;

    let mut spans: Vec<Span> = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        if !samples[i].value {
            i += 1;
            continue;
        }
        let first = i;
        while i + 1 < samples.len() && samples[i + 1].value {
            i += 1;
        }
        let mut end = samples[i].t + period;
        if let Some(next) = samples.get(i + 1) {
            end = end.min(next.t);
        }
        let span = Span {
            first,
            last: i,
            start: samples[first].t,
            end,
        };
        match spans.last_mut() {
            Some(prev) if span.start - prev.end <= c.max_gap => {
                prev.last = span.last;
                prev.end = prev.end.max(span.end);
            }
            _ => spans.push(span),
        }
        i += 1;
    }

    spans
        .into_iter()
        .filter(|sp| sp.end - sp.start >= c.min_duration)
        .map(|sp| {
            let on = &samples[sp.first..=sp.last];
            let n_frames = on.iter().filter(|x| x.value).count();
            let (sum, count) = on
                .iter()
                .filter(|x| x.value)
                .filter_map(|x| x.confidence)
                .fold((0.0, 0usize), |(s, n), c| (s + c, n + 1));
            GazeEvent {
                interval: Interval {
                    start: sp.start,
                    end: sp.end,
                },
                n_frames,
                mean_confidence: (count > 0).then(|| sum / count as f64),
            }
        })
        .collect()
}

/// Marks each timestamp true when it falls inside one of the events.
pub fn rasterize(events: &[GazeEvent], timestamps: &[f64], fps_nominal: f64) -> BinarySeries {
    let mut k = 0;
    let samples = timestamps
        .iter()
        .map(|&t| {
            while k < events.len() && events[k].interval.end <= t {
                k += 1;
            }
            let value = events.get(k).is_some_and(|e| e.interval.contains(t));
            Sample { t, value, confidence: None }
        })
        .collect();
    BinarySeries { samples, fps_nominal }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesStats {
    pub count: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation; undefined below two events.
    pub sd: Option<f64>,
    pub total: f64,
}

pub fn series_stats(events: &[GazeEvent]) -> SeriesStats {
    let durations: Vec<f64> = events.iter().map(GazeEvent::duration).collect();
    let (mean, sd) = crate::stats::mean_sd(&durations);
    SeriesStats {
        count: durations.len(),
        mean,
        sd,
        total: durations.iter().sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[bool], fps: f64) -> BinarySeries {
        let ts: Vec<f64> = (0..values.len()).map(|i| i as f64 / fps).collect();
        BinarySeries::from_values(&ts, values, fps).unwrap()
    }

    #[test]
    fn all_false_gives_nothing() {
        assert!(segment(&series(&[false; 50], 25.0), &SegConfig::default()).is_empty());
    }

    #[test]
    fn full_run_spans_five_seconds() {
        let ev = segment(&series(&[true; 125], 25.0), &SegConfig::default());
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].interval.start, 0.0);
        assert!((ev[0].interval.end - 5.0).abs() < 1e-12);
        assert_eq!(ev[0].n_frames, 125);
    }

    #[test]
    fn short_gap_is_merged() {
        // [0, 1.0) true, 5 false frames (0.2 s), [1.2, 2.0) true.
        let mut v = vec![true; 25];
        v.extend([false; 5]);
        v.extend([true; 20]);
        let ev = segment(&series(&v, 25.0), &SegConfig { max_gap: 0.25, min_duration: 0.0 });
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].interval.start, 0.0);
        assert!((ev[0].interval.end - 2.0).abs() < 1e-12);
        assert_eq!(ev[0].n_frames, 45);

        let split = segment(&series(&v, 25.0), &SegConfig { max_gap: 0.1, min_duration: 0.0 });
        assert_eq!(split.len(), 2);
    }

    #[test]
    fn single_frame_filtered() {
        let mut v = vec![false; 20];
        v[10] = true;
        assert!(segment(&series(&v, 25.0), &SegConfig { max_gap: 0.25, min_duration: 0.30 }).is_empty());
        assert_eq!(segment(&series(&v, 25.0), &SegConfig::RAW).len(), 1);
    }

    #[test]
    fn end_clamped_to_next_sample() {
        let s = BinarySeries::from_values(&[0.0, 0.01, 0.02], &[true, false, true], 25.0).unwrap();
        let ev = segment(&s, &SegConfig::RAW);
        assert_eq!(ev[0].interval.end, 0.01);
        assert_eq!(ev.len(), 2);
    }

    #[test]
    fn mean_confidence_over_onfocus_samples() {
        let mut s = series(&[true, true, false, true], 25.0);
        for (x, c) in s.samples.iter_mut().zip([0.8, 0.9, 0.1, 1.0]) {
            x.confidence = Some(c);
        }
        let ev = segment(&s, &SegConfig { max_gap: 0.1, min_duration: 0.0 });
        assert_eq!(ev.len(), 1);
        assert!((ev[0].mean_confidence.unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn stats_examples() {
        let ev = |d: f64| GazeEvent::from_interval(Interval { start: 0.0, end: d });
        let st = series_stats(&[ev(4.0), ev(5.0), ev(6.0)]);
        assert_eq!((st.count, st.mean, st.sd, st.total), (3, Some(5.0), Some(1.0), 15.0));
        let st = series_stats(&[ev(2.0)]);
        assert_eq!((st.count, st.mean, st.sd, st.total), (1, Some(2.0), None, 2.0));
        let st = series_stats(&[]);
        assert_eq!((st.count, st.mean, st.sd, st.total), (0, None, None, 0.0));
    }

    #[test]
    fn rejects_non_monotonic() {
        assert_eq!(
            BinarySeries::from_values(&[0.0, 0.0], &[true, true], 25.0),
            Err(SegmentationError::NonMonotonic { index: 1 })
        );
        assert!(SegConfig { max_gap: -1.0, min_duration: 0.0 }.validate().is_err());
    }
}
