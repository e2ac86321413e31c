//! Synthetic sessions with a known gaze and task timeline.
//!
//! A truth timeline of gaze events is placed inside the phase, rendered into
//! model-shaped frame records (confidences kept a fixed margin away from the
//! decision thresholds), and mirrored into an annotation log. Optional label
//! noise flips per-frame outcomes across the thresholds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotations::{write_annotations, AnnotationEvent, EventKind, TaskInterval};
use crate::frame_log::{BBox, FaceObservation, FrameRecord, SessionFrames};
use crate::fusion::{decide_face, decide_frame, Aggregation, FusionConfig, DEFAULT_IN_FRAME_THRESHOLD, DEFAULT_ONFOCUS_THRESHOLD};
use crate::interval::Interval;
use crate::segmentation::GazeEvent;

pub const MONITOR_BEHAVIOR: &str = "Monitor interaction";
pub const PROVIDER_FACE_ID: &str = "provider";

const PLACEMENT_ATTEMPTS: usize = 1000;
const NOISE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("infeasible configuration: {0}")]
    InfeasibleConfig(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Where rendered confidences fall relative to the decision thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceModel {
    pub onfocus_threshold: f64,
    pub in_frame_threshold: f64,
    pub margin: f64,
}

impl Default for ConfidenceModel {
    fn default() -> Self {
        Self {
            onfocus_threshold: DEFAULT_ONFOCUS_THRESHOLD,
            in_frame_threshold: DEFAULT_IN_FRAME_THRESHOLD,
            margin: 0.05,
        }
    }
}

impl ConfidenceModel {
    pub fn fusion_config(&self) -> FusionConfig {
        FusionConfig {
            onfocus_threshold: self.onfocus_threshold,
            in_frame_threshold: self.in_frame_threshold,
            aggregation: Aggregation::AnyFace,
        }
    }

    fn high_confidence(&self, rng: &mut impl Rng) -> f64 {
        rng.random_range(self.onfocus_threshold + self.margin..=1.0)
    }

    fn low_confidence(&self, rng: &mut impl Rng) -> f64 {
        rng.random_range(0.0..=self.onfocus_threshold - self.margin)
    }

    fn outside_attention(&self, rng: &mut impl Rng) -> f64 {
        rng.random_range(0.0..=self.in_frame_threshold - self.margin)
    }

    fn inside_attention(&self, rng: &mut impl Rng) -> f64 {
        rng.random_range(self.in_frame_threshold + self.margin..=1.0)
    }

    fn check(&self) -> Result<(), SynthError> {
        let ok = self.margin > 0.0
            && self.onfocus_threshold - self.margin >= 0.0
            && self.onfocus_threshold + self.margin <= 1.0
            && self.in_frame_threshold - self.margin >= 0.0
            && self.in_frame_threshold + self.margin <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(SynthError::InvalidConfig(format!("confidence margins do not fit in [0,1]: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedTask {
    pub behavior: String,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub session_id: String,
    pub camera_id: String,
    pub subject: String,
    pub phase_duration_s: f64,
    pub fps: f64,
    pub event_rate_per_5min: f64,
    pub mean_event_duration_s: f64,
    pub duration_jitter_s: f64,
    pub flip_probability: f64,
    pub confidence_model: ConfidenceModel,
    pub n_distractor_faces: usize,
    pub task_script: Vec<ScriptedTask>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            session_id: "synth".into(),
            camera_id: "patient_monitor".into(),
            subject: "provider".into(),
            phase_duration_s: 300.0,
            fps: 25.0,
            event_rate_per_5min: 14.0,
            mean_event_duration_s: 4.59,
            duration_jitter_s: 0.0,
            flip_probability: 0.0,
            confidence_model: ConfidenceModel::default(),
            n_distractor_faces: 0,
            task_script: Vec::new(),
        }
    }
}

impl SynthConfig {
    /// Number of truth events implied by the rate over the phase.
    pub fn event_count(&self) -> usize {
        (self.event_rate_per_5min * self.phase_duration_s / 300.0).round() as usize
    }

    /// Minimum distance kept between truth events, so at least one
    /// non-onfocus frame separates them after rendering.
    pub fn separation_s(&self) -> f64 {
        2.0 / self.fps
    }

    fn validate(&self) -> Result<(), SynthError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(SynthError::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("phase_duration_s", self.phase_duration_s)?;
        positive("fps", self.fps)?;
        positive("mean_event_duration_s", self.mean_event_duration_s)?;
        if !(self.event_rate_per_5min.is_finite() && self.event_rate_per_5min >= 0.0) {
            return Err(SynthError::InvalidConfig("event_rate_per_5min must be finite and non-negative".into()));
        }
        if !(self.duration_jitter_s.is_finite() && self.duration_jitter_s >= 0.0) {
            return Err(SynthError::InvalidConfig("duration_jitter_s must be finite and non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.flip_probability) {
            return Err(SynthError::InvalidConfig("flip_probability must lie in [0, 1)".into()));
        }
        self.confidence_model.check()?;
        for t in &self.task_script {
            if !(t.interval.start >= 0.0 && t.interval.end <= self.phase_duration_s && t.interval.start < t.interval.end) {
                return Err(SynthError::InvalidConfig(format!("task {:?} lies outside the phase", t.behavior)));
            }
        }
        let n = self.event_count() as f64;
        if n * self.mean_event_duration_s >= self.phase_duration_s {
            return Err(SynthError::InfeasibleConfig(format!(
                "{n} events of {} s do not fit in {} s",
                self.mean_event_duration_s, self.phase_duration_s
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub session_id: String,
    pub camera_id: String,
    pub fps: f64,
    pub phase: Interval,
    pub events: Vec<Interval>,
    pub tasks: Vec<TaskInterval>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSession {
    pub truth_events: Vec<GazeEvent>,
    pub truth_tasks: Vec<TaskInterval>,
    pub frames: SessionFrames,
    pub annotations_csv: Vec<u8>,
    pub phase: Interval,
}

impl SynthSession {
    pub fn truth(&self) -> SynthTruth {
        SynthTruth {
            session_id: self.frames.session_id.clone(),
            camera_id: self.frames.camera_id.clone(),
            fps: self.frames.fps_nominal,
            phase: self.phase,
            events: self.truth_events.iter().map(|e| e.interval).collect(),
            tasks: self.truth_tasks.clone(),
        }
    }

    pub fn truth_json(&self) -> String {
        serde_json::to_string_pretty(&self.truth()).expect("truth serializes")
    }
}

fn frame_times(phase_end: f64, fps: f64) -> Vec<f64> {
    let last = (phase_end * fps + 1e-9).floor() as u64;
    (0..=last).map(|i| i as f64 / fps).collect()
}

/// Places `durations` inside `[0, length]` with at least `sep` between events.
fn place_events(durations: &[f64], length: f64, sep: f64, rng: &mut impl Rng) -> Result<Vec<Interval>, SynthError> {
    let needed: f64 = durations.iter().sum::<f64>() + sep * durations.len().saturating_sub(1) as f64;
    if needed > length {
        return Err(SynthError::InfeasibleConfig(format!(
            "events need {needed:.3} s including separation but the phase is {length:.3} s"
        )));
    }

    let mut placed: Vec<Interval> = Vec::with_capacity(durations.len());
    'events: for &d in durations {
        for _ in 0..PLACEMENT_ATTEMPTS {
            let start = rng.random_range(0.0..=length - d);
            let cand = Interval { start, end: start + d };
            if placed.iter().all(|p| cand.start >= p.end + sep || cand.end + sep <= p.start) {
                placed.push(cand);
                continue 'events;
            }
        }
        placed.clear();
        break;
    }

    if placed.len() != durations.len() {
        // Dense configurations: spread the free time with sorted uniform offsets.
        let free = length - needed;
        let mut offsets: Vec<f64> = durations.iter().map(|_| rng.random_range(0.0..=free)).collect();
        offsets.sort_by(f64::total_cmp);
        let mut cursor = 0.0;
        placed = durations
            .iter()
            .zip(offsets)
            .map(|(&d, off)| {
                let start = cursor + off;
                cursor += d + sep;
                Interval { start, end: start + d }
            })
            .collect();
    }
    placed.sort_by(|a, b| a.start.total_cmp(&b.start));
    Ok(placed)
}

fn provider_bbox() -> BBox {
    BBox { x: 0.42, y: 0.18, w: 0.16, h: 0.22 }
}

fn render_frame(
    frame_index: u64,
    t: f64,
    onfocus: bool,
    c: &SynthConfig,
    rng: &mut impl Rng,
) -> FrameRecord {
    let m = &c.confidence_model;
    let mut faces = Vec::with_capacity(1 + c.n_distractor_faces);
    let (in_frame, conf) = if onfocus {
        (m.outside_attention(rng), m.high_confidence(rng))
    } else if rng.random_bool(0.5) {
        (m.inside_attention(rng), m.low_confidence(rng))
    } else {
        (m.outside_attention(rng), m.low_confidence(rng))
    };
    faces.push(FaceObservation {
        face_id: Some(PROVIDER_FACE_ID.into()),
        bbox: provider_bbox(),
        detector_confidence: rng.random_range(0.8..=1.0),
        in_frame_attention: in_frame,
        onfocus_confidence: Some(conf),
    });
    for k in 0..c.n_distractor_faces {
        let slot = (k % 4) as f64;
        faces.push(FaceObservation {
            face_id: Some(format!("staff{k}")),
            bbox: BBox {
                x: 0.05 + 0.22 * slot,
                y: 0.6,
                w: 0.1,
                h: 0.14,
            },
            detector_confidence: rng.random_range(0.5..=1.0),
            in_frame_attention: m.inside_attention(rng),
            onfocus_confidence: Some(rng.random_range(0.0..=1.0)),
        });
    }
    FrameRecord {
        frame_index,
        timestamp: t,
        faces,
        camera_id: c.camera_id.clone(),
    }
}

/// Generates a complete synthetic session. Identical configs yield identical
/// outputs.
pub fn generate_session(c: &SynthConfig) -> Result<SynthSession, SynthError> {
    c.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);

    let times = frame_times(c.phase_duration_s, c.fps);
    let phase = Interval {
        start: 0.0,
        end: *times.last().expect("at least one frame"),
    };
    let min_duration = 2.0 / c.fps;
    let durations: Vec<f64> = (0..c.event_count())
        .map(|_| {
            let jitter = if c.duration_jitter_s > 0.0 {
                rng.random_range(-c.duration_jitter_s..=c.duration_jitter_s)
            } else {
                0.0
            };
            (c.mean_event_duration_s + jitter).max(min_duration)
        })
        .collect();
    let truth = place_events(&durations, phase.end, c.separation_s(), &mut rng)?;

    let mut frames = Vec::with_capacity(times.len());
    let mut k = 0;
    for (i, &t) in times.iter().enumerate() {
        while k < truth.len() && truth[k].end <= t {
            k += 1;
        }
        let onfocus = truth.get(k).is_some_and(|iv| iv.contains(t));
        frames.push(render_frame(i as u64, t, onfocus, c, &mut rng));
    }
    let mut session = SessionFrames {
        session_id: c.session_id.clone(),
        camera_id: c.camera_id.clone(),
        fps_nominal: c.fps,
        frames,
        phase: Some(phase),
    };
    if c.flip_probability > 0.0 {
        session = corrupt(&session, c.flip_probability, c.seed ^ NOISE_STREAM, &c.confidence_model);
    }

    let truth_events: Vec<GazeEvent> = truth
        .iter()
        .map(|iv| GazeEvent {
            interval: *iv,
            n_frames: times.iter().filter(|&&t| iv.contains(t)).count(),
            mean_confidence: None,
        })
        .collect();
    let truth_tasks: Vec<TaskInterval> = c
        .task_script
        .iter()
        .map(|t| TaskInterval {
            behavior: t.behavior.clone(),
            subject: c.subject.clone(),
            interval: t.interval,
            modifier: None,
        })
        .collect();

    let mut events = Vec::new();
    let state = |time: f64, behavior: &str, modifier: Option<&str>, kind| AnnotationEvent {
        time,
        subject: c.subject.clone(),
        behavior: behavior.to_string(),
        modifier: modifier.map(str::to_string),
        kind,
    };
    for t in &truth_tasks {
        events.push(state(t.interval.start, &t.behavior, None, EventKind::Start));
        events.push(state(t.interval.end, &t.behavior, None, EventKind::Stop));
    }
    for e in &truth {
        events.push(state(e.start, MONITOR_BEHAVIOR, Some(&c.camera_id), EventKind::Start));
        events.push(state(e.end, MONITOR_BEHAVIOR, Some(&c.camera_id), EventKind::Stop));
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut annotations_csv = Vec::new();
    write_annotations(&events, &mut annotations_csv).expect("writing to a Vec cannot fail");

    Ok(SynthSession {
        truth_events,
        truth_tasks,
        frames: session,
        annotations_csv,
        phase,
    })
}

/// Flips each frame's onfocus outcome (any-face fusion under `model`'s
/// thresholds) independently with probability `flip_probability`, by moving
/// confidences across the thresholds. Timestamps are untouched.
pub fn corrupt(frames: &SessionFrames, flip_probability: f64, seed: u64, model: &ConfidenceModel) -> SessionFrames {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fusion = model.fusion_config();
    let mut out = frames.clone();
    for frame in &mut out.frames {
        if rng.random::<f64>() >= flip_probability {
            continue;
        }
        if decide_frame(frame, &fusion).onfocus {
            for face in &mut frame.faces {
                if decide_face(face, &fusion) {
                    face.onfocus_confidence = Some(model.low_confidence(&mut rng));
                }
            }
        } else if let Some(face) = frame.faces.first_mut() {
            face.in_frame_attention = model.outside_attention(&mut rng);
            face.onfocus_confidence = Some(model.high_confidence(&mut rng));
        } else {
            frame.faces.push(FaceObservation {
                face_id: Some(PROVIDER_FACE_ID.into()),
                bbox: provider_bbox(),
                detector_confidence: 0.9,
                in_frame_attention: model.outside_attention(&mut rng),
                onfocus_confidence: Some(model.high_confidence(&mut rng)),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{decide_frames, decide_session};
    use crate::segmentation::{segment, SegConfig};

    #[test]
    fn zero_rate_gives_all_false() {
        let c = SynthConfig {
            event_rate_per_5min: 0.0,
            ..SynthConfig::default()
        };
        let s = generate_session(&c).unwrap();
        assert!(s.truth_events.is_empty());
        assert!(decide_session(&s.frames, &FusionConfig::default()).values().all(|v| !v));
    }

    #[test]
    fn deterministic() {
        let c = SynthConfig {
            seed: 11,
            duration_jitter_s: 1.0,
            flip_probability: 0.05,
            n_distractor_faces: 2,
            ..SynthConfig::default()
        };
        assert_eq!(generate_session(&c).unwrap(), generate_session(&c).unwrap());
    }

    #[test]
    fn infeasible_mass() {
        let c = SynthConfig {
            event_rate_per_5min: 70.0,
            mean_event_duration_s: 5.0,
            ..SynthConfig::default()
        };
        assert!(matches!(generate_session(&c), Err(SynthError::InfeasibleConfig(_))));
    }

    #[test]
    fn dense_configs_still_place_disjoint_events() {
        let c = SynthConfig {
            seed: 3,
            event_rate_per_5min: 60.0,
            mean_event_duration_s: 4.8,
            ..SynthConfig::default()
        };
        let s = generate_session(&c).unwrap();
        assert_eq!(s.truth_events.len(), 60);
        for w in s.truth_events.windows(2) {
            assert!(w[1].interval.start >= w[0].interval.end + c.separation_s() - 1e-9);
        }
    }

    #[test]
    fn recovers_fourteen_events() {
        let s = generate_session(&SynthConfig::default()).unwrap();
        let recovered = segment(&decide_session(&s.frames, &FusionConfig::default()), &SegConfig::RAW);
        assert_eq!(recovered.len(), 14);
        let mean: f64 = recovered.iter().map(|e| e.duration()).sum::<f64>() / 14.0;
        assert!((mean - 4.59).abs() <= 1.0 / 25.0);
    }

    #[test]
    fn distractors_are_always_gated() {
        let c = SynthConfig {
            n_distractor_faces: 3,
            ..SynthConfig::default()
        };
        let s = generate_session(&c).unwrap();
        for f in &s.frames.frames {
            for face in &f.faces[1..] {
                assert!(face.in_frame_attention >= c.confidence_model.in_frame_threshold);
            }
        }
    }

    #[test]
    fn corrupt_extremes() {
        let s = generate_session(&SynthConfig::default()).unwrap();
        let m = ConfidenceModel::default();
        let fusion = m.fusion_config();
        let base: Vec<bool> = decide_frames(&s.frames, &fusion).iter().map(|d| d.onfocus).collect();
        let same: Vec<bool> = decide_frames(&corrupt(&s.frames, 0.0, 1, &m), &fusion).iter().map(|d| d.onfocus).collect();
        assert_eq!(base, same);
        let inv: Vec<bool> = decide_frames(&corrupt(&s.frames, 1.0, 1, &m), &fusion).iter().map(|d| d.onfocus).collect();
        assert!(base.iter().zip(&inv).all(|(a, b)| a != b));
    }

    #[test]
    fn annotations_mirror_truth() {
        let c = SynthConfig {
            task_script: vec![ScriptedTask {
                behavior: "Airway manipulation".into(),
                interval: Interval { start: 30.0, end: 90.0 },
            }],
            ..SynthConfig::default()
        };
        let s = generate_session(&c).unwrap();
        let log = crate::annotations::parse_annotations(&s.annotations_csv[..]).unwrap();
        assert_eq!(log.events.len(), 2 * (14 + 1));
    }

    #[test]
    fn task_outside_phase_rejected() {
        let c = SynthConfig {
            task_script: vec![ScriptedTask {
                behavior: "X".into(),
                interval: Interval { start: 290.0, end: 310.0 },
            }],
            ..SynthConfig::default()
        };
        assert!(matches!(generate_session(&c), Err(SynthError::InvalidConfig(_))));
    }
}
