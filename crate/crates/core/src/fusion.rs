//! Per-frame onfocus decision.
//!
//! A face counts as looking at the camera only when the spatiotemporal model
//! places its attention target outside the scene (`in_frame_attention` below
//! the gate) and the eye-context confidence reaches the onfocus threshold.
//! Per-face verdicts are then reduced to one verdict per frame.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame_log::{FaceObservation, FrameRecord, SessionFrames};
use crate::segmentation::{BinarySeries, Sample};

pub const DEFAULT_ONFOCUS_THRESHOLD: f64 = 0.72;
pub const DEFAULT_IN_FRAME_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("{name} = {value} must lie in [0, 1]")]
    InvalidThreshold { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    AnyFace,
    LargestFace,
    TrackedSubject(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub onfocus_threshold: f64,
    pub in_frame_threshold: f64,
    pub aggregation: Aggregation,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            onfocus_threshold: DEFAULT_ONFOCUS_THRESHOLD,
            in_frame_threshold: DEFAULT_IN_FRAME_THRESHOLD,
            aggregation: Aggregation::AnyFace,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<(), FusionError> {
        for (name, value) in [
            ("onfocus_threshold", self.onfocus_threshold),
            ("in_frame_threshold", self.in_frame_threshold),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(FusionError::InvalidThreshold { name, value });
            }
        }
        Ok(())
    }
}

/// Why a face was or was not accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceVerdict {
    Onfocus,
    /// Attention target inside the scene.
    Gated,
    /// No onfocus confidence was produced upstream.
    NoConfidence,
    BelowThreshold,
}

pub fn assess_face(f: &FaceObservation, c: &FusionConfig) -> FaceVerdict {
    if f.in_frame_attention >= c.in_frame_threshold {
        return FaceVerdict::Gated;
    }
    match f.onfocus_confidence {
        None => FaceVerdict::NoConfidence,
        Some(conf) if conf >= c.onfocus_threshold => FaceVerdict::Onfocus,
        Some(_) => FaceVerdict::BelowThreshold,
    }
}

/// True iff the face is onfocus under `c`. The threshold is inclusive.
pub fn decide_face(f: &FaceObservation, c: &FusionConfig) -> bool {
    assess_face(f, c) == FaceVerdict::Onfocus
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionFlag {
    TrackedSubjectMissing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocusDecision {
    pub frame_index: u64,
    pub timestamp: f64,
    pub onfocus: bool,
    /// Index into the frame's face list.
    pub winning_face: Option<usize>,
    pub winning_confidence: Option<f64>,
    pub flag: Option<DecisionFlag>,
}

fn decision(r: &FrameRecord, winner: Option<(usize, f64)>, flag: Option<DecisionFlag>) -> FocusDecision {
    FocusDecision {
        frame_index: r.frame_index,
        timestamp: r.timestamp,
        onfocus: winner.is_some(),
        winning_face: winner.map(|(i, _)| i),
        winning_confidence: winner.map(|(_, c)| c),
        flag,
    }
}

fn single(r: &FrameRecord, idx: usize, c: &FusionConfig) -> Option<(usize, f64)> {
    let face = &r.faces[idx];
    decide_face(face, c).then(|| (idx, face.onfocus_confidence.expect("onfocus implies confidence")))
}

/// Frame-level verdict.
///
/// `AnyFace` picks, among passing faces, the highest confidence, then the
/// larger bbox area, then the lower list index. `LargestFace` looks only at
/// the largest face (lowest index on ties). `TrackedSubject` looks only at
/// the first face with the given id and flags the frame when none carries it.
pub fn decide_frame(r: &FrameRecord, c: &FusionConfig) -> FocusDecision {
    match &c.aggregation {
        Aggregation::AnyFace => {
            let mut best: Option<(usize, f64, f64)> = None;
            for (i, face) in r.faces.iter().enumerate() {
                if !decide_face(face, c) {
                    continue;
                }
                let conf = face.onfocus_confidence.expect("onfocus implies confidence");
                let area = face.bbox.area();
                let better = match best {
                    None => true,
                    Some((_, bc, ba)) => conf > bc || (conf == bc && area > ba),
                };
                if better {
                    best = Some((i, conf, area));
                }
            }
            decision(r, best.map(|(i, conf, _)| (i, conf)), None)
        }
        Aggregation::LargestFace => {
            let largest = r
                .faces
                .iter()
                .enumerate()
                .fold(None::<(usize, f64)>, |acc, (i, f)| match acc {
                    Some((_, a)) if a >= f.bbox.area() => acc,
                    _ => Some((i, f.bbox.area())),
                });
            decision(r, largest.and_then(|(i, _)| single(r, i, c)), None)
        }
        Aggregation::TrackedSubject(id) => {
            match r.faces.iter().position(|f| f.face_id.as_deref() == Some(id.as_str())) {
                Some(i) => decision(r, single(r, i, c), None),
                None => decision(r, None, Some(DecisionFlag::TrackedSubjectMissing)),
            }
        }
    }
}

pub fn decide_frames(s: &SessionFrames, c: &FusionConfig) -> Vec<FocusDecision> {
    s.frames.iter().map(|r| decide_frame(r, c)).collect()
}

/// Onfocus time series for a session, one sample per frame in order.
pub fn decide_session(s: &SessionFrames, c: &FusionConfig) -> BinarySeries {
    series_from_decisions(&decide_frames(s, c), s.fps_nominal)
}

pub fn series_from_decisions(decisions: &[FocusDecision], fps_nominal: f64) -> BinarySeries {
    BinarySeries {
        samples: decisions
            .iter()
            .map(|d| Sample {
                t: d.timestamp,
                value: d.onfocus,
                confidence: d.winning_confidence,
            })
            .collect(),
        fps_nominal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame_log::BBox;

    fn face(in_frame: f64, conf: Option<f64>) -> FaceObservation {
        FaceObservation {
            face_id: None,
            bbox: BBox { x: 0.1, y: 0.1, w: 0.2, h: 0.2 },
            detector_confidence: 0.9,
            in_frame_attention: in_frame,
            onfocus_confidence: conf,
        }
    }

    fn frame(faces: Vec<FaceObservation>) -> FrameRecord {
        FrameRecord {
            frame_index: 7,
            timestamp: 0.28,
            faces,
            camera_id: "patient".into(),
        }
    }

    #[test]
    fn gate_blocks_in_frame_attention() {
        let c = FusionConfig::default();
        assert!(!decide_face(&face(0.9, Some(0.95)), &c));
        assert_eq!(assess_face(&face(0.9, Some(0.95)), &c), FaceVerdict::Gated);
    }

    #[test]
    fn threshold_boundaries() {
        let c = FusionConfig::default();
        assert!(decide_face(&face(0.1, Some(0.80)), &c));
        assert!(!decide_face(&face(0.1, Some(0.71)), &c));
        assert!(decide_face(&face(0.1, Some(0.72)), &c));
        assert_eq!(assess_face(&face(0.1, None), &c), FaceVerdict::NoConfidence);
    }

    #[test]
    fn any_face_takes_max_confidence() {
        let d = decide_frame(&frame(vec![face(0.1, Some(0.80)), face(0.1, Some(0.91))]), &FusionConfig::default());
        assert!(d.onfocus);
        assert_eq!(d.winning_confidence, Some(0.91));
        assert_eq!(d.winning_face, Some(1));
    }

    #[test]
    fn ties_break_on_area_then_index() {
        let mut big = face(0.1, Some(0.9));
        big.bbox.w = 0.5;
        let d = decide_frame(&frame(vec![face(0.1, Some(0.9)), big, face(0.1, Some(0.9))]), &FusionConfig::default());
        assert_eq!(d.winning_face, Some(1));
        let d = decide_frame(&frame(vec![face(0.1, Some(0.9)), face(0.1, Some(0.9))]), &FusionConfig::default());
        assert_eq!(d.winning_face, Some(0));
    }

    #[test]
    fn zero_faces_is_not_onfocus() {
        let d = decide_frame(&frame(vec![]), &FusionConfig::default());
        assert!(!d.onfocus);
        assert_eq!(d.flag, None);
    }

    #[test]
    fn largest_face_ignores_smaller_passing_face() {
        let mut big = face(0.9, Some(0.9));
        big.bbox.h = 0.6;
        let c = FusionConfig {
            aggregation: Aggregation::LargestFace,
            ..FusionConfig::default()
        };
        assert!(!decide_frame(&frame(vec![face(0.1, Some(0.95)), big]), &c).onfocus);
    }

    #[test]
    fn tracked_subject_missing_is_flagged() {
        let mut b = face(0.1, Some(0.95));
        b.face_id = Some("B".into());
        let c = FusionConfig {
            aggregation: Aggregation::TrackedSubject("A".into()),
            ..FusionConfig::default()
        };
        let d = decide_frame(&frame(vec![b.clone()]), &c);
        assert!(!d.onfocus);
        assert_eq!(d.flag, Some(DecisionFlag::TrackedSubjectMissing));

        let mut a = face(0.1, Some(0.8));
        a.face_id = Some("A".into());
        let d = decide_frame(&frame(vec![b, a]), &c);
        assert!(d.onfocus);
        assert_eq!(d.winning_face, Some(1));
    }

    #[test]
    fn config_validation() {
        let bad = FusionConfig {
            onfocus_threshold: 1.2,
            ..FusionConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(FusionConfig::default().validate().is_ok());
    }
}
