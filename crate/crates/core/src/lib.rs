//! Onfocus fusion, gaze-event segmentation and visual-attention statistics
//! for monitor-mounted camera recordings in the operating room.
//!
//! The pipeline runs frame log → [`fusion`] → [`segmentation`] →
//! [`metrics`], with [`annotations`] supplying the human task timeline and
//! [`evaluation`] scoring the framework against human labels. [`synth`]
//! produces sessions with a known ground truth.

pub mod annotations;
pub mod evaluation;
pub mod frame_log;
pub mod fusion;
pub mod interval;
pub mod metrics;
pub mod report;
pub mod segmentation;
pub mod stats;
pub mod synth;
pub mod timeline;

pub use annotations::{AnnotationEvent, EventKind, PairingPolicy, TaskInterval};
pub use frame_log::{FaceObservation, FrameRecord, LogFormat, SessionFrames};
pub use fusion::{FocusDecision, FusionConfig};
pub use interval::Interval;
pub use metrics::VAMetrics;
pub use segmentation::{BinarySeries, GazeEvent, SegConfig};
