//! Per-frame prediction logs.
//!
//! The canonical wire format is JSON lines. The first non-blank line is a
//! metadata object:
//!
//! ```text
//! {"session_id":"s01","camera_id":"patient_monitor","fps":25.0,"schema_version":"1","phase":[0.0,300.0]}
//! ```
//!
//! (`phase` is optional.) Every following non-blank line is one frame:
//!
//! ```text
//! {"frame_index":0,"t":0.0,"faces":[{"id":"A","bbox":[0.1,0.2,0.3,0.4],"det_conf":0.97,"in_frame":0.12,"onfocus_conf":0.81}]}
//! ```
//!
//! `id` and `onfocus_conf` may be omitted. Unknown keys are ignored. A legacy
//! CSV layout with one row per face is also accepted, see [`parse_frame_log`].

use std::collections::HashMap;
use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::Interval;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameLogError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: timestamp {current} does not increase past {previous}")]
    NonMonotonicTimestamp {
        line: usize,
        previous: f64,
        current: f64,
    },
    #[error("missing metadata: {0}")]
    MissingMetadata(String),
    #[error("log contains no frames")]
    EmptyLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Jsonl,
    Csv,
}

/// Normalized face rectangle: origin and extents, all in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    fn check(&self) -> Result<(), String> {
        let unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if ![self.x, self.y, self.w, self.h].into_iter().all(unit) {
            return Err(format!("bbox {:?} outside [0,1]", [self.x, self.y, self.w, self.h]));
        }
        if self.w <= 0.0 || self.h <= 0.0 {
            return Err("bbox must have positive width and height".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceObservation {
    pub face_id: Option<String>,
    pub bbox: BBox,
    pub detector_confidence: f64,
    /// Spatiotemporal model scalar: high means the attention target lies inside the scene.
    pub in_frame_attention: f64,
    /// Eye-context onfocus confidence; absent when the upstream gate short-circuited.
    pub onfocus_confidence: Option<f64>,
}

impl FaceObservation {
    pub fn check(&self) -> Result<(), String> {
        self.bbox.check()?;
        check_unit("det_conf", self.detector_confidence)?;
        check_unit("in_frame", self.in_frame_attention)?;
        if let Some(c) = self.onfocus_confidence {
            check_unit("onfocus_conf", c)?;
        }
        Ok(())
    }
}

fn check_unit(name: &str, v: f64) -> Result<(), String> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(format!("{name} = {v} outside [0,1]"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_index: u64,
    pub timestamp: f64,
    pub faces: Vec<FaceObservation>,
    pub camera_id: String,
}

/// One camera's parsed log. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionFrames {
    pub session_id: String,
    pub camera_id: String,
    pub fps_nominal: f64,
    pub frames: Vec<FrameRecord>,
    pub phase: Option<Interval>,
}

impl SessionFrames {
    /// `[first timestamp, last timestamp]`.
    pub fn time_span(&self) -> Interval {
        let first = self.frames.first().map_or(0.0, |f| f.timestamp);
        let last = self.frames.last().map_or(0.0, |f| f.timestamp);
        Interval { start: first, end: last }
    }

    /// The declared analysis phase, or the full recorded span.
    pub fn analysis_phase(&self) -> Interval {
        self.phase.unwrap_or_else(|| self.time_span())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MetaWire {
    session_id: Option<String>,
    camera_id: Option<String>,
    fps: Option<f64>,
    schema_version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phase: Option<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FaceWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    bbox: [f64; 4],
    det_conf: f64,
    in_frame: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    onfocus_conf: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameWire {
    frame_index: u64,
    t: f64,
    faces: Vec<FaceWire>,
}

impl From<FaceWire> for FaceObservation {
    fn from(w: FaceWire) -> Self {
        let [x, y, bw, bh] = w.bbox;
        FaceObservation {
            face_id: w.id,
            bbox: BBox { x, y, w: bw, h: bh },
            detector_confidence: w.det_conf,
            in_frame_attention: w.in_frame,
            onfocus_confidence: w.onfocus_conf,
        }
    }
}

impl From<&FaceObservation> for FaceWire {
    fn from(f: &FaceObservation) -> Self {
        FaceWire {
            id: f.face_id.clone(),
            bbox: [f.bbox.x, f.bbox.y, f.bbox.w, f.bbox.h],
            det_conf: f.detector_confidence,
            in_frame: f.in_frame_attention,
            onfocus_conf: f.onfocus_confidence,
        }
    }
}

struct Meta {
    session_id: String,
    camera_id: String,
    fps: f64,
    phase: Option<Interval>,
}

/// Parses a whole frame log.
///
/// Blank lines are skipped; every other line is either accepted as a frame or
/// reported as an error, so no record is ever dropped silently.
///
/// The legacy CSV layout has the header
/// `session_id,camera_id,fps,frame_index,t,face_id,x,y,w,h,det_conf,in_frame,onfocus_conf`
/// with one row per face. Consecutive rows sharing `frame_index` form one
/// frame; a frame without faces is a single row whose face columns are empty.
pub fn parse_frame_log<R: Read>(mut source: R, format: LogFormat) -> Result<SessionFrames, FrameLogError> {
    let mut bytes = Vec::new();
    source
        .read_to_end(&mut bytes)
        .map_err(|e| FrameLogError::MalformedRecord { line: 0, reason: e.to_string() })?;
    match format {
        LogFormat::Jsonl => parse_jsonl(&bytes),
        LogFormat::Csv => parse_csv(&bytes),
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> FrameLogError {
    FrameLogError::MalformedRecord { line, reason: reason.into() }
}

fn parse_jsonl(bytes: &[u8]) -> Result<SessionFrames, FrameLogError> {
    let mut meta: Option<Meta> = None;
    let mut frames: Vec<FrameRecord> = Vec::new();

    for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = idx + 1;
        let text = std::str::from_utf8(raw).map_err(|e| malformed(line, format!("invalid UTF-8: {e}")))?;
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        match &meta {
            None => meta = Some(parse_meta_line(line, text)?),
            Some(m) => {
                let wire: FrameWire = serde_json::from_str(text).map_err(|e| malformed(line, e.to_string()))?;
                let record = FrameRecord {
                    frame_index: wire.frame_index,
                    timestamp: wire.t,
                    faces: wire.faces.into_iter().map(FaceObservation::from).collect(),
                    camera_id: m.camera_id.clone(),
                };
                push_frame(&mut frames, record, line)?;
            }
        }
    }

    let meta = meta.ok_or(FrameLogError::EmptyLog)?;
    finish(meta, frames)
}

fn parse_meta_line(line: usize, text: &str) -> Result<Meta, FrameLogError> {
    let wire: MetaWire = serde_json::from_str(text).map_err(|e| malformed(line, format!("metadata: {e}")))?;
    let session_id = wire
        .session_id
        .ok_or_else(|| FrameLogError::MissingMetadata("session_id".into()))?;
    let camera_id = wire
        .camera_id
        .ok_or_else(|| FrameLogError::MissingMetadata("camera_id".into()))?;
    let fps = wire.fps.ok_or_else(|| FrameLogError::MissingMetadata("fps".into()))?;
    let version = wire
        .schema_version
        .ok_or_else(|| FrameLogError::MissingMetadata("schema_version".into()))?;
    if version != SCHEMA_VERSION {
        return Err(malformed(line, format!("unsupported schema_version {version:?}")));
    }
    if !(fps.is_finite() && fps > 0.0) {
        return Err(malformed(line, format!("fps must be positive, got {fps}")));
    }
    let phase = match wire.phase {
        Some([s, e]) => Some(Interval::new(s, e).ok_or_else(|| malformed(line, "phase start exceeds end"))?),
        None => None,
    };
    Ok(Meta { session_id, camera_id, fps, phase })
}

fn push_frame(frames: &mut Vec<FrameRecord>, record: FrameRecord, line: usize) -> Result<(), FrameLogError> {
    if !(record.timestamp.is_finite() && record.timestamp >= 0.0) {
        return Err(malformed(line, format!("timestamp {} must be finite and non-negative", record.timestamp)));
    }
    for face in &record.faces {
        face.check().map_err(|reason| malformed(line, reason))?;
    }
    if let Some(prev) = frames.last() {
        if record.timestamp <= prev.timestamp {
            return Err(FrameLogError::NonMonotonicTimestamp {
                line,
                previous: prev.timestamp,
                current: record.timestamp,
            });
        }
        if record.frame_index <= prev.frame_index {
            return Err(malformed(
                line,
                format!("frame_index {} does not increase past {}", record.frame_index, prev.frame_index),
            ));
        }
    }
    frames.push(record);
    Ok(())
}

fn finish(meta: Meta, frames: Vec<FrameRecord>) -> Result<SessionFrames, FrameLogError> {
    if frames.is_empty() {
        return Err(FrameLogError::EmptyLog);
    }
    let session = SessionFrames {
        session_id: meta.session_id,
        camera_id: meta.camera_id,
        fps_nominal: meta.fps,
        frames,
        phase: meta.phase,
    };
    if let Some(phase) = session.phase {
        let span = session.time_span();
        if phase.start < span.start || phase.end > span.end {
            return Err(malformed(
                1,
                format!(
                    "phase [{}, {}] lies outside recorded span [{}, {}]",
                    phase.start, phase.end, span.start, span.end
                ),
            ));
        }
    }
    Ok(session)
}

const CSV_COLUMNS: [&str; 13] = [
    "session_id",
    "camera_id",
    "fps",
    "frame_index",
    "t",
    "face_id",
    "x",
    "y",
    "w",
    "h",
    "det_conf",
    "in_frame",
    "onfocus_conf",
];

fn parse_csv(bytes: &[u8]) -> Result<SessionFrames, FrameLogError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        malformed(line, format!("invalid UTF-8: {e}"))
    })?;
    if text.trim().is_empty() {
        return Err(FrameLogError::EmptyLog);
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    let col: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    for name in ["session_id", "camera_id", "fps"] {
        if !col.contains_key(name) {
            return Err(FrameLogError::MissingMetadata(name.into()));
        }
    }
    for name in &CSV_COLUMNS[3..] {
        if !col.contains_key(name) {
            return Err(malformed(1, format!("missing column {name}")));
        }
    }

    let mut meta: Option<Meta> = None;
    let mut frames: Vec<FrameRecord> = Vec::new();
    // Frame under construction and the line it started on.
    let mut pending: Option<(FrameRecord, usize)> = None;

    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            malformed(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let field = |name: &str| row.get(col[name]).unwrap_or("");
        let num = |name: &str| -> Result<f64, FrameLogError> {
            field(name)
                .parse::<f64>()
                .map_err(|_| malformed(line, format!("{name}: not a number: {:?}", field(name))))
        };

        let session_id = field("session_id");
        let camera_id = field("camera_id");
        if session_id.is_empty() {
            return Err(FrameLogError::MissingMetadata("session_id".into()));
        }
        if camera_id.is_empty() {
            return Err(FrameLogError::MissingMetadata("camera_id".into()));
        }
        let fps = num("fps")?;
        match &meta {
            None => {
                if !(fps.is_finite() && fps > 0.0) {
                    return Err(malformed(line, format!("fps must be positive, got {fps}")));
                }
                meta = Some(Meta {
                    session_id: session_id.to_string(),
                    camera_id: camera_id.to_string(),
                    fps,
                    phase: None,
                });
            }
            Some(m) => {
                if m.session_id != session_id || m.camera_id != camera_id || m.fps != fps {
                    return Err(malformed(line, "metadata columns change mid-log"));
                }
            }
        }

        let frame_index = field("frame_index")
            .parse::<u64>()
            .map_err(|_| malformed(line, format!("frame_index: not an integer: {:?}", field("frame_index"))))?;
        let t = num("t")?;
        let face = if field("x").is_empty() {
            None
        } else {
            let onfocus = match field("onfocus_conf") {
                "" => None,
                _ => Some(num("onfocus_conf")?),
            };
            Some(FaceObservation {
                face_id: Some(field("face_id")).filter(|s| !s.is_empty()).map(str::to_string),
                bbox: BBox {
                    x: num("x")?,
                    y: num("y")?,
                    w: num("w")?,
                    h: num("h")?,
                },
                detector_confidence: num("det_conf")?,
                in_frame_attention: num("in_frame")?,
                onfocus_confidence: onfocus,
            })
        };

        match &mut pending {
            Some((frame, _)) if frame.frame_index == frame_index => {
                if frame.timestamp != t {
                    return Err(malformed(line, "rows of one frame disagree on t"));
                }
                match face {
                    Some(face) if !frame.faces.is_empty() => frame.faces.push(face),
                    _ => return Err(malformed(line, "empty-face row mixed with face rows")),
                }
            }
            _ => {
                if let Some((done, start_line)) = pending.take() {
                    push_frame(&mut frames, done, start_line)?;
                }
                let camera_id = meta.as_ref().map(|m| m.camera_id.clone()).unwrap_or_default();
                pending = Some((
                    FrameRecord {
                        frame_index,
                        timestamp: t,
                        faces: face.into_iter().collect(),
                        camera_id,
                    },
                    line,
                ));
            }
        }
    }
    if let Some((done, start_line)) = pending.take() {
        push_frame(&mut frames, done, start_line)?;
    }

    let meta = meta.ok_or(FrameLogError::EmptyLog)?;
    finish(meta, frames)
}

/// Writes `session` in the canonical JSON-lines layout.
pub fn write_frame_log<W: Write>(session: &SessionFrames, mut out: W) -> io::Result<()> {
    let meta = MetaWire {
        session_id: Some(session.session_id.clone()),
        camera_id: Some(session.camera_id.clone()),
        fps: Some(session.fps_nominal),
        schema_version: Some(SCHEMA_VERSION.to_string()),
        phase: session.phase.map(|p| [p.start, p.end]),
    };
    serde_json::to_writer(&mut out, &meta)?;
    out.write_all(b"\n")?;
    for frame in &session.frames {
        let wire = FrameWire {
            frame_index: frame.frame_index,
            t: frame.timestamp,
            faces: frame.faces.iter().map(FaceWire::from).collect(),
        };
        serde_json::to_writer(&mut out, &wire)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_jsonl_string(session: &SessionFrames) -> String {
    let mut buf = Vec::new();
    write_frame_log(session, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Writes `session` in the legacy per-face CSV layout.
pub fn write_frame_csv<W: Write>(session: &SessionFrames, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    let fps = session.fps_nominal.to_string();
    for frame in &session.frames {
        let prefix = [
            session.session_id.clone(),
            session.camera_id.clone(),
            fps.clone(),
            frame.frame_index.to_string(),
            frame.timestamp.to_string(),
        ];
        if frame.faces.is_empty() {
            let mut row: Vec<String> = prefix.to_vec();
            row.extend(std::iter::repeat_n(String::new(), 8));
            w.write_record(&row)?;
        }
        for face in &frame.faces {
            let mut row: Vec<String> = prefix.to_vec();
            row.push(face.face_id.clone().unwrap_or_default());
            for v in [face.bbox.x, face.bbox.y, face.bbox.w, face.bbox.h, face.detector_confidence, face.in_frame_attention] {
                row.push(v.to_string());
            }
            row.push(face.onfocus_confidence.map(|c| c.to_string()).unwrap_or_default());
            w.write_record(&row)?;
        }
    }
    w.flush()
}

/// A stretch of missing frames between two consecutive records.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameGap {
    pub after_frame_index: u64,
    pub from_t: f64,
    pub to_t: f64,
    /// Time not covered by frames: delta minus one nominal frame period.
    pub missing_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    pub count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
}

impl Distribution {
    fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut count = 0;
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            count += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        if count == 0 {
            Distribution { count, min: None, max: None, mean: None }
        } else {
            Distribution {
                count,
                min: Some(min),
                max: Some(max),
                mean: Some(sum / count as f64),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub session_id: String,
    pub camera_id: String,
    pub n_frames: usize,
    pub duration_s: f64,
    /// Deltas above this threshold (two nominal frame periods) count as gaps.
    pub gap_threshold_s: f64,
    pub gaps: Vec<FrameGap>,
    pub zero_face_fraction: f64,
    pub missing_onfocus_fraction: f64,
    pub detector_confidence: Distribution,
    pub in_frame_attention: Distribution,
    pub onfocus_confidence: Distribution,
}

impl ValidationReport {
    /// Number of data-hygiene findings (frame gaps).
    pub fn warning_count(&self) -> usize {
        self.gaps.len()
    }
}

pub fn validate_session(s: &SessionFrames) -> ValidationReport {
    let period = 1.0 / s.fps_nominal;
    let gap_threshold_s = 2.0 * period;
    let gaps = s
        .frames
        .windows(2)
        .filter_map(|w| {
            let delta = w[1].timestamp - w[0].timestamp;
            (delta > gap_threshold_s).then(|| FrameGap {
                after_frame_index: w[0].frame_index,
                from_t: w[0].timestamp,
                to_t: w[1].timestamp,
                missing_s: delta - period,
            })
        })
        .collect();

    let n = s.frames.len();
    let faces = || s.frames.iter().flat_map(|f| f.faces.iter());
    let n_faces = faces().count();
    let zero_faces = s.frames.iter().filter(|f| f.faces.is_empty()).count();
    let missing_onfocus = faces().filter(|f| f.onfocus_confidence.is_none()).count();

    ValidationReport {
        session_id: s.session_id.clone(),
        camera_id: s.camera_id.clone(),
        n_frames: n,
        duration_s: s.time_span().duration(),
        gap_threshold_s,
        gaps,
        zero_face_fraction: if n == 0 { 0.0 } else { zero_faces as f64 / n as f64 },
        missing_onfocus_fraction: if n_faces == 0 { 0.0 } else { missing_onfocus as f64 / n_faces as f64 },
        detector_confidence: Distribution::of(faces().map(|f| f.detector_confidence)),
        in_frame_attention: Distribution::of(faces().map(|f| f.in_frame_attention)),
        onfocus_confidence: Distribution::of(faces().filter_map(|f| f.onfocus_confidence)),
    }
}
