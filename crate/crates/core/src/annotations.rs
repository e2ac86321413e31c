//! Manual behavioral annotation logs: point and state events, paired into
//! task intervals.
//!
//! Input is a UTF-8 CSV with the header `time,subject,behavior,modifier,kind`
//! (extra columns are ignored and reported). `time` is decimal seconds on the
//! same clock as the frame log; `kind` is `point`, `start` or `stop`
//! (case-insensitive). Exports from BORIS-style tools need only a column
//! rename to fit.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::interval::Interval;

pub const ANNOTATION_COLUMNS: [&str; 5] = ["time", "subject", "behavior", "modifier", "kind"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnotationError {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: unknown event kind {value:?}")]
    UnknownKind { line: usize, value: String },
    #[error("event {index}: start without a matching stop")]
    UnmatchedStart { index: usize },
    #[error("event {index}: stop without a matching start")]
    UnmatchedStop { index: usize },
    #[error("event {index}: state already open for the same subject, behavior and modifier")]
    NestedState { index: usize },
    #[error("event {index}: time {time} lies after session end {session_end}")]
    AfterSessionEnd { index: usize, time: f64, session_end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Point,
    Start,
    Stop,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Point => "point",
            EventKind::Start => "start",
            EventKind::Stop => "stop",
        }
    }
}

impl std::str::FromStr for EventKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "point" => Ok(EventKind::Point),
            "start" => Ok(EventKind::Start),
            "stop" => Ok(EventKind::Stop),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationEvent {
    pub time: f64,
    pub subject: String,
    pub behavior: String,
    pub modifier: Option<String>,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInterval {
    pub behavior: String,
    pub subject: String,
    pub interval: Interval,
    pub modifier: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairingPolicy {
    Strict,
    #[default]
    Truncate,
}

/// Parsed annotation log plus non-fatal findings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotationLog {
    pub events: Vec<AnnotationEvent>,
    pub warnings: Vec<String>,
}

/// Reads an annotation CSV. Events come back sorted by time; rows with equal
/// times keep their file order.
pub fn parse_annotations<R: Read>(source: R) -> Result<AnnotationLog, AnnotationError> {
    let mut bytes = Vec::new();
    let mut source = source;
    source
        .read_to_end(&mut bytes)
        .map_err(|e| AnnotationError::MalformedRow { line: 0, reason: e.to_string() })?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(AnnotationLog::default());
    }

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(&bytes[..]);
    let headers = reader
        .headers()
        .map_err(|e| AnnotationError::MalformedRow { line: 1, reason: e.to_string() })?
        .clone();
    let col: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let mut log = AnnotationLog::default();
    for name in ANNOTATION_COLUMNS {
        if !col.contains_key(name) {
            return Err(AnnotationError::MalformedRow {
                line: 1,
                reason: format!("missing column {name}"),
            });
        }
    }
    for h in headers.iter().filter(|h| !ANNOTATION_COLUMNS.contains(h)) {
        log.warnings.push(format!("ignoring unknown column {h:?}"));
    }

    for row in reader.records() {
        let row = row.map_err(|e| AnnotationError::MalformedRow {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let field = |name: &str| row.get(col[name]).unwrap_or("");

        let time: f64 = field("time").parse().map_err(|_| AnnotationError::MalformedRow {
            line,
            reason: format!("time: not a number: {:?}", field("time")),
        })?;
        if !(time.is_finite() && time >= 0.0) {
            return Err(AnnotationError::MalformedRow {
                line,
                reason: format!("time {time} must be finite and non-negative"),
            });
        }
        let behavior = field("behavior");
        if behavior.is_empty() {
            return Err(AnnotationError::MalformedRow { line, reason: "empty behavior".into() });
        }
        let kind = field("kind").parse().map_err(|()| AnnotationError::UnknownKind {
            line,
            value: field("kind").to_string(),
        })?;
        log.events.push(AnnotationEvent {
            time,
            subject: field("subject").to_string(),
            behavior: behavior.to_string(),
            modifier: Some(field("modifier")).filter(|m| !m.is_empty()).map(str::to_string),
            kind,
        });
    }
    log.events.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(log)
}

pub fn write_annotations<W: Write>(events: &[AnnotationEvent], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ANNOTATION_COLUMNS)?;
    for e in events {
        w.write_record([
            e.time.to_string().as_str(),
            &e.subject,
            &e.behavior,
            e.modifier.as_deref().unwrap_or(""),
            e.kind.as_str(),
        ])?;
    }
    w.flush()
}

type StateKey<'a> = (&'a str, &'a str, Option<&'a str>);

/// Pairs start/stop events sharing `(subject, behavior, modifier)` into task
/// intervals. Point events are ignored. Intervals of different keys may
/// overlap; a second start on an already-open key is a [`AnnotationError::NestedState`].
///
/// Under [`PairingPolicy::Truncate`] an unmatched start closes at
/// `session_end`, an unmatched stop opens at 0, and every interval is clipped
/// to `[0, session_end]`. Under [`PairingPolicy::Strict`] unmatched events and
/// events after `session_end` are errors. Zero-length pairs produce no
/// interval. Output is sorted by start time.
pub fn pair_state_events(
    events: &[AnnotationEvent],
    session_end: f64,
    policy: PairingPolicy,
) -> Result<Vec<TaskInterval>, AnnotationError> {
    let mut open: HashMap<StateKey<'_>, (usize, f64)> = HashMap::new();
    let mut out = Vec::new();

    let mut emit = |e: &AnnotationEvent, start: f64, end: f64| {
        let end = end.min(session_end);
        let start = start.max(0.0);
        if end > start {
            out.push(TaskInterval {
                behavior: e.behavior.clone(),
                subject: e.subject.clone(),
                interval: Interval { start, end },
                modifier: e.modifier.clone(),
            });
        }
    };

    for (index, e) in events.iter().enumerate() {
        if e.kind == EventKind::Point {
            continue;
        }
        if policy == PairingPolicy::Strict && e.time > session_end {
            return Err(AnnotationError::AfterSessionEnd { index, time: e.time, session_end });
        }
        let key = (e.subject.as_str(), e.behavior.as_str(), e.modifier.as_deref());
        match e.kind {
            EventKind::Start => {
                if open.contains_key(&key) {
                    return Err(AnnotationError::NestedState { index });
                }
                open.insert(key, (index, e.time));
            }
            EventKind::Stop => match open.remove(&key) {
                Some((_, start)) => emit(e, start, e.time),
                None if policy == PairingPolicy::Strict => return Err(AnnotationError::UnmatchedStop { index }),
                None => emit(e, 0.0, e.time),
            },
            EventKind::Point => unreachable!(),
        }
    }

    let mut dangling: Vec<(usize, f64)> = open.into_values().collect();
    dangling.sort_by_key(|&(index, _)| index);
    if let (PairingPolicy::Strict, Some(&(index, _))) = (policy, dangling.first()) {
        return Err(AnnotationError::UnmatchedStart { index });
    }
    for (index, start) in dangling {
        emit(&events[index], start, session_end);
    }

    out.sort_by(|a, b| {
        a.interval
            .start
            .total_cmp(&b.interval.start)
            .then_with(|| a.behavior.cmp(&b.behavior))
            .then_with(|| a.subject.cmp(&b.subject))
            .then_with(|| a.modifier.cmp(&b.modifier))
    });
    Ok(out)
}

/// Summed interval length per behavior.
pub fn total_time_by_behavior(tasks: &[TaskInterval]) -> BTreeMap<String, f64> {
    let mut totals = BTreeMap::new();
    for t in tasks {
        *totals.entry(t.behavior.clone()).or_insert(0.0) += t.interval.duration();
    }
    totals
}
