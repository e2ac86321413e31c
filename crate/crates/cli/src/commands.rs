use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use orfocus_core::annotations::{parse_annotations, pair_state_events, PairingPolicy, TaskInterval};
use orfocus_core::evaluation::{
    cross_reference, cross_validate, frame_metrics, split_dataset, table1_csv, table1_text, Confusion, CrossReference,
    LabeledFrame, LabeledFrameSet, ModelRow, DEFAULT_SPLIT,
};
use orfocus_core::frame_log::{parse_frame_log, to_jsonl_string, validate_session, LogFormat, SessionFrames};
use orfocus_core::fusion::{decide_frames, series_from_decisions, FusionConfig};
use orfocus_core::interval::Interval;
use orfocus_core::metrics::{task_overlap, va_summary_with, FrequencyMode, OverlapRow, VAMetrics};
use orfocus_core::report::{compare_monitor, compare_overlap, table2_csv, table2_text, table3_csv, table3_text};
use orfocus_core::segmentation::{segment, GazeEvent, SegConfig};
use orfocus_core::synth::{generate_session, ScriptedTask, SynthConfig};
use orfocus_core::timeline::build_timeline;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::config::FileConfig;
use crate::failure::Failure;
use crate::output::{opt, Artifacts};

fn log_format(path: &Path, explicit: Option<FramesFormat>) -> LogFormat {
    match explicit {
        Some(FramesFormat::Csv) => LogFormat::Csv,
        Some(FramesFormat::Jsonl) => LogFormat::Jsonl,
        None if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => LogFormat::Csv,
        None => LogFormat::Jsonl,
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::reading(path, e))
}

fn load_frames(path: &Path, format: Option<FramesFormat>) -> Result<SessionFrames, Failure> {
    parse_frame_log(open(path)?, log_format(path, format)).map_err(|e| Failure::parse(path, e))
}

fn load_tasks(path: &Path, session_end: f64, pairing: Pairing) -> Result<Vec<TaskInterval>, Failure> {
    let log = parse_annotations(open(path)?).map_err(|e| Failure::parse(path, e))?;
    for w in &log.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    let policy = match pairing {
        Pairing::Strict => PairingPolicy::Strict,
        Pairing::Truncate => PairingPolicy::Truncate,
    };
    pair_state_events(&log.events, session_end, policy).map_err(|e| Failure::parse(path, e))
}

fn frequency_mode(m: FrequencyModeArg) -> FrequencyMode {
    match m {
        FrequencyModeArg::Phase => FrequencyMode::Phase,
        FrequencyModeArg::Window => FrequencyMode::Window,
    }
}

fn check_inputs_exist<'a>(paths: impl IntoIterator<Item = &'a PathBuf>) -> Result<(), Failure> {
    for p in paths {
        if !p.is_file() {
            return Err(Failure::Config(format!("input file not found: {}", p.display())));
        }
    }
    Ok(())
}

fn gaze_events(s: &SessionFrames, fusion: &FusionConfig, seg: &SegConfig) -> (Vec<GazeEvent>, usize) {
    let decisions = decide_frames(s, fusion);
    let flagged = decisions.iter().filter(|d| d.flag.is_some()).count();
    (segment(&series_from_decisions(&decisions, s.fps_nominal), seg), flagged)
}

fn resolve_phase(s: &SessionFrames, p: &PhaseArgs) -> Result<Interval, Failure> {
    match (p.phase_start, p.phase_end) {
        (Some(a), Some(b)) => Interval::new(a, b)
            .filter(|iv| iv.start.is_finite() && iv.end.is_finite() && iv.duration() > 0.0)
            .ok_or_else(|| Failure::Config(format!("phase [{a}, {b}] must have end > start"))),
        _ => Ok(s.analysis_phase()),
    }
}

fn events_csv(events: &[GazeEvent]) -> String {
    let mut out = String::from("start,end,duration,n_frames,mean_confidence\n");
    for e in events {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.interval.start,
            e.interval.end,
            e.duration(),
            e.n_frames,
            opt(e.mean_confidence)
        ));
    }
    out
}

fn va_csv(rows: &[(&str, &str, &VAMetrics)]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "session_id",
        "camera_id",
        "phase_start",
        "phase_end",
        "n_events",
        "frequency_per_5min",
        "mean_duration_s",
        "sd_duration_s",
        "total_time_pct",
    ];
    w.write_record(header).map_err(|e| Failure::Io(e.to_string()))?;
    for (session, camera, m) in rows {
        w.write_record([
            session.to_string(),
            camera.to_string(),
            m.phase.start.to_string(),
            m.phase.end.to_string(),
            m.n_events.to_string(),
            m.frequency_per_5min.to_string(),
            opt(m.mean_duration_s),
            opt(m.sd_duration_s),
            m.total_time_pct.to_string(),
        ])
        .map_err(|e| Failure::Io(e.to_string()))?;
    }
    into_string(w)
}

fn overlap_csv(rows: &[OverlapRow]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["behavior", "task_time_s", "overlap_time_s", "overlap_pct"])
        .map_err(|e| Failure::Io(e.to_string()))?;
    for r in rows {
        w.write_record([
            r.behavior.clone(),
            r.task_time_s.to_string(),
            r.overlap_time_s.to_string(),
            r.overlap_pct.to_string(),
        ])
        .map_err(|e| Failure::Io(e.to_string()))?;
    }
    into_string(w)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String, Failure> {
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    session_id: &'a str,
    camera_id: &'a str,
    fusion: &'a FusionConfig,
    segmentation: &'a SegConfig,
    frequency_mode: FrequencyMode,
    n_frames: usize,
    tracked_subject_missing_frames: usize,
    metrics: &'a VAMetrics,
}

pub fn analyze(cfg: &FileConfig, a: &AnalyzeArgs) -> Result<Artifacts, Failure> {
    check_inputs_exist(std::iter::once(&a.frames).chain(a.annotations.as_ref()))?;
    let fusion = cfg.fusion(&a.fusion)?;
    let seg = cfg.segmentation(&a.seg)?;
    let mode = frequency_mode(a.frequency_mode);

    let s = load_frames(&a.frames, a.frames_format)?;
    let phase = resolve_phase(&s, &a.phase)?;
    let tasks = match &a.annotations {
        Some(p) => Some(load_tasks(p, s.time_span().end.max(phase.end), a.pairing)?),
        None => None,
    };
    let (events, flagged) = gaze_events(&s, &fusion, &seg);
    let metrics = va_summary_with(&events, phase, mode).map_err(|e| Failure::Config(e.to_string()))?;
    let overlap = match &tasks {
        Some(t) => Some(task_overlap(&events, t).map_err(|e| Failure::Parse(e.to_string()))?),
        None => None,
    };

    let mut out = Artifacts::default();
    if a.format.contains(&OutputFormat::Csv) {
        out.add("events.csv", events_csv(&events));
        out.add("va_metrics.csv", va_csv(&[(&s.session_id, &s.camera_id, &metrics)])?);
        if let Some(rows) = &overlap {
            out.add("task_overlap.csv", overlap_csv(rows)?);
        }
    }
    if a.format.contains(&OutputFormat::Json) {
        out.add_json("events.json", &events);
        out.add_json(
            "va_metrics.json",
            &AnalyzeReport {
                session_id: &s.session_id,
                camera_id: &s.camera_id,
                fusion: &fusion,
                segmentation: &seg,
                frequency_mode: mode,
                n_frames: s.frames.len(),
                tracked_subject_missing_frames: flagged,
                metrics: &metrics,
            },
        );
        if let Some(rows) = &overlap {
            out.add_json("task_overlap.json", rows);
        }
    }
    if a.format.contains(&OutputFormat::Svg) {
        let label = format!("Gaze: {}", s.camera_id);
        let tl = build_timeline(phase, &label, &events, tasks.as_deref().unwrap_or(&[]));
        out.add("timeline.svg", tl.to_svg());
    }
    Ok(out)
}

struct SessionResult {
    frames_path: String,
    annotations_path: String,
    session_id: String,
    camera_id: String,
    xref: CrossReference,
    /// behavior -> (framework %, human %), only for behaviors present in the session.
    overlap: Vec<(String, f64, f64)>,
}

#[derive(Serialize)]
struct SessionJson<'a> {
    frames: &'a str,
    annotations: &'a str,
    session_id: &'a str,
    camera_id: &'a str,
    cross_reference: &'a CrossReference,
    task_overlap: Vec<OverlapJson<'a>>,
}

#[derive(Serialize)]
struct OverlapJson<'a> {
    behavior: &'a str,
    framework_pct: f64,
    human_pct: f64,
}

fn compare_one(
    frames: &Path,
    annotations: &Path,
    a: &CompareArgs,
    fusion: &FusionConfig,
    seg: &SegConfig,
) -> Result<SessionResult, Failure> {
    let s = load_frames(frames, a.frames_format)?;
    let phase = s.analysis_phase();
    let tasks = load_tasks(annotations, s.time_span().end.max(phase.end), a.pairing)?;
    let (fw, _) = gaze_events(&s, fusion, seg);
    let human: Vec<TaskInterval> = tasks
        .iter()
        .filter(|t| t.behavior == a.human_behavior && t.modifier.as_deref().is_none_or(|m| m == s.camera_id))
        .cloned()
        .collect();
    let xref = cross_reference(&fw, &human, phase, frequency_mode(a.frequency_mode))
        .map_err(|e| Failure::Config(format!("{}: {e}", frames.display())))?;

    let human_events: Vec<GazeEvent> = human.iter().map(|t| GazeEvent::from_interval(t.interval)).collect();
    let mut overlap = Vec::new();
    for behavior in &a.task_behaviors {
        let subset: Vec<TaskInterval> = tasks.iter().filter(|t| &t.behavior == behavior).cloned().collect();
        if subset.is_empty() {
            continue;
        }
        let pct = |ev: &[GazeEvent]| -> Result<f64, Failure> {
            let rows = task_overlap(ev, &subset).map_err(|e| Failure::parse(annotations, e))?;
            Ok(rows[0].overlap_pct)
        };
        overlap.push((behavior.clone(), pct(&fw)?, pct(&human_events)?));
    }
    Ok(SessionResult {
        frames_path: frames.display().to_string(),
        annotations_path: annotations.display().to_string(),
        session_id: s.session_id,
        camera_id: s.camera_id,
        xref,
        overlap,
    })
}

pub fn compare(cfg: &FileConfig, a: &CompareArgs) -> Result<Artifacts, Failure> {
    if a.frames.len() != a.annotations.len() {
        return Err(Failure::Config(format!(
            "{} frame logs but {} annotation files; sessions are paired by position",
            a.frames.len(),
            a.annotations.len()
        )));
    }
    if a.frames.len() < 2 {
        return Err(Failure::Config("compare needs at least 2 sessions".into()));
    }
    check_inputs_exist(a.frames.iter().chain(&a.annotations))?;
    let fusion = cfg.fusion(&a.fusion)?;
    let seg = cfg.segmentation(&a.seg)?;

    let results: Vec<Result<SessionResult, Failure>> = a
        .frames
        .par_iter()
        .zip(a.annotations.par_iter())
        .map(|(f, ann)| compare_one(f, ann, a, &fusion, &seg))
        .collect();
    let sessions = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    // Monitors in order of first appearance.
    let mut monitors: Vec<&str> = Vec::new();
    for s in &sessions {
        if !monitors.contains(&s.camera_id.as_str()) {
            monitors.push(&s.camera_id);
        }
    }
    let mut table2 = Vec::new();
    let mut table3 = Vec::new();
    for monitor in monitors {
        let group: Vec<&SessionResult> = sessions.iter().filter(|s| s.camera_id == monitor).collect();
        if group.len() < 2 {
            return Err(Failure::Config(format!("monitor '{monitor}' has a single session; at least 2 are needed")));
        }
        let xrefs: Vec<CrossReference> = group.iter().map(|s| s.xref.clone()).collect();
        table2.push(compare_monitor(monitor, &xrefs).map_err(|e| Failure::Config(e.to_string()))?);

        for behavior in &a.task_behaviors {
            let pairs: Vec<(f64, f64)> = group
                .iter()
                .filter_map(|s| s.overlap.iter().find(|o| &o.0 == behavior).map(|o| (o.1, o.2)))
                .collect();
            if pairs.len() < group.len() {
                eprintln!(
                    "warning: '{behavior}' missing from {} of {} sessions on '{monitor}'; overlap row skipped",
                    group.len() - pairs.len(),
                    group.len()
                );
                continue;
            }
            let (fw, hu): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            table3.push(compare_overlap(monitor, behavior, &fw, &hu).map_err(|e| Failure::Config(e.to_string()))?);
        }
    }

    let mut out = Artifacts::default();
    if a.format.contains(&OutputFormat::Csv) {
        out.add("table2.csv", table2_csv(&table2));
        out.add("table2.txt", table2_text(&table2));
        if !table3.is_empty() {
            out.add("table3.csv", table3_csv(&table3));
            out.add("table3.txt", table3_text(&table3));
        }
    }
    if a.format.contains(&OutputFormat::Json) {
        let per_session: Vec<SessionJson> = sessions
            .iter()
            .map(|s| SessionJson {
                frames: &s.frames_path,
                annotations: &s.annotations_path,
                session_id: &s.session_id,
                camera_id: &s.camera_id,
                cross_reference: &s.xref,
                task_overlap: s
                    .overlap
                    .iter()
                    .map(|o| OverlapJson { behavior: &o.0, framework_pct: o.1, human_pct: o.2 })
                    .collect(),
            })
            .collect();
        out.add_json(
            "comparison.json",
            &serde_json::json!({
                "fusion": fusion,
                "segmentation": seg,
                "sessions": per_session,
                "monitors": table2,
                "task_overlap": table3,
            }),
        );
    }
    Ok(out)
}

fn parse_label(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "onfocus" => Some(true),
        "0" | "false" | "out_of_focus" | "offfocus" => Some(false),
        _ => None,
    }
}

fn load_labels(path: &Path) -> Result<Vec<LabeledFrame>, Failure> {
    #[derive(Deserialize)]
    struct Row {
        frame_index: u64,
        label: String,
    }
    let mut r = csv::Reader::from_reader(open(path)?);
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Failure::parse(path, format!("line {line}: {e}")))?;
        let onfocus = parse_label(&row.label)
            .ok_or_else(|| Failure::parse(path, format!("line {line}: unknown label '{}'", row.label)))?;
        out.push(LabeledFrame { frame_index: row.frame_index, onfocus });
    }
    Ok(out)
}

#[derive(Serialize)]
struct EvaluationJson<'a> {
    model: &'a str,
    dataset: &'a str,
    fusion: &'a FusionConfig,
    n_labeled: usize,
    folds: usize,
    seed: u64,
    overall: orfocus_core::evaluation::FrameScores,
    confusion: ConfusionJson,
    cross_validation: &'a orfocus_core::evaluation::AgreementReport,
}

#[derive(Serialize)]
struct ConfusionJson {
    tp: usize,
    fp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
    tn: usize,
}

pub fn evaluate(cfg: &FileConfig, a: &EvaluateArgs) -> Result<Artifacts, Failure> {
    check_inputs_exist([&a.frames, &a.labels])?;
    let fusion = cfg.fusion(&a.fusion)?;
    let s = load_frames(&a.frames, a.frames_format)?;
    let labels = load_labels(&a.labels)?;
    let set = LabeledFrameSet::new(labels).map_err(|e| Failure::parse(&a.labels, e))?;

    let predicted: HashMap<u64, bool> = decide_frames(&s, &fusion).into_iter().map(|d| (d.frame_index, d.onfocus)).collect();
    for item in set.items() {
        if !predicted.contains_key(&item.frame_index) {
            return Err(Failure::parse(&a.labels, format!("frame_index {} is not in the frame log", item.frame_index)));
        }
    }
    let pairs = |items: &[LabeledFrame]| -> (Vec<bool>, Vec<bool>) {
        items.iter().map(|i| (predicted[&i.frame_index], i.onfocus)).unzip()
    };

    let report = cross_validate(&set, a.folds, a.seed, |_, _, held| {
        let (p, t) = pairs(held);
        frame_metrics(&p, &t).expect("folds are non-empty")
    })
    .map_err(|e| Failure::Config(e.to_string()))?;
    let (p, t) = pairs(set.items());
    let overall = frame_metrics(&p, &t).map_err(|e| Failure::Config(e.to_string()))?;
    let c = Confusion::from_pairs(&p, &t);
    let split = split_dataset(set.len(), DEFAULT_SPLIT, a.seed).map_err(|e| Failure::Config(e.to_string()))?;
    let to_frames = |idx: &[usize]| -> Vec<u64> { idx.iter().map(|&i| set.items()[i].frame_index).collect() };

    let rows = [ModelRow { model: a.model.clone(), dataset: a.dataset.clone(), report }];
    let mut out = Artifacts::default();
    out.add("table1.csv", table1_csv(&rows));
    out.add("table1.txt", table1_text(&rows));
    out.add_json(
        "evaluation.json",
        &EvaluationJson {
            model: &a.model,
            dataset: &a.dataset,
            fusion: &fusion,
            n_labeled: set.len(),
            folds: a.folds,
            seed: a.seed,
            overall,
            confusion: ConfusionJson { tp: c.tp, fp: c.fp, fn_: c.fn_, tn: c.tn },
            cross_validation: &rows[0].report,
        },
    );
    out.add_json(
        "split.json",
        &serde_json::json!({
            "seed": a.seed,
            "ratios": [DEFAULT_SPLIT.0, DEFAULT_SPLIT.1, DEFAULT_SPLIT.2],
            "train": to_frames(&split.train),
            "val": to_frames(&split.val),
            "test": to_frames(&split.test),
        }),
    );
    Ok(out)
}

pub fn timeline(cfg: &FileConfig, a: &TimelineArgs) -> Result<Artifacts, Failure> {
    check_inputs_exist([&a.frames, &a.annotations])?;
    let fusion = cfg.fusion(&a.fusion)?;
    let seg = cfg.segmentation(&a.seg)?;
    let s = load_frames(&a.frames, a.frames_format)?;
    let axis = s.analysis_phase();
    let tasks = load_tasks(&a.annotations, s.time_span().end.max(axis.end), a.pairing)?;
    let (events, _) = gaze_events(&s, &fusion, &seg);
    let tl = build_timeline(axis, &format!("Gaze: {}", s.camera_id), &events, &tasks);
    let mut out = Artifacts::default();
    out.add("timeline.csv", tl.to_csv());
    out.add("timeline.svg", tl.to_svg());
    Ok(out)
}

fn parse_task(s: &str) -> Result<ScriptedTask, Failure> {
    let bad = || Failure::Config(format!("--task '{s}' must be BEHAVIOR:START:END"));
    let mut parts = s.rsplitn(3, ':');
    let end: f64 = parts.next().and_then(|v| v.trim().parse().ok()).ok_or_else(bad)?;
    let start: f64 = parts.next().and_then(|v| v.trim().parse().ok()).ok_or_else(bad)?;
    let behavior = parts.next().filter(|b| !b.is_empty()).ok_or_else(bad)?;
    let interval = Interval::new(start, end).filter(|iv| iv.duration() > 0.0).ok_or_else(bad)?;
    Ok(ScriptedTask { behavior: behavior.to_string(), interval })
}

pub fn synth(a: &SynthArgs) -> Result<Artifacts, Failure> {
    let mut c: SynthConfig = match &a.params {
        Some(p) => {
            check_inputs_exist([p])?;
            serde_json::from_reader(open(p)?).map_err(|e| Failure::parse(p, e))?
        }
        None => SynthConfig::default(),
    };
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => { $(if let Some(v) = a.$flag.clone() { c.$field = v; })* };
    }
    set!(seed => seed, session_id => session_id, camera_id => camera_id, phase_duration => phase_duration_s,
         fps => fps, rate => event_rate_per_5min, mean_duration => mean_event_duration_s,
         jitter => duration_jitter_s, flip_probability => flip_probability, distractors => n_distractor_faces);
    for t in &a.tasks {
        c.task_script.push(parse_task(t)?);
    }
    let s = generate_session(&c).map_err(|e| Failure::Config(e.to_string()))?;
    let mut out = Artifacts::default();
    out.add("frames.jsonl", to_jsonl_string(&s.frames));
    out.add("annotations.csv", s.annotations_csv.clone());
    out.add("truth.json", s.truth_json() + "\n");
    out.add_json("synth_config.json", &c);
    Ok(out)
}

pub fn validate(a: &ValidateArgs) -> Result<(Artifacts, String), Failure> {
    check_inputs_exist([&a.frames])?;
    let s = load_frames(&a.frames, a.frames_format)?;
    let report = validate_session(&s);
    let mut out = Artifacts::default();
    out.add_json("validation.json", &report);
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    Ok((out, text))
}
