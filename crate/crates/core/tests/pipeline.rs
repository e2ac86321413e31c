mod common;

use orfocus_core::annotations::{parse_annotations, pair_state_events, PairingPolicy};
use orfocus_core::evaluation::cross_reference;
use orfocus_core::frame_log::{self, validate_session, LogFormat};
use orfocus_core::fusion::{decide_frames, decide_session, FusionConfig};
use orfocus_core::interval::Interval;
use orfocus_core::metrics::{task_overlap, va_summary, FrequencyMode};
use orfocus_core::segmentation::{rasterize, segment, SegConfig};
use orfocus_core::synth::{corrupt, generate_session, ConfidenceModel, ScriptedTask, SynthConfig, MONITOR_BEHAVIOR};
use orfocus_core::TaskInterval;

#[test]
fn fusion_reproduces_rendered_truth() {
    let c = SynthConfig {
        seed: 5,
        duration_jitter_s: 2.0,
        n_distractor_faces: 2,
        ..SynthConfig::default()
    };
    let s = generate_session(&c).unwrap();
    let fused = decide_session(&s.frames, &FusionConfig::default());
    let ts: Vec<f64> = s.frames.frames.iter().map(|f| f.timestamp).collect();
    let truth = rasterize(&s.truth_events, &ts, c.fps);
    assert_eq!(fused.values().collect::<Vec<_>>(), truth.values().collect::<Vec<_>>());
}

#[test]
fn synthetic_log_survives_serialization_and_validation() {
    let s = generate_session(&SynthConfig { n_distractor_faces: 1, ..SynthConfig::default() }).unwrap();
    let text = frame_log::to_jsonl_string(&s.frames);
    let parsed = frame_log::parse_frame_log(text.as_bytes(), LogFormat::Jsonl).unwrap();
    assert_eq!(parsed, s.frames);
    let report = validate_session(&parsed);
    assert_eq!(report.warning_count(), 0);
    assert_eq!(report.n_frames, 7501);
}

#[test]
fn fourteen_events_of_459_seconds() {
    let s = generate_session(&SynthConfig::default()).unwrap();
    let m = va_summary(&s.truth_events, s.phase).unwrap();
    assert_eq!(s.phase, Interval { start: 0.0, end: 300.0 });
    assert_eq!(m.n_events, 14);
    assert!((m.frequency_per_5min - 14.0).abs() < 1e-9);
    assert!((m.mean_duration_s.unwrap() - 4.59).abs() < 1e-9);
    // 14 * 4.59 / 300 = 21.42 %.
    assert!((m.total_time_pct - 21.42).abs() < 1e-9);

    let recovered = segment(&decide_session(&s.frames, &FusionConfig::default()), &SegConfig::RAW);
    let r = va_summary(&recovered, s.phase).unwrap();
    assert_eq!(r.n_events, 14);
    assert!((r.mean_duration_s.unwrap() - 4.59).abs() <= 1.0 / 25.0);
}

#[test]
fn extra_human_event_shifts_frequency_by_one_unit() {
    let c = SynthConfig {
        seed: 2,
        phase_duration_s: 600.0,
        ..SynthConfig::default()
    };
    let s = generate_session(&c).unwrap();
    let log = parse_annotations(&s.annotations_csv[..]).unwrap();
    let mut human: Vec<TaskInterval> = pair_state_events(&log.events, s.phase.end, PairingPolicy::Strict)
        .unwrap()
        .into_iter()
        .filter(|t| t.behavior == MONITOR_BEHAVIOR)
        .collect();
    assert_eq!(human.len(), s.truth_events.len());

    let same = cross_reference(&s.truth_events, &human, s.phase, FrequencyMode::Phase).unwrap();
    assert_eq!(same.delta.frequency_per_5min, 0.0);
    assert_eq!(same.delta.total_time_pct, 0.0);

    // A human-only glance in a gap between framework events.
    let gap = s
        .truth_events
        .windows(2)
        .map(|w| Interval { start: w[0].interval.end, end: w[1].interval.start })
        .find(|g| g.duration() > 1.0)
        .unwrap();
    human.push(TaskInterval {
        interval: Interval { start: gap.start + 0.2, end: gap.start + 0.7 },
        ..human[0].clone()
    });
    let x = cross_reference(&s.truth_events, &human, s.phase, FrequencyMode::Phase).unwrap();
    let unit = 300.0 / s.phase.duration();
    assert!((x.delta.frequency_per_5min + unit).abs() < 1e-12, "{}", x.delta.frequency_per_5min);
}

#[test]
fn corrupt_flips_about_one_in_ten() {
    let c = SynthConfig {
        phase_duration_s: 400.0,
        ..SynthConfig::default()
    };
    let s = generate_session(&c).unwrap();
    assert!(s.frames.frames.len() >= 10_000);
    let m = ConfidenceModel::default();
    let fusion = m.fusion_config();
    let before = decide_frames(&s.frames, &fusion);
    let noisy = corrupt(&s.frames, 0.1, 77, &m);
    let after = decide_frames(&noisy, &fusion);
    let flipped = before.iter().zip(&after).filter(|(a, b)| a.onfocus != b.onfocus).count();
    let frac = flipped as f64 / before.len() as f64;
    assert!((frac - 0.1).abs() <= 0.01, "flipped fraction {frac}");
    for (a, b) in s.frames.frames.iter().zip(&noisy.frames) {
        assert_eq!(a.timestamp, b.timestamp);
    }
}

#[test]
fn half_flip_noise_converges_to_even_mixture() {
    // Under p = 0.5 every frame is onfocus with probability 1/2 whatever the
    // truth, so the recovered total time is a binomial proportion.
    let mut pct = Vec::new();
    for seed in 0..20 {
        let c = SynthConfig {
            seed,
            flip_probability: 0.5,
            ..SynthConfig::default()
        };
        let s = generate_session(&c).unwrap();
        let ev = segment(&decide_session(&s.frames, &FusionConfig::default()), &SegConfig::RAW);
        pct.push(va_summary(&ev, s.phase).unwrap().total_time_pct);
    }
    let n_frames = 7500.0;
    let sigma_one = 100.0 * (0.25f64 / n_frames).sqrt();
    for p in &pct {
        assert!((p - 50.0).abs() < 5.0 * sigma_one, "session total {p}");
    }
    let mean = pct.iter().sum::<f64>() / pct.len() as f64;
    assert!((mean - 50.0).abs() < 4.0 * sigma_one / (pct.len() as f64).sqrt(), "mean {mean}");
}

#[test]
fn airway_overlap_from_synthetic_script() {
    let c = SynthConfig {
        seed: 9,
        task_script: vec![
            ScriptedTask { behavior: "Airway manipulation".into(), interval: Interval { start: 40.0, end: 160.0 } },
            ScriptedTask { behavior: "Drug administration".into(), interval: Interval { start: 10.0, end: 60.0 } },
        ],
        ..SynthConfig::default()
    };
    let s = generate_session(&c).unwrap();
    let rows = task_overlap(&s.truth_events, &s.truth_tasks).unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let gaze: Vec<Interval> = s.truth_events.iter().map(|e| e.interval).collect();
        let oracle = common::raster_overlap_pct(&gaze, &common::behavior_intervals(&s.truth_tasks, &row.behavior), 0.001).unwrap();
        assert!((row.overlap_pct - oracle).abs() < 0.1);
    }
}
