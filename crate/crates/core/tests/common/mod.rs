//! Reference implementations used as test oracles. Each one takes the
//! slowest obvious route and shares no code with the library paths it checks.
#![allow(dead_code)]

use orfocus_core::annotations::TaskInterval;
use orfocus_core::interval::Interval;
use orfocus_core::segmentation::{BinarySeries, GazeEvent, SegConfig};

/// Segmenter by repeated pairwise merging until nothing changes.
pub fn brute_segment(s: &BinarySeries, c: &SegConfig) -> Vec<GazeEvent> {
    let period = 1.0 / s.fps_nominal;
    let n = s.samples.len();

    // (first index, last index, start, end)
    let mut events: Vec<(usize, usize, f64, f64)> = Vec::new();
    for i in 0..n {
        if !s.samples[i].value || (i > 0 && s.samples[i - 1].value) {
            continue;
        }
        let mut j = i;
        while j + 1 < n && s.samples[j + 1].value {
            j += 1;
        }
        let mut end = s.samples[j].t + period;
        if j + 1 < n {
            end = end.min(s.samples[j + 1].t);
        }
        events.push((i, j, s.samples[i].t, end));
    }

    loop {
        let pos = (0..events.len().saturating_sub(1)).find(|&k| events[k + 1].2 - events[k].3 <= c.max_gap);
        let Some(k) = pos else { break };
        let next = events.remove(k + 1);
        let cur = &mut events[k];
        cur.1 = next.1;
        cur.3 = cur.3.max(next.3);
    }

    events
        .into_iter()
        .filter(|e| e.3 - e.2 >= c.min_duration)
        .map(|(first, last, start, end)| {
            let mut n_frames = 0;
            let mut sum = 0.0;
            let mut count = 0;
            for sample in &s.samples[first..=last] {
                if sample.value {
                    n_frames += 1;
                    if let Some(conf) = sample.confidence {
                        sum += conf;
                        count += 1;
                    }
                }
            }
            GazeEvent {
                interval: Interval { start, end },
                n_frames,
                mean_confidence: if count > 0 { Some(sum / count as f64) } else { None },
            }
        })
        .collect()
}

/// Overlap percentage for one behavior by sampling cell midpoints on a
/// `step`-second grid.
pub fn raster_overlap_pct(events: &[Interval], tasks: &[Interval], step: f64) -> Option<f64> {
    let lo = tasks.iter().map(|t| t.start).fold(f64::INFINITY, f64::min);
    let hi = tasks.iter().map(|t| t.end).fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return None;
    }
    let cells = ((hi - lo) / step).ceil() as usize;
    let inside = |set: &[Interval], t: f64| set.iter().any(|iv| t >= iv.start && t < iv.end);
    let (mut task_cells, mut both) = (0usize, 0usize);
    for k in 0..cells {
        let t = lo + (k as f64 + 0.5) * step;
        if inside(tasks, t) {
            task_cells += 1;
            if inside(events, t) {
                both += 1;
            }
        }
    }
    (task_cells > 0).then(|| 100.0 * both as f64 / task_cells as f64)
}

pub fn behavior_intervals(tasks: &[TaskInterval], behavior: &str) -> Vec<Interval> {
    tasks.iter().filter(|t| t.behavior == behavior).map(|t| t.interval).collect()
}

/// Two-sided Wilcoxon signed-rank p-value by visiting every sign assignment.
/// Zero differences are dropped, ties get mid-ranks.
pub fn wilcoxon_enumerated(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    // Doubled mid-ranks: for each value, 2 * (#smaller) + (#equal) + 1.
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let ranks2: Vec<i64> = abs
        .iter()
        .map(|&v| {
            let smaller = abs.iter().filter(|&&w| w < v).count() as i64;
            let equal = abs.iter().filter(|&&w| w == v).count() as i64;
            2 * smaller + equal + 1
        })
        .collect();
    let total: i64 = ranks2.iter().sum();
    let observed: i64 = d.iter().zip(&ranks2).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let obs_dev = (2 * observed - total).abs();
    let mut hits: u64 = 0;
    for mask in 0u64..(1 << n) {
        let w: i64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks2[i]).sum();
        if (2 * w - total).abs() >= obs_dev {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7, n = 9.
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b).
fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Paired t-test from the textbook formulas: t = mean(d) / (s_d / sqrt(n)),
/// p = I_{ν/(ν+t²)}(ν/2, 1/2) with ν = n − 1.
pub fn paired_t_reference(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let t = mean / (var / n).sqrt();
    let nu = n - 1.0;
    (t, reg_inc_beta(nu / 2.0, 0.5, nu / (nu + t * t)))
}

/// (accuracy, f1) from an explicitly tabulated confusion matrix.
pub fn brute_confusion(pred: &[bool], truth: &[bool]) -> (f64, Option<f64>) {
    let mut m = [[0usize; 2]; 2];
    for i in 0..pred.len() {
        m[pred[i] as usize][truth[i] as usize] += 1;
    }
    let (tp, fp, fn_, tn) = (m[1][1], m[1][0], m[0][1], m[0][0]);
    let acc = (tp + tn) as f64 / pred.len() as f64;
    let f1 = if 2 * tp + fp + fn_ == 0 {
        None
    } else {
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        Some(if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) })
    };
    (acc, f1)
}

/// Gap count by scanning consecutive deltas.
pub fn brute_gap_count(timestamps: &[f64], fps: f64) -> usize {
    let mut count = 0;
    for i in 1..timestamps.len() {
        if timestamps[i] - timestamps[i - 1] > 2.0 / fps {
            count += 1;
        }
    }
    count
}
