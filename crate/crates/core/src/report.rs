//! Cross-session comparison tables (framework vs human observer) and their
//! CSV / aligned-text renderings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::evaluation::{csv_field, CrossReference};
use crate::stats::{mean_sd, paired_compare, ComparisonResult, PairedTest, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: Option<f64>,
    pub sd: Option<f64>,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Self {
        let (mean, sd) = mean_sd(values);
        MeanSd { mean, sd }
    }

    /// `14.00±3.78`, or `27.23%±3.14%` with `pct`; `n/a` parts when undefined.
    pub fn cell(&self, pct: bool) -> String {
        let unit = if pct { "%" } else { "" };
        let part = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.2}{unit}"));
        format!("{}±{}", part(self.mean), part(self.sd))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceSummary {
    pub frequency_per_5min: MeanSd,
    pub duration_s: MeanSd,
    pub total_time_pct: MeanSd,
}

impl SourceSummary {
    fn of<'a>(metrics: impl Iterator<Item = &'a crate::metrics::VAMetrics> + Clone) -> Self {
        let freq: Vec<f64> = metrics.clone().map(|m| m.frequency_per_5min).collect();
        let dur: Vec<f64> = metrics.clone().filter_map(|m| m.mean_duration_s).collect();
        let total: Vec<f64> = metrics.map(|m| m.total_time_pct).collect();
        SourceSummary {
            frequency_per_5min: MeanSd::of(&freq),
            duration_s: MeanSd::of(&dur),
            total_time_pct: MeanSd::of(&total),
        }
    }
}

/// One monitor's block of the VA comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorComparison {
    pub monitor: String,
    pub n_sessions: usize,
    pub framework: SourceSummary,
    pub human: SourceSummary,
    /// Mean over sessions of framework minus human.
    pub mean_delta_frequency: f64,
    pub mean_delta_total_time_pct: f64,
    /// Paired tests on per-session total-time percentages.
    pub tests: Vec<ComparisonResult>,
}

/// Aggregates per-session cross references for one monitor. Session order
/// defines the pairing.
pub fn compare_monitor(monitor: &str, sessions: &[CrossReference]) -> Result<MonitorComparison, StatsError> {
    let fw: Vec<f64> = sessions.iter().map(|s| s.framework.total_time_pct).collect();
    let hu: Vec<f64> = sessions.iter().map(|s| s.human.total_time_pct).collect();
    let tests = PairedTest::ALL
        .iter()
        .map(|&t| paired_compare(&fw, &hu, t))
        .collect::<Result<Vec<_>, _>>()?;
    let n = sessions.len() as f64;
    Ok(MonitorComparison {
        monitor: monitor.to_string(),
        n_sessions: sessions.len(),
        framework: SourceSummary::of(sessions.iter().map(|s| &s.framework)),
        human: SourceSummary::of(sessions.iter().map(|s| &s.human)),
        mean_delta_frequency: sessions.iter().map(|s| s.delta.frequency_per_5min).sum::<f64>() / n,
        mean_delta_total_time_pct: sessions.iter().map(|s| s.delta.total_time_pct).sum::<f64>() / n,
        tests,
    })
}

/// One monitor × behavior block of the task-context overlap table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapComparison {
    pub monitor: String,
    pub behavior: String,
    pub n_sessions: usize,
    pub framework_pct: MeanSd,
    pub human_pct: MeanSd,
    pub tests: Vec<ComparisonResult>,
}

pub fn compare_overlap(
    monitor: &str,
    behavior: &str,
    framework_pct: &[f64],
    human_pct: &[f64],
) -> Result<OverlapComparison, StatsError> {
    let tests = PairedTest::ALL
        .iter()
        .map(|&t| paired_compare(framework_pct, human_pct, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OverlapComparison {
        monitor: monitor.to_string(),
        behavior: behavior.to_string(),
        n_sessions: framework_pct.len(),
        framework_pct: MeanSd::of(framework_pct),
        human_pct: MeanSd::of(human_pct),
        tests,
    })
}

fn p_of(tests: &[ComparisonResult], which: PairedTest) -> String {
    tests
        .iter()
        .find(|t| t.test == which)
        .map_or("n/a".to_string(), |t| format_p(t.p_value))
}

pub fn format_p(p: f64) -> String {
    format!("{p:.4}")
}

pub const TABLE2_HEADER: &str =
    "monitor,detector,n_sessions,frequency_per_5min,duration_s,total_time_pct,p_value_paired_t,p_value_wilcoxon";

pub fn table2_csv(rows: &[MonitorComparison]) -> String {
    let mut out = format!("{TABLE2_HEADER}\n");
    for r in rows {
        let (pt, pw) = (p_of(&r.tests, PairedTest::PairedT), p_of(&r.tests, PairedTest::WilcoxonSignedRank));
        for (detector, s) in [("Framework", &r.framework), ("Human observer", &r.human)] {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                csv_field(&r.monitor),
                detector,
                r.n_sessions,
                s.frequency_per_5min.cell(false),
                s.duration_s.cell(false),
                s.total_time_pct.cell(true),
                pt,
                pw
            );
        }
    }
    out
}

pub fn table2_text(rows: &[MonitorComparison]) -> String {
    let header = ["Monitor", "Detector", "Freq. [(5 min)^-1]", "Duration [s]", "Total time (%)", "P (t)", "P (Wilcoxon)"];
    let mut body = Vec::new();
    for r in rows {
        let (pt, pw) = (p_of(&r.tests, PairedTest::PairedT), p_of(&r.tests, PairedTest::WilcoxonSignedRank));
        body.push([
            r.monitor.clone(),
            "Framework".into(),
            r.framework.frequency_per_5min.cell(false),
            r.framework.duration_s.cell(false),
            r.framework.total_time_pct.cell(true),
            pt,
            pw,
        ]);
        body.push([
            String::new(),
            "Human observer".into(),
            r.human.frequency_per_5min.cell(false),
            r.human.duration_s.cell(false),
            r.human.total_time_pct.cell(true),
            String::new(),
            String::new(),
        ]);
    }
    aligned_table(&header, &body)
}

pub const TABLE3_HEADER: &str = "monitor,behavior,detector,n_sessions,total_time_pct,p_value_paired_t,p_value_wilcoxon";

pub fn table3_csv(rows: &[OverlapComparison]) -> String {
    let mut out = format!("{TABLE3_HEADER}\n");
    for r in rows {
        let (pt, pw) = (p_of(&r.tests, PairedTest::PairedT), p_of(&r.tests, PairedTest::WilcoxonSignedRank));
        for (detector, s) in [("Framework", &r.framework_pct), ("Human observer", &r.human_pct)] {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                csv_field(&r.monitor),
                csv_field(&r.behavior),
                detector,
                r.n_sessions,
                s.cell(true),
                pt,
                pw
            );
        }
    }
    out
}

pub fn table3_text(rows: &[OverlapComparison]) -> String {
    let header = ["Monitor", "Behavior", "Detector", "Total time (%)", "P (t)", "P (Wilcoxon)"];
    let mut body = Vec::new();
    for r in rows {
        body.push([
            r.monitor.clone(),
            r.behavior.clone(),
            "Framework".into(),
            r.framework_pct.cell(true),
            p_of(&r.tests, PairedTest::PairedT),
            p_of(&r.tests, PairedTest::WilcoxonSignedRank),
        ]);
        body.push([
            String::new(),
            String::new(),
            "Human observer".into(),
            r.human_pct.cell(true),
            String::new(),
            String::new(),
        ]);
    }
    aligned_table(&header, &body)
}

/// Left-aligned columns separated by two spaces, with a dashed rule under the header.
pub fn aligned_table<const N: usize>(header: &[&str; N], rows: &[[String; N]]) -> String {
    let mut widths = header.map(|h| h.chars().count());
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            s.push_str(cell);
            s.extend(std::iter::repeat_n(' ', w - cell.chars().count()));
        }
        s.trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (N - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}
