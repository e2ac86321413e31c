//! Gantt-style timeline of labeled tasks with gaze events as an extra track.

use std::fmt::Write as _;

use serde::Serialize;

use crate::annotations::TaskInterval;
use crate::evaluation::csv_field;
use crate::interval::Interval;
use crate::segmentation::GazeEvent;

pub const LEFT_MARGIN: f64 = 200.0;
pub const PLOT_WIDTH: f64 = 900.0;
pub const TOP_MARGIN: f64 = 30.0;
pub const ROW_HEIGHT: f64 = 22.0;
pub const BAR_HEIGHT: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    Gaze,
    Task,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bar {
    pub track: Track,
    pub label: String,
    /// Display row, 0 at the top.
    pub row: usize,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub axis: Interval,
    pub rows: Vec<String>,
    pub bars: Vec<Bar>,
}

/// Lays out the gaze track first, then one or more rows per behavior in
/// order of first appearance. Overlapping bars of the same behavior go to
/// extra rows so that no bar is hidden or cut.
pub fn build_timeline(axis: Interval, gaze_label: &str, gaze: &[GazeEvent], tasks: &[TaskInterval]) -> Timeline {
    let mut rows = vec![gaze_label.to_string()];
    let mut bars: Vec<Bar> = gaze
        .iter()
        .map(|e| Bar {
            track: Track::Gaze,
            label: gaze_label.to_string(),
            row: 0,
            interval: e.interval,
        })
        .collect();

    let mut sorted: Vec<&TaskInterval> = tasks.iter().collect();
    sorted.sort_by(|a, b| a.interval.start.total_cmp(&b.interval.start));
    let mut behaviors: Vec<&str> = Vec::new();
    for t in &sorted {
        if !behaviors.contains(&t.behavior.as_str()) {
            behaviors.push(&t.behavior);
        }
    }
    for behavior in behaviors {
        // Each lane remembers where its last bar ends.
        let mut lanes: Vec<(usize, f64)> = Vec::new();
        for t in sorted.iter().filter(|t| t.behavior == behavior) {
            let row = match lanes.iter_mut().find(|(_, end)| *end <= t.interval.start) {
                Some(lane) => {
                    lane.1 = t.interval.end;
                    lane.0
                }
                None => {
                    let row = rows.len();
                    rows.push(behavior.to_string());
                    lanes.push((row, t.interval.end));
                    row
                }
            };
            bars.push(Bar {
                track: Track::Task,
                label: behavior.to_string(),
                row,
                interval: t.interval,
            });
        }
    }
    Timeline { axis, rows, bars }
}

impl Timeline {
    pub fn x_of(&self, t: f64) -> f64 {
        let span = self.axis.duration();
        let frac = if span > 0.0 { (t - self.axis.start) / span } else { 0.0 };
        LEFT_MARGIN + frac * PLOT_WIDTH
    }

    pub fn y_of(&self, row: usize) -> f64 {
        TOP_MARGIN + row as f64 * ROW_HEIGHT + (ROW_HEIGHT - BAR_HEIGHT) / 2.0
    }

    /// `track,label,row,start,end`, one line per bar.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("track,behavior,row,start,end\n");
        for b in &self.bars {
            let track = match b.track {
                Track::Gaze => "gaze",
                Track::Task => "task",
            };
            let _ = writeln!(out, "{track},{},{},{},{}", csv_field(&b.label), b.row, b.interval.start, b.interval.end);
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let height = TOP_MARGIN + self.rows.len() as f64 * ROW_HEIGHT + 30.0;
        let width = LEFT_MARGIN + PLOT_WIDTH + 20.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
        for (i, label) in self.rows.iter().enumerate() {
            let y = TOP_MARGIN + i as f64 * ROW_HEIGHT + ROW_HEIGHT / 2.0 + 4.0;
            let _ = writeln!(s, r#"<text x="{:.3}" y="{y:.3}" text-anchor="end">{}</text>"#, LEFT_MARGIN - 8.0, xml_escape(label));
        }
        for b in &self.bars {
            let x = self.x_of(b.interval.start);
            let w = self.x_of(b.interval.end) - x;
            let fill = match b.track {
                Track::Gaze => "#d62728",
                Track::Task => "#1f77b4",
            };
            let _ = writeln!(
                s,
                r#"<rect class="bar" data-row="{}" data-start="{}" data-end="{}" x="{x:.3}" y="{:.3}" width="{w:.3}" height="{BAR_HEIGHT:.3}" fill="{fill}"/>"#,
                b.row,
                b.interval.start,
                b.interval.end,
                self.y_of(b.row)
            );
        }
        let axis_y = TOP_MARGIN + self.rows.len() as f64 * ROW_HEIGHT + 4.0;
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT_MARGIN:.3}" y1="{axis_y:.3}" x2="{:.3}" y2="{axis_y:.3}" stroke="black"/>"#,
            LEFT_MARGIN + PLOT_WIDTH
        );
        for k in 0..=5 {
            let t = self.axis.start + self.axis.duration() * k as f64 / 5.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{t:.1} s</text>"#,
                self.x_of(t),
                axis_y + 16.0
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(b: &str, subject: &str, s: f64, e: f64) -> TaskInterval {
        TaskInterval {
            behavior: b.into(),
            subject: subject.into(),
            interval: Interval { start: s, end: e },
            modifier: None,
        }
    }

    #[test]
    fn gaze_only_when_no_tasks() {
        let tl = build_timeline(Interval { start: 0.0, end: 10.0 }, "gaze", &[], &[]);
        assert_eq!(tl.rows, vec!["gaze"]);
        assert!(tl.bars.is_empty());
    }

    #[test]
    fn overlapping_same_behavior_stacks() {
        let tasks = [task("Airway", "a", 0.0, 10.0), task("Airway", "b", 5.0, 15.0), task("Airway", "a", 12.0, 20.0)];
        let tl = build_timeline(Interval { start: 0.0, end: 20.0 }, "gaze", &[], &tasks);
        let rows: Vec<usize> = tl.bars.iter().map(|b| b.row).collect();
        assert_eq!(rows, vec![1, 2, 1]);
        assert_eq!(tl.rows.len(), 3);
    }

    #[test]
    fn coordinates_follow_axis() {
        let tl = build_timeline(Interval { start: 0.0, end: 100.0 }, "gaze", &[], &[]);
        assert_eq!(tl.x_of(0.0), LEFT_MARGIN);
        assert_eq!(tl.x_of(50.0), LEFT_MARGIN + PLOT_WIDTH / 2.0);
    }
}
