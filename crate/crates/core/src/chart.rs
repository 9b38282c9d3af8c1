//! Deterministic SVG line charts of observed data against a fitted curve.

use std::fmt::Write;

use chrono::{Duration, NaiveDate};

use crate::error::{Error, Result};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub label: String,
    /// `(day index, value)` pairs.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Date of day index 0.
    pub start_date: NaiveDate,
    pub data: Polyline,
    pub fitted: Polyline,
    pub split: Option<f64>,
}

impl ChartSpec {
    pub fn validate(&self) -> Result<()> {
        for line in [&self.data, &self.fitted] {
            if line.points.is_empty() {
                return Err(Error::InvalidParams(format!(
                    "polyline '{}' is empty",
                    line.label
                )));
            }
            if line
                .points
                .iter()
                .any(|(x, y)| !x.is_finite() || !y.is_finite())
            {
                return Err(Error::InvalidParams(format!(
                    "polyline '{}' has non-finite coordinates",
                    line.label
                )));
            }
        }
        if self.split.is_some_and(|s| !s.is_finite()) {
            return Err(Error::InvalidParams("split marker is not finite".into()));
        }
        Ok(())
    }
}

/// Tick positions with a 1/2/5 × 10^k step covering `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = lo.abs().max(1.0) * 0.05;
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render_chart(spec: &ChartSpec) -> String {
    let all = spec.data.points.iter().chain(&spec.fitted.points);
    let (x0, x1) = {
        let (lo, hi) = all
            .clone()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.0), hi.max(p.0))
            });
        let (lo, hi) = spec.split.map_or((lo, hi), |s| (lo.min(s), hi.max(s)));
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, hi + 1.0)
        }
    };
    let (y0, y1) = extent(all.map(|p| p.1));

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );

    // Axes
    let _ = writeln!(
        out,
        r#"<path d="M{:.2},{:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        LEFT,
        TOP,
        TOP + plot_h,
        LEFT + plot_w
    );

    let mut ticks = String::new();
    let mut labels = String::new();
    for y in nice_ticks(y0, y1, 6) {
        let py = sy(y);
        let _ = write!(ticks, "M{:.2},{py:.2} h-5 ", LEFT);
        let _ = writeln!(
            labels,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            py + 4.0,
            format_value(y)
        );
    }
    for x in nice_ticks(x0, x1, 8) {
        let px = sx(x);
        let date = spec.start_date + Duration::days(x.round() as i64);
        let _ = write!(ticks, "M{px:.2},{:.2} v5 ", TOP + plot_h);
        let _ = writeln!(
            labels,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 20.0,
            date.format("%Y-%m-%d")
        );
    }
    let _ = writeln!(out, r#"<path d="{}" stroke="black"/>"#, ticks.trim_end());
    out.push_str(&labels);

    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 20.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&spec.y_label)
    );

    let series = [(&spec.data, "#1f77b4"), (&spec.fitted, "#d62728")];
    for (line, colour) in series {
        let pts: Vec<String> = line
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }

    if let Some(s) = spec.split {
        let px = sx(s);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6,4"/>"#,
            TOP,
            TOP + plot_h
        );
    }

    // Legend
    for (i, (line, colour)) in series.iter().enumerate() {
        let y = TOP + 12.0 + 18.0 * i as f64;
        let x = LEFT + 14.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.2}" width="18" height="4" fill="{colour}"/>"#,
            y - 2.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 24.0,
            y + 4.0,
            escape(&line.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(data: Vec<(f64, f64)>, fitted: Vec<(f64, f64)>, split: Option<f64>) -> ChartSpec {
        ChartSpec {
            title: "A & B".into(),
            x_label: "date".into(),
            y_label: "cases".into(),
            start_date: NaiveDate::from_ymd_opt(2022, 4, 1).unwrap(),
            data: Polyline {
                label: "observed".into(),
                points: data,
            },
            fitted: Polyline {
                label: "fitted".into(),
                points: fitted,
            },
            split,
        }
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(
            nice_ticks(0.0, 10.0, 5),
            vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
        );
        assert_eq!(
            nice_ticks(85800.0, 89100.0, 6),
            vec![86000.0, 87000.0, 88000.0, 89000.0]
        );
    }

    #[test]
    fn structure_and_escape() {
        let s = spec(
            vec![(0.0, 1.0), (1.0, 2.0)],
            vec![(0.0, 1.5), (1.0, 2.5)],
            Some(0.5),
        );
        s.validate().unwrap();
        let svg = render_chart(&s);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.contains("A &amp; B"));
        assert_eq!(svg, render_chart(&s));
    }

    #[test]
    fn degenerate_ranges_stay_finite() {
        let s = spec(vec![(3.0, 5.0)], vec![(3.0, 5.0)], None);
        let svg = render_chart(&s);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        assert_eq!(svg.matches("<line").count(), 0);
    }

    #[test]
    fn validation() {
        assert!(spec(vec![], vec![(0.0, 1.0)], None).validate().is_err());
        assert!(spec(vec![(0.0, f64::NAN)], vec![(0.0, 1.0)], None)
            .validate()
            .is_err());
        assert!(
            spec(vec![(0.0, 1.0)], vec![(0.0, 1.0)], Some(f64::INFINITY))
                .validate()
                .is_err()
        );
    }
}
