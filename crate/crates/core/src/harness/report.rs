use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::metrics::ClosedLoopMetrics;
use super::planner_cmp::{ComparisonRow, PlannerComparison};
use super::sim_log::SimLog;
use crate::error::{Error, Result};

/// Column header of the planner comparison tables.
pub const TABLE_HEADER: &str = "N,RMSE(y),RMSE(z),RMSE(ẏ),RMSE(ż)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Svg,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "svg" => Ok(Self::Svg),
            other => Err(Error::InvalidParameter(format!("unknown report format '{other}' (expected csv, svg)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Same scale on both axes, for paths on the motion plane.
    pub equal_aspect: bool,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub name: String,
    /// Comparison tables by name, e.g. `harmonic` and `bangbang`.
    pub tables: Vec<(String, Vec<ComparisonRow>)>,
    /// Scalar summary lines.
    pub summary: Vec<(String, f64)>,
    pub figures: Vec<Figure>,
}

impl Report {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn from_comparison(name: &str, rows: &[PlannerComparison]) -> Self {
        let mut r = Self::new(name);
        r.tables.push(("harmonic".into(), rows.iter().map(|c| c.harmonic).collect()));
        r.tables.push(("bangbang".into(), rows.iter().map(|c| c.bangbang).collect()));
        r
    }

    /// Summary, y-z paths (reference, planned, executed), FIC force magnitude
    /// and tracking error over time.
    pub fn from_log(name: &str, log: &SimLog, m: &ClosedLoopMetrics) -> Self {
        let mut r = Self::new(name);
        r.summary = vec![
            ("rmse_x".into(), m.rmse.x),
            ("rmse_y".into(), m.rmse.y),
            ("rmse_z".into(), m.rmse.z),
            ("reference_rmse_x".into(), m.reference_rmse.x),
            ("reference_rmse_y".into(), m.reference_rmse.y),
            ("reference_rmse_z".into(), m.reference_rmse.z),
            ("max_error".into(), m.max_error),
            ("steady_max_error".into(), m.steady_max_error),
            ("max_fic_force".into(), m.max_fic_force),
            ("max_fic_torque".into(), m.max_fic_torque),
        ];
        for (i, rec) in m.recoveries.iter().enumerate() {
            r.summary.push((format!("perturbation{i}_start"), rec.t_start));
            r.summary.push((format!("perturbation{i}_recovery"), rec.time.unwrap_or(f64::NAN)));
        }
        let path = |f: &dyn Fn(&super::SimRow) -> nalgebra::Vector3<f64>| -> Vec<(f64, f64)> {
            log.rows.iter().map(|row| (f(row).y, f(row).z)).collect()
        };
        r.figures.push(Figure {
            name: "path".into(),
            title: "Motion plane".into(),
            x_label: "y (m)".into(),
            y_label: "z (m)".into(),
            equal_aspect: true,
            series: vec![
                Series { label: "reference".into(), points: path(&|row| row.reference) },
                Series { label: "planned".into(), points: path(&|row| row.planner_position) },
                Series { label: "executed".into(), points: path(&|row| row.ee_position) },
            ],
        });
        r.figures.push(Figure {
            name: "force".into(),
            title: "FIC force magnitude".into(),
            x_label: "t (s)".into(),
            y_label: "|F| (N)".into(),
            equal_aspect: false,
            series: vec![Series { label: "|F_FIC|".into(), points: m.force_series.clone() }],
        });
        r.figures.push(Figure {
            name: "error".into(),
            title: "Tracking error".into(),
            x_label: "t (s)".into(),
            y_label: "error (m)".into(),
            equal_aspect: false,
            series: vec![Series {
                label: "|x_d - x|".into(),
                points: log.rows.iter().map(|row| (row.t, (row.ee_position - row.planner_position).norm())).collect(),
            }],
        });
        r
    }
}

pub fn table_csv(rows: &[ComparisonRow]) -> String {
    let mut out = format!("{TABLE_HEADER}\n");
    for r in rows {
        let v = r.values();
        let _ = writeln!(out, "{},{:.3},{:.3},{:.3},{:.3}", r.set, v[0], v[1], v[2], v[3]);
    }
    out
}

fn summary_csv(summary: &[(String, f64)]) -> String {
    let mut out = String::from("metric,value\n");
    for (k, v) in summary {
        let _ = writeln!(out, "{k},{v:.3}");
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Self-contained SVG line plot.
pub fn figure_svg(fig: &Figure) -> String {
    let (w, h, margin) = (640.0, 480.0, 60.0);
    let pts = fig.series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |a: f64, b: f64| if b - a > 0.0 { (a, b) } else { (a - 0.5, b + 0.5) };
    let ((x0, x1), (y0, y1)) = (pad(x0, x1), pad(y0, y1));
    let (pw, ph) = (w - 2.0 * margin, h - 2.0 * margin);
    let (mut sx, mut sy) = (pw / (x1 - x0), ph / (y1 - y0));
    if fig.equal_aspect {
        sx = sx.min(sy);
        sy = sx;
    }
    let px = |x: f64| margin + (x - x0) * sx;
    let py = |y: f64| h - margin - (y - y0) * sy;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#, w / 2.0, escape(&fig.title));
    let _ = writeln!(
        s,
        r#"<rect x="{margin}" y="{margin}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#, w / 2.0, h - 15.0, escape(&fig.x_label));
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 15 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(&fig.y_label)
    );
    for (v, anchor, x, y) in [(x0, "start", margin, h - margin + 16.0), (x1, "end", w - margin, h - margin + 16.0)] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-family="sans-serif" font-size="10">{v:.3}</text>"#);
    }
    for (v, y) in [(y0, h - margin), (y1, margin + 10.0)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end" font-family="sans-serif" font-size="10">{v:.3}</text>"#, margin - 4.0);
    }
    for (i, series) in fig.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for &(x, y) in series.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            let _ = write!(d, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, d.trim_end());
        let ly = margin + 16.0 + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            margin + 8.0,
            escape(&series.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Write the report into `dir` (created if missing); returns the files.
/// An empty report still yields a header-only table.
pub fn emit_report(report: &Report, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |file: String, body: String| -> Result<()> {
        let path = dir.join(file);
        std::fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    match format {
        ReportFormat::Csv => {
            for (table, rows) in &report.tables {
                put(format!("{}_{table}.csv", report.name), table_csv(rows))?;
            }
            if !report.summary.is_empty() {
                put(format!("{}_summary.csv", report.name), summary_csv(&report.summary))?;
            }
            if report.tables.is_empty() && report.summary.is_empty() {
                put(format!("{}.csv", report.name), table_csv(&[]))?;
            }
        }
        ReportFormat::Svg => {
            for fig in &report.figures {
                put(format!("{}_{}.svg", report.name, fig.name), figure_svg(fig))?;
            }
            for (table, rows) in &report.tables {
                put(format!("{}_{table}.svg", report.name), table_figure(table, rows))?;
            }
        }
    }
    Ok(written)
}

/// RMSE per set as lines, position in mm and velocity in mm/s.
fn table_figure(table: &str, rows: &[ComparisonRow]) -> String {
    let labels = ["RMSE(y) mm", "RMSE(z) mm", "RMSE(ẏ) mm/s", "RMSE(ż) mm/s"];
    let series = labels
        .iter()
        .enumerate()
        .map(|(i, l)| Series {
            label: (*l).into(),
            points: rows.iter().map(|r| (r.set as f64, 1e3 * r.values()[i])).collect(),
        })
        .collect();
    figure_svg(&Figure {
        name: table.into(),
        title: format!("{table} planner"),
        x_label: "parameter set".into(),
        y_label: "RMSE".into(),
        equal_aspect: false,
        series,
    })
}
