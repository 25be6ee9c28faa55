use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::benchmark::BenchmarkRow;
use crate::experiment::runner::PolicyCurves;

pub const BENCH_SCHEMA: &str = "sensorsched-bench v1";
pub const REGRET_SCHEMA: &str = "sensorsched-regret v1";
pub const BENCH_COLUMNS: [&str; 7] = ["strategy_space", "exact_s", "wm_s", "dwm_s", "gap_exact", "gap_wm", "gap_dwm"];
pub const REGRET_COLUMNS: [&str; 5] = ["policy", "t", "mean", "std", "bound"];

/// Which artifacts to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Svg,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn svg(self) -> bool {
        matches!(self, OutputFormat::Svg | OutputFormat::Both)
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            "both" => Ok(OutputFormat::Both),
            _ => Err(Error::param("format", format!("expected csv, svg or both, got {s:?}"))),
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Serde(e.to_string())
}

fn write_header<W: Write>(out: &mut W, schema: &str, metadata: &[(String, String)]) -> Result<()> {
    writeln!(out, "# {schema}").map_err(io_err)?;
    for (k, v) in metadata {
        writeln!(out, "# {k}: {v}").map_err(io_err)?;
    }
    Ok(())
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Timing table; skipped cells are written as `-`.
pub fn write_benchmark_csv<W: Write>(rows: &[BenchmarkRow], mut out: W, metadata: &[(String, String)]) -> Result<()> {
    write_header(&mut out, BENCH_SCHEMA, metadata)?;
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(BENCH_COLUMNS)?;
    for r in rows {
        csv.write_record([
            r.strategy_space.to_string(),
            cell(r.exact_s),
            cell(r.wm_s),
            cell(r.dwm_s),
            cell(r.gap_exact),
            cell(r.gap_wm),
            cell(r.gap_dwm),
        ])?;
    }
    csv.flush().map_err(io_err)
}

/// Seed-mean cumulative regret, its standard deviation and the bound,
/// one row per (policy, round).
pub fn write_regret_csv<W: Write>(curves: &[PolicyCurves], mut out: W, metadata: &[(String, String)]) -> Result<()> {
    write_header(&mut out, REGRET_SCHEMA, metadata)?;
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(REGRET_COLUMNS)?;
    for c in curves {
        for (t, ((m, s), b)) in c.mean.iter().zip(&c.std).zip(&c.bound).enumerate() {
            csv.write_record([c.policy.clone(), (t + 1).to_string(), m.to_string(), s.to_string(), b.to_string()])?;
        }
    }
    csv.flush().map_err(io_err)
}

/// Axis transform of a chart.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Scale {
    Log10,
    /// sign(v) log10(1 + |v|), defined for every real
    SymLog,
}

impl Scale {
    fn apply(self, v: f64) -> f64 {
        match self {
            Scale::Log10 => v.max(1e-300).log10(),
            Scale::SymLog => v.signum() * v.abs().ln_1p() / std::f64::consts::LN_10,
        }
    }

    fn ticks(self, lo: f64, hi: f64) -> Vec<(f64, String)> {
        match self {
            Scale::Log10 => (lo.floor() as i32..=hi.ceil() as i32).map(|k| (k as f64, format!("1e{k}"))).collect(),
            Scale::SymLog => {
                let mut ticks = vec![(0.0, "0".to_string())];
                for k in 0..=(hi.max(-lo).ceil() as i32) {
                    let v = 10f64.powi(k);
                    let label = if k < 4 { format!("{v}") } else { format!("1e{k}") };
                    ticks.push((self.apply(v), label.clone()));
                    ticks.push((self.apply(-v), format!("-{label}")));
                }
                ticks.retain(|(y, _)| *y >= lo - 1e-9 && *y <= hi + 1e-9);
                ticks
            }
        }
    }
}

struct Series {
    label: String,
    color: &'static str,
    dashed: bool,
    points: Vec<(f64, f64)>,
    /// (x, low, high) shaded band
    band: Vec<(f64, f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], scale: Scale) -> String {
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (80.0, 170.0, 40.0, 50.0);
    let all_x = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (x_lo, x_hi) = all_x.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let all_y = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1).chain(s.band.iter().flat_map(|b| [b.1, b.2])))
        .map(|v| scale.apply(v));
    let (mut y_lo, mut y_hi) = all_y.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    if y_hi - y_lo < 1e-9 {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let (x_lo, x_hi) = if x_lo.is_finite() && x_hi > x_lo { (x_lo, x_hi) } else { (x_lo.min(0.0), x_lo.max(0.0) + 1.0) };
    let px = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * (w - left - right);
    let py = |y: f64| top + (y_hi - y) / (y_hi - y_lo) * (h - top - bottom);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, (left + w - right) / 2.0, escape(title));
    for (y, label) in scale.ticks(y_lo, y_hi) {
        let yy = py(y);
        let _ = writeln!(svg, r##"<line x1="{left}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#e0e0e0"/>"##, w - right);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, left - 6.0, yy + 4.0, escape(&label));
    }
    for k in 0..=4 {
        let x = x_lo + (x_hi - x_lo) * k as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, px(x), h - bottom + 18.0, (x * 100.0).round() / 100.0);
    }
    let _ = writeln!(
        svg,
        r##"<rect x="{left}" y="{top}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
        w - left - right,
        h - top - bottom
    );
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (left + w - right) / 2.0, h - 12.0, escape(x_label));
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (top + h - bottom) / 2.0,
        (top + h - bottom) / 2.0,
        escape(y_label)
    );
    for s in series {
        if !s.band.is_empty() {
            let upper = s.band.iter().map(|b| format!("{:.2},{:.2}", px(b.0), py(scale.apply(b.2))));
            let lower = s.band.iter().rev().map(|b| format!("{:.2},{:.2}", px(b.0), py(scale.apply(b.1))));
            let pts: Vec<String> = upper.chain(lower).collect();
            let _ = writeln!(svg, r#"<polygon points="{}" fill="{}" fill-opacity="0.15" stroke="none"/>"#, pts.join(" "), s.color);
        }
        let pts: Vec<String> = s.points.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(scale.apply(p.1)))).collect();
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        if pts.len() == 1 {
            let p = s.points[0];
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#, px(p.0), py(scale.apply(p.1)), s.color);
        } else {
            let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.8"{dash}/>"#, pts.join(" "), s.color);
        }
    }
    for (k, s) in series.iter().enumerate() {
        let y = top + 14.0 + 20.0 * k as f64;
        let x = w - right + 12.0;
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(svg, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"{dash}/>"#, x + 24.0, s.color);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, x + 30.0, y + 4.0, escape(&s.label));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Cumulative regret (seed mean with a one-std band) and the bound of
/// every policy, on a signed log scale.
pub fn regret_svg(curves: &[PolicyCurves], title: &str) -> String {
    let mut series = Vec::new();
    for (k, c) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let xs = (1..=c.mean.len()).map(|t| t as f64);
        series.push(Series {
            label: format!("{} (mean)", c.policy),
            color,
            dashed: false,
            points: xs.clone().zip(c.mean.iter().copied()).collect(),
            band: xs.clone().zip(c.mean.iter().zip(&c.std)).map(|(x, (m, s))| (x, m - s, m + s)).collect(),
        });
        series.push(Series {
            label: format!("{} bound", c.policy),
            color,
            dashed: true,
            points: xs.zip(c.bound.iter().copied()).collect(),
            band: Vec::new(),
        });
    }
    line_chart(title, "round t", "cumulative regret (signed log)", &series, Scale::SymLog)
}

/// Median solver times against the sensor count, log scale.
pub fn benchmark_svg(rows: &[BenchmarkRow], title: &str) -> String {
    let pick = |f: fn(&BenchmarkRow) -> Option<f64>| -> Vec<(f64, f64)> {
        rows.iter().filter_map(|r| f(r).map(|t| (r.sensors as f64, t.max(1e-9)))).collect()
    };
    let series: Vec<Series> = [("exact", pick(|r| r.exact_s)), ("WM", pick(|r| r.wm_s)), ("DWM", pick(|r| r.dwm_s))]
        .into_iter()
        .enumerate()
        .filter(|(_, (_, pts))| !pts.is_empty())
        .map(|(k, (label, points))| Series { label: label.into(), color: PALETTE[k], dashed: false, points, band: Vec::new() })
        .collect();
    line_chart(title, "number of sensors", "wall time (s)", &series, Scale::Log10)
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path).map(std::io::BufWriter::new).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn file_label(policy: &str) -> String {
    policy.replace(':', "-")
}

/// Writes `bench.csv` and/or `bench.svg` into `dir`.
pub fn emit_benchmark(dir: &Path, rows: &[BenchmarkRow], format: OutputFormat, metadata: &[(String, String)]) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    if format.csv() {
        let path = dir.join("bench.csv");
        write_benchmark_csv(rows, create(&path)?, metadata)?;
        written.push(path);
    }
    if format.svg() {
        let path = dir.join("bench.svg");
        std::fs::write(&path, benchmark_svg(rows, "Solver wall time")).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `regret.csv`, one trace per run under `traces/`, and/or
/// `regret.svg` into `dir`.
pub fn emit_online(dir: &Path, curves: &[PolicyCurves], format: OutputFormat, metadata: &[(String, String)]) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    if format.csv() {
        let path = dir.join("regret.csv");
        write_regret_csv(curves, create(&path)?, metadata)?;
        written.push(path);
        let traces = dir.join("traces");
        ensure_dir(&traces)?;
        for c in curves {
            for (run, trace) in c.traces.iter().enumerate() {
                let path = traces.join(format!("{}_run{run:03}.csv", file_label(&c.policy)));
                trace.save_csv(&path)?;
                written.push(path);
            }
        }
    }
    if format.svg() {
        let path = dir.join("regret.svg");
        std::fs::write(&path, regret_svg(curves, "Cumulative regret")).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
