//! Deterministic SVG line plots of result tables.
//!
//! Fixed viewport, fixed palette, fixed number formatting and no
//! timestamps, so identical tables render to identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use obatalab_core::numerics::{loglog_fit, FitResult};

use crate::error::{CliError, CliResult};
use crate::table::Table;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x: String,
    pub y: Vec<String>,
    pub log_x: bool,
    pub log_y: bool,
}

impl PlotSpec {
    pub fn loglog(title: &str, x: &str, y: &[&str]) -> Self {
        Self { title: title.into(), x: x.into(), y: y.iter().map(|s| s.to_string()).collect(), log_x: true, log_y: true }
    }

    pub fn linear(title: &str, x: &str, y: &[&str]) -> Self {
        Self { log_x: false, log_y: false, ..Self::loglog(title, x, y) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub svg: String,
    /// Log-log fit of the first series, shown as the slope annotation.
    pub fit: Option<FitResult>,
}

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn map(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        Some(if self.log { v.log10() } else { v })
    }

    fn fit(log: bool, values: impl Iterator<Item = f64>) -> Option<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let probe = Axis { log, lo: 0.0, hi: 0.0 };
        for v in values.filter_map(|v| probe.map(v)) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return None;
        }
        if hi - lo < 1e-12 {
            let pad = if log { 0.5 } else { lo.abs().max(1.0) * 0.1 };
            lo -= pad;
            hi += pad;
        }
        Some(Axis { log, lo, hi })
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i64, self.hi.floor() as i64);
            if b >= a {
                let step = ((b - a) / 6 + 1) as usize;
                return (a..=b).step_by(step).map(|k| (k as f64, format!("1e{k}"))).collect();
            }
            return [self.lo, self.hi].iter().map(|&t| (t, format!("{:.3e}", 10f64.powf(t)))).collect();
        }
        (0..5).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0).map(|t| (t, fmt_tick(t).to_string())).collect()
    }
}

fn fmt_tick(t: f64) -> String {
    if t == 0.0 || (t.abs() >= 1e-2 && t.abs() < 1e4) {
        format!("{t:.3}")
    } else {
        format!("{t:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the `y` columns of `table` against `x`. On log-log axes the
/// first series is re-fitted and its slope is annotated.
pub fn render_plot(table: &Table, spec: &PlotSpec) -> CliResult<Rendered> {
    if table.is_empty() {
        return Err(CliError::Plot("empty table".into()));
    }
    if spec.y.is_empty() {
        return Err(CliError::Plot("no series to plot".into()));
    }
    let xs = table.column(&spec.x)?;
    let series = spec.y.iter().map(|c| table.column(c)).collect::<CliResult<Vec<_>>>()?;
    let x_axis = Axis::fit(spec.log_x, xs.iter().copied()).ok_or_else(|| CliError::Plot(format!("no plottable values in `{}`", spec.x)))?;
    let y_axis = Axis::fit(spec.log_y, series.iter().flatten().copied()).ok_or_else(|| CliError::Plot("no plottable y values".into()))?;
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |v: f64| LEFT + (v - x_axis.lo) / (x_axis.hi - x_axis.lo) * pw;
    let py = |v: f64| TOP + ph - (v - y_axis.lo) / (y_axis.hi - y_axis.lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&spec.title));
    let _ = writeln!(s, r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#);
    for (t, label) in x_axis.ticks() {
        let x = px(t);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, TOP + ph + 18.0);
    }
    for (t, label) in y_axis.ticks() {
        let y = py(t);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 8.0, y + 4.0);
    }
    let axis_name = |name: &str, log: bool| if log { format!("{name} (log)") } else { name.to_string() };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(&axis_name(&spec.x, spec.log_x))
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&axis_name(&spec.y.join(", "), spec.log_y))
    );
    for (k, (name, ys)) in spec.y.iter().zip(&series).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter_map(|(&x, &y)| Some((px(x_axis.map(x)?), py(y_axis.map(y)?)))).collect();
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        for (x, y) in &pts {
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        }
        let ly = TOP + 16.0 + 14.0 * k as f64;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}" text-anchor="end" fill="{color}">{}</text>"#, LEFT + pw - 8.0, escape(name));
    }
    let fit = if spec.log_x && spec.log_y { loglog_fit(&xs, &series[0]) } else { None };
    if let Some(f) = fit {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" data-slope="{:?}">slope = {:.6}, R² = {:.6}</text>"#,
            LEFT + pw - 8.0,
            TOP + ph - 10.0,
            f.slope,
            f.slope,
            f.r_squared
        );
    }
    s.push_str("</svg>\n");
    Ok(Rendered { svg: s, fit })
}

/// Renders and writes the plot; nothing is written when rendering fails.
pub fn write_plot(table: &Table, spec: &PlotSpec, path: &Path) -> CliResult<Option<FitResult>> {
    let r = render_plot(table, spec)?;
    std::fs::write(path, r.svg)?;
    Ok(r.fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(points: &[(f64, f64)]) -> Table {
        let mut t = Table::new(&["x", "y"]);
        for &(x, y) in points {
            t.push(vec![x.into(), y.into()]);
        }
        t
    }

    #[test]
    fn two_points_give_one_segment() {
        let r = render_plot(&table(&[(1.0, 1.0), (2.0, 4.0)]), &PlotSpec::linear("t", "x", &["y"])).unwrap();
        let line = r.svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let points = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        assert_eq!(points.split(' ').count(), 2);
        assert_eq!(r.svg.matches("<polyline").count(), 1);
        assert!(r.fit.is_none());
    }

    #[test]
    fn slope_annotation_matches_fit() {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| 2f64.powi(-i)).map(|x| (x, 3.0 * x.powf(0.75) * (1.0 + 0.01 * x))).collect();
        let r = render_plot(&table(&pts), &PlotSpec::loglog("t", "x", &["y"])).unwrap();
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let direct = loglog_fit(&xs, &ys).unwrap();
        assert!((r.fit.unwrap().slope - direct.slope).abs() < 1e-12);
        assert!(r.svg.contains(&format!("slope = {:.6}", direct.slope)));
    }

    #[test]
    fn rendering_is_deterministic() {
        let t = table(&[(1e-3, 0.2), (1e-2, 0.3), (1e-1, 0.5)]);
        let spec = PlotSpec::loglog("sweep", "x", &["y"]);
        assert_eq!(render_plot(&t, &spec).unwrap(), render_plot(&t, &spec).unwrap());
    }

    #[test]
    fn empty_table_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("plot.svg");
        let err = write_plot(&Table::new(&["x", "y"]), &PlotSpec::linear("t", "x", &["y"]), &p);
        assert!(matches!(err, Err(CliError::Plot(_))));
        assert!(!p.exists());
    }

    #[test]
    fn missing_column_is_an_error() {
        assert!(render_plot(&table(&[(1.0, 1.0)]), &PlotSpec::linear("t", "x", &["z"])).is_err());
    }
}
