//! CSV and SVG output of experiment reports.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use super::{num, ExperimentReport, Plot, Table};
use crate::error::Result;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn write_table(dir: &Path, t: &Table) -> Result<()> {
    t.write_csv(BufWriter::new(File::create(dir.join(format!("{}.csv", t.name)))?))
}

/// Writes every table, the summary and the invariants as CSV, plus one SVG
/// per plot when `svg` is set. Returns whether all invariants passed.
pub fn emit_report(report: &ExperimentReport, dir: &Path, svg: bool) -> Result<bool> {
    std::fs::create_dir_all(dir)?;
    for t in &report.tables {
        write_table(dir, t)?;
    }
    let stem = report.experiment.replace('-', "_");
    let mut summary = Table::new(&format!("{stem}_summary"), &["key", "value"]);
    for (k, v) in &report.summary {
        summary.push(vec![k.clone(), v.clone()]);
    }
    write_table(dir, &summary)?;
    let mut inv = Table::new(&format!("{stem}_invariants"), &["invariant", "passed", "detail"]);
    for i in &report.invariants {
        inv.push(vec![i.name.clone(), i.passed.to_string(), i.detail.clone()]);
    }
    write_table(dir, &inv)?;
    if svg {
        for p in &report.plots {
            std::fs::write(dir.join(format!("{}.svg", p.name)), render_svg(p))?;
        }
    }
    Ok(report.passed())
}

fn axis_map(vals: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
    let (lo, hi) = vals
        .map(|v| if log { v.log10() } else { v })
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// A self-contained SVG line plot with axes, tick labels and a legend.
pub fn render_svg(plot: &Plot) -> String {
    let pts = || plot.series.iter().flat_map(|s| s.1.iter());
    let keep = |(x, y): (f64, f64)| (!plot.log_x || x > 0.0) && (!plot.log_y || y > 0.0) && x.is_finite() && y.is_finite();
    let (x0, x1) = axis_map(pts().filter(|p| keep(**p)).map(|p| p.0), plot.log_x);
    let (y0, y1) = axis_map(pts().filter(|p| keep(**p)).map(|p| p.1), plot.log_y);
    let sx = |x: f64| {
        let v = if plot.log_x { x.log10() } else { x };
        MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN)
    };
    let sy = |y: f64| {
        let v = if plot.log_y { y.log10() } else { y };
        HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN)
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let xl = if plot.log_x { 10f64.powf(xv) } else { xv };
        let yl = if plot.log_y { 10f64.powf(yv) } else { yv };
        let px = MARGIN + f * (WIDTH - 2.0 * MARGIN);
        let py = HEIGHT - MARGIN - f * (HEIGHT - 2.0 * MARGIN);
        let _ = writeln!(s, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, HEIGHT - MARGIN + 16.0, tick(xl));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, MARGIN - 6.0, py + 4.0, tick(yl));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&plot.y_label)
    );
    for (i, (name, data)) in plot.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = data
            .iter()
            .filter(|p| keep(**p))
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if !path.is_empty() {
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        }
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            WIDTH - MARGIN - 90.0,
            WIDTH - MARGIN - 70.0,
            WIDTH - MARGIN - 64.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        let r = (v * 100.0).round() / 100.0;
        num(r)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_polyline_per_series() {
        let p = Plot {
            name: "p".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: true,
            log_y: false,
            series: vec![
                ("a".into(), vec![(1.0, 1.0), (10.0, 2.0)]),
                ("b<c".into(), vec![(1.0, 0.5), (100.0, 3.0)]),
            ],
        };
        let s = render_svg(&p);
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains("b&lt;c"));
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
    }
}
