//! CSV tables with provenance comments and minimal SVG line plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bellturb::figures::FigureData;

/// `key=value` lines written as `#` comments above a table.
#[derive(Debug, Clone, Default)]
pub struct Provenance(Vec<(String, String)>);

impl Provenance {
    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    fn write(&self, out: &mut String) {
        for (k, v) in &self.0 {
            let v = v.replace('\n', " ");
            let _ = writeln!(out, "# {k}={v}");
        }
    }
}

fn curve_column(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        format!("curve_{letter}")
    } else {
        format!("curve_{letter}{}", i / 26)
    }
}

/// Figure as CSV: provenance, then `x,curve_a,curve_b,...`.
pub fn figure_csv(fig: &FigureData, prov: &Provenance) -> String {
    let mut out = String::new();
    let mut p = prov.clone();
    p.push("title", &fig.title)
        .push("x", &fig.x_label)
        .push("y", &fig.y_label);
    for (i, c) in fig.curves.iter().enumerate() {
        p.push(&curve_column(i), &c.label);
    }
    p.write(&mut out);
    let header: Vec<String> = std::iter::once("x".to_string())
        .chain((0..fig.curves.len()).map(curve_column))
        .collect();
    let _ = writeln!(out, "{}", header.join(","));
    for (row, x) in fig.x.iter().enumerate() {
        let _ = write!(out, "{x}");
        for c in &fig.curves {
            let _ = write!(out, ",{}", c.values[row]);
        }
        out.push('\n');
    }
    out
}

/// Generic table with a provenance block.
pub fn table_csv(prov: &Provenance, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    prov.write(&mut out);
    let _ = writeln!(out, "{}", header.join(","));
    for r in rows {
        let _ = writeln!(out, "{}", r.join(","));
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_Y: f64 = 40.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Self-contained line plot. Non-finite points are skipped.
pub fn figure_svg(fig: &FigureData) -> String {
    let xs: Vec<f64> = fig
        .x
        .iter()
        .map(|&x| if fig.log_x { x.log10() } else { x })
        .collect();
    let finite = |v: &f64| v.is_finite();
    let (x_lo, x_hi) = bounds(xs.iter().copied().filter(finite));
    let (y_lo, y_hi) = bounds(
        fig.curves
            .iter()
            .flat_map(|c| c.values.iter().copied())
            .filter(finite),
    );
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let px = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| MARGIN_Y + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_Y}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="12">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(&fig.title)
    );
    let x_label = if fig.log_x {
        format!("log10 {}", fig.x_label)
    } else {
        fig.x_label.clone()
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 8.0,
        escape(&x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        MARGIN_Y + plot_h / 2.0,
        MARGIN_Y + plot_h / 2.0,
        escape(&fig.y_label)
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(xv),
            MARGIN_Y + plot_h + 14.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 4.0,
            py(yv) + 4.0,
            tick(yv)
        );
    }
    for (i, c) in fig.curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = xs
            .iter()
            .zip(&c.values)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN_Y + 14.0 + 16.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 22.0,
            ly + 4.0,
            escape(&c.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn tick(v: f64) -> String {
    format!("{:.3}", v)
}

pub fn write_file(path: &Path, contents: &str) -> Result<PathBuf> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use bellturb::figures::Curve;

    fn fig() -> FigureData {
        FigureData {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: false,
            x: vec![0.0, 0.5, 1.0],
            curves: vec![
                Curve {
                    label: "one".into(),
                    values: vec![1.0, 2.0, f64::NAN],
                },
                Curve {
                    label: "two".into(),
                    values: vec![0.1, 0.2, 0.3],
                },
            ],
        }
    }

    #[test]
    fn csv_layout() {
        let mut p = Provenance::default();
        p.push("seed", 3);
        let csv = figure_csv(&fig(), &p);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# seed=3");
        assert!(lines.contains(&"# curve_b=two"));
        let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
        assert_eq!(lines[header], "x,curve_a,curve_b");
        assert_eq!(lines[header + 1], "0,1,0.1");
        assert_eq!(lines[header + 3], "1,NaN,0.3");
    }

    #[test]
    fn svg_has_one_polyline_per_curve() {
        let svg = figure_svg(&fig());
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
