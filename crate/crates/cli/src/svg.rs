//! Static SVG line plots. Every series becomes one `<polyline>`; coordinates are
//! printed with a fixed number of decimals so identical input gives identical bytes.

use std::fmt::Write;

use crate::UsageError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"];

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<[f64; 2]>,
    /// Join the last point back to the first.
    pub closed: bool,
}

#[derive(Clone, Debug)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Same scale on both axes (fronts in the plane).
    pub equal_aspect: bool,
    /// Draw a legend entry per series; off for many fronts.
    pub legend: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let n = raw / mag;
    mag * if n < 1.5 {
        1.0
    } else if n < 3.5 {
        2.0
    } else if n < 7.5 {
        5.0
    } else {
        10.0
    }
}

pub fn emit_svg(plot: &Plot) -> anyhow::Result<String> {
    let finite = |p: &&[f64; 2]| p[0].is_finite() && p[1].is_finite();
    let all: Vec<[f64; 2]> = plot.series.iter().flat_map(|s| s.points.iter().filter(finite).copied()).collect();
    if plot.series.is_empty() || all.is_empty() {
        return Err(UsageError("nothing to plot: no finite points".into()).into());
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &all {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let (mut sx, mut sy) = (pw / (x1 - x0), ph / (y1 - y0));
    if plot.equal_aspect {
        let s = sx.min(sy);
        sx = s;
        sy = s;
    }
    let ox = MARGIN + 0.5 * (pw - sx * (x1 - x0));
    let oy = MARGIN + 0.5 * (ph - sy * (y1 - y0));
    let px = |x: f64| ox + sx * (x - x0);
    let py = |y: f64| HEIGHT - oy - sy * (y - y0);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )?;
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&plot.title)
    )?;
    // axes
    let (ax0, ax1, ay0, ay1) = (px(x0), px(x1), py(y0), py(y1));
    writeln!(s, r#"<line x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax1:.2}" y2="{ay0:.2}" stroke="black"/>"#)?;
    writeln!(s, r#"<line x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax0:.2}" y2="{ay1:.2}" stroke="black"/>"#)?;
    let xs = tick_step(x1 - x0);
    let mut t = (x0 / xs).ceil() * xs;
    while t <= x1 + 1e-9 * xs {
        let x = px(t);
        writeln!(s, r#"<line x1="{x:.2}" y1="{ay0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, ay0 + 4.0)?;
        writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            ay0 + 16.0,
            crate::format::sig(t, 6)
        )?;
        t += xs;
    }
    let ys = tick_step(y1 - y0);
    let mut t = (y0 / ys).ceil() * ys;
    while t <= y1 + 1e-9 * ys {
        let y = py(t);
        writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{ax0:.2}" y2="{y:.2}" stroke="black"/>"#, ax0 - 4.0)?;
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            ax0 - 6.0,
            y + 4.0,
            crate::format::sig(t, 6)
        )?;
        t += ys;
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(&plot.x_label)
    )?;
    writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&plot.y_label)
    )?;
    for (i, ser) in plot.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<String> =
            ser.points.iter().filter(finite).map(|p| format!("{:.3},{:.3}", px(p[0]), py(p[1]))).collect();
        if ser.closed && pts.len() > 2 {
            pts.push(pts[0].clone());
        }
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape(&ser.label)
        )?;
    }
    if plot.legend {
        for (i, ser) in plot.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let y = MARGIN + 14.0 * i as f64;
            let x = WIDTH - MARGIN - 120.0;
            writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#,
                x + 18.0
            )?;
            writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 22.0, y + 4.0, escape(&ser.label))?;
        }
    }
    writeln!(s, "</svg>")?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot(n: usize) -> Plot {
        Plot {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: (0..n)
                .map(|i| Series {
                    label: format!("s{i}"),
                    points: vec![[0.0, i as f64], [1.0, 2.0 * i as f64]],
                    closed: false,
                })
                .collect(),
            equal_aspect: false,
            legend: true,
        }
    }

    #[test]
    fn one_polyline_per_series_and_stable_bytes() {
        let a = emit_svg(&plot(5)).unwrap();
        assert_eq!(a.matches("<polyline").count(), 5);
        assert_eq!(a, emit_svg(&plot(5)).unwrap());
    }

    #[test]
    fn empty_plot_is_a_usage_error() {
        let e = emit_svg(&plot(0)).unwrap_err();
        assert!(e.downcast_ref::<UsageError>().is_some());
    }
}
