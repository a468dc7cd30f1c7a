use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::SweepRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    /// Raw sample size.
    M,
    /// Rescaled sample size `m / (2k log(n − k))`.
    Theta,
}

impl XAxis {
    fn value(self, r: &SweepRecord) -> f64 {
        match self {
            XAxis::M => r.m as f64,
            XAxis::Theta => r.theta,
        }
    }

    fn label(self) -> &'static str {
        match self {
            XAxis::M => "sample size m",
            XAxis::Theta => "rescaled sample size θ = m / (2k log(n − k))",
        }
    }
}

impl FromStr for XAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(XAxis::M),
            "theta" => Ok(XAxis::Theta),
            other => Err(Error::InvalidConfig(format!("x axis must be m or theta, got {other:?}"))),
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Round step for about five ticks across `span`.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Success probability against `x_axis`, one curve per `n`.
pub fn render_svg(records: &[SweepRecord], x_axis: XAxis) -> Result<String> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records to plot"));
    }
    let mut ns: Vec<(usize, usize)> = records.iter().map(|r| (r.n, r.k)).collect();
    ns.sort_unstable();
    ns.dedup_by_key(|p| p.0);

    let xs = records.iter().map(|r| x_axis.value(r));
    let (mut lo, mut hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let step = tick_step(hi - lo);
    let lo = (lo / step).floor() * step;
    let hi = (hi / step).ceil() * step;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - lo) / (hi - lo) * plot_w;
    let py = |p: f64| TOP + (1.0 - p) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for i in 0..=4 {
        let p = i as f64 / 4.0;
        let y = py(p);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0,
            fmt_tick(p)
        );
    }
    let ticks = ((hi - lo) / step).round() as usize;
    for i in 0..=ticks {
        let v = lo + i as f64 * step;
        let x = px(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 14.0,
        x_axis.label()
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">probability of support recovery</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (idx, &(n, k)) in ns.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let mut pts: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.n == n)
            .map(|r| (x_axis.value(r), r.prob))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let _ = writeln!(svg, r#"<g class="curve" data-n="{n}">"#);
        if pts.len() > 1 {
            let coords: Vec<String> = pts.iter().map(|&(x, p)| format!("{:.2},{:.2}", px(x), py(p))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        for &(x, p) in &pts {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(p));
        }
        let _ = writeln!(svg, "</g>");

        let ly = TOP + 14.0 + idx as f64 * 18.0;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">n = {n}, k = {k}</text>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0,
            lx + 26.0,
            ly
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(records: &[SweepRecord], path: &Path, x_axis: XAxis) -> Result<()> {
    let svg = render_svg(records, x_axis)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: usize, k: usize, m: usize, prob: f64) -> SweepRecord {
        SweepRecord {
            n,
            k,
            m,
            theta: crate::theory::rescaled_theta(m as f64, n, k),
            eta: 1.0,
            h: 0.3,
            trials: 10,
            successes: (prob * 10.0) as usize,
            prob,
            master_seed: 1,
        }
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(render_svg(&[], XAxis::M), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn single_point_is_a_marker() {
        let svg = render_svg(&[rec(64, 4, 30, 0.5)], XAxis::Theta).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 1);
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 0);
    }

    #[test]
    fn one_curve_per_n() {
        let mut recs = Vec::new();
        for (n, k) in [(128, 5), (256, 7), (512, 10)] {
            for (i, m) in [40, 80, 120, 160].into_iter().enumerate() {
                recs.push(rec(n, k, m, i as f64 / 3.0));
            }
        }
        let svg = render_svg(&recs, XAxis::Theta).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 3);
        assert!(svg.contains("n = 512, k = 10"));
    }

    #[test]
    fn axis_choice_only_moves_x() {
        let recs = vec![rec(64, 4, 20, 0.1), rec(64, 4, 40, 0.6), rec(64, 4, 60, 1.0)];
        let ys = |svg: &str| -> Vec<String> {
            let doc = roxmltree::Document::parse(svg).unwrap();
            doc.descendants()
                .filter(|n| n.has_tag_name("circle"))
                .map(|n| n.attribute("cy").unwrap().to_string())
                .collect()
        };
        let a = render_svg(&recs, XAxis::M).unwrap();
        let b = render_svg(&recs, XAxis::Theta).unwrap();
        assert_eq!(ys(&a), ys(&b));
        assert!(a.contains("sample size m"));
        assert!(b.contains("rescaled"));
        assert!("x".parse::<XAxis>().is_err());
    }
}
