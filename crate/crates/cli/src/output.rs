//! Trace CSV, flat reports and SVG plots.

use std::fmt::Write as _;
use std::io::{self, Write};

use funnelsim_core::{RunReport, TraceRecord, VerificationVerdict};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_header(m: usize, q: usize, r: usize) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=m).map(|i| format!("y_{i}")));
    cols.extend((1..=m).map(|i| format!("yref_{i}")));
    cols.extend((1..=m).map(|i| format!("u_{i}")));
    cols.extend((1..=q).map(|i| format!("w_{i}")));
    cols.extend((0..r).map(|i| format!("e{i}norm")));
    cols.extend((0..r).map(|i| format!("k{i}")));
    cols.extend((0..r).map(|i| format!("rad{i}")));
    cols.join(",")
}

pub fn write_csv(out: &mut impl Write, trace: &[TraceRecord]) -> io::Result<()> {
    let Some(first) = trace.first() else {
        return Ok(());
    };
    writeln!(out, "{}", csv_header(first.y.len(), first.w.len(), first.k.len()))?;
    let mut line = String::new();
    for row in trace {
        line.clear();
        line.push_str(&num(row.t));
        for v in row
            .y
            .iter()
            .chain(&row.y_ref)
            .chain(&row.u)
            .chain(&row.w)
            .chain(&row.e_norm)
            .chain(&row.k)
            .chain(&row.radius)
        {
            line.push(',');
            line.push_str(&num(*v));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// `key=value` lines.
pub fn report_text(name: &str, report: &RunReport, verdict: &VerificationVerdict, outcome: &str) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k}={v}");
    };
    kv("scenario", name.to_string());
    kv("outcome", outcome.to_string());
    kv("horizon", report.horizon.to_string());
    kv("t_end", report.t_end.to_string());
    kv("completed", report.completed.to_string());
    kv("accepted_steps", report.accepted_steps.to_string());
    kv("rejected_steps", report.rejected_steps.to_string());
    kv("sup_u", report.sup_u.to_string());
    kv("sup_k", join(&report.sup_k));
    kv("sup_y", join(&report.sup_y));
    kv("min_margin", join(&report.min_margin));
    kv("epsilon", join(&verdict.epsilon));
    kv("clause_horizon", format!("{} {}", verdict.horizon.pass, verdict.horizon.witness));
    kv("clause_bounded", format!("{} {}", verdict.bounded.pass, verdict.bounded.witness));
    kv("clause_funnel", format!("{} {}", verdict.funnel.pass, verdict.funnel.witness));
    kv("verified", verdict.passed().to_string());
    kv("wall_time", format!("{:.6}", report.wall_time));
    s
}

const WIDTH: f64 = 720.0;
const PANEL: f64 = 240.0;
const MARGIN: f64 = 48.0;
const MAX_POINTS: usize = 2000;

/// Label, colour and points.
type Series<'a> = (&'a str, &'a str, Vec<(f64, f64)>);

struct Panel<'a> {
    title: &'a str,
    series: Vec<Series<'a>>,
}

/// Two panels: `‖e(t)‖` against the radius `1/φ₀(t)`, and the input `u(t)`.
pub fn svg_plot(name: &str, trace: &[TraceRecord]) -> String {
    let stride = trace.len().div_ceil(MAX_POINTS).max(1);
    let rows: Vec<&TraceRecord> = trace.iter().step_by(stride).chain(trace.last()).collect();
    let pick = |f: &dyn Fn(&TraceRecord) -> f64| rows.iter().map(|r| (r.t, f(r))).collect::<Vec<_>>();
    let panels = [
        Panel {
            title: "tracking error and funnel boundary",
            series: vec![
                ("|e(t)|", "#1f77b4", pick(&|r| r.e_norm[0])),
                ("1/phi(t)", "#d62728", pick(&|r| r.radius[0])),
            ],
        },
        Panel { title: "input", series: vec![("u(t)", "#2ca02c", pick(&|r| r.u.first().copied().unwrap_or(0.0)))] },
    ];
    let height = MARGIN + panels.len() as f64 * (PANEL + MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="20">{name}</text>"#);
    for (i, p) in panels.iter().enumerate() {
        let top = MARGIN + i as f64 * (PANEL + MARGIN);
        draw_panel(&mut s, p, top);
    }
    s.push_str("</svg>\n");
    s
}

fn draw_panel(s: &mut String, p: &Panel, top: f64) {
    let pts = p.series.iter().flat_map(|x| x.2.iter());
    let (mut t0, mut t1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(t, v) in pts.filter(|p| p.1.is_finite()) {
        t0 = t0.min(t);
        t1 = t1.max(t);
        v0 = v0.min(v);
        v1 = v1.max(v);
    }
    if !(t1 > t0) {
        t1 = t0 + 1.0;
    }
    if !(v1 > v0) {
        v0 -= 0.5;
        v1 += 0.5;
    }
    let (left, right, bottom) = (MARGIN * 1.5, WIDTH - MARGIN / 2.0, top + PANEL);
    let x = |t: f64| left + (t - t0) / (t1 - t0) * (right - left);
    let y = |v: f64| bottom - (v - v0) / (v1 - v0) * PANEL;
    let _ = writeln!(s, r#"<text x="{left}" y="{}">{}</text>"#, top - 6.0, p.title);
    let _ =
        writeln!(s, r#"<polyline fill="none" stroke="black" points="{left},{top} {left},{bottom} {right},{bottom}"/>"#);
    let _ = writeln!(s, r#"<text x="4" y="{}">{v1:.3}</text>"#, top + 10.0);
    let _ = writeln!(s, r#"<text x="4" y="{bottom}">{v0:.3}</text>"#);
    let _ = writeln!(s, r#"<text x="{left}" y="{}">{t0}</text>"#, bottom + 14.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">t = {t1}</text>"#, right, bottom + 14.0);
    if v0 < 0.0 && v1 > 0.0 {
        let _ = writeln!(s, r##"<line x1="{left}" y1="{0}" x2="{right}" y2="{0}" stroke="#bbb"/>"##, y(0.0));
    }
    for (k, (label, color, data)) in p.series.iter().enumerate() {
        let points: Vec<String> =
            data.iter().filter(|p| p.1.is_finite()).map(|&(t, v)| format!("{:.2},{:.2}", x(t), y(v))).collect();
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, points.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}" text-anchor="end">{label}</text>"#,
            right,
            top + 14.0 * (k + 1) as f64
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> TraceRecord {
        TraceRecord {
            t,
            y: vec![0.1],
            y_ref: vec![1.0],
            u: vec![-0.5],
            w: vec![0.0],
            e_norm: vec![0.9],
            k: vec![1.2],
            radius: vec![2.1],
        }
    }

    #[test]
    fn header_layout() {
        assert_eq!(csv_header(2, 1, 2), "t,y_1,y_2,yref_1,yref_2,u_1,u_2,w_1,e0norm,e1norm,k0,k1,rad0,rad1");
    }

    #[test]
    fn rows_have_seventeen_digits() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row(0.0), row(0.1)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "");
        let t = lines[2].split(',').next().unwrap();
        assert_eq!(t, "1.0000000000000001e-1");
        assert_eq!(t.parse::<f64>().unwrap(), 0.1);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let trace: Vec<_> = (0..5000).map(|k| row(k as f64 * 1e-3)).collect();
        let svg = svg_plot("x", &trace);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2 + 3);
    }
}
