//! Plain SVG charts and a markdown summary rendered from evaluation output.

use std::fmt::Write as _;

use crate::attribute::{BinaryLabel, FiveWay};
use crate::evaluate::{LabelShift, PointFlag};
use crate::pipeline::{Evaluation, ScatterRow};

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;

/// File-name-safe form of `s`.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    s
}

/// Grouped bars: for each truth class, before/after counts per band.
pub fn label_shift_svg(title: &str, shift: &LabelShift) -> String {
    let mut s = open(title);
    let classes: Vec<BinaryLabel> = shift.keys().copied().collect();
    let max = shift
        .values()
        .flat_map(|h| h.before.values().chain(h.after.values()))
        .copied()
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let panel_w = (W - PAD) / classes.len().max(1) as f64;
    let plot_h = H - 2.0 * PAD;
    for (ci, class) in classes.iter().enumerate() {
        let h = &shift[class];
        let x0 = PAD / 2.0 + ci as f64 * panel_w;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">truth: {}</text>"#,
            x0 + panel_w / 2.0,
            PAD - 8.0,
            class.as_str()
        );
        let slot = panel_w / FiveWay::ALL.len() as f64;
        for (li, label) in FiveWay::ALL.iter().enumerate() {
            let sx = x0 + li as f64 * slot;
            for (bi, (count, fill)) in [
                (h.before.get(label).copied().unwrap_or(0), "#8da0cb"),
                (h.after.get(label).copied().unwrap_or(0), "#fc8d62"),
            ]
            .into_iter()
            .enumerate()
            {
                let bh = count as f64 / max * plot_h;
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{fill}"/>"#,
                    sx + 4.0 + bi as f64 * (slot - 8.0) / 2.0,
                    H - PAD - bh,
                    (slot - 8.0) / 2.0,
                    bh
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="9">{}</text>"#,
                sx + slot / 2.0,
                H - PAD + 14.0,
                label.as_str()
            );
        }
    }
    let _ = writeln!(
        s,
        r##"<text x="{PAD}" y="{}" fill="#8da0cb">before</text><text x="{}" y="{}" fill="#fc8d62">after</text>"##,
        H - 10.0,
        PAD + 60.0,
        H - 10.0
    );
    s.push_str("</svg>\n");
    s
}

/// Similarity on x, UID score on y; original, selected and other
/// candidates drawn differently.
pub fn scatter_svg(title: &str, y_label: &str, points: &[&ScatterRow]) -> String {
    let mut s = open(title);
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x_lo = x_lo.min(p.similarity);
        x_hi = x_hi.max(p.similarity);
        y_lo = y_lo.min(p.uid);
        y_hi = y_hi.max(p.uid);
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    let span = |lo: f64, hi: f64| if hi - lo > 1e-12 { hi - lo } else { 1.0 };
    let (xs, ys) = (span(x_lo, x_hi), span(y_lo, y_hi));
    let px = |x: f64| PAD + (x - x_lo) / xs * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y_lo) / ys * (H - 2.0 * PAD);

    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{y}" x2="{x}" y2="{y}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{y}" stroke="black"/>"#,
        x = W - PAD,
        y = H - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">similarity ({x_lo:.4} to {x_hi:.4})</text>"#,
        W / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">{} ({y_lo:.3} to {y_hi:.3})</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for p in points {
        let (fill, r) = match p.flag {
            PointFlag::Original => ("#d62728", 6.0),
            PointFlag::Selected => ("#2ca02c", 6.0),
            PointFlag::Candidate => ("#1f77b4", 4.0),
        };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{fill}"/>"#,
            px(p.similarity),
            py(p.uid)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn summary_markdown(evaluation: &Evaluation) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Evaluation summary ({})\n", evaluation.method);
    let _ = writeln!(s, "| detector | variant | n | tp | fn | fp | tn | accuracy | machine F1 | macro F1 |");
    let _ = writeln!(s, "|---|---|---|---|---|---|---|---|---|---|");
    for e in &evaluation.results {
        let r = &e.report;
        let m = r.matrix;
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {:.4} | {:.4} | {:.4} |",
            e.detector,
            e.variant,
            m.total(),
            m.tp,
            m.fn_,
            m.fp,
            m.tn,
            r.accuracy,
            r.machine.f1.value,
            r.macro_f1.value
        );
    }
    s
}
