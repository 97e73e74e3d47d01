//! Hand-written SVG figures: energy profiles with the annotation threshold,
//! validation confusion heatmaps, sweep curves with error bars, training
//! history, discriminant-embedding scatters, and importance bars. Every
//! function is a pure formatter, so identical inputs give identical bytes.

use std::fmt::Write as _;

use crate::annotate::EnergyProfile;
use crate::data::Interval;
use crate::eval::SweepCurve;
use crate::nn::EpochStats;
use crate::report::StoredReport;

pub const CLASS_COLORS: [&str; 7] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
];

const FONT: &str = "font-family=\"monospace\" font-size=\"12\"";

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

fn svg_open(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\
         <text x=\"{x}\" y=\"20\" {FONT} font-size=\"14\" text-anchor=\"middle\">{t}</text>",
        x = fmt(w / 2.0),
        t = escape(title),
    );
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Maps data coordinates into a pixel frame (y grows downward in SVG).
struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn new(x0: f64, y0: f64, w: f64, h: f64, xr: (f64, f64), yr: (f64, f64)) -> Frame {
        let pad = |(lo, hi): (f64, f64)| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        };
        let (xmin, xmax) = pad(xr);
        let (ymin, ymax) = pad(yr);
        Frame { x0, y0, w, h, xmin, xmax, ymin, ymax }
    }

    fn sx(&self, x: f64) -> f64 {
        self.x0 + (x - self.xmin) / (self.xmax - self.xmin) * self.w
    }

    fn sy(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.ymin) / (self.ymax - self.ymin) * self.h
    }

    fn render_axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let _ = write!(
            out,
            "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"black\"/>",
            x = fmt(self.x0),
            y = fmt(self.y0),
            w = fmt(self.w),
            h = fmt(self.h),
        );
        for i in 0..=4 {
            let fx = self.xmin + (self.xmax - self.xmin) * i as f64 / 4.0;
            let fy = self.ymin + (self.ymax - self.ymin) * i as f64 / 4.0;
            let px = self.sx(fx);
            let py = self.sy(fy);
            let _ = write!(
                out,
                "<line x1=\"{px}\" y1=\"{yb}\" x2=\"{px}\" y2=\"{yb2}\" stroke=\"black\"/>\
                 <text x=\"{px}\" y=\"{yt}\" {FONT} text-anchor=\"middle\">{lx}</text>\
                 <line x1=\"{xb}\" y1=\"{py}\" x2=\"{xb2}\" y2=\"{py}\" stroke=\"black\"/>\
                 <text x=\"{xt}\" y=\"{pyt}\" {FONT} text-anchor=\"end\">{ly}</text>",
                px = fmt(px),
                yb = fmt(self.y0 + self.h),
                yb2 = fmt(self.y0 + self.h + 5.0),
                yt = fmt(self.y0 + self.h + 18.0),
                lx = fmt(fx),
                xb = fmt(self.x0 - 5.0),
                xb2 = fmt(self.x0),
                py = fmt(py),
                xt = fmt(self.x0 - 8.0),
                pyt = fmt(py + 4.0),
                ly = fmt(fy),
            );
        }
        let _ = write!(
            out,
            "<text x=\"{cx}\" y=\"{by}\" {FONT} text-anchor=\"middle\">{xl}</text>\
             <text x=\"16\" y=\"{cy}\" {FONT} text-anchor=\"middle\" transform=\"rotate(-90 16 {cy})\">{yl}</text>",
            cx = fmt(self.x0 + self.w / 2.0),
            by = fmt(self.y0 + self.h + 36.0),
            xl = escape(x_label),
            cy = fmt(self.y0 + self.h / 2.0),
            yl = escape(y_label),
        );
    }
}

fn polyline(out: &mut String, frame: &Frame, xs: &[f64], ys: &[f64], color: &str) {
    let mut points = String::new();
    for (x, y) in xs.iter().zip(ys) {
        let _ = write!(points, "{},{} ", fmt(frame.sx(*x)), fmt(frame.sy(*y)));
    }
    let _ = write!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
        points.trim_end()
    );
}

/// Moving-average energy with the detected interval shaded and the
/// threshold drawn dashed.
pub fn energy_svg(
    profile: &EnergyProfile,
    threshold: f64,
    interval: Option<Interval>,
    title: &str,
) -> String {
    let n = profile.values.len().max(1);
    let ymax = profile.values.iter().cloned().fold(threshold, f64::max);
    let frame = Frame::new(70.0, 40.0, 600.0, 320.0, (0.0, (n - 1).max(1) as f64), (0.0, ymax));
    let mut out = String::new();
    svg_open(&mut out, 720.0, 420.0, title);
    if let Some(iv) = interval {
        let x = frame.sx(iv.start as f64);
        let w = frame.sx(iv.end.saturating_sub(1) as f64) - x;
        let _ = write!(
            out,
            "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"#2ca02c\" fill-opacity=\"0.15\"/>",
            x = fmt(x),
            y = fmt(frame.y0),
            w = fmt(w.max(1.0)),
            h = fmt(frame.h),
        );
    }
    // Cap the polyline at 2000 vertices; stride keeps it deterministic.
    let stride = n.div_ceil(2000).max(1);
    let xs: Vec<f64> = (0..n).step_by(stride).map(|i| i as f64).collect();
    let ys: Vec<f64> = (0..n).step_by(stride).map(|i| profile.values[i]).collect();
    polyline(&mut out, &frame, &xs, &ys, "#1f77b4");
    let ty = fmt(frame.sy(threshold));
    let _ = write!(
        out,
        "<line x1=\"{x1}\" y1=\"{ty}\" x2=\"{x2}\" y2=\"{ty}\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\
         <text x=\"{x2}\" y=\"{lty}\" {FONT} text-anchor=\"end\" fill=\"#d62728\">threshold</text>",
        x1 = fmt(frame.x0),
        x2 = fmt(frame.x0 + frame.w),
        lty = fmt(frame.sy(threshold) - 6.0),
    );
    frame.render_axes(&mut out, "sample", "mean energy");
    out.push_str("</svg>");
    out
}

/// Row-normalized heatmap with raw counts printed in each cell.
pub fn confusion_svg(report: &StoredReport, class_names: &[&str]) -> String {
    let nc = report.n_classes;
    assert_eq!(class_names.len(), nc, "one name per class");
    let cell = 52.0;
    let x0 = 110.0;
    let y0 = 60.0;
    let w = x0 + nc as f64 * cell + 30.0;
    let h = y0 + nc as f64 * cell + 70.0;
    let mut out = String::new();
    svg_open(
        &mut out,
        w,
        h,
        &format!("{} — {} validation confusion", report.classifier, report.protocol),
    );
    let row_totals: Vec<u64> = (0..nc)
        .map(|r| report.confusion[r * nc..(r + 1) * nc].iter().sum())
        .collect();
    for r in 0..nc {
        for c in 0..nc {
            let count = report.confusion[r * nc + c];
            let frac = if row_totals[r] > 0 {
                count as f64 / row_totals[r] as f64
            } else {
                0.0
            };
            let lerp = |hi: f64| (255.0 - (255.0 - hi) * frac).round() as u8;
            let (red, green, blue) = (lerp(31.0), lerp(119.0), lerp(180.0));
            let x = x0 + c as f64 * cell;
            let y = y0 + r as f64 * cell;
            let text_fill = if frac > 0.5 { "white" } else { "black" };
            let _ = write!(
                out,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"rgb({red},{green},{blue})\" stroke=\"#cccccc\"/>\
                 <text x=\"{tx}\" y=\"{ty}\" {FONT} text-anchor=\"middle\" fill=\"{text_fill}\">{count}</text>",
                x = fmt(x),
                y = fmt(y),
                tx = fmt(x + cell / 2.0),
                ty = fmt(y + cell / 2.0 + 4.0),
            );
        }
    }
    for (i, name) in class_names.iter().enumerate() {
        let _ = write!(
            out,
            "<text x=\"{rx}\" y=\"{ry}\" {FONT} text-anchor=\"end\">{n}</text>\
             <text x=\"{cx}\" y=\"{cy}\" {FONT} text-anchor=\"middle\">{n}</text>",
            rx = fmt(x0 - 8.0),
            ry = fmt(y0 + i as f64 * cell + cell / 2.0 + 4.0),
            cx = fmt(x0 + i as f64 * cell + cell / 2.0),
            cy = fmt(y0 + nc as f64 * cell + 18.0),
            n = escape(name),
        );
    }
    let _ = write!(
        out,
        "<text x=\"{x}\" y=\"{y}\" {FONT} text-anchor=\"middle\">predicted class (rows = true class)</text>",
        x = fmt(x0 + nc as f64 * cell / 2.0),
        y = fmt(y0 + nc as f64 * cell + 44.0),
    );
    out.push_str("</svg>");
    out
}

/// Mean validation accuracy against the swept value, ±1 std error bars.
pub fn sweep_svg(curve: &SweepCurve, title: &str) -> String {
    let xs: Vec<f64> = curve.points.iter().map(|p| p.value).collect();
    let ys: Vec<f64> = curve.points.iter().map(|p| p.mean_validation_accuracy).collect();
    let lo = curve
        .points
        .iter()
        .map(|p| p.mean_validation_accuracy - p.std_validation_accuracy)
        .fold(f64::INFINITY, f64::min);
    let xr = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let frame = Frame::new(70.0, 40.0, 600.0, 320.0, xr, ((lo - 0.02).min(1.0), 1.0));
    let mut out = String::new();
    svg_open(&mut out, 720.0, 420.0, title);
    polyline(&mut out, &frame, &xs, &ys, "#1f77b4");
    for p in &curve.points {
        let x = fmt(frame.sx(p.value));
        let y1 = fmt(frame.sy(p.mean_validation_accuracy - p.std_validation_accuracy));
        let y2 = fmt(frame.sy(p.mean_validation_accuracy + p.std_validation_accuracy));
        let cy = fmt(frame.sy(p.mean_validation_accuracy));
        let _ = write!(
            out,
            "<line x1=\"{x}\" y1=\"{y1}\" x2=\"{x}\" y2=\"{y2}\" stroke=\"#1f77b4\"/>\
             <circle cx=\"{x}\" cy=\"{cy}\" r=\"3.5\" fill=\"#1f77b4\"/>",
        );
    }
    frame.render_axes(&mut out, &curve.axis, "validation accuracy");
    out.push_str("</svg>");
    out
}

/// Per-epoch loss (left scale, red) and training accuracy (0–1, blue).
pub fn history_svg(history: &[EpochStats], title: &str) -> String {
    let mut out = String::new();
    svg_open(&mut out, 720.0, 420.0, title);
    if history.is_empty() {
        out.push_str("</svg>");
        return out;
    }
    let epochs: Vec<f64> = history.iter().map(|e| e.epoch as f64).collect();
    let max_loss = history.iter().map(|e| e.loss).fold(f64::MIN_POSITIVE, f64::max);
    let frame = Frame::new(
        70.0,
        40.0,
        600.0,
        320.0,
        (epochs[0], epochs[epochs.len() - 1]),
        (0.0, 1.0),
    );
    let losses: Vec<f64> = history.iter().map(|e| e.loss / max_loss).collect();
    let accs: Vec<f64> = history.iter().map(|e| e.accuracy).collect();
    polyline(&mut out, &frame, &epochs, &losses, "#d62728");
    polyline(&mut out, &frame, &epochs, &accs, "#1f77b4");
    let _ = write!(
        out,
        "<text x=\"560\" y=\"52\" {FONT} fill=\"#d62728\">loss / {ml}</text>\
         <text x=\"560\" y=\"68\" {FONT} fill=\"#1f77b4\">accuracy</text>",
        ml = fmt(max_loss),
    );
    frame.render_axes(&mut out, "epoch", "normalized value");
    out.push_str("</svg>");
    out
}

/// Scatter of a 2-column embedding colored by class.
pub fn scatter_svg(
    points: &[f64],
    labels: &[usize],
    class_names: &[&str],
    title: &str,
) -> String {
    assert_eq!(points.len(), labels.len() * 2, "points must be n x 2");
    let xs: Vec<f64> = labels.iter().enumerate().map(|(i, _)| points[i * 2]).collect();
    let ys: Vec<f64> = labels.iter().enumerate().map(|(i, _)| points[i * 2 + 1]).collect();
    let range = |v: &[f64]| {
        (
            v.iter().cloned().fold(f64::INFINITY, f64::min),
            v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let frame = Frame::new(70.0, 40.0, 560.0, 360.0, range(&xs), range(&ys));
    let mut out = String::new();
    svg_open(&mut out, 780.0, 460.0, title);
    for (i, &label) in labels.iter().enumerate() {
        let color = CLASS_COLORS[label % CLASS_COLORS.len()];
        let _ = write!(
            out,
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.7\"/>",
            x = fmt(frame.sx(xs[i])),
            y = fmt(frame.sy(ys[i])),
        );
    }
    for (c, name) in class_names.iter().enumerate() {
        let y = 60.0 + c as f64 * 18.0;
        let color = CLASS_COLORS[c % CLASS_COLORS.len()];
        let _ = write!(
            out,
            "<circle cx=\"652\" cy=\"{cy}\" r=\"4\" fill=\"{color}\"/>\
             <text x=\"662\" y=\"{ty}\" {FONT}>{n}</text>",
            cy = fmt(y - 4.0),
            ty = fmt(y),
            n = escape(name),
        );
    }
    frame.render_axes(&mut out, "component 1", "component 2");
    out.push_str("</svg>");
    out
}

/// Horizontal bars for the top-ranked features.
pub fn importance_svg(names: &[String], importance: &[f64], top_n: usize, title: &str) -> String {
    assert_eq!(names.len(), importance.len());
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then(a.cmp(&b)));
    order.truncate(top_n.min(names.len()));
    let bar_h = 18.0;
    let x0 = 170.0;
    let w = 720.0;
    let h = 70.0 + order.len() as f64 * (bar_h + 6.0);
    let max_imp = order
        .first()
        .map(|&i| importance[i])
        .unwrap_or(1.0)
        .max(f64::MIN_POSITIVE);
    let mut out = String::new();
    svg_open(&mut out, w, h, title);
    for (row, &i) in order.iter().enumerate() {
        let y = 46.0 + row as f64 * (bar_h + 6.0);
        let bw = importance[i] / max_imp * (w - x0 - 80.0);
        let _ = write!(
            out,
            "<text x=\"{lx}\" y=\"{ly}\" {FONT} text-anchor=\"end\">{n}</text>\
             <rect x=\"{x0}\" y=\"{y}\" width=\"{bw}\" height=\"{bar_h}\" fill=\"#1f77b4\"/>\
             <text x=\"{vx}\" y=\"{ly}\" {FONT}>{v}</text>",
            lx = fmt(x0 - 8.0),
            ly = fmt(y + bar_h - 4.0),
            n = escape(&names[i]),
            y = fmt(y),
            bw = fmt(bw.max(0.0)),
            vx = fmt(x0 + bw.max(0.0) + 6.0),
            v = fmt(importance[i]),
        );
    }
    out.push_str("</svg>");
    out
}
