use std::fmt::Write;
use std::str::FromStr;

use super::BenchError;
use crate::model::{is_feasible, span, ConstraintSet, Instance, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GanttFormat {
    #[default]
    Svg,
    Text,
}

impl FromStr for GanttFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "svg" => Ok(GanttFormat::Svg),
            "text" => Ok(GanttFormat::Text),
            other => Err(format!("unknown gantt format {other:?}")),
        }
    }
}

const LANE_H: f64 = 24.0;
const MARGIN: f64 = 40.0;
const WIDTH: f64 = 800.0;
const TEXT_COLS: usize = 80;
const JOB_GLYPHS: &[u8] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

/// Machine-lane chart of one cycle. Time runs from `S_min` to `C_max`.
pub fn render_gantt(
    inst: &Instance,
    cs: &ConstraintSet,
    s: &Schedule,
    format: GanttFormat,
) -> Result<String, BenchError> {
    if !is_feasible(inst, cs, s) {
        return Err(BenchError::Infeasible);
    }
    Ok(match format {
        GanttFormat::Svg => svg(inst, cs, s),
        GanttFormat::Text => text(inst, cs, s),
    })
}

fn hue(job: usize) -> usize {
    (job * 137) % 360
}

fn svg(inst: &Instance, cs: &ConstraintSet, s: &Schedule) -> String {
    let (lo, hi) = span(inst, s);
    let tau = hi - lo;
    let scale = WIDTH / tau;
    let lanes = inst.machine_count() as f64;
    let (w, h) = (WIDTH + 2.0 * MARGIN, lanes * LANE_H + 2.0 * MARGIN);

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(out, "<title>{} tau={tau}</title>", escape(inst.name()));
    for (m, ops) in cs.machine_ops().iter().enumerate() {
        let y = MARGIN + m as f64 * LANE_H;
        let _ = writeln!(out, "<g class=\"lane\" id=\"M{m}\">");
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">M{m}</text>",
            MARGIN - 6.0,
            y + LANE_H * 0.65
        );
        let mut ops = ops.clone();
        ops.sort_by(|&a, &b| s.start(a).total_cmp(&s.start(b)).then(a.cmp(&b)));
        for op in ops {
            let id = inst.op_id(op);
            let x = MARGIN + (s.start(op) - lo) * scale;
            let bw = inst.duration(op) * scale;
            let _ = writeln!(
                out,
                "<rect class=\"op\" x=\"{x:.2}\" y=\"{:.2}\" width=\"{bw:.2}\" height=\"{:.2}\" fill=\"hsl({},60%,70%)\" stroke=\"black\"/>",
                y + 2.0,
                LANE_H - 4.0,
                hue(id.job)
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" text-anchor=\"middle\">{},{}</text>",
                x + bw / 2.0,
                y + LANE_H * 0.65,
                id.job,
                id.op
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One row per machine; each cell is a time slot labelled with the job
/// occupying it. Long cycles are scaled down to fit the row width.
fn text(inst: &Instance, cs: &ConstraintSet, s: &Schedule) -> String {
    let (lo, hi) = span(inst, s);
    let tau = hi - lo;
    let cols = (tau.ceil() as usize).clamp(1, TEXT_COLS);
    let scale = cols as f64 / tau;
    let mut out = format!("{} tau={tau}\n", inst.name());
    for (m, ops) in cs.machine_ops().iter().enumerate() {
        let mut row = vec![b'.'; cols];
        for &op in ops {
            let a = ((s.start(op) - lo) * scale).floor() as usize;
            let b = (((s.start(op) - lo + inst.duration(op)) * scale).floor() as usize).clamp(a + 1, cols);
            let glyph = JOB_GLYPHS[inst.op_id(op).job % JOB_GLYPHS.len()];
            for c in &mut row[a.min(cols - 1)..b] {
                *c = glyph;
            }
        }
        let _ = writeln!(out, "M{m:<3}|{}|", String::from_utf8(row).expect("ascii"));
    }
    out
}
