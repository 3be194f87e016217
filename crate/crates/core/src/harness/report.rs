//! Operator-facing rendering of a batch report: an overlay marking each
//! display and a plain-text table.

use std::fmt::Write;

use crate::decoder::{FailureCause, Verdict};
use crate::encoder::{LedLayout, RasterImage, Rgb};

use super::scenario::BatchReport;

const PASS: Rgb = Rgb(0, 255, 0);
const FAIL: Rgb = Rgb(255, 0, 0);
const BACKGROUND: Rgb = Rgb(20, 20, 20);

fn draw_rect(img: &mut RasterImage, (x0, y0, x1, y1): (i64, i64, i64, i64), c: Rgb) {
    for x in x0..=x1 {
        img.put(x, y0, c);
        img.put(x, y1, c);
    }
    for y in y0..=y1 {
        img.put(x0, y, c);
        img.put(x1, y, c);
    }
}

fn draw_cross(img: &mut RasterImage, (x0, y0, x1, y1): (i64, i64, i64, i64), c: Rgb) {
    let (w, h) = (x1 - x0, y1 - y0);
    let steps = w.max(h).max(1);
    for s in 0..=steps {
        let x = x0 + w * s / steps;
        let y = y0 + h * s / steps;
        img.put(x, y, c);
        img.put(x, y1 - (y - y0), c);
    }
}

fn cause_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Passed => "passed",
        Verdict::Failed(FailureCause::SasMismatch) => "sas mismatch",
        Verdict::Failed(FailureCause::SyncError) => "sync error",
        Verdict::Failed(FailureCause::Both) => "sas mismatch + sync error",
        Verdict::Failed(FailureCause::NotDetected) => "not detected",
    }
}

/// Draws a green box around every passed display and a red cross over every
/// failed one, on `background` if given.
pub fn render_overlay(
    report: &BatchReport,
    layout: &LedLayout,
    background: Option<&RasterImage>,
) -> RasterImage {
    let mut img = background
        .cloned()
        .unwrap_or_else(|| RasterImage::filled(layout.width, layout.height, BACKGROUND));
    for (p, d) in report.per_node.iter().zip(&layout.nodes) {
        let (x0, y0, x1, y1) = d.bounds();
        let margin = 3.0;
        let b = (
            (x0 - margin).floor() as i64,
            (y0 - margin).floor() as i64,
            (x1 + margin).ceil() as i64,
            (y1 + margin).ceil() as i64,
        );
        if p.verdict.passed() {
            draw_rect(&mut img, b, PASS);
        } else {
            draw_cross(&mut img, b, FAIL);
        }
    }
    img
}

pub fn render_table(report: &BatchReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>4}  {:>7}  {:<10}  {:<10}  {:<5}  {:<26}  decision",
        "node", "session", "shown", "read", "sync", "verdict"
    );
    let hex = |b: &Option<crate::BitString>| b.as_ref().map_or("-".to_string(), |b| b.to_hex());
    for p in &report.per_node {
        let sync = match p.sync_ok {
            Some(true) => "ok",
            Some(false) => "error",
            None => "-",
        };
        let decision = match p.node_decision {
            Some(d) => format!("{d:?}").to_lowercase(),
            None => p
                .wireless_failure
                .as_ref()
                .map_or("-".into(), |f| format!("wireless: {f:?}")),
        };
        let _ = writeln!(
            s,
            "{:>4}  {:>7}  {:<10}  {:<10}  {:<5}  {:<26}  {}",
            p.node,
            p.session_id,
            hex(&p.displayed_sas),
            hex(&p.extracted_sas),
            sync,
            cause_label(p.verdict),
            decision
        );
    }
    let t = &report.batch.tallies;
    let _ = writeln!(
        s,
        "passed {}/{}; sas mismatch {}, sync error {}, both {}, not detected {}; {} frames over {} ms",
        t.passed,
        report.per_node.len(),
        t.sas_mismatch,
        t.sync_error,
        t.both,
        t.not_detected,
        report.batch.frame_count,
        report.batch.duration_ms
    );
    s
}

pub fn render_report(
    report: &BatchReport,
    layout: &LedLayout,
    background: Option<&RasterImage>,
) -> (RasterImage, String) {
    (
        render_overlay(report, layout, background),
        render_table(report),
    )
}
