//! Grouped bar chart of final test accuracy, one group per condition.

use std::fmt::Write as _;
use std::path::Path;

use super::experiment::ConditionResult;
use crate::error::{Error, Result};

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 400.0;
pub const MARGIN_LEFT: f64 = 70.0;
pub const MARGIN_RIGHT: f64 = 20.0;
pub const MARGIN_TOP: f64 = 40.0;
pub const MARGIN_BOTTOM: f64 = 60.0;
/// Height in pixels of an accuracy of 1.0.
pub const PLOT_HEIGHT: f64 = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

const ZETA_FILL: &str = "#1f77b4";
const ADAM_FILL: &str = "#ff7f0e";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn summary_svg(conditions: &[ConditionResult]) -> Result<String> {
    if conditions.is_empty() {
        return Err(Error::invalid("summary chart", "no conditions to plot"));
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let base_y = MARGIN_TOP + PLOT_HEIGHT;
    let group_w = plot_w / conditions.len() as f64;
    let bar_w = group_w * 0.3;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">Test accuracy: ZetA vs Adam</text>"#,
        WIDTH / 2.0
    );
    // Axes and gridlines.
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{base_y}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT}" y1="{base_y}" x2="{:.1}" y2="{base_y}" stroke="black"/>"#,
        WIDTH - MARGIN_RIGHT
    );
    for tick in 0..=5 {
        let v = tick as f64 / 5.0;
        let y = base_y - v * PLOT_HEIGHT;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{y:.3}" x2="{MARGIN_LEFT}" y2="{y:.3}" stroke="black"/><text x="{:.1}" y="{:.3}" text-anchor="end">{v:.1}</text>"#,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">Test accuracy</text>"#,
        MARGIN_TOP + PLOT_HEIGHT / 2.0,
        MARGIN_TOP + PLOT_HEIGHT / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Condition</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );

    for (i, c) in conditions.iter().enumerate() {
        let center = MARGIN_LEFT + group_w * (i as f64 + 0.5);
        let bars = [
            (
                "zeta",
                ZETA_FILL,
                c.zeta.final_eval().test_accuracy,
                center - bar_w,
            ),
            ("adam", ADAM_FILL, c.adam.final_eval().test_accuracy, center),
        ];
        for (name, fill, acc, x) in bars {
            let h = acc.clamp(0.0, 1.0) * PLOT_HEIGHT;
            let _ = writeln!(
                s,
                r#"<rect class="bar {name}" data-accuracy="{acc}" x="{x:.3}" y="{:.3}" width="{bar_w:.3}" height="{h:.3}" fill="{fill}"/>"#,
                base_y - h
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="{:.3}" text-anchor="middle" font-size="10">{acc:.3}</text>"#,
                x + bar_w / 2.0,
                base_y - h - 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{center:.3}" y="{:.1}" text-anchor="middle">{}</text>"#,
            base_y + 18.0,
            escape(&c.condition)
        );
    }
    // Legend.
    let lx = WIDTH - MARGIN_RIGHT - 110.0;
    let _ = writeln!(
        s,
        r#"<rect x="{lx}" y="30" width="12" height="12" fill="{ZETA_FILL}"/><text x="{}" y="40">ZetA</text>"#,
        lx + 18.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="30" width="12" height="12" fill="{ADAM_FILL}"/><text x="{}" y="40">Adam</text>"#,
        lx + 60.0,
        lx + 78.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render_summary_svg(conditions: &[ConditionResult], path: &Path) -> Result<()> {
    let svg = summary_svg(conditions)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
