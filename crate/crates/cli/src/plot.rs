// SPDX-License-Identifier: MIT OR Apache-2.0

//! Plain SVG figures. Output depends only on the result document, so
//! identical inputs give identical bytes.

use std::fmt::Write as _;

use eras::{ChangeKind, DetectionResult};

use crate::report::{PanelResult, ResultDoc};

const CELL_W: f64 = 420.0;
const CELL_H: f64 = 150.0;
const MARGIN: f64 = 36.0;
const COLS: usize = 2;
const LINE: &str = "#1f4e79";
const MEAN_MARK: &str = "#b22222";
const VAR_MARK: &str = "#2e7d32";

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn markers(result: Option<&DetectionResult>) -> Vec<(usize, ChangeKind)> {
    result
        .map(|r| r.change_points.iter().map(|c| (c.index, c.kind)).collect())
        .unwrap_or_default()
}

fn marker_style(kind: ChangeKind) -> String {
    match kind {
        ChangeKind::Mean => format!("stroke=\"{MEAN_MARK}\" stroke-width=\"1.5\""),
        ChangeKind::Variance => {
            format!("stroke=\"{VAR_MARK}\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"")
        }
    }
}

/// Small multiples of every series with vertical change-point markers:
/// solid for mean, dashed for variance. A marker sits between the last
/// season of one segment and the first of the next.
pub fn panel_svg(p: &PanelResult) -> String {
    let panel = &p.panel;
    let n = panel.n_series();
    let t = panel.len();
    let rows = n.div_ceil(COLS);
    let width = COLS as f64 * CELL_W + MARGIN;
    let height = rows as f64 * (CELL_H + MARGIN) + 2.0 * MARGIN;
    let mut marks = markers(Some(&p.mean));
    marks.extend(markers(p.variance.as_ref()));

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"22\" font-size=\"15\">{}</text>",
        MARGIN,
        esc(&p.title)
    );
    for (j, (row, id)) in panel.rows().zip(panel.series_ids()).enumerate() {
        let x0 = MARGIN + (j % COLS) as f64 * CELL_W;
        let y0 = 2.0 * MARGIN + (j / COLS) as f64 * (CELL_H + MARGIN);
        let w = CELL_W - MARGIN;
        let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let x = |i: f64| x0 + w * i / (t - 1).max(1) as f64;
        let y = |v: f64| y0 + CELL_H * (1.0 - (v - lo) / span);

        let _ = writeln!(
            s,
            "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{w:.2}\" height=\"{CELL_H:.2}\" fill=\"none\" stroke=\"#999\"/>"
        );
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", x0, y0 - 4.0, esc(id));
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            x0,
            y0 + CELL_H + 13.0,
            panel.time_index()[0]
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            x0 + w,
            y0 + CELL_H + 13.0,
            panel.time_index()[t - 1]
        );
        let points: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x(i as f64), y(v)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{LINE}\" stroke-width=\"1.2\" points=\"{}\"/>",
            points.join(" ")
        );
        for &(b, kind) in &marks {
            // between positions b and b + 1 (1-based), i.e. 0-based b - 0.5
            let xm = x(b as f64 - 0.5);
            let _ = writeln!(
                s,
                "<line x1=\"{xm:.2}\" y1=\"{y0:.2}\" x2=\"{xm:.2}\" y2=\"{:.2}\" {}/>",
                y0 + CELL_H,
                marker_style(kind)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// One row per franchise spanning its seasons, with its change points.
pub fn timeline_svg(doc: &ResultDoc) -> String {
    let teams: Vec<&PanelResult> = doc.panels.iter().filter(|p| p.name.starts_with("team-")).collect();
    let first = teams.iter().map(|p| p.panel.time_index()[0]).min().unwrap_or(0);
    let last = teams
        .iter()
        .map(|p| *p.panel.time_index().last().expect("non-empty panel"))
        .max()
        .unwrap_or(1);
    let label_w = 190.0;
    let plot_w = 720.0;
    let row_h = 18.0;
    let width = label_w + plot_w + MARGIN;
    let height = 2.0 * MARGIN + row_h * teams.len() as f64 + 20.0;
    let span = f64::from((last - first).max(1));
    let x = |year: f64| label_w + plot_w * (year - f64::from(first)) / span;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(s, "<text x=\"8\" y=\"22\" font-size=\"15\">Change points by franchise</text>");
    for (i, p) in teams.iter().enumerate() {
        let yc = 2.0 * MARGIN + row_h * i as f64;
        let years = p.panel.time_index();
        let _ = writeln!(s, "<text x=\"8\" y=\"{:.2}\">{}</text>", yc + 4.0, esc(&p.title));
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{yc:.2}\" x2=\"{:.2}\" y2=\"{yc:.2}\" stroke=\"#bbb\" stroke-width=\"4\"/>",
            x(f64::from(years[0])),
            x(f64::from(years[years.len() - 1]))
        );
        let mut marks = markers(Some(&p.mean));
        marks.extend(markers(p.variance.as_ref()));
        for (b, kind) in marks {
            let xm = x(f64::from(years[b - 1]) + 0.5);
            let _ = writeln!(
                s,
                "<line x1=\"{xm:.2}\" y1=\"{:.2}\" x2=\"{xm:.2}\" y2=\"{:.2}\" {}/>",
                yc - 7.0,
                yc + 7.0,
                marker_style(kind)
            );
        }
    }
    let axis_y = 2.0 * MARGIN + row_h * teams.len() as f64;
    let mut year = (first + 9) / 10 * 10;
    while year <= last {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{year}</text>",
            x(f64::from(year)),
            axis_y + 6.0
        );
        year += 20;
    }
    s.push_str("</svg>\n");
    s
}

/// File names and contents of every figure for a result.
pub fn render(doc: &ResultDoc) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = doc
        .panels
        .iter()
        .map(|p| (format!("{}.svg", p.name), panel_svg(p)))
        .collect();
    if doc.panels.iter().any(|p| p.name.starts_with("team-")) {
        out.push(("franchise-timeline.svg".into(), timeline_svg(doc)));
    }
    out
}
