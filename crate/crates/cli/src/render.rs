//! Output files: one `distributions.csv` for the whole suite and, per
//! comparison, a directory with `difference.csv`, `difference.svg` and
//! `verdict.txt`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use designworld::experiment::{DifferencePoint, Direction, Verdict};

use crate::suite::{ComparisonResult, SuiteResults, ALPHA};
use crate::CliError;

pub const DISTRIBUTION_COLUMNS: [&str; 10] = [
    "comparison_id",
    "strategy_label",
    "radius",
    "dialogue_index",
    "raw_score",
    "messages",
    "inferences",
    "retrievals",
    "performance",
    "normalized",
];

pub const DIFFERENCE_COLUMNS: [&str; 5] = ["radius", "mean_diff", "ks_d", "ks_p", "direction"];

pub fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::Positive => "positive",
        Direction::Negative => "negative",
        Direction::Zero => "zero",
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.to_path_buf(), source: e.into() }
}

/// Writes every output file under `dir` and returns the paths written.
pub fn write_outputs(results: &SuiteResults, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let path = dir.join("distributions.csv");
    fs::write(&path, distributions_csv(results)?).map_err(io_err(&path))?;
    written.push(path);

    for c in &results.comparisons {
        let sub = dir.join(&c.comparison.id);
        fs::create_dir_all(&sub).map_err(io_err(&sub))?;
        let files = [
            ("difference.csv", difference_csv(&c.series)?),
            ("difference.svg", difference_svg(c)),
            ("verdict.txt", verdict_text(c)),
        ];
        for (name, content) in files {
            let path = sub.join(name);
            fs::write(&path, content).map_err(io_err(&path))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// One row per simulated dialogue, strategy 1 before strategy 2 within
/// each comparison.
pub fn distributions_csv(results: &SuiteResults) -> Result<String, CliError> {
    let path = Path::new("distributions.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DISTRIBUTION_COLUMNS).map_err(csv_err(path))?;
    for c in &results.comparisons {
        for (pair, dists) in [(c.comparison.strategy_1, &c.first), (c.comparison.strategy_2, &c.second)] {
            let label = pair.label();
            for (radius, dist) in dists {
                for r in &dist.results {
                    w.write_record([
                        c.comparison.id.clone(),
                        label.clone(),
                        radius.to_string(),
                        r.index.to_string(),
                        r.raw_score.to_string(),
                        r.totals.messages.to_string(),
                        r.totals.inferences.to_string(),
                        r.totals.retrievals.to_string(),
                        r.performance.to_string(),
                        r.normalized.to_string(),
                    ])
                    .map_err(csv_err(path))?;
                }
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn difference_csv(series: &[DifferencePoint]) -> Result<String, CliError> {
    let path = Path::new("difference.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DIFFERENCE_COLUMNS).map_err(csv_err(path))?;
    for p in series {
        w.write_record([
            p.radius.to_string(),
            p.mean_diff.to_string(),
            p.ks.d_statistic.to_string(),
            p.ks.p_value.to_string(),
            direction_name(p.ks.direction).to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

fn radius_list(v: &Verdict, d: Direction) -> String {
    let radii = v.radii(d);
    if radii.is_empty() {
        "none".into()
    } else {
        radii.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")
    }
}

pub fn verdict_text(c: &ComparisonResult) -> String {
    let v = &c.verdict;
    let mut s = String::new();
    let _ = writeln!(s, "{}", v.kind);
    let _ = writeln!(s, "comparison: {}", c.comparison.id);
    let _ = writeln!(s, "strategy 1: {}", c.comparison.strategy_1);
    let _ = writeln!(s, "strategy 2: {}", c.comparison.strategy_2);
    let _ = writeln!(s, "task variant: {}", c.comparison.variant);
    let _ = writeln!(s, "significance level: {ALPHA}");
    let _ = writeln!(s, "significant positive radii: {}", radius_list(v, Direction::Positive));
    let _ = writeln!(s, "significant negative radii: {}", radius_list(v, Direction::Negative));
    if v.mixed {
        let _ = writeln!(s, "mixed: both directions reach two significant radii");
    }
    s
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Mean difference against radius. Points above the dotted zero line favour
/// strategy 1; filled markers are significant at the suite level, with `*`
/// for p < .05 and `**` for p < .01.
pub fn difference_svg(c: &ComparisonResult) -> String {
    let series = &c.series;
    let lo = series.first().map_or(1, |p| p.radius) as f64;
    let hi = series.last().map_or(1, |p| p.radius) as f64;
    let span = series.iter().map(|p| p.mean_diff.abs()).fold(0.0, f64::max);
    let span = if span > 0.0 { span * 1.15 } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |r: u32| if hi > lo { LEFT + (r as f64 - lo) / (hi - lo) * plot_w } else { LEFT + plot_w / 2.0 };
    let y = |d: f64| TOP + (span - d) / (2.0 * span) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{} minus {} ({})</text>"#,
        WIDTH / 2.0,
        escape(&c.comparison.strategy_1.label()),
        escape(&c.comparison.strategy_2.label()),
        c.comparison.variant
    );
    let _ =
        writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="2,4"/>"#,
        y(0.0),
        LEFT + plot_w,
        y(0.0)
    );
    for tick in [-span, 0.0, span] {
        let _ =
            writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#, LEFT - 6.0, y(tick) + 4.0, tick);
    }
    for p in series {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x(p.radius),
            TOP + plot_h + 18.0,
            p.radius
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">memory radius</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">mean normalized performance difference</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    let points: Vec<String> = series.iter().map(|p| format!("{:.2},{:.2}", x(p.radius), y(p.mean_diff))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="black"/>"#, points.join(" "));
    for p in series {
        let significant = p.ks.p_value < ALPHA && p.ks.direction != Direction::Zero;
        let fill = if significant { "black" } else { "white" };
        let (cx, cy) = (x(p.radius), y(p.mean_diff));
        let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3.5" fill="{fill}" stroke="black"/>"#);
        if significant {
            let stars = if p.ks.p_value < 0.01 { "**" } else { "*" };
            let _ = writeln!(s, r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{stars}</text>"#, cy - 8.0);
        }
    }
    s.push_str("</svg>\n");
    s
}
