//! Flat-file outputs: per-run trace CSVs, selection logs, aggregate curves,
//! cost-ratio tables, a self-contained SVG chart, and the resolved-config
//! echo. Floating-point cells use the shortest round-trip representation, so
//! re-parsing a file reproduces the written values exactly.

use super::{CostRatioRow, SuiteResult};
use crate::classifier::{RunTrace, TraceRow};
use crate::route_planner::Schedule;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

fn csv_to_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    }
}

/// Writes `epoch,labeled_size,evaluations,rotation_distance,loss,test_accuracy`
/// rows; `test_accuracy` is empty on non-probe rows.
pub fn write_trace_csv(path: &Path, trace: &RunTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_to_err(path, e))?;
    w.write_record(["epoch", "labeled_size", "evaluations", "rotation_distance", "loss", "test_accuracy"])
        .map_err(|e| csv_to_err(path, e))?;
    for r in &trace.rows {
        w.write_record([
            r.epoch.to_string(),
            r.labeled_size.to_string(),
            r.evaluations.to_string(),
            r.rotation_distance.to_string(),
            r.loss.to_string(),
            r.test_accuracy.map(|a| a.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| csv_to_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a trace CSV back; the exact inverse of [`write_trace_csv`].
pub fn read_trace_csv(path: &Path) -> Result<RunTrace> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_to_err(path, e))?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_to_err(path, e))?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let parse_err =
            |what: &str| Error::parse(path, format!("row {}: bad {what}", i + 2));
        rows.push(TraceRow {
            epoch: field(0).parse().map_err(|_| parse_err("epoch"))?,
            labeled_size: field(1).parse().map_err(|_| parse_err("labeled_size"))?,
            evaluations: field(2).parse().map_err(|_| parse_err("evaluations"))?,
            rotation_distance: field(3).parse().map_err(|_| parse_err("rotation_distance"))?,
            loss: field(4).parse().map_err(|_| parse_err("loss"))?,
            test_accuracy: match field(5) {
                "" => None,
                s => Some(s.parse().map_err(|_| parse_err("test_accuracy"))?),
            },
        });
    }
    Ok(RunTrace { rows })
}

/// Writes the selection log `round,chosen_x,score,labeled_size,evaluations`.
pub fn write_selections_csv(
    path: &Path,
    rounds: &[crate::active_learning::SelectionRound],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_to_err(path, e))?;
    w.write_record(["round", "chosen_x", "score", "labeled_size", "evaluations"])
        .map_err(|e| csv_to_err(path, e))?;
    for r in rounds {
        w.write_record([
            r.round_index.to_string(),
            r.chosen_x.to_string(),
            r.score.to_string(),
            r.labeled_size_after.to_string(),
            r.evaluations_spent.to_string(),
        ])
        .map_err(|e| csv_to_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `step,x,theta1,theta2,leg_cost` for a rotation schedule; `theta2`
/// is empty for single-stage circuits.
pub fn write_schedule_csv(path: &Path, schedule: &Schedule) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_to_err(path, e))?;
    w.write_record(["step", "x", "theta1", "theta2", "leg_cost"])
        .map_err(|e| csv_to_err(path, e))?;
    for (i, (p, leg)) in schedule.points.iter().zip(&schedule.leg_costs).enumerate() {
        w.write_record([
            i.to_string(),
            p.x.to_string(),
            p.theta1.to_string(),
            p.theta2.map(|t| t.to_string()).unwrap_or_default(),
            leg.to_string(),
        ])
        .map_err(|e| csv_to_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One labeled row of `ratios.csv`.
#[derive(Clone, Debug)]
pub struct RatioLine {
    pub classifier: String,
    pub pattern: u8,
    pub strategy: String,
    pub row: CostRatioRow,
}

/// Writes the cost-ratio table; unmatched arms leave their ratio cells empty
/// and carry `matched = false`.
pub fn write_ratios_csv(path: &Path, lines: &[RatioLine]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_to_err(path, e))?;
    w.write_record([
        "classifier",
        "pattern",
        "strategy",
        "labeling_ratio",
        "computation_ratio",
        "matched",
        "match_evaluations",
        "labels_at_match",
        "target_accuracy",
    ])
    .map_err(|e| csv_to_err(path, e))?;
    for line in lines {
        let r = &line.row;
        w.write_record([
            line.classifier.clone(),
            line.pattern.to_string(),
            line.strategy.clone(),
            r.labeling_ratio.map(|v| v.to_string()).unwrap_or_default(),
            r.computation_ratio.map(|v| v.to_string()).unwrap_or_default(),
            r.matched.to_string(),
            r.match_evaluations.map(|v| v.to_string()).unwrap_or_default(),
            r.labels_at_match.map(|v| v.to_string()).unwrap_or_default(),
            r.target_accuracy.to_string(),
        ])
        .map_err(|e| csv_to_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A labeled aggregate curve for the chart.
pub struct NamedCurve<'a> {
    pub label: String,
    pub evaluations: &'a [u64],
    pub mean: &'a [f64],
    pub std: &'a [f64],
}

const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#ff7f0e", "#d62728", "#9467bd", "#8c564b"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders accuracy-versus-evaluations curves with one-sigma bands as a
/// standalone SVG document.
pub fn render_curves_svg(title: &str, curves: &[NamedCurve<'_>]) -> String {
    let (w, h) = (640.0, 420.0);
    let (ml, mr, mt, mb) = (62.0, 16.0, 34.0, 46.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let max_x = curves
        .iter()
        .flat_map(|c| c.evaluations.iter().copied())
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let min_y = curves
        .iter()
        .flat_map(|c| c.mean.iter().zip(c.std).map(|(m, s)| m - s))
        .fold(1.0f64, f64::min)
        .clamp(0.0, 0.95);
    let y_lo = (min_y - 0.05).max(0.0);
    let sx = |e: f64| ml + pw * e / max_x;
    let sy = |a: f64| mt + ph * (1.0 - (a - y_lo) / (1.0 - y_lo).max(1e-9));

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        ml + pw / 2.0,
        esc(title)
    )
    .unwrap();

    // Axes and ticks.
    writeln!(
        svg,
        r#"<line x1="{ml}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        mt + ph,
        ml + pw,
        mt + ph
    )
    .unwrap();
    writeln!(svg, r#"<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{}" stroke="black"/>"#, mt + ph).unwrap();
    for i in 0..=5 {
        let e = max_x * i as f64 / 5.0;
        let x = sx(e);
        writeln!(svg, r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/>"#, mt + ph, mt + ph + 4.0).unwrap();
        writeln!(
            svg,
            r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            mt + ph + 17.0,
            e.round() as u64
        )
        .unwrap();
        let a = y_lo + (1.0 - y_lo) * i as f64 / 5.0;
        let y = sy(a);
        writeln!(svg, r#"<line x1="{}" y1="{y}" x2="{ml}" y2="{y}" stroke="black"/>"#, ml - 4.0).unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{a:.2}</text>"#,
            ml - 7.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">evaluations</text>"#,
        ml + pw / 2.0,
        h - 10.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">test accuracy</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0
    )
    .unwrap();

    for (ci, c) in curves.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        if c.evaluations.is_empty() {
            continue;
        }
        // Standard-deviation band: upper edge forward, lower edge back.
        let mut band = String::new();
        for (i, &e) in c.evaluations.iter().enumerate() {
            write!(band, "{:.2},{:.2} ", sx(e as f64), sy((c.mean[i] + c.std[i]).min(1.0))).unwrap();
        }
        for (i, &e) in c.evaluations.iter().enumerate().rev() {
            write!(band, "{:.2},{:.2} ", sx(e as f64), sy((c.mean[i] - c.std[i]).max(y_lo))).unwrap();
        }
        writeln!(
            svg,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            band.trim_end()
        )
        .unwrap();
        let mut line = String::new();
        for (i, &e) in c.evaluations.iter().enumerate() {
            write!(line, "{:.2},{:.2} ", sx(e as f64), sy(c.mean[i])).unwrap();
        }
        writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            line.trim_end()
        )
        .unwrap();
        // Legend.
        let ly = mt + 14.0 + 16.0 * ci as f64;
        writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/>"#,
            ml + 10.0,
            ml + 34.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            ml + 40.0,
            ly + 4.0,
            esc(&c.label)
        )
        .unwrap();
    }
    writeln!(svg, "</svg>").unwrap();
    svg
}

/// Writes a suite's standard file set into `out_dir`: `trace_s<i>.csv` (plus
/// `selections_s<i>.csv` for selection runs), `aggregate.csv`, `curves.svg`,
/// and `config.echo`. Returns the created paths.
pub fn emit_outputs(suite: &SuiteResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    for run in &suite.runs {
        let path = out_dir.join(format!("trace_s{}.csv", run.seed_index));
        write_trace_csv(&path, &run.trace)?;
        written.push(path);
        if !run.selections.is_empty() {
            let path = out_dir.join(format!("selections_s{}.csv", run.seed_index));
            write_selections_csv(&path, &run.selections)?;
            written.push(path);
        }
    }

    let agg_path = out_dir.join("aggregate.csv");
    {
        let mut w = csv::Writer::from_path(&agg_path).map_err(|e| csv_to_err(&agg_path, e))?;
        w.write_record(["evaluations", "mean_accuracy", "std_accuracy"])
            .map_err(|e| csv_to_err(&agg_path, e))?;
        for (i, &e) in suite.curve.evaluations.iter().enumerate() {
            w.write_record([
                e.to_string(),
                suite.curve.mean_accuracy[i].to_string(),
                suite.curve.std_accuracy[i].to_string(),
            ])
            .map_err(|e| csv_to_err(&agg_path, e))?;
        }
        w.flush().map_err(|e| Error::io(&agg_path, e))?;
    }
    written.push(agg_path);

    let svg_path = out_dir.join("curves.svg");
    let curve = NamedCurve {
        label: suite.config.label(),
        evaluations: &suite.curve.evaluations,
        mean: &suite.curve.mean_accuracy,
        std: &suite.curve.std_accuracy,
    };
    std::fs::write(&svg_path, render_curves_svg(&suite.config.label(), &[curve]))
        .map_err(|e| Error::io(&svg_path, e))?;
    written.push(svg_path);

    let echo_path = out_dir.join("config.echo");
    std::fs::write(&echo_path, suite.config.echo(suite.master_seed))
        .map_err(|e| Error::io(&echo_path, e))?;
    written.push(echo_path);

    Ok(written)
}
