use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Method;
use super::run::{CellResult, ExperimentResult, SummaryRow};
use crate::error::{domain, Result};

pub const RESULTS_FILE: &str = "results.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PLOT_FILE: &str = "error_vs_m.svg";

const RESULT_HEADER: &[&str] = &["method", "m", "seed", "m0", "n0", "sigma", "lambda_reg", "error_pct", "failure"];
const TIMING_HEADER: &[&str] = &["method", "m", "seed", "preprocess_s", "train_s", "test_s"];
const SUMMARY_HEADER: &[&str] = &[
    "method",
    "m",
    "n_seeds",
    "mean_error",
    "std_error",
    "mean_preprocess_s",
    "mean_train_s",
    "mean_test_s",
];

#[derive(Debug, Serialize, Deserialize)]
struct ResultRecord {
    method: Method,
    m: usize,
    seed: u64,
    m0: usize,
    n0: usize,
    sigma: Option<f64>,
    lambda_reg: Option<f64>,
    error_pct: Option<f64>,
    failure: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct TimingRecord {
    method: Method,
    m: usize,
    seed: u64,
    preprocess_s: f64,
    train_s: f64,
    test_s: f64,
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `results.csv`, `timings.csv`, `summary.csv` and, when there is
/// anything to draw, `error_vs_m.svg`. Returns the paths written.
pub fn emit_results(res: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let results = dir.join(RESULTS_FILE);
    write_csv(
        &results,
        RESULT_HEADER,
        res.rows.iter().map(|r| ResultRecord {
            method: r.method,
            m: r.m,
            seed: r.seed,
            m0: r.m0,
            n0: r.n0,
            sigma: r.sigma,
            lambda_reg: r.lambda_reg,
            error_pct: r.error_pct,
            failure: r.failure.clone(),
        }),
    )?;
    written.push(results);

    let timings = dir.join(TIMINGS_FILE);
    write_csv(
        &timings,
        TIMING_HEADER,
        res.rows.iter().map(|r| TimingRecord {
            method: r.method,
            m: r.m,
            seed: r.seed,
            preprocess_s: r.preprocess_s,
            train_s: r.train_s,
            test_s: r.test_s,
        }),
    )?;
    written.push(timings);

    let summary = res.summary();
    let summary_path = dir.join(SUMMARY_FILE);
    write_csv(&summary_path, SUMMARY_HEADER, summary.iter())?;
    written.push(summary_path);

    if !summary.is_empty() {
        let svg = dir.join(PLOT_FILE);
        fs::write(&svg, render_svg(&summary))?;
        written.push(svg);
    }
    Ok(written)
}

/// Reads back what [`emit_results`] wrote.
pub fn read_results(dir: &Path) -> Result<ExperimentResult> {
    let mut results = csv::Reader::from_path(dir.join(RESULTS_FILE))?;
    let records: Vec<ResultRecord> = results.deserialize().collect::<std::result::Result<_, _>>()?;
    let timings_path = dir.join(TIMINGS_FILE);
    let timings: Vec<TimingRecord> = if timings_path.exists() {
        csv::Reader::from_path(timings_path)?
            .deserialize()
            .collect::<std::result::Result<_, _>>()?
    } else {
        Vec::new()
    };
    if !timings.is_empty() && timings.len() != records.len() {
        return domain(format!(
            "{} has {} rows but {} has {}",
            RESULTS_FILE,
            records.len(),
            TIMINGS_FILE,
            timings.len()
        ));
    }
    let rows = records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let t = timings.get(i);
            if let Some(t) = t {
                if (t.method, t.m, t.seed) != (r.method, r.m, r.seed) {
                    return domain(format!("row {} of {} does not match {}", i + 1, TIMINGS_FILE, RESULTS_FILE));
                }
            }
            Ok(CellResult {
                method: r.method,
                m: r.m,
                seed: r.seed,
                m0: r.m0,
                n0: r.n0,
                sigma: r.sigma,
                lambda_reg: r.lambda_reg,
                error_pct: r.error_pct,
                failure: r.failure,
                preprocess_s: t.map_or(0.0, |t| t.preprocess_s),
                train_s: t.map_or(0.0, |t| t.train_s),
                test_s: t.map_or(0.0, |t| t.test_s),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult { rows })
}

/// Re-draws the SVG from an existing `results.csv`.
pub fn replot(dir: &Path) -> Result<Option<PathBuf>> {
    let summary = read_results(dir)?.summary();
    if summary.is_empty() {
        return Ok(None);
    }
    let path = dir.join(PLOT_FILE);
    fs::write(&path, render_svg(&summary))?;
    Ok(Some(path))
}

const COLOURS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Mean test error against M, one polyline per method.
pub fn render_svg(summary: &[SummaryRow]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 130.0, 30.0, 50.0);
    let m_min = summary.iter().map(|s| s.m).min().unwrap_or(0) as f64;
    let m_max = summary.iter().map(|s| s.m).max().unwrap_or(1) as f64;
    let e_min = summary.iter().map(|s| s.mean_error).fold(f64::INFINITY, f64::min);
    let e_max = summary.iter().map(|s| s.mean_error).fold(f64::NEG_INFINITY, f64::max);
    let pad = ((e_max - e_min) * 0.1).max(0.5);
    let (lo, hi) = (e_min - pad, e_max + pad);
    let px = |m: f64| {
        if m_max > m_min {
            left + (m - m_min) / (m_max - m_min) * (w - left - right)
        } else {
            left + 0.5 * (w - left - right)
        }
    };
    let py = |e: f64| top + (hi - e) / (hi - lo) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{y}" x2="{x}" y2="{y}" stroke="black"/><line x1="{left}" y1="{top}" x2="{left}" y2="{y}" stroke="black"/>"#,
        y = h - bottom,
        x = w - right
    );
    for i in 0..=4 {
        let e = lo + (hi - lo) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{e:.2}</text>"#,
            left - 6.0,
            py(e) + 4.0
        );
    }
    let mut ms: Vec<usize> = summary.iter().map(|r| r.m).collect();
    ms.sort_unstable();
    ms.dedup();
    for m in &ms {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{m}</text>"#,
            px(*m as f64),
            h - bottom + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">M</text>"#,
        left + 0.5 * (w - left - right),
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">test error (%)</text>"#,
        top + 0.5 * (h - top - bottom),
        top + 0.5 * (h - top - bottom)
    );

    let mut methods: Vec<Method> = Vec::new();
    for r in summary {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    for (i, method) in methods.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let mut pts: Vec<&SummaryRow> = summary.iter().filter(|r| r.method == *method).collect();
        pts.sort_by_key(|r| r.m);
        let coords: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.m as f64), py(r.mean_error)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-method="{}" fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            method.as_str(),
            coords.join(" ")
        );
        for r in &pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#,
                px(r.m as f64),
                py(r.mean_error)
            );
        }
        let ly = top + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{x0}" y1="{ly}" x2="{x1}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{tx}" y="{ty}">{}</text>"#,
            method.as_str().to_uppercase(),
            x0 = w - right + 15.0,
            x1 = w - right + 40.0,
            tx = w - right + 46.0,
            ty = ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
