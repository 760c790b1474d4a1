//! CSV, JSON, and SVG output for experiment results.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{config, BanditError, Result};

use super::experiment::ExperimentResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Csv, Format::Json, Format::Svg];

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

fn non_empty(result: &ExperimentResult) -> Result<()> {
    if result.policies.is_empty() {
        return Err(config("result has no policies to export"));
    }
    Ok(())
}

/// One row per round and policy, rounds outermost.
pub fn to_csv(result: &ExperimentResult) -> Result<String> {
    non_empty(result)?;
    let mut out = String::from("round,policy,mean_regret,stderr\n");
    let rounds = result.policies[0].mean_regret.len();
    for t in 0..rounds {
        for p in &result.policies {
            writeln!(
                out,
                "{},{},{},{}",
                t + 1,
                p.name,
                p.mean_regret[t],
                p.stderr[t]
            )
            .expect("string write");
        }
    }
    Ok(out)
}

pub fn to_json(result: &ExperimentResult) -> Result<String> {
    non_empty(result)?;
    serde_json::to_string_pretty(result).map_err(|e| BanditError::Parse(e.to_string()))
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Mean regret curves with a shaded ±2 standard-error band.
pub fn to_svg(result: &ExperimentResult) -> Result<String> {
    non_empty(result)?;
    let (w, h) = (800.0, 500.0);
    let (left, right, top, bottom) = (70.0, 170.0, 30.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let rounds = result.policies[0].mean_regret.len().max(1);
    let y_max = result
        .policies
        .iter()
        .flat_map(|p| {
            p.mean_regret
                .iter()
                .zip(&p.stderr)
                .map(|(m, s)| m + 2.0 * s)
        })
        .fold(0.0f64, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    let sx = |t: usize| left + pw * t as f64 / rounds as f64;
    let sy = |v: f64| top + ph * (1.0 - v / y_max);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        left + pw / 2.0,
        escape(&result.config.experiment.name)
    )
    .unwrap();

    // Axes and ticks.
    writeln!(
        s,
        r#"<path d="M{left} {top} V{} H{}" stroke="black" fill="none"/>"#,
        top + ph,
        left + pw
    )
    .unwrap();
    for i in 0..=5 {
        let t = rounds * i / 5;
        let x = sx(t);
        writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{t}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 18.0
        )
        .unwrap();
        let v = y_max * i as f64 / 5.0;
        let y = sy(v);
        writeln!(
            s,
            r#"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0,
            tick_label(v)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">round</text>"#,
        left + pw / 2.0,
        h - 15.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">cumulative regret</text>"#,
        top + ph / 2.0
    )
    .unwrap();

    for (i, p) in result.policies.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let upper = p
            .mean_regret
            .iter()
            .zip(&p.stderr)
            .enumerate()
            .map(|(t, (m, e))| (sx(t + 1), sy(m + 2.0 * e)));
        let lower: Vec<_> = p
            .mean_regret
            .iter()
            .zip(&p.stderr)
            .enumerate()
            .map(|(t, (m, e))| (sx(t + 1), sy((m - 2.0 * e).max(0.0))))
            .collect();
        let band: Vec<String> = upper
            .chain(lower.into_iter().rev())
            .map(|(x, y)| format!("{x:.2},{y:.2}"))
            .collect();
        writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            band.join(" ")
        )
        .unwrap();
        let line: Vec<String> = p
            .mean_regret
            .iter()
            .enumerate()
            .map(|(t, m)| format!("{:.2},{:.2}", sx(t + 1), sy(*m)))
            .collect();
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            line.join(" ")
        )
        .unwrap();
        let ly = top + 10.0 + 20.0 * i as f64;
        let lx = left + pw + 15.0;
        writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&p.name)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick_label(v: f64) -> String {
    if v >= 100.0 {
        format!("{v:.0}")
    } else if v >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn render(result: &ExperimentResult, format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(result),
        Format::Json => to_json(result),
        Format::Svg => to_svg(result),
    }
}

/// Writes `<stem>.csv`, `<stem>.json`, and `<stem>.svg` into `dir`, creating
/// it if needed. Returns the written paths.
pub fn write_all(result: &ExperimentResult, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| BanditError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    Format::ALL
        .iter()
        .map(|&f| {
            let path = dir.join(format!("{stem}.{}", f.extension()));
            let body = render(result, f)?;
            fs::write(&path, body).map_err(|source| BanditError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(path)
        })
        .collect()
}
