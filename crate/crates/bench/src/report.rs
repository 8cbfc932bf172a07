//! Report and plot-data emission.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{BenchError, Result};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub seed: Option<u64>,
    pub mae: Option<f64>,
    pub mse: Option<f64>,
    pub seconds: f64,
    #[serde(default)]
    pub hyper: String,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "md",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(BenchError::Usage(format!(
                "unknown report format '{other}'"
            ))),
        }
    }
}

/// MAE×10² and MSE×10⁴, the display scaling used for small-valued series.
pub fn apply_scale_note(rows: &[ReportRow]) -> Vec<ReportRow> {
    rows.iter()
        .map(|r| ReportRow {
            mae: r.mae.map(|v| v * 1e2),
            mse: r.mse.map(|v| v * 1e4),
            ..r.clone()
        })
        .collect()
}

pub fn render(rows: &[ReportRow], format: ReportFormat, scale_note: bool) -> Result<String> {
    if rows.is_empty() {
        return Err(BenchError::Usage("no report rows to emit".into()));
    }
    let rows = if scale_note {
        apply_scale_note(rows)
    } else {
        rows.to_vec()
    };
    Ok(match format {
        ReportFormat::Csv => render_csv(&rows)?,
        ReportFormat::Json => render_json(&rows)?,
        ReportFormat::Markdown => render_markdown(&rows, scale_note),
    })
}

pub fn emit_report(
    rows: &[ReportRow],
    format: ReportFormat,
    path: &Path,
    scale_note: bool,
) -> Result<()> {
    std::fs::write(path, render(rows, format, scale_note)?)?;
    Ok(())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Columns `model,seed,mae,mse,seconds`; failed rows have blank errors.
pub fn render_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| BenchError::Io(std::io::Error::other(e));
    w.write_record(["model", "seed", "mae", "mse", "seconds"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            opt(r.seed),
            opt(r.mae),
            opt(r.mse),
            r.seconds.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| BenchError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// An array whose first element is `{"schema_version": 1}` followed by rows.
pub fn render_json(rows: &[ReportRow]) -> Result<String> {
    let mut items = vec![serde_json::json!({ "schema_version": SCHEMA_VERSION })];
    for r in rows {
        items.push(serde_json::to_value(r).map_err(|e| BenchError::Data(e.to_string()))?);
    }
    let mut out =
        serde_json::to_string_pretty(&items).map_err(|e| BenchError::Data(e.to_string()))?;
    out.push('\n');
    Ok(out)
}

pub fn parse_json(text: &str) -> Result<Vec<ReportRow>> {
    let bad = |m: String| BenchError::Data(format!("report: {m}"));
    let items: Vec<Value> = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let (head, rows) = items
        .split_first()
        .ok_or_else(|| bad("empty array".into()))?;
    match head.get("schema_version").and_then(Value::as_u64) {
        Some(SCHEMA_VERSION) => {}
        other => return Err(bad(format!("unsupported schema version {other:?}"))),
    }
    rows.iter()
        .map(|v| serde_json::from_value(v.clone()).map_err(|e| bad(e.to_string())))
        .collect()
}

fn section_of(model: &str) -> &'static str {
    if model.starts_with("SFANN") {
        "SFANN models"
    } else if model.starts_with("SEANN") {
        "SEANN models"
    } else {
        "Baselines"
    }
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.2}"))
}

/// One table per model family with per-model medians and minima over seeds.
pub fn render_markdown(rows: &[ReportRow], scale_note: bool) -> String {
    let mut out = String::from("# Forecast accuracy\n");
    if scale_note {
        out.push_str("\nMAE is shown ×10² and MSE ×10⁴.\n");
    }
    for section in ["Baselines", "SFANN models", "SEANN models"] {
        let mut models: Vec<&str> = Vec::new();
        for r in rows.iter().filter(|r| section_of(&r.model) == section) {
            if !models.contains(&r.model.as_str()) {
                models.push(&r.model);
            }
        }
        if models.is_empty() {
            continue;
        }
        let _ = write!(
            out,
            "\n## {section}\n\n| Model | Runs | Median MAE | Median MSE | Best MAE | Best MSE |\n|---|---|---|---|---|---|\n"
        );
        for m in models {
            let mine: Vec<&ReportRow> = rows.iter().filter(|r| r.model == m).collect();
            let mut mae: Vec<f64> = mine.iter().filter_map(|r| r.mae).collect();
            let mut mse: Vec<f64> = mine.iter().filter_map(|r| r.mse).collect();
            let best_mae = mae.iter().copied().reduce(f64::min);
            let best_mse = mse.iter().copied().reduce(f64::min);
            let failed = mine.iter().filter(|r| r.error.is_some()).count();
            let runs = if failed > 0 {
                format!("{} ({failed} failed)", mine.len())
            } else {
                mine.len().to_string()
            };
            let _ = writeln!(
                out,
                "| {m} | {runs} | {} | {} | {} | {} |",
                cell(median(&mut mae)),
                cell(median(&mut mse)),
                cell(best_mae),
                cell(best_mse)
            );
        }
    }
    out
}

/// Columns `t,actual,forecast`; the forecast starts at index `n_train` and is
/// blank elsewhere.
pub fn render_plot_data(series: &[f64], n_train: usize, forecast: &[f64]) -> Result<String> {
    if n_train > series.len() || forecast.len() > series.len() - n_train {
        return Err(BenchError::Usage(format!(
            "forecast of length {} does not fit the test range of length {}",
            forecast.len(),
            series.len().saturating_sub(n_train)
        )));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| BenchError::Io(std::io::Error::other(e));
    w.write_record(["t", "actual", "forecast"])
        .map_err(csv_err)?;
    for (t, y) in series.iter().enumerate() {
        let f = t
            .checked_sub(n_train)
            .and_then(|k| forecast.get(k))
            .copied();
        w.write_record([t.to_string(), y.to_string(), opt(f)])
            .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| BenchError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_plot_data(series: &[f64], n_train: usize, forecast: &[f64], path: &Path) -> Result<()> {
    std::fs::write(path, render_plot_data(series, n_train, forecast)?)?;
    Ok(())
}
