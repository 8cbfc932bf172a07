//! Experiment configuration: model labels and the config file formats.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use forecast_lab::ensemble::Combination;
use forecast_lab::pso::PsoVariant;
use forecast_lab::PatternLayout;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{BenchError, Result};

/// Environment variable holding a comma-separated default seed list.
pub const SEED_ENV: &str = "FORECAST_LAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Sfann,
    Seann,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Sfann => "SFANN",
            Family::Seann => "SEANN",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PsoPreset {
    TreleaI,
    TreleaII,
    Clerc,
}

impl PsoPreset {
    pub const ALL: [PsoPreset; 3] = [PsoPreset::TreleaI, PsoPreset::TreleaII, PsoPreset::Clerc];

    pub fn variant(self) -> PsoVariant {
        match self {
            PsoPreset::TreleaI => PsoVariant::TRELEA_I,
            PsoPreset::TreleaII => PsoVariant::TRELEA_II,
            PsoPreset::Clerc => PsoVariant::CLERC,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            PsoPreset::TreleaI => "T1",
            PsoPreset::TreleaII => "T2",
            PsoPreset::Clerc => "Clerc",
        }
    }
}

/// One row family of the model matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Sarima,
    HoltWinters,
    Svr,
    /// Levenberg–Marquardt for SFANN, gradient descent with momentum for SEANN.
    Bp(Family),
    Pso(Family, PsoPreset),
    /// Element-wise combination of the family's three PSO forecasts.
    Combined(Family, Combination),
}

impl Model {
    pub fn label(&self) -> String {
        match self {
            Model::Sarima => "SARIMA".into(),
            Model::HoltWinters => "HW".into(),
            Model::Svr => "SVR".into(),
            Model::Bp(f) => format!("{}-BP", f.label()),
            Model::Pso(f, p) => format!("{}-PSO-{}", f.label(), p.suffix()),
            Model::Combined(f, Combination::Average) => format!("{}-PSO-Average", f.label()),
            Model::Combined(f, Combination::Median) => format!("{}-PSO-Median", f.label()),
        }
    }

    /// SARIMA, Holt-Winters and SVR do not depend on a seed.
    pub fn is_seeded(&self) -> bool {
        !matches!(self, Model::Sarima | Model::HoltWinters | Model::Svr)
    }

    pub fn family(&self) -> Option<Family> {
        match self {
            Model::Bp(f) | Model::Pso(f, _) | Model::Combined(f, _) => Some(*f),
            _ => None,
        }
    }

    /// Every individual model and combination, in report order.
    pub fn all() -> Vec<Model> {
        let mut out = vec![Model::Sarima, Model::HoltWinters, Model::Svr];
        for f in [Family::Sfann, Family::Seann] {
            out.push(Model::Bp(f));
            out.extend(PsoPreset::ALL.map(|p| Model::Pso(f, p)));
            out.push(Model::Combined(f, Combination::Average));
            out.push(Model::Combined(f, Combination::Median));
        }
        out
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Model {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('_', "-");
        let alias = match key.as_str() {
            "HOLT-WINTERS" | "HOLTWINTERS" => "HW",
            k => k,
        };
        Model::all()
            .into_iter()
            .find(|m| m.label().to_ascii_uppercase() == alias)
            .ok_or_else(|| BenchError::Usage(format!("unknown model '{}'", s.trim())))
    }
}

/// Expands a model list. `PSO-Average` and `PSO-Median` apply to every
/// family whose three PSO variants are listed; `SFANN-PSO` / `SEANN-PSO`
/// stand for the triple and `all` for the full matrix.
pub fn parse_models(tokens: &[String]) -> Result<Vec<Model>> {
    let mut models: Vec<Model> = Vec::new();
    let mut pending = Vec::new();
    let push = |m: Model, models: &mut Vec<Model>| {
        if !models.contains(&m) {
            models.push(m);
        }
    };
    for token in tokens {
        let t = token.trim().to_ascii_uppercase();
        match t.as_str() {
            "" => continue,
            "ALL" => Model::all().into_iter().for_each(|m| push(m, &mut models)),
            "SFANN-PSO" | "SEANN-PSO" => {
                let f = if t.starts_with("SF") {
                    Family::Sfann
                } else {
                    Family::Seann
                };
                PsoPreset::ALL
                    .iter()
                    .for_each(|p| push(Model::Pso(f, *p), &mut models));
            }
            "PSO-AVERAGE" => pending.push(Combination::Average),
            "PSO-MEDIAN" => pending.push(Combination::Median),
            _ => push(token.parse()?, &mut models),
        }
    }
    for c in pending {
        let families: Vec<Family> = [Family::Sfann, Family::Seann]
            .into_iter()
            .filter(|f| {
                PsoPreset::ALL
                    .iter()
                    .all(|p| models.contains(&Model::Pso(*f, *p)))
            })
            .collect();
        if families.is_empty() {
            return Err(BenchError::Usage(
                "PSO-Average/PSO-Median need all three PSO variants of a network family".into(),
            ));
        }
        for f in families {
            push(Model::Combined(f, c), &mut models);
        }
    }
    for m in &models {
        if let Model::Combined(f, _) = m {
            if !PsoPreset::ALL
                .iter()
                .all(|p| models.contains(&Model::Pso(*f, *p)))
            {
                return Err(BenchError::Usage(format!(
                    "{m} needs all three {}-PSO variants",
                    f.label()
                )));
            }
        }
    }
    if models.is_empty() {
        return Err(BenchError::Usage("model list is empty".into()));
    }
    Ok(models)
}

/// Parses `1,2,3` or `1..5` (inclusive).
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || BenchError::Usage(format!("invalid seed list '{text}'"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            );
            if a > b {
                return Err(bad());
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(part.parse().map_err(|_| bad())?);
        }
    }
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

/// Seeds 1..5, or the list in `FORECAST_LAB_SEED` when set.
pub fn default_seeds() -> Result<Vec<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) if !v.trim().is_empty() => parse_seeds(&v),
        _ => Ok((1..=5).collect()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// `airline` or a CSV path.
    pub dataset: String,
    pub n_train: Option<usize>,
    pub period: Option<usize>,
    pub models: Vec<Model>,
    pub seeds: Vec<u64>,
    pub layout: PatternLayout,
    /// Hidden-node candidates for the SFANN BIC search.
    pub hidden: Vec<usize>,
    pub max_epochs: usize,
    pub patience: usize,
    pub pso_max_iter: usize,
    pub swarm_size: usize,
    pub svr_epsilon: f64,
    pub single_thread: bool,
    /// Write measured wall time; otherwise `seconds` is 0 so reports are reproducible.
    pub record_timing: bool,
    /// Display MAE×10² and MSE×10⁴.
    pub scale_note: bool,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(dataset: impl Into<String>, models: Vec<Model>) -> Result<Self> {
        Ok(Self {
            dataset: dataset.into(),
            n_train: None,
            period: None,
            models,
            seeds: default_seeds()?,
            layout: PatternLayout::SeasonAligned,
            hidden: (1..=5).collect(),
            max_epochs: 1000,
            patience: 6,
            pso_max_iter: 500,
            swarm_size: 24,
            svr_epsilon: 0.01,
            single_thread: false,
            record_timing: false,
            scale_note: false,
            output_dir: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: &str| Err(BenchError::Usage(m.into()));
        if self.models.is_empty() {
            return usage("model list is empty");
        }
        if self.seeds.is_empty() {
            return usage("seed list is empty");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return usage("hidden-node candidates must be positive");
        }
        if self.max_epochs == 0 && self.pso_max_iter == 0 {
            return usage("training budgets are both zero");
        }
        if self.patience == 0 || self.swarm_size == 0 {
            return usage("patience and swarm_size must be positive");
        }
        if !(self.svr_epsilon >= 0.0) {
            return usage("svr_epsilon must be nonnegative");
        }
        Ok(())
    }

    /// Reads a JSON object (if the text starts with `{`) or `key = value` lines.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            BenchError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| BenchError::Usage(format!("config: {e}")))?
        } else {
            serde_json::from_value(Value::Object(key_values(text)?))
                .map_err(|e| BenchError::Usage(format!("config: {e}")))?
        };
        raw.resolve()
    }
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dataset: Option<String>,
    n_train: Option<usize>,
    period: Option<usize>,
    models: Option<Vec<String>>,
    seeds: Option<Vec<u64>>,
    layout: Option<String>,
    hidden: Option<Vec<usize>>,
    max_epochs: Option<usize>,
    patience: Option<usize>,
    pso_max_iter: Option<usize>,
    swarm_size: Option<usize>,
    svr_epsilon: Option<f64>,
    single_thread: Option<bool>,
    record_timing: Option<bool>,
    scale_note: Option<bool>,
    output_dir: Option<PathBuf>,
}

impl RawConfig {
    fn resolve(self) -> Result<ExperimentConfig> {
        let dataset = self.dataset.unwrap_or_else(|| "airline".into());
        let models = match self.models {
            Some(m) => parse_models(&m)?,
            None => Model::all(),
        };
        let mut c = ExperimentConfig::new(dataset, models)?;
        c.n_train = self.n_train;
        c.period = self.period;
        if let Some(s) = self.seeds {
            c.seeds = s;
        }
        if let Some(l) = self.layout {
            c.layout = match l.to_ascii_lowercase().as_str() {
                "sliding" => PatternLayout::Sliding,
                "season" | "season_aligned" | "seasonaligned" => PatternLayout::SeasonAligned,
                other => return Err(BenchError::Usage(format!("unknown layout '{other}'"))),
            };
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(
            hidden,
            max_epochs,
            patience,
            pso_max_iter,
            swarm_size,
            svr_epsilon,
            single_thread,
            record_timing,
            scale_note
        );
        c.output_dir = self.output_dir;
        c.validate()?;
        Ok(c)
    }
}

const LIST_KEYS: [&str; 3] = ["models", "seeds", "hidden"];

fn key_values(text: &str) -> Result<Map<String, Value>> {
    let mut map = Map::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            BenchError::Usage(format!("config line {}: expected key = value", i + 1))
        })?;
        let (k, v) = (k.trim(), v.trim());
        let value = if k == "seeds" {
            Value::Array(parse_seeds(v)?.into_iter().map(Value::from).collect())
        } else if LIST_KEYS.contains(&k) {
            Value::Array(v.split(',').map(|x| scalar(x.trim())).collect())
        } else if k == "dataset" || k == "output_dir" || k == "layout" {
            Value::String(v.to_string())
        } else {
            scalar(v)
        };
        if map.insert(k.to_string(), value).is_some() {
            return Err(BenchError::Usage(format!(
                "config line {}: duplicate key '{k}'",
                i + 1
            )));
        }
    }
    Ok(map)
}

fn scalar(v: &str) -> Value {
    if let Ok(b) = v.parse::<bool>() {
        Value::Bool(b)
    } else if let Ok(n) = v.parse::<u64>() {
        Value::from(n)
    } else if let Ok(x) = v.parse::<f64>() {
        Value::from(x)
    } else {
        Value::String(v.to_string())
    }
}
