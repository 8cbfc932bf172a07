//! Element-wise combination of several forecasts of the same horizon.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Combination {
    Average,
    Median,
}

/// Labelled forecasts, all of one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSet {
    labels: Vec<String>,
    forecasts: Vec<Vec<f64>>,
}

impl ForecastSet {
    pub fn new(members: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if members.is_empty() {
            return Err(invalid("a forecast set needs at least one member"));
        }
        let horizon = members[0].1.len();
        let mut labels: Vec<String> = Vec::with_capacity(members.len());
        let mut forecasts = Vec::with_capacity(members.len());
        for (label, f) in members {
            if f.len() != horizon {
                return Err(invalid(format!(
                    "forecast '{label}' has length {}, expected {horizon}",
                    f.len()
                )));
            }
            if labels.contains(&label) {
                return Err(invalid(format!("duplicate label '{label}'")));
            }
            labels.push(label);
            forecasts.push(f);
        }
        Ok(Self { labels, forecasts })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn forecasts(&self) -> &[Vec<f64>] {
        &self.forecasts
    }

    pub fn horizon(&self) -> usize {
        self.forecasts[0].len()
    }

    pub fn len(&self) -> usize {
        self.forecasts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forecasts.is_empty()
    }
}

pub fn combine(set: &ForecastSet, method: Combination) -> Vec<f64> {
    (0..set.horizon())
        .map(|t| {
            let mut col: Vec<f64> = set.forecasts.iter().map(|f| f[t]).collect();
            match method {
                Combination::Average => col.iter().sum::<f64>() / col.len() as f64,
                Combination::Median => {
                    col.sort_by(f64::total_cmp);
                    let m = col.len() / 2;
                    if col.len() % 2 == 1 {
                        col[m]
                    } else {
                        (col[m - 1] + col[m]) / 2.0
                    }
                }
            }
        })
        .collect()
}

/// Builds a set from unlabelled forecasts and combines it.
pub fn combine_forecasts(forecasts: &[Vec<f64>], method: Combination) -> Result<Vec<f64>> {
    let members = forecasts
        .iter()
        .enumerate()
        .map(|(i, f)| (format!("m{i}"), f.clone()))
        .collect();
    Ok(combine(&ForecastSet::new(members)?, method))
}
