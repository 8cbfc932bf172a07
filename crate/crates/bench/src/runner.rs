//! Runs the model matrix over one dataset split.

use std::time::Instant;

use forecast_lab::ann::{
    build_patterns_with, forecast_iterated_with, select_hidden_nodes, HiddenSelection,
};
use forecast_lab::bp::{train_gdx, train_lm, TrainOptions};
use forecast_lab::ensemble::{combine, ForecastSet};
use forecast_lab::pso::{train_pso, PsoOptions};
use forecast_lab::series::evaluate;
use forecast_lab::stats::{fit_hw, fit_sarima, forecast_sarima};
use forecast_lab::svr::{embed, forecast_svr, grid_search, solve_dual, SvrGrid};
use forecast_lab::{ErrorMetrics, NormalizationMap, PatternSet, SannTopology};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Family, Model};
use crate::data::load_dataset;
use crate::error::{BenchError, Result};
use crate::report::ReportRow;

/// Outcome of one (model, seed) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRun {
    pub model: Model,
    /// `None` for models that do not use a seed.
    pub seed: Option<u64>,
    /// Test-horizon forecast in the original scale.
    pub forecast: Option<Vec<f64>>,
    pub metrics: Option<ErrorMetrics>,
    pub seconds: f64,
    pub hyper: String,
    /// Everything the fit produced, flattened. Empty for combinations.
    pub params: Vec<f64>,
    pub error: Option<String>,
}

impl ModelRun {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }

    pub fn row(&self) -> ReportRow {
        ReportRow {
            model: self.model.label(),
            seed: self.seed,
            mae: self.metrics.map(|m| m.mae),
            mse: self.metrics.map(|m| m.mse),
            seconds: self.seconds,
            hyper: self.hyper.clone(),
            error: self.error.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub dataset: String,
    pub period: usize,
    pub n_train: usize,
    pub series: Vec<f64>,
    pub normalization: NormalizationMap,
    /// BIC search result when an SFANN model was requested.
    pub hidden: Option<std::result::Result<HiddenSelection, String>>,
    pub runs: Vec<ModelRun>,
}

impl Experiment {
    pub fn train(&self) -> &[f64] {
        &self.series[..self.n_train]
    }

    pub fn test(&self) -> &[f64] {
        &self.series[self.n_train..]
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        self.runs.iter().map(ModelRun::row).collect()
    }

    pub fn run(&self, model: Model, seed: Option<u64>) -> Option<&ModelRun> {
        self.runs
            .iter()
            .find(|r| r.model == model && r.seed == seed)
    }
}

/// Everything a single fit needs, computed once per experiment.
struct Context<'a> {
    cfg: &'a ExperimentConfig,
    s: usize,
    train: &'a [f64],
    z: Vec<f64>,
    map: NormalizationMap,
    horizon: usize,
    patterns: Option<PatternSet>,
    sfann_h: Option<std::result::Result<usize, String>>,
}

type Fit = (Vec<f64>, String, Vec<f64>);

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    let data = load_dataset(&cfg.dataset)?;
    let series = data.series.values().to_vec();
    let s = cfg.period.or(data.period).ok_or_else(|| {
        BenchError::Usage(format!("no seasonal period given for '{}'", data.name))
    })?;
    let n_train = cfg
        .n_train
        .or(data.n_train)
        .ok_or_else(|| BenchError::Usage(format!("no training size given for '{}'", data.name)))?;
    if s < 2 {
        return Err(BenchError::Usage(
            "seasonal period must be at least 2".into(),
        ));
    }
    if n_train >= series.len() {
        return Err(BenchError::Usage(format!(
            "n_train = {n_train} must be below the series length {}",
            series.len()
        )));
    }
    if n_train < 3 * s {
        return Err(BenchError::Data(format!(
            "need at least three seasons ({}) of training data, got {n_train}",
            3 * s
        )));
    }
    let train = &series[..n_train];
    let map = NormalizationMap::fit(train).map_err(|e| BenchError::Data(e.to_string()))?;
    let z = map.apply(train);
    let needs_net = cfg.models.iter().any(|m| m.family().is_some());
    let patterns = if needs_net {
        Some(build_patterns_with(&z, s, cfg.layout).map_err(|e| BenchError::Data(e.to_string()))?)
    } else {
        None
    };
    let hidden = cfg
        .models
        .iter()
        .any(|m| m.family() == Some(Family::Sfann))
        .then(|| {
            let opts = train_options(cfg, cfg.seeds[0]);
            select_hidden_nodes(
                &z,
                s,
                cfg.layout,
                cfg.hidden.iter().copied(),
                |topo, pats| train_lm(topo, pats, &opts).map(|(p, _)| p.into_inner()),
            )
            .map_err(|e| format!("hidden-node selection failed: {e}"))
        });
    let ctx = Context {
        cfg,
        s,
        train,
        z,
        map,
        horizon: series.len() - n_train,
        patterns,
        sfann_h: hidden
            .as_ref()
            .map(|h| h.as_ref().map(|h| h.h).map_err(Clone::clone)),
    };
    let test = &series[n_train..];

    let jobs: Vec<(Model, Option<u64>)> = cfg
        .models
        .iter()
        .filter(|m| !matches!(m, Model::Combined(..)))
        .flat_map(|m| -> Vec<(Model, Option<u64>)> {
            if m.is_seeded() {
                cfg.seeds.iter().map(|s| (*m, Some(*s))).collect()
            } else {
                vec![(*m, None)]
            }
        })
        .collect();
    let exec = |&(model, seed): &(Model, Option<u64>)| {
        let start = Instant::now();
        let fitted = fit_one(&ctx, model, seed.unwrap_or(0));
        let seconds = if cfg.record_timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        finish(model, seed, fitted, test, seconds)
    };
    let done: Vec<ModelRun> = if cfg.single_thread {
        jobs.iter().map(exec).collect()
    } else {
        jobs.par_iter().map(exec).collect()
    };

    let mut runs = Vec::new();
    for model in &cfg.models {
        match model {
            Model::Combined(family, method) => {
                for &seed in &cfg.seeds {
                    runs.push(combined_run(&done, *model, *family, *method, seed, test));
                }
            }
            _ => runs.extend(done.iter().filter(|r| r.model == *model).cloned()),
        }
    }
    Ok(Experiment {
        dataset: data.name,
        period: s,
        n_train,
        series: series.clone(),
        normalization: ctx.map,
        hidden,
        runs,
    })
}

pub fn train_options(cfg: &ExperimentConfig, seed: u64) -> TrainOptions {
    TrainOptions {
        max_epochs: cfg.max_epochs,
        patience: cfg.patience,
        ..TrainOptions::default()
    }
    .with_seed(seed)
}

pub fn pso_options(cfg: &ExperimentConfig, seed: u64) -> PsoOptions {
    PsoOptions {
        max_iter: cfg.pso_max_iter,
        swarm_size: cfg.swarm_size,
        patience: cfg.patience,
        ..PsoOptions::default()
    }
    .with_seed(seed)
}

fn finish(
    model: Model,
    seed: Option<u64>,
    fitted: std::result::Result<Fit, String>,
    test: &[f64],
    seconds: f64,
) -> ModelRun {
    let mut run = ModelRun {
        model,
        seed,
        forecast: None,
        metrics: None,
        seconds,
        hyper: String::new(),
        params: Vec::new(),
        error: None,
    };
    match fitted {
        Ok((forecast, hyper, params)) => {
            run.hyper = hyper;
            run.params = params;
            if forecast.iter().any(|v| !v.is_finite()) {
                run.error = Some("forecast is not finite".into());
            } else {
                match evaluate(test, &forecast) {
                    Ok(m) => run.metrics = Some(m),
                    Err(e) => run.error = Some(e.to_string()),
                }
            }
            run.forecast = Some(forecast);
        }
        Err(e) => run.error = Some(e),
    }
    run
}

fn combined_run(
    done: &[ModelRun],
    model: Model,
    family: Family,
    method: forecast_lab::ensemble::Combination,
    seed: u64,
    test: &[f64],
) -> ModelRun {
    let members: std::result::Result<Vec<(String, Vec<f64>)>, String> = done
        .iter()
        .filter(|r| matches!(r.model, Model::Pso(f, _) if f == family) && r.seed == Some(seed))
        .map(|r| match (&r.forecast, &r.error) {
            (Some(f), None) => Ok((r.model.label(), f.clone())),
            _ => Err(format!("{} failed", r.model.label())),
        })
        .collect();
    let fitted = members.and_then(|m| {
        let set = ForecastSet::new(m).map_err(|e| e.to_string())?;
        let labels = set.labels().join("+");
        Ok((combine(&set, method), labels, Vec::new()))
    });
    finish(model, Some(seed), fitted, test, 0.0)
}

fn fit_one(ctx: &Context, model: Model, seed: u64) -> std::result::Result<Fit, String> {
    let err = |e: forecast_lab::Error| e.to_string();
    let (s, horizon) = (ctx.s, ctx.horizon);
    match model {
        Model::Sarima => {
            let m = fit_sarima(ctx.train, s).map_err(err)?;
            let f = forecast_sarima(&m, ctx.train, horizon).map_err(err)?;
            let hyper = format!("theta={};Theta={}", m.theta, m.seasonal_theta);
            Ok((
                f,
                hyper,
                vec![m.theta, m.seasonal_theta, m.residual_variance],
            ))
        }
        Model::HoltWinters => {
            let st = fit_hw(ctx.train, s).map_err(err)?;
            let f = st.forecast_horizon(horizon).map_err(err)?;
            let p = st.params;
            let hyper = format!("alpha={};gamma={};delta={}", p.alpha, p.gamma, p.delta);
            let mut params = vec![p.alpha, p.gamma, p.delta, st.level, st.trend];
            params.extend(&st.indices);
            Ok((f, hyper, params))
        }
        Model::Svr => {
            let (x, y) = embed(&ctx.z, s).map_err(err)?;
            let grid = SvrGrid {
                epsilon: ctx.cfg.svr_epsilon,
                ..SvrGrid::default()
            };
            let chosen = grid_search(&x, &y, &grid, s.min(x.len() - 2)).map_err(err)?;
            let m = solve_dual(&x, &y, &chosen.hyper).map_err(err)?;
            let f = forecast_svr(&m, &ctx.z, s, horizon).map_err(err)?;
            let h = m.hyper;
            let hyper = format!(
                "C={};sigma={};epsilon={};support={}{}",
                h.c,
                h.sigma,
                h.epsilon,
                m.beta.len(),
                if m.converged { "" } else { ";not converged" }
            );
            let mut params = vec![h.c, h.sigma, h.epsilon, m.bias];
            params.extend(m.full_beta(x.len()));
            Ok((ctx.map.invert(&f), hyper, params))
        }
        Model::Bp(family) | Model::Pso(family, _) => {
            let patterns = ctx.patterns.as_ref().ok_or("patterns were not built")?;
            let topo = match family {
                Family::Sfann => {
                    let h = ctx
                        .sfann_h
                        .clone()
                        .ok_or("hidden-node selection did not run")??;
                    SannTopology::feedforward(s, h)
                }
                Family::Seann => SannTopology::elman(s, 2 * s),
            }
            .map_err(err)?;
            let (params, trainer) = match model {
                Model::Bp(Family::Sfann) => (
                    train_lm(&topo, patterns, &train_options(ctx.cfg, seed)),
                    "LM",
                ),
                Model::Bp(Family::Seann) => (
                    train_gdx(&topo, patterns, &train_options(ctx.cfg, seed)),
                    "GDX",
                ),
                Model::Pso(_, preset) => (
                    train_pso(
                        &topo,
                        patterns,
                        &preset.variant(),
                        &pso_options(ctx.cfg, seed),
                    ),
                    preset.variant().name(),
                ),
                _ => unreachable!("network models only"),
            };
            let (params, trace) = params.map_err(err)?;
            let f = forecast_iterated_with(&params, &topo, &ctx.z, ctx.cfg.layout, horizon)
                .map_err(err)?;
            let hyper = format!(
                "{}x{}x{};trainer={trainer};epochs={};train_sse={}",
                s,
                topo.h(),
                s,
                trace.epochs(),
                trace.final_sse()
            );
            Ok((ctx.map.invert(&f), hyper, params.into_inner()))
        }
        Model::Combined(..) => Err("combinations are not fitted".into()),
    }
}
