use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use forecast_lab::series::{autocorrelation, detect_seasonality, seasonality_threshold};
use forecast_lab::TimeSeries;
use forecast_lab_bench::config::{parse_models, parse_seeds};
use forecast_lab_bench::data::{generate_synthetic, load_dataset};
use forecast_lab_bench::report::{emit_plot_data, emit_report, render};
use forecast_lab_bench::{
    run_experiment, BenchError, ExperimentConfig, Model, ReportFormat, Result,
};

#[derive(Parser)]
#[command(
    name = "forecast-lab",
    version,
    about = "Seasonal time-series forecasting benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correlogram check for a seasonal period.
    Detect {
        /// CSV file or `airline`.
        data: String,
        #[arg(long)]
        period: usize,
        /// Only use the first N observations.
        #[arg(long)]
        n_train: Option<usize>,
    },
    /// Fit one model on the training prefix and report test errors.
    Fit {
        model: String,
        data: String,
        #[command(flatten)]
        split: SplitArgs,
    },
    /// Fit one model and print its test-horizon forecast.
    Forecast {
        model: String,
        data: String,
        #[command(flatten)]
        split: SplitArgs,
        /// Write `t,actual,forecast` plot data here.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run the model matrix described by a config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: the config's `output_dir`, else `bench-out`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        single_thread: bool,
        /// Record wall-clock seconds (reports are then not reproducible).
        #[arg(long)]
        timing: bool,
        /// Show MAE×10² and MSE×10⁴.
        #[arg(long)]
        scale_note: bool,
    },
    /// Write a synthetic seasonal series as CSV.
    Synth {
        #[arg(long)]
        period: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        trend: f64,
        #[arg(long, default_value_t = 2.0)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct SplitArgs {
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    period: Option<usize>,
    /// Seed list such as `1,2` or `1..5`.
    #[arg(long)]
    seeds: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect {
            data,
            period,
            n_train,
        } => detect(&data, period, n_train),
        Command::Fit { model, data, split } => {
            let e = single_model(&model, &data, split)?;
            let rows = e.rows();
            print!("{}", render(&rows, ReportFormat::Csv, false)?);
            for r in e.runs.iter().filter(|r| !r.hyper.is_empty()) {
                println!(
                    "# {} seed={}: {}",
                    r.model,
                    r.seed.map_or("-".into(), |s| s.to_string()),
                    r.hyper
                );
            }
            check_failures(&e)
        }
        Command::Forecast {
            model,
            data,
            split,
            plot,
        } => {
            let target: Model = model.parse()?;
            let e = single_model(&model, &data, split)?;
            let run = e
                .runs
                .iter()
                .find(|r| r.model == target && r.succeeded())
                .ok_or_else(|| BenchError::Model(first_error(&e)))?;
            let forecast = run
                .forecast
                .as_ref()
                .expect("successful runs have a forecast");
            println!("t,forecast");
            for (k, v) in forecast.iter().enumerate() {
                println!("{},{v}", e.n_train + k);
            }
            if let Some(path) = plot {
                emit_plot_data(&e.series, e.n_train, forecast, &path)?;
            }
            Ok(())
        }
        Command::Bench {
            config,
            out,
            single_thread,
            timing,
            scale_note,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            cfg.single_thread |= single_thread;
            cfg.record_timing |= timing;
            cfg.scale_note |= scale_note;
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("bench-out"));
            std::fs::create_dir_all(&dir)?;
            let e = run_experiment(&cfg)?;
            let rows = e.rows();
            for format in [
                ReportFormat::Csv,
                ReportFormat::Json,
                ReportFormat::Markdown,
            ] {
                emit_report(
                    &rows,
                    format,
                    &dir.join(format!("report.{}", format.extension())),
                    cfg.scale_note,
                )?;
            }
            for model in &cfg.models {
                if let Some(r) = e.runs.iter().find(|r| r.model == *model && r.succeeded()) {
                    let path = dir.join(format!("plot-{}.csv", model.label()));
                    emit_plot_data(
                        &e.series,
                        e.n_train,
                        r.forecast.as_deref().unwrap_or(&[]),
                        &path,
                    )?;
                }
            }
            print!("{}", render(&rows, ReportFormat::Markdown, cfg.scale_note)?);
            if e.runs.iter().all(|r| !r.succeeded()) {
                return Err(BenchError::Model(first_error(&e)));
            }
            Ok(())
        }
        Command::Synth {
            period,
            n,
            trend,
            noise,
            seed,
            out,
        } => {
            let series = generate_synthetic(period, n, trend, noise, seed)?;
            let mut text = String::from("value\n");
            for v in series.values() {
                text.push_str(&format!("{v}\n"));
            }
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}

fn detect(data: &str, period: usize, n_train: Option<usize>) -> Result<()> {
    let d = load_dataset(data)?;
    let values = d.series.values();
    let n = n_train.unwrap_or(values.len());
    if n == 0 || n > values.len() {
        return Err(BenchError::Usage(format!(
            "n_train must be in 1..={}",
            values.len()
        )));
    }
    let series =
        TimeSeries::new(values[..n].to_vec()).map_err(|e| BenchError::Data(e.to_string()))?;
    let data_err = |e: forecast_lab::Error| BenchError::Data(e.to_string());
    let fires = detect_seasonality(&series, period).map_err(data_err)?;
    println!("n = {n}");
    println!(
        "r_{period} = {:.4}",
        autocorrelation(&series, period).map_err(data_err)?
    );
    if 2 * period < n {
        println!(
            "r_{} = {:.4}",
            2 * period,
            autocorrelation(&series, 2 * period).map_err(data_err)?
        );
    }
    println!("threshold = {:.4}", seasonality_threshold(n));
    println!("seasonal = {}", if fires { "yes" } else { "no" });
    Ok(())
}

fn single_model(
    model: &str,
    data: &str,
    split: SplitArgs,
) -> Result<forecast_lab_bench::Experiment> {
    let target: Model = model.parse()?;
    let mut models = Vec::new();
    if let Model::Combined(f, _) = target {
        models.push(format!("{}-PSO", f.label()));
    }
    models.push(target.label());
    let mut cfg = ExperimentConfig::new(data, parse_models(&models)?)?;
    cfg.n_train = split.n_train;
    cfg.period = split.period;
    if let Some(s) = split.seeds {
        cfg.seeds = parse_seeds(&s)?;
    }
    run_experiment(&cfg)
}

fn first_error(e: &forecast_lab_bench::Experiment) -> String {
    e.runs
        .iter()
        .find_map(|r| r.error.as_ref().map(|m| format!("{}: {m}", r.model)))
        .unwrap_or_else(|| "no successful run".into())
}

fn check_failures(e: &forecast_lab_bench::Experiment) -> Result<()> {
    if e.runs.iter().any(|r| !r.succeeded()) {
        return Err(BenchError::Model(first_error(e)));
    }
    Ok(())
}
