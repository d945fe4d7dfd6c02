use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rgfi_core::efficient::{efficient_rfi, EfficientConfig};
use rgfi_core::experiments::{
    forecast_experiment, ingest_station_csv, knn_graph, run_experiment, write_outputs, write_rows,
    ExperimentConfig, ForecastSpec, IngestOptions, Method, ResultRow, RunOptions,
};
use rgfi_core::graph::io::{read_graph_file, read_matrix_file, write_matrix_file};
use rgfi_core::solver::report::{write_phases, write_report};
use rgfi_core::solver::{rfi_alternating, SolverConfig};
use rgfi_core::{Error, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "rgfi", version, about = "Robust graph-filter identification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment sweep.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Use the config's reduced realization count.
        #[arg(long)]
        fast: bool,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Jointly estimate a filter and a denoised graph from observed signals.
    Denoise {
        /// Observed graph: edge list (`src,dst,weight` header) or dense CSV.
        #[arg(long)]
        graph: PathBuf,
        /// Input signals, dense N x M CSV without header.
        #[arg(long)]
        x: PathBuf,
        /// Output signals, dense N x M CSV without header.
        #[arg(long)]
        y: PathBuf,
        /// Solver settings (TOML). With `--efficient` the file holds `tau1`,
        /// `tau2` and a `[solver]` table.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Use the gradient / coordinate-descent solver.
        #[arg(long)]
        efficient: bool,
        #[arg(long, default_value = "denoise_out")]
        out: PathBuf,
    },
    /// Fit and evaluate graph AR predictors on station measurements.
    Forecast {
        /// Long-format CSV: `timestamp,node_id,<value>[,latitude,longitude,exogenous]`.
        #[arg(long)]
        data: PathBuf,
        /// AR memory of the AR-RFI predictor.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Fraction of samples used for training.
        #[arg(long, default_value_t = 0.5)]
        tts: f64,
        #[arg(long, default_value_t = 1)]
        horizon: usize,
        /// Graph file; without it a k-NN graph is built from station coordinates.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        knn: usize,
        #[arg(long, default_value = "value")]
        value_column: String,
        #[arg(long, default_value_t = 1)]
        min_measurements: usize,
        /// Scale every station's series to unit norm.
        #[arg(long)]
        normalize: bool,
        /// Comma-separated method ids.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "LS,LS-GF,Copy-Prev-Day,RFI,AR-RFI,LS-Eval"
        )]
        methods: Vec<String>,
        #[arg(long, default_value_t = 3)]
        lsgf_order: usize,
        /// Solver settings (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "forecast_out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            fast,
            out,
            seed,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output.clone());
            let output = run_experiment(&cfg, RunOptions { fast, seed })?;
            write_outputs(&dir, &output.results, &output.timings)?;
            println!(
                "{}",
                json!({ "results": dir.join("results.csv"), "rows": output.results.len() })
            );
            Ok(())
        }
        Command::Denoise {
            graph,
            x,
            y,
            config,
            efficient,
            out,
        } => denoise(&graph, &x, &y, config.as_deref(), efficient, &out),
        Command::Forecast {
            data,
            k,
            tts,
            horizon,
            graph,
            knn,
            value_column,
            min_measurements,
            normalize,
            methods,
            lsgf_order,
            config,
            out,
        } => {
            let options = IngestOptions {
                value_column,
                normalize,
                min_measurements,
                ..IngestOptions::default()
            };
            let ds = ingest_station_csv(&data, &options)?;
            let s_bar = match graph {
                Some(p) => read_graph_file(&p)?,
                None => knn_graph(&ds.stations, knn)?,
            };
            let solver = match config {
                Some(p) => SolverConfig::load(&p)?,
                None => SolverConfig::default(),
            };
            let methods = methods
                .iter()
                .map(|m| Method::parse(m))
                .collect::<Result<Vec<_>>>()?;
            let spec = ForecastSpec {
                order: k,
                tts,
                horizon,
                lsgf_order,
                methods,
                solver,
            };
            let outcomes = forecast_experiment(
                ds.values.as_ref(),
                ds.exogenous.as_ref().map(|x| x.as_ref()),
                &s_bar,
                &spec,
            )?;
            let mut rows = Vec::new();
            for o in &outcomes {
                for (metric, value) in [("nerr_y", o.nerr), ("sse", o.sse)] {
                    rows.push(ResultRow {
                        method: o.method.label().to_string(),
                        grid_value: horizon as f64,
                        seed: 0,
                        metric: metric.to_string(),
                        value,
                    });
                }
            }
            std::fs::create_dir_all(&out)?;
            write_rows(&rows, std::fs::File::create(out.join("results.csv"))?)?;
            let summary: serde_json::Map<String, serde_json::Value> = outcomes
                .iter()
                .map(|o| (o.method.label().to_string(), json!(o.nerr)))
                .collect();
            println!(
                "{}",
                json!({ "nodes": ds.n(), "samples": ds.len(), "nerr_y": summary })
            );
            Ok(())
        }
    }
}

fn denoise(
    graph: &Path,
    x: &Path,
    y: &Path,
    config: Option<&Path>,
    efficient: bool,
    out: &Path,
) -> Result<()> {
    let s_bar = read_graph_file(graph)?;
    let x = read_matrix_file(x)?;
    let y = read_matrix_file(y)?;
    let result = if efficient {
        let cfg = match config {
            Some(p) => EfficientConfig::load(p)?,
            None => EfficientConfig::default(),
        };
        efficient_rfi(x.as_ref(), y.as_ref(), &s_bar, &cfg)?
    } else {
        let cfg = match config {
            Some(p) => SolverConfig::load(p)?,
            None => SolverConfig::default(),
        };
        rfi_alternating(x.as_ref(), y.as_ref(), &s_bar, &cfg)?
    };
    std::fs::create_dir_all(out)?;
    write_matrix_file(result.h_hat(), &out.join("h_hat.csv"))?;
    write_matrix_file(result.s_hat.matrix(), &out.join("s_hat.csv"))?;
    write_report(&result, std::fs::File::create(out.join("report.csv"))?)?;
    write_phases(&result, std::fs::File::create(out.join("phases.csv"))?)?;
    let objective = result
        .trace
        .last()
        .map(|r| r.objective)
        .ok_or_else(|| Error::Infeasible("solver finished without iterations".into()))?;
    println!(
        "{}",
        json!({
            "converged": result.converged,
            "iterations": result.trace.len(),
            "objective": objective,
            "h_coeffs": result.h_coeffs.as_ref().map(|c| c.coeffs.clone()),
            "out": out,
        })
    );
    Ok(())
}
