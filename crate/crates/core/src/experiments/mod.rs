//! Config-driven experiments: synthetic sweeps over seeded realizations,
//! station-data ingestion, k-NN sensor graphs and forecasting.

mod config;
mod forecast;
mod output;
mod run;
mod stations;

pub use config::{
    ArParams, EfficientParams, ExperimentConfig, ExperimentId, FilterModel, GraphModel,
    GraphParams, Method, PerturbationParams, SampleStationaryParams, SignalParams, Sweep,
    SweepVariable,
};
pub use forecast::{
    forecast_experiment, synthesize_ar_process, ArProcess, ArProcessSpec, ForecastOutcome,
    ForecastSpec,
};
pub use output::{median, summarize, write_outputs, write_rows, ResultRow, SummaryRow, TimingRow};
pub use run::{
    at_grid_point, make_filter, make_graph, run_experiment, unit_spectral, ExperimentOutput,
    RunOptions,
};
pub use stations::{
    fill_gaps, haversine_km, ingest_station_csv, ingest_station_reader, knn_graph, IngestOptions,
    Station, StationDataset,
};
