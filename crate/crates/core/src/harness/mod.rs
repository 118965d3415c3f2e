//! Experiment orchestration: configs, the simulation loop, metrics,
//! comparisons and persistence.

mod config;
mod export;
mod metrics;
mod run;
mod sweep;

pub use config::{
    ControllerKind, Event, EventAction, ExperimentConfig, PlantConfig, Seeds, SCHEMA_VERSION,
};
pub use export::{
    compare_table, export, record_csv, record_from_json, record_json, write_file, CellStat,
    Column, CompareTable, ExportFormat, TableRow, CSV_HEADER,
};
pub use metrics::{
    actuator_duty, check_matched, theta_settling, variance_reduction, window_load_variance,
    Metrics, PsdBlock, VarianceReduction, BAND_HALF_WIDTH, PSD_SEGMENT,
};
pub use run::{run_experiment, ExperimentRecord, RecordEvent, Series, PERSISTENCY_WARNING};
pub use sweep::{pitch_step_scenario, sweep, table_configs, wind_step_scenario, TABLE_SPEEDS};
