use rayon::prelude::*;

use super::config::{ControllerKind, EventAction, Event, ExperimentConfig, Seeds};
use super::run::{run_experiment, ExperimentRecord, Series};
use crate::error::Result;
use crate::windfield::GridMode;

/// Mean wind speeds of the comparison grid.
pub const TABLE_SPEEDS: [f64; 3] = [4.0, 4.5, 5.0];

/// Configs of the full comparison grid: every mode and speed, every
/// controller in `controllers`, every seed set, in that nesting order.
pub fn table_configs(
    base: &ExperimentConfig,
    controllers: &[ControllerKind],
    seeds: &[Seeds],
) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for mode in GridMode::ALL {
        for speed in TABLE_SPEEDS {
            for &controller in controllers {
                for &s in seeds {
                    out.push(ExperimentConfig {
                        mode,
                        wind_speed: speed,
                        controller,
                        seeds: s,
                        ..base.clone()
                    });
                }
            }
        }
    }
    out
}

/// Runs independent experiments in parallel. Results come back in input
/// order. Without `keep_series` the sampled signals and PSD arrays are
/// dropped to bound memory.
pub fn sweep(configs: &[ExperimentConfig], keep_series: bool) -> Result<Vec<ExperimentRecord>> {
    configs
        .par_iter()
        .map(|cfg| {
            let mut rec = run_experiment(cfg)?;
            if !keep_series {
                rec.series = Series::default();
                rec.metrics.psd = None;
            }
            Ok(rec)
        })
        .collect()
}

/// Collective pitch step 2° → 10° at 40 s in gusts mode at 4.2 m/s, starting
/// at 240 rpm.
pub fn pitch_step_scenario(controller: ControllerKind, seeds: Seeds) -> ExperimentConfig {
    ExperimentConfig {
        mode: GridMode::Gusts,
        wind_speed: 4.2,
        controller,
        seeds,
        initial_rpm: Some(240.0),
        collective_pitch: 2.0,
        events: vec![Event {
            time: 40.0,
            action: EventAction::CollectivePitch(10.0),
        }],
        ..ExperimentConfig::default()
    }
}

/// Mean wind step 4.5 → 5 m/s at 40 s in static 45° mode, starting at
/// 200 rpm.
pub fn wind_step_scenario(controller: ControllerKind, seeds: Seeds) -> ExperimentConfig {
    ExperimentConfig {
        mode: GridMode::Static45,
        wind_speed: 4.5,
        controller,
        seeds,
        initial_rpm: Some(200.0),
        events: vec![Event {
            time: 40.0,
            action: EventAction::WindSpeed(5.0),
        }],
        ..ExperimentConfig::default()
    }
}
