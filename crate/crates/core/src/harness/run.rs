use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::{ControllerKind, EventAction, ExperimentConfig, SCHEMA_VERSION};
use super::metrics::{compute_metrics, Metrics};
use crate::cipc::{cipc_step, CipcState};
use crate::error::{Error, Result};
use crate::plant::{measure_loads, turbine_step, TurbineState, BLADES, DEFAULT_TS, SAMPLE_RATE_HZ};
use crate::sprc::{Harmonics, RotationTelemetry, SprcController};
use crate::sysid::persistency_metric;
use crate::windfield::generate;

/// Condition number of the δu Hankel matrix above which the identification
/// phase is reported as weakly exciting.
pub const PERSISTENCY_WARNING: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEvent {
    pub time: f64,
    pub message: String,
}

/// Sampled signals of one run at the control rate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub time: Vec<f64>,
    /// Individual pitch command per blade, deg (collective excluded).
    pub u: Vec<[f64; BLADES]>,
    /// Measured blade loads, N·m.
    pub y: Vec<[f64; BLADES]>,
    pub psi: Vec<f64>,
    /// Rotor speed, rad/s.
    pub omega: Vec<f64>,
    /// Hub wind speed, m/s.
    pub wind: Vec<f64>,
}

impl Series {
    pub fn len(&self) -> usize {
        self.time.len()
    }
    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub series: Series,
    pub theta: Vec<RotationTelemetry>,
    pub events: Vec<RecordEvent>,
    pub metrics: Metrics,
}

enum Active {
    None,
    Cipc(CipcState),
    Sprc(Box<SprcController>),
}

/// Operating points visited by the run, in event order.
fn operating_points(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    let mut events = cfg.events.clone();
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut op = (cfg.wind_speed, cfg.collective_pitch);
    let mut out = vec![op];
    for ev in events {
        match ev.action {
            EventAction::CollectivePitch(p) => op.1 = p,
            EventAction::WindSpeed(v) => op.0 = v,
        }
        out.push(op);
    }
    out
}

fn high_pass(x: &[f64], cutoff_hz: f64) -> Vec<f64> {
    let pole = (-std::f64::consts::TAU * cutoff_hz * DEFAULT_TS).exp();
    let mut lp = x.first().copied().unwrap_or(0.0);
    x.iter()
        .map(|v| {
            lp = pole * lp + (1.0 - pole) * v;
            v - lp
        })
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let n = cfg.samples();
    let params = &cfg.plant.turbine;
    let rotor = &params.rotor;
    let mut wind = generate(cfg.mode, cfg.wind_speed, cfg.duration, SAMPLE_RATE_HZ, cfg.seeds.wind)?;
    if cfg.plant.steady_inflow {
        wind.samples.fill(cfg.wind_speed);
    }

    let mut noise_rng = ChaCha8Rng::seed_from_u64(cfg.seeds.noise);
    let local: Vec<Vec<f64>> = if cfg.plant.local_turbulence > 0.0 {
        (0..BLADES)
            .map(|_| {
                let seed = noise_rng.random();
                let s = generate(cfg.mode, cfg.wind_speed, cfg.duration, SAMPLE_RATE_HZ, seed)?;
                let dev: Vec<f64> = s
                    .samples
                    .iter()
                    .map(|v| cfg.plant.local_turbulence * (v - cfg.wind_speed))
                    .collect();
                Ok(high_pass(&dev, params.loads.quasi_steady_cutoff_hz))
            })
            .collect::<Result<_>>()?
    } else {
        vec![vec![0.0; n]; BLADES]
    };
    let noise = Normal::new(0.0, params.loads.noise_std)
        .map_err(|e| Error::invalid(e.to_string()))?;

    let torque = match cfg.initial_rpm {
        Some(rpm) => rotor.torque_for_rpm(rpm, cfg.wind_speed, cfg.collective_pitch),
        None => rotor.reference_torque,
    };
    let rpm_nominal = operating_points(cfg)
        .into_iter()
        .map(|(v, p)| rotor.steady_rpm(v, p, torque))
        .fold(0.0, f64::max);
    let mut state = TurbineState::steady(params, cfg.wind_speed, cfg.collective_pitch, torque);

    let mut events_out = Vec::new();
    let mut active = match cfg.controller {
        ControllerKind::None => Active::None,
        ControllerKind::Cipc => {
            let notch = 2.0 * state.rpm() / 60.0;
            Active::Cipc(CipcState::new(&cfg.cipc, notch, DEFAULT_TS)?)
        }
        kind => {
            let harmonics = if kind == ControllerKind::Sprc1p {
                Harmonics::OneP
            } else {
                Harmonics::OnePTwoP
            };
            let period = cfg.sprc.lifting_period(rpm_nominal, SAMPLE_RATE_HZ);
            events_out.push(RecordEvent {
                time: 0.0,
                message: format!("lifting period {period} samples (nominal {rpm_nominal:.1} rpm)"),
            });
            Active::Sprc(Box::new(SprcController::new(
                cfg.sprc.clone(),
                harmonics,
                BLADES,
                BLADES,
                period,
                cfg.seeds.excitation,
            )?))
        }
    };

    let mut pending = cfg.events.clone();
    pending.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut pending = pending.into_iter().peekable();
    let mut mean_wind = cfg.wind_speed;

    let mut series = Series::default();
    let mut y = measure_loads(&state, &params.loads, wind.samples[0]);
    for k in 0..n {
        let t = k as f64 * DEFAULT_TS;
        while let Some(ev) = pending.next_if(|e| e.time <= t) {
            match ev.action {
                EventAction::CollectivePitch(p) => state.collective_pitch = p,
                EventAction::WindSpeed(v) => mean_wind = v,
            }
            events_out.push(RecordEvent {
                time: t,
                message: format!("{:?}", ev.action),
            });
        }
        let v = wind.samples[k] * mean_wind / cfg.wind_speed;
        let psi = state.azimuth;
        let cmd = match &mut active {
            Active::None => [0.0; BLADES],
            Active::Cipc(s) => cipc_step(s, y, psi, DEFAULT_TS)?,
            Active::Sprc(c) => {
                let u = c.step(&DVector::from_column_slice(&y), psi, t)?;
                [u[0], u[1]]
            }
        };
        series.time.push(t);
        series.u.push(cmd);
        series.y.push(y);
        series.psi.push(psi);
        series.omega.push(state.omega);
        series.wind.push(v);

        let mut dist = [0.0; BLADES];
        for (i, d) in dist.iter_mut().enumerate() {
            *d = params.loads.wind_gain * local[i][k] * mean_wind / cfg.wind_speed;
            if params.loads.noise_std > 0.0 {
                *d += noise.sample(&mut noise_rng);
            }
        }
        let (loads, next) = turbine_step(&state, params, &cmd, torque, v, DEFAULT_TS, &dist)?;
        if !loads.iter().all(|x| x.is_finite()) {
            return Err(Error::Numeric(format!("non-finite blade load at t = {t:.3} s")));
        }
        y = loads;
        state = next;
    }

    let mut theta = Vec::new();
    if let Active::Sprc(c) = active {
        let id_end = ((cfg.sprc.identification_time / DEFAULT_TS) as usize).min(n);
        if id_end > c.period() + cfg.sprc.past {
            let u: Vec<DVector<f64>> = series.u[..id_end]
                .iter()
                .map(|u| DVector::from_column_slice(u))
                .collect();
            let cond = persistency_metric(&u, c.period(), cfg.sprc.past);
            if cond > PERSISTENCY_WARNING {
                events_out.push(RecordEvent {
                    time: cfg.sprc.identification_time,
                    message: format!("weak excitation: delta-u Hankel condition number {cond:.3e}"),
                });
            }
        }
        events_out.extend(c.events.iter().map(|e| RecordEvent {
            time: e.time,
            message: e.message.clone(),
        }));
        theta = c.telemetry;
    }
    events_out.sort_by(|a, b| a.time.total_cmp(&b.time));

    let metrics = compute_metrics(&series, cfg.evaluation_start())?;
    Ok(ExperimentRecord {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        series,
        theta,
        events: events_out,
        metrics,
    })
}
