use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cipc::CipcConfig;
use crate::error::{Error, Result};
use crate::plant::TurbineParams;
use crate::sprc::SprcConfig;
use crate::windfield::GridMode;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControllerKind {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "cipc")]
    Cipc,
    #[serde(rename = "sprc-1p")]
    Sprc1p,
    #[serde(rename = "sprc-1p2p")]
    Sprc1p2p,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] = [
        ControllerKind::None,
        ControllerKind::Cipc,
        ControllerKind::Sprc1p,
        ControllerKind::Sprc1p2p,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ControllerKind::None => "none",
            ControllerKind::Cipc => "cipc",
            ControllerKind::Sprc1p => "sprc-1p",
            ControllerKind::Sprc1p2p => "sprc-1p2p",
        }
    }

    pub fn is_sprc(self) -> bool {
        matches!(self, ControllerKind::Sprc1p | ControllerKind::Sprc1p2p)
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ControllerKind::ALL
            .into_iter()
            .find(|c| c.label() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::invalid(format!("unknown controller `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub wind: u64,
    pub noise: u64,
    pub excitation: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self::indexed(0)
    }
}

impl Seeds {
    /// The `i`-th seed set used by sweeps.
    pub fn indexed(i: u64) -> Self {
        Self {
            wind: 1000 + i,
            noise: 2000 + i,
            excitation: 3000 + i,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventAction {
    /// New collective pitch set-point, deg.
    CollectivePitch(f64),
    /// New mean wind speed, m/s. The turbulence intensity is kept.
    WindSpeed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    #[serde(flatten)]
    pub action: EventAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantConfig {
    pub turbine: TurbineParams,
    /// Std of the independent per-blade wind fluctuation, as a fraction of
    /// the hub-height fluctuation std.
    pub local_turbulence: f64,
    /// Hold the hub wind at its mean instead of the generated series.
    pub steady_inflow: bool,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            turbine: TurbineParams::default(),
            local_turbulence: 0.5,
            steady_inflow: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub mode: GridMode,
    /// Mean wind speed, m/s.
    pub wind_speed: f64,
    pub controller: ControllerKind,
    /// Run length, s.
    pub duration: f64,
    /// Metrics use the final `evaluation_window` seconds.
    pub evaluation_window: f64,
    /// Initial collective pitch, deg.
    pub collective_pitch: f64,
    /// Initial rotor speed; the generator torque is set to hold it. Without
    /// it the reference torque is used.
    pub initial_rpm: Option<f64>,
    pub seeds: Seeds,
    pub events: Vec<Event>,
    pub plant: PlantConfig,
    pub cipc: CipcConfig,
    pub sprc: SprcConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            mode: GridMode::Static0,
            wind_speed: 5.0,
            controller: ControllerKind::None,
            duration: 120.0,
            evaluation_window: 90.0,
            collective_pitch: 2.0,
            initial_rpm: None,
            seeds: Seeds::default(),
            events: Vec::new(),
            plant: PlantConfig::default(),
            cipc: CipcConfig::default(),
            sprc: SprcConfig::default(),
        }
    }
}

fn check(ok: bool, path: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(path, message))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Sample count at the fixed control rate.
    pub fn samples(&self) -> usize {
        (self.duration * crate::plant::SAMPLE_RATE_HZ).round() as usize
    }

    pub fn evaluation_start(&self) -> f64 {
        self.duration - self.evaluation_window
    }

    pub fn validate(&self) -> Result<()> {
        check(
            self.schema_version == SCHEMA_VERSION,
            "schema_version",
            format!("unsupported schema version, expected {SCHEMA_VERSION}"),
        )?;
        check(self.wind_speed > 0.0, "wind_speed", "must be positive")?;
        check(self.duration > 0.0, "duration", "must be positive")?;
        check(
            self.evaluation_window > 0.0 && self.evaluation_window <= self.duration,
            "evaluation_window",
            "must lie in (0, duration]",
        )?;
        if let Some(rpm) = self.initial_rpm {
            check(rpm > 0.0, "initial_rpm", "must be positive")?;
        }
        for (i, ev) in self.events.iter().enumerate() {
            check(
                ev.time >= 0.0 && ev.time < self.duration,
                &format!("events[{i}].time"),
                "must lie in [0, duration)",
            )?;
            if let EventAction::WindSpeed(v) = ev.action {
                check(v > 0.0, &format!("events[{i}].wind_speed"), "must be positive")?;
            }
        }
        let loads = &self.plant.turbine.loads;
        check(loads.noise_std >= 0.0, "plant.turbine.loads.noise_std", "must be non-negative")?;
        check(
            loads.servo_bandwidth_hz > 0.0,
            "plant.turbine.loads.servo_bandwidth_hz",
            "must be positive",
        )?;
        check(
            loads.quasi_steady_cutoff_hz > 0.0,
            "plant.turbine.loads.quasi_steady_cutoff_hz",
            "must be positive",
        )?;
        check(
            self.plant.turbine.rotor.time_constant > 0.0,
            "plant.turbine.rotor.time_constant",
            "must be positive",
        )?;
        check(
            self.plant.local_turbulence >= 0.0,
            "plant.local_turbulence",
            "must be non-negative",
        )?;
        check(self.cipc.pitch_limit > 0.0, "cipc.pitch_limit", "must be positive")?;
        check(self.cipc.notch_damping > 0.0, "cipc.notch_damping", "must be positive")?;
        let s = &self.sprc;
        check(s.past >= 1, "sprc.past", "must be at least 1")?;
        check(
            s.forgetting > 0.0 && s.forgetting <= 1.0,
            "sprc.forgetting",
            "must lie in (0, 1]",
        )?;
        check((0.0..=1.0).contains(&s.alpha), "sprc.alpha", "must lie in [0, 1]")?;
        check((0.0..=1.0).contains(&s.beta), "sprc.beta", "must lie in [0, 1]")?;
        check(s.q_weight >= 0.0, "sprc.q_weight", "must be non-negative")?;
        check(s.r_weight > 0.0, "sprc.r_weight", "must be positive")?;
        check(
            s.period_fraction > 0.0 && s.period_fraction <= 1.0,
            "sprc.period_fraction",
            "must lie in (0, 1]",
        )?;
        check(s.dither_std >= 0.0, "sprc.dither_std", "must be non-negative")?;
        check(
            s.identification_time >= 0.0,
            "sprc.identification_time",
            "must be non-negative",
        )?;
        if let Some(p) = s.period {
            check(p > 8 && p >= s.past, "sprc.period", "must exceed 8 and the past window")?;
        }
        Ok(())
    }
}
