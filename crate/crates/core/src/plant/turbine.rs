//! Physics-lite surrogate of the two-bladed scaled turbine: azimuth-locked
//! blade-root loads, first-order pitch servos and a relaxing rotor speed.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BLADES: usize = 2;
/// Control and sensor rate of the rig.
pub const SAMPLE_RATE_HZ: f64 = 200.0;
pub const DEFAULT_TS: f64 = 1.0 / SAMPLE_RATE_HZ;

pub fn rpm_to_rad_s(rpm: f64) -> f64 {
    rpm * TAU / 60.0
}

pub fn rad_s_to_rpm(w: f64) -> f64 {
    w * 60.0 / TAU
}

/// Amplitude/phase of one load harmonic, `amp * cos(h psi + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub amplitude: f64,
    pub phase: f64,
}

/// Azimuth-locked load content of one blade, in rotor azimuth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BladeLoads {
    /// Mean (0P) load.
    pub offset: f64,
    pub once_per_rev: Harmonic,
    pub twice_per_rev: Harmonic,
}

impl BladeLoads {
    pub fn evaluate(&self, psi: f64) -> f64 {
        self.offset
            + self.once_per_rev.amplitude * (psi + self.once_per_rev.phase).cos()
            + self.twice_per_rev.amplitude * (2.0 * psi + self.twice_per_rev.phase).cos()
    }

    /// Load pattern of a blade mounted `PI` behind this one, with its
    /// amplitudes scaled and phases shifted in the blade's own azimuth.
    pub fn opposite_blade(&self, amplitude_scale: f64, phase_shift: f64) -> Self {
        let shift = |h: &Harmonic, order: f64| Harmonic {
            amplitude: h.amplitude * amplitude_scale,
            phase: h.phase + order * PI + phase_shift,
        };
        Self {
            offset: self.offset * amplitude_scale,
            once_per_rev: shift(&self.once_per_rev, 1.0),
            twice_per_rev: shift(&self.twice_per_rev, 2.0),
        }
    }
}

/// Blade-load surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadModel {
    pub blades: [BladeLoads; BLADES],
    /// N·m per degree of actual (servo) pitch.
    pub pitch_gain: f64,
    /// N·m per m/s of wind fluctuation about the quasi-steady wind.
    pub wind_gain: f64,
    /// Wind speed at which the periodic amplitudes are nominal; they scale
    /// with the square of the quasi-steady wind.
    pub reference_wind: f64,
    /// Corner of the first-order filter producing the quasi-steady
    /// (rotor-effective) wind.
    pub quasi_steady_cutoff_hz: f64,
    /// Standard deviation of additive measurement noise, N·m.
    pub noise_std: f64,
    pub servo_bandwidth_hz: f64,
    /// Relative change of the periodic amplitudes per degree of collective
    /// pitch away from `reference_pitch_deg`.
    pub periodic_pitch_sensitivity: f64,
    pub reference_pitch_deg: f64,
}

pub const BLADE2_AMPLITUDE_SCALE: f64 = 1.1;
pub const BLADE2_PHASE_SHIFT: f64 = 0.1;

impl Default for LoadModel {
    fn default() -> Self {
        let blade1 = BladeLoads {
            offset: 20.0,
            once_per_rev: Harmonic {
                amplitude: 10.0,
                phase: 0.4,
            },
            twice_per_rev: Harmonic {
                amplitude: 6.0,
                phase: -0.7,
            },
        };
        let blade2 = blade1.opposite_blade(BLADE2_AMPLITUDE_SCALE, BLADE2_PHASE_SHIFT);
        Self {
            blades: [blade1, blade2],
            pitch_gain: 4.0,
            wind_gain: 20.0,
            reference_wind: 5.0,
            quasi_steady_cutoff_hz: 1.5,
            noise_std: 0.5,
            servo_bandwidth_hz: 15.0,
            periodic_pitch_sensitivity: -0.05,
            reference_pitch_deg: 2.0,
        }
    }
}

impl LoadModel {
    /// Copy with measurement noise, wind sensitivity and wind scaling
    /// removed: loads become a pure function of azimuth and pitch.
    pub fn periodic_only(&self) -> Self {
        Self {
            wind_gain: 0.0,
            noise_std: 0.0,
            reference_wind: 0.0,
            ..self.clone()
        }
    }
}

/// Affine steady-state rotor speed with first-order relaxation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RotorModel {
    pub reference_rpm: f64,
    pub reference_wind: f64,
    pub reference_pitch_deg: f64,
    pub reference_torque: f64,
    pub rpm_per_wind: f64,
    pub rpm_per_pitch_deg: f64,
    pub rpm_per_torque: f64,
    pub time_constant: f64,
    pub min_rpm: f64,
}

impl Default for RotorModel {
    fn default() -> Self {
        Self {
            reference_rpm: 230.0,
            reference_wind: 5.0,
            reference_pitch_deg: 2.0,
            reference_torque: 1.0,
            rpm_per_wind: 80.0,
            rpm_per_pitch_deg: -3.75,
            rpm_per_torque: -100.0,
            time_constant: 2.0,
            min_rpm: 30.0,
        }
    }
}

impl RotorModel {
    pub fn steady_rpm(&self, wind: f64, collective_pitch: f64, torque: f64) -> f64 {
        let rpm = self.reference_rpm
            + self.rpm_per_wind * (wind - self.reference_wind)
            + self.rpm_per_pitch_deg * (collective_pitch - self.reference_pitch_deg)
            + self.rpm_per_torque * (torque - self.reference_torque);
        rpm.max(self.min_rpm)
    }

    /// Generator torque that places the steady rotor speed at `rpm`.
    pub fn torque_for_rpm(&self, rpm: f64, wind: f64, collective_pitch: f64) -> f64 {
        let free = self.reference_rpm
            + self.rpm_per_wind * (wind - self.reference_wind)
            + self.rpm_per_pitch_deg * (collective_pitch - self.reference_pitch_deg);
        self.reference_torque + (rpm - free) / self.rpm_per_torque
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TurbineParams {
    pub loads: LoadModel,
    pub rotor: RotorModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurbineState {
    /// Rotor azimuth in `[0, 2π)`.
    pub azimuth: f64,
    /// Rotor speed, rad/s.
    pub omega: f64,
    /// Actual blade pitch angles (servo outputs), degrees.
    pub servo: [f64; BLADES],
    /// Completed revolutions.
    pub rotation: u64,
    /// Collective pitch set-point, degrees.
    pub collective_pitch: f64,
    /// Rotor-effective (low-passed) wind, m/s.
    pub quasi_steady_wind: f64,
}

impl TurbineState {
    /// State at equilibrium for a constant operating point.
    pub fn steady(params: &TurbineParams, wind: f64, collective_pitch: f64, torque: f64) -> Self {
        Self {
            azimuth: 0.0,
            omega: rpm_to_rad_s(params.rotor.steady_rpm(wind, collective_pitch, torque)),
            servo: [collective_pitch; BLADES],
            rotation: 0,
            collective_pitch,
            quasi_steady_wind: wind,
        }
    }

    pub fn rpm(&self) -> f64 {
        rad_s_to_rpm(self.omega)
    }
}

/// Blade loads of the given state, excluding measurement noise.
pub fn measure_loads(state: &TurbineState, model: &LoadModel, wind: f64) -> [f64; BLADES] {
    let wind_scale = if model.reference_wind > 0.0 {
        (state.quasi_steady_wind / model.reference_wind).powi(2)
    } else {
        1.0
    };
    let pitch_scale = (1.0
        + model.periodic_pitch_sensitivity * (state.collective_pitch - model.reference_pitch_deg))
        .max(0.0);
    let scale = wind_scale * pitch_scale;
    let gust = model.wind_gain * (wind - state.quasi_steady_wind);
    let mut out = [0.0; BLADES];
    for (i, blade) in model.blades.iter().enumerate() {
        out[i] = scale * blade.evaluate(state.azimuth) + model.pitch_gain * state.servo[i] + gust;
    }
    out
}

/// Advances the turbine one sample and returns the loads measured at the new
/// state. `noise` is added to the loads as-is (pass zeros to disable).
pub fn turbine_step(
    state: &TurbineState,
    params: &TurbineParams,
    pitch_cmd: &[f64; BLADES],
    generator_torque: f64,
    wind: f64,
    ts: f64,
    noise: &[f64; BLADES],
) -> Result<([f64; BLADES], TurbineState)> {
    if !(ts > 0.0) {
        return Err(Error::invalid(format!("sample time must be positive, got {ts}")));
    }
    let lm = &params.loads;
    let servo_pole = (-TAU * lm.servo_bandwidth_hz * ts).exp();
    let mut next = state.clone();
    for i in 0..BLADES {
        let cmd = state.collective_pitch + pitch_cmd[i];
        next.servo[i] = servo_pole * state.servo[i] + (1.0 - servo_pole) * cmd;
    }

    next.azimuth = state.azimuth + state.omega * ts;
    while next.azimuth >= TAU {
        next.azimuth -= TAU;
        next.rotation += 1;
    }

    let target = rpm_to_rad_s(params.rotor.steady_rpm(wind, state.collective_pitch, generator_torque));
    next.omega = state.omega + ts * (target - state.omega) / params.rotor.time_constant;
    next.omega = next.omega.max(rpm_to_rad_s(params.rotor.min_rpm));

    let wind_pole = (-TAU * lm.quasi_steady_cutoff_hz * ts).exp();
    next.quasi_steady_wind = wind_pole * state.quasi_steady_wind + (1.0 - wind_pole) * wind;

    let mut loads = measure_loads(&next, lm, wind);
    for (y, n) in loads.iter_mut().zip(noise) {
        *y += n;
    }
    Ok((loads, next))
}
