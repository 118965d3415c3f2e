//! Conventional individual pitch control for a two-bladed rotor: Coleman
//! transform to tilt/yaw, 2P notch, PI per channel, inverse transform.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-frame `(tilt, yaw)` moments of two blades at `ψ` and `ψ + π`.
pub fn coleman_forward(loads: [f64; 2], psi: f64) -> (f64, f64) {
    let (s, c) = psi.sin_cos();
    let (s2, c2) = (psi + PI).sin_cos();
    (loads[0] * c + loads[1] * c2, loads[0] * s + loads[1] * s2)
}

/// Per-blade pitch for fixed-frame tilt and yaw commands.
pub fn coleman_inverse(tilt: f64, yaw: f64, psi: f64) -> [f64; 2] {
    let (s, c) = psi.sin_cos();
    let (s2, c2) = (psi + PI).sin_cos();
    [tilt * c + yaw * s, tilt * c2 + yaw * s2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CipcConfig {
    /// Proportional gain, deg per N·m.
    pub kp: f64,
    /// Integral gain, deg per N·m·s.
    pub ki: f64,
    /// Notch centre, Hz. `None` places it at 2P of the nominal rotor speed.
    pub notch_hz: Option<f64>,
    pub notch_damping: f64,
    /// Symmetric clamp on each fixed-frame command, deg.
    pub pitch_limit: f64,
}

impl Default for CipcConfig {
    fn default() -> Self {
        Self {
            kp: 0.5,
            ki: 0.6,
            notch_hz: None,
            notch_damping: 0.5,
            pitch_limit: 10.0,
        }
    }
}

/// Second-order notch, transposed direct form II.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Notch {
    b: [f64; 3],
    a: [f64; 2],
    z: [f64; 2],
}

impl Notch {
    pub fn new(centre_hz: f64, damping: f64, ts: f64) -> Result<Self> {
        let w0 = 2.0 * PI * centre_hz * ts;
        if !(w0 > 0.0 && w0 < PI) {
            return Err(Error::invalid(format!(
                "notch centre {centre_hz} Hz outside (0, Nyquist)"
            )));
        }
        if !(damping > 0.0) {
            return Err(Error::invalid("notch damping must be positive"));
        }
        // Bandwidth parameter sin(w0)/(2Q) with Q = 1/(2ζ).
        let alpha = w0.sin() * damping;
        let a0 = 1.0 + alpha;
        let cw = w0.cos();
        Ok(Self {
            b: [1.0 / a0, -2.0 * cw / a0, 1.0 / a0],
            a: [-2.0 * cw / a0, (1.0 - alpha) / a0],
            z: [0.0; 2],
        })
    }

    pub fn filter(&mut self, x: f64) -> f64 {
        let y = self.b[0] * x + self.z[0];
        self.z[0] = self.b[1] * x - self.a[0] * y + self.z[1];
        self.z[1] = self.b[2] * x - self.a[1] * y;
        y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CipcState {
    pub kp: f64,
    pub ki: f64,
    pub limit: f64,
    /// Integrator states for tilt and yaw, deg.
    pub integrators: [f64; 2],
    pub notches: [Notch; 2],
}

impl CipcState {
    pub fn new(config: &CipcConfig, notch_hz: f64, ts: f64) -> Result<Self> {
        if !(config.pitch_limit > 0.0) {
            return Err(Error::invalid("pitch limit must be positive"));
        }
        let notch = Notch::new(config.notch_hz.unwrap_or(notch_hz), config.notch_damping, ts)?;
        Ok(Self {
            kp: config.kp,
            ki: config.ki,
            limit: config.pitch_limit,
            integrators: [0.0; 2],
            notches: [notch.clone(), notch],
        })
    }
}

/// One control sample. Negative feedback: a positive fixed-frame moment
/// commands negative fixed-frame pitch.
pub fn cipc_step(state: &mut CipcState, loads: [f64; 2], psi: f64, ts: f64) -> Result<[f64; 2]> {
    if !(ts > 0.0) {
        return Err(Error::invalid(format!("sample time must be positive, got {ts}")));
    }
    let (tilt, yaw) = coleman_forward(loads, psi);
    let mut cmd = [0.0; 2];
    for (ch, m) in [tilt, yaw].into_iter().enumerate() {
        let e = state.notches[ch].filter(m);
        let lim = state.limit;
        let integ = (state.integrators[ch] - state.ki * ts * e).clamp(-lim, lim);
        state.integrators[ch] = integ;
        cmd[ch] = (integ - state.kp * e).clamp(-lim, lim);
    }
    if !cmd.iter().chain(state.integrators.iter()).all(|v| v.is_finite()) {
        return Err(Error::Numeric("non-finite CIPC state".into()));
    }
    Ok(coleman_inverse(cmd[0], cmd[1], psi))
}
