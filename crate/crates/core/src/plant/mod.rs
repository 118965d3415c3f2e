//! Ground-truth plants: exact LTI systems for identification tests and the
//! turbine surrogate for closed-loop experiments.

mod lti;
mod turbine;

pub use lti::{make_benchmark_plant, simulate_lti, StateSpaceModel};
pub use turbine::{
    measure_loads, rad_s_to_rpm, rpm_to_rad_s, turbine_step, BladeLoads, Harmonic, LoadModel,
    RotorModel, TurbineParams, TurbineState, BLADES, BLADE2_AMPLITUDE_SCALE, BLADE2_PHASE_SHIFT,
    DEFAULT_TS, SAMPLE_RATE_HZ,
};
