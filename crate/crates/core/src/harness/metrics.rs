use serde::{Deserialize, Serialize};

use super::run::{ExperimentRecord, Series};
use crate::error::{Error, Result};
use crate::linalg::{mean, variance};
use crate::plant::{BLADES, SAMPLE_RATE_HZ};
use crate::spectral::welch_psd;

/// Half-width of the 1P/2P bands relative to their centre.
pub const BAND_HALF_WIDTH: f64 = 0.15;
pub const PSD_SEGMENT: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdBlock {
    pub frequencies: Vec<f64>,
    pub blades: [Vec<f64>; BLADES],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Start of the evaluation window, s.
    pub evaluation_start: f64,
    pub load_variance: [f64; BLADES],
    /// Variance of the commanded individual pitch, deg².
    pub pitch_variance: [f64; BLADES],
    pub band_power_1p: [f64; BLADES],
    pub band_power_2p: [f64; BLADES],
    pub mean_rpm: f64,
    pub psd: Option<PsdBlock>,
}

fn column(s: &[[f64; BLADES]], b: usize) -> Vec<f64> {
    s.iter().map(|v| v[b]).collect()
}

pub(crate) fn compute_metrics(series: &Series, start: f64) -> Result<Metrics> {
    let k0 = series.time.partition_point(|t| *t < start - 1e-9);
    if k0 >= series.len() {
        return Err(Error::invalid("evaluation window is empty"));
    }
    let y = &series.y[k0..];
    let u = &series.u[k0..];
    let mean_rpm = mean(&series.omega[k0..]) * 60.0 / std::f64::consts::TAU;
    let f1 = mean_rpm / 60.0;
    let seg = PSD_SEGMENT.min(y.len());
    let mut load_variance = [0.0; BLADES];
    let mut pitch_variance = [0.0; BLADES];
    let mut b1 = [0.0; BLADES];
    let mut b2 = [0.0; BLADES];
    let mut freqs = Vec::new();
    let mut powers: [Vec<f64>; BLADES] = Default::default();
    for b in 0..BLADES {
        let yb = column(y, b);
        load_variance[b] = variance(&yb);
        pitch_variance[b] = variance(&column(u, b));
        let psd = welch_psd(&yb, SAMPLE_RATE_HZ, seg, seg / 2)?;
        let w = BAND_HALF_WIDTH;
        b1[b] = psd.band_power(f1 * (1.0 - w), f1 * (1.0 + w));
        b2[b] = psd.band_power(2.0 * f1 * (1.0 - w), 2.0 * f1 * (1.0 + w));
        freqs = psd.frequencies;
        powers[b] = psd.power;
    }
    Ok(Metrics {
        evaluation_start: series.time[k0],
        load_variance,
        pitch_variance,
        band_power_1p: b1,
        band_power_2p: b2,
        mean_rpm,
        psd: Some(PsdBlock {
            frequencies: freqs,
            blades: powers,
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceReduction {
    pub per_blade: [f64; BLADES],
    /// Reduction of the summed blade-load variance.
    pub pooled: f64,
}

fn reduction(base: f64, ctrl: f64) -> f64 {
    if base > 0.0 {
        100.0 * (1.0 - ctrl / base)
    } else {
        0.0
    }
}

/// Confirms that two records can be compared sample-for-sample.
pub fn check_matched(a: &ExperimentRecord, b: &ExperimentRecord) -> Result<()> {
    let (ca, cb) = (&a.config, &b.config);
    let mismatch = |what: &str| Err(Error::InvalidComparison(format!("{what} differ")));
    if ca.seeds.wind != cb.seeds.wind || ca.seeds.noise != cb.seeds.noise {
        return mismatch("wind/noise seeds");
    }
    if ca.mode != cb.mode || ca.wind_speed != cb.wind_speed {
        return mismatch("inflow conditions");
    }
    if ca.duration != cb.duration || ca.evaluation_window != cb.evaluation_window {
        return mismatch("durations or evaluation windows");
    }
    if ca.events != cb.events || ca.collective_pitch != cb.collective_pitch {
        return mismatch("scenario events");
    }
    Ok(())
}

/// `100 (1 − var_controlled / var_baseline)` per blade and pooled.
pub fn variance_reduction(
    baseline: &ExperimentRecord,
    controlled: &ExperimentRecord,
) -> Result<VarianceReduction> {
    check_matched(baseline, controlled)?;
    let (vb, vc) = (&baseline.metrics.load_variance, &controlled.metrics.load_variance);
    let mut per_blade = [0.0; BLADES];
    for b in 0..BLADES {
        per_blade[b] = reduction(vb[b], vc[b]);
    }
    Ok(VarianceReduction {
        per_blade,
        pooled: reduction(vb.iter().sum(), vc.iter().sum()),
    })
}

/// Commanded-pitch variance per blade over the evaluation window.
pub fn actuator_duty(record: &ExperimentRecord) -> [f64; BLADES] {
    record.metrics.pitch_variance
}

/// Per-blade load variance over `[t0, t1)`.
pub fn window_load_variance(record: &ExperimentRecord, t0: f64, t1: f64) -> Result<[f64; BLADES]> {
    let s = &record.series;
    let k0 = s.time.partition_point(|t| *t < t0 - 1e-9);
    let k1 = s.time.partition_point(|t| *t < t1 - 1e-9);
    if k1 <= k0 + 1 {
        return Err(Error::invalid(format!(
            "window [{t0}, {t1}) holds no samples (series dropped?)"
        )));
    }
    let mut out = [0.0; BLADES];
    for (b, o) in out.iter_mut().enumerate() {
        *o = variance(&column(&s.y[k0..k1], b));
    }
    Ok(out)
}

/// Time after `after` at which the trailing `window`-second RMS of the
/// per-revolution ‖δθ‖ first drops below `fraction` of its peak, together
/// with that peak. The peak is taken over `(after, after + horizon]`. `None`
/// when the RMS never drops that far.
pub fn theta_settling(
    record: &ExperimentRecord,
    after: f64,
    horizon: f64,
    window: f64,
    fraction: f64,
) -> Option<(f64, f64)> {
    let tel: Vec<_> = record.theta.iter().filter(|t| t.time > after && !t.identifying).collect();
    let (ipk, peak) = tel
        .iter()
        .enumerate()
        .take_while(|(_, t)| t.time <= after + horizon)
        .map(|(i, t)| (i, t.delta_theta_norm))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    if peak == 0.0 {
        return None;
    }
    for (i, t) in tel.iter().enumerate().skip(ipk + 1) {
        if t.time - tel[ipk].time < window {
            continue;
        }
        let win: Vec<f64> = tel[..=i]
            .iter()
            .filter(|w| w.time > t.time - window)
            .map(|w| w.delta_theta_norm)
            .collect();
        let rms = (win.iter().map(|x| x * x).sum::<f64>() / win.len() as f64).sqrt();
        if rms < fraction * peak {
            return Some((t.time, peak));
        }
    }
    None
}
