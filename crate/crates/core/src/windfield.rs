//! Seeded synthesis of hub-height wind-speed series emulating the four
//! active-grid operating modes.
//!
//! Turbulence is synthesised by random-phase inverse-spectrum shaping: each
//! FFT bin gets the square root of a target spectral density and a uniformly
//! random phase. The static modes use a von Kármán-type spectrum whose tail
//! follows the -5/3 inertial-range law; the Lidar protocol adds a broad
//! low-frequency plateau; the gust protocol superposes Ricker ("mexican hat")
//! gusts on a weak background. The fluctuation is finally rescaled so the
//! series hits the mode's mean and turbulence intensity exactly.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::welch_psd;

/// Minimum synthesis rate; matches the control rate of the rig.
pub const MIN_RATE_HZ: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    Static0,
    Static45,
    Lidar,
    Gusts,
}

impl GridMode {
    pub const ALL: [GridMode; 4] = [
        GridMode::Static0,
        GridMode::Static45,
        GridMode::Lidar,
        GridMode::Gusts,
    ];

    /// Centerline turbulence intensity, percent.
    pub fn target_ti(self) -> f64 {
        match self {
            GridMode::Static0 => 2.5,
            GridMode::Static45 => 3.7,
            GridMode::Lidar => 8.8,
            GridMode::Gusts => 4.2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GridMode::Static0 => "static0",
            GridMode::Static45 => "static45",
            GridMode::Lidar => "lidar",
            GridMode::Gusts => "gusts",
        }
    }

    fn spectrum(self) -> ModeSpectrum {
        match self {
            GridMode::Static0 => ModeSpectrum::grid(3.0),
            GridMode::Static45 => ModeSpectrum::grid(2.0),
            GridMode::Lidar => ModeSpectrum {
                base_corner_hz: 1.0,
                injection: Some(Injection {
                    weight: 200.0,
                    low_hz: 0.05,
                    corner_hz: 0.25,
                }),
            },
            GridMode::Gusts => ModeSpectrum::grid(3.0),
        }
    }
}

impl fmt::Display for GridMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GridMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "static0" => Ok(GridMode::Static0),
            "static45" => Ok(GridMode::Static45),
            "lidar" => Ok(GridMode::Lidar),
            "gusts" => Ok(GridMode::Gusts),
            other => Err(Error::invalid(format!("unknown grid mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Injection {
    /// Plateau level relative to the base spectrum at zero frequency.
    weight: f64,
    low_hz: f64,
    corner_hz: f64,
}

#[derive(Debug, Clone, Copy)]
struct ModeSpectrum {
    base_corner_hz: f64,
    injection: Option<Injection>,
}

impl ModeSpectrum {
    fn grid(corner: f64) -> Self {
        Self {
            base_corner_hz: corner,
            injection: None,
        }
    }

    fn density(&self, f: f64) -> f64 {
        let von_karman = |fc: f64| (1.0 + (f / fc).powi(2)).powf(-5.0 / 6.0);
        let mut s = von_karman(self.base_corner_hz);
        if let Some(inj) = self.injection {
            let x = (f / inj.low_hz).powi(2);
            s += inj.weight * (x / (1.0 + x)) * von_karman(inj.corner_hz);
        }
        s
    }
}

/// Gust-protocol shape parameters, relative to the mean speed.
#[derive(Debug, Clone, Copy)]
pub struct GustProtocol {
    pub amplitude_fraction: f64,
    pub width: f64,
    pub spacing: f64,
    /// Background turbulence level before the final rescale, fraction of mean.
    pub background_ti: f64,
}

pub const GUST_PROTOCOL: GustProtocol = GustProtocol {
    amplitude_fraction: 0.40,
    width: 0.12,
    spacing: 30.0,
    background_ti: 0.003,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindSeries {
    pub samples: Vec<f64>,
    pub rate: f64,
    pub mode: Option<GridMode>,
    pub seed: u64,
    pub mean: f64,
}

impl WindSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_abs_deviation(&self) -> f64 {
        let m = crate::linalg::mean(&self.samples);
        self.samples
            .iter()
            .map(|v| (v - m).abs())
            .fold(0.0, f64::max)
    }
}

fn check_timing(duration: f64, rate: f64) -> Result<usize> {
    if !(duration > 0.0) {
        return Err(Error::invalid(format!(
            "duration must be positive, got {duration}"
        )));
    }
    if !(rate > 0.0) {
        return Err(Error::invalid(format!("rate must be positive, got {rate}")));
    }
    let n = (duration * rate).round() as usize;
    if n == 0 {
        return Err(Error::invalid("duration * rate rounds to zero samples"));
    }
    Ok(n)
}

/// Zero-mean, unit-variance noise with the given spectral shape.
fn shaped_noise(n: usize, rate: f64, rng: &mut ChaCha8Rng, spectrum: &ModeSpectrum) -> Vec<f64> {
    let mut bins = vec![Complex::new(0.0, 0.0); n];
    let half = n / 2;
    for k in 1..=half {
        let f = k as f64 * rate / n as f64;
        let amp = spectrum.density(f).sqrt();
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        if 2 * k == n {
            bins[k] = Complex::new(amp * phase.cos(), 0.0);
        } else {
            let z = Complex::from_polar(amp, phase);
            bins[k] = z;
            bins[n - k] = z.conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut bins);
    let mut x: Vec<f64> = bins.iter().map(|c| c.re).collect();
    normalize(&mut x);
    x
}

fn normalize(x: &mut [f64]) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
    for v in x.iter_mut() {
        *v = if sd > 0.0 { (*v - m) / sd } else { 0.0 };
    }
}

/// Synthesises a wind series for a grid mode at the given mean speed.
pub fn generate(
    mode: GridMode,
    mean: f64,
    duration: f64,
    rate: f64,
    seed: u64,
) -> Result<WindSeries> {
    let n = check_timing(duration, rate)?;
    if rate < MIN_RATE_HZ {
        return Err(Error::invalid(format!(
            "rate must be at least {MIN_RATE_HZ} Hz, got {rate}"
        )));
    }
    if !(mean > 0.0) {
        return Err(Error::invalid(format!(
            "mean speed must be positive, got {mean}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fluct = shaped_noise(n, rate, &mut rng, &mode.spectrum());
    if mode == GridMode::Gusts {
        let g = GUST_PROTOCOL;
        let gusts = gust_train(
            duration,
            rate,
            mean,
            g.amplitude_fraction * mean,
            g.width,
            g.spacing,
            rng.random(),
        )?;
        for (f, v) in fluct.iter_mut().zip(&gusts.samples) {
            *f = g.background_ti * mean * *f + (v - mean);
        }
        normalize(&mut fluct);
    }
    let sigma = mode.target_ti() / 100.0 * mean;
    let samples: Vec<f64> = fluct.iter().map(|f| mean + sigma * f).collect();
    if samples.iter().any(|v| *v <= 0.0) {
        return Err(Error::Numeric("synthesised wind reached zero".into()));
    }
    Ok(WindSeries {
        samples,
        rate,
        mode: Some(mode),
        seed,
        mean,
    })
}

/// `100 * std / mean` with the population standard deviation.
pub fn turbulence_intensity(series: &WindSeries) -> Result<f64> {
    turbulence_intensity_of(&series.samples)
}

pub fn turbulence_intensity_of(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("turbulence intensity of an empty series"));
    }
    let m = crate::linalg::mean(samples);
    if m == 0.0 {
        return Err(Error::invalid(
            "turbulence intensity undefined for zero mean",
        ));
    }
    Ok(100.0 * crate::linalg::variance(samples).sqrt() / m)
}

/// Ricker wavelet `(1 - (t/w)^2) exp(-t^2 / (2 w^2))`.
pub fn ricker(t: f64, width: f64) -> f64 {
    let x = (t / width).powi(2);
    (1.0 - x) * (-0.5 * x).exp()
}

/// Support half-width of one gust, in multiples of its width.
const GUST_REACH: f64 = 8.0;

/// Mean-level series with mexican-hat gusts centred at regular spacing plus
/// seeded jitter of up to ±10 % of the spacing.
pub fn gust_train(
    duration: f64,
    rate: f64,
    mean: f64,
    amplitude: f64,
    gust_width: f64,
    spacing: f64,
    seed: u64,
) -> Result<WindSeries> {
    let n = check_timing(duration, rate)?;
    if !(gust_width > 0.0) {
        return Err(Error::invalid("gust width must be positive"));
    }
    if !(spacing > gust_width) {
        return Err(Error::invalid("gust spacing must exceed the gust width"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centres = Vec::new();
    let mut slot = 0.0;
    while slot < duration {
        let jitter = rng.random_range(-0.1..0.1) * spacing;
        centres.push(slot + 0.5 * spacing + jitter);
        slot += spacing;
    }
    let reach = GUST_REACH * gust_width;
    let samples: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 / rate;
            mean + amplitude
                * centres
                    .iter()
                    .filter(|c| (t - **c).abs() < reach)
                    .map(|c| ricker(t - c, gust_width))
                    .sum::<f64>()
        })
        .collect();
    if let Some(bad) = samples.iter().find(|v| **v <= 0.0) {
        return Err(Error::invalid(format!(
            "gust amplitude drives wind to {bad:.3} m/s (must stay positive)"
        )));
    }
    Ok(WindSeries {
        samples,
        rate,
        mode: None,
        seed,
        mean,
    })
}

/// Summary statistics emitted alongside generated series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindStats {
    pub mean: f64,
    pub ti_percent: f64,
    /// Log-log PSD slope over the decade above 10 Hz (capped at Nyquist).
    pub psd_slope: Option<f64>,
    pub max_abs_deviation: f64,
}

pub fn wind_stats(series: &WindSeries) -> Result<WindStats> {
    let seg = 4096.min(series.len());
    let psd = welch_psd(&series.samples, series.rate, seg, seg / 2)?;
    let top = 100.0f64.min(series.rate / 2.0);
    Ok(WindStats {
        mean: crate::linalg::mean(&series.samples),
        ti_percent: turbulence_intensity(series)?,
        psd_slope: psd.loglog_slope(10.0, top),
        max_abs_deviation: series.max_abs_deviation(),
    })
}
