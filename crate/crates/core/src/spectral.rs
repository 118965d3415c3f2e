//! Welch power-spectral-density estimation.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

/// One-sided PSD estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub frequencies: Vec<f64>,
    /// Power density, units²/Hz.
    pub power: Vec<f64>,
}

impl Psd {
    pub fn resolution(&self) -> f64 {
        if self.frequencies.len() > 1 {
            self.frequencies[1] - self.frequencies[0]
        } else {
            0.0
        }
    }

    /// Integrated power over `[lo, hi]` (rectangle rule on the bin grid).
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        let df = self.resolution();
        self.frequencies
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, p)| p * df)
            .sum()
    }

    /// Least-squares slope of log10(power) against log10(frequency) over `[lo, hi]`.
    pub fn loglog_slope(&self, lo: f64, hi: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .frequencies
            .iter()
            .zip(&self.power)
            .filter(|(f, p)| **f >= lo && **f <= hi && **p > 0.0)
            .map(|(f, p)| (f.log10(), p.log10()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

/// Averaged modified periodogram with a Hann window and mean removal per
/// segment. Scaling is a density: summing `power * df` recovers the variance.
pub fn welch_psd(series: &[f64], rate: f64, segment_len: usize, overlap: usize) -> Result<Psd> {
    if !(rate > 0.0) {
        return Err(Error::invalid("sample rate must be positive"));
    }
    if segment_len < 2 || segment_len > series.len() {
        return Err(Error::invalid(format!(
            "segment length {segment_len} not in [2, {}]",
            series.len()
        )));
    }
    if overlap >= segment_len {
        return Err(Error::invalid("overlap must be shorter than the segment"));
    }
    let step = segment_len - overlap;
    let window: Vec<f64> = (0..segment_len)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / segment_len as f64).cos())
        .collect();
    let wss: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(segment_len);
    let bins = segment_len / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex::new(0.0, 0.0); segment_len];
    let mut segments = 0usize;
    let mut start = 0;
    while start + segment_len <= series.len() {
        let seg = &series[start..start + segment_len];
        let mean = seg.iter().sum::<f64>() / segment_len as f64;
        for (b, (x, w)) in buf.iter_mut().zip(seg.iter().zip(&window)) {
            *b = Complex::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let norm = 1.0 / (rate * wss * segments as f64);
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let one_sided = if k == 0 || (segment_len % 2 == 0 && k == bins - 1) { 1.0 } else { 2.0 };
            p * norm * one_sided
        })
        .collect();
    let frequencies = (0..bins).map(|k| k as f64 * rate / segment_len as f64).collect();
    Ok(Psd { frequencies, power })
}
