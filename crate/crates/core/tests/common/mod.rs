#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sprc_core::plant::{simulate_lti, StateSpaceModel};
use sprc_core::sysid::{rls_update, DeltaBuffer, MarkovEstimate};

pub fn white(rng: &mut ChaCha8Rng, n: usize, dim: usize, std: f64) -> Vec<DVector<f64>> {
    let nd = Normal::new(0.0, std).unwrap();
    (0..n)
        .map(|_| DVector::from_fn(dim, |_, _| nd.sample(rng)))
        .collect()
}

/// P-periodic disturbance made of two harmonics per channel.
pub fn periodic(n: usize, dim: usize, period: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * (k % period) as f64 / period as f64;
            DVector::from_fn(dim, |i, _| {
                (a + i as f64).sin() + 0.5 * (2.0 * a + 0.3 * i as f64).cos()
            })
        })
        .collect()
}

pub struct IdData {
    pub u: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
}

/// White-input open-loop data with a P-periodic disturbance and innovation
/// noise scaled to `noise_frac` of the noise-free output std.
pub fn open_loop_data(
    model: &StateSpaceModel,
    n: usize,
    period: usize,
    noise_frac: f64,
    seed: u64,
) -> IdData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = white(&mut rng, n, model.r(), 1.0);
    let d = periodic(n, model.m(), period);
    let x0 = DVector::zeros(model.n());
    let zeros = vec![DVector::zeros(model.l()); n];
    let clean = simulate_lti(model, &u, &d, &zeros, &x0).unwrap();
    let e = if noise_frac > 0.0 {
        let flat: Vec<f64> = clean.iter().flat_map(|v| v.iter().copied()).collect();
        let m = flat.iter().sum::<f64>() / flat.len() as f64;
        let s = (flat.iter().map(|v| (v - m).powi(2)).sum::<f64>() / flat.len() as f64).sqrt();
        white(&mut rng, n, model.l(), noise_frac * s)
    } else {
        zeros
    };
    let y = simulate_lti(model, &u, &d, &e, &x0).unwrap();
    IdData { u, y }
}

/// Regressor/target pairs of a data set.
pub fn pairs(data: &IdData, period: usize, past: usize) -> Vec<(DVector<f64>, DVector<f64>)> {
    let (r, l) = (data.u[0].len(), data.y[0].len());
    let mut buf = DeltaBuffer::new(period, past, r, l).unwrap();
    let mut out = Vec::new();
    for (u, y) in data.u.iter().zip(&data.y) {
        let k = buf.push(u, y).unwrap();
        if k >= period + past {
            out.push((buf.regressor(k).unwrap(), buf.delta_y(k).unwrap()));
        }
    }
    out
}

pub fn identify(
    pairs: &[(DVector<f64>, DVector<f64>)],
    past: usize,
    r: usize,
    l: usize,
    lambda: f64,
) -> MarkovEstimate {
    let mut est = MarkovEstimate::new(past, r, l, lambda).unwrap();
    for (z, t) in pairs {
        rls_update(&mut est, z, t).unwrap();
    }
    est
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}
