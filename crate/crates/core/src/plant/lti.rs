//! Discrete LTI systems in innovation form, used as ground truth for the
//! identification and predictor tests.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition_number, spectral_radius};

/// `x_{k+1} = A x_k + B u_k + E d_k + K e_k`, `y_k = C x_k + F d_k + e_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

impl StateSpaceModel {
    /// Builds a model after checking that all block dimensions agree.
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        e: DMatrix<f64>,
        f: DMatrix<f64>,
        k: DMatrix<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() {
            return Err(Error::invalid("A must be square"));
        }
        let (r, l, m) = (b.ncols(), c.nrows(), e.ncols());
        let checks = [
            (b.nrows() == n, "B rows must equal n"),
            (c.ncols() == n, "C columns must equal n"),
            (e.nrows() == n, "E rows must equal n"),
            (f.nrows() == l && f.ncols() == m, "F must be l x m"),
            (k.nrows() == n && k.ncols() == l, "K must be n x l"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::invalid(msg));
            }
        }
        let _ = r;
        Ok(Self { a, b, c, e, f, k })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn r(&self) -> usize {
        self.b.ncols()
    }
    pub fn l(&self) -> usize {
        self.c.nrows()
    }
    pub fn m(&self) -> usize {
        self.e.ncols()
    }

    /// Predictor-form state matrix `A - K C`.
    pub fn a_tilde(&self) -> DMatrix<f64> {
        &self.a - &self.k * &self.c
    }

    /// Predictor-form disturbance matrix `E - K F`. It drops out of the
    /// period-differenced system and is only kept for completeness.
    pub fn e_tilde(&self) -> DMatrix<f64> {
        &self.e - &self.k * &self.f
    }

    /// Markov parameters laid out as
    /// `[C Ã^{p-1} B ... C B | C Ã^{p-1} K ... C K]`.
    pub fn markov_parameters(&self, p: usize) -> DMatrix<f64> {
        let (r, l) = (self.r(), self.l());
        let at = self.a_tilde();
        let mut out = DMatrix::zeros(l, (r + l) * p);
        // powers[j] = C Ã^j
        let mut cj = self.c.clone();
        for j in 0..p {
            let col = p - 1 - j;
            out.view_mut((0, col * r), (l, r)).copy_from(&(&cj * &self.b));
            out.view_mut((0, r * p + col * l), (l, l))
                .copy_from(&(&cj * &self.k));
            cj = &cj * &at;
        }
        out
    }

    /// Spectral norm of `C Ã^j B`.
    pub fn markov_norm_u(&self, j: usize) -> f64 {
        let at = self.a_tilde();
        let mut m = self.c.clone();
        for _ in 0..j {
            m = &m * &at;
        }
        (&m * &self.b).norm()
    }
}

/// Exact simulation of the model from `x0`.
pub fn simulate_lti(
    model: &StateSpaceModel,
    u: &[DVector<f64>],
    d: &[DVector<f64>],
    e: &[DVector<f64>],
    x0: &DVector<f64>,
) -> Result<Vec<DVector<f64>>> {
    let len = u.len();
    if d.len() != len || e.len() != len {
        return Err(Error::invalid(format!(
            "sequence lengths differ: u={}, d={}, e={}",
            u.len(),
            d.len(),
            e.len()
        )));
    }
    if x0.len() != model.n() {
        return Err(Error::invalid(format!(
            "x0 has length {}, model has n={}",
            x0.len(),
            model.n()
        )));
    }
    let mut x = x0.clone();
    let mut y = Vec::with_capacity(len);
    for k in 0..len {
        if u[k].len() != model.r() || d[k].len() != model.m() || e[k].len() != model.l() {
            return Err(Error::invalid(format!("dimension mismatch at sample {k}")));
        }
        y.push(&model.c * &x + &model.f * &d[k] + &e[k]);
        x = &model.a * &x + &model.b * &u[k] + &model.e * &d[k] + &model.k * &e[k];
    }
    Ok(y)
}

const BENCHMARK_RETRIES: usize = 200;
const MAX_TILDE_RADIUS: f64 = 0.3;
const MAX_OPEN_LOOP_RADIUS: f64 = 0.95;

/// Random stable, controllable and observable model, reproducible per seed.
///
/// The predictor matrix `Ã` is drawn with eigenvalue magnitudes at most 0.3 so
/// the Markov sequence is negligible after a handful of lags.
pub fn make_benchmark_plant(
    seed: u64,
    n: usize,
    r: usize,
    l: usize,
    m: usize,
) -> Result<StateSpaceModel> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if r != l || r == 0 {
        return Err(Error::invalid(format!(
            "benchmark plants need r = l >= 1 (got r={r}, l={l})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..BENCHMARK_RETRIES {
        let candidate = draw_candidate(&mut rng, n, r, l, m);
        if satisfies_invariants(&candidate) {
            return Ok(candidate);
        }
    }
    Err(Error::Generation(format!(
        "no admissible model after {BENCHMARK_RETRIES} draws (seed {seed})"
    )))
}

fn randn(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

fn draw_candidate(rng: &mut ChaCha8Rng, n: usize, r: usize, l: usize, m: usize) -> StateSpaceModel {
    // Real block-diagonal Ã with complex pairs as scaled rotations.
    let mut diag = DMatrix::zeros(n, n);
    let mut i = 0;
    while i < n {
        let mag = rng.random_range(0.05..MAX_TILDE_RADIUS);
        if i + 1 < n && rng.random_bool(0.5) {
            let ang: f64 = rng.random_range(0.2..2.8);
            let (s, c) = ang.sin_cos();
            diag[(i, i)] = mag * c;
            diag[(i, i + 1)] = -mag * s;
            diag[(i + 1, i)] = mag * s;
            diag[(i + 1, i + 1)] = mag * c;
            i += 2;
        } else {
            diag[(i, i)] = if rng.random_bool(0.5) { mag } else { -mag };
            i += 1;
        }
    }
    let t = DMatrix::identity(n, n) + randn(rng, n, n, 0.3);
    let a_tilde = match t.clone().try_inverse() {
        Some(ti) => &t * diag * ti,
        None => diag,
    };
    let b = randn(rng, n, r, 1.0);
    let c = randn(rng, l, n, 1.0);
    let k = randn(rng, n, l, 0.3);
    let e = randn(rng, n, m, 1.0);
    let f = randn(rng, l, m, 0.5);
    let a = &a_tilde + &k * &c;
    StateSpaceModel { a, b, c, e, f, k }
}

fn satisfies_invariants(model: &StateSpaceModel) -> bool {
    let n = model.n();
    if spectral_radius(&model.a) >= MAX_OPEN_LOOP_RADIUS
        || spectral_radius(&model.a_tilde()) >= MAX_TILDE_RADIUS + 1e-9
    {
        return false;
    }
    let mut ctrb = DMatrix::zeros(n, n * model.r());
    let mut block = model.b.clone();
    for j in 0..n {
        ctrb.view_mut((0, j * model.r()), (n, model.r())).copy_from(&block);
        block = &model.a * &block;
    }
    let mut obsv = DMatrix::zeros(n * model.l(), n);
    let mut row = model.c.clone();
    for j in 0..n {
        obsv.view_mut((j * model.l(), 0), (model.l(), n)).copy_from(&row);
        row = &row * &model.a;
    }
    condition_number(&(&ctrb * ctrb.transpose())) < 1e8
        && condition_number(&(obsv.transpose() * &obsv)) < 1e8
}
