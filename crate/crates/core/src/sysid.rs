//! Recursive identification of predictor Markov parameters from
//! period-differenced input/output data.
//!
//! With `δx_k = x_k - x_{k-P}` every exactly `P`-periodic disturbance drops
//! out, leaving the regression
//!
//! ```text
//! δy_k ≈ Ξ [δu_{k-p} .. δu_{k-1}; δy_{k-p} .. δy_{k-1}] + δe_k
//! Ξ    = [C Ã^{p-1} B .. C B | C Ã^{p-1} K .. C K]
//! ```
//!
//! which [`MarkovEstimate`] solves by exponentially weighted least squares in
//! square-root information form.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::StateSpaceModel;

pub const DEFAULT_FORGETTING: f64 = 0.99999;
/// Diagonal of the initial information matrix.
pub const DEFAULT_PRIOR_INFORMATION: f64 = 1e-6;

/// Rolling history long enough to form period-differenced regressors.
#[derive(Debug, Clone)]
pub struct DeltaBuffer {
    period: usize,
    past: usize,
    r: usize,
    l: usize,
    u: VecDeque<DVector<f64>>,
    y: VecDeque<DVector<f64>>,
    /// Index of the next sample to be pushed.
    next: usize,
}

impl DeltaBuffer {
    pub fn new(period: usize, past: usize, r: usize, l: usize) -> Result<Self> {
        if period == 0 || past == 0 || r == 0 || l == 0 {
            return Err(Error::invalid(
                "delta buffer needs positive period, window and dimensions",
            ));
        }
        Ok(Self {
            period,
            past,
            r,
            l,
            u: VecDeque::with_capacity(period + past + 1),
            y: VecDeque::with_capacity(period + past + 1),
            next: 0,
        })
    }

    pub fn period(&self) -> usize {
        self.period
    }
    pub fn past(&self) -> usize {
        self.past
    }
    pub fn regressor_len(&self) -> usize {
        (self.r + self.l) * self.past
    }

    /// Appends sample `k` and returns `k`.
    pub fn push(&mut self, u: &DVector<f64>, y: &DVector<f64>) -> Result<usize> {
        if u.len() != self.r || y.len() != self.l {
            return Err(Error::invalid(format!(
                "sample dimensions ({}, {}) do not match buffer ({}, {})",
                u.len(),
                y.len(),
                self.r,
                self.l
            )));
        }
        if self.u.len() == self.period + self.past + 1 {
            self.u.pop_front();
            self.y.pop_front();
        }
        self.u.push_back(u.clone());
        self.y.push_back(y.clone());
        self.next += 1;
        Ok(self.next - 1)
    }

    /// Number of samples pushed so far.
    pub fn samples(&self) -> usize {
        self.next
    }

    fn slot(&self, k: usize) -> Result<usize> {
        let oldest = self.next - self.u.len();
        if k < oldest || k >= self.next {
            return Err(Error::NotReady(format!(
                "sample {k} outside retained history [{oldest}, {})",
                self.next
            )));
        }
        Ok(k - oldest)
    }

    fn delta(&self, series: &VecDeque<DVector<f64>>, k: usize) -> Result<DVector<f64>> {
        if k < self.period {
            return Err(Error::NotReady(format!(
                "delta at {k} needs {} samples of history",
                self.period
            )));
        }
        let now = self.slot(k)?;
        let then = self.slot(k - self.period)?;
        Ok(&series[now] - &series[then])
    }

    pub fn delta_u(&self, k: usize) -> Result<DVector<f64>> {
        self.delta(&self.u, k)
    }

    pub fn delta_y(&self, k: usize) -> Result<DVector<f64>> {
        self.delta(&self.y, k)
    }

    /// `[δu_{k-p}; ..; δu_{k-1}; δy_{k-p}; ..; δy_{k-1}]`, the regressor that
    /// predicts `δy_k`.
    pub fn regressor(&self, k: usize) -> Result<DVector<f64>> {
        if k < self.period + self.past {
            return Err(Error::NotReady(format!(
                "regressor at {k} needs {} samples of history",
                self.period + self.past
            )));
        }
        let (r, l, p) = (self.r, self.l, self.past);
        let mut z = DVector::zeros((r + l) * p);
        for i in 0..p {
            let j = k - p + i;
            z.rows_mut(i * r, r).copy_from(&self.delta_u(j)?);
            z.rows_mut(r * p + i * l, l).copy_from(&self.delta_y(j)?);
        }
        Ok(z)
    }
}

/// Exponentially weighted least-squares estimate of `Ξ`.
///
/// The information matrix is kept as its upper-triangular Cholesky factor
/// `R` together with `S = R Ξᵀ`; each update rescales both by `sqrt(λ)` and
/// folds the new row in with Givens rotations.
#[derive(Debug, Clone)]
pub struct MarkovEstimate {
    r_factor: DMatrix<f64>,
    s: DMatrix<f64>,
    lambda: f64,
    sqrt_lambda: f64,
    p: usize,
    r: usize,
    l: usize,
    samples: u64,
    cached: Option<DMatrix<f64>>,
}

impl MarkovEstimate {
    pub fn new(p: usize, r: usize, l: usize, lambda: f64) -> Result<Self> {
        Self::with_prior(p, r, l, lambda, DEFAULT_PRIOR_INFORMATION)
    }

    pub fn with_prior(p: usize, r: usize, l: usize, lambda: f64, prior: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::invalid(format!(
                "forgetting factor must lie in (0, 1], got {lambda}"
            )));
        }
        if !(prior > 0.0) {
            return Err(Error::invalid("prior information must be positive"));
        }
        if p == 0 || r == 0 || l == 0 {
            return Err(Error::invalid("Markov estimate needs positive dimensions"));
        }
        let d = (r + l) * p;
        Ok(Self {
            r_factor: DMatrix::identity(d, d) * prior.sqrt(),
            s: DMatrix::zeros(d, l),
            lambda,
            sqrt_lambda: lambda.sqrt(),
            p,
            r,
            l,
            samples: 0,
            cached: Some(DMatrix::zeros(l, d)),
        })
    }

    pub fn past(&self) -> usize {
        self.p
    }
    pub fn inputs(&self) -> usize {
        self.r
    }
    pub fn outputs(&self) -> usize {
        self.l
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn samples(&self) -> u64 {
        self.samples
    }
    pub fn regressor_len(&self) -> usize {
        (self.r + self.l) * self.p
    }

    /// Current `Ξ̂`, `l × (r+l)p`.
    pub fn xi(&mut self) -> DMatrix<f64> {
        if let Some(x) = &self.cached {
            return x.clone();
        }
        let x = self.solve();
        self.cached = Some(x.clone());
        x
    }

    /// Same as [`Self::xi`] without touching the cache.
    pub fn current(&self) -> DMatrix<f64> {
        match &self.cached {
            Some(x) => x.clone(),
            None => self.solve(),
        }
    }

    fn solve(&self) -> DMatrix<f64> {
        let d = self.regressor_len();
        let mut xt = self.s.clone();
        // Back substitution on the triangular factor.
        for i in (0..d).rev() {
            let piv = self.r_factor[(i, i)];
            for c in 0..self.l {
                let mut acc = xt[(i, c)];
                for j in i + 1..d {
                    acc -= self.r_factor[(i, j)] * xt[(j, c)];
                }
                xt[(i, c)] = if piv != 0.0 { acc / piv } else { 0.0 };
            }
        }
        xt.transpose()
    }

    /// Snapshot of the estimate suitable for JSON export.
    pub fn snapshot(&self) -> MarkovSnapshot {
        MarkovSnapshot {
            xi: self.current(),
            lambda: self.lambda,
            samples: self.samples,
            past: self.p,
            inputs: self.r,
            outputs: self.l,
        }
    }
}

/// One recursive update with regressor `z` and target `δy_k`.
pub fn rls_update(est: &mut MarkovEstimate, z: &DVector<f64>, target: &DVector<f64>) -> Result<()> {
    let d = est.regressor_len();
    let l = est.l;
    if z.len() != d || target.len() != l {
        return Err(Error::invalid(format!(
            "update dimensions ({}, {}) do not match estimate ({d}, {l})",
            z.len(),
            target.len()
        )));
    }
    if !z.iter().chain(target.iter()).all(|v| v.is_finite()) {
        return Err(Error::Numeric("non-finite identification data".into()));
    }
    if est.lambda < 1.0 {
        est.r_factor *= est.sqrt_lambda;
        est.s *= est.sqrt_lambda;
    }
    est.samples += 1;
    if z.iter().all(|v| *v == 0.0) {
        // Pure forgetting leaves R⁻¹S unchanged.
        return Ok(());
    }
    let mut row: Vec<f64> = z.iter().copied().collect();
    let mut rhs: Vec<f64> = target.iter().copied().collect();
    let rf = &mut est.r_factor;
    for i in 0..d {
        let b = row[i];
        if b == 0.0 {
            continue;
        }
        let a = rf[(i, i)];
        let h = a.hypot(b);
        let (c, s) = (a / h, b / h);
        rf[(i, i)] = h;
        row[i] = 0.0;
        for j in i + 1..d {
            let (x, w) = (rf[(i, j)], row[j]);
            rf[(i, j)] = c * x + s * w;
            row[j] = c * w - s * x;
        }
        for (j, w) in rhs.iter_mut().enumerate() {
            let x = est.s[(i, j)];
            est.s[(i, j)] = c * x + s * *w;
            *w = c * *w - s * x;
        }
    }
    est.cached = None;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovSnapshot {
    pub xi: DMatrix<f64>,
    pub lambda: f64,
    pub samples: u64,
    pub past: usize,
    pub inputs: usize,
    pub outputs: usize,
}

#[derive(Debug, Clone)]
pub struct BatchSolution {
    pub xi: DMatrix<f64>,
    pub rank: usize,
    /// Set when the weighted regressor matrix is rank deficient; `xi` is then
    /// the minimum-norm solution.
    pub rank_deficient: bool,
}

/// Weighted least squares over a stored history, sample `i` of `N` weighted
/// by `λ^{N-1-i}`. Solved by SVD so rank deficiency yields the minimum-norm
/// solution.
pub fn batch_solve(history: &[(DVector<f64>, DVector<f64>)], lambda: f64) -> Result<BatchSolution> {
    let Some((z0, y0)) = history.first() else {
        return Err(Error::invalid("batch solve over an empty history"));
    };
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::invalid(format!(
            "forgetting factor must lie in (0, 1], got {lambda}"
        )));
    }
    let (d, l, n) = (z0.len(), y0.len(), history.len());
    let mut zm = DMatrix::zeros(n, d);
    let mut ym = DMatrix::zeros(n, l);
    for (i, (z, y)) in history.iter().enumerate() {
        if z.len() != d || y.len() != l {
            return Err(Error::invalid(format!("sample {i} has inconsistent dimensions")));
        }
        let w = lambda.powf(0.5 * (n - 1 - i) as f64);
        zm.row_mut(i).copy_from(&(z.transpose() * w));
        ym.row_mut(i).copy_from(&(y.transpose() * w));
    }
    let svd = zm.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = smax * (n.max(d) as f64) * f64::EPSILON;
    let rank = svd.rank(tol);
    let xt = svd
        .solve(&ym, tol)
        .map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(BatchSolution {
        xi: xt.transpose(),
        rank,
        rank_deficient: rank < d,
    })
}

/// Condition number of the block-Hankel matrix of `δu` (`period` lag) with
/// `order` block rows. `+inf` for rank-deficient excitation.
pub fn persistency_metric(u: &[DVector<f64>], period: usize, order: usize) -> f64 {
    if order == 0 || u.len() < period + order {
        return f64::INFINITY;
    }
    let r = u[0].len();
    let du: Vec<DVector<f64>> = (period..u.len()).map(|k| &u[k] - &u[k - period]).collect();
    let cols = du.len() + 1 - order;
    if cols < r * order {
        return f64::INFINITY;
    }
    let mut h = DMatrix::zeros(r * order, cols);
    for i in 0..order {
        for c in 0..cols {
            h.view_mut((i * r, c), (r, 1)).copy_from(&du[i + c]);
        }
    }
    crate::linalg::condition_number(&h)
}

/// Smallest `j ≥ 1` with `‖C Ã^j B‖ < rel_tol ‖C B‖`, capped at `max`.
pub fn choose_past_window(model: &StateSpaceModel, rel_tol: f64, max: usize) -> usize {
    let base = model.markov_norm_u(0);
    (1..=max)
        .find(|&j| model.markov_norm_u(j) < rel_tol * base)
        .unwrap_or(max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn regressor_before_history_is_not_ready() {
        let mut b = DeltaBuffer::new(3, 2, 1, 1).unwrap();
        for k in 0..5 {
            b.push(&v(&[k as f64]), &v(&[0.0])).unwrap();
            assert!(matches!(b.regressor(k), Err(Error::NotReady(_))));
        }
        b.push(&v(&[5.0]), &v(&[0.0])).unwrap();
        assert!(b.regressor(5).is_ok());
    }

    #[test]
    fn periodic_signals_give_zero_regressor() {
        let period = 7;
        let mut b = DeltaBuffer::new(period, 3, 2, 2).unwrap();
        for k in 0..40 {
            let ph = (k % period) as f64;
            b.push(&v(&[ph.sin(), ph * 0.3]), &v(&[ph.cos(), -ph])).unwrap();
            if k >= period + 3 {
                let z = b.regressor(k).unwrap();
                assert_eq!(z.len(), 12);
                assert!(z.iter().all(|x| *x == 0.0));
            }
        }
    }

    #[test]
    fn unit_window_regressor_layout() {
        let period = 4;
        let mut b = DeltaBuffer::new(period, 1, 1, 1).unwrap();
        let u = |k: usize| (k * k) as f64;
        let y = |k: usize| (3 * k) as f64 + 0.5 * (k as f64).sin();
        for k in 0..12 {
            b.push(&v(&[u(k)]), &v(&[y(k)])).unwrap();
        }
        let k = 11;
        let z = b.regressor(k).unwrap();
        assert_eq!(z[0], u(k - 1) - u(k - 1 - period));
        assert_eq!(z[1], y(k - 1) - y(k - 1 - period));
    }

    #[test]
    fn zero_regressors_leave_estimate_unchanged() {
        let mut est = MarkovEstimate::new(2, 1, 1, 0.99).unwrap();
        let zero = DVector::zeros(4);
        for _ in 0..100 {
            rls_update(&mut est, &zero, &v(&[3.0])).unwrap();
        }
        assert!(est.xi().iter().all(|x| *x == 0.0));
        assert_eq!(est.samples(), 100);
    }

    #[test]
    fn nan_input_is_numeric_error() {
        let mut est = MarkovEstimate::new(1, 1, 1, 1.0).unwrap();
        let e = rls_update(&mut est, &v(&[f64::NAN, 1.0]), &v(&[0.0]));
        assert!(matches!(e, Err(Error::Numeric(_))));
    }

    #[test]
    fn single_sample_minimum_norm() {
        let sol = batch_solve(&[(v(&[1.0, 0.0]), v(&[2.0]))], 1.0).unwrap();
        assert!(sol.rank_deficient);
        assert_eq!(sol.rank, 1);
        assert!((sol.xi[(0, 0)] - 2.0).abs() < 1e-14);
        assert!(sol.xi[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn invalid_forgetting_rejected() {
        assert!(MarkovEstimate::new(1, 1, 1, 0.0).is_err());
        assert!(MarkovEstimate::new(1, 1, 1, 1.5).is_err());
    }

    #[test]
    fn persistency_of_constant_and_sinusoid() {
        let constant: Vec<_> = (0..500).map(|_| v(&[1.0])).collect();
        assert!(persistency_metric(&constant, 10, 4).is_infinite());
        // One sinusoid spans a rank-2 Hankel space.
        let n = 37;
        let sine: Vec<_> = (0..2000)
            .map(|k| v(&[(std::f64::consts::TAU * k as f64 / n as f64).sin()]))
            .collect();
        assert!(persistency_metric(&sine, 33, 3).is_infinite());
        assert!(persistency_metric(&sine, 33, 2).is_finite());
    }

    #[test]
    fn snapshot_round_trips() {
        let mut est = MarkovEstimate::new(2, 1, 1, 0.999).unwrap();
        rls_update(&mut est, &v(&[1.0, 2.0, 3.0, 4.0]), &v(&[1.0])).unwrap();
        let snap = est.snapshot();
        let json = serde_json::to_string(&snap).unwrap();
        let back: MarkovSnapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(back, snap);
    }
}
