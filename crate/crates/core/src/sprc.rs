//! Subspace predictive repetitive control.
//!
//! Once per rotor revolution the Markov estimate is lifted into a
//! period-`P` predictor, projected onto 1P/2P quadrature sinusoids and turned
//! into a state-feedback gain by Riccati iteration. Between revolutions the
//! pitch command is a pure function of azimuth and the current amplitudes θ.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, pinv, symmetrize};
use crate::sysid::{rls_update, DeltaBuffer, MarkovEstimate};

/// Smallest supported lifting period.
pub const MIN_BASIS_PERIOD: usize = 9;

/// `[sin ψ, cos ψ, sin 2ψ, cos 2ψ, ...]` truncated to `harmonics` pairs.
fn harmonic_row(psi: f64, harmonics: usize) -> impl Iterator<Item = f64> {
    (1..=harmonics).flat_map(move |h| {
        let (s, c) = (h as f64 * psi).sin_cos();
        [s, c]
    })
}

/// Sinusoidal basis `φ` for a lifted input or output window.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    pub phi: DMatrix<f64>,
    pub phi_pinv: DMatrix<f64>,
    pub period: usize,
    pub r: usize,
    pub harmonics: usize,
}

impl BasisMatrix {
    /// Length of the amplitude vector, `2 · harmonics · r`.
    pub fn dim(&self) -> usize {
        2 * self.harmonics * self.r
    }

    fn from_azimuths(psi: &[f64], r: usize, harmonics: usize, with_offset: bool) -> Result<Self> {
        let period = psi.len();
        if period < MIN_BASIS_PERIOD {
            return Err(Error::invalid(format!(
                "basis period must exceed {}, got {period}",
                MIN_BASIS_PERIOD - 1
            )));
        }
        if r == 0 || !(1..=2).contains(&harmonics) {
            return Err(Error::invalid("basis needs r >= 1 and 1 or 2 harmonics"));
        }
        let cols = 2 * harmonics;
        let mut phi = DMatrix::zeros(r * period, cols * r);
        for (i, &a) in psi.iter().enumerate() {
            for (c, v) in harmonic_row(a, harmonics).enumerate() {
                for ch in 0..r {
                    phi[(i * r + ch, c * r + ch)] = v;
                }
            }
        }
        let phi_pinv = if with_offset {
            // Least-squares fit with a per-channel offset and any uncontrolled
            // harmonic as nuisance terms; over a partial revolution they are
            // not orthogonal to the controlled sinusoids.
            let nuisance: Vec<Box<dyn Fn(f64) -> f64>> = if harmonics == 1 {
                vec![
                    Box::new(|_| 1.0),
                    Box::new(|a: f64| (2.0 * a).sin()),
                    Box::new(|a: f64| (2.0 * a).cos()),
                ]
            } else {
                vec![Box::new(|_| 1.0)]
            };
            let extra = nuisance.len();
            let mut aug = DMatrix::zeros(r * period, (cols + extra) * r);
            aug.view_mut((0, 0), (r * period, cols * r)).copy_from(&phi);
            for (i, &a) in psi.iter().enumerate() {
                for (j, f) in nuisance.iter().enumerate() {
                    for ch in 0..r {
                        aug[(i * r + ch, (cols + j) * r + ch)] = f(a);
                    }
                }
            }
            pinv(&aug).rows(0, cols * r).into_owned()
        } else {
            pinv(&phi)
        };
        Ok(Self {
            phi,
            phi_pinv,
            period,
            r,
            harmonics,
        })
    }
}

/// Uniform basis with row block `i` (`i = 1..=P`) equal to
/// `[sin(2πi/P), cos(2πi/P), sin(4πi/P), cos(4πi/P)] ⊗ I_r`.
pub fn build_basis(period: usize, r: usize) -> Result<BasisMatrix> {
    build_basis_with(period, r, 2)
}

pub fn build_basis_with(period: usize, r: usize, harmonics: usize) -> Result<BasisMatrix> {
    let psi: Vec<f64> = (1..=period)
        .map(|i| TAU * i as f64 / period as f64)
        .collect();
    BasisMatrix::from_azimuths(&psi, r, harmonics, false)
}

/// Basis evaluated at recorded azimuths. The pseudoinverse is the
/// least-squares sinusoid fit with a free per-channel offset (and free 2P
/// terms when only 1P is controlled).
pub fn azimuth_basis(psi: &[f64], r: usize, harmonics: usize) -> Result<BasisMatrix> {
    BasisMatrix::from_azimuths(psi, r, harmonics, true)
}

/// Lifted period-`P` predictor
/// `Y_{k+P} = Y_k + ΓK_u δU_k + ΓK_y δY_k + H δU_{k+P}`.
#[derive(Debug, Clone)]
pub struct LiftedPredictor {
    pub gk_u: DMatrix<f64>,
    pub gk_y: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub period: usize,
    pub past: usize,
    pub r: usize,
    pub l: usize,
}

impl LiftedPredictor {
    /// Predicted next window from the current window and the differenced
    /// past/future inputs.
    pub fn predict(
        &self,
        y_now: &DVector<f64>,
        du_now: &DVector<f64>,
        dy_now: &DVector<f64>,
        du_next: &DVector<f64>,
    ) -> DVector<f64> {
        y_now + &self.gk_u * du_now + &self.gk_y * dy_now + &self.h * du_next
    }
}

/// Builds the lifted predictor from `Ξ̂ = [Ξ_u | Ξ_y]` with `r` inputs.
pub fn assemble_predictor(xi: &DMatrix<f64>, r: usize, period: usize) -> Result<LiftedPredictor> {
    let l = xi.nrows();
    if r == 0 || l == 0 || xi.ncols() % (r + l) != 0 {
        return Err(Error::invalid(format!(
            "Markov matrix {}x{} incompatible with r = {r}",
            xi.nrows(),
            xi.ncols()
        )));
    }
    let p = xi.ncols() / (r + l);
    if period < p {
        return Err(Error::invalid(format!(
            "period {period} shorter than past window {p}"
        )));
    }
    if !all_finite(xi) {
        return Err(Error::Numeric("non-finite Markov estimate".into()));
    }
    // Coefficient of the input/output delayed by `lag` samples.
    let mu = |lag: usize| xi.view((0, (p - lag) * r), (l, r));
    let my = |lag: usize| xi.view((0, r * p + (p - lag) * l), (l, l));

    let n = period;
    let mut h_t = DMatrix::zeros(l * n, r * n);
    let mut g_t = DMatrix::zeros(l * n, l * n);
    let mut gu_t = DMatrix::zeros(l * n, r * n);
    let mut gy_t = DMatrix::zeros(l * n, l * n);
    for i in 0..n {
        for lag in 1..=p {
            if lag <= i {
                let c = i - lag;
                h_t.view_mut((i * l, c * r), (l, r)).copy_from(&mu(lag));
                g_t.view_mut((i * l, c * l), (l, l)).copy_from(&my(lag));
            } else {
                let c = n + i - lag;
                gu_t.view_mut((i * l, c * r), (l, r)).copy_from(&mu(lag));
                gy_t.view_mut((i * l, c * l), (l, l)).copy_from(&my(lag));
            }
        }
    }
    let solve = |m: DMatrix<f64>| forward_substitute(&g_t, m, l, n, p);
    Ok(LiftedPredictor {
        gk_u: solve(gu_t),
        gk_y: solve(gy_t),
        h: solve(h_t),
        period,
        past: p,
        r,
        l,
    })
}

/// `(I - G)⁻¹ M` for strictly block-lower-triangular `G` with bandwidth `p`.
fn forward_substitute(
    g: &DMatrix<f64>,
    mut m: DMatrix<f64>,
    l: usize,
    n: usize,
    p: usize,
) -> DMatrix<f64> {
    let cols = m.ncols();
    for i in 1..n {
        let mut acc = DMatrix::zeros(l, cols);
        for c in i.saturating_sub(p)..i {
            acc += g.view((i * l, c * l), (l, l)) * m.view((c * l, 0), (l, cols));
        }
        let mut row = m.view_mut((i * l, 0), (l, cols));
        row += acc;
    }
    m
}

/// Projected per-revolution system `X̄_{j+1} = Ā X̄_j + B̄ δθ_{j+1}`.
#[derive(Debug, Clone)]
pub struct ProjectedSystem {
    pub a_bar: DMatrix<f64>,
    pub b_bar: DMatrix<f64>,
}

/// Projects the lifted predictor onto the basis. Requires `r = l`.
pub fn project_predictor(lp: &LiftedPredictor, basis: &BasisMatrix) -> Result<ProjectedSystem> {
    if lp.r != lp.l {
        return Err(Error::invalid(format!(
            "projection needs as many inputs as outputs, got r = {} and l = {}",
            lp.r, lp.l
        )));
    }
    if basis.r != lp.r || basis.period != lp.period {
        return Err(Error::invalid("basis does not match the predictor"));
    }
    let proj = |m: &DMatrix<f64>| &basis.phi_pinv * (m * &basis.phi);
    let gu = proj(&lp.gk_u);
    let gy = proj(&lp.gk_y);
    let hb = proj(&lp.h);
    let nb = basis.dim();
    let mut a = DMatrix::zeros(3 * nb, 3 * nb);
    a.view_mut((0, 0), (nb, nb)).fill_with_identity();
    for row in [0, 2 * nb] {
        a.view_mut((row, nb), (nb, nb)).copy_from(&gu);
        a.view_mut((row, 2 * nb), (nb, nb)).copy_from(&gy);
    }
    let mut b = DMatrix::zeros(3 * nb, nb);
    b.view_mut((0, 0), (nb, nb)).copy_from(&hb);
    b.view_mut((nb, 0), (nb, nb)).fill_with_identity();
    b.view_mut((2 * nb, 0), (nb, nb)).copy_from(&hb);
    Ok(ProjectedSystem { a_bar: a, b_bar: b })
}

fn gain_solve(
    p: &DMatrix<f64>,
    b: &DMatrix<f64>,
    r: &DMatrix<f64>,
    rhs: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let s = symmetrize(&(r + b.transpose() * p * b));
    let chol = s
        .cholesky()
        .ok_or_else(|| Error::Numeric("R + B'PB is not positive definite".into()))?;
    Ok(chol.solve(rhs))
}

/// One Riccati iteration
/// `P' = Q + Āᵀ(P − P B̄ (R + B̄ᵀ P B̄)⁻¹ B̄ᵀ P) Ā`.
pub fn dare_step(
    p: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let bt_p = b.transpose() * p;
    let corr = p * b * gain_solve(p, b, r, &bt_p)?;
    let next = q + a.transpose() * (p - corr) * a;
    if !all_finite(&next) {
        return Err(Error::Numeric("Riccati iteration diverged".into()));
    }
    Ok(symmetrize(&next))
}

/// Relative fixed-point residual `‖step(P) − P‖_F / ‖P‖_F`.
pub fn dare_residual(
    p: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<f64> {
    let next = dare_step(p, a, b, q, r)?;
    Ok((next - p).norm() / p.norm().max(f64::MIN_POSITIVE))
}

/// `K_f = (R + B̄ᵀ P B̄)⁻¹ B̄ᵀ P Ā`
pub fn feedback_gain(
    p: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    gain_solve(p, b, r, &(b.transpose() * p * a))
}

/// Per-revolution controller quantities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControllerState {
    pub theta: DVector<f64>,
    pub delta_theta: DVector<f64>,
    pub y_bar: DVector<f64>,
    pub delta_y_bar: DVector<f64>,
    pub p_r: DMatrix<f64>,
    pub k_f: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub alpha: f64,
    pub beta: f64,
}

impl ControllerState {
    /// Zero state for `nb` basis amplitudes per side with scalar weights.
    pub fn new(nb: usize, q: f64, r: f64, alpha: f64, beta: f64) -> Self {
        Self {
            theta: DVector::zeros(nb),
            delta_theta: DVector::zeros(nb),
            y_bar: DVector::zeros(nb),
            delta_y_bar: DVector::zeros(nb),
            p_r: DMatrix::identity(3 * nb, 3 * nb) * q,
            k_f: DMatrix::zeros(nb, 3 * nb),
            q: DMatrix::identity(3 * nb, 3 * nb) * q,
            r: DMatrix::identity(nb, nb) * r,
            alpha,
            beta,
        }
    }

    /// Lifted state `[Ȳ; δθ; δȲ]`.
    pub fn lifted_state(&self) -> DVector<f64> {
        let nb = self.theta.len();
        let mut x = DVector::zeros(3 * nb);
        x.rows_mut(0, nb).copy_from(&self.y_bar);
        x.rows_mut(nb, nb).copy_from(&self.delta_theta);
        x.rows_mut(2 * nb, nb).copy_from(&self.delta_y_bar);
        x
    }
}

/// `θ_{j+1} = α θ_j − β K_f [Ȳ_j; δθ_j; δȲ_j]`, returned with
/// `δθ_{j+1} = θ_{j+1} − θ_j`.
pub fn update_theta(cs: &ControllerState, k_f: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
    let next = &cs.theta * cs.alpha - k_f * cs.lifted_state() * cs.beta;
    let delta = &next - &cs.theta;
    (next, delta)
}

/// `u_k = ([sin ψ, cos ψ, sin 2ψ, cos 2ψ] ⊗ I_r) θ`. A θ of length `2r`
/// carries the 1P pair only.
pub fn control_sample(theta: &DVector<f64>, psi: f64, r: usize) -> DVector<f64> {
    let harmonics = theta.len() / (2 * r);
    let mut u = DVector::zeros(r);
    for (c, w) in harmonic_row(psi, harmonics).enumerate() {
        for ch in 0..r {
            u[ch] += w * theta[c * r + ch];
        }
    }
    u
}

/// Which harmonics the controller may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Harmonics {
    OneP,
    OnePTwoP,
}

impl Harmonics {
    pub fn count(self) -> usize {
        match self {
            Harmonics::OneP => 1,
            Harmonics::OnePTwoP => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SprcConfig {
    /// Past window `p` of the Markov estimate, samples.
    pub past: usize,
    pub forgetting: f64,
    pub q_weight: f64,
    pub r_weight: f64,
    pub alpha: f64,
    pub beta: f64,
    pub dare_iterations: usize,
    /// The lifting period is this fraction of the nominal samples per revolution.
    pub period_fraction: f64,
    /// Explicit lifting period, overriding `period_fraction`.
    pub period: Option<usize>,
    pub identification_time: f64,
    /// Amplitude of the random per-revolution θ during identification, deg.
    pub excitation_amplitude: f64,
    /// Std of the white pitch dither during identification, deg.
    pub dither_std: f64,
}

impl Default for SprcConfig {
    fn default() -> Self {
        Self {
            past: 20,
            forgetting: crate::sysid::DEFAULT_FORGETTING,
            q_weight: 1.0,
            r_weight: 10.0,
            alpha: 1.0,
            beta: 0.3,
            dare_iterations: 50,
            period_fraction: 0.9,
            period: None,
            identification_time: 30.0,
            excitation_amplitude: 1.0,
            dither_std: 0.5,
        }
    }
}

impl SprcConfig {
    /// Lifting period for a rotor expected to turn at up to `rpm` at `rate` Hz.
    pub fn lifting_period(&self, rpm: f64, rate: f64) -> usize {
        self.period
            .unwrap_or_else(|| (self.period_fraction * rate * 60.0 / rpm).floor() as usize)
    }
}

/// Per-revolution telemetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationTelemetry {
    pub time: f64,
    pub theta: Vec<f64>,
    pub delta_theta_norm: f64,
    /// `None` for rotations without a synthesis.
    pub dare_residual: Option<f64>,
    pub gain_norm: f64,
    pub identifying: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerEvent {
    pub time: f64,
    pub message: String,
}

/// Online SPRC loop: identification, per-revolution synthesis and the
/// azimuth-indexed pitch command.
#[derive(Debug, Clone)]
pub struct SprcController {
    config: SprcConfig,
    harmonics: usize,
    r: usize,
    l: usize,
    period: usize,
    buffer: DeltaBuffer,
    estimate: MarkovEstimate,
    state: ControllerState,
    window: VecDeque<(DVector<f64>, f64)>,
    last_psi: Option<f64>,
    controlling: bool,
    rng: ChaCha8Rng,
    dither: Normal<f64>,
    pub telemetry: Vec<RotationTelemetry>,
    pub events: Vec<ControllerEvent>,
}

impl SprcController {
    pub fn new(
        config: SprcConfig,
        harmonics: Harmonics,
        r: usize,
        l: usize,
        period: usize,
        excitation_seed: u64,
    ) -> Result<Self> {
        if r != l {
            return Err(Error::invalid("SPRC needs as many inputs as outputs"));
        }
        if period < MIN_BASIS_PERIOD || period < config.past {
            return Err(Error::invalid(format!(
                "lifting period {period} must exceed 8 and the past window {}",
                config.past
            )));
        }
        if !(0.0..=1.0).contains(&config.alpha) || !(0.0..=1.0).contains(&config.beta) {
            return Err(Error::invalid("alpha and beta must lie in [0, 1]"));
        }
        if !(config.q_weight >= 0.0) || !(config.r_weight > 0.0) {
            return Err(Error::invalid("Q must be PSD and R positive definite"));
        }
        let h = harmonics.count();
        let nb = 2 * h * r;
        let dither = Normal::new(0.0, config.dither_std.max(0.0))
            .map_err(|e| Error::invalid(e.to_string()))?;
        Ok(Self {
            buffer: DeltaBuffer::new(period, config.past, r, l)?,
            estimate: MarkovEstimate::new(config.past, r, l, config.forgetting)?,
            state: ControllerState::new(
                nb,
                config.q_weight,
                config.r_weight,
                config.alpha,
                config.beta,
            ),
            config,
            harmonics: h,
            r,
            l,
            period,
            window: VecDeque::with_capacity(period + 1),
            last_psi: None,
            controlling: false,
            rng: ChaCha8Rng::seed_from_u64(excitation_seed),
            dither,
            telemetry: Vec::new(),
            events: Vec::new(),
        })
    }

    pub fn period(&self) -> usize {
        self.period
    }
    pub fn theta(&self) -> &DVector<f64> {
        &self.state.theta
    }
    pub fn state(&self) -> &ControllerState {
        &self.state
    }
    pub fn estimate(&self) -> &MarkovEstimate {
        &self.estimate
    }
    pub fn is_controlling(&self) -> bool {
        self.controlling
    }

    /// One sample: `y` is the measurement at azimuth `psi`, `time` seconds
    /// into the run. Returns the pitch command for this sample.
    pub fn step(&mut self, y: &DVector<f64>, psi: f64, time: f64) -> Result<DVector<f64>> {
        if y.len() != self.l {
            return Err(Error::invalid("measurement dimension mismatch"));
        }
        let wrapped = self.last_psi.is_some_and(|prev| psi < prev);
        self.last_psi = Some(psi);
        let identifying = time < self.config.identification_time;
        if wrapped {
            self.on_rotation(time, identifying)?;
        }

        let mut u = control_sample(&self.state.theta, psi, self.r);
        if identifying && self.config.dither_std > 0.0 {
            for v in u.iter_mut() {
                *v += self.dither.sample(&mut self.rng);
            }
        }

        let k = self.buffer.push(&u, y)?;
        if k >= self.period + self.config.past {
            let z = self.buffer.regressor(k)?;
            let target = self.buffer.delta_y(k)?;
            rls_update(&mut self.estimate, &z, &target)?;
        }
        if self.window.len() == self.period {
            self.window.pop_front();
        }
        self.window.push_back((y.clone(), psi));
        Ok(u)
    }

    fn project_window(&self, basis: &BasisMatrix) -> DVector<f64> {
        let mut y = DVector::zeros(self.l * self.period);
        for (i, (v, _)) in self.window.iter().enumerate() {
            y.rows_mut(i * self.l, self.l).copy_from(v);
        }
        &basis.phi_pinv * y
    }

    fn on_rotation(&mut self, time: f64, identifying: bool) -> Result<()> {
        let nb = self.state.theta.len();
        if identifying {
            let a = self.config.excitation_amplitude;
            let mut theta = DVector::zeros(nb);
            for i in 0..nb / 2 {
                // Quadrature pair with random phase, one per harmonic/channel.
                let ph = self.rng.random_range(0.0..TAU);
                let (s, c) = ph.sin_cos();
                let (h, ch) = (i / self.r, i % self.r);
                theta[2 * h * self.r + ch] = a * s;
                theta[(2 * h + 1) * self.r + ch] = a * c;
            }
            self.state.delta_theta = &theta - &self.state.theta;
            self.state.theta = theta;
            self.record(time, None, true);
            return Ok(());
        }
        if self.window.len() < self.period {
            return Ok(());
        }
        let psi: Vec<f64> = self.window.iter().map(|(_, a)| *a).collect();
        let basis = azimuth_basis(&psi, self.r, self.harmonics)?;
        let y_bar = self.project_window(&basis);
        if !self.controlling {
            self.controlling = true;
            self.state.theta.fill(0.0);
            self.state.delta_theta.fill(0.0);
            self.state.delta_y_bar = DVector::zeros(nb);
            self.state.y_bar = y_bar;
            self.events.push(ControllerEvent {
                time,
                message: "identification finished, control enabled".into(),
            });
            self.record(time, None, false);
            return Ok(());
        }
        self.state.delta_y_bar = &y_bar - &self.state.y_bar;
        self.state.y_bar = y_bar;

        match self.synthesize(&basis) {
            Ok(residual) => {
                let (theta, delta) = update_theta(&self.state, &self.state.k_f);
                if all_finite(&DMatrix::from_column_slice(nb, 1, theta.as_slice())) {
                    self.state.theta = theta;
                    self.state.delta_theta = delta;
                    self.record(time, Some(residual), false);
                } else {
                    self.hold(time, "non-finite theta update");
                }
            }
            Err(e) => self.hold(time, &e.to_string()),
        }
        Ok(())
    }

    /// Refreshes `P_R` and `K_f` from the current Markov estimate.
    fn synthesize(&mut self, basis: &BasisMatrix) -> Result<f64> {
        let xi = self.estimate.xi();
        let lp = assemble_predictor(&xi, self.r, self.period)?;
        let sys = project_predictor(&lp, basis)?;
        let (q, r) = (&self.state.q, &self.state.r);
        let mut p = self.state.p_r.clone();
        for _ in 0..self.config.dare_iterations {
            p = dare_step(&p, &sys.a_bar, &sys.b_bar, q, r)?;
        }
        let residual = dare_residual(&p, &sys.a_bar, &sys.b_bar, q, r)?;
        let k_f = feedback_gain(&p, &sys.a_bar, &sys.b_bar, r)?;
        if !all_finite(&k_f) {
            return Err(Error::Numeric("non-finite feedback gain".into()));
        }
        self.state.p_r = p;
        self.state.k_f = k_f;
        Ok(residual)
    }

    fn hold(&mut self, time: f64, why: &str) {
        self.state.delta_theta.fill(0.0);
        self.events.push(ControllerEvent {
            time,
            message: format!("synthesis failed, holding theta: {why}"),
        });
        self.record(time, None, false);
    }

    fn record(&mut self, time: f64, residual: Option<f64>, identifying: bool) {
        self.telemetry.push(RotationTelemetry {
            time,
            theta: self.state.theta.iter().copied().collect(),
            delta_theta_norm: self.state.delta_theta.norm(),
            dare_residual: residual,
            gain_norm: self.state.k_f.norm(),
            identifying,
        });
    }
}
