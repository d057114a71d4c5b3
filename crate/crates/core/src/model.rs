//! Probe state, network transformation and joint homodyne output statistics.
//!
//! Phase-space vectors use the ordering `(x1, p1, x2, p2)` with vacuum
//! quadrature variance 1/2.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, Mat4, Vec2, Vec4};

pub type Unitary2 = [[Complex64; 2]; 2];

/// The four real parameters of a lossless two-channel network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Global phase.
    pub phi0: f64,
    /// Internal phase, carried only by the homodyne mean.
    pub phi1: f64,
    /// Internal phase.
    pub phi2: f64,
    /// Mode-mixing angle in `[0, π/2]`.
    pub phi3: f64,
}

impl NetworkParams {
    pub const fn new(phi0: f64, phi1: f64, phi2: f64, phi3: f64) -> Self {
        Self {
            phi0,
            phi1,
            phi2,
            phi3,
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.phi0, self.phi1, self.phi2, self.phi3]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// `(φ1 + φ2) / 2`
    pub fn transmitted_phase(&self) -> f64 {
        0.5 * (self.phi1 + self.phi2)
    }

    /// `(φ1 − φ2) / 2`
    pub fn reflected_phase(&self) -> f64 {
        0.5 * (self.phi1 - self.phi2)
    }

    pub fn transmittance(&self) -> f64 {
        self.phi3.cos().powi(2)
    }

    pub fn reflectance(&self) -> f64 {
        self.phi3.sin().powi(2)
    }

    /// Mode transformation whose symplectic action generates the closed-form
    /// output statistics of [`closed_form_stats`]:
    ///
    /// `e^{iφ0} [[e^{iφτ} cos φ3, e^{-iφρ} sin φ3], [-e^{iφρ} sin φ3, e^{-iφτ} cos φ3]]`.
    ///
    /// This is [`build_unitary`] evaluated at `(-φ0, 2φ2, 2φ1, φ3)`.
    pub fn transfer_unitary(&self) -> Unitary2 {
        build_unitary(&NetworkParams::new(
            -self.phi0,
            2.0 * self.phi2,
            2.0 * self.phi1,
            self.phi3,
        ))
    }

    /// Representative of each angle nearest to `reference`: phases modulo 2π,
    /// the mixing angle modulo π/2.
    pub fn nearest_branch(&self, reference: &NetworkParams) -> NetworkParams {
        let a = self.to_array();
        let r = reference.to_array();
        let mut out = [0.0; 4];
        for i in 0..4 {
            let period = if i == 3 { FRAC_PI_2 } else { 2.0 * PI };
            out[i] = wrap_near(a[i], r[i], period);
        }
        NetworkParams::from_array(out)
    }
}

/// Representative of `value` modulo `period` closest to `reference`.
pub fn wrap_near(value: f64, reference: f64, period: f64) -> f64 {
    value - period * ((value - reference) / period).round()
}

/// Displaced two-mode squeezed probe with equal real displacements and real
/// squeezing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub alpha: f64,
    pub r: f64,
}

impl ProbeConfig {
    pub fn new(alpha: f64, r: f64) -> Self {
        Self { alpha, r }
    }

    /// Mean photon number carried by the squeezing, `2 sinh²(r)`.
    pub fn n_squeeze(&self) -> f64 {
        2.0 * self.r.sinh().powi(2)
    }

    /// Mean photon number carried by the displacement, `2α²`.
    pub fn n_coherent(&self) -> f64 {
        2.0 * self.alpha * self.alpha
    }

    pub fn n_total(&self) -> f64 {
        self.n_squeeze() + self.n_coherent()
    }
}

/// Total mean photon number and the fraction of it spent on squeezing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceSplit {
    pub n_total: f64,
    pub beta: f64,
}

impl ResourceSplit {
    pub fn new(n_total: f64, beta: f64) -> Result<Self> {
        if !(n_total >= 0.0 && n_total.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "photon number must be finite and non-negative, got {n_total}"
            )));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "beta must lie in (0, 1), got {beta}"
            )));
        }
        Ok(Self { n_total, beta })
    }

    pub fn n_squeeze(&self) -> f64 {
        self.beta * self.n_total
    }

    pub fn n_coherent(&self) -> f64 {
        (1.0 - self.beta) * self.n_total
    }

    pub fn probe(&self) -> ProbeConfig {
        ProbeConfig {
            alpha: (0.5 * self.n_coherent()).sqrt(),
            r: (0.5 * self.n_squeeze()).sqrt().asinh(),
        }
    }
}

/// First and second moments of the two-mode field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub displacement: Vec4,
    pub covariance: Mat4,
}

impl GaussianState {
    pub fn from_slices(displacement: &[f64], covariance: &[f64]) -> Result<Self> {
        if displacement.len() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: displacement.len(),
            });
        }
        if covariance.len() != 16 {
            return Err(Error::DimensionMismatch {
                expected: 16,
                got: covariance.len(),
            });
        }
        let mut d = [0.0; 4];
        d.copy_from_slice(displacement);
        let mut g = [[0.0; 4]; 4];
        for i in 0..4 {
            g[i].copy_from_slice(&covariance[4 * i..4 * i + 4]);
        }
        Ok(Self {
            displacement: d,
            covariance: g,
        })
    }

    pub fn vacuum() -> Self {
        probe_state(&ProbeConfig::new(0.0, 0.0))
    }

    pub fn covariance_det(&self) -> f64 {
        let m = nalgebra::Matrix4::from_fn(|i, j| self.covariance[i][j]);
        m.determinant()
    }
}

/// Local-oscillator phases of the two homodyne detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomodyneSettings {
    pub theta1: f64,
    pub theta2: f64,
}

impl HomodyneSettings {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        Self { theta1, theta2 }
    }

    /// Both angles reduced to `[0, 2π)`.
    pub fn reduced(&self) -> (f64, f64) {
        (
            self.theta1.rem_euclid(2.0 * PI),
            self.theta2.rem_euclid(2.0 * PI),
        )
    }
}

/// N-independent detuning constants of the local oscillators (`k1`, `k2`) and
/// of the mixing angle from balance (`k3`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl TuningConstants {
    pub const fn new(k1: f64, k2: f64, k3: f64) -> Self {
        Self { k1, k2, k3 }
    }
}

/// Mean and covariance of the joint homodyne outcome `(x1, x2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputStatistics {
    pub mean: Vec2,
    pub covariance: Mat2,
}

/// Network unitary acting on the mode operators,
/// `e^{-iφ0} [[e^{iφτ/2} cos φ3, e^{iφρ/2} sin φ3], [-e^{-iφρ/2} sin φ3, e^{-iφτ/2} cos φ3]]`.
pub fn build_unitary(params: &NetworkParams) -> Unitary2 {
    let global = Complex64::from_polar(1.0, -params.phi0);
    let tau = 0.5 * params.transmitted_phase();
    let rho = 0.5 * params.reflected_phase();
    let (s, c) = params.phi3.sin_cos();
    [
        [
            global * Complex64::from_polar(c, tau),
            global * Complex64::from_polar(s, rho),
        ],
        [
            -global * Complex64::from_polar(s, -rho),
            global * Complex64::from_polar(c, -tau),
        ],
    ]
}

pub fn det_unitary(u: &Unitary2) -> Complex64 {
    u[0][0] * u[1][1] - u[0][1] * u[1][0]
}

/// `max |U†U − I|`
pub fn unitarity_residual(u: &Unitary2) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                acc += u[k][i].conj() * u[k][j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - target).norm());
        }
    }
    worst
}

/// Canonical symplectic form in the `(x1, p1, x2, p2)` ordering.
pub fn symplectic_form() -> Mat4 {
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
}

/// Orthogonal symplectic phase-space map of a passive two-mode transformation.
///
/// With `a = (x + ip)/√2`, `x_out = Re U x − Im U p` and
/// `p_out = Im U x + Re U p`, scattered into the interleaved ordering.
pub fn symplectic_of(u: &Unitary2) -> Result<Mat4> {
    let residual = unitarity_residual(u);
    if !(residual <= 1e-8) {
        return Err(Error::NotUnitary { residual });
    }
    let mut r = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            let (re, im) = (u[i][j].re, u[i][j].im);
            r[2 * i][2 * j] = re;
            r[2 * i][2 * j + 1] = -im;
            r[2 * i + 1][2 * j] = im;
            r[2 * i + 1][2 * j + 1] = re;
        }
    }
    Ok(r)
}

/// Displaced two-mode squeezed vacuum with `⟨a1 a2⟩ = −sinh(2r)/2`.
pub fn probe_state(config: &ProbeConfig) -> GaussianState {
    let d = SQRT_2 * config.alpha;
    let ch = 0.5 * (2.0 * config.r).cosh();
    let sh = 0.5 * (2.0 * config.r).sinh();
    GaussianState {
        displacement: [d, 0.0, d, 0.0],
        covariance: [
            [ch, 0.0, -sh, 0.0],
            [0.0, ch, 0.0, sh],
            [-sh, 0.0, ch, 0.0],
            [0.0, sh, 0.0, ch],
        ],
    }
}

/// `d ← R d`, `Γ ← R Γ Rᵀ`.
pub fn propagate(state: &GaussianState, r: &Mat4) -> GaussianState {
    let cov = linalg::mul4(&linalg::mul4(r, &state.covariance), &linalg::transpose4(r));
    GaussianState {
        displacement: linalg::mat4_vec(r, &state.displacement),
        covariance: linalg::symmetrize4(&cov),
    }
}

/// Rows select `cos θ x + sin θ p` of each output mode.
pub fn measurement_matrix(settings: &HomodyneSettings) -> [[f64; 4]; 2] {
    let (s1, c1) = settings.theta1.sin_cos();
    let (s2, c2) = settings.theta2.sin_cos();
    [[c1, s1, 0.0, 0.0], [0.0, 0.0, c2, s2]]
}

pub fn homodyne_stats(state: &GaussianState, settings: &HomodyneSettings) -> OutputStatistics {
    let m = measurement_matrix(settings);
    let mut mean = [0.0; 2];
    let mut cov = [[0.0; 2]; 2];
    for a in 0..2 {
        mean[a] = (0..4).map(|k| m[a][k] * state.displacement[k]).sum();
        for b in 0..2 {
            let mut acc = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    acc += m[a][k] * state.covariance[k][l] * m[b][l];
                }
            }
            cov[a][b] = acc;
        }
    }
    let off = 0.5 * (cov[0][1] + cov[1][0]);
    cov[0][1] = off;
    cov[1][0] = off;
    OutputStatistics {
        mean,
        covariance: cov,
    }
}

/// Output statistics by explicit phase-space propagation.
pub fn pipeline_stats(
    params: &NetworkParams,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
) -> OutputStatistics {
    let r = symplectic_of(&params.transfer_unitary()).expect("transfer unitary is unitary");
    homodyne_stats(&propagate(&probe_state(config), &r), settings)
}

/// Trigonometric arguments shared by the closed-form statistics and their
/// derivatives.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Phases {
    /// Mean, mode 1: `θ1 − φ0 − φτ`, `θ1 − φ0 + φρ`.
    pub a1: f64,
    pub b1: f64,
    /// Mean, mode 2: `θ2 − φ0 + φτ`, `θ2 − φ0 − φρ`.
    pub a2: f64,
    pub b2: f64,
    /// Covariance: `2θ1 − 2φ0 − φ2`, `2θ2 − 2φ0 + φ2`, `θ1 + θ2 − 2φ0`.
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
}

impl Phases {
    pub fn new(params: &NetworkParams, settings: &HomodyneSettings) -> Self {
        let (t1, t2) = (settings.theta1, settings.theta2);
        let tau = params.transmitted_phase();
        let rho = params.reflected_phase();
        Self {
            a1: t1 - params.phi0 - tau,
            b1: t1 - params.phi0 + rho,
            a2: t2 - params.phi0 + tau,
            b2: t2 - params.phi0 - rho,
            p1: 2.0 * t1 - 2.0 * params.phi0 - params.phi2,
            p2: 2.0 * t2 - 2.0 * params.phi0 + params.phi2,
            q: t1 + t2 - 2.0 * params.phi0,
        }
    }
}

/// Closed-form homodyne mean and covariance.
///
/// The diagonal covariance entries `½[cosh 2r ∓ sin 2φ3 cos P sinh 2r]` are
/// evaluated as `½[e^{-2r} + sinh 2r (2 sin²(φ3 − π/4) + 2 sin 2φ3 sin²(P/2))]`
/// (and the `cos²` analogue for mode 2), which is algebraically identical
/// but keeps full relative precision when the LO sits at the
/// minimum-variance quadrature and the entries shrink like `1/N_s`.
pub fn closed_form_stats(
    params: &NetworkParams,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
) -> OutputStatistics {
    let ph = Phases::new(params, settings);
    let amp = SQRT_2 * config.alpha;
    let (s3, c3) = params.phi3.sin_cos();
    let mean = [
        amp * (c3 * ph.a1.cos() + s3 * ph.b1.cos()),
        amp * (c3 * ph.a2.cos() - s3 * ph.b2.cos()),
    ];

    let sh = (2.0 * config.r).sinh();
    let floor = (-2.0 * config.r).exp();
    let sin2 = (2.0 * params.phi3).sin();
    let cos2 = (2.0 * params.phi3).cos();
    let unbalance = 2.0 * (params.phi3 - FRAC_PI_4).sin().powi(2);
    let s11 = 0.5 * (floor + sh * (unbalance + 2.0 * sin2 * (0.5 * ph.p1).sin().powi(2)));
    let s22 = 0.5 * (floor + sh * (unbalance + 2.0 * sin2 * (0.5 * ph.p2).cos().powi(2)));
    let s12 = -0.5 * sh * cos2 * ph.q.cos();
    OutputStatistics {
        mean,
        covariance: [[s11, s12], [s12, s22]],
    }
}

/// Minimum-variance LO angles `(φ0 + φ2/2, π/2 + φ0 − φ2/2)`.
pub fn minimum_variance_angles(params: &NetworkParams) -> (f64, f64) {
    (
        params.phi0 + 0.5 * params.phi2,
        FRAC_PI_2 + params.phi0 - 0.5 * params.phi2,
    )
}

/// A second phase vector producing exactly the same output statistics at
/// fixed LO phases: `φ1` kept, `φ3 → π/2 − φ3`, `φ0 → θ1 + θ2 − π/2 − φ0`,
/// `φ2 → 2θ1 − 2θ2 + π − φ2`. Its fixed points are the minimum-variance
/// settings at `φ3 = π/4`, so a tuned truth and its mirror lie about
/// `(k1 + k2)/N_s` apart.
pub fn mirror_equivalent(params: &NetworkParams, settings: &HomodyneSettings) -> NetworkParams {
    let (t1, t2) = (settings.theta1, settings.theta2);
    NetworkParams::new(
        t1 + t2 - FRAC_PI_2 - params.phi0,
        params.phi1,
        2.0 * t1 - 2.0 * t2 + PI - params.phi2,
        FRAC_PI_2 - params.phi3,
    )
}

/// LO phases detuned from the minimum-variance quadratures by `k_i / N_s`.
pub fn tuned_settings(
    params: &NetworkParams,
    k: &TuningConstants,
    n_squeeze: f64,
) -> Result<HomodyneSettings> {
    if !(n_squeeze > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "squeezing photon number must be positive, got {n_squeeze}"
        )));
    }
    let (f1, f2) = minimum_variance_angles(params);
    Ok(HomodyneSettings::new(
        f1 + k.k1 / n_squeeze,
        f2 + k.k2 / n_squeeze,
    ))
}

/// A fully specified experiment point: true network, LO phases, probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub params: NetworkParams,
    pub settings: HomodyneSettings,
    pub probe: ProbeConfig,
}

impl OperatingPoint {
    /// LO phases tuned to `params` for the probe obtained from `split`.
    pub fn tuned(
        params: NetworkParams,
        k: &TuningConstants,
        split: &ResourceSplit,
    ) -> Result<Self> {
        Ok(Self {
            params,
            settings: tuned_settings(&params, k, split.n_squeeze())?,
            probe: split.probe(),
        })
    }

    /// As [`OperatingPoint::tuned`], with the mixing angle replaced by
    /// `π/4 + k3 / N_s`, the regime in which the asymptotic coefficient
    /// matrices apply.
    pub fn asymptotic(
        phases: NetworkParams,
        k: &TuningConstants,
        split: &ResourceSplit,
    ) -> Result<Self> {
        let ns = split.n_squeeze();
        if !(ns > 0.0) {
            return Err(Error::InvalidArgument(
                "asymptotic operating point needs a positive squeezing photon number".into(),
            ));
        }
        let params = NetworkParams {
            phi3: FRAC_PI_4 + k.k3 / ns,
            ..phases
        };
        Self::tuned(params, k, split)
    }

    pub fn stats(&self) -> OutputStatistics {
        closed_form_stats(&self.params, &self.settings, &self.probe)
    }
}

/// Smallest determinant accepted by [`log_density`] regardless of scale.
const MIN_DET: f64 = 1e-300;

/// Log of the bivariate normal density at `x`.
pub fn log_density(x: &Vec2, stats: &OutputStatistics) -> Result<f64> {
    let det = linalg::det2(&stats.covariance);
    if !(det > MIN_DET) {
        return Err(Error::DegenerateCovariance {
            det,
            threshold: MIN_DET,
        });
    }
    let inv = linalg::inv2(&stats.covariance)?;
    let dx = [x[0] - stats.mean[0], x[1] - stats.mean[1]];
    let quad = linalg::dot2(&dx, &linalg::mat2_vec(&inv, &dx));
    Ok(-(2.0 * PI).ln() - 0.5 * det.ln() - 0.5 * quad)
}
