//! Classical Fisher information of the joint homodyne outcome, its
//! leading-order coefficient matrices under LO tuning, and Cramér–Rao bounds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, Mat4, Vec2, Vec4};
use crate::model::{HomodyneSettings, NetworkParams, Phases, ProbeConfig, TuningConstants};

/// Partial derivatives of the output mean and covariance with respect to
/// `(φ0, φ1, φ2, φ3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsDerivatives {
    pub dmean: [Vec2; 4],
    pub dcov: [Mat2; 4],
}

/// Analytic derivatives of the closed-form statistics.
pub fn stats_derivatives(
    params: &NetworkParams,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
) -> StatsDerivatives {
    let ph = Phases::new(params, settings);
    let amp = std::f64::consts::SQRT_2 * config.alpha;
    let (s3, c3) = params.phi3.sin_cos();

    // d(argument)/d(φ0, φ1, φ2)
    const GRAD_A1: [f64; 3] = [-1.0, -0.5, -0.5];
    const GRAD_B1: [f64; 3] = [-1.0, 0.5, -0.5];
    const GRAD_A2: [f64; 3] = [-1.0, 0.5, 0.5];
    const GRAD_B2: [f64; 3] = [-1.0, -0.5, 0.5];

    let (sa1, ca1) = ph.a1.sin_cos();
    let (sb1, cb1) = ph.b1.sin_cos();
    let (sa2, ca2) = ph.a2.sin_cos();
    let (sb2, cb2) = ph.b2.sin_cos();

    let mut dmean = [[0.0; 2]; 4];
    for i in 0..3 {
        dmean[i] = [
            amp * (-c3 * sa1 * GRAD_A1[i] - s3 * sb1 * GRAD_B1[i]),
            amp * (-c3 * sa2 * GRAD_A2[i] + s3 * sb2 * GRAD_B2[i]),
        ];
    }
    dmean[3] = [amp * (-s3 * ca1 + c3 * cb1), amp * (-s3 * ca2 - c3 * cb2)];

    let sh = (2.0 * config.r).sinh();
    let (sin2, cos2) = (2.0 * params.phi3).sin_cos();
    let (sp1, cp1) = ph.p1.sin_cos();
    let (sp2, cp2) = ph.p2.sin_cos();
    let (sq, cq) = ph.q.sin_cos();
    let sym = |d11: f64, d12: f64, d22: f64| [[d11, d12], [d12, d22]];

    let dcov = [
        sym(-sh * sin2 * sp1, -sh * cos2 * sq, sh * sin2 * sp2),
        [[0.0; 2]; 2],
        sym(-0.5 * sh * sin2 * sp1, 0.0, -0.5 * sh * sin2 * sp2),
        sym(-sh * cos2 * cp1, sh * sin2 * cq, sh * cos2 * cp2),
    ];

    StatsDerivatives { dmean, dcov }
}

/// Exact Fisher information `F = F^Σ + F^μ` for a single shot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherSplit {
    pub f_total: Mat4,
    /// Noise term `½ Tr[Σ⁻¹ ∂iΣ Σ⁻¹ ∂jΣ]`.
    pub f_sigma: Mat4,
    /// Signal term `∂iμᵀ Σ⁻¹ ∂jμ`.
    pub f_mu: Mat4,
}

impl FisherSplit {
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::symmetric_eigen4(&self.f_total).0[0]
    }

    /// Eigenvalues no lower than `−1e−10 ‖F‖_max`.
    pub fn is_positive_semidefinite(&self) -> bool {
        self.min_eigenvalue() >= -1e-10 * linalg::max_abs4(&self.f_total)
    }
}

pub fn fisher_matrix(
    params: &NetworkParams,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
) -> Result<FisherSplit> {
    let stats = crate::model::closed_form_stats(params, settings, config);
    let inv = linalg::inv2(&stats.covariance)?;
    let der = stats_derivatives(params, settings, config);
    Ok(fisher_from_parts(&inv, &der))
}

pub(crate) fn fisher_from_parts(inv: &Mat2, der: &StatsDerivatives) -> FisherSplit {
    let weighted: [Mat2; 4] = std::array::from_fn(|i| linalg::mul2(inv, &der.dcov[i]));
    let pulled: [Vec2; 4] = std::array::from_fn(|i| linalg::mat2_vec(inv, &der.dmean[i]));

    let mut f_sigma = [[0.0; 4]; 4];
    let mut f_mu = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let s = 0.5 * linalg::trace_prod2(&weighted[i], &weighted[j]);
            let m = linalg::dot2(&der.dmean[i], &pulled[j]);
            f_sigma[i][j] = s;
            f_sigma[j][i] = s;
            f_mu[i][j] = m;
            f_mu[j][i] = m;
        }
    }
    let mut f_total = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            f_total[i][j] = f_sigma[i][j] + f_mu[i][j];
        }
    }
    FisherSplit {
        f_total,
        f_sigma,
        f_mu,
    }
}

/// `Λ = (1+4k1²)(1+4k2²) + 8(1−4k1k2)k3² + 16k3⁴`
pub fn lambda(k: &TuningConstants) -> f64 {
    let TuningConstants { k1, k2, k3 } = *k;
    let k3s = k3 * k3;
    (1.0 + 4.0 * k1 * k1) * (1.0 + 4.0 * k2 * k2)
        + 8.0 * (1.0 - 4.0 * k1 * k2) * k3s
        + 16.0 * k3s * k3s
}

/// Leading `N_s²` coefficient of the covariance term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaCoefficients {
    pub lambda: f64,
    pub d1: f64,
    pub d3: f64,
    pub d4: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub matrix: Mat4,
}

impl SigmaCoefficients {
    /// The `(φ0, φ2, φ3)` block before division by `Λ²`.
    pub fn reduced_block(&self) -> [[f64; 3]; 3] {
        [
            [self.d1, self.a, self.b],
            [self.a, self.d3, self.c],
            [self.b, self.c, self.d4],
        ]
    }
}

pub fn coefficient_sigma(k: &TuningConstants) -> SigmaCoefficients {
    let TuningConstants { k1, k2, k3 } = *k;
    let (k1s, k2s, k3s) = (k1 * k1, k2 * k2, k3 * k3);
    let k3q = k3s * k3s;
    let k3h = k3q * k3s;
    let lam = lambda(k);

    let base = k2s + k1s * (1.0 + 16.0 * k2s * (1.0 + k1s + k2s));
    let d1 = 32.0
        * (base + 2.0 * k3s - 32.0 * k1 * k2 * (1.0 + k1s - k1 * k2 + k2s) * k3s
            + 16.0 * (1.0 + k1s - 4.0 * k1 * k2 + k2s) * k3q
            + 32.0 * k3h);
    let d3 =
        8.0 * (base - 8.0 * (-1.0 + 4.0 * k1 * k2) * (k1s + k2s) * k3s + 16.0 * (k1s + k2s) * k3q);
    let d4 = 16.0
        * ((1.0 + 4.0 * k1s) * (k1 + k2).powi(2) * (1.0 + 4.0 * k2s)
            - 4.0
                * (-1.0
                    + 2.0
                        * (k1s + 6.0 * k1 * k2 + 4.0 * k1s * k1 * k2 + k2s + 4.0 * k1 * k2s * k2))
                * k3s
            + 16.0 * (2.0 + k1s - 6.0 * k1 * k2 + k2s) * k3q
            + 64.0 * k3h);
    let minus = -1.0 + 4.0 * k1 * k2 - 4.0 * k3s;
    let plus = 1.0 + 4.0 * k1 * k2 - 4.0 * k3s;
    let a = -16.0 * (k1s - k2s) * minus * plus;
    let b = 64.0 * (k1 + k2) * k3 * minus * plus;
    let c = -16.0
        * (k1 - k2)
        * k3
        * (-1.0 - 2.0 * k2 + k1 * (-2.0 + 4.0 * k2) - 4.0 * k3s)
        * (-1.0 + 2.0 * k2 + k1 * (2.0 + 4.0 * k2) - 4.0 * k3s);

    let s = 1.0 / (lam * lam);
    let matrix = [
        [d1 * s, 0.0, a * s, b * s],
        [0.0, 0.0, 0.0, 0.0],
        [a * s, 0.0, d3 * s, c * s],
        [b * s, 0.0, c * s, d4 * s],
    ];
    SigmaCoefficients {
        lambda: lam,
        d1,
        d3,
        d4,
        a,
        b,
        c,
        matrix,
    }
}

/// Leading `N_s N_c` coefficient of the mean term; only the φ1 entry survives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuCoefficients {
    pub lambda: f64,
    pub d2: f64,
    pub matrix: Mat4,
}

pub fn coefficient_mu(k: &TuningConstants, phi1: f64) -> MuCoefficients {
    let TuningConstants { k1, k2, k3 } = *k;
    let (s, c) = phi1.sin_cos();
    let d2 = 1.0
        + 2.0 * k1 * k1
        + 2.0 * k2 * k2
        + 4.0 * k3 * k3
        + 2.0 * (k1 + k2) * ((k1 - k2) * c + 2.0 * k3 * s);
    let lam = lambda(k);
    let mut matrix = [[0.0; 4]; 4];
    matrix[1][1] = 2.0 * d2 / lam;
    MuCoefficients {
        lambda: lam,
        d2,
        matrix,
    }
}

/// All leading-order coefficient data for one `(k, β, φ1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMatrices {
    pub lambda: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub beta: f64,
    pub phi1: f64,
    pub f_sigma_coeff: Mat4,
    pub f_mu_coeff: Mat4,
    /// `β² 𝓕^Σ + β(1−β) 𝓕^μ`
    pub f_total_coeff: Mat4,
}

impl CoefficientMatrices {
    /// Assembles the total coefficient matrix for any `β ∈ [0, 1]` without
    /// checking invertibility.
    pub fn assemble(k: &TuningConstants, beta: f64, phi1: f64) -> Self {
        let sig = coefficient_sigma(k);
        let mu = coefficient_mu(k, phi1);
        let mut total = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                total[i][j] =
                    beta * beta * sig.matrix[i][j] + beta * (1.0 - beta) * mu.matrix[i][j];
            }
        }
        Self {
            lambda: sig.lambda,
            d1: sig.d1,
            d2: mu.d2,
            d3: sig.d3,
            d4: sig.d4,
            a: sig.a,
            b: sig.b,
            c: sig.c,
            beta,
            phi1,
            f_sigma_coeff: sig.matrix,
            f_mu_coeff: mu.matrix,
            f_total_coeff: total,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::symmetric_eigen4(&self.f_total_coeff).0[0]
    }
}

/// Leading-order coefficients with the diagonal of `𝓕⁻¹`, which gives the
/// asymptotic `N²`-normalized marginal bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientTotal {
    pub matrices: CoefficientMatrices,
    pub inverse_diag: Vec4,
}

impl CoefficientTotal {
    /// `Tr[𝓕⁻¹]`, the plateau of `N² Tr[F⁻¹]`.
    pub fn trace_inverse(&self) -> f64 {
        self.inverse_diag.iter().sum()
    }
}

pub fn coefficient_total(k: &TuningConstants, beta: f64, phi1: f64) -> Result<CoefficientTotal> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    let report = singularity_check(k);
    if report.class != Singularity::Nonsingular {
        return Err(Error::SingularCoefficient {
            class: report.class,
            det_factor: report.det_factor,
        });
    }
    let matrices = CoefficientMatrices::assemble(k, beta, phi1);
    let inv = linalg::invert4(&matrices.f_total_coeff).map_err(|_| Error::SingularCoefficient {
        class: report.class,
        det_factor: report.det_factor,
    })?;
    let inverse_diag = std::array::from_fn(|i| inv.inverse[i][i]);
    Ok(CoefficientTotal {
        matrices,
        inverse_diag,
    })
}

/// Where the leading-order coefficient matrix loses rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Singularity {
    Nonsingular,
    /// `k1 = −k2`
    Antisymmetric,
    /// `k3² = k1 k2`
    Quadric,
    Both,
}

impl Singularity {
    /// Stable numeric label for tabular output.
    pub fn code(self) -> u8 {
        match self {
            Singularity::Nonsingular => 0,
            Singularity::Antisymmetric => 1,
            Singularity::Quadric => 2,
            Singularity::Both => 3,
        }
    }
}

impl fmt::Display for Singularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Singularity::Nonsingular => "nonsingular",
            Singularity::Antisymmetric => "singular-antisymmetric",
            Singularity::Quadric => "singular-quadric",
            Singularity::Both => "singular-both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityReport {
    /// `16384 (k1+k2)² (k1k2 − k3²)² Λ³`, the determinant of the
    /// `(φ0, φ2, φ3)` block of `Λ² 𝓕^Σ`.
    pub det_factor: f64,
    pub class: Singularity,
}

/// Relative tolerance for deciding that `k` lies on a singular locus.
const LOCUS_RTOL: f64 = 1e-12;

pub fn singularity_check(k: &TuningConstants) -> SingularityReport {
    let TuningConstants { k1, k2, k3 } = *k;
    let sum = k1 + k2;
    let quad = k1 * k2 - k3 * k3;
    let lam = lambda(k);
    let det_factor = 16384.0 * sum * sum * quad * quad * lam.powi(3);

    let on_antisymmetric = sum.abs() <= LOCUS_RTOL * (k1.abs() + k2.abs()).max(1.0);
    let on_quadric = quad.abs() <= LOCUS_RTOL * ((k1 * k2).abs() + k3 * k3).max(1.0);
    let class = match (on_antisymmetric, on_quadric) {
        (false, false) => Singularity::Nonsingular,
        (true, false) => Singularity::Antisymmetric,
        (false, true) => Singularity::Quadric,
        (true, true) => Singularity::Both,
    };
    SingularityReport { det_factor, class }
}

/// Marginal Cramér–Rao bounds for `M` repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrbReport {
    /// `[F⁻¹]ii / M`
    pub marginal_bounds: Vec4,
    /// `Tr[F⁻¹] / M`
    pub trace_bound: f64,
    pub condition_number: f64,
    pub repetitions: u64,
}

impl CrbReport {
    pub fn marginal_std(&self) -> Vec4 {
        self.marginal_bounds.map(f64::sqrt)
    }
}

pub fn crb(fisher: &FisherSplit, repetitions: u64) -> Result<CrbReport> {
    crb_from_matrix(&fisher.f_total, repetitions)
}

pub fn crb_from_matrix(f: &Mat4, repetitions: u64) -> Result<CrbReport> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument(
            "repetitions must be at least 1".into(),
        ));
    }
    let inv = linalg::invert4(f)?;
    let m = repetitions as f64;
    let marginal_bounds = std::array::from_fn(|i| inv.inverse[i][i] / m);
    Ok(CrbReport {
        marginal_bounds,
        trace_bound: marginal_bounds.iter().sum(),
        condition_number: inv.condition,
        repetitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{OperatingPoint, ResourceSplit};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    const HEADLINE: TuningConstants = TuningConstants::new(0.5, 0.5, 0.0);

    #[test]
    fn sigma_coefficients_at_headline_point() {
        let s = coefficient_sigma(&HEADLINE);
        assert_eq!(s.lambda, 4.0);
        assert_eq!((s.d1, s.d3, s.d4), (64.0, 16.0, 64.0));
        assert_eq!((s.a, s.b, s.c), (0.0, 0.0, 0.0));
        let mut expect = [[0.0; 4]; 4];
        expect[0][0] = 4.0;
        expect[2][2] = 1.0;
        expect[3][3] = 4.0;
        assert_eq!(s.matrix, expect);
    }

    #[test]
    fn symmetry_forced_zeros() {
        let s = coefficient_sigma(&TuningConstants::new(0.7, 0.7, 0.3));
        assert_eq!(s.a, 0.0);
        assert_eq!(s.c, 0.0);
        let s = coefficient_sigma(&TuningConstants::new(0.7, -0.2, 0.0));
        assert_eq!((s.b, s.c), (0.0, 0.0));
    }

    #[test]
    fn mu_coefficients() {
        for phi1 in [0.0, 1.0, 2.5, -3.0] {
            let m = coefficient_mu(&HEADLINE, phi1);
            assert_abs_diff_eq!(m.d2, 2.0, epsilon = 1e-15);
            assert_abs_diff_eq!(m.matrix[1][1], 1.0, epsilon = 1e-15);
        }
        assert_eq!(
            coefficient_mu(&TuningConstants::new(0.0, 0.0, 0.0), 0.7).d2,
            1.0
        );
    }

    #[test]
    fn headline_inverse_diagonal() {
        let t = coefficient_total(&HEADLINE, 0.5, 0.8).unwrap();
        for (got, want) in t.inverse_diag.iter().zip([1.0, 4.0, 4.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(t.trace_inverse(), 10.0, epsilon = 1e-9);
    }

    #[test]
    fn edge_betas_lose_phi1() {
        for beta in [0.0, 1.0] {
            let m = CoefficientMatrices::assemble(&HEADLINE, beta, 0.3);
            for i in 0..4 {
                assert_eq!(m.f_total_coeff[1][i], 0.0);
                assert_eq!(m.f_total_coeff[i][1], 0.0);
            }
            assert!(coefficient_total(&HEADLINE, beta, 0.3).is_err());
        }
    }

    #[test]
    fn singular_loci() {
        let r = singularity_check(&TuningConstants::new(0.5, -0.5, 0.3));
        assert_eq!(r.class, Singularity::Antisymmetric);
        let r = singularity_check(&TuningConstants::new(2.0, 0.5, 1.0));
        assert_eq!(r.class, Singularity::Quadric);
        let r = singularity_check(&TuningConstants::new(0.0, 0.0, 0.0));
        assert_eq!(r.class, Singularity::Both);
        let r = singularity_check(&HEADLINE);
        assert_eq!(r.class, Singularity::Nonsingular);
        assert_eq!(r.det_factor, 65536.0);

        match coefficient_total(&TuningConstants::new(1.0, 1.0, 1.0), 0.3, 0.0) {
            Err(Error::SingularCoefficient { class, .. }) => {
                assert_eq!(class, Singularity::Quadric)
            }
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn crb_examples() {
        let n: f64 = 50.0;
        let mut f = [[0.0; 4]; 4];
        for (i, v) in [1.0, 0.25, 0.25, 1.0].iter().enumerate() {
            f[i][i] = n * n * v;
        }
        let split = FisherSplit {
            f_total: f,
            f_sigma: f,
            f_mu: [[0.0; 4]; 4],
        };
        let one = crb(&split, 1).unwrap();
        for (got, want) in one.marginal_bounds.iter().zip([1.0, 4.0, 4.0, 1.0]) {
            assert_abs_diff_eq!(*got * n * n, want, epsilon = 1e-12);
        }
        let hundred = crb(&split, 100).unwrap();
        for i in 0..4 {
            assert_abs_diff_eq!(
                hundred.marginal_bounds[i],
                one.marginal_bounds[i] / 100.0,
                epsilon = 1e-18
            );
        }
        assert!(crb(&split, 0).is_err());
    }

    #[test]
    fn zero_displacement_kills_phi1() {
        let p = NetworkParams::new(0.3, 0.8, 0.5, FRAC_PI_4);
        let s = HomodyneSettings::new(0.6, 1.4);
        let f = fisher_matrix(&p, &s, &ProbeConfig::new(0.0, 0.7)).unwrap();
        for i in 0..4 {
            assert_eq!(f.f_total[1][i], 0.0);
            assert_eq!(f.f_total[i][1], 0.0);
        }
        assert!(matches!(crb(&f, 1), Err(Error::SingularFisher { .. })));
    }

    #[test]
    fn no_squeezing_no_noise_information() {
        let p = NetworkParams::new(0.3, 0.8, 0.5, 0.6);
        let f = fisher_matrix(
            &p,
            &HomodyneSettings::new(0.2, 0.9),
            &ProbeConfig::new(1.2, 0.0),
        )
        .unwrap();
        assert_eq!(f.f_sigma, [[0.0; 4]; 4]);
    }

    #[test]
    fn finite_n_approaches_headline() {
        let split = ResourceSplit::new(1e4, 0.5).unwrap();
        let op =
            OperatingPoint::asymptotic(NetworkParams::new(0.3, 0.8, 0.5, 0.0), &HEADLINE, &split)
                .unwrap();
        let f = fisher_matrix(&op.params, &op.settings, &op.probe).unwrap();
        let report = crb(&f, 1).unwrap();
        for (got, want) in report.marginal_bounds.iter().zip([1.0, 4.0, 4.0, 1.0]) {
            assert!((got * 1e8 / want - 1.0).abs() < 0.02);
        }
    }
}
