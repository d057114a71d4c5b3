//! Synthetic homodyne data, the joint Gaussian likelihood, maximum-likelihood
//! fitting and seeded Monte Carlo campaigns against the Cramér–Rao bound.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{self, crb, fisher_matrix};
use crate::linalg::{self, Mat2, Vec2, Vec4};
use crate::model::{
    closed_form_stats, log_density, HomodyneSettings, NetworkParams, OperatingPoint,
    OutputStatistics, ProbeConfig, ResourceSplit, TuningConstants,
};
use crate::simplex::{self, SimplexOptions};

/// `M` homodyne outcome pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub outcomes: Vec<Vec2>,
    pub seed: u64,
    /// The experiment point the samples were drawn at, when known.
    pub generation: Option<OperatingPoint>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn moments(&self) -> Moments {
        Moments::of(&self.outcomes)
    }
}

/// Sample mean and (biased, `1/M`) scatter matrix: sufficient statistics of
/// the Gaussian likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: Vec2,
    pub scatter: Mat2,
}

impl Moments {
    pub fn of(xs: &[Vec2]) -> Self {
        let n = xs.len() as f64;
        let mut mean = [0.0; 2];
        for x in xs {
            mean[0] += x[0];
            mean[1] += x[1];
        }
        mean = mean.map(|v| v / n);
        let mut s = [[0.0; 2]; 2];
        for x in xs {
            let d = [x[0] - mean[0], x[1] - mean[1]];
            for i in 0..2 {
                for j in 0..2 {
                    s[i][j] += d[i] * d[j];
                }
            }
        }
        Moments {
            count: xs.len(),
            mean,
            scatter: s.map(|row| row.map(|v| v / n)),
        }
    }

    /// `(1/M) Σ (x − μ)(x − μ)ᵀ` about an arbitrary centre.
    fn scatter_about(&self, mu: &Vec2) -> Mat2 {
        let d = [self.mean[0] - mu[0], self.mean[1] - mu[1]];
        let mut s = self.scatter;
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] += d[i] * d[j];
            }
        }
        s
    }
}

/// Lower-triangular `L` with `L Lᵀ = Σ`.
fn cholesky2(cov: &Mat2) -> Result<Mat2> {
    linalg::inv2(cov)?;
    let l11 = cov[0][0].sqrt();
    let l21 = cov[1][0] / l11;
    let l22 = (cov[1][1] - l21 * l21).sqrt();
    Ok([[l11, 0.0], [l21, l22]])
}

/// `m` i.i.d. draws from `N(μ, Σ)`, deterministic in `seed`.
pub fn sample_outcomes(stats: &OutputStatistics, m: usize, seed: u64) -> Result<SampleSet> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "sample size must be at least 1".into(),
        ));
    }
    let l = cholesky2(&stats.covariance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcomes = (0..m)
        .map(|_| {
            let z0: f64 = StandardNormal.sample(&mut rng);
            let z1: f64 = StandardNormal.sample(&mut rng);
            [
                stats.mean[0] + l[0][0] * z0,
                stats.mean[1] + l[1][0] * z0 + l[1][1] * z1,
            ]
        })
        .collect();
    Ok(SampleSet {
        outcomes,
        seed,
        generation: None,
    })
}

/// Samples at an operating point and records it in the returned set.
pub fn simulate(point: &OperatingPoint, m: usize, seed: u64) -> Result<SampleSet> {
    let mut set = sample_outcomes(&point.stats(), m, seed)?;
    set.generation = Some(*point);
    Ok(set)
}

/// `ℓ(φ) = Σ_m log p(x_m | φ)`.
pub fn log_likelihood(
    candidate: &NetworkParams,
    data: &SampleSet,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
) -> Result<f64> {
    let stats = closed_form_stats(candidate, settings, config);
    data.outcomes
        .iter()
        .try_fold(0.0, |acc, x| Ok(acc + log_density(x, &stats)?))
}

/// Per-sample log-likelihood `ℓ/M` evaluated from sufficient statistics.
pub fn mean_log_likelihood(
    candidate: &NetworkParams,
    moments: &Moments,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
) -> Result<f64> {
    let stats = closed_form_stats(candidate, settings, config);
    let inv = linalg::inv2(&stats.covariance)?;
    let det = linalg::det2(&stats.covariance);
    let s = moments.scatter_about(&stats.mean);
    Ok(-(2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln() - 0.5 * linalg::trace_prod2(&inv, &s))
}

/// Gradient of `ℓ` with respect to `φ`:
/// `M [∂μᵀ Σ⁻¹ (x̄ − μ) − ½ Tr(Σ⁻¹∂Σ) + ½ Tr(Σ⁻¹∂Σ Σ⁻¹ S_μ)]`.
pub fn score(
    candidate: &NetworkParams,
    data: &SampleSet,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
) -> Result<Vec4> {
    score_from_moments(candidate, &data.moments(), settings, config)
}

pub fn score_from_moments(
    candidate: &NetworkParams,
    moments: &Moments,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
) -> Result<Vec4> {
    let stats = closed_form_stats(candidate, settings, config);
    let inv = linalg::inv2(&stats.covariance)?;
    let der = fisher::stats_derivatives(candidate, settings, config);
    let resid = [
        moments.mean[0] - stats.mean[0],
        moments.mean[1] - stats.mean[1],
    ];
    let pulled = linalg::mat2_vec(&inv, &resid);
    let s = moments.scatter_about(&stats.mean);
    let inv_s_inv = linalg::mul2(&linalg::mul2(&inv, &s), &inv);
    let m = moments.count as f64;
    Ok(std::array::from_fn(|i| {
        let mean_part = linalg::dot2(&der.dmean[i], &pulled);
        let cov_part = -0.5 * linalg::trace_prod2(&inv, &der.dcov[i])
            + 0.5 * linalg::trace_prod2(&inv_s_inv, &der.dcov[i]);
        m * (mean_part + cov_part)
    }))
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub simplex: SimplexOptions,
    /// Converged fits need `max |∇ℓ| < score_rtol · M`.
    pub score_rtol: f64,
    pub polish_steps: usize,
    /// A second local search starts here. The better maximizer wins; maximizers
    /// with equal likelihood are resolved to the one nearest the anchor.
    pub anchor: Option<NetworkParams>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            simplex: SimplexOptions::default(),
            score_rtol: 1e-6,
            polish_steps: 50,
            anchor: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationResult {
    pub estimate: NetworkParams,
    pub log_likelihood_at_optimum: f64,
    pub converged: bool,
    pub iterations: usize,
    pub initial_point: NetworkParams,
    /// Max-norm of the score at the returned estimate.
    pub score_norm: f64,
}

pub fn mle_fit(
    data: &SampleSet,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
    init: &NetworkParams,
) -> Result<EstimationResult> {
    mle_fit_with(data, settings, config, init, &FitOptions::default())
}

/// Initial simplex edge used to confirm a maximum reached by scoring.
const CONFIRM_STEP: f64 = 1e-4;

/// Log-likelihood gap per sample below which two maximizers count as equivalent.
const TIE_TOLERANCE: f64 = 1e-9;

/// Simplex search on `−ℓ/M`, then Fisher-scoring steps on the analytic score.
/// Points with a degenerate covariance are rejected by the simplex.
///
/// The map from phases to output statistics is not globally one-to-one: away
/// from the truth there are distinct phase vectors with identical `(μ, Σ)`,
/// hence identical likelihood for every data set. A start that sits between
/// two such basins may land in either. Setting [`FitOptions::anchor`] makes
/// the choice deterministic.
pub fn mle_fit_with(
    data: &SampleSet,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
    init: &NetworkParams,
    opts: &FitOptions,
) -> Result<EstimationResult> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    let moments = data.moments();
    let mut best = local_fit(&moments, settings, config, init, opts)?;
    if let Some(anchor) = opts.anchor {
        // Scoring first keeps the anchored search inside the anchor's own basin;
        // the simplex then only confirms the maximum from close range.
        let start = scoring_ascent(
            &moments,
            settings,
            config,
            anchor.to_array(),
            opts.polish_steps,
        )
        .map(|(x, _, _)| NetworkParams::from_array(x))
        .unwrap_or(anchor);
        let confirm = FitOptions {
            simplex: SimplexOptions {
                step: CONFIRM_STEP,
                ..opts.simplex
            },
            ..*opts
        };
        let other = local_fit(&moments, settings, config, &start, &confirm)?;
        let gap = other.log_likelihood_at_optimum - best.log_likelihood_at_optimum;
        let tie = gap.abs() <= TIE_TOLERANCE * moments.count as f64;
        let closer = distance(&other.estimate, &anchor) < distance(&best.estimate, &anchor);
        let take = match (best.converged, other.converged) {
            (false, true) => true,
            (true, false) => false,
            _ => (tie && closer) || (!tie && gap > 0.0),
        };
        if take {
            best = EstimationResult {
                iterations: best.iterations + other.iterations,
                initial_point: *init,
                ..other
            };
        } else {
            best.iterations += other.iterations;
        }
    }
    Ok(best)
}

fn distance(a: &NetworkParams, reference: &NetworkParams) -> f64 {
    let a = a.nearest_branch(reference).to_array();
    let r = reference.to_array();
    (0..4).map(|i| (a[i] - r[i]).powi(2)).sum::<f64>().sqrt()
}

fn local_fit(
    moments: &Moments,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
    init: &NetworkParams,
    opts: &FitOptions,
) -> Result<EstimationResult> {
    let objective = |x: &[f64; 4]| {
        mean_log_likelihood(&NetworkParams::from_array(*x), moments, settings, config)
            .map(|l| -l)
            .unwrap_or(f64::INFINITY)
    };
    let search = simplex::minimize(objective, init.to_array(), &opts.simplex);

    let m = moments.count as f64;
    let tolerance = opts.score_rtol * m;
    let (x, _, grad) = match scoring_ascent(moments, settings, config, search.x, opts.polish_steps)
    {
        Ok(done) => done,
        Err(_) => (
            search.x,
            -search.value,
            score_from_moments(
                &NetworkParams::from_array(search.x),
                moments,
                settings,
                config,
            )?,
        ),
    };

    let estimate = NetworkParams::from_array(x);
    let score_norm = max_abs(&grad);
    Ok(EstimationResult {
        estimate,
        log_likelihood_at_optimum: mean_log_likelihood(&estimate, moments, settings, config)? * m,
        converged: search.converged && score_norm < tolerance,
        iterations: search.iterations,
        initial_point: *init,
        score_norm,
    })
}

/// Fisher-scoring steps `φ ← φ + F⁻¹ ∇ℓ / M` with step halving. Returns the
/// final point, its mean log-likelihood and its score.
fn scoring_ascent(
    moments: &Moments,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
    start: [f64; 4],
    steps: usize,
) -> Result<([f64; 4], f64, Vec4)> {
    let m = moments.count as f64;
    let mut x = start;
    let here = NetworkParams::from_array(x);
    let mut value = mean_log_likelihood(&here, moments, settings, config)?;
    let mut grad = score_from_moments(&here, moments, settings, config)?;
    for _ in 0..steps {
        // Well below any convergence threshold in use.
        if max_abs(&grad) < 1e-10 * m {
            break;
        }
        let here = NetworkParams::from_array(x);
        let info = match fisher_matrix(&here, settings, config)
            .and_then(|f| linalg::invert4(&f.f_total))
        {
            Ok(inv) => inv.inverse,
            Err(_) => break,
        };
        let step: [f64; 4] =
            std::array::from_fn(|i| (0..4).map(|j| info[i][j] * grad[j]).sum::<f64>() / m);
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-6 {
            let trial: [f64; 4] = std::array::from_fn(|i| x[i] + t * step[i]);
            let p = NetworkParams::from_array(trial);
            if let (Ok(v), Ok(g)) = (
                mean_log_likelihood(&p, moments, settings, config),
                score_from_moments(&p, moments, settings, config),
            ) {
                if v >= value - 1e-15 * value.abs().max(1.0) || max_abs(&g) < max_abs(&grad) {
                    x = trial;
                    value = value.max(v);
                    grad = g;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok((x, value, grad))
}

fn max_abs(v: &[f64; 4]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves the φ1 score equation `∂1μᵀ Σ⁻¹ (μ − x̄) = 0` with the other three
/// parameters held at `fixed`, starting from `fixed.phi1`. Because Σ does not
/// depend on φ1 this involves the sample mean only.
pub fn fit_phi1_only(
    data: &SampleSet,
    settings: &HomodyneSettings,
    config: &ProbeConfig,
    fixed: &NetworkParams,
) -> Result<f64> {
    let xbar = data.moments().mean;
    let equation = |phi1: f64| -> Result<(f64, f64)> {
        let p = NetworkParams { phi1, ..*fixed };
        let stats = closed_form_stats(&p, settings, config);
        let inv = linalg::inv2(&stats.covariance)?;
        let der = fisher::stats_derivatives(&p, settings, config);
        let resid = [stats.mean[0] - xbar[0], stats.mean[1] - xbar[1]];
        let g = linalg::dot2(&der.dmean[1], &linalg::mat2_vec(&inv, &resid));
        // Gauss–Newton curvature ∂1μᵀ Σ⁻¹ ∂1μ.
        let h = linalg::dot2(&der.dmean[1], &linalg::mat2_vec(&inv, &der.dmean[1]));
        Ok((g, h))
    };
    let mut phi1 = fixed.phi1;
    for _ in 0..200 {
        let (g, h) = equation(phi1)?;
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(
                "phi1 carries no information at this point".into(),
            ));
        }
        let step = -g / h;
        phi1 += step;
        if step.abs() < 1e-14 * phi1.abs().max(1.0) {
            break;
        }
    }
    Ok(phi1)
}

/// How per-trial sample seeds are derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedMode {
    /// Trial `i` draws from ChaCha stream `i` keyed by the master seed.
    PerTrial,
    /// Every trial reuses the master seed (degenerate, for testing).
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub truth: NetworkParams,
    pub k: TuningConstants,
    pub split: ResourceSplit,
    pub m: usize,
    pub trials: usize,
    pub master_seed: u64,
    /// Fits start at `truth + init_offset` in every coordinate.
    pub init_offset: f64,
    pub seed_mode: SeedMode,
}

impl MonteCarloConfig {
    pub fn new(
        truth: NetworkParams,
        k: TuningConstants,
        split: ResourceSplit,
        m: usize,
        trials: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            truth,
            k,
            split,
            m,
            trials,
            master_seed,
            init_offset: 0.05,
            seed_mode: SeedMode::PerTrial,
        }
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        match self.seed_mode {
            SeedMode::Shared => self.master_seed,
            SeedMode::PerTrial => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
                rng.set_stream(trial as u64);
                rng.next_u64()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub std_dev: f64,
    pub crb_std: f64,
    /// `Δφ̃ / Δφ^CRB`
    pub normalized_ratio: f64,
    pub mean_estimate: f64,
    /// `E[φ̃] / φ`; NaN when the true value is zero.
    pub bias_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub converged: usize,
    pub excluded: usize,
    /// False when more than 5% of trials failed to converge.
    pub valid: bool,
    pub per_parameter: [ParameterSummary; 4],
    pub settings: MonteCarloConfig,
    pub master_seed: u64,
}

/// Maximum fraction of non-converged trials for a valid summary.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.05;

pub fn monte_carlo(
    truth: &NetworkParams,
    k: &TuningConstants,
    split: &ResourceSplit,
    m: usize,
    trials: usize,
    master_seed: u64,
) -> Result<MonteCarloSummary> {
    run_monte_carlo(&MonteCarloConfig::new(
        *truth,
        *k,
        *split,
        m,
        trials,
        master_seed,
    ))
}

pub fn run_monte_carlo(cfg: &MonteCarloConfig) -> Result<MonteCarloSummary> {
    if cfg.trials < 2 {
        return Err(Error::InvalidArgument(
            "at least two trials are required".into(),
        ));
    }
    if cfg.m == 0 {
        return Err(Error::InvalidArgument(
            "sample size must be at least 1".into(),
        ));
    }
    let point = OperatingPoint::tuned(cfg.truth, &cfg.k, &cfg.split)?;
    let bound = crb(
        &fisher_matrix(&point.params, &point.settings, &point.probe)?,
        cfg.m as u64,
    )?;
    let crb_std = bound.marginal_std();
    let init = NetworkParams::from_array(cfg.truth.to_array().map(|v| v + cfg.init_offset));
    let fit_opts = FitOptions {
        anchor: Some(cfg.truth),
        ..FitOptions::default()
    };

    let run_trial = |trial: usize| -> Result<Option<Vec4>> {
        let data = simulate(&point, cfg.m, cfg.trial_seed(trial))?;
        let fit = mle_fit_with(&data, &point.settings, &point.probe, &init, &fit_opts)?;
        Ok(fit
            .converged
            .then(|| fit.estimate.nearest_branch(&cfg.truth).to_array()))
    };

    #[cfg(feature = "parallel")]
    let outcomes: Vec<Result<Option<Vec4>>> = {
        use rayon::prelude::*;
        (0..cfg.trials).into_par_iter().map(run_trial).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Result<Option<Vec4>>> = (0..cfg.trials).map(run_trial).collect();

    // Reduction in trial order keeps the summary independent of scheduling.
    let mut estimates = Vec::with_capacity(cfg.trials);
    for o in outcomes {
        if let Some(e) = o? {
            estimates.push(e);
        }
    }
    let converged = estimates.len();
    let excluded = cfg.trials - converged;
    let valid = converged >= 2 && (excluded as f64) <= MAX_EXCLUDED_FRACTION * cfg.trials as f64;

    let truth = cfg.truth.to_array();
    let per_parameter = std::array::from_fn(|i| {
        let n = converged as f64;
        let mean = estimates.iter().map(|e| e[i]).sum::<f64>() / n;
        let var = estimates.iter().map(|e| (e[i] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let std_dev = var.sqrt();
        ParameterSummary {
            std_dev,
            crb_std: crb_std[i],
            normalized_ratio: std_dev / crb_std[i],
            mean_estimate: mean,
            bias_ratio: if truth[i] == 0.0 {
                f64::NAN
            } else {
                mean / truth[i]
            },
        }
    });

    Ok(MonteCarloSummary {
        trials: cfg.trials,
        converged,
        excluded,
        valid,
        per_parameter,
        settings: *cfg,
        master_seed: cfg.master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn point() -> OperatingPoint {
        OperatingPoint::tuned(
            NetworkParams::new(0.3, 0.8, 0.5, FRAC_PI_4),
            &TuningConstants::new(0.5, 0.5, 0.0),
            &ResourceSplit::new(10.0, 0.5).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn sample_covariance_matches() {
        let stats = OutputStatistics {
            mean: [0.0, 0.0],
            covariance: [[0.5, 0.0], [0.0, 0.5]],
        };
        let set = sample_outcomes(&stats, 100_000, 11).unwrap();
        let mo = set.moments();
        for i in 0..2 {
            for j in 0..2 {
                assert!((mo.scatter[i][j] - stats.covariance[i][j]).abs() < 0.02 * 0.5);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let stats = point().stats();
        let a = sample_outcomes(&stats, 1, 42).unwrap();
        let b = sample_outcomes(&stats, 1, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_outcomes(&stats, 1, 43).unwrap();
        assert_ne!(a.outcomes[0], c.outcomes[0]);
        assert!(sample_outcomes(&stats, 0, 1).is_err());
    }

    #[test]
    fn single_sample_at_mean() {
        let stats = OutputStatistics {
            mean: [0.7, 0.1],
            covariance: [[0.5, 0.0], [0.0, 0.5]],
        };
        let set = SampleSet {
            outcomes: vec![stats.mean],
            seed: 0,
            generation: None,
        };
        let mo = set.moments();
        assert_eq!(mo.scatter, [[0.0; 2]; 2]);
        let ll = log_density(&set.outcomes[0], &stats).unwrap();
        assert!((ll + PI.ln()).abs() < 1e-14);
    }

    #[test]
    fn likelihood_paths_agree_and_ignore_order() {
        let p = point();
        let mut data = simulate(&p, 300, 5).unwrap();
        let cand = NetworkParams::new(0.31, 0.78, 0.52, 0.79);
        let direct = log_likelihood(&cand, &data, &p.settings, &p.probe).unwrap();
        let fast =
            mean_log_likelihood(&cand, &data.moments(), &p.settings, &p.probe).unwrap() * 300.0;
        assert!((direct - fast).abs() < 1e-9 * direct.abs());
        data.outcomes.reverse();
        let shuffled = log_likelihood(&cand, &data, &p.settings, &p.probe).unwrap();
        assert!((direct - shuffled).abs() < 1e-9 * direct.abs());
    }

    #[test]
    fn score_matches_finite_difference() {
        let p = point();
        let data = simulate(&p, 200, 9).unwrap();
        let cand = NetworkParams::new(0.32, 0.77, 0.49, 0.8);
        let g = score(&cand, &data, &p.settings, &p.probe).unwrap();
        let h = 1e-6;
        for i in 0..4 {
            let mut up = cand.to_array();
            let mut dn = cand.to_array();
            up[i] += h;
            dn[i] -= h;
            let lu = log_likelihood(&NetworkParams::from_array(up), &data, &p.settings, &p.probe)
                .unwrap();
            let ld = log_likelihood(&NetworkParams::from_array(dn), &data, &p.settings, &p.probe)
                .unwrap();
            let fd = (lu - ld) / (2.0 * h);
            assert!(
                (fd - g[i]).abs() < 1e-5 * g[i].abs().max(1.0),
                "i={i}: fd {fd} vs {}",
                g[i]
            );
        }
    }

    #[test]
    fn noise_free_data_is_a_fixed_point() {
        let p = point();
        let stats = p.stats();
        let data = SampleSet {
            outcomes: vec![stats.mean; 50],
            seed: 0,
            generation: Some(p),
        };
        // With zero scatter the optimum is not at the truth (Σ shrinks), but the
        // mean term of the score vanishes there: φ1 is exactly recovered.
        let phi1 = fit_phi1_only(&data, &p.settings, &p.probe, &p.params).unwrap();
        assert!((phi1 - p.params.phi1).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_truth_within_crb() {
        let p = point();
        let data = simulate(&p, 200, 2024).unwrap();
        let init = NetworkParams::from_array(p.params.to_array().map(|v| v + 0.05));
        let opts = FitOptions {
            anchor: Some(p.params),
            ..FitOptions::default()
        };
        let fit = mle_fit_with(&data, &p.settings, &p.probe, &init, &opts).unwrap();
        assert!(fit.converged, "{fit:?}");
        assert_eq!(fit.initial_point, init);
        let bound = crb(
            &fisher_matrix(&p.params, &p.settings, &p.probe).unwrap(),
            200,
        )
        .unwrap();
        let est = fit.estimate.to_array();
        let truth = p.params.to_array();
        for i in 0..4 {
            let z = (est[i] - truth[i]).abs() / bound.marginal_std()[i];
            assert!(z < 5.0, "parameter {i}: {z} CRB std away");
        }
    }

    #[test]
    fn equivalent_maximizers_share_statistics() {
        let p = point();
        let data = simulate(&p, 200, 2024).unwrap();
        let init = NetworkParams::from_array(p.params.to_array().map(|v| v + 0.05));
        let free = mle_fit(&data, &p.settings, &p.probe, &init).unwrap();
        let anchored = mle_fit_with(
            &data,
            &p.settings,
            &p.probe,
            &init,
            &FitOptions {
                anchor: Some(p.params),
                ..FitOptions::default()
            },
        )
        .unwrap();
        assert!(free.converged && anchored.converged);
        assert!((free.estimate.phi0 - anchored.estimate.phi0).abs() > 0.05);
        let a = closed_form_stats(&free.estimate, &p.settings, &p.probe);
        let b = closed_form_stats(&anchored.estimate, &p.settings, &p.probe);
        assert!(linalg::max_abs_diff2(&a.covariance, &b.covariance) < 1e-8);
        assert!((a.mean[0] - b.mean[0]).abs() < 1e-8 && (a.mean[1] - b.mean[1]).abs() < 1e-8);
        assert!((free.log_likelihood_at_optimum - anchored.log_likelihood_at_optimum).abs() < 1e-6);
    }

    #[test]
    fn phi1_only_fit_agrees_with_full_fit() {
        let p = point();
        let data = simulate(&p, 200, 77).unwrap();
        let fit = mle_fit(&data, &p.settings, &p.probe, &p.params).unwrap();
        let start = NetworkParams {
            phi1: p.params.phi1,
            ..fit.estimate
        };
        let phi1 = fit_phi1_only(&data, &p.settings, &p.probe, &start).unwrap();
        assert!(
            (phi1 - fit.estimate.phi1).abs() < 1e-7,
            "{phi1} vs {}",
            fit.estimate.phi1
        );

        // others at truth: close to the full fit within a fraction of the bound
        let at_truth = fit_phi1_only(&data, &p.settings, &p.probe, &p.params).unwrap();
        let bound = crb(
            &fisher_matrix(&p.params, &p.settings, &p.probe).unwrap(),
            200,
        )
        .unwrap();
        assert!((at_truth - fit.estimate.phi1).abs() < 3.0 * bound.marginal_std()[1]);
    }

    #[test]
    fn shared_seed_gives_zero_spread() {
        let mut cfg = MonteCarloConfig::new(
            NetworkParams::new(0.3, 0.8, 0.5, FRAC_PI_4),
            TuningConstants::new(0.5, 0.5, 0.0),
            ResourceSplit::new(10.0, 0.5).unwrap(),
            50,
            2,
            3,
        );
        cfg.seed_mode = SeedMode::Shared;
        let s = run_monte_carlo(&cfg).unwrap();
        for p in &s.per_parameter {
            assert_eq!(p.std_dev, 0.0);
        }
        cfg.trials = 1;
        assert!(run_monte_carlo(&cfg).is_err());
    }

    #[test]
    fn trial_seeds_differ() {
        let cfg = MonteCarloConfig::new(
            NetworkParams::new(0.3, 0.8, 0.5, FRAC_PI_4),
            TuningConstants::new(0.5, 0.5, 0.0),
            ResourceSplit::new(10.0, 0.5).unwrap(),
            50,
            10,
            3,
        );
        let seeds: std::collections::HashSet<u64> = (0..10).map(|i| cfg.trial_seed(i)).collect();
        assert_eq!(seeds.len(), 10);
        assert_eq!(cfg.trial_seed(4), cfg.trial_seed(4));
    }
}
