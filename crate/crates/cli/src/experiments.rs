//! One runner per experiment. Each turns a validated config into a
//! [`ResultTable`] whose rows follow grid order exactly.

use homodyne_u2::{
    coefficient_total, crb, fisher_matrix, monte_carlo, singularity_check, CoefficientMatrices,
    MonteCarloSummary, NetworkParams, OperatingPoint, ResourceSplit, Singularity, TuningConstants,
};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::table::{ChartSpec, Provenance, ResultTable};

const PARAMS: [&str; 4] = ["phi0", "phi1", "phi2", "phi3"];

/// A finished table plus the indices of Monte Carlo rows whose summary was
/// flagged invalid. Invalid rows are still written out.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: ResultTable,
    pub invalid_rows: Vec<usize>,
}

pub fn run_experiment(
    experiment: Experiment,
    config: &ExperimentConfig,
) -> Result<RunOutput, CliError> {
    config.validate(experiment)?;
    match experiment {
        Experiment::FimScan => run_fim_scan(config).map(complete),
        Experiment::FimDiag => run_fim_diag(config).map(complete),
        Experiment::MleVsM => run_mle_vs_m(config),
        Experiment::MleVsN => run_mle_vs_n(config),
        Experiment::SingularityScan => run_singularity_scan(config).map(complete),
    }
}

fn complete(table: ResultTable) -> RunOutput {
    RunOutput {
        table,
        invalid_rows: Vec::new(),
    }
}

fn columns(names: impl IntoIterator<Item = String>) -> Vec<String> {
    names.into_iter().collect()
}

fn per_param(prefix: &str) -> impl Iterator<Item = String> + '_ {
    PARAMS.iter().map(move |p| format!("{prefix}_{p}"))
}

fn reject_singular(k: &TuningConstants) -> Result<(), CliError> {
    let report = singularity_check(k);
    if report.class != Singularity::Nonsingular {
        return Err(CliError::Singular(format!(
            "k = ({}, {}, {}) is {}",
            k.k1, k.k2, k.k3, report.class
        )));
    }
    Ok(())
}

/// `diag(F⁻¹)` of the exact matrix at the asymptotic operating point.
fn exact_inverse_diag(
    config: &ExperimentConfig,
    k: &TuningConstants,
    n: f64,
) -> Result<[f64; 4], CliError> {
    let split = ResourceSplit::new(n, config.beta)?;
    let op = OperatingPoint::asymptotic(config.truth, k, &split)?;
    let f = fisher_matrix(&op.params, &op.settings, &op.probe)?;
    Ok(crb(&f, 1)?.marginal_bounds)
}

/// Shared grid walk of the two Fisher experiments: one row per `(k, N)`.
fn fisher_rows(
    config: &ExperimentConfig,
    row: impl Fn(usize, &TuningConstants, f64, [f64; 4], [f64; 4]) -> Vec<f64> + Sync,
) -> Result<Vec<Vec<f64>>, CliError> {
    let mut plateaus = Vec::with_capacity(config.k.len());
    for k in &config.k {
        reject_singular(k)?;
        plateaus.push(coefficient_total(k, config.beta, config.truth.phi1)?.inverse_diag);
    }
    let cells: Vec<(usize, f64)> = (0..config.k.len())
        .flat_map(|ki| config.n_grid.iter().map(move |&n| (ki, n)))
        .collect();
    cells
        .par_iter()
        .map(|&(ki, n)| {
            let k = &config.k[ki];
            let inv = exact_inverse_diag(config, k, n)?;
            Ok(row(ki, k, n, inv, plateaus[ki]))
        })
        .collect()
}

pub fn run_fim_scan(config: &ExperimentConfig) -> Result<ResultTable, CliError> {
    let rows = fisher_rows(config, |ki, k, n, inv, plateau| {
        vec![
            ki as f64,
            k.k1,
            k.k2,
            k.k3,
            n,
            n * n * inv.iter().sum::<f64>(),
            plateau.iter().sum(),
        ]
    })?;
    Ok(ResultTable {
        experiment: Experiment::FimScan,
        columns: columns(
            ["k_index", "k1", "k2", "k3", "N", "n2_trace_inv", "plateau"].map(String::from),
        ),
        rows,
        provenance: Provenance::of(config),
        chart: ChartSpec {
            x: 4,
            ys: vec![5, 6],
            group: vec![0],
            log_x: true,
            log_y: true,
            y_label: "N² Tr[F⁻¹]".into(),
        },
    })
}

pub fn run_fim_diag(config: &ExperimentConfig) -> Result<ResultTable, CliError> {
    let rows = fisher_rows(config, |ki, k, n, inv, plateau| {
        let mut r = vec![ki as f64, k.k1, k.k2, k.k3, n];
        r.extend(inv.iter().map(|v| 1.0 / (n * n * v)));
        r.extend(plateau.iter().map(|v| 1.0 / v));
        r
    })?;
    let cols = columns(
        ["k_index", "k1", "k2", "k3", "N"]
            .map(String::from)
            .into_iter()
            .chain(per_param("eff"))
            .chain(per_param("plateau")),
    );
    Ok(ResultTable {
        experiment: Experiment::FimDiag,
        columns: cols,
        rows,
        provenance: Provenance::of(config),
        chart: ChartSpec {
            x: 4,
            ys: (5..9).collect(),
            group: vec![0],
            log_x: true,
            log_y: true,
            y_label: "1 / (N² (F⁻¹)ii)".into(),
        },
    })
}

/// Seed of the `row`-th Monte Carlo run of a table. Row 0 uses the master
/// seed itself.
pub fn row_seed(master: u64, row: usize) -> u64 {
    master ^ (row as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn mle_columns() -> Vec<String> {
    columns(
        ["truth_index"]
            .map(String::from)
            .into_iter()
            .chain(per_param("true"))
            .chain(["N", "M"].map(String::from))
            .chain(per_param("ratio"))
            .chain(per_param("bias"))
            .chain(per_param("std"))
            .chain(per_param("crb_std"))
            .chain(["converged", "excluded", "valid"].map(String::from)),
    )
}

fn mle_row(ti: usize, truth: &NetworkParams, n: f64, m: u64, s: &MonteCarloSummary) -> Vec<f64> {
    let mut r = vec![ti as f64];
    r.extend(truth.to_array());
    r.extend([n, m as f64]);
    r.extend(s.per_parameter.iter().map(|p| p.normalized_ratio));
    r.extend(s.per_parameter.iter().map(|p| p.bias_ratio));
    r.extend(s.per_parameter.iter().map(|p| p.std_dev));
    r.extend(s.per_parameter.iter().map(|p| p.crb_std));
    r.extend([
        s.converged as f64,
        s.excluded as f64,
        if s.valid { 1.0 } else { 0.0 },
    ]);
    r
}

/// Monte Carlo over `points = [(N, M)]` for every truth tuple, in
/// truth-major order.
fn mle_table(
    experiment: Experiment,
    config: &ExperimentConfig,
    points: &[(f64, u64)],
    x: usize,
) -> Result<RunOutput, CliError> {
    let k = config.k[0];
    let mut rows = Vec::new();
    let mut invalid_rows = Vec::new();
    for (ti, truth) in config.truths().iter().enumerate() {
        for &(n, m) in points {
            let split = ResourceSplit::new(n, config.beta)?;
            let seed = row_seed(config.master_seed, rows.len());
            let summary = monte_carlo(truth, &k, &split, m as usize, config.trials as usize, seed)?;
            if !summary.valid {
                invalid_rows.push(rows.len());
            }
            rows.push(mle_row(ti, truth, n, m, &summary));
        }
    }
    let ratio0 = mle_columns()
        .iter()
        .position(|c| c == "ratio_phi0")
        .unwrap();
    Ok(RunOutput {
        table: ResultTable {
            experiment,
            columns: mle_columns(),
            rows,
            provenance: Provenance::of(config),
            chart: ChartSpec {
                x,
                ys: (ratio0..ratio0 + 4).collect(),
                group: vec![0],
                log_x: true,
                log_y: false,
                y_label: "Δφ̃ / Δφ CRB".into(),
            },
        },
        invalid_rows,
    })
}

pub fn run_mle_vs_m(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let points: Vec<(f64, u64)> = config.m_grid.iter().map(|&m| (config.n_total, m)).collect();
    mle_table(Experiment::MleVsM, config, &points, 6)
}

pub fn run_mle_vs_n(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let points: Vec<(f64, u64)> = config.n_grid.iter().map(|&n| (n, config.m)).collect();
    mle_table(Experiment::MleVsN, config, &points, 5)
}

pub fn run_singularity_scan(config: &ExperimentConfig) -> Result<ResultTable, CliError> {
    let cells: Vec<TuningConstants> = config
        .k3_grid
        .iter()
        .flat_map(|&k3| {
            config.k1_grid.iter().flat_map(move |&k1| {
                config
                    .k2_grid
                    .iter()
                    .map(move |&k2| TuningConstants::new(k1, k2, k3))
            })
        })
        .collect();
    let rows = cells
        .par_iter()
        .map(|k| {
            let report = singularity_check(k);
            let min_eig =
                CoefficientMatrices::assemble(k, config.beta, config.truth.phi1).min_eigenvalue();
            vec![
                k.k1,
                k.k2,
                k.k3,
                report.det_factor,
                min_eig,
                report.class.code() as f64,
            ]
        })
        .collect();
    Ok(ResultTable {
        experiment: Experiment::SingularityScan,
        columns: columns(
            [
                "k1",
                "k2",
                "k3",
                "det_factor",
                "min_eigenvalue",
                "class_code",
            ]
            .map(String::from),
        ),
        rows,
        provenance: Provenance::of(config),
        chart: ChartSpec {
            x: 0,
            ys: vec![4],
            group: vec![2, 1],
            log_x: false,
            log_y: false,
            y_label: "smallest eigenvalue".into(),
        },
    })
}
