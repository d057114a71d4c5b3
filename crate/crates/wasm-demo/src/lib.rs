//! Browser bindings for the static demo page in `www/`. Every function
//! returns a flat `Float64Array` so the page can draw without extra glue.

use homodyne_u2::fisher::CoefficientMatrices;
use homodyne_u2::{
    coefficient_total, crb, fisher_matrix, simulate, singularity_check, NetworkParams,
    OperatingPoint, ResourceSplit, Singularity, TuningConstants,
};
use wasm_bindgen::prelude::*;

fn js(e: homodyne_u2::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Output statistics and `samples` simulated outcomes at the tuned
/// operating point: `[μ1, μ2, Σ11, Σ12, Σ22, x1, x2, x1, x2, …]`.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn output_cloud(
    phi0: f64,
    phi1: f64,
    phi2: f64,
    phi3: f64,
    k1: f64,
    k2: f64,
    n_total: f64,
    beta: f64,
    samples: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    let truth = NetworkParams::new(phi0, phi1, phi2, phi3);
    let split = ResourceSplit::new(n_total, beta).map_err(js)?;
    let point =
        OperatingPoint::tuned(truth, &TuningConstants::new(k1, k2, 0.0), &split).map_err(js)?;
    let st = point.stats();
    let mut out = vec![
        st.mean[0],
        st.mean[1],
        st.covariance[0][0],
        st.covariance[0][1],
        st.covariance[1][1],
    ];
    if samples > 0 {
        let data = simulate(&point, samples, u64::from(seed)).map_err(js)?;
        out.extend(data.outcomes.iter().flatten());
    }
    Ok(out)
}

/// `N² Tr[F⁻¹]` on a log grid of `points` photon numbers between `n_min` and
/// `n_max`: `[plateau, N, value, N, value, …]`. Singular `k` is an error
/// naming the locus.
#[wasm_bindgen]
pub fn fisher_curve(
    k1: f64,
    k2: f64,
    k3: f64,
    beta: f64,
    n_min: f64,
    n_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let k = TuningConstants::new(k1, k2, k3);
    let report = singularity_check(&k);
    if report.class != Singularity::Nonsingular {
        return Err(JsError::new(&format!("k is {}", report.class)));
    }
    if !(n_min > 0.0 && n_max > n_min && points >= 2) {
        return Err(JsError::new(
            "need 0 < n_min < n_max and at least two points",
        ));
    }
    let phases = NetworkParams::new(0.3, 0.8, 0.5, 0.0);
    let plateau = coefficient_total(&k, beta, phases.phi1)
        .map_err(js)?
        .trace_inverse();
    let mut out = vec![plateau];
    let step = (n_max / n_min).ln() / (points - 1) as f64;
    for i in 0..points {
        let n = n_min * (step * i as f64).exp();
        let split = ResourceSplit::new(n, beta).map_err(js)?;
        let op = OperatingPoint::asymptotic(phases, &k, &split).map_err(js)?;
        let f = fisher_matrix(&op.params, &op.settings, &op.probe).map_err(js)?;
        let bound = crb(&f, 1).map_err(js)?;
        out.extend([n, n * n * bound.trace_bound]);
    }
    Ok(out)
}

/// Smallest eigenvalue of the leading-order coefficient matrix on a
/// `resolution × resolution` grid over `(k1, k2) ∈ [−span, span]²`, row-major
/// with `k2` varying fastest.
#[wasm_bindgen]
pub fn singularity_map(
    k3: f64,
    beta: f64,
    span: f64,
    resolution: usize,
) -> Result<Vec<f64>, JsError> {
    if !(beta > 0.0 && beta < 1.0)
        || span.is_nan()
        || span <= 0.0
        || !(2..=400).contains(&resolution)
    {
        return Err(JsError::new(
            "need beta in (0, 1), span > 0 and 2 ≤ resolution ≤ 400",
        ));
    }
    let at = |i: usize| -span + 2.0 * span * i as f64 / (resolution - 1) as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            let k = TuningConstants::new(at(i), at(j), k3);
            out.push(CoefficientMatrices::assemble(&k, beta, 0.8).min_eigenvalue());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cloud_layout() {
        let v = output_cloud(
            0.3,
            0.8,
            0.5,
            std::f64::consts::FRAC_PI_4,
            0.5,
            0.5,
            10.0,
            0.5,
            7,
            1,
        )
        .unwrap();
        assert_eq!(v.len(), 5 + 14);
        assert!(v[2] > 0.0 && v[4] > 0.0);
    }

    #[test]
    fn curve_reaches_plateau() {
        let v = fisher_curve(0.5, 0.5, 0.0, 0.5, 10.0, 1e4, 4).unwrap();
        assert!((v[0] - 10.0).abs() < 1e-9);
        assert_eq!(v.len(), 9);
        assert!((v[8] - 10.0).abs() < 0.02);
    }

    #[test]
    fn map_size() {
        let v = singularity_map(0.0, 0.5, 2.0, 5).unwrap();
        assert_eq!(v.len(), 25);
        // the centre is k = 0, which lies on both loci
        assert!(v[12].abs() < 1e-10);
    }
}
