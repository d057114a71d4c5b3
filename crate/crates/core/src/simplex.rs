//! Nelder–Mead downhill simplex for small fixed-dimension problems.

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub step: f64,
    /// Stop once every vertex is within this max-norm distance of the best.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            step: 0.05,
            xtol: 1e-9,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexResult<const D: usize> {
    pub x: [f64; D],
    pub value: f64,
    pub iterations: usize,
    pub diameter: f64,
    pub converged: bool,
}

/// Minimizes `f` from `x0`. Non-finite values are treated as `+∞`, so a
/// caller can reject a point by returning `NaN` or `∞`.
pub fn minimize<const D: usize, F>(
    mut f: F,
    x0: [f64; D],
    opts: &SimplexOptions,
) -> SimplexResult<D>
where
    F: FnMut(&[f64; D]) -> f64,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let mut eval = |x: &[f64; D]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut pts: Vec<[f64; D]> = Vec::with_capacity(D + 1);
    pts.push(x0);
    for i in 0..D {
        let mut p = x0;
        p[i] += opts.step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(&mut eval).collect();

    let mut iterations = 0;
    loop {
        let mut order: Vec<usize> = (0..=D).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i]).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let diameter = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < opts.xtol || iterations >= opts.max_iter {
            return SimplexResult {
                x: pts[0],
                value: vals[0],
                iterations,
                diameter,
                converged: diameter < opts.xtol,
            };
        }
        iterations += 1;

        let mut centroid = [0.0; D];
        for p in &pts[..D] {
            for k in 0..D {
                centroid[k] += p[k] / D as f64;
            }
        }
        let along = |t: f64| -> [f64; D] {
            std::array::from_fn(|k| centroid[k] + t * (pts[D][k] - centroid[k]))
        };

        let xr = along(-REFLECT);
        let fr = eval(&xr);
        if fr < vals[0] {
            let xe = along(-EXPAND);
            let fe = eval(&xe);
            if fe < fr {
                pts[D] = xe;
                vals[D] = fe;
            } else {
                pts[D] = xr;
                vals[D] = fr;
            }
            continue;
        }
        if fr < vals[D - 1] {
            pts[D] = xr;
            vals[D] = fr;
            continue;
        }

        let (xc, fc) = if fr < vals[D] {
            let x = along(-CONTRACT);
            let v = eval(&x);
            (x, v)
        } else {
            let x = along(CONTRACT);
            let v = eval(&x);
            (x, v)
        };
        if fc < vals[D].min(fr) {
            pts[D] = xc;
            vals[D] = fc;
            continue;
        }

        let best = pts[0];
        for i in 1..=D {
            for k in 0..D {
                pts[i][k] = best[k] + SHRINK * (pts[i][k] - best[k]);
            }
            vals[i] = eval(&pts[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let r = minimize(
            |x: &[f64; 3]| (x[0] - 1.0).powi(2) + 4.0 * (x[1] + 2.0).powi(2) + (x[2] - 0.5).powi(2),
            [0.0; 3],
            &SimplexOptions {
                step: 0.5,
                ..Default::default()
            },
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-8);
        assert!((r.x[1] + 2.0).abs() < 1e-8);
        assert!((r.x[2] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock() {
        let r = minimize(
            |x: &[f64; 2]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            [-1.2, 1.0],
            &SimplexOptions {
                step: 0.1,
                xtol: 1e-10,
                max_iter: 10_000,
            },
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn avoids_rejected_region() {
        let r = minimize(
            |x: &[f64; 2]| {
                if x[0] < 0.2 {
                    f64::NAN
                } else {
                    (x[0] - 0.1).powi(2) + x[1] * x[1]
                }
            },
            [1.0, 1.0],
            &SimplexOptions::default(),
        );
        assert!(r.x[0] >= 0.2);
        assert!((r.x[0] - 0.2).abs() < 1e-6);
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let r = minimize(
            |x: &[f64; 2]| x[0] * x[0] + x[1] * x[1],
            [5.0, 5.0],
            &SimplexOptions {
                step: 1.0,
                xtol: 1e-12,
                max_iter: 5,
            },
        );
        assert!(!r.converged);
        assert_eq!(r.iterations, 5);
    }
}
