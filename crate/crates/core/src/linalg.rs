//! Fixed-size dense helpers for the 2×2 outcome statistics and the 4×4
//! phase-space / Fisher matrices.

use nalgebra::{Matrix4, SymmetricEigen};

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];
pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

/// Relative determinant threshold below which a 2×2 covariance is refused.
pub const DEGENERACY_RTOL: f64 = 1e-12;

/// Condition number above which a 4×4 inversion is refused.
pub const MAX_CONDITION: f64 = 1e12;

pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Guarded closed-form inverse of a symmetric positive definite 2×2 matrix.
pub fn inv2(m: &Mat2) -> Result<Mat2> {
    let det = det2(m);
    let threshold = DEGENERACY_RTOL * (m[0][0] * m[1][1]).abs();
    if !(m[0][0] > 0.0 && m[1][1] > 0.0 && det > threshold && det.is_finite()) {
        return Err(Error::DegenerateCovariance { det, threshold });
    }
    Ok([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_vec(a: &Mat2, v: &Vec2) -> Vec2 {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

pub fn dot2(a: &Vec2, b: &Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn trace2(m: &Mat2) -> f64 {
    m[0][0] + m[1][1]
}

/// `Tr[A B]` without forming the product.
pub fn trace_prod2(a: &Mat2, b: &Mat2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1]
}

pub fn max_abs_diff2(a: &Mat2, b: &Mat2) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

pub fn identity4() -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose4(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[j][i] = a[i][j];
        }
    }
    out
}

pub fn mat4_vec(a: &Mat4, v: &Vec4) -> Vec4 {
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = (0..4).map(|k| a[i][k] * v[k]).sum();
    }
    out
}

pub fn max_abs4(a: &Mat4) -> f64 {
    a.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff4(a: &Mat4, b: &Mat4) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

fn norm1(a: &Mat4) -> f64 {
    (0..4)
        .map(|j| (0..4).map(|i| a[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of a 4×4 matrix together with its 1-norm condition number.
#[derive(Debug, Clone, PartialEq)]
pub struct Inverse4 {
    pub inverse: Mat4,
    pub condition: f64,
}

/// Gauss–Jordan elimination with partial pivoting. Refuses matrices whose
/// condition number exceeds [`MAX_CONDITION`], naming the eigenvector of the
/// smallest-magnitude eigenvalue of the symmetric part as the unresolvable
/// direction.
pub fn invert4(a: &Mat4) -> Result<Inverse4> {
    let mut m = *a;
    let mut inv = identity4();
    let scale = max_abs4(a);
    let mut singular = scale == 0.0 || !scale.is_finite();

    if !singular {
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
                .unwrap();
            if m[pivot][col].abs() <= f64::EPSILON * scale {
                singular = true;
                break;
            }
            m.swap(col, pivot);
            inv.swap(col, pivot);
            let p = m[col][col];
            for k in 0..4 {
                m[col][k] /= p;
                inv[col][k] /= p;
            }
            for row in 0..4 {
                if row != col {
                    let f = m[row][col];
                    if f != 0.0 {
                        for k in 0..4 {
                            m[row][k] -= f * m[col][k];
                            inv[row][k] -= f * inv[col][k];
                        }
                    }
                }
            }
        }
    }

    let condition = if singular {
        f64::INFINITY
    } else {
        norm1(a) * norm1(&inv)
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularFisher {
            condition,
            direction: weakest_direction(a),
        });
    }
    Ok(Inverse4 {
        inverse: inv,
        condition,
    })
}

fn weakest_direction(a: &Mat4) -> String {
    let (_, vectors) = symmetric_eigen4(a);
    let v = vectors[0];
    let terms: Vec<String> = v
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > 1e-6)
        .map(|(i, c)| format!("{c:+.4}*phi{i}"))
        .collect();
    terms.join(" ")
}

/// Eigenvalues (ascending) and matching unit eigenvectors of the symmetric
/// part of `a`.
pub fn symmetric_eigen4(a: &Mat4) -> (Vec4, [Vec4; 4]) {
    let m = Matrix4::from_fn(|i, j| 0.5 * (a[i][j] + a[j][i]));
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values = [0.0; 4];
    let mut vectors = [[0.0; 4]; 4];
    for (slot, &idx) in order.iter().enumerate() {
        values[slot] = eig.eigenvalues[idx];
        for r in 0..4 {
            vectors[slot][r] = eig.eigenvectors[(r, idx)];
        }
    }
    (values, vectors)
}

pub fn symmetrize4(a: &Mat4) -> Mat4 {
    let mut out = *a;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let v = 0.5 * (a[i][j] + a[j][i]);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// Determinant of a 3×3 matrix by cofactor expansion.
pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}
