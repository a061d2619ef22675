//! Small dense routines on row-major square matrices.

use crate::scalar::{count, Scalar};

/// Sample mean and maximum-likelihood covariance (divisor `n`) of row-major data.
pub(crate) fn mean_and_covariance<S: Scalar>(rows: &[S], dim: usize) -> (Vec<S>, Vec<S>) {
    let n = rows.len() / dim;
    let inv_n = S::one() / count::<S>(n);
    let mut mean = vec![S::zero(); dim];
    for row in rows.chunks_exact(dim) {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m *= inv_n;
    }
    let mut cov = vec![S::zero(); dim * dim];
    let mut centered = vec![S::zero(); dim];
    for row in rows.chunks_exact(dim) {
        for ((c, &v), &m) in centered.iter_mut().zip(row).zip(&mean) {
            *c = v - m;
        }
        for a in 0..dim {
            for b in 0..=a {
                cov[a * dim + b] += centered[a] * centered[b];
            }
        }
    }
    for a in 0..dim {
        for b in 0..=a {
            let v = cov[a * dim + b] * inv_n;
            cov[a * dim + b] = v;
            cov[b * dim + a] = v;
        }
    }
    (mean, cov)
}

/// Lower Cholesky factor of a symmetric positive-definite matrix, or `None`
/// when a pivot is not strictly positive.
pub(crate) fn cholesky<S: Scalar>(a: &[S], dim: usize) -> Option<Vec<S>> {
    let mut l = vec![S::zero(); dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut sum = a[i * dim + j];
            for k in 0..j {
                sum -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(sum > S::zero()) || !sum.is_finite() {
                    return None;
                }
                l[i * dim + i] = sum.sqrt();
            } else {
                l[i * dim + j] = sum / l[j * dim + j];
            }
        }
    }
    Some(l)
}

/// Solves `L y = b` for lower-triangular `L`, in place.
pub(crate) fn forward_substitute<S: Scalar>(l: &[S], dim: usize, b: &mut [S]) {
    for i in 0..dim {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * dim + k] * b[k];
        }
        b[i] = sum / l[i * dim + i];
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching unit eigenvectors
/// as rows.
pub(crate) fn symmetric_eigen<S: Scalar>(a: &[S], dim: usize) -> (Vec<S>, Vec<Vec<S>>) {
    let mut m = a.to_vec();
    let mut v = vec![S::zero(); dim * dim];
    for i in 0..dim {
        v[i * dim + i] = S::one();
    }
    let eps = S::epsilon();
    for _sweep in 0..100 {
        let mut off = S::zero();
        let mut diag = S::zero();
        for p in 0..dim {
            diag += m[p * dim + p] * m[p * dim + p];
            for q in p + 1..dim {
                off += m[p * dim + q] * m[p * dim + q];
            }
        }
        if off <= eps * eps * diag || off == S::zero() {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = m[p * dim + q];
                if apq == S::zero() {
                    continue;
                }
                let app = m[p * dim + p];
                let aqq = m[q * dim + q];
                let theta = (aqq - app) / (S::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = m[k * dim + p];
                    let akq = m[k * dim + q];
                    m[k * dim + p] = c * akp - s * akq;
                    m[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = m[p * dim + k];
                    let aqk = m[q * dim + k];
                    m[p * dim + k] = c * apk - s * aqk;
                    m[q * dim + k] = s * apk + c * aqk;
                }
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&x, &y| {
        m[y * dim + y]
            .partial_cmp(&m[x * dim + x])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[i * dim + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..dim).map(|k| v[k * dim + i]).collect())
        .collect();
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs() {
        let a: [f64; 9] = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let l = cholesky(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i * 3 + k] * l[j * 3 + k]).sum();
                assert!((v - a[i * 3 + j]).abs() < 1e-12);
            }
        }
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a: [f64; 9] = [2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0];
        let (vals, vecs) = symmetric_eigen(&a, 3);
        assert!((vals[0] - 5.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        assert!((vals[2] - 1.0).abs() < 1e-12);
        for (lambda, v) in vals.iter().zip(&vecs) {
            for i in 0..3 {
                let av: f64 = (0..3).map(|k| a[i * 3 + k] * v[k]).sum();
                assert!((av - lambda * v[i]).abs() < 1e-10);
            }
        }
    }
}
