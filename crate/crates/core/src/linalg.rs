//! Small dense kernels: least squares and symmetric eigenvalues.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, sqrt};

/// Least-squares solution of `sum_j w_j * cols[j] = target` by Householder QR.
///
/// Returns `None` when the columns are numerically rank deficient.
pub(crate) fn least_squares(cols: &[&[f64]], target: &[f64]) -> Option<Vec<f64>> {
    let rows = target.len();
    let k = cols.len();
    if k == 0 {
        return Some(Vec::new());
    }
    if k > rows {
        return None;
    }
    // Column-major copy.
    let mut a: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();
    let mut b = target.to_vec();
    let scale = a
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, x| m.max(abs(*x)));
    if scale == 0.0 {
        return None;
    }
    let mut diag = vec![0.0; k];
    for j in 0..k {
        let norm = sqrt(a[j][j..].iter().map(|x| x * x).sum());
        if norm <= 1e-13 * scale {
            return None;
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(j) {
                let s: f64 = v.iter().zip(&col[j..]).map(|(p, q)| p * q).sum::<f64>() * 2.0 / vnorm2;
                for (c, vi) in col[j..].iter_mut().zip(&v) {
                    *c -= s * vi;
                }
            }
            let s: f64 = v.iter().zip(&b[j..]).map(|(p, q)| p * q).sum::<f64>() * 2.0 / vnorm2;
            for (c, vi) in b[j..].iter_mut().zip(&v) {
                *c -= s * vi;
            }
        }
        diag[j] = a[j][j];
    }
    let mut w = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = b[j];
        for l in j + 1..k {
            s -= a[l][j] * w[l];
        }
        w[j] = s / diag[j];
    }
    Some(w)
}

/// Largest eigenvalue of a symmetric matrix (row-major, `n x n`) by cyclic Jacobi.
pub(crate) fn symmetric_max_eigenvalue(mut m: Vec<f64>, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if abs(apq) < 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).fold(f64::NEG_INFINITY, f64::max)
}
