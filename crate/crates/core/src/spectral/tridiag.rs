//! Symmetric tridiagonal eigenproblem by implicit QL with Wilkinson shifts.

use crate::error::{Error, Result};

/// Eigen-decomposition of the real symmetric tridiagonal matrix with
/// diagonal `diag` and sub-diagonal `off` (`off.len() == diag.len() − 1`).
///
/// Returns ascending eigenvalues and, when requested, the eigenvectors as
/// columns of a row-major `n × n` array (`z[i * n + j]` is component `i` of
/// vector `j`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((vec![], want_vectors.then(Vec::new)));
    }
    assert_eq!(off.len() + 1, n, "sub-diagonal length");
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut z = if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        Some(z)
    } else {
        None
    };

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence(format!("tridiagonal QL stalled at index {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_mut() {
                    for k in 0..n {
                        let t = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * t;
                        z[k * n + i] = c * z[k * n + i] - s * t;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = z.map(|z| {
        let mut out = vec![0.0; n * n];
        for (new, &old) in order.iter().enumerate() {
            for k in 0..n {
                out[k * n + new] = z[k * n + old];
            }
        }
        out
    });
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_laplacian_closed_form() {
        // free path on n vertices: eigenvalues 2 − 2cos(πk/n)
        let n = 9;
        let mut diag = vec![2.0; n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        let off = vec![-1.0; n - 1];
        let (vals, vecs) = tridiagonal_eigen(&diag, &off, true).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let want = 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / n as f64).cos();
            assert!((v - want).abs() < 1e-13, "{k}: {v} vs {want}");
        }
        let z = vecs.unwrap();
        for j in 0..n {
            for i in 0..n {
                let mut tv = diag[i] * z[i * n + j];
                if i > 0 {
                    tv += off[i - 1] * z[(i - 1) * n + j];
                }
                if i + 1 < n {
                    tv += off[i] * z[(i + 1) * n + j];
                }
                assert!((tv - vals[j] * z[i * n + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decoupled_blocks() {
        let (vals, _) = tridiagonal_eigen(&[3.0, 1.0, 2.0], &[0.0, 0.0], false).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
        let (vals, _) = tridiagonal_eigen(&[5.0], &[], false).unwrap();
        assert_eq!(vals, vec![5.0]);
    }
}
