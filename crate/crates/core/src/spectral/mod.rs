//! Eigenvalues of Hermitian operators and the min-max bookkeeping around them.

mod lanczos;
mod radial;
mod tridiag;

pub use lanczos::{lanczos_lowest, LanczosOptions};
pub use radial::{radial_blocks, radial_degree_spectrum, radial_laplacian_spectrum, radial_min_eigenvalue, RadialBlock};
pub use tridiag::tridiagonal_eigen;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::HermitianOperator;

pub const DEFAULT_DENSE_CAP: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
    /// Block decomposition of a spherically symmetric tree section.
    Radial,
}

/// Ascending eigenvalues with residual certificates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub residual_bound: Option<f64>,
    pub method: Method,
    pub dim: usize,
    /// Eigenvectors as columns, in the order of `eigenvalues`.
    #[serde(skip)]
    pub vectors: Option<DMatrix<Complex64>>,
}

impl Spectrum {
    /// Every eigenvalue of the operator is present.
    pub fn is_complete(&self) -> bool {
        self.eigenvalues.len() == self.dim
    }

    /// `λ_N`, one-based.
    pub fn lambda(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.eigenvalues.get(i).copied())
    }

    pub fn min(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    /// `index,eigenvalue,residual` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue,residual\n");
        let r = self.residual_bound.map(|r| format!("{r:e}")).unwrap_or_default();
        for (i, v) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{},{v:.17e},{r}\n", i + 1));
        }
        out
    }
}

/// Full spectrum through nalgebra's Hermitian eigensolver (Householder
/// tridiagonalization followed by implicit shifted QR).
pub fn eigh_dense(h: &HermitianOperator, want_vectors: bool) -> Result<Spectrum> {
    eigh_dense_capped(h, want_vectors, DEFAULT_DENSE_CAP)
}

pub fn eigh_dense_capped(h: &HermitianOperator, want_vectors: bool, cap: usize) -> Result<Spectrum> {
    let n = h.dim();
    if n > cap {
        return Err(Error::DimensionCap { dim: n, cap });
    }
    let m = h.to_dense();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::NoConvergence(format!("dense eigensolver on dimension {n}")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &eig.eigenvectors.column(old));
    }
    let mut residual: f64 = 0.0;
    if n > 0 {
        let r = &m * &vectors - &vectors * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)),
        ));
        for j in 0..n {
            residual = residual.max(r.column(j).norm());
        }
    }
    Ok(Spectrum {
        eigenvalues,
        residual_bound: Some(residual),
        method: Method::Dense,
        dim: n,
        vectors: want_vectors.then_some(vectors),
    })
}

/// `N_λ = #{i : λ_i ≤ λ}`.
///
/// Partial spectra certify counts only strictly below their largest entry.
pub fn counting_function(sp: &Spectrum, lam: f64) -> Result<usize> {
    if !sp.is_complete() {
        let top = sp.eigenvalues.last().copied().unwrap_or(f64::NEG_INFINITY);
        if lam >= top {
            return Err(Error::IncompleteSpectrum { lambda: lam, certified: top });
        }
    }
    Ok(sp.eigenvalues.partition_point(|&v| v <= lam))
}

/// Counts at `λ − tol` and `λ + tol`; equal when no eigenvalue lies in the band.
pub fn counting_band(sp: &Spectrum, lam: f64, tol: f64) -> Result<(usize, usize)> {
    Ok((counting_function(sp, lam - tol)?, counting_function(sp, lam + tol)?))
}

/// `λ_N(H) / λ_N(D)` for `N = 1..=N_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSeries {
    pub n: Vec<usize>,
    pub lambda_h: Vec<f64>,
    pub lambda_d: Vec<f64>,
    pub ratio: Vec<f64>,
    /// Indices with `λ_N(D) = 0`, left out of the series.
    pub zero_indices: Vec<usize>,
}

impl RatioSeries {
    /// `N,lambda_H,lambda_D,ratio` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,lambda_H,lambda_D,ratio\n");
        for i in 0..self.n.len() {
            out.push_str(&format!("{},{:.17e},{:.17e},{:.17e}\n", self.n[i], self.lambda_h[i], self.lambda_d[i], self.ratio[i]));
        }
        out
    }

    /// Median of `|ratio − 1|`.
    pub fn median_deviation(&self) -> Option<f64> {
        let mut dev: Vec<f64> = self.ratio.iter().map(|r| (r - 1.0).abs()).collect();
        if dev.is_empty() {
            return None;
        }
        dev.sort_by(f64::total_cmp);
        let k = dev.len();
        Some(if k % 2 == 1 { dev[k / 2] } else { 0.5 * (dev[k / 2 - 1] + dev[k / 2]) })
    }
}

pub fn ratio_series_from_spectra(h: &Spectrum, d: &Spectrum, n_max: usize) -> Result<RatioSeries> {
    let avail = h.eigenvalues.len().min(d.eigenvalues.len());
    if n_max > avail {
        return Err(Error::DimensionMismatch { expected: n_max, found: avail });
    }
    let mut out = RatioSeries { n: vec![], lambda_h: vec![], lambda_d: vec![], ratio: vec![], zero_indices: vec![] };
    for i in 0..n_max {
        let (lh, ld) = (h.eigenvalues[i], d.eigenvalues[i]);
        if ld == 0.0 {
            out.zero_indices.push(i + 1);
            continue;
        }
        out.n.push(i + 1);
        out.lambda_h.push(lh);
        out.lambda_d.push(ld);
        out.ratio.push(lh / ld);
    }
    Ok(out)
}

pub fn ratio_series(h: &HermitianOperator, d: &HermitianOperator, n_max: usize) -> Result<RatioSeries> {
    if h.dim() != d.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: d.dim() });
    }
    ratio_series_from_spectra(&eigh_dense(h, false)?, &eigh_dense(d, false)?, n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{finite_path, star};
    use crate::operators::{degree_matrix, laplacian_matrix, OperatorKind};
    use crate::section::ball_section;
    use crate::Vertex;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn small_spectra() {
        let s = ball_section(&star(2).unwrap(), Vertex::id(0), 1).unwrap();
        let sp = eigh_dense(&laplacian_matrix(&s, None).unwrap(), true).unwrap();
        assert!(close(&sp.eigenvalues, &[0.0, 1.0, 3.0], 1e-12));
        assert!(sp.residual_bound.unwrap() < 1e-12);
        let d = HermitianOperator::diagonal(&[2.0, 1.0, 1.0], OperatorKind::Degree);
        assert_eq!(eigh_dense(&d, false).unwrap().eigenvalues, vec![1.0, 1.0, 2.0]);
        let p = ball_section(&finite_path(2).unwrap(), Vertex::id(0), 1).unwrap();
        assert!(close(&eigh_dense(&laplacian_matrix(&p, None).unwrap(), false).unwrap().eigenvalues, &[0.0, 2.0], 1e-12));
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let g = crate::generators::randomize(&crate::generators::random_tree(40, 3).unwrap(), &crate::generators::RandomizeSpec::phases(1));
        let s = ball_section(&g, Vertex::id(0), 40).unwrap();
        let h = laplacian_matrix(&s, None).unwrap();
        let sp = eigh_dense(&h, true).unwrap();
        let v = sp.vectors.clone().unwrap();
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(40, sp.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0))));
        let rec = &v * lam * v.adjoint() - h.to_dense();
        assert!(rec.iter().fold(0.0f64, |a, x| a.max(x.norm())) <= 1e-9 * h.max_abs());
        let gram = v.adjoint() * &v - DMatrix::identity(40, 40);
        assert!(gram.iter().fold(0.0f64, |a, x| a.max(x.norm())) < 1e-10);
    }

    #[test]
    fn dense_cap() {
        let d = HermitianOperator::diagonal(&[1.0; 5], OperatorKind::Degree);
        assert!(matches!(eigh_dense_capped(&d, false, 4), Err(Error::DimensionCap { dim: 5, cap: 4 })));
    }

    #[test]
    fn counting() {
        let sp = Spectrum { eigenvalues: vec![0.0, 1.0, 3.0], residual_bound: None, method: Method::Dense, dim: 3, vectors: None };
        assert_eq!(counting_function(&sp, 1.0).unwrap(), 2);
        assert_eq!(counting_function(&sp, 0.0).unwrap(), 1);
        assert_eq!(counting_band(&sp, 1.0, 1e-9).unwrap(), (1, 2));
        let partial = Spectrum { dim: 10, ..sp };
        assert_eq!(counting_function(&partial, 2.0).unwrap(), 2);
        assert!(matches!(counting_function(&partial, 3.0), Err(Error::IncompleteSpectrum { .. })));
        let s = ball_section(&star(2).unwrap(), Vertex::id(0), 1).unwrap();
        assert_eq!(counting_function(&eigh_dense(&degree_matrix(&s), false).unwrap(), 1.0).unwrap(), 2);
    }

    #[test]
    fn ratio_scaling() {
        let s = ball_section(&star(4).unwrap(), Vertex::id(0), 1).unwrap();
        let d = degree_matrix(&s);
        let r = ratio_series(&d, &d, 5).unwrap();
        assert!(r.ratio.iter().all(|&x| x == 1.0));
        let d2 = d.combine(2.0, &d, 0.0).unwrap();
        let r = ratio_series(&d2, &d, 5).unwrap();
        assert!(r.ratio.iter().all(|&x| x == 2.0));
        assert_eq!(r.median_deviation(), Some(1.0));
        assert!(ratio_series(&d, &d, 6).is_err());
    }
}
