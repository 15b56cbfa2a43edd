//! Exact block decomposition of Dirichlet balls in spherically symmetric trees.
//!
//! On the ball of radius `R` around the root of an offspring tree with unit
//! weights (ambient degrees `b_0` at the root and `1 + b_n` on `S_n`), both
//! `Δ` and `d_G` split along the same orthogonal decomposition into Jacobi
//! blocks:
//!
//! * the radial block on levels `0..=R`, multiplicity one;
//! * for each `k < R`, a block on levels `k+1..=R` with multiplicity
//!   `|S_k| (b_k − 1)` (functions on the sons of a level-`k` vertex that sum
//!   to zero, extended radially below).
//!
//! Each block has diagonal `deg_n` and off-diagonal `−√b_n` between levels
//! `n` and `n + 1`.

use super::tridiag::tridiagonal_eigen;
use super::{Method, Spectrum};
use crate::error::{Error, Result};
use crate::generators::OffspringSequence;

#[derive(Clone, Debug, PartialEq)]
pub struct RadialBlock {
    pub start_level: usize,
    pub multiplicity: u64,
    /// Ambient degrees of the levels covered.
    pub degrees: Vec<f64>,
    /// `√b_n` between consecutive levels.
    pub couplings: Vec<f64>,
}

impl RadialBlock {
    /// Eigenvalues of `diag(a·deg) − couplings`, i.e. of `Δ − (1 − a) d`
    /// restricted to the block.
    pub fn eigenvalues(&self, degree_factor: f64) -> Result<Vec<f64>> {
        let diag: Vec<f64> = self.degrees.iter().map(|d| degree_factor * d).collect();
        let off: Vec<f64> = self.couplings.iter().map(|c| -c).collect();
        Ok(tridiagonal_eigen(&diag, &off, false)?.0)
    }
}

fn level_degree(b: &OffspringSequence, n: usize) -> f64 {
    if n == 0 {
        b.b(0) as f64
    } else {
        1.0 + b.b(n) as f64
    }
}

/// The block list for the ball of `radius` around the root.
pub fn radial_blocks(b: &OffspringSequence, radius: usize) -> Result<Vec<RadialBlock>> {
    b.validate()?;
    let mut sphere = vec![1u64];
    for n in 0..radius {
        sphere.push(sphere[n].checked_mul(b.b(n)).ok_or(Error::Overflow(n + 1))?);
    }
    let block = |start: usize, multiplicity: u64| RadialBlock {
        start_level: start,
        multiplicity,
        degrees: (start..=radius).map(|n| level_degree(b, n)).collect(),
        couplings: (start..radius).map(|n| (b.b(n) as f64).sqrt()).collect(),
    };
    let mut out = vec![block(0, 1)];
    for k in 0..radius {
        let mult = sphere[k].checked_mul(b.b(k) - 1).ok_or(Error::Overflow(k))?;
        if mult > 0 {
            out.push(block(k + 1, mult));
        }
    }
    Ok(out)
}

fn expand(blocks: &[RadialBlock], f: impl Fn(&RadialBlock) -> Result<Vec<f64>>) -> Result<Spectrum> {
    let dim: u64 = blocks.iter().map(|bl| bl.multiplicity * bl.degrees.len() as u64).sum();
    let dim = usize::try_from(dim).map_err(|_| Error::Overflow(0))?;
    let mut eigenvalues = Vec::with_capacity(dim);
    for bl in blocks {
        let vals = f(bl)?;
        for _ in 0..bl.multiplicity {
            eigenvalues.extend_from_slice(&vals);
        }
    }
    eigenvalues.sort_by(f64::total_cmp);
    Ok(Spectrum { eigenvalues, residual_bound: None, method: Method::Radial, dim, vectors: None })
}

/// Full Dirichlet Laplacian spectrum of the ball, with multiplicities.
pub fn radial_laplacian_spectrum(b: &OffspringSequence, radius: usize) -> Result<Spectrum> {
    expand(&radial_blocks(b, radius)?, |bl| bl.eigenvalues(1.0))
}

/// Spectrum of `d_G(Q)` on the same ball.
pub fn radial_degree_spectrum(b: &OffspringSequence, radius: usize) -> Result<Spectrum> {
    expand(&radial_blocks(b, radius)?, |bl| Ok(bl.degrees.clone()))
}

/// Smallest eigenvalue of `Δ − a·d_G` on the ball.
pub fn radial_min_eigenvalue(b: &OffspringSequence, radius: usize, a: f64) -> Result<f64> {
    let mut lo = f64::INFINITY;
    for bl in radial_blocks(b, radius)? {
        lo = lo.min(bl.eigenvalues(1.0 - a)?[0]);
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::offspring_tree;
    use crate::operators::{degree_matrix, laplacian_matrix};
    use crate::section::ball_section;
    use crate::spectral::eigh_dense;
    use crate::Vertex;

    fn dense_spectra(b: &OffspringSequence, r: usize) -> (Vec<f64>, Vec<f64>) {
        let g = offspring_tree(b.clone()).unwrap();
        let s = ball_section(&g, Vertex::id(0), r).unwrap();
        let l = eigh_dense(&laplacian_matrix(&s, None).unwrap(), false).unwrap().eigenvalues;
        let d = eigh_dense(&degree_matrix(&s), false).unwrap().eigenvalues;
        (l, d)
    }

    #[test]
    fn matches_dense_solves() {
        for (b, r) in [
            (OffspringSequence::linear(1, 2), 3),
            (OffspringSequence::linear(1, 2), 4),
            (OffspringSequence::constant(2), 5),
            (OffspringSequence::from_list(&[3, 1, 2]), 4),
        ] {
            let (l, d) = dense_spectra(&b, r);
            let rl = radial_laplacian_spectrum(&b, r).unwrap();
            let rd = radial_degree_spectrum(&b, r).unwrap();
            assert_eq!(rl.dim, l.len());
            for i in 0..l.len() {
                assert!((l[i] - rl.eigenvalues[i]).abs() < 1e-10, "{b:?} r={r} i={i}");
                assert_eq!(d[i], rd.eigenvalues[i]);
            }
        }
    }

    #[test]
    fn shifted_minimum() {
        let b = OffspringSequence::linear(1, 2);
        let g = offspring_tree(b.clone()).unwrap();
        let s = ball_section(&g, Vertex::id(0), 3).unwrap();
        let h = laplacian_matrix(&s, None).unwrap().combine(1.0, &degree_matrix(&s), -0.5).unwrap();
        let dense_min = eigh_dense(&h, false).unwrap().eigenvalues[0];
        assert!((radial_min_eigenvalue(&b, 3, 0.5).unwrap() - dense_min).abs() < 1e-10);
    }
}
