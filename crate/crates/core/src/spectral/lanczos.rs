//! Lowest eigenpairs by Lanczos with full reorthogonalization and locking.
//!
//! Each run builds a Krylov basis in the orthogonal complement of the locked
//! eigenvectors. Converged Ritz pairs are locked and the next run restarts
//! from a fresh random vector, so repeated eigenvalues (common on trees, where
//! one Krylov space sees each eigenspace only once) are picked up one copy per
//! run.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::tridiag::tridiagonal_eigen;
use super::{Method, Spectrum};
use crate::error::{Error, Result};
use crate::operators::HermitianOperator;

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    /// Krylov dimension per run; `None` picks `max(2k + 20, 60)`.
    pub krylov_dim: Option<usize>,
    pub max_runs: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { krylov_dim: None, max_runs: 400 }
    }
}

type Vector = Vec<Complex64>;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Two passes of classical Gram-Schmidt against each basis.
fn orthogonalize(v: &mut [Complex64], bases: &[&[Vector]]) {
    for _ in 0..2 {
        for basis in bases {
            for q in basis.iter() {
                let c = dot(q, v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng, locked: &[Vector]) -> Option<Vector> {
    for _ in 0..8 {
        let mut v: Vector = (0..n)
            .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        orthogonalize(&mut v, &[locked]);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

/// The `k` smallest eigenvalues with true residuals `‖Hv − λv‖ ≤ tol·max(1, |λ|)`.
pub fn lanczos_lowest(h: &HermitianOperator, k: usize, tol: f64, seed: u64) -> Result<Spectrum> {
    lanczos_lowest_with(h, k, tol, seed, LanczosOptions::default())
}

pub fn lanczos_lowest_with(h: &HermitianOperator, k: usize, tol: f64, seed: u64, opts: LanczosOptions) -> Result<Spectrum> {
    let n = h.dim();
    if k == 0 || k > n {
        return Err(Error::BadK { k, dim: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locked: Vec<Vector> = Vec::new();
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut worst_residual: f64 = 0.0;
    let base_m = opts.krylov_dim.unwrap_or((2 * k + 20).max(60));
    let mut m_target = base_m;
    let mut confirmed = false;

    for _run in 0..opts.max_runs {
        let free = n - locked.len();
        if free == 0 {
            confirmed = true;
            break;
        }
        let m = m_target.min(free);
        let Some(q0) = random_unit(n, &mut rng, &locked) else { break };
        let mut basis: Vec<Vector> = vec![q0];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        let mut invariant = false;
        for j in 0..m {
            h.apply_into(&basis[j], &mut w);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            orthogonalize(&mut w, &[&locked, &basis]);
            let b = norm(&w);
            if j + 1 == m {
                beta.push(b);
                break;
            }
            if b <= 1e-12 * (a.abs() + beta.last().copied().unwrap_or(0.0)).max(1e-300) {
                beta.push(0.0);
                invariant = true;
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let steps = alpha.len();
        let (theta, s) = tridiagonal_eigen(&alpha, &beta[..steps - 1], true)?;
        let s = s.expect("vectors requested");

        // converged Ritz pairs from the bottom up; the first unconverged one ends the sweep,
        // so the far end of the spectrum (which converges first) is never locked
        let last_beta = if invariant { 0.0 } else { beta[steps - 1] };
        let mut new_pairs = Vec::new();
        // lowest Ritz value of the run, if it converged
        let mut run_min: Option<f64> = None;
        for (j, &t) in theta.iter().enumerate() {
            let estimate = (last_beta * s[(steps - 1) * steps + j]).abs();
            let scale = t.abs().max(1.0);
            if estimate > 10.0 * tol * scale {
                break;
            }
            let mut y = vec![Complex64::new(0.0, 0.0); n];
            for (i, q) in basis.iter().enumerate() {
                let c = s[i * steps + j];
                for (yi, qi) in y.iter_mut().zip(q) {
                    *yi += c * qi;
                }
            }
            let ny = norm(&y);
            y.iter_mut().for_each(|x| *x /= ny);
            let hy = h.apply(&y);
            let res = norm(&hy.iter().zip(&y).map(|(a, b)| a - b * t).collect::<Vec<_>>());
            if res > tol * scale {
                break;
            }
            if j == 0 {
                run_min = Some(t);
            }
            new_pairs.push((t, y, res));
        }

        let done_before = if locked_vals.len() >= k {
            let mut sorted = locked_vals.clone();
            sorted.sort_by(f64::total_cmp);
            let kth = sorted[k - 1];
            match run_min {
                Some(r) => r >= kth - tol * kth.abs().max(1.0),
                None => false,
            }
        } else {
            false
        };

        if new_pairs.is_empty() {
            m_target = (m_target * 2).min(n);
            continue;
        }
        m_target = base_m;
        for (t, mut y, res) in new_pairs {
            orthogonalize(&mut y, &[&locked]);
            let ny = norm(&y);
            if ny < 0.5 {
                continue;
            }
            y.iter_mut().for_each(|x| *x /= ny);
            worst_residual = worst_residual.max(res);
            locked.push(y);
            locked_vals.push(t);
        }
        if done_before || locked.len() == n {
            confirmed = true;
            break;
        }
    }

    if locked_vals.len() < k {
        return Err(Error::NoConvergence(format!("Lanczos locked {} of {k} eigenpairs", locked_vals.len())));
    }
    if !confirmed {
        return Err(Error::NoConvergence("Lanczos did not confirm the lowest eigenvalues".into()));
    }
    locked_vals.sort_by(f64::total_cmp);
    locked_vals.truncate(k);
    Ok(Spectrum { eigenvalues: locked_vals, residual_bound: Some(worst_residual), method: Method::Lanczos, dim: n, vectors: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{offspring_tree, random_tree, OffspringSequence};
    use crate::operators::{laplacian_matrix, OperatorKind};
    use crate::section::ball_section;
    use crate::spectral::eigh_dense;
    use crate::Vertex;

    #[test]
    fn tree_section_matches_dense() {
        let g = random_tree(200, 11).unwrap();
        let s = ball_section(&g, Vertex::id(0), 200).unwrap();
        let h = laplacian_matrix(&s, None).unwrap();
        let dense = eigh_dense(&h, false).unwrap();
        let lz = lanczos_lowest(&h, 10, 1e-10, 1).unwrap();
        for i in 0..10 {
            assert!((dense.eigenvalues[i] - lz.eigenvalues[i]).abs() < 1e-8, "{i}");
        }
        assert!(lz.eigenvalues[0] >= -1e-10);
    }

    #[test]
    fn multiplicities_on_a_regular_tree() {
        let g = offspring_tree(OffspringSequence::constant(3)).unwrap();
        let s = ball_section(&g, Vertex::id(0), 4).unwrap();
        let h = laplacian_matrix(&s, None).unwrap();
        let dense = eigh_dense(&h, false).unwrap();
        let lz = lanczos_lowest(&h, 30, 1e-10, 2).unwrap();
        for i in 0..30 {
            assert!((dense.eigenvalues[i] - lz.eigenvalues[i]).abs() < 1e-8, "{i}: {} vs {}", dense.eigenvalues[i], lz.eigenvalues[i]);
        }
    }

    #[test]
    fn full_spectrum_of_tiny_matrix() {
        let h = HermitianOperator::from_real_rows(&[vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]).unwrap();
        let lz = lanczos_lowest(&h, 3, 1e-12, 0).unwrap();
        let dense = eigh_dense(&h, false).unwrap();
        for i in 0..3 {
            assert!((lz.eigenvalues[i] - dense.eigenvalues[i]).abs() < 1e-12);
        }
        assert!(lz.is_complete());
        assert!(matches!(lanczos_lowest(&h, 4, 1e-10, 0), Err(Error::BadK { .. })));
        let d = HermitianOperator::diagonal(&[1.0, 1.0, 1.0, 5.0], OperatorKind::Custom);
        assert_eq!(lanczos_lowest(&d, 3, 1e-12, 0).unwrap().eigenvalues.len(), 3);
    }
}
