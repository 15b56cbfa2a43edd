//! Almost analytic extensions and the Helffer–Sjöstrand matrix function
//!
//! `φ(A) = −(1/π) ∫∫ ∂̄φ^C(x+iy) (z − A)^{-1} dx dy`, with
//! `φ^C(x+iy) = Σ_{k≤l} φ^{(k)}(x)(iy)^k/k! · χ(y/(c2⟨x⟩))`.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{HermitianOperator, OperatorKind};
use crate::spectral::eigh_dense;

/// A real function with closed-form derivatives.
pub trait SmoothFunction: Send + Sync {
    fn name(&self) -> String;
    /// Highest derivative available.
    fn max_order(&self) -> usize;
    /// `φ^{(k)}(x)` for `k ≤ max_order()`.
    fn derivative(&self, k: usize, x: f64) -> f64;
    fn eval(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }
}

fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// `1/(1+x²)`, with `φ^{(k)}(x) = (−1)^k k! Im (x − i)^{−(k+1)}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Lorentzian;

impl SmoothFunction for Lorentzian {
    fn name(&self) -> String {
        "lorentzian".into()
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn derivative(&self, k: usize, x: f64) -> f64 {
        let fact: f64 = (1..=k).map(|j| j as f64).product();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * fact * Complex64::new(x, -1.0).powi(-(k as i32 + 1)).im
    }
}

/// `⟨x⟩^a = (1 + x²)^{a/2}`, derivatives by the recurrence from `g f' = a x f`.
#[derive(Clone, Copy, Debug)]
pub struct JapanesePower {
    pub a: f64,
}

impl SmoothFunction for JapanesePower {
    fn name(&self) -> String {
        format!("japanese^{}", self.a)
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn derivative(&self, k: usize, x: f64) -> f64 {
        // (1+x²) f^{(j+1)} = (a − 2j) x f^{(j)} + j(a − j + 1) f^{(j−1)}
        let g = 1.0 + x * x;
        let (mut prev, mut cur) = (0.0, g.powf(self.a / 2.0));
        for j in 0..k {
            let jf = j as f64;
            let next = ((self.a - 2.0 * jf) * x * cur + jf * (self.a - jf + 1.0) * prev) / g;
            prev = cur;
            cur = next;
        }
        cur
    }
}

/// Dense polynomial in the monomial basis.
#[derive(Clone, Debug, PartialEq)]
struct Poly(Vec<f64>);

impl Poly {
    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect())
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    fn pow(&self, p: u32) -> Poly {
        (0..p).fold(Poly(vec![1.0]), |acc, _| acc.mul(self))
    }

    fn derivatives(&self, upto: usize) -> Vec<Poly> {
        let mut out = vec![self.clone()];
        for _ in 0..upto {
            let d = out.last().unwrap().derivative();
            out.push(if d.0.is_empty() { Poly(vec![0.0]) } else { d });
        }
        out
    }
}

/// `(1 − x²)^p` on `|x| < 1`, zero outside; `C^{p−1}`.
#[derive(Clone, Debug)]
pub struct PolynomialBump {
    power: u32,
    derivs: Vec<Poly>,
}

impl PolynomialBump {
    pub fn new(power: u32) -> Result<Self> {
        if power < 2 {
            return Err(Error::BadParameter(format!("bump power {power} must be at least 2")));
        }
        let p = Poly(vec![1.0, 0.0, -1.0]).pow(power);
        Ok(PolynomialBump { power, derivs: p.derivatives(power as usize - 1) })
    }
}

impl SmoothFunction for PolynomialBump {
    fn name(&self) -> String {
        format!("bump^{}", self.power)
    }

    fn max_order(&self) -> usize {
        self.power as usize - 1
    }

    fn derivative(&self, k: usize, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            0.0
        } else {
            self.derivs[k].eval(x)
        }
    }
}

/// `φ · χ_R` with `χ_R = 1` on `|x| ≤ R`, `0` on `|x| ≥ 2R`, and a `C^5`
/// polynomial step in between.
#[derive(Clone)]
pub struct CutoffProduct {
    pub base: Arc<dyn SmoothFunction>,
    pub radius: f64,
    step: Vec<Poly>,
}

const STEP_ORDER: usize = 5;

impl CutoffProduct {
    pub fn new(base: Arc<dyn SmoothFunction>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::BadParameter(format!("cutoff radius {radius}")));
        }
        // S(t) = t^6 Σ_{k≤5} C(5+k, k)(1 − t)^k
        let t6 = Poly(vec![0.0, 1.0]).pow(6);
        let one_minus = Poly(vec![1.0, -1.0]);
        let mut sum = Poly(vec![0.0]);
        let mut binom = 1.0;
        for k in 0..=STEP_ORDER {
            if k > 0 {
                binom = binom * (STEP_ORDER + k) as f64 / k as f64;
            }
            let term = one_minus.pow(k as u32);
            let mut coeffs = sum.0.clone();
            coeffs.resize(coeffs.len().max(term.0.len()), 0.0);
            for (i, c) in term.0.iter().enumerate() {
                coeffs[i] += binom * c;
            }
            sum = Poly(coeffs);
        }
        let step = t6.mul(&sum).derivatives(STEP_ORDER + 1);
        Ok(CutoffProduct { base, radius, step })
    }

    /// `χ_R^{(k)}(x)`.
    pub fn cutoff(&self, k: usize, x: f64) -> f64 {
        let r = self.radius;
        let ax = x.abs();
        if ax >= 2.0 * r {
            return 0.0;
        }
        if ax <= r {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let t = (ax - r) / r;
        let sign = if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        let v = self.step[k].eval(t) / r.powi(k as i32);
        if k == 0 {
            1.0 - v
        } else {
            -sign * v
        }
    }
}

impl SmoothFunction for CutoffProduct {
    fn name(&self) -> String {
        format!("{}*chi_{}", self.base.name(), self.radius)
    }

    fn max_order(&self) -> usize {
        self.base.max_order().min(STEP_ORDER)
    }

    fn derivative(&self, k: usize, x: f64) -> f64 {
        let mut binom = 1.0;
        let mut sum = 0.0;
        for j in 0..=k {
            if j > 0 {
                binom = binom * (k - j + 1) as f64 / j as f64;
            }
            let c = self.cutoff(k - j, x);
            if c != 0.0 {
                sum += binom * self.base.derivative(j, x) * c;
            }
        }
        sum
    }
}

/// The fixed plateau: `1` on `|u| ≤ 1/2`, `0` on `|u| ≥ 1`; returns `(χ, χ')`.
fn plateau(u: f64) -> (f64, f64) {
    let au = u.abs();
    if au <= 0.5 {
        return (1.0, 0.0);
    }
    if au >= 1.0 {
        return (0.0, 0.0);
    }
    let s = 2.0 * au - 1.0;
    let a = (-1.0 / (1.0 - s)).exp();
    let b = (-1.0 / s).exp();
    let chi = a / (a + b);
    let dchi_ds = -a * b * (1.0 / ((1.0 - s) * (1.0 - s)) + 1.0 / (s * s)) / ((a + b) * (a + b));
    (chi, 2.0 * u.signum() * dchi_ds)
}

#[derive(Clone)]
pub struct AlmostAnalyticExtension {
    pub base: Arc<dyn SmoothFunction>,
    pub order: usize,
    pub rho: f64,
    pub c2: f64,
    /// `C_k = sup |φ^{(k)}(x)| ⟨x⟩^{k−ρ}`, `k = 0..=l+1`, sampled.
    pub seminorms: Vec<f64>,
    /// Empirical constant in `|∂̄φ^C| ≤ c1 ⟨x⟩^{ρ−1−l} |y|^l` on the reference grid.
    pub c1: f64,
}

impl std::fmt::Debug for AlmostAnalyticExtension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AlmostAnalyticExtension")
            .field("base", &self.base.name())
            .field("order", &self.order)
            .field("rho", &self.rho)
            .field("c2", &self.c2)
            .field("seminorms", &self.seminorms)
            .field("c1", &self.c1)
            .finish()
    }
}

impl AlmostAnalyticExtension {
    fn taylor(&self, x: f64, y: f64, upto: usize) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0);
        let iy = Complex64::new(0.0, y);
        for k in 0..=upto {
            if k > 0 {
                power = power * iy / k as f64;
            }
            sum += power * self.base.derivative(k, x);
        }
        sum
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let (x, y) = (z.re, z.im);
        let (chi, _) = plateau(y / (self.c2 * japanese(x)));
        if chi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.taylor(x, y, self.order) * chi
    }

    /// `∂̄φ^C = ½(∂_x + i∂_y) φ^C` in closed form.
    pub fn dbar(&self, z: Complex64) -> Complex64 {
        let (x, y) = (z.re, z.im);
        let jx = japanese(x);
        let u = y / (self.c2 * jx);
        let (chi, dchi) = plateau(u);
        if chi == 0.0 && dchi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let l = self.order;
        let fact: f64 = (1..=l).map(|j| j as f64).product();
        // ½(∂_x + i∂_y) of the Taylor sum telescopes to its top term
        let top = Complex64::new(0.0, y).powi(l as i32) * (0.5 * self.base.derivative(l + 1, x) / fact);
        let mut out = top * chi;
        if dchi != 0.0 {
            let du = Complex64::new(-y * x / (self.c2 * jx * jx * jx), 1.0 / (self.c2 * jx));
            out += self.taylor(x, y, l) * du * (0.5 * dchi);
        }
        out
    }

    /// `c1 ⟨x⟩^{ρ−1−l} |y|^l`.
    pub fn dbar_bound(&self, z: Complex64) -> f64 {
        self.c1 * japanese(z.re).powf(self.rho - 1.0 - self.order as f64) * z.im.abs().powi(self.order as i32)
    }

    fn dbar_ratio(&self, z: Complex64) -> f64 {
        let w = japanese(z.re).powf(self.rho - 1.0 - self.order as f64) * z.im.abs().powi(self.order as i32);
        if w == 0.0 {
            0.0
        } else {
            self.dbar(z).norm() / w
        }
    }
}

const SEMINORM_WINDOWS: [f64; 3] = [1e2, 1e3, 1e4];
const SEMINORM_SAMPLES: usize = 4001;
const SEMINORM_GROWTH: f64 = 1.01;

fn sampled_seminorm(phi: &dyn SmoothFunction, k: usize, rho: f64, window: f64) -> f64 {
    let t_max = window.asinh();
    let mut sup: f64 = 0.0;
    for i in 0..SEMINORM_SAMPLES {
        let x = (t_max * (2.0 * i as f64 / (SEMINORM_SAMPLES - 1) as f64 - 1.0)).sinh();
        sup = sup.max(phi.derivative(k, x).abs() * japanese(x).powf(k as f64 - rho));
    }
    sup
}

pub fn build_extension(phi: Arc<dyn SmoothFunction>, rho: f64, l: usize, c2: f64) -> Result<AlmostAnalyticExtension> {
    if l < 1 {
        return Err(Error::BadParameter("extension order l must be at least 1".into()));
    }
    if phi.max_order() < l + 1 {
        return Err(Error::BadParameter(format!("{} has {} derivatives, need {}", phi.name(), phi.max_order(), l + 1)));
    }
    if !(c2 > 0.0 && c2.is_finite()) {
        return Err(Error::BadParameter(format!("cutoff width c2 = {c2}")));
    }
    let mut seminorms = Vec::with_capacity(l + 2);
    for k in 0..=l + 1 {
        let sups: Vec<f64> = SEMINORM_WINDOWS.iter().map(|&w| sampled_seminorm(phi.as_ref(), k, rho, w)).collect();
        if !sups.iter().all(|s| s.is_finite()) || sups.windows(2).any(|w| w[1] > SEMINORM_GROWTH * w[0] + 1e-300) {
            return Err(Error::SeminormUnbounded { order: k });
        }
        seminorms.push(sups[2]);
    }
    let mut ext = AlmostAnalyticExtension { base: phi, order: l, rho, c2, seminorms, c1: 0.0 };
    let grid = QuadratureGrid::new(DEFAULT_T_MAX, 256, c2);
    let mut c1: f64 = 0.0;
    grid.for_each(|z, _| c1 = c1.max(ext.dbar_ratio(z)));
    ext.c1 = c1;
    Ok(ext)
}

pub const DEFAULT_T_MAX: f64 = 9.0;

/// Tensor midpoint rule in `(t, s)`, `x = sinh t`, `y = c2⟨x⟩s`.
#[derive(Clone, Copy, Debug)]
struct QuadratureGrid {
    t_max: f64,
    n: usize,
    c2: f64,
}

impl QuadratureGrid {
    fn new(t_max: f64, n: usize, c2: f64) -> Self {
        QuadratureGrid { t_max, n, c2 }
    }

    /// Calls `f(z, weight)` at every node; `weight` includes the Jacobian.
    fn for_each(&self, mut f: impl FnMut(Complex64, f64)) {
        let ht = 2.0 * self.t_max / self.n as f64;
        let hs = 2.0 / self.n as f64;
        for i in 0..self.n {
            let t = -self.t_max + (i as f64 + 0.5) * ht;
            let x = t.sinh();
            let jx = japanese(x);
            let w_x = t.cosh() * ht;
            for j in 0..self.n {
                let s = -1.0 + (j as f64 + 0.5) * hs;
                let y = self.c2 * jx * s;
                f(Complex64::new(x, y), w_x * self.c2 * jx * hs);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadratureParams {
    /// `x` ranges over `[−sinh t_max, sinh t_max]`.
    pub t_max: f64,
    /// Nodes per axis on the first level; doubled each refinement.
    pub start_nodes: usize,
    pub max_nodes: usize,
    /// Relative Cauchy tolerance between successive levels (max-entry norm).
    pub tol: f64,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams { t_max: DEFAULT_T_MAX, start_nodes: 32, max_nodes: 1024, tol: 1e-7 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HsLevel {
    pub nodes: usize,
    /// `max |R_n − R_{n/2}| / max |R_n|`; `None` on the first level.
    pub change: Option<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct HsResult {
    pub matrix: DMatrix<Complex64>,
    /// Last relative refinement change.
    pub error_estimate: f64,
    pub levels: Vec<HsLevel>,
    /// Per-level results, for error-versus-refinement studies.
    pub level_matrices: Vec<DMatrix<Complex64>>,
    /// Largest `|∂̄φ^C| / (⟨x⟩^{ρ−1−l}|y|^l)` seen on the nodes.
    pub c1_nodes: f64,
    /// `max |R − R*| / 2` before symmetrization.
    pub asymmetry: f64,
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.norm()))
}

fn hs_level(a: &DMatrix<Complex64>, ext: &AlmostAnalyticExtension, grid: QuadratureGrid) -> Result<(DMatrix<Complex64>, f64)> {
    let n = a.nrows();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    let mut c1: f64 = 0.0;
    let mut err = None;
    grid.for_each(|z, w| {
        if err.is_some() {
            return;
        }
        let db = ext.dbar(z);
        if db == Complex64::new(0.0, 0.0) {
            return;
        }
        if z.im == 0.0 {
            err = Some(Error::ResolventSingularity(z.re));
            return;
        }
        c1 = c1.max(ext.dbar_ratio(z));
        // (z − A)^{-1}
        let shifted = DMatrix::from_fn(n, n, |i, j| if i == j { z - a[(i, j)] } else { -a[(i, j)] });
        match shifted.lu().try_inverse() {
            Some(inv) => acc += inv * (db * (-w / std::f64::consts::PI)),
            None => err = Some(Error::ResolventSingularity(z.re)),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok((acc, c1)),
    }
}

/// Refines the grid until successive levels agree to `quad.tol`.
pub fn hs_matrix_function(h: &HermitianOperator, ext: &AlmostAnalyticExtension, quad: QuadratureParams) -> Result<HsResult> {
    if !(ext.rho < 0.0) {
        return Err(Error::BadParameter(format!("the integral needs rho < 0, got {}", ext.rho)));
    }
    if quad.start_nodes < 2 || quad.start_nodes % 2 != 0 || quad.max_nodes < quad.start_nodes {
        return Err(Error::BadParameter("quadrature node counts".into()));
    }
    let a = h.to_dense();
    let mut levels = Vec::new();
    let mut mats: Vec<DMatrix<Complex64>> = Vec::new();
    let mut c1_nodes: f64 = 0.0;
    let mut nodes = quad.start_nodes;
    let mut last_change = f64::INFINITY;
    while nodes <= quad.max_nodes {
        let start = Instant::now();
        let (m, c1) = hs_level(&a, ext, QuadratureGrid::new(quad.t_max, nodes, ext.c2))?;
        c1_nodes = c1_nodes.max(c1);
        let change = mats.last().map(|prev| max_abs(&(&m - prev)) / max_abs(&m).max(f64::MIN_POSITIVE));
        levels.push(HsLevel { nodes, change, seconds: start.elapsed().as_secs_f64() });
        mats.push(m);
        if let Some(c) = change {
            last_change = c;
            if c <= quad.tol {
                break;
            }
        }
        nodes *= 2;
    }
    if !(last_change <= quad.tol) {
        return Err(Error::QuadratureDivergence { tol: quad.tol, last: last_change });
    }
    let raw = mats.last().unwrap().clone();
    let asymmetry = max_abs(&(&raw - raw.adjoint())) / 2.0;
    let matrix = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(HsResult { matrix, error_estimate: last_change, levels, level_matrices: mats, c1_nodes, asymmetry })
}

/// `V diag(φ(λ)) V*` from the dense eigendecomposition.
pub fn spectral_function_oracle(h: &HermitianOperator, phi: &dyn Fn(f64) -> f64) -> Result<DMatrix<Complex64>> {
    let sp = eigh_dense(h, true)?;
    let v = sp.vectors.expect("vectors requested");
    let n = sp.dim;
    let mut scaled = v.clone();
    for (j, &l) in sp.eigenvalues.iter().enumerate() {
        let f = phi(l);
        for i in 0..n {
            scaled[(i, j)] *= f;
        }
    }
    Ok(scaled * v.adjoint())
}

/// `Q diag(λ) Q*` with `λ` uniform in `[lo, hi]` and `Q` the unitary factor
/// of a complex Gaussian matrix.
pub fn random_hermitian(n: usize, lo: f64, hi: f64, seed: u64) -> Result<HermitianOperator> {
    if n == 0 || !(lo <= hi) {
        return Err(Error::BadParameter(format!("random_hermitian n = {n}, [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)));
    let q = g.qr().q();
    let lam: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let mut scaled = q.clone();
    for (j, &l) in lam.iter().enumerate() {
        scaled.column_mut(j).scale_mut(l);
    }
    let m = scaled * q.adjoint();
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianOperator::from_dense(m, OperatorKind::Custom)
}

/// `max |A − B| / max |B|`.
pub fn relative_error(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(f64::MIN_POSITIVE)
}

/// `max |[M, H]|`.
pub fn commutator_norm(m: &DMatrix<Complex64>, h: &HermitianOperator) -> f64 {
    let a = h.to_dense();
    max_abs(&(m * &a - &a * m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::OperatorKind;

    fn lorentz(l: usize) -> AlmostAnalyticExtension {
        build_extension(Arc::new(Lorentzian), -2.0, l, 1.0).unwrap()
    }

    #[test]
    fn lorentzian_derivatives_agree_with_recurrence() {
        let j = JapanesePower { a: -2.0 };
        for k in 0..6 {
            for &x in &[-3.0, -0.4, 0.0, 0.7, 5.0] {
                let (a, b) = (Lorentzian.derivative(k, x), j.derivative(k, x));
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "k={k} x={x}");
            }
        }
        assert_eq!(Lorentzian.derivative(1, 1.0), -0.5);
    }

    #[test]
    fn finite_differences() {
        let h = 1e-5;
        let fs: Vec<Box<dyn SmoothFunction>> = vec![
            Box::new(JapanesePower { a: 0.5 }),
            Box::new(PolynomialBump::new(6).unwrap()),
            Box::new(CutoffProduct::new(Arc::new(JapanesePower { a: 0.5 }), 2.0).unwrap()),
        ];
        for f in &fs {
            for k in 0..4 {
                for &x in &[-3.1, -0.3, 0.2, 2.5, 3.3] {
                    let fd = (f.derivative(k, x + h) - f.derivative(k, x - h)) / (2.0 * h);
                    let exact = f.derivative(k + 1, x);
                    assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{} k={k} x={x}: {fd} vs {exact}", f.name());
                }
            }
        }
    }

    #[test]
    fn cutoff_shape() {
        let c = CutoffProduct::new(Arc::new(JapanesePower { a: 0.0 }), 1.0).unwrap();
        assert_eq!(c.eval(0.9), 1.0);
        assert_eq!(c.eval(-2.0), 0.0);
        assert!((c.eval(1.5) - 0.5).abs() < 1e-14);
        // C^5 step: the k-th derivative vanishes like t^(6-k) at both ends
        for k in 1..=5 {
            let bound = (1e-3 * 1e-3f64.powi(5 - k as i32)).max(1e-10);
            assert!(c.cutoff(k, 1.0 + 1e-9).abs() < bound && c.cutoff(k, 2.0 - 1e-9).abs() < bound, "{k}");
        }
    }

    #[test]
    fn extension_restricts_to_phi() {
        let ext = lorentz(3);
        for &x in &[-50.0, -1.0, 0.0, 0.3, 7.0] {
            assert!((ext.eval(Complex64::new(x, 0.0)).re - 1.0 / (1.0 + x * x)).abs() <= 1e-12);
        }
        assert_eq!(ext.eval(Complex64::new(0.0, 1.01)), Complex64::new(0.0, 0.0));
        let bump = build_extension(Arc::new(PolynomialBump::new(6).unwrap()), -1.0, 2, 1.0).unwrap();
        assert_eq!(bump.eval(Complex64::new(1.5, 0.3)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn dbar_matches_finite_differences() {
        let ext = lorentz(2);
        let h = 1e-6;
        for &(x, y) in &[(0.3, 0.2), (-1.0, 0.9), (2.0, 1.7), (0.0, -0.6)] {
            let z = Complex64::new(x, y);
            let dx = (ext.eval(z + h) - ext.eval(z - h)) / (2.0 * h);
            let dy = (ext.eval(z + Complex64::new(0.0, h)) - ext.eval(z - Complex64::new(0.0, h))) / (2.0 * h);
            let fd = (dx + Complex64::i() * dy) * 0.5;
            assert!((fd - ext.dbar(z)).norm() < 1e-7, "{z}");
        }
    }

    #[test]
    fn dbar_bound_on_nodes() {
        let ext = lorentz(2);
        QuadratureGrid::new(DEFAULT_T_MAX, 64, 1.0).for_each(|z, _| {
            assert!(ext.dbar(z).norm() <= ext.dbar_bound(z) * (1.0 + 1e-12));
        });
        assert!(ext.c1.is_finite() && ext.c1 > 0.0);
    }

    #[test]
    fn seminorm_growth_detected() {
        assert!(matches!(
            build_extension(Arc::new(JapanesePower { a: 0.5 }), -2.0, 2, 1.0),
            Err(Error::SeminormUnbounded { order: 0 })
        ));
        assert!(build_extension(Arc::new(JapanesePower { a: 0.5 }), 0.5, 2, 1.0).is_ok());
    }

    #[test]
    fn oracle_examples() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0, 3.0], OperatorKind::Custom);
        let m = spectral_function_oracle(&h, &|x| 1.0 / (1.0 + x * x)).unwrap();
        let want = [1.0, 0.5, 0.1];
        for i in 0..3 {
            for j in 0..3 {
                let w = if i == j { want[i] } else { 0.0 };
                assert!((m[(i, j)] - w).norm() < 1e-15);
            }
        }
        let a = HermitianOperator::from_real_rows(&[vec![2.0, -1.0], vec![-1.0, 0.5]]).unwrap();
        assert!(relative_error(&spectral_function_oracle(&a, &|x| x).unwrap(), &a.to_dense()) < 1e-10);
        let id = spectral_function_oracle(&a, &|_| 1.0).unwrap();
        assert!(relative_error(&id, &DMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn zero_matrix_gives_one() {
        let h = HermitianOperator::diagonal(&[0.0], OperatorKind::Custom);
        let r = hs_matrix_function(&h, &lorentz(3), QuadratureParams { tol: 1e-6, ..Default::default() }).unwrap();
        assert!((r.matrix[(0, 0)].re - 1.0).abs() < 1e-6, "{}", r.matrix[(0, 0)]);
        assert!(r.c1_nodes <= lorentz(3).c1 * 1.5);
    }

    #[test]
    fn higher_order_helps() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0, 3.0], OperatorKind::Custom);
        let oracle = spectral_function_oracle(&h, &|x| 1.0 / (1.0 + x * x)).unwrap();
        let q = QuadratureParams { start_nodes: 64, max_nodes: 128, tol: 1.0, ..Default::default() };
        let e1 = relative_error(hs_matrix_function(&h, &lorentz(1), q).unwrap().level_matrices.last().unwrap(), &oracle);
        let e3 = relative_error(hs_matrix_function(&h, &lorentz(3), q).unwrap().level_matrices.last().unwrap(), &oracle);
        assert!(e3 < e1, "{e3} vs {e1}");
        let tight = QuadratureParams { start_nodes: 8, max_nodes: 16, tol: 1e-14, ..Default::default() };
        assert!(matches!(hs_matrix_function(&h, &lorentz(3), tight), Err(Error::QuadratureDivergence { .. })));
    }
}
