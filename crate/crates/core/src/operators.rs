//! Hermitian matrices on finite sections and the derived weight objects.
//!
//! Every operator lives in the orthonormal frame obtained by conjugating with
//! `M = diag(m)`: a function `f` on `ℓ²(V, m²)` corresponds to the vector
//! `M f`. In that frame the Laplacian has diagonal `d_G(x) + V(x)` and
//! off-diagonal `−E(x,y) e^{iθ(x,y)} / (m(x) m(y))`.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph_with_vertices, weighted_degree, Edge, EdgeRecord, Graph, ParityMap, Vertex};
use crate::section::FiniteSection;
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Laplacian,
    Degree,
    Adjacency,
    Schrodinger,
    Custom,
}

#[derive(Clone, Debug)]
pub enum Storage {
    Dense(DMatrix<Complex64>),
    Sparse(CsrMatrix),
}

#[derive(Clone, Debug)]
pub struct HermitianOperator {
    pub storage: Storage,
    pub kind: OperatorKind,
    pub section: Option<Arc<FiniteSection>>,
}

const HERMITIAN_TOL: f64 = 1e-12;

impl HermitianOperator {
    pub fn from_csr(m: CsrMatrix, kind: OperatorKind) -> Result<Self> {
        if m.nrows != m.ncols {
            return Err(Error::DimensionMismatch { expected: m.nrows, found: m.ncols });
        }
        let defect = m.hermitian_defect();
        if defect > HERMITIAN_TOL * m.max_abs().max(1.0) {
            return Err(Error::BadParameter(format!("matrix is not Hermitian (defect {defect:e})")));
        }
        Ok(HermitianOperator { storage: Storage::Sparse(m), kind, section: None })
    }

    pub fn from_dense(m: DMatrix<Complex64>, kind: OperatorKind) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let scale = m.iter().fold(1.0f64, |a, v| a.max(v.norm()));
        let defect = (&m - m.adjoint()).iter().fold(0.0f64, |a, v| a.max(v.norm()));
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::BadParameter(format!("matrix is not Hermitian (defect {defect:e})")));
        }
        Ok(HermitianOperator { storage: Storage::Dense(m), kind, section: None })
    }

    /// Real symmetric matrix given row by row.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.len() });
            }
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        Self::from_dense(m, OperatorKind::Custom)
    }

    pub fn diagonal(values: &[f64], kind: OperatorKind) -> Self {
        HermitianOperator { storage: Storage::Sparse(CsrMatrix::from_diagonal(values)), kind, section: None }
    }

    fn with_section(mut self, s: &FiniteSection) -> Self {
        self.section = Some(Arc::new(s.clone()));
        self
    }

    pub fn dim(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.nrows(),
            Storage::Sparse(m) => m.nrows,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Sparse(m) => m.get(i, j),
        }
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        match &self.storage {
            Storage::Dense(m) => {
                let n = m.nrows();
                for (i, yi) in y.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..n {
                        acc += m[(i, j)] * x[j];
                    }
                    *yi = acc;
                }
            }
            Storage::Sparse(m) => m.mul_vec_into(x, y),
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply_into(x, &mut y);
        y
    }

    /// `⟨f, H f⟩` (real part; the imaginary part vanishes up to rounding).
    pub fn form(&self, f: &[Complex64]) -> f64 {
        let hf = self.apply(f);
        f.iter().zip(&hf).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match &self.storage {
            Storage::Dense(m) => CsrMatrix::from_dense(m),
            Storage::Sparse(m) => m.clone(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.iter().fold(0.0, |a, v| a.max(v.norm())),
            Storage::Sparse(m) => m.max_abs(),
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => (m - m.adjoint()).iter().fold(0.0, |a, v| a.max(v.norm())),
            Storage::Sparse(m) => m.hermitian_defect(),
        }
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entry(i, i).re).collect()
    }

    /// `a·self + b·other`, kind `custom`.
    pub fn combine(&self, a: f64, other: &HermitianOperator, b: f64) -> Result<HermitianOperator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(x), Storage::Sparse(y)) => Storage::Sparse(x.axpby(a, y, b)),
            _ => Storage::Dense(self.to_dense() * Complex64::new(a, 0.0) + other.to_dense() * Complex64::new(b, 0.0)),
        };
        Ok(HermitianOperator { storage, kind: OperatorKind::Custom, section: self.section.clone() })
    }

    /// Nested `[re, im]` pairs, row by row.
    pub fn to_json_dense(&self) -> serde_json::Value {
        let d = self.to_dense();
        let rows: Vec<Vec<[f64; 2]>> =
            (0..d.nrows()).map(|i| (0..d.ncols()).map(|j| [d[(i, j)].re, d[(i, j)].im]).collect()).collect();
        serde_json::json!({ "kind": self.kind, "dim": self.dim(), "entries": rows })
    }

    /// Coordinate triplets `[i, j, re, im]`.
    pub fn to_json_triplets(&self) -> serde_json::Value {
        let t: Vec<(usize, usize, f64, f64)> =
            self.to_csr().triplets().into_iter().map(|(i, j, v)| (i, j, v.re, v.im)).collect();
        serde_json::json!({ "kind": self.kind, "dim": self.dim(), "triplets": t })
    }

    /// `index,vertex,value` rows of the real diagonal.
    pub fn diagonal_csv(&self) -> String {
        let mut out = String::from("index,vertex,value\n");
        for (i, v) in self.diagonal_values().iter().enumerate() {
            let label = self.section.as_ref().map(|s| s.members[i].to_string()).unwrap_or_else(|| i.to_string());
            out.push_str(&format!("{i},{label},{v:e}\n"));
        }
        out
    }
}

fn check_len(s: &FiniteSection, v: &[f64]) -> Result<()> {
    if v.len() != s.len() {
        return Err(Error::DimensionMismatch { expected: s.len(), found: v.len() });
    }
    Ok(())
}

fn adjacency_triplets(s: &FiniteSection, sign: f64) -> Vec<(usize, usize, Complex64)> {
    let mut t = Vec::new();
    for (i, row) in s.links.iter().enumerate() {
        for l in row {
            if let Some(j) = l.local {
                let w = l.weight / (s.mass[i] * s.mass[j]);
                t.push((i, j, Complex64::from_polar(sign * w, l.phase)));
            }
        }
    }
    t
}

/// Dirichlet restriction of `Δ_{E,θ} + V` in the conjugated frame.
pub fn laplacian_matrix(s: &FiniteSection, potential: Option<&[f64]>) -> Result<HermitianOperator> {
    if let Some(v) = potential {
        check_len(s, v)?;
    }
    let mut t = adjacency_triplets(s, -1.0);
    for (i, &d) in s.ambient_degree.iter().enumerate() {
        let v = potential.map_or(0.0, |p| p[i]);
        t.push((i, i, Complex64::new(d + v, 0.0)));
    }
    let kind = if potential.is_some() { OperatorKind::Schrodinger } else { OperatorKind::Laplacian };
    Ok(HermitianOperator::from_csr(CsrMatrix::from_triplets(s.len(), s.len(), t), kind)?.with_section(s))
}

/// `d_G(Q)` with ambient degrees.
pub fn degree_matrix(s: &FiniteSection) -> HermitianOperator {
    HermitianOperator::diagonal(&s.ambient_degree, OperatorKind::Degree).with_section(s)
}

/// `A_{E,θ}` with entries `E e^{iθ} / (m m)`.
pub fn adjacency_matrix(s: &FiniteSection) -> HermitianOperator {
    let m = CsrMatrix::from_triplets(s.len(), s.len(), adjacency_triplets(s, 1.0));
    HermitianOperator { storage: Storage::Sparse(m), kind: OperatorKind::Adjacency, section: None }.with_section(s)
}

/// Multiplication operator by a real potential.
pub fn potential_matrix(s: &FiniteSection, v: &[f64]) -> Result<HermitianOperator> {
    check_len(s, v)?;
    Ok(HermitianOperator::diagonal(v, OperatorKind::Custom).with_section(s))
}

/// `V_m = d_G − W_m` for a reweighting `m_new`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyPotential {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub m_new: Vec<f64>,
}

/// `W_m(x) = (1/m_0²(x)) Σ_y E(x,y) (m(y)/m(x)) (m_0(x)/m_0(y))`, summed over
/// all ambient neighbors.
pub fn hardy_potential(s: &FiniteSection, m_new: &dyn Fn(Vertex) -> f64) -> Result<HardyPotential> {
    let positive = |x: Vertex| {
        let v = m_new(x);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonpositiveWeight { what: format!("m_new({x})"), value: v })
        }
    };
    let mut v = Vec::with_capacity(s.len());
    let mut w = Vec::with_capacity(s.len());
    let mut mn = Vec::with_capacity(s.len());
    for (i, &x) in s.members.iter().enumerate() {
        let m0x = s.mass[i];
        let mx = positive(x)?;
        let mut sum = 0.0;
        for l in &s.links[i] {
            let m0y = match l.local {
                Some(j) => s.mass[j],
                None => s.graph.vertex_weight(l.target)?,
            };
            // one rounded quotient, so m_new = m_0 gives exactly 1
            sum += l.weight * ((positive(l.target)? * m0x) / (mx * m0y));
        }
        let wx = sum / (m0x * m0x);
        w.push(wx);
        v.push(s.ambient_degree[i] - wx);
        mn.push(mx);
    }
    Ok(HardyPotential { v, w, m_new: mn })
}

/// Weights for the unitary `f ↦ (m/m_t) f` from `ℓ²(m²)` to `ℓ²(m_t²)`:
/// returns the graph with `E'(x,y) = E(x,y) m_t(x) m_t(y) / (m(x) m(y))`,
/// vertex weights `m_t`, the same phases, and the potential
/// `V(x) = (1/m²(x)) Σ_y E(x,y) (1 − (m_t(y)/m_t(x)) (m(x)/m(y)))`,
/// so that `Δ_{E,θ}` on `ℓ²(m²)` is unitarily equivalent to `Δ_{E',θ} + V`.
pub fn gauge_weight_transform(g: &Graph, m_target: &dyn Fn(Vertex) -> f64) -> Result<(Graph, BTreeMap<Vertex, f64>)> {
    let vertices = g.vertices().ok_or(Error::NotFinite)?.to_vec();
    let mut mt = HashMap::new();
    for &x in &vertices {
        let v = m_target(x);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonpositiveWeight { what: format!("m_target({x})"), value: v });
        }
        mt.insert(x, v);
    }
    let mut edges = Vec::new();
    let mut potential = BTreeMap::new();
    let mut weights = BTreeMap::new();
    for &x in &vertices {
        let mx = g.vertex_weight(x)?;
        let mut sum = 0.0;
        for e in g.neighbors(x)? {
            let my = g.vertex_weight(e.target)?;
            let (tx, ty) = (mt[&x], mt[&e.target]);
            sum += e.weight * (1.0 - (ty / tx) * (mx / my));
            if x < e.target {
                edges.push(EdgeRecord(x, e.target, e.weight * tx * ty / (mx * my), e.phase));
            }
        }
        potential.insert(x, sum / (mx * mx));
        weights.insert(x, mt[&x]);
    }
    let out = build_graph_with_vertices(&vertices, &edges, &weights, g.root())?;
    Ok((out, potential))
}

/// `U = diag((−1)^{ℓ(x)})` on the section.
pub fn signing_matrix(s: &FiniteSection, p: &ParityMap) -> Result<HermitianOperator> {
    let mut signs = Vec::with_capacity(s.len());
    for &x in &s.members {
        signs.push(p.parity(x).ok_or(Error::UnknownVertex(x))? as f64);
    }
    for (i, row) in s.links.iter().enumerate() {
        for l in row {
            if let Some(j) = l.local {
                if signs[i] == signs[j] {
                    return Err(Error::NotBipartite(s.members[i], s.members[j]));
                }
            }
        }
    }
    Ok(HermitianOperator::diagonal(&signs, OperatorKind::Custom).with_section(s))
}

/// `Λ(x) = (1/m²(x)) Σ_y |E(x,y) − E_ref(x,y)|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSize {
    pub vertices: Vec<Vertex>,
    pub lambda: Vec<f64>,
}

impl PerturbationSize {
    pub fn on_section(&self, s: &FiniteSection) -> Result<Vec<f64>> {
        let idx: HashMap<Vertex, f64> = self.vertices.iter().copied().zip(self.lambda.iter().copied()).collect();
        s.members.iter().map(|x| idx.get(x).copied().ok_or(Error::UnknownVertex(*x))).collect()
    }
}

/// Λ over all vertices of finite graphs, or over the ball of `horizon`
/// around the root of `g` otherwise.
pub fn perturbation_lambda(g: &Graph, g_ref: &Graph, horizon: Option<usize>) -> Result<PerturbationSize> {
    let vertices: Vec<Vertex> = match (g.vertices(), horizon) {
        (Some(vs), None) => vs.to_vec(),
        (_, Some(h)) => {
            let root = g.root().ok_or_else(|| Error::BadParameter("graph has no root".into()))?;
            let mut vs: Vec<Vertex> = g.ball(root, h)?.into_iter().map(|(v, _)| v).collect();
            vs.sort_unstable();
            vs
        }
        (None, None) => return Err(Error::NotFinite),
    };
    if let Some(other) = g_ref.vertices() {
        if g.vertices().is_some_and(|vs| vs.len() != other.len()) {
            let missing = other.iter().find(|v| !g.contains(**v)).copied().unwrap_or_default();
            return Err(Error::VertexSetMismatch(missing));
        }
    }
    let mut lambda = Vec::with_capacity(vertices.len());
    for &x in &vertices {
        if !g_ref.contains(x) {
            return Err(Error::VertexSetMismatch(x));
        }
        let m = g.vertex_weight(x)?;
        if (m - g_ref.vertex_weight(x)?).abs() > 1e-14 * m {
            return Err(Error::VertexSetMismatch(x));
        }
        let mut diff: BTreeMap<Vertex, f64> = BTreeMap::new();
        g.visit_neighbors(x, &mut |e| *diff.entry(e.target).or_default() += e.weight)?;
        g_ref.visit_neighbors(x, &mut |e| *diff.entry(e.target).or_default() -= e.weight)?;
        lambda.push(diff.values().map(|d| d.abs()).sum::<f64>() / (m * m));
    }
    Ok(PerturbationSize { vertices, lambda })
}

/// Parameters of the tree Hardy weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeWeightParams {
    pub eta: f64,
    pub eps0: f64,
}

impl TreeWeightParams {
    pub fn new(eta: f64, eps0: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::BadParameter(format!("eta = {eta} must lie in (0, 1)")));
        }
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(Error::BadParameter(format!("eps0 = {eps0} must lie in (0, 1)")));
        }
        Ok(TreeWeightParams { eta, eps0 })
    }

    /// Smallest `C(η)` with `d (1 − η − C_0 d^{−ε_0/2}/η) ≥ (1 − 2η) d − C(η)`
    /// for every `d > 0`: `sup_t (C_0/η) t^s − η t` with `s = 1 − ε_0/2`.
    pub fn c_eta(&self, c0: f64) -> f64 {
        if c0 <= 0.0 {
            return 0.0;
        }
        let s = 1.0 - self.eps0 / 2.0;
        let t = (c0 * s / (self.eta * self.eta)).powf(1.0 / (1.0 - s));
        self.eta * t * (1.0 - s) / s
    }

    /// Right-hand side of the pointwise bound on `V_m̃(x)/d(x)`.
    pub fn key2_bound(&self, d: f64, c0: f64) -> f64 {
        1.0 - self.eta - c0 * d.powf(-self.eps0 / 2.0) / self.eta
    }
}

/// Recursive weight `m̃` on the pruned forest within a horizon.
#[derive(Clone, Debug)]
pub struct TreeHardyWeight {
    pub params: TreeWeightParams,
    pub root: Vertex,
    pub horizon: usize,
    /// Horizon vertices in BFS order.
    pub vertices: Vec<Vertex>,
    pub depth: Vec<usize>,
    pub father: Vec<Option<Vertex>>,
    pub degree: Vec<f64>,
    /// `None` on the pruned set `K = {d ≤ 1}`.
    pub m_tilde: Vec<Option<f64>>,
    pub pruned: Vec<Vertex>,
    /// Father-edge constant `sup d^{ε_0−1}(x) E(father x, x) m^{−2}(x)` over
    /// non-root horizon vertices outside `K`.
    pub c0: f64,
    /// All-neighbor variant `sup_x max_y d^{ε_0−1}(x) E(x,y) m^{−2}(x)`.
    pub c0_all_neighbors: f64,
    index: HashMap<Vertex, usize>,
}

impl TreeHardyWeight {
    pub fn index(&self, x: Vertex) -> Option<usize> {
        self.index.get(&x).copied()
    }

    pub fn c_eta(&self) -> f64 {
        self.params.c_eta(self.c0)
    }

    pub fn a_lower(&self) -> f64 {
        1.0 - 2.0 * self.params.eta
    }

    pub fn b_lower(&self) -> f64 {
        self.c_eta() + 1.0
    }

    /// `V_m̃(x) / d(x)`, with `W` summed over neighbors outside `K`.
    /// Sons on the horizon edge get their weight from the recursion.
    pub fn ratio(&self, g: &Graph, x: Vertex) -> Result<f64> {
        let i = self.index(x).ok_or(Error::UnknownVertex(x))?;
        let mt = self.m_tilde[i].ok_or_else(|| Error::BadParameter(format!("{x} lies in the pruned set")))?;
        let frame = Frame { x, father: self.father[i], mt, mt_father: self.father[i].and_then(|f| self.m_tilde[self.index[&f]]) };
        Ok(local_terms(g, &frame, self.params, self.degree[i], g.vertex_weight(x)?)?.ratio)
    }

    /// `V_m̃` on the members of a section (zero on `K` and outside the horizon).
    pub fn potential(&self, g: &Graph, s: &FiniteSection) -> Result<Vec<f64>> {
        s.members
            .iter()
            .enumerate()
            .map(|(k, &x)| match self.index(x) {
                Some(i) if self.m_tilde[i].is_some() => Ok(self.ratio(g, x)? * s.ambient_degree[k]),
                _ => Ok(0.0),
            })
            .collect()
    }
}

fn ensure_tree(g: &Graph) -> Result<Vertex> {
    let root = g.root().ok_or_else(|| Error::NotATree("no root".into()))?;
    match (g.family(), g.vertices()) {
        (Some(f), _) if !f.is_tree() => Err(Error::NotATree(format!("family {} has cycles", f.spec().name()))),
        (None, Some(vs)) => {
            let mut twice = 0usize;
            for &v in vs {
                twice += g.combinatorial_degree(v)?;
            }
            if twice / 2 + 1 != vs.len() {
                return Err(Error::NotATree(format!("{} edges on {} vertices", twice / 2, vs.len())));
            }
            Ok(root)
        }
        _ => Ok(root),
    }
}

struct Frame {
    x: Vertex,
    father: Option<Vertex>,
    mt: f64,
    mt_father: Option<f64>,
}

struct LocalTerms {
    ratio: f64,
    /// `(son, d(son), m̃(son))`, `m̃` absent on `K`.
    sons: Vec<(Vertex, f64, Option<f64>)>,
    father_edge: f64,
    max_edge: f64,
}

fn local_terms(g: &Graph, f: &Frame, p: TreeWeightParams, d: f64, mx: f64) -> Result<LocalTerms> {
    let mut nbrs = Vec::new();
    g.visit_neighbors(f.x, &mut |e| nbrs.push(e))?;
    let mut sum = 0.0;
    let mut sons = Vec::with_capacity(nbrs.len());
    let mut father_edge = 0.0;
    let mut max_edge: f64 = 0.0;
    for e in nbrs {
        max_edge = max_edge.max(e.weight);
        let my = g.vertex_weight(e.target)?;
        if Some(e.target) == f.father {
            father_edge = e.weight;
            if let Some(mtf) = f.mt_father {
                sum += e.weight * (mtf / f.mt) * (mx / my);
            }
            continue;
        }
        let dy = weighted_degree(g, e.target)?;
        let mty = (dy > 1.0).then(|| p.eta * f.mt * (my / mx) * dy.powf(-p.eps0 / 2.0));
        if let Some(mty) = mty {
            sum += e.weight * (mty / f.mt) * (mx / my);
        }
        sons.push((e.target, dy, mty));
    }
    Ok(LocalTerms { ratio: 1.0 - sum / (mx * mx * d), sons, father_edge, max_edge })
}

/// Materializes `m̃`, `K` and `C_0` on the ball of `horizon` around the root.
pub fn tree_hardy_weight(g: &Graph, eta: f64, eps0: f64, horizon: usize) -> Result<TreeHardyWeight> {
    let params = TreeWeightParams::new(eta, eps0)?;
    let root = ensure_tree(g)?;
    let mut out = TreeHardyWeight {
        params,
        root,
        horizon,
        vertices: vec![],
        depth: vec![],
        father: vec![],
        degree: vec![],
        m_tilde: vec![],
        pruned: vec![],
        c0: 0.0,
        c0_all_neighbors: 0.0,
        index: HashMap::new(),
    };
    let mut queue = VecDeque::new();
    let d_root = weighted_degree(g, root)?;
    queue.push_back((root, None, 0usize, d_root, (d_root > 1.0).then_some(1.0)));
    let mut seen = HashSet::new();
    seen.insert(root);
    while let Some((x, father, depth, d, mt)) = queue.pop_front() {
        let mx = g.vertex_weight(x)?;
        let mt_father = father.and_then(|f: Vertex| out.m_tilde[out.index[&f]]);
        // component roots restart at 1
        let mt_eff = match (mt, mt_father) {
            (Some(_), None) => Some(1.0),
            (m, _) => m,
        };
        let frame = Frame { x, father, mt: mt_eff.unwrap_or(1.0), mt_father };
        let terms = local_terms(g, &frame, params, d, mx)?;
        out.c0_all_neighbors = out.c0_all_neighbors.max(d.powf(eps0 - 1.0) * terms.max_edge / (mx * mx));
        if mt_eff.is_some() && father.is_some() {
            out.c0 = out.c0.max(d.powf(eps0 - 1.0) * terms.father_edge / (mx * mx));
        }
        if mt_eff.is_none() {
            out.pruned.push(x);
        }
        out.index.insert(x, out.vertices.len());
        out.vertices.push(x);
        out.depth.push(depth);
        out.father.push(father);
        out.degree.push(d);
        out.m_tilde.push(mt_eff);
        if depth < horizon {
            for (y, dy, mty) in terms.sons {
                if !seen.insert(y) {
                    return Err(Error::NotATree(format!("{y} reached twice")));
                }
                // a son of a pruned vertex starts a new component
                let mty = match (mt_eff, mty) {
                    (None, _) if dy > 1.0 => Some(1.0),
                    (_, m) => m,
                };
                queue.push_back((y, Some(x), depth + 1, dy, mty));
            }
        }
    }
    Ok(out)
}

/// Outcome of [`key2_scan`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Key2Scan {
    pub params: TreeWeightParams,
    pub horizon: usize,
    pub vertices: u64,
    pub pruned: u64,
    pub c0: f64,
    pub c0_all_neighbors: f64,
    /// `min_x η d^{ε_0/2}(x) (V_m̃(x)/d(x) − 1 + η) + C_0`; the pointwise bound
    /// holds at every scanned vertex iff this is `≥ 0`.
    pub worst_scaled_margin: f64,
    pub worst_vertex: Vertex,
    pub min_degree: f64,
}

impl Key2Scan {
    pub fn holds(&self, tol: f64) -> bool {
        self.worst_scaled_margin >= -tol * self.c0.max(1.0)
    }
}

/// Checks the pointwise bound `V_m̃(x)/d(x) ≥ 1 − η − C_0 d^{−ε_0/2}(x)/η` at
/// every vertex of the horizon ball by depth-first traversal, keeping only the
/// current branch in memory.
pub fn key2_scan(g: &Graph, eta: f64, eps0: f64, horizon: usize) -> Result<Key2Scan> {
    Ok(key2_scan_multi(g, &[eta], eps0, horizon)?.remove(0))
}

/// [`key2_scan`] for several `η` in one traversal.
///
/// Only ratios of `m̃` enter `W`: a son outside `K` contributes
/// `E(x,y) η d(y)^{−ε_0/2}` and a father outside `K` contributes
/// `E(f,x) d(x)^{ε_0/2}/η`, so `V_m̃/d = 1 − (η A + B/η)/(m² d)` with `A`, `B`
/// independent of `η`.
pub fn key2_scan_multi(g: &Graph, etas: &[f64], eps0: f64, horizon: usize) -> Result<Vec<Key2Scan>> {
    let params: Vec<TreeWeightParams> = etas.iter().map(|&e| TreeWeightParams::new(e, eps0)).collect::<Result<_>>()?;
    let root = ensure_tree(g)?;
    struct Item {
        x: Vertex,
        father: Option<Vertex>,
        depth: usize,
        d: f64,
        /// father lies outside `K`
        father_term: bool,
    }
    let mut stack = vec![Item { x: root, father: None, depth: 0, d: weighted_degree(g, root)?, father_term: false }];
    let (mut vertices, mut pruned) = (0u64, 0u64);
    let (mut c0, mut c0_all, mut min_degree) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut worst = vec![(f64::INFINITY, root); etas.len()];
    let mut buf: Vec<Edge> = Vec::new();
    // siblings usually share their degree
    let mut last_pow = (f64::NAN, f64::NAN);
    let mut pow = |d: f64| {
        if d != last_pow.0 {
            last_pow = (d, d.powf(-eps0 / 2.0));
        }
        last_pow.1
    };
    while let Some(it) = stack.pop() {
        vertices += 1;
        min_degree = min_degree.min(it.d);
        let mx = g.vertex_weight(it.x)?;
        let outside = it.d > 1.0;
        buf.clear();
        g.visit_neighbors(it.x, &mut |e| buf.push(e))?;
        let (mut a, mut father_edge, mut max_edge) = (0.0, 0.0, 0.0f64);
        let expand = it.depth < horizon;
        for e in &buf {
            max_edge = max_edge.max(e.weight);
            if Some(e.target) == it.father {
                father_edge = e.weight;
                continue;
            }
            let my = g.vertex_weight(e.target)?;
            let dy = g.edge_sum(e.target)? / (my * my);
            if dy > 1.0 && outside {
                a += e.weight * pow(dy);
            }
            if expand {
                stack.push(Item { x: e.target, father: Some(it.x), depth: it.depth + 1, d: dy, father_term: outside });
            }
        }
        c0_all = c0_all.max(it.d.powf(eps0 - 1.0) * max_edge / (mx * mx));
        if !outside {
            pruned += 1;
            continue;
        }
        if it.father.is_some() {
            c0 = c0.max(it.d.powf(eps0 - 1.0) * father_edge / (mx * mx));
        }
        let b = if it.father_term { father_edge / pow(it.d) } else { 0.0 };
        let scale = mx * mx * it.d;
        let dpow = 1.0 / pow(it.d);
        for (k, p) in params.iter().enumerate() {
            let ratio = 1.0 - (p.eta * a + b / p.eta) / scale;
            let q = p.eta * dpow * (ratio - 1.0 + p.eta);
            if q < worst[k].0 {
                worst[k] = (q, it.x);
            }
        }
    }
    Ok(params
        .iter()
        .zip(worst)
        .map(|(&p, (q, x))| Key2Scan {
            params: p,
            horizon,
            vertices,
            pruned,
            c0,
            c0_all_neighbors: c0_all,
            worst_scaled_margin: q + c0,
            worst_vertex: x,
            min_degree,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{offspring_tree, path_graph, star, OffspringSequence, PathParams};
    use crate::graph::build_graph;
    use crate::section::ball_section;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn star_laplacian_entries() {
        let g = star(2).unwrap();
        let s = ball_section(&g, Vertex::id(0), 1).unwrap();
        let l = laplacian_matrix(&s, None).unwrap().to_dense();
        let want = [[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l[(i, j)], c(want[i][j]));
            }
        }
        let a = adjacency_matrix(&s).to_dense();
        assert_eq!(a[(0, 1)], c(1.0));
        assert_eq!(degree_matrix(&s).diagonal_values(), vec![2.0, 1.0, 1.0]);
    }

    #[test]
    fn phase_pi_flips_sign() {
        let g = build_graph(&[EdgeRecord(Vertex::id(1), Vertex::id(2), 1.0, std::f64::consts::PI)], &BTreeMap::new(), None)
            .unwrap();
        let s = ball_section(&g, Vertex::id(1), 1).unwrap();
        let l = laplacian_matrix(&s, None).unwrap().to_dense();
        assert!((l[(0, 1)] - c(1.0)).norm() < 1e-15);
        let g = build_graph(
            &[EdgeRecord(Vertex::id(1), Vertex::id(2), 1.0, std::f64::consts::FRAC_PI_2)],
            &BTreeMap::new(),
            None,
        )
        .unwrap();
        let s = ball_section(&g, Vertex::id(1), 1).unwrap();
        let a = adjacency_matrix(&s);
        assert!((a.entry(0, 1) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((a.entry(1, 0) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn laplacian_is_degree_minus_adjacency() {
        let g = offspring_tree(OffspringSequence::constant(3)).unwrap();
        let g = crate::generators::randomize(&g, &crate::generators::RandomizeSpec::phases(4));
        let s = ball_section(&g, Vertex::id(0), 3).unwrap();
        let l = laplacian_matrix(&s, None).unwrap();
        let da = degree_matrix(&s).combine(1.0, &adjacency_matrix(&s), -1.0).unwrap();
        let diff = l.combine(1.0, &da, -1.0).unwrap();
        assert!(diff.max_abs() < 1e-14);
        assert!(l.hermitian_defect() < 1e-14);
    }

    #[test]
    fn hardy_potential_examples() {
        let g = path_graph(PathParams::default()).unwrap();
        let s = ball_section(&g, Vertex::id(0), 5).unwrap();
        let same = hardy_potential(&s, &|_| 1.0).unwrap();
        assert!(same.v.iter().all(|&v| v == 0.0));
        let r: f64 = 1.7;
        let hp = hardy_potential(&s, &|x| r.powi(x.0[0] as i32)).unwrap();
        for x in 1..=5 {
            assert!((hp.v[x] - (2.0 - r - 1.0 / r)).abs() < 1e-12);
        }
        assert!(matches!(hardy_potential(&s, &|_| -1.0), Err(Error::NonpositiveWeight { .. })));
    }

    #[test]
    fn gauge_transform_two_vertex_example() {
        let g = build_graph(&[EdgeRecord(Vertex::id(1), Vertex::id(2), 1.0, 0.0)], &BTreeMap::new(), None).unwrap();
        let (h, v) = gauge_weight_transform(&g, &|x| if x == Vertex::id(2) { 2.0 } else { 1.0 }).unwrap();
        assert_eq!(h.edge_weight(Vertex::id(1), Vertex::id(2)).unwrap(), 2.0);
        assert_eq!(v[&Vertex::id(1)], -1.0);
        assert_eq!(v[&Vertex::id(2)], 0.5);
        let (same, zero) = gauge_weight_transform(&g, &|_| 1.0).unwrap();
        assert_eq!(same.edge_weight(Vertex::id(1), Vertex::id(2)).unwrap(), 1.0);
        assert!(zero.values().all(|&z| z == 0.0));
        let s = ball_section(&h, Vertex::id(1), 1).unwrap();
        let pot: Vec<f64> = s.members.iter().map(|x| v[x]).collect();
        let b = laplacian_matrix(&s, Some(&pot)).unwrap().to_dense();
        assert_eq!(b[(0, 0)], c(1.0));
        assert_eq!(b[(1, 1)], c(1.0));
        assert_eq!(b[(0, 1)], c(-1.0));
    }

    #[test]
    fn signing_on_path_and_triangle() {
        let g = path_graph(PathParams::default()).unwrap();
        let s = ball_section(&g, Vertex::id(0), 2).unwrap();
        let p = crate::graph::parity_map(&g, Vertex::id(0), Some(3)).unwrap();
        assert_eq!(signing_matrix(&s, &p).unwrap().diagonal_values(), vec![1.0, -1.0, 1.0]);
        let tri = build_graph(
            &[
                EdgeRecord(Vertex::id(0), Vertex::id(1), 1.0, 0.0),
                EdgeRecord(Vertex::id(1), Vertex::id(2), 1.0, 0.0),
                EdgeRecord(Vertex::id(2), Vertex::id(0), 1.0, 0.0),
            ],
            &BTreeMap::new(),
            None,
        )
        .unwrap();
        let s = ball_section(&tri, Vertex::id(0), 1).unwrap();
        let p = crate::graph::parity_map(&tri, Vertex::id(0), None).unwrap();
        assert!(matches!(signing_matrix(&s, &p), Err(Error::NotBipartite(..))));
    }

    #[test]
    fn lambda_single_edge_change() {
        let e = |w| {
            vec![
                EdgeRecord(Vertex::id(0), Vertex::id(1), 1.0, 0.0),
                EdgeRecord(Vertex::id(1), Vertex::id(2), w, 0.0),
                EdgeRecord(Vertex::id(2), Vertex::id(3), 1.0, 0.0),
            ]
        };
        let a = build_graph(&e(1.0), &BTreeMap::new(), None).unwrap();
        let b = build_graph(&e(1.25), &BTreeMap::new(), None).unwrap();
        assert!(perturbation_lambda(&a, &a, None).unwrap().lambda.iter().all(|&l| l == 0.0));
        assert_eq!(perturbation_lambda(&b, &a, None).unwrap().lambda, vec![0.0, 0.25, 0.25, 0.0]);
    }

    #[test]
    fn binary_tree_weight_closed_form() {
        let g = offspring_tree(OffspringSequence::constant(2)).unwrap();
        let (eta, eps0) = (0.3, 0.5);
        let w = tree_hardy_weight(&g, eta, eps0, 5).unwrap();
        assert!(w.pruned.is_empty());
        for (i, &x) in w.vertices.iter().enumerate() {
            let k = w.depth[i] as i32;
            let want = (eta * 3f64.powf(-eps0 / 2.0)).powi(k);
            assert!((w.m_tilde[i].unwrap() - want).abs() < 1e-15 * want.max(1e-300), "{x}");
        }
        // interior vertex: ratio = 1 − (1/η) 3^{ε0/2 − 1} − (2η/3) 3^{−ε0/2}
        let x = Vertex::new(3, 2, 0);
        let want = 1.0 - 3f64.powf(eps0 / 2.0 - 1.0) / eta - 2.0 * eta / 3.0 * 3f64.powf(-eps0 / 2.0);
        assert!((w.ratio(&g, x).unwrap() - want).abs() < 1e-14);
        assert!((w.c0 - 3f64.powf(eps0 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn scan_matches_materialized() {
        let g = offspring_tree(OffspringSequence::linear(1, 2)).unwrap();
        let w = tree_hardy_weight(&g, 0.25, 0.5, 4).unwrap();
        let scan = key2_scan(&g, 0.25, 0.5, 4).unwrap();
        assert_eq!(scan.vertices as usize, w.vertices.len());
        assert_eq!(scan.c0, w.c0);
        assert!(scan.holds(1e-12));
        for &x in &w.vertices {
            let i = w.index(x).unwrap();
            assert!(w.ratio(&g, x).unwrap() >= w.params.key2_bound(w.degree[i], w.c0) - 1e-12);
        }
    }

    #[test]
    fn pruned_set_on_a_path() {
        // endpoint of the unit half-line has degree 1
        let g = path_graph(PathParams::default()).unwrap();
        let w = tree_hardy_weight(&g, 0.5, 0.5, 4).unwrap();
        assert_eq!(w.pruned, vec![Vertex::id(0)]);
        assert_eq!(w.m_tilde[w.index(Vertex::id(1)).unwrap()], Some(1.0));
        assert!(matches!(tree_hardy_weight(&g, 1.5, 0.5, 2), Err(Error::BadParameter(_))));
        assert!(matches!(
            tree_hardy_weight(&crate::generators::bipartite_chain(), 0.5, 0.5, 2),
            Err(Error::NotATree(_))
        ));
    }

    #[test]
    fn c_eta_is_the_optimal_constant() {
        let p = TreeWeightParams::new(0.25, 0.5).unwrap();
        let c0 = 0.8;
        let ce = p.c_eta(c0);
        let mut worst = f64::INFINITY;
        for k in 0..20000 {
            let d = 1e-3 * 1.001f64.powi(k);
            let lhs = d * p.key2_bound(d, c0);
            worst = worst.min(lhs - ((1.0 - 2.0 * p.eta) * d - ce));
        }
        assert!(worst >= -1e-9 && worst < 1e-3, "{worst}");
    }
}
