//! Weighted magnetic graphs `(V, E, m, θ)`.
//!
//! A [`Graph`] is either an explicit finite vertex list or a lazily
//! evaluated generator family (see [`crate::generators`]). Both are accessed
//! through neighbor enumeration only, so infinite graphs are never
//! materialized; finite windows are cut out with [`crate::section`].

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::generators::{Family, FamilySpec, Overlay, RandomizeSpec};

/// Opaque vertex identifier with a canonical lexicographic order.
///
/// Explicit graphs use `Vertex::id(k)`; generator families use up to three
/// coordinates (block, level, index) as documented on each family.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Vertex(pub [u64; 3]);

impl Vertex {
    pub const fn new(a: u64, b: u64, c: u64) -> Self {
        Vertex([a, b, c])
    }

    pub const fn id(a: u64) -> Self {
        Vertex([a, 0, 0])
    }

    pub fn coords(&self) -> [u64; 3] {
        self.0
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.0;
        if b == 0 && c == 0 {
            write!(f, "{a}")
        } else {
            write!(f, "{a}.{b}.{c}")
        }
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{self}")
    }
}

impl From<u64> for Vertex {
    fn from(a: u64) -> Self {
        Vertex::id(a)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum VertexRepr {
    Id(u64),
    Coords(Vec<u64>),
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let [a, b, c] = self.0;
        if b == 0 && c == 0 {
            VertexRepr::Id(a).serialize(s)
        } else {
            VertexRepr::Coords(vec![a, b, c]).serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match VertexRepr::deserialize(d)? {
            VertexRepr::Id(a) => Ok(Vertex::id(a)),
            VertexRepr::Coords(c) if (1..=3).contains(&c.len()) => {
                let mut out = [0; 3];
                out[..c.len()].copy_from_slice(&c);
                Ok(Vertex(out))
            }
            VertexRepr::Coords(c) => Err(serde::de::Error::invalid_length(c.len(), &"1 to 3 coordinates")),
        }
    }
}

/// A directed view of an edge: `E(x, target)` and `θ(x, target)` seen from `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub target: Vertex,
    pub weight: f64,
    pub phase: f64,
}

impl Edge {
    /// `E(x,y) e^{iθ(x,y)}`.
    pub fn magnetic_weight(&self) -> Complex64 {
        Complex64::from_polar(self.weight, self.phase)
    }
}

/// One input record `(x, y, E(x,y), θ(x,y))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord(pub Vertex, pub Vertex, pub f64, pub f64);

#[derive(Clone, Debug)]
pub(crate) struct ExplicitGraph {
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, usize>,
    adjacency: Vec<Vec<(usize, f64, f64)>>,
    weights: Vec<f64>,
}

#[derive(Clone, Debug)]
enum Source {
    Explicit(ExplicitGraph),
    Family(Family),
}

#[derive(Clone, Debug)]
struct Inner {
    source: Source,
    overlay: Option<Overlay>,
    root: Option<Vertex>,
}

/// A locally finite, connected, loop-free weighted magnetic graph.
///
/// Cheap to clone; immutable after construction.
#[derive(Clone, Debug)]
pub struct Graph {
    inner: Arc<Inner>,
}

impl Graph {
    pub(crate) fn from_family(family: Family) -> Self {
        let root = Some(family.root());
        Graph { inner: Arc::new(Inner { source: Source::Family(family), overlay: None, root }) }
    }

    pub(crate) fn with_overlay(&self, overlay: Overlay) -> Graph {
        let mut inner = (*self.inner).clone();
        inner.overlay = Some(match &self.inner.overlay {
            Some(prev) => prev.compose(overlay),
            None => overlay,
        });
        Graph { inner: Arc::new(inner) }
    }

    /// Same graph with a different distinguished root.
    pub fn with_root(&self, root: Vertex) -> Result<Graph> {
        if !self.contains(root) {
            return Err(Error::UnknownVertex(root));
        }
        let mut inner = (*self.inner).clone();
        inner.root = Some(root);
        Ok(Graph { inner: Arc::new(inner) })
    }

    pub fn root(&self) -> Option<Vertex> {
        self.inner.root
    }

    pub fn family(&self) -> Option<&Family> {
        match &self.inner.source {
            Source::Family(f) => Some(f),
            Source::Explicit(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.inner.source, Source::Explicit(_))
    }

    /// All vertices, in canonical order, for explicit graphs.
    pub fn vertices(&self) -> Option<&[Vertex]> {
        match &self.inner.source {
            Source::Explicit(e) => Some(&e.vertices),
            Source::Family(_) => None,
        }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        match &self.inner.source {
            Source::Explicit(e) => e.index.contains_key(&v),
            Source::Family(f) => f.contains(v),
        }
    }

    /// Calls `visit` once per neighbor `y ∼ x` with `E(x,y) > 0`.
    pub fn visit_neighbors(&self, x: Vertex, visit: &mut dyn FnMut(Edge)) -> Result<()> {
        match (&self.inner.source, &self.inner.overlay) {
            (Source::Explicit(e), overlay) => {
                let &i = e.index.get(&x).ok_or(Error::UnknownVertex(x))?;
                for &(j, w, p) in &e.adjacency[i] {
                    let edge = Edge { target: e.vertices[j], weight: w, phase: p };
                    visit(apply_edge_overlay(overlay.as_ref(), x, edge));
                }
                Ok(())
            }
            (Source::Family(f), overlay) => {
                if !f.contains(x) {
                    return Err(Error::UnknownVertex(x));
                }
                f.visit_neighbors(x, &mut |edge| visit(apply_edge_overlay(overlay.as_ref(), x, edge)));
                Ok(())
            }
        }
    }

    pub fn neighbors(&self, x: Vertex) -> Result<Vec<Edge>> {
        let mut out = Vec::new();
        self.visit_neighbors(x, &mut |e| out.push(e))?;
        Ok(out)
    }

    /// `E(x, y)`, zero when not adjacent.
    pub fn edge_weight(&self, x: Vertex, y: Vertex) -> Result<f64> {
        Ok(self.edge(x, y)?.map_or(0.0, |e| e.weight))
    }

    pub fn edge(&self, x: Vertex, y: Vertex) -> Result<Option<Edge>> {
        let mut found = None;
        self.visit_neighbors(x, &mut |e| {
            if e.target == y {
                found = Some(e);
            }
        })?;
        Ok(found)
    }

    /// The vertex weight `m(x)`.
    pub fn vertex_weight(&self, x: Vertex) -> Result<f64> {
        let base = match &self.inner.source {
            Source::Explicit(e) => e.weights[*e.index.get(&x).ok_or(Error::UnknownVertex(x))?],
            Source::Family(f) => {
                if !f.contains(x) {
                    return Err(Error::UnknownVertex(x));
                }
                f.vertex_weight(x)
            }
        };
        Ok(match &self.inner.overlay {
            Some(o) => o.vertex_weight(x, base),
            None => base,
        })
    }

    /// `Σ_y E(x,y)`.
    pub fn edge_sum(&self, x: Vertex) -> Result<f64> {
        if let (Source::Family(f), None) = (&self.inner.source, &self.inner.overlay) {
            if !f.contains(x) {
                return Err(Error::UnknownVertex(x));
            }
            return Ok(f.edge_sum(x));
        }
        let mut s = 0.0;
        self.visit_neighbors(x, &mut |e| s += e.weight)?;
        Ok(s)
    }

    /// `m ≡ 1` is known from the generator rule (explicit graphs answer `false`).
    pub fn unit_vertex_weights(&self) -> bool {
        let Source::Family(f) = &self.inner.source else { return false };
        let overlay_keeps = self.inner.overlay.as_ref().is_none_or(|o| {
            o.layers().iter().all(|l| l.weight_law == crate::generators::WeightLaw::Identity)
        });
        overlay_keeps && f.unit_vertex_weights()
    }

    /// Number of neighbors `|N_G(x)|`.
    pub fn combinatorial_degree(&self, x: Vertex) -> Result<usize> {
        let mut n = 0;
        self.visit_neighbors(x, &mut |_| n += 1)?;
        Ok(n)
    }

    /// Vertices at unweighted distance `≤ radius` from `center`, with their
    /// distances, in BFS order.
    pub fn ball(&self, center: Vertex, radius: usize) -> Result<Vec<(Vertex, usize)>> {
        if !self.contains(center) {
            return Err(Error::UnknownVertex(center));
        }
        let mut seen: HashMap<Vertex, usize> = HashMap::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        seen.insert(center, 0);
        queue.push_back(center);
        while let Some(x) = queue.pop_front() {
            let dist = seen[&x];
            order.push((x, dist));
            if dist == radius {
                continue;
            }
            self.visit_neighbors(x, &mut |e| {
                if !seen.contains_key(&e.target) {
                    seen.insert(e.target, dist + 1);
                    queue.push_back(e.target);
                }
            })?;
        }
        Ok(order)
    }

    /// Checks the graph axioms: all of them for explicit graphs, and on the
    /// ball of the given radius around the root for generator families.
    pub fn validate(&self, horizon: usize) -> Result<()> {
        let vertices: Vec<Vertex> = match self.vertices() {
            Some(vs) => vs.to_vec(),
            None => {
                let root = self.root().ok_or_else(|| Error::BadParameter("family without root".into()))?;
                self.ball(root, horizon)?.into_iter().map(|(v, _)| v).collect()
            }
        };
        for &x in &vertices {
            let m = self.vertex_weight(x)?;
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::NonpositiveWeight { what: format!("m({x})"), value: m });
            }
            for e in self.neighbors(x)? {
                if e.target == x {
                    return Err(Error::LoopEdge(x));
                }
                if !(e.weight > 0.0) {
                    return Err(Error::NegativeEdgeWeight { x, y: e.target, value: e.weight });
                }
                if e.phase.abs() > std::f64::consts::PI + 1e-12 {
                    return Err(Error::PhaseOutOfRange { x, y: e.target, value: e.phase });
                }
                let back = self.edge(e.target, x)?.ok_or(Error::AsymmetricConflict(x, e.target))?;
                let conj = back.magnetic_weight().conj();
                if (conj - e.magnetic_weight()).norm() > 1e-12 * e.weight.max(1.0) {
                    return Err(Error::AsymmetricConflict(x, e.target));
                }
            }
        }
        if self.is_finite() {
            if let Some(&first) = vertices.first() {
                let reached: BTreeSet<Vertex> = self.ball(first, usize::MAX)?.into_iter().map(|(v, _)| v).collect();
                if let Some(&missing) = vertices.iter().find(|v| !reached.contains(v)) {
                    return Err(Error::Disconnected(missing, first));
                }
            }
        }
        Ok(())
    }

    /// Serializable description; generator families keep their rule.
    pub fn description(&self) -> GraphDescription {
        match &self.inner.source {
            Source::Explicit(e) if self.inner.overlay.is_none() => {
                let mut edges = Vec::new();
                for (i, adj) in e.adjacency.iter().enumerate() {
                    for &(j, w, p) in adj {
                        if i < j {
                            edges.push(EdgeRecord(e.vertices[i], e.vertices[j], w, p));
                        }
                    }
                }
                let vertex_weights = e.vertices.iter().copied().zip(e.weights.iter().copied()).collect();
                GraphDescription::Explicit {
                    vertices: e.vertices.clone(),
                    edges,
                    vertex_weights,
                    root: self.inner.root,
                }
            }
            Source::Explicit(_) => self
                .materialize(self.inner.root.unwrap_or_default(), usize::MAX)
                .map(|g| g.description())
                .expect("explicit graph materializes"),
            Source::Family(f) => GraphDescription::Family {
                family: f.spec(),
                randomize: self.inner.overlay.as_ref().map(|o| o.layers().to_vec()).unwrap_or_default(),
            },
        }
    }

    pub fn from_description(desc: &GraphDescription) -> Result<Graph> {
        match desc {
            GraphDescription::Explicit { vertices, edges, vertex_weights, root } => {
                build_graph_with_vertices(vertices, edges, vertex_weights, *root)
            }
            GraphDescription::Family { family, randomize } => {
                let g = Graph::from_family(Family::from_spec(family)?);
                Ok(randomize.iter().fold(g, |g, spec| crate::generators::randomize(&g, spec)))
            }
        }
    }

    /// Copies the ball of `radius` around `center` into an explicit graph
    /// (edges leaving the ball are dropped).
    pub fn materialize(&self, center: Vertex, radius: usize) -> Result<Graph> {
        let ball = self.ball(center, radius)?;
        let inside: BTreeSet<Vertex> = ball.iter().map(|&(v, _)| v).collect();
        let mut edges = Vec::new();
        let mut weights = BTreeMap::new();
        for &x in &inside {
            weights.insert(x, self.vertex_weight(x)?);
            for e in self.neighbors(x)? {
                if x < e.target && inside.contains(&e.target) {
                    edges.push(EdgeRecord(x, e.target, e.weight, e.phase));
                }
            }
        }
        let verts: Vec<Vertex> = inside.into_iter().collect();
        let root = self.root().filter(|r| verts.binary_search(r).is_ok()).or(Some(center));
        build_graph_with_vertices(&verts, &edges, &weights, root)
    }
}

fn apply_edge_overlay(overlay: Option<&Overlay>, x: Vertex, edge: Edge) -> Edge {
    match overlay {
        Some(o) => o.edge(x, edge),
        None => edge,
    }
}

/// JSON graph description file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphDescription {
    Family {
        #[serde(flatten)]
        family: FamilySpec,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        randomize: Vec<RandomizeSpec>,
    },
    Explicit {
        #[serde(default)]
        vertices: Vec<Vertex>,
        edges: Vec<EdgeRecord>,
        #[serde(default, with = "weight_map")]
        vertex_weights: BTreeMap<Vertex, f64>,
        #[serde(default)]
        root: Option<Vertex>,
    },
}

/// JSON object keys must be strings, so vertex weights are keyed by the
/// vertex's display form ("7" or "1.2.3").
mod weight_map {
    use super::*;

    pub fn serialize<S: Serializer>(m: &BTreeMap<Vertex, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let as_str: BTreeMap<String, f64> = m.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        as_str.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Vertex, f64>, D::Error> {
        let raw = BTreeMap::<String, f64>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| parse_vertex(&k).map(|x| (x, v)).map_err(serde::de::Error::custom))
            .collect()
    }

    fn parse_vertex(s: &str) -> std::result::Result<Vertex, String> {
        let parts: Vec<&str> = s.split('.').collect();
        if parts.is_empty() || parts.len() > 3 {
            return Err(format!("bad vertex key '{s}'"));
        }
        let mut c = [0u64; 3];
        for (slot, p) in c.iter_mut().zip(&parts) {
            *slot = p.trim().parse().map_err(|_| format!("bad vertex key '{s}'"))?;
        }
        Ok(Vertex(c))
    }
}

/// Builds and validates an explicit graph from one-sided edge records.
///
/// Missing vertex weights default to 1. The reverse orientation of every
/// record is materialized with `θ(y,x) = −θ(x,y)`; zero-weight records are
/// dropped.
pub fn build_graph(edges: &[EdgeRecord], vertex_weights: &BTreeMap<Vertex, f64>, root: Option<Vertex>) -> Result<Graph> {
    build_graph_with_vertices(&[], edges, vertex_weights, root)
}

pub fn build_graph_with_vertices(
    vertices: &[Vertex],
    edges: &[EdgeRecord],
    vertex_weights: &BTreeMap<Vertex, f64>,
    root: Option<Vertex>,
) -> Result<Graph> {
    if edges.is_empty() && vertices.len() != 1 {
        return Err(Error::EmptyGraph);
    }
    let mut directed: BTreeMap<(Vertex, Vertex), (f64, f64)> = BTreeMap::new();
    let mut all: BTreeSet<Vertex> = vertices.iter().copied().collect();
    all.extend(vertex_weights.keys().copied());
    for &EdgeRecord(x, y, w, p) in edges {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::NegativeEdgeWeight { x, y, value: w });
        }
        if !(p.abs() <= std::f64::consts::PI) {
            return Err(Error::PhaseOutOfRange { x, y, value: p });
        }
        if w == 0.0 {
            continue;
        }
        if x == y {
            return Err(Error::LoopEdge(x));
        }
        all.insert(x);
        all.insert(y);
        for (a, b, phase) in [(x, y, p), (y, x, -p)] {
            match directed.get(&(a, b)) {
                Some(&(w0, p0)) => {
                    let same_w = (w0 - w).abs() <= 1e-12 * w.max(w0);
                    let same_p = (Complex64::from_polar(1.0, p0) - Complex64::from_polar(1.0, phase)).norm() <= 1e-12;
                    if !(same_w && same_p) {
                        return Err(Error::AsymmetricConflict(x, y));
                    }
                }
                None => {
                    directed.insert((a, b), (w, phase));
                }
            }
        }
    }
    let vertices: Vec<Vertex> = all.into_iter().collect();
    let index: HashMap<Vertex, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut weights = Vec::with_capacity(vertices.len());
    for &v in &vertices {
        let m = vertex_weights.get(&v).copied().unwrap_or(1.0);
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::NonpositiveWeight { what: format!("m({v})"), value: m });
        }
        weights.push(m);
    }
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for (&(a, b), &(w, p)) in &directed {
        adjacency[index[&a]].push((index[&b], w, p));
    }
    if let Some(r) = root {
        if !index.contains_key(&r) {
            return Err(Error::UnknownVertex(r));
        }
    }
    let root = root.or_else(|| vertices.first().copied());
    let g = Graph {
        inner: Arc::new(Inner {
            source: Source::Explicit(ExplicitGraph { vertices, index, adjacency, weights }),
            overlay: None,
            root,
        }),
    };
    g.validate(0)?;
    Ok(g)
}

/// `d_G(x) = (1/m²(x)) Σ_y E(x,y)`.
pub fn weighted_degree(g: &Graph, x: Vertex) -> Result<f64> {
    let m = g.vertex_weight(x)?;
    Ok(g.edge_sum(x)? / (m * m))
}

/// Unweighted-length parity `(−1)^{ℓ(x)}` from a root.
#[derive(Clone, Debug)]
pub struct ParityMap {
    pub root: Vertex,
    parity: HashMap<Vertex, i8>,
    /// `false` when some materialized edge joins two vertices of equal parity.
    pub bipartite: bool,
    pub odd_edge: Option<(Vertex, Vertex)>,
}

impl ParityMap {
    pub fn parity(&self, x: Vertex) -> Option<i8> {
        self.parity.get(&x).copied()
    }

    pub fn len(&self) -> usize {
        self.parity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parity.is_empty()
    }
}

/// BFS parity from `root`. Lazy graphs need a `horizon`; the bipartite flag
/// then refers to edges inside that ball.
pub fn parity_map(g: &Graph, root: Vertex, horizon: Option<usize>) -> Result<ParityMap> {
    let radius = match (g.is_finite(), horizon) {
        (_, Some(h)) => h,
        (true, None) => usize::MAX,
        (false, None) => return Err(Error::NotFinite),
    };
    let ball = g.ball(root, radius)?;
    let parity: HashMap<Vertex, i8> = ball.iter().map(|&(v, d)| (v, if d % 2 == 0 { 1 } else { -1 })).collect();
    let mut odd_edge = None;
    for &(x, _) in &ball {
        if odd_edge.is_some() {
            break;
        }
        g.visit_neighbors(x, &mut |e| {
            if odd_edge.is_none() {
                if let Some(&py) = parity.get(&e.target) {
                    if py == parity[&x] {
                        odd_edge = Some((x, e.target));
                    }
                }
            }
        })?;
    }
    Ok(ParityMap { root, parity, bipartite: odd_edge.is_none(), odd_edge })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(x: u64, y: u64, w: f64, p: f64) -> EdgeRecord {
        EdgeRecord(Vertex::id(x), Vertex::id(y), w, p)
    }

    #[test]
    fn two_vertex_path() {
        let g = build_graph(&[rec(1, 2, 1.0, 0.0)], &BTreeMap::new(), None).unwrap();
        assert_eq!(g.vertices().unwrap().len(), 2);
        assert_eq!(weighted_degree(&g, Vertex::id(1)).unwrap(), 1.0);
    }

    #[test]
    fn star_two_degrees() {
        let g = build_graph(&[rec(1, 2, 1.0, 0.0), rec(1, 3, 1.0, 0.0)], &BTreeMap::new(), None).unwrap();
        assert_eq!(weighted_degree(&g, Vertex::id(1)).unwrap(), 2.0);
        assert_eq!(weighted_degree(&g, Vertex::id(2)).unwrap(), 1.0);
        assert_eq!(weighted_degree(&g, Vertex::id(3)).unwrap(), 1.0);
    }

    #[test]
    fn degree_uses_vertex_weight() {
        let mut m = BTreeMap::new();
        m.insert(Vertex::id(1), 2.0);
        let g = build_graph(&[rec(1, 2, 3.0, 0.0)], &m, None).unwrap();
        assert_eq!(weighted_degree(&g, Vertex::id(1)).unwrap(), 0.75);
        assert!(matches!(weighted_degree(&g, Vertex::id(9)), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn construction_errors() {
        let none = BTreeMap::new();
        assert!(matches!(build_graph(&[rec(1, 1, 1.0, 0.0)], &none, None), Err(Error::LoopEdge(_))));
        assert!(matches!(
            build_graph(&[rec(1, 2, 1.0, 0.3), rec(2, 1, 1.0, 0.3)], &none, None),
            Err(Error::AsymmetricConflict(..))
        ));
        assert!(matches!(
            build_graph(&[rec(1, 2, 1.0, 0.0), rec(3, 4, 1.0, 0.0)], &none, None),
            Err(Error::Disconnected(..))
        ));
        let mut bad = BTreeMap::new();
        bad.insert(Vertex::id(1), 0.0);
        assert!(matches!(build_graph(&[rec(1, 2, 1.0, 0.0)], &bad, None), Err(Error::NonpositiveWeight { .. })));
        assert!(matches!(build_graph(&[], &none, None), Err(Error::EmptyGraph)));
    }

    #[test]
    fn consistent_two_sided_input_is_accepted() {
        let g = build_graph(&[rec(1, 2, 2.0, 0.5), rec(2, 1, 2.0, -0.5)], &BTreeMap::new(), None).unwrap();
        let e = g.edge(Vertex::id(2), Vertex::id(1)).unwrap().unwrap();
        assert_eq!(e.phase, -0.5);
        g.validate(0).unwrap();
    }

    #[test]
    fn parity_of_small_graphs() {
        let none = BTreeMap::new();
        let path = build_graph(&[rec(0, 1, 1.0, 0.0), rec(1, 2, 1.0, 0.0)], &none, None).unwrap();
        let p = parity_map(&path, Vertex::id(0), None).unwrap();
        assert_eq!(
            [0, 1, 2].map(|i| p.parity(Vertex::id(i)).unwrap()),
            [1, -1, 1]
        );
        assert!(p.bipartite);
        let tri = build_graph(&[rec(0, 1, 1.0, 0.0), rec(1, 2, 1.0, 0.0), rec(2, 0, 1.0, 0.0)], &none, None).unwrap();
        assert!(!parity_map(&tri, Vertex::id(0), None).unwrap().bipartite);
        let star = build_graph(&[rec(1, 2, 1.0, 0.0), rec(1, 3, 1.0, 0.0), rec(1, 4, 1.0, 0.0)], &none, None).unwrap();
        let p = parity_map(&star, Vertex::id(1), None).unwrap();
        assert_eq!(p.parity(Vertex::id(1)), Some(1));
        assert!((2..=4).all(|i| p.parity(Vertex::id(i)) == Some(-1)));
    }

    #[test]
    fn description_round_trip() {
        let mut m = BTreeMap::new();
        m.insert(Vertex::id(2), 1.5);
        let g = build_graph(&[rec(1, 2, 2.0, 0.25), rec(2, 3, 1.0, -1.0)], &m, Some(Vertex::id(2))).unwrap();
        let json = serde_json::to_string(&g.description()).unwrap();
        let back: GraphDescription = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g.description());
        let g2 = Graph::from_description(&back).unwrap();
        assert_eq!(g2.root(), Some(Vertex::id(2)));
        assert_eq!(g2.vertex_weight(Vertex::id(2)).unwrap(), 1.5);
    }

    #[test]
    fn vertex_json_forms() {
        let v: Vertex = serde_json::from_str("7").unwrap();
        assert_eq!(v, Vertex::id(7));
        let v: Vertex = serde_json::from_str("[3, 1, 2]").unwrap();
        assert_eq!(v, Vertex::new(3, 1, 2));
        assert_eq!(serde_json::to_string(&Vertex::new(3, 1, 2)).unwrap(), "[3,1,2]");
    }
}
