//! Graph families: half-lines, offspring trees, the chained trees and the
//! bipartite chain, plus small explicit graphs and phase/weight
//! randomization.
//!
//! Vertex coordinates per family:
//!
//! | family            | vertex              | root        |
//! |-------------------|---------------------|-------------|
//! | `path`            | `[x, 0, 0]`         | `0`         |
//! | `offspring`       | `[depth, index, 0]` | `0`         |
//! | `chained-ary`     | `[n, depth, index]`, `T_1 = [1, x, 0]` | `[1,0,0]` |
//! | `star-chain`      | `[n, j, 0]`, `j = 0` the center | `[1,0,0]` |
//! | `bipartite-chain` | `[n, k, side]`, `1 ≤ k ≤ n`, side 1 or 2 | `[1,1,1]` |

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, Edge, EdgeRecord, Graph, Vertex};

/// Offspring counts `b_n`: an explicit prefix followed by `slope·n + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffspringSequence {
    #[serde(default)]
    pub prefix: Vec<u64>,
    #[serde(default)]
    pub slope: u64,
    #[serde(default)]
    pub intercept: u64,
}

impl OffspringSequence {
    pub fn constant(b: u64) -> Self {
        OffspringSequence { prefix: vec![], slope: 0, intercept: b }
    }

    /// `b_n = slope·n + intercept`.
    pub fn linear(slope: u64, intercept: u64) -> Self {
        OffspringSequence { prefix: vec![], slope, intercept }
    }

    /// The given list, with the last entry repeated forever.
    pub fn from_list(list: &[u64]) -> Self {
        OffspringSequence { prefix: list.to_vec(), slope: 0, intercept: list.last().copied().unwrap_or(0) }
    }

    pub fn b(&self, n: usize) -> u64 {
        match self.prefix.get(n) {
            Some(&b) => b,
            None => self.slope * n as u64 + self.intercept,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.prefix.iter().position(|&b| b == 0) {
            return Err(Error::InvalidOffspring { index: i });
        }
        if self.slope == 0 && self.intercept == 0 {
            return Err(Error::InvalidOffspring { index: self.prefix.len() });
        }
        if self.intercept == 0 && self.prefix.is_empty() {
            return Err(Error::InvalidOffspring { index: 0 });
        }
        Ok(())
    }
}

/// Weighted half-line on ℕ: `E(x,x+1) = edge_scale·edge_ratio^x` and
/// `m²(x) = mass_sq_scale·mass_sq_ratio^x`, with optional explicit prefixes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    #[serde(default = "one")]
    pub edge_scale: f64,
    #[serde(default = "one")]
    pub edge_ratio: f64,
    #[serde(default = "one")]
    pub mass_sq_scale: f64,
    #[serde(default = "one")]
    pub mass_sq_ratio: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edge_prefix: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mass_sq_prefix: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

impl Default for PathParams {
    fn default() -> Self {
        PathParams {
            edge_scale: 1.0,
            edge_ratio: 1.0,
            mass_sq_scale: 1.0,
            mass_sq_ratio: 1.0,
            edge_prefix: vec![],
            mass_sq_prefix: vec![],
        }
    }
}

impl PathParams {
    pub fn edge(&self, x: u64) -> f64 {
        match self.edge_prefix.get(x as usize) {
            Some(&e) => e,
            None => self.edge_scale * self.edge_ratio.powf(x as f64),
        }
    }

    pub fn mass_sq(&self, x: u64) -> f64 {
        match self.mass_sq_prefix.get(x as usize) {
            Some(&m) => m,
            None => self.mass_sq_scale * self.mass_sq_ratio.powf(x as f64),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        for (what, v) in [
            ("edge_scale", self.edge_scale),
            ("edge_ratio", self.edge_ratio),
            ("mass_sq_scale", self.mass_sq_scale),
            ("mass_sq_ratio", self.mass_sq_ratio),
        ] {
            if !positive(v) {
                return Err(Error::NonpositiveWeight { what: what.into(), value: v });
            }
        }
        for &v in self.edge_prefix.iter().chain(&self.mass_sq_prefix) {
            if !positive(v) {
                return Err(Error::NonpositiveWeight { what: "path prefix".into(), value: v });
            }
        }
        Ok(())
    }
}

/// Serializable family rule, `{"family": name, "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum FamilySpec {
    Path(PathParams),
    Offspring(OffspringSequence),
    ChainedAry,
    StarChain,
    BipartiteChain,
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Path(_) => "path",
            FamilySpec::Offspring(_) => "offspring",
            FamilySpec::ChainedAry => "chained-ary",
            FamilySpec::StarChain => "star-chain",
            FamilySpec::BipartiteChain => "bipartite-chain",
        }
    }

    /// Family with default parameters from its CLI name.
    pub fn by_name(name: &str) -> Option<FamilySpec> {
        Some(match name {
            "path" => FamilySpec::Path(PathParams::default()),
            "offspring" => FamilySpec::Offspring(OffspringSequence::constant(2)),
            "chained-ary" => FamilySpec::ChainedAry,
            "star-chain" => FamilySpec::StarChain,
            "bipartite-chain" => FamilySpec::BipartiteChain,
            _ => return None,
        })
    }
}

pub const FAMILY_NAMES: [&str; 5] = ["path", "offspring", "chained-ary", "star-chain", "bipartite-chain"];

/// Levels beyond this are treated as absent (only reachable for `b ≡ 1`).
const MAX_LEVEL: usize = 1 << 16;

/// A validated family rule with cached sphere sizes.
#[derive(Clone, Debug)]
pub struct Family {
    spec: FamilySpec,
    spheres: Vec<u64>,
}

impl Family {
    pub fn from_spec(spec: &FamilySpec) -> Result<Family> {
        let mut spheres = Vec::new();
        match spec {
            FamilySpec::Path(p) => p.validate()?,
            FamilySpec::Offspring(b) => {
                b.validate()?;
                let mut size = 1u64;
                for n in 0..MAX_LEVEL {
                    spheres.push(size);
                    match size.checked_mul(b.b(n)) {
                        Some(next) => size = next,
                        None => break,
                    }
                }
            }
            _ => {}
        }
        Ok(Family { spec: spec.clone(), spheres })
    }

    pub fn spec(&self) -> FamilySpec {
        self.spec.clone()
    }

    pub fn root(&self) -> Vertex {
        match self.spec {
            FamilySpec::Path(_) | FamilySpec::Offspring(_) => Vertex::id(0),
            FamilySpec::ChainedAry | FamilySpec::StarChain => Vertex::new(1, 0, 0),
            FamilySpec::BipartiteChain => Vertex::new(1, 1, 1),
        }
    }

    /// `|S_n|` for offspring trees.
    pub fn sphere_size(&self, n: usize) -> Result<u64> {
        match &self.spec {
            FamilySpec::Offspring(_) => self.spheres.get(n).copied().ok_or(Error::Overflow(n)),
            _ => Err(Error::BadParameter("sphere sizes exist only for offspring trees".into())),
        }
    }

    pub fn offspring(&self) -> Option<&OffspringSequence> {
        match &self.spec {
            FamilySpec::Offspring(b) => Some(b),
            _ => None,
        }
    }

    /// Chain-block index of a vertex (chained families only).
    pub fn block_of(&self, v: Vertex) -> Option<u64> {
        match self.spec {
            FamilySpec::ChainedAry | FamilySpec::StarChain | FamilySpec::BipartiteChain => Some(v.0[0]),
            _ => None,
        }
    }

    /// Vertices of a finite chain block; `None` for the infinite `T_n` blocks.
    pub fn block_members(&self, n: u64) -> Option<Vec<Vertex>> {
        match self.spec {
            FamilySpec::StarChain if n >= 1 => Some((0..=n).map(|j| Vertex::new(n, j, 0)).collect()),
            FamilySpec::BipartiteChain if n >= 1 => {
                Some((1..=n).flat_map(|k| [Vertex::new(n, k, 1), Vertex::new(n, k, 2)]).collect())
            }
            _ => None,
        }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        let [a, b, c] = v.0;
        match &self.spec {
            FamilySpec::Path(_) => b == 0 && c == 0,
            FamilySpec::Offspring(_) => c == 0 && self.spheres.get(a as usize).is_some_and(|&s| b < s),
            FamilySpec::ChainedAry => match a {
                0 => false,
                1 => c == 0,
                n => chained_level_size(n, b).is_some_and(|s| c < s),
            },
            FamilySpec::StarChain => a >= 1 && b <= a && c == 0,
            FamilySpec::BipartiteChain => a >= 1 && (1..=a).contains(&b) && (c == 1 || c == 2),
        }
    }

    pub fn vertex_weight(&self, v: Vertex) -> f64 {
        match &self.spec {
            FamilySpec::Path(p) => p.mass_sq(v.0[0]).sqrt(),
            _ => 1.0,
        }
    }

    /// Father of a tree vertex; `None` at the root or for non-tree families.
    pub fn father(&self, v: Vertex) -> Option<Vertex> {
        let [a, b, c] = v.0;
        match &self.spec {
            FamilySpec::Path(_) => (a > 0).then(|| Vertex::id(a - 1)),
            FamilySpec::Offspring(seq) => (a > 0).then(|| Vertex::new(a - 1, b / seq.b(a as usize - 1), 0)),
            FamilySpec::ChainedAry => match (a, b) {
                (1, 0) => None,
                (1, x) => Some(Vertex::new(1, x - 1, 0)),
                (n, 0) => Some(Vertex::new(n - 1, 0, 0)),
                (n, 1) => Some(Vertex::new(n, 0, 0)),
                (n, depth) => Some(Vertex::new(n, depth - 1, c / n)),
            },
            FamilySpec::StarChain => match b {
                0 if a == 1 => None,
                0 => Some(Vertex::new(a - 1, 0, 0)),
                _ => Some(Vertex::new(a, 0, 0)),
            },
            FamilySpec::BipartiteChain => None,
        }
    }

    pub fn is_tree(&self) -> bool {
        !matches!(self.spec, FamilySpec::BipartiteChain)
    }

    /// `Σ_y E(v, y)` without enumerating neighbors where the rule allows it.
    pub(crate) fn edge_sum(&self, v: Vertex) -> f64 {
        let [a, _, _] = v.0;
        match &self.spec {
            FamilySpec::Path(p) => p.edge(a) + if a > 0 { p.edge(a - 1) } else { 0.0 },
            FamilySpec::Offspring(seq) => {
                let up = if a > 0 { 1 } else { 0 };
                let down = if (a as usize + 1) < self.spheres.len() { seq.b(a as usize) } else { 0 };
                (up + down) as f64
            }
            FamilySpec::ChainedAry => {
                let [_, b, _] = v.0;
                match (a, b) {
                    (1, _) => 2.0,
                    (n, 0) => (n + 1) as f64,
                    (n, depth) => (1 + if chained_level_size(n, depth + 1).is_some() { n } else { 0 }) as f64,
                }
            }
            FamilySpec::StarChain => {
                let [_, b, _] = v.0;
                if b == 0 {
                    (a + 1 + u64::from(a > 1)) as f64
                } else {
                    1.0
                }
            }
            FamilySpec::BipartiteChain => {
                let [_, b, c] = v.0;
                let link = (b == 1 && c == 2) || (b == 1 && c == 1 && a > 1);
                (a + u64::from(link)) as f64
            }
        }
    }

    /// Every vertex has `m = 1`.
    pub(crate) fn unit_vertex_weights(&self) -> bool {
        match &self.spec {
            FamilySpec::Path(p) => p.mass_sq_prefix.is_empty() && p.mass_sq_scale == 1.0 && p.mass_sq_ratio == 1.0,
            _ => true,
        }
    }

    pub(crate) fn visit_neighbors(&self, v: Vertex, visit: &mut dyn FnMut(Edge)) {
        let unit = |target| Edge { target, weight: 1.0, phase: 0.0 };
        let [a, b, c] = v.0;
        match &self.spec {
            FamilySpec::Path(p) => {
                if a > 0 {
                    visit(Edge { target: Vertex::id(a - 1), weight: p.edge(a - 1), phase: 0.0 });
                }
                visit(Edge { target: Vertex::id(a + 1), weight: p.edge(a), phase: 0.0 });
            }
            FamilySpec::Offspring(seq) => {
                if a > 0 {
                    visit(unit(Vertex::new(a - 1, b / seq.b(a as usize - 1), 0)));
                }
                if (a as usize + 1) < self.spheres.len() {
                    let k = seq.b(a as usize);
                    for j in 0..k {
                        visit(unit(Vertex::new(a + 1, b * k + j, 0)));
                    }
                }
            }
            FamilySpec::ChainedAry => {
                if a == 1 {
                    if b > 0 {
                        visit(unit(Vertex::new(1, b - 1, 0)));
                    }
                    visit(unit(Vertex::new(1, b + 1, 0)));
                    if b == 0 {
                        visit(unit(Vertex::new(2, 0, 0)));
                    }
                    return;
                }
                let n = a;
                if b == 0 {
                    visit(unit(Vertex::new(n - 1, 0, 0)));
                    visit(unit(Vertex::new(n + 1, 0, 0)));
                    for j in 0..n - 1 {
                        visit(unit(Vertex::new(n, 1, j)));
                    }
                } else {
                    let up = if b == 1 { Vertex::new(n, 0, 0) } else { Vertex::new(n, b - 1, c / n) };
                    visit(unit(up));
                    if chained_level_size(n, b + 1).is_some() {
                        for j in 0..n {
                            visit(unit(Vertex::new(n, b + 1, c * n + j)));
                        }
                    }
                }
            }
            FamilySpec::StarChain => {
                if b == 0 {
                    if a > 1 {
                        visit(unit(Vertex::new(a - 1, 0, 0)));
                    }
                    visit(unit(Vertex::new(a + 1, 0, 0)));
                    for j in 1..=a {
                        visit(unit(Vertex::new(a, j, 0)));
                    }
                } else {
                    visit(unit(Vertex::new(a, 0, 0)));
                }
            }
            FamilySpec::BipartiteChain => {
                let other = 3 - c;
                for k in 1..=a {
                    visit(unit(Vertex::new(a, k, other)));
                }
                if b == 1 && c == 2 {
                    visit(unit(Vertex::new(a + 1, 1, 1)));
                }
                if b == 1 && c == 1 && a > 1 {
                    visit(unit(Vertex::new(a - 1, 1, 2)));
                }
            }
        }
    }
}

/// Size of level `depth` of the block `T_n` (`n ≥ 2`), `None` on overflow.
fn chained_level_size(n: u64, depth: u64) -> Option<u64> {
    if depth == 0 {
        return Some(1);
    }
    let mut size = n - 1;
    for _ in 1..depth {
        size = size.checked_mul(n)?;
    }
    Some(size)
}

/// Half-line ℕ with the given weights.
pub fn path_graph(params: PathParams) -> Result<Graph> {
    Ok(Graph::from_family(Family::from_spec(&FamilySpec::Path(params))?))
}

/// Rooted tree where every vertex of `S_n` has `b_n` sons.
pub fn offspring_tree(b: OffspringSequence) -> Result<Graph> {
    Ok(Graph::from_family(Family::from_spec(&FamilySpec::Offspring(b))?))
}

/// Half-line `T_1` followed by the trees `T_n` (`b_0 = n−1`, `b_k = n`),
/// roots chained by unit edges.
pub fn chained_ary_tree() -> Graph {
    Graph::from_family(Family::from_spec(&FamilySpec::ChainedAry).expect("valid family"))
}

/// Stars `S_n` (`n = 1, 2, …`) with centers chained by unit edges.
pub fn star_chain() -> Graph {
    Graph::from_family(Family::from_spec(&FamilySpec::StarChain).expect("valid family"))
}

/// Blocks `K_{n,n}` with `(1,2)` of block `n` joined to `(1,1)` of block `n+1`.
pub fn bipartite_chain() -> Graph {
    Graph::from_family(Family::from_spec(&FamilySpec::BipartiteChain).expect("valid family"))
}

pub fn family_graph(spec: &FamilySpec) -> Result<Graph> {
    Ok(Graph::from_family(Family::from_spec(spec)?))
}

/// Isolated star: center `0`, leaves `1..=n`.
pub fn star(n: u64) -> Result<Graph> {
    let edges: Vec<_> = (1..=n).map(|j| EdgeRecord(Vertex::id(0), Vertex::id(j), 1.0, 0.0)).collect();
    build_graph(&edges, &BTreeMap::new(), Some(Vertex::id(0)))
}

/// Isolated `K_{n,n}`; side one is `1..=n`, side two is `n+1..=2n`.
pub fn complete_bipartite(n: u64) -> Result<Graph> {
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in n + 1..=2 * n {
            edges.push(EdgeRecord(Vertex::id(i), Vertex::id(j), 1.0, 0.0));
        }
    }
    build_graph(&edges, &BTreeMap::new(), Some(Vertex::id(1)))
}

/// Finite path `0 - 1 - … - (n−1)`.
pub fn finite_path(n: u64) -> Result<Graph> {
    let edges: Vec<_> = (1..n).map(|x| EdgeRecord(Vertex::id(x - 1), Vertex::id(x), 1.0, 0.0)).collect();
    build_graph(&edges, &BTreeMap::new(), Some(Vertex::id(0)))
}

/// Random recursive tree on `0..n`: vertex `i` attaches to a uniform `j < i`.
pub fn random_tree(n: u64, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<_> = (1..n)
        .map(|i| EdgeRecord(Vertex::id(rng.random_range(0..i)), Vertex::id(i), 1.0, 0.0))
        .collect();
    build_graph(&edges, &BTreeMap::new(), Some(Vertex::id(0)))
}

/// Positive rescaling law for `E` and `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum WeightLaw {
    #[default]
    Identity,
    /// Multiply by `exp(u)`, `u` uniform in `[−spread, spread]`.
    LogUniform { spread: f64 },
}

/// Phase and weight randomization rule; deterministic in the seeds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomizeSpec {
    /// Draw fresh phases when set; keep the existing ones otherwise.
    #[serde(default)]
    pub phase_seed: Option<u64>,
    #[serde(default)]
    pub weight_law: WeightLaw,
    #[serde(default)]
    pub weight_seed: u64,
}

impl RandomizeSpec {
    pub fn phases(seed: u64) -> Self {
        RandomizeSpec { phase_seed: Some(seed), weight_law: WeightLaw::Identity, weight_seed: 0 }
    }

    pub fn weights(law: WeightLaw, seed: u64) -> Self {
        RandomizeSpec { phase_seed: None, weight_law: law, weight_seed: seed }
    }
}

/// Stack of randomization layers evaluated lazily per edge and vertex.
#[derive(Clone, Debug)]
pub(crate) struct Overlay {
    layers: Vec<RandomizeSpec>,
}

impl Overlay {
    pub(crate) fn compose(&self, next: Overlay) -> Overlay {
        let mut layers = self.layers.clone();
        layers.extend(next.layers);
        Overlay { layers }
    }

    pub(crate) fn layers(&self) -> &[RandomizeSpec] {
        &self.layers
    }

    pub(crate) fn edge(&self, x: Vertex, mut e: Edge) -> Edge {
        let (lo, hi) = if x < e.target { (x, e.target) } else { (e.target, x) };
        for layer in &self.layers {
            if let Some(seed) = layer.phase_seed {
                let u = unit_hash(seed, 0x7068, lo, hi);
                let theta = -PI + 2.0 * PI * u;
                e.phase = if x < e.target { theta } else { -theta };
            }
            if let WeightLaw::LogUniform { spread } = layer.weight_law {
                let u = unit_hash(layer.weight_seed, 0x6564, lo, hi);
                e.weight *= (spread * (2.0 * u - 1.0)).exp();
            }
        }
        e
    }

    pub(crate) fn vertex_weight(&self, x: Vertex, mut m: f64) -> f64 {
        for layer in &self.layers {
            if let WeightLaw::LogUniform { spread } = layer.weight_law {
                let u = unit_hash(layer.weight_seed, 0x7678, x, x);
                m *= (spread * (2.0 * u - 1.0)).exp();
            }
        }
        m
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform value in `[0, 1)` keyed by seed, a stream tag and a vertex pair.
fn unit_hash(seed: u64, tag: u64, a: Vertex, b: Vertex) -> f64 {
    let mut h = splitmix64(seed ^ tag.rotate_left(48));
    for w in a.0.iter().chain(&b.0) {
        h = splitmix64(h ^ w);
    }
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Same skeleton with phases and/or weights redrawn.
pub fn randomize(g: &Graph, spec: &RandomizeSpec) -> Graph {
    g.with_overlay(Overlay { layers: vec![*spec] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::weighted_degree;

    fn ball_len(g: &Graph, r: usize) -> usize {
        g.ball(g.root().unwrap(), r).unwrap().len()
    }

    #[test]
    fn closed_form_edge_sums() {
        for name in FAMILY_NAMES {
            let f = Family::from_spec(&FamilySpec::by_name(name).unwrap()).unwrap();
            let g = Graph::from_family(f.clone());
            for (v, _) in g.ball(g.root().unwrap(), 12).unwrap() {
                let mut s = 0.0;
                f.visit_neighbors(v, &mut |e| s += e.weight);
                assert_eq!(f.edge_sum(v), s, "{name} {v}");
            }
        }
    }

    #[test]
    fn path_ball_degrees() {
        let g = path_graph(PathParams::default()).unwrap();
        let degs: Vec<f64> = (0..3).map(|x| weighted_degree(&g, Vertex::id(x)).unwrap()).collect();
        assert_eq!(degs, vec![1.0, 2.0, 2.0]);
        assert_eq!(ball_len(&g, 2), 3);
    }

    #[test]
    fn offspring_sphere_sizes() {
        let g = offspring_tree(OffspringSequence::constant(2)).unwrap();
        let f = g.family().unwrap();
        for n in 0..10 {
            assert_eq!(f.sphere_size(n).unwrap(), 1 << n);
        }
        let g = offspring_tree(OffspringSequence::from_list(&[2, 3])).unwrap();
        let f = g.family().unwrap();
        assert_eq!((f.sphere_size(1).unwrap(), f.sphere_size(2).unwrap()), (2, 6));
        let g = offspring_tree(OffspringSequence::linear(1, 2)).unwrap();
        for n in 1..6u64 {
            let x = Vertex::new(n, 0, 0);
            assert_eq!(g.combinatorial_degree(x).unwrap() as u64, n + 3);
        }
        assert!(matches!(
            offspring_tree(OffspringSequence::from_list(&[2, 0, 1])),
            Err(Error::InvalidOffspring { index: 1 })
        ));
    }

    #[test]
    fn offspring_fathers_are_consistent() {
        let g = offspring_tree(OffspringSequence::linear(1, 2)).unwrap();
        let fam = g.family().unwrap();
        for (v, d) in g.ball(Vertex::id(0), 4).unwrap() {
            for e in g.neighbors(v).unwrap() {
                if fam.father(e.target) == Some(v) {
                    assert_eq!(e.target.0[0] as usize, d + 1);
                }
            }
            if let Some(f) = fam.father(v) {
                assert!(g.edge(v, f).unwrap().is_some());
            }
        }
    }

    #[test]
    fn chained_ary_structure() {
        let g = chained_ary_tree();
        let e2 = Vertex::new(2, 0, 0);
        let fam = g.family().unwrap();
        let sons = g.neighbors(e2).unwrap().into_iter().filter(|e| fam.father(e.target) == Some(e2)).count();
        // ε_3 hangs off ε_2 in the father relation, so exclude it
        assert_eq!(sons - 1, 1);
        g.validate(7).unwrap();
        for (x, _) in g.ball(Vertex::new(1, 0, 0), 8).unwrap() {
            if let Some(f) = fam.father(x) {
                assert!(g.edge(x, f).unwrap().is_some(), "{x} -> {f}");
            }
        }
    }

    #[test]
    fn star_chain_structure() {
        let g = star_chain();
        g.validate(12).unwrap();
        for n in 2..10u64 {
            assert_eq!(weighted_degree(&g, Vertex::new(n, 0, 0)).unwrap(), (n + 2) as f64);
        }
        assert_eq!(weighted_degree(&g, Vertex::new(1, 0, 0)).unwrap(), 2.0);
    }

    #[test]
    fn bipartite_chain_structure() {
        let g = bipartite_chain();
        g.validate(10).unwrap();
        let d = |v| weighted_degree(&g, v).unwrap();
        assert_eq!(d(Vertex::new(2, 2, 1)), 2.0);
        assert_eq!(d(Vertex::new(2, 1, 1)), 3.0);
        assert_eq!(d(Vertex::new(2, 1, 2)), 3.0);
        assert_eq!(d(Vertex::new(1, 1, 1)), 1.0);
    }

    #[test]
    fn randomize_is_deterministic() {
        let g = offspring_tree(OffspringSequence::constant(2)).unwrap();
        let spec = RandomizeSpec { phase_seed: Some(7), weight_law: WeightLaw::LogUniform { spread: 0.5 }, weight_seed: 3 };
        let a = randomize(&g, &spec);
        let b = randomize(&g, &spec);
        let x = Vertex::new(2, 1, 0);
        assert_eq!(a.neighbors(x).unwrap(), b.neighbors(x).unwrap());
        a.validate(5).unwrap();
        let id = randomize(&g, &RandomizeSpec::weights(WeightLaw::Identity, 9));
        assert_eq!(id.neighbors(x).unwrap(), g.neighbors(x).unwrap());
        assert_eq!(id.vertex_weight(x).unwrap(), 1.0);
    }

    #[test]
    fn family_spec_json() {
        for name in FAMILY_NAMES {
            let spec = FamilySpec::by_name(name).unwrap();
            let json = serde_json::to_string(&spec).unwrap();
            let back: FamilySpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, spec);
            let g = family_graph(&spec).unwrap();
            let back = Graph::from_description(&serde_json::from_str(&serde_json::to_string(&g.description()).unwrap()).unwrap()).unwrap();
            assert_eq!(back.family().unwrap().spec(), spec);
        }
        let spec: FamilySpec = serde_json::from_str(r#"{"family":"path","params":{"edge_ratio":3.0}}"#).unwrap();
        assert_eq!(spec, FamilySpec::Path(PathParams { edge_ratio: 3.0, ..PathParams::default() }));
    }

    #[test]
    fn small_explicit_graphs() {
        assert_eq!(star(3).unwrap().vertices().unwrap().len(), 4);
        let k = complete_bipartite(3).unwrap();
        assert!(k.vertices().unwrap().iter().all(|&v| weighted_degree(&k, v).unwrap() == 3.0));
        let t = random_tree(30, 5).unwrap();
        match t.description() {
            crate::graph::GraphDescription::Explicit { edges, .. } => assert_eq!(edges.len(), 29),
            _ => panic!("explicit graph expected"),
        }
    }
}
