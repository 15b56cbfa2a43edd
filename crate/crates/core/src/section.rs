//! Finite Dirichlet windows of a graph.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

/// An ambient edge seen from a member: `local` is the target's position in
/// the section, or `None` when the target lies outside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    pub target: Vertex,
    pub local: Option<usize>,
    pub weight: f64,
    pub phase: f64,
}

/// Finite vertex window with ambient degrees and the inner boundary `∂W`.
#[derive(Clone, Debug)]
pub struct FiniteSection {
    pub graph: Graph,
    pub center: Option<Vertex>,
    /// Sorted in the canonical vertex order.
    pub members: Vec<Vertex>,
    pub index_of: HashMap<Vertex, usize>,
    /// Members with an ambient neighbor outside the section, sorted.
    pub inner_boundary: Vec<Vertex>,
    /// `d_G(x)` in the full graph.
    pub ambient_degree: Vec<f64>,
    /// `m(x)`.
    pub mass: Vec<f64>,
    pub links: Vec<Vec<Link>>,
    /// Unweighted distance from `center` (BFS in the ambient graph) when built
    /// as a ball; otherwise zero.
    pub distance: Vec<usize>,
    on_boundary: Vec<bool>,
}

impl FiniteSection {
    /// Section on an arbitrary finite vertex set.
    pub fn from_members(g: &Graph, members: &[Vertex], center: Option<Vertex>) -> Result<FiniteSection> {
        let set: BTreeSet<Vertex> = members.iter().copied().collect();
        Self::build(g, set.into_iter().collect(), center, None)
    }

    fn build(
        g: &Graph,
        members: Vec<Vertex>,
        center: Option<Vertex>,
        distances: Option<&HashMap<Vertex, usize>>,
    ) -> Result<FiniteSection> {
        let index_of: HashMap<Vertex, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = members.len();
        let mut links = Vec::with_capacity(n);
        let mut ambient_degree = Vec::with_capacity(n);
        let mut mass = Vec::with_capacity(n);
        let mut on_boundary = vec![false; n];
        for (i, &x) in members.iter().enumerate() {
            let m = g.vertex_weight(x)?;
            let mut row = Vec::new();
            let mut sum = 0.0;
            g.visit_neighbors(x, &mut |e| {
                let local = index_of.get(&e.target).copied();
                if local.is_none() {
                    on_boundary[i] = true;
                }
                sum += e.weight;
                row.push(Link { target: e.target, local, weight: e.weight, phase: e.phase });
            })?;
            links.push(row);
            ambient_degree.push(sum / (m * m));
            mass.push(m);
        }
        let inner_boundary = members.iter().zip(&on_boundary).filter(|(_, &b)| b).map(|(&v, _)| v).collect();
        let distance = match distances {
            Some(d) => members.iter().map(|v| d[v]).collect(),
            None => vec![0; n],
        };
        Ok(FiniteSection {
            graph: g.clone(),
            center,
            members,
            index_of,
            inner_boundary,
            ambient_degree,
            mass,
            links,
            distance,
            on_boundary,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.on_boundary[i]
    }

    /// Positions of members with no ambient neighbor outside the section.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.on_boundary[i]).collect()
    }

    pub fn index(&self, v: Vertex) -> Result<usize> {
        self.index_of.get(&v).copied().ok_or(Error::UnknownVertex(v))
    }
}

/// All vertices within unweighted distance `radius` of `center`.
pub fn ball_section(g: &Graph, center: Vertex, radius: usize) -> Result<FiniteSection> {
    let ball = g.ball(center, radius)?;
    let dist: HashMap<Vertex, usize> = ball.iter().copied().collect();
    let mut members: Vec<Vertex> = ball.into_iter().map(|(v, _)| v).collect();
    members.sort_unstable();
    FiniteSection::build(g, members, Some(center), Some(&dist))
}

/// The ball, enlarged to contain every finite chain block it meets (star and
/// bipartite chains). Infinite blocks and other families are left as the ball.
pub fn block_section(g: &Graph, center: Vertex, radius: usize) -> Result<FiniteSection> {
    let ball = g.ball(center, radius)?;
    let mut set: BTreeSet<Vertex> = ball.iter().map(|&(v, _)| v).collect();
    if let Some(fam) = g.family() {
        let blocks: BTreeSet<u64> = set.iter().filter_map(|&v| fam.block_of(v)).collect();
        for b in blocks {
            if let Some(vs) = fam.block_members(b) {
                set.extend(vs);
            }
        }
    }
    FiniteSection::from_members(g, &set.into_iter().collect::<Vec<_>>(), Some(center))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{offspring_tree, path_graph, star, star_chain, OffspringSequence, PathParams};

    #[test]
    fn path_ball() {
        let g = path_graph(PathParams::default()).unwrap();
        let s = ball_section(&g, Vertex::id(0), 2).unwrap();
        assert_eq!(s.members, vec![Vertex::id(0), Vertex::id(1), Vertex::id(2)]);
        assert_eq!(s.inner_boundary, vec![Vertex::id(2)]);
        assert_eq!(s.distance, vec![0, 1, 2]);
    }

    #[test]
    fn whole_star() {
        let g = star(2).unwrap();
        let s = ball_section(&g, Vertex::id(0), 1).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.inner_boundary.is_empty());
    }

    #[test]
    fn binary_tree_ball() {
        let g = offspring_tree(OffspringSequence::constant(2)).unwrap();
        let s = ball_section(&g, Vertex::id(0), 2).unwrap();
        assert_eq!(s.len(), 7);
        assert_eq!(s.inner_boundary.len(), 4);
        for v in &s.inner_boundary {
            assert_eq!(v.0[0], 2);
            assert_eq!(s.ambient_degree[s.index(*v).unwrap()], 3.0);
        }
    }

    #[test]
    fn block_section_takes_whole_stars() {
        let g = star_chain();
        let s = block_section(&g, Vertex::new(5, 0, 0), 1).unwrap();
        // stars 4, 5, 6 entirely
        assert_eq!(s.len(), 5 + 6 + 7);
        let ball = ball_section(&g, Vertex::new(5, 0, 0), 1).unwrap();
        assert_eq!(ball.len(), 1 + 5 + 2);
    }
}
