//! Intersection graphs of regions and maximal independent sets.

use thiserror::Error;

use crate::regions::Region;
use crate::stateset::StateSet;

/// Largest graph accepted by [`mis_exact_all`].
pub const EXACT_MIS_CAP: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("forced vertex set is not independent")]
    ForcedNotIndependent,
    #[error("graph has {vertices} vertices, exact enumeration is capped at {cap}")]
    TooLarge { vertices: usize, cap: usize },
}

/// Undirected graph over vertices `0..n`, stored as adjacency bit sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionGraph {
    adj: Vec<StateSet>,
}

impl IntersectionGraph {
    /// One vertex per region, with an edge whenever two regions share a state.
    pub fn from_regions(regions: &[Region]) -> IntersectionGraph {
        let n = regions.len();
        let mut g = IntersectionGraph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if regions[i].intersects(&regions[j]) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    pub fn empty(n: usize) -> IntersectionGraph {
        IntersectionGraph {
            adj: vec![StateSet::empty(n); n],
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v, "no self-edges");
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn neighbors(&self, v: usize) -> &StateSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &u)| set[i + 1..].iter().all(|&v| u != v && !self.adjacent(u, v)))
    }

    /// Independent and no vertex of `within` can be added.
    pub fn is_maximal_independent_within(&self, set: &[usize], within: &[usize]) -> bool {
        self.is_independent(set)
            && within
                .iter()
                .all(|&v| set.contains(&v) || set.iter().any(|&u| self.adjacent(u, v)))
    }

    pub fn is_maximal_independent(&self, set: &[usize]) -> bool {
        let all: Vec<usize> = (0..self.num_vertices()).collect();
        self.is_maximal_independent_within(set, &all)
    }
}

/// Greedy maximal independent set of `g` containing `forced`.
pub fn mis_greedy(g: &IntersectionGraph, forced: &[usize]) -> Result<Vec<usize>, GraphError> {
    let all: Vec<usize> = (0..g.num_vertices()).collect();
    mis_greedy_within(g, &all, forced)
}

/// Greedy maximal independent set of the subgraph induced by `within`.
///
/// Vertices are tried by ascending degree inside the induced subgraph, ties by index.
pub fn mis_greedy_within(
    g: &IntersectionGraph,
    within: &[usize],
    forced: &[usize],
) -> Result<Vec<usize>, GraphError> {
    if !g.is_independent(forced) {
        return Err(GraphError::ForcedNotIndependent);
    }
    let mask = StateSet::from_indices(g.num_vertices(), within.iter().copied());
    let mut order: Vec<(usize, usize)> = within
        .iter()
        .map(|&v| {
            let mut nb = g.neighbors(v).clone();
            nb.intersect_with(&mask);
            (nb.len(), v)
        })
        .collect();
    order.sort_unstable();
    let mut chosen = StateSet::from_indices(g.num_vertices(), forced.iter().copied());
    let mut blocked = StateSet::empty(g.num_vertices());
    for &v in forced {
        blocked.union_with(g.neighbors(v));
    }
    for (_, v) in order {
        if !chosen.contains(v) && !blocked.contains(v) {
            chosen.insert(v);
            blocked.union_with(g.neighbors(v));
        }
    }
    Ok(chosen.to_vec())
}

/// Every maximal independent set, each sorted, the list in lexicographic order.
///
/// Bron–Kerbosch with pivoting, run on the complement graph.
pub fn mis_exact_all(g: &IntersectionGraph) -> Result<Vec<Vec<usize>>, GraphError> {
    let n = g.num_vertices();
    if n > EXACT_MIS_CAP {
        return Err(GraphError::TooLarge {
            vertices: n,
            cap: EXACT_MIS_CAP,
        });
    }
    let full: u32 = if n == 0 { 0 } else { u32::MAX >> (32 - n) };
    // non[v]: vertices other than v not adjacent to v.
    let non: Vec<u32> = (0..n)
        .map(|v| {
            let nb: u32 = g.neighbors(v).iter().fold(0, |m, u| m | 1 << u);
            full & !nb & !(1 << v)
        })
        .collect();
    let mut out = Vec::new();
    bron_kerbosch(&non, 0, full, 0, &mut out);
    let mut sets: Vec<Vec<usize>> = out
        .into_iter()
        .map(|m: u32| (0..n).filter(|&v| m >> v & 1 == 1).collect())
        .collect();
    sets.sort();
    Ok(sets)
}

fn bron_kerbosch(non: &[u32], r: u32, mut p: u32, mut x: u32, out: &mut Vec<u32>) {
    if p == 0 {
        if x == 0 {
            out.push(r);
        }
        return;
    }
    let px = p | x;
    let pivot = (0..non.len())
        .filter(|&u| px >> u & 1 == 1)
        .max_by_key(|&u| ((p & non[u]).count_ones(), std::cmp::Reverse(u)))
        .unwrap();
    let mut candidates = p & !non[pivot];
    while candidates != 0 {
        let v = candidates.trailing_zeros() as usize;
        candidates &= candidates - 1;
        bron_kerbosch(non, r | 1 << v, p & non[v], x & non[v], out);
        p &= !(1 << v);
        x |= 1 << v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> IntersectionGraph {
        let mut g = IntersectionGraph::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    #[test]
    fn path_and_triangle() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(mis_greedy(&path, &[]).unwrap(), [0, 2]);
        assert_eq!(mis_exact_all(&path).unwrap(), [vec![0, 2], vec![1]]);
        let tri = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(mis_greedy(&tri, &[]).unwrap(), [0]);
        assert_eq!(mis_greedy(&tri, &[2]).unwrap(), [2]);
        assert_eq!(
            mis_greedy(&path, &[0, 1]).unwrap_err(),
            GraphError::ForcedNotIndependent
        );
    }

    #[test]
    fn four_cycle_diagonals() {
        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(mis_exact_all(&c4).unwrap(), [vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn empty_graph_has_one_empty_mis() {
        let g = graph(0, &[]);
        assert_eq!(mis_exact_all(&g).unwrap(), [Vec::<usize>::new()]);
        assert!(mis_greedy(&g, &[]).unwrap().is_empty());
    }

    #[test]
    fn within_restricts_candidates() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(mis_greedy_within(&path, &[1, 2], &[]).unwrap(), [1]);
        assert_eq!(mis_greedy_within(&path, &[0, 2], &[]).unwrap(), [0, 2]);
    }
}
