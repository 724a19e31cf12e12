//! Small symmetric-graph toolbox: minimum spanning trees and a
//! Christofides-style tour construction (spanning tree, greedy matching of
//! odd-degree vertices, Euler walk, shortcut, 2-opt polish).
//!
//! Everything is deterministic: ties are broken by the smallest vertex-index
//! pair so repeated runs produce identical structures.

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Dense symmetric edge weights with a zero diagonal.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    w: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        WeightedGraph { n, w: vec![0.0; n * n] }
    }

    /// Complete Euclidean graph over the given points.
    pub fn from_points(points: &[Point2]) -> Self {
        let mut g = WeightedGraph::new(points.len());
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                g.set(i, j, points[i].distance(points[j]));
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn set(&mut self, i: usize, j: usize, weight: f64) {
        self.w[i * self.n + j] = weight;
        self.w[j * self.n + i] = weight;
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Minimum spanning tree by Kruskal's rule; ties resolved toward the edge
/// with the smallest `(u, v)` pair. Returns the edges and the total weight.
pub fn mst(g: &WeightedGraph) -> Result<(Vec<(usize, usize)>, f64)> {
    let n = g.len();
    if n == 0 {
        return Err(Error::domain("mst on empty graph"));
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    edges.sort_by(|&(a, b), &(c, d)| {
        g.weight(a, b)
            .total_cmp(&g.weight(c, d))
            .then(a.cmp(&c))
            .then(b.cmp(&d))
    });

    let mut uf = UnionFind::new(n);
    let mut tree = Vec::with_capacity(n - 1);
    let mut total = 0.0;
    for (u, v) in edges {
        if uf.union(u, v) {
            total += g.weight(u, v);
            tree.push((u, v));
            if tree.len() == n - 1 {
                break;
            }
        }
    }
    Ok((tree, total))
}

/// Length of the closed tour visiting `tour` in order.
pub fn tour_length(g: &WeightedGraph, tour: &[usize]) -> f64 {
    let mut total = 0.0;
    for k in 0..tour.len() {
        total += g.weight(tour[k], tour[(k + 1) % tour.len()]);
    }
    total
}

/// Heuristic closed tour over all vertices, returned as a vertex order that
/// begins at `start`; the closing edge back to `start` is implicit.
pub fn tsp_tour(g: &WeightedGraph, start: usize) -> Result<Vec<usize>> {
    let n = g.len();
    if n == 0 || start >= n {
        return Err(Error::domain("tsp_tour: empty graph or start out of range"));
    }
    if n == 1 {
        return Ok(vec![start]);
    }
    if n == 2 {
        return Ok(vec![start, 1 - start]);
    }

    let (tree, _) = mst(g)?;

    // Multigraph adjacency: spanning tree plus a greedy matching that makes
    // every degree even.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let add = |adj: &mut Vec<Vec<usize>>, u: usize, v: usize| {
        adj[u].push(v);
        adj[v].push(u);
    };
    for &(u, v) in &tree {
        add(&mut adj, u, v);
    }

    let odd: Vec<usize> = (0..n).filter(|&v| adj[v].len() % 2 == 1).collect();
    let mut pairs = Vec::new();
    for (i, &u) in odd.iter().enumerate() {
        for &v in &odd[i + 1..] {
            pairs.push((u, v));
        }
    }
    pairs.sort_by(|&(a, b), &(c, d)| {
        g.weight(a, b)
            .total_cmp(&g.weight(c, d))
            .then(a.cmp(&c))
            .then(b.cmp(&d))
    });
    let mut matched = vec![false; n];
    for (u, v) in pairs {
        if !matched[u] && !matched[v] {
            matched[u] = true;
            matched[v] = true;
            add(&mut adj, u, v);
        }
    }

    // Euler walk over the even multigraph, consuming neighbours in ascending
    // order for determinism.
    for nb in &mut adj {
        nb.sort_unstable();
        nb.reverse(); // pop() takes the smallest remaining
    }
    let mut remaining: Vec<std::collections::HashMap<usize, usize>> = vec![Default::default(); n];
    for (u, nb) in adj.iter().enumerate() {
        for &v in nb {
            *remaining[u].entry(v).or_insert(0) += 1;
        }
    }
    let mut stack = vec![start];
    let mut walk = Vec::new();
    let mut cursor = adj;
    while let Some(&u) = stack.last() {
        let mut next = None;
        while let Some(v) = cursor[u].pop() {
            if remaining[u].get(&v).copied().unwrap_or(0) > 0 {
                next = Some(v);
                break;
            }
        }
        match next {
            Some(v) => {
                *remaining[u].get_mut(&v).unwrap() -= 1;
                *remaining[v].get_mut(&u).unwrap() -= 1;
                stack.push(v);
            }
            None => {
                walk.push(u);
                stack.pop();
            }
        }
    }
    walk.reverse();

    // Shortcut repeated vertices, keeping first occurrences.
    let mut seen = vec![false; n];
    let mut tour: Vec<usize> = Vec::with_capacity(n);
    for v in walk {
        if !seen[v] {
            seen[v] = true;
            tour.push(v);
        }
    }
    debug_assert_eq!(tour.len(), n);
    debug_assert_eq!(tour[0], start);

    two_opt(g, &mut tour);
    Ok(tour)
}

/// In-place 2-opt: first improving segment reversal, repeated for at most 50
/// passes. Position 0 is pinned so the tour keeps its starting vertex.
fn two_opt(g: &WeightedGraph, tour: &mut [usize]) {
    let n = tour.len();
    if n < 4 {
        return;
    }
    for _ in 0..50 {
        let mut improved = false;
        for i in 1..n - 1 {
            for j in i + 1..n {
                let (a, b) = (tour[i - 1], tour[i]);
                let (c, d) = (tour[j], tour[(j + 1) % n]);
                let delta = g.weight(a, c) + g.weight(b, d) - g.weight(a, b) - g.weight(c, d);
                if delta < -1e-12 {
                    tour[i..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}
