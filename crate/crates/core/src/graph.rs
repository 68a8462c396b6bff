//! The black-and-white interaction graph of a matrix.
//!
//! Vertices are 0-based in memory; every rendering (JSON, DOT, error
//! messages) uses 1-based labels.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::reduction::Mark;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    /// `a_ii < 0`.
    Black,
    /// `a_ii = 0`.
    White,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    /// Both endpoints black.
    StrongLink,
    Weak,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColoredGraph {
    color: Vec<Color>,
    adj: Vec<BTreeSet<usize>>,
}

impl ColoredGraph {
    /// Graph without edges.
    pub fn new(color: Vec<Color>) -> Self {
        let n = color.len();
        ColoredGraph {
            color,
            adj: vec![BTreeSet::new(); n],
        }
    }

    /// Graph from colors and 0-based edges; self-loops and out-of-range
    /// endpoints are rejected.
    pub fn with_edges(color: Vec<Color>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(color);
        for &(i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.color.len()
    }

    pub fn color(&self, v: usize) -> Color {
        self.color[v]
    }

    pub fn colors(&self) -> &[Color] {
        &self.color
    }

    pub fn is_black(&self, v: usize) -> bool {
        self.color[v] == Color::Black
    }

    pub fn is_white(&self, v: usize) -> bool {
        self.color[v] == Color::White
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        let n = self.n();
        if i >= n {
            return Err(Error::VertexOutOfRange(i + 1));
        }
        if j >= n {
            return Err(Error::VertexOutOfRange(j + 1));
        }
        if i == j {
            return Err(Error::Parse(format!("self-loop at vertex {}", i + 1)));
        }
        self.adj[i].insert(j);
        self.adj[j].insert(i);
        Ok(())
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) -> bool {
        let had = self.adj[i].remove(&j);
        self.adj[j].remove(&i);
        had
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(&j)
    }

    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|i| self.adj[i].range(i + 1..).map(move |&j| (i, j)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn edge_kind(&self, i: usize, j: usize) -> EdgeKind {
        if self.is_black(i) && self.is_black(j) {
            EdgeKind::StrongLink
        } else {
            EdgeKind::Weak
        }
    }

    pub fn black_vertices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.is_black(v)).collect()
    }

    pub fn white_vertices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.is_white(v)).collect()
    }

    /// Partial graph keeping only weak edges (all strong links removed).
    pub fn weak_subgraph(&self) -> ColoredGraph {
        let mut g = self.clone();
        for (i, j) in self.edges() {
            if self.edge_kind(i, j) == EdgeKind::StrongLink {
                g.remove_edge(i, j);
            }
        }
        g
    }

    /// Every cycle carries a strong link, i.e. the weak-edge subgraph is a
    /// forest. Union-find over the weak edges.
    pub fn is_stably_dissipative(&self) -> bool {
        let mut uf = UnionFind::new(self.n());
        self.edges()
            .into_iter()
            .filter(|&(i, j)| self.edge_kind(i, j) == EdgeKind::Weak)
            .all(|(i, j)| uf.union(i, j))
    }

    /// White vertices of degree exactly one, ascending.
    pub fn circ_endpoints(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&v| self.is_white(v) && self.degree(v) == 1)
            .collect()
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.n());
        for (i, j) in self.edges() {
            uf.union(i, j);
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.n()];
        for v in 0..self.n() {
            let root = uf.find(v);
            if slot[root] == usize::MAX {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push(v);
        }
        groups
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n(),
            black: self.black_vertices().iter().map(|v| v + 1).collect(),
            edges: self.edges().iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let mut color = vec![Color::White; json.n];
        for &b in &json.black {
            if b == 0 || b > json.n {
                return Err(Error::VertexOutOfRange(b));
            }
            color[b - 1] = Color::Black;
        }
        let mut g = Self::new(color);
        for &[i, j] in &json.edges {
            if i == 0 || i > json.n {
                return Err(Error::VertexOutOfRange(i));
            }
            if j == 0 || j > json.n {
                return Err(Error::VertexOutOfRange(j));
            }
            g.add_edge(i - 1, j - 1)?;
        }
        Ok(g)
    }

    /// DOT rendering: black vertices filled, white unfilled.
    pub fn to_dot(&self) -> String {
        render_dot(self, None)
    }
}

/// Graph of a matrix: vertex `i` black iff `a_ii < 0`, white iff
/// `a_ii = 0`; edge `{i, j}` iff `a_ij ≠ 0` or `a_ji ≠ 0`.
pub fn build_graph<T: Scalar>(a: &Matrix<T>) -> Result<ColoredGraph> {
    let n = a.n();
    let mut color = Vec::with_capacity(n);
    for i in 0..n {
        let d = &a[(i, i)];
        if d.is_zero() {
            color.push(Color::White);
        } else if d.is_negative() {
            color.push(Color::Black);
        } else {
            return Err(Error::PositiveDiagonal(i + 1));
        }
    }
    let mut g = ColoredGraph::new(color);
    for i in 0..n {
        for j in i + 1..n {
            if !a[(i, j)].is_zero() || !a[(j, i)].is_zero() {
                g.add_edge(i, j).expect("valid indices");
            }
        }
    }
    Ok(g)
}

/// JSON shape of a graph: `{n, black: [...], edges: [[i, j], ...]}`, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub black: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
}

pub(crate) fn render_dot(g: &ColoredGraph, marks: Option<&[Mark]>) -> String {
    let mut out = String::from("graph G {\n  node [shape=circle];\n");
    for v in 0..g.n() {
        let style = match (marks.map(|m| m[v]), g.color(v)) {
            (Some(Mark::Bullet), _) | (None, Color::Black) => {
                "style=filled, fillcolor=black, fontcolor=white"
            }
            (Some(Mark::Cross), _) => "shape=doublecircle, xlabel=\"+\"",
            (Some(Mark::Circ), _) | (None, Color::White) => "style=solid",
        };
        let _ = writeln!(out, "  {} [{}];", v + 1, style);
    }
    for (i, j) in g.edges() {
        let attr = if g.edge_kind(i, j) == EdgeKind::StrongLink {
            " [penwidth=2]"
        } else {
            ""
        };
        let _ = writeln!(out, "  {} -- {}{};", i + 1, j + 1, attr);
    }
    out.push_str("}\n");
    out
}

/// Disjoint sets with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Merges the two sets; false when they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::InteractionMatrix;

    fn white(n: usize) -> Vec<Color> {
        vec![Color::White; n]
    }

    #[test]
    fn positive_diagonal_is_rejected() {
        let a = InteractionMatrix::from_i64_rows(&[&[0, 1], &[-1, 2]]).unwrap();
        assert_eq!(build_graph(&a).unwrap_err(), Error::PositiveDiagonal(2));
    }

    #[test]
    fn zero_matrix_has_no_edges() {
        let g = build_graph(&InteractionMatrix::zeros(3, 3)).unwrap();
        assert_eq!(g.colors(), &white(3)[..]);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn predator_prey_graph() {
        let a = InteractionMatrix::from_i64_rows(&[&[0, 1], &[-1, 0]]).unwrap();
        let g = build_graph(&a).unwrap();
        assert_eq!(g.colors(), &white(2)[..]);
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn one_sided_entry_still_makes_an_edge() {
        let a = InteractionMatrix::from_i64_rows(&[&[-1, 0], &[3, 0]]).unwrap();
        assert_eq!(build_graph(&a).unwrap().edges(), vec![(0, 1)]);
    }

    #[test]
    fn triangles() {
        let tri = [(0, 1), (1, 2), (0, 2)];
        let g = ColoredGraph::with_edges(white(3), &tri).unwrap();
        assert!(!g.is_stably_dissipative());
        let g = ColoredGraph::with_edges(vec![Color::Black, Color::Black, Color::White], &tri)
            .unwrap();
        assert!(g.is_stably_dissipative());
        // Two black vertices but not adjacent through the strong link.
        let g = ColoredGraph::with_edges(
            vec![Color::Black, Color::White, Color::Black, Color::White],
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
        )
        .unwrap();
        assert!(!g.is_stably_dissipative());
    }

    #[test]
    fn endpoints_need_degree_one() {
        let g = ColoredGraph::new(white(2));
        assert!(g.circ_endpoints().is_empty());
        let g = ColoredGraph::with_edges(vec![Color::Black, Color::White], &[(0, 1)]).unwrap();
        assert_eq!(g.circ_endpoints(), vec![1]);
        assert_eq!(
            ColoredGraph::new(white(2)).components(),
            vec![vec![0], vec![1]]
        );
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = ColoredGraph::with_edges(vec![Color::Black, Color::White, Color::White], &[(0, 1), (1, 2)])
            .unwrap();
        let json = g.to_json();
        assert_eq!(json.black, vec![1]);
        assert_eq!(json.edges, vec![[1, 2], [2, 3]]);
        assert_eq!(ColoredGraph::from_json(&json).unwrap(), g);
        let bad = GraphJson {
            n: 2,
            black: vec![],
            edges: vec![[1, 3]],
        };
        assert_eq!(ColoredGraph::from_json(&bad).unwrap_err(), Error::VertexOutOfRange(3));
        assert!(ColoredGraph::new(white(2)).add_edge(1, 1).is_err());
    }

    #[test]
    fn dot_for_single_black_vertex() {
        let dot = ColoredGraph::new(vec![Color::Black]).to_dot();
        assert!(dot.contains("1 [style=filled"));
        assert_eq!(dot.matches("--").count(), 0);
    }
}
