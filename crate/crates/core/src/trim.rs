//! Trimming at white endpoints and the rank of a stably dissipative graph.
//!
//! Trimming at a white endpoint `i` with unique neighbour `i'` deletes
//! every edge at `i'` except `{i, i'}`. On matrices the same step is a pair
//! of Gauss eliminations (rows against row `i`, columns against column `i`)
//! and therefore keeps the rank. Trimming until no step changes the graph
//! leaves components that are rule-(R) reducible, single white edges, or
//! isolated white vertices; only the last ones lose rank.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use crate::InteractionMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrimStep {
    pub endpoint: usize,
    pub anchor: usize,
    /// Edges `(i', j)` removed by the step, `j` ascending.
    pub removed_edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrimReport {
    pub steps: Vec<TrimStep>,
    pub final_graph: ColoredGraph,
    /// Isolated white vertices of the final graph.
    pub discarded: Vec<usize>,
    pub rank: usize,
}

impl TrimReport {
    pub fn to_json(&self) -> TrimReportJson {
        TrimReportJson {
            steps: self
                .steps
                .iter()
                .map(|s| TrimStepJson {
                    endpoint: s.endpoint + 1,
                    anchor: s.anchor + 1,
                    removed_edges: s.removed_edges.iter().map(|&(a, b)| [a + 1, b + 1]).collect(),
                })
                .collect(),
            final_components: self
                .final_graph
                .components()
                .iter()
                .map(|c| c.iter().map(|v| v + 1).collect())
                .collect(),
            discarded: self.discarded.iter().map(|v| v + 1).collect(),
            rank: self.rank,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrimStepJson {
    pub endpoint: usize,
    pub anchor: usize,
    pub removed_edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrimReportJson {
    pub steps: Vec<TrimStepJson>,
    pub final_components: Vec<Vec<usize>>,
    pub discarded: Vec<usize>,
    pub rank: usize,
}

fn anchor_of(g: &ColoredGraph, i: usize) -> Result<usize> {
    if i >= g.n() {
        return Err(Error::VertexOutOfRange(i + 1));
    }
    if !g.is_white(i) || g.degree(i) != 1 {
        return Err(Error::NotAnEndpoint(i + 1));
    }
    Ok(g.neighbours(i).next().expect("degree one"))
}

/// Removes every edge at the endpoint's neighbour except the one back to
/// the endpoint.
pub fn trim_graph(g: &ColoredGraph, i: usize) -> Result<ColoredGraph> {
    trim_graph_step(g, i).map(|(g, _)| g)
}

fn trim_graph_step(g: &ColoredGraph, i: usize) -> Result<(ColoredGraph, TrimStep)> {
    let anchor = anchor_of(g, i)?;
    let mut out = g.clone();
    let removed: Vec<(usize, usize)> = g
        .neighbours(anchor)
        .filter(|&j| j != i)
        .map(|j| (anchor, j))
        .collect();
    for &(a, j) in &removed {
        out.remove_edge(a, j);
    }
    Ok((
        out,
        TrimStep {
            endpoint: i,
            anchor,
            removed_edges: removed,
        },
    ))
}

/// Endpoints whose trim would change the graph (the neighbour has other edges).
pub fn effective_endpoints(g: &ColoredGraph) -> Vec<usize> {
    g.circ_endpoints()
        .into_iter()
        .filter(|&i| {
            let anchor = g.neighbours(i).next().expect("degree one");
            g.degree(anchor) > 1
        })
        .collect()
}

/// Matrix counterpart of [`trim_graph`]:
///
/// `row_j ← row_j − (a_{j i'} / a_{i i'}) row_i` and
/// `col_j ← col_j − (a_{i' j} / a_{i' i}) col_i` for every `j ∉ {i, i'}`.
///
/// Requires `a_ii = 0`, and row `i` and column `i` supported only on `i'`
/// with both `a_{i i'}` and `a_{i' i}` nonzero.
pub fn trim_matrix(a: &InteractionMatrix, i: usize) -> Result<InteractionMatrix> {
    let n = a.n();
    if i >= n {
        return Err(Error::VertexOutOfRange(i + 1));
    }
    let not_endpoint = || Error::NotAnEndpoint(i + 1);
    if !a[(i, i)].is_zero() {
        return Err(not_endpoint());
    }
    let support: Vec<usize> = (0..n)
        .filter(|&j| j != i && (!a[(i, j)].is_zero() || !a[(j, i)].is_zero()))
        .collect();
    let [anchor] = support[..] else {
        return Err(not_endpoint());
    };
    let a_i_anchor = a[(i, anchor)].clone();
    let a_anchor_i = a[(anchor, i)].clone();
    if a_i_anchor.is_zero() || a_anchor_i.is_zero() {
        return Err(not_endpoint());
    }
    let mut out = a.clone();
    let row_i = out.row(i).to_vec();
    for j in (0..n).filter(|&j| j != i && j != anchor) {
        let f = out[(j, anchor)].clone() / a_i_anchor.clone();
        if f.is_zero() {
            continue;
        }
        for (k, v) in row_i.iter().enumerate() {
            if !v.is_zero() {
                out[(j, k)] -= f.clone() * v.clone();
            }
        }
    }
    let col_i = out.column(i);
    for j in (0..n).filter(|&j| j != i && j != anchor) {
        let f = out[(anchor, j)].clone() / a_anchor_i.clone();
        if f.is_zero() {
            continue;
        }
        for (k, v) in col_i.iter().enumerate() {
            if !v.is_zero() {
                out[(k, j)] -= f.clone() * v.clone();
            }
        }
    }
    Ok(out)
}

/// Trims at the lowest-numbered effective endpoint until none remains.
pub fn trim_to_core(g: &ColoredGraph) -> Result<TrimReport> {
    trim_to_core_with(g, |_| 0)
}

/// Like [`trim_to_core`], with `choose` picking the index (into the
/// ascending list of effective endpoints) to trim next.
pub fn trim_to_core_with(
    g: &ColoredGraph,
    mut choose: impl FnMut(&[usize]) -> usize,
) -> Result<TrimReport> {
    if !g.is_stably_dissipative() {
        return Err(Error::NotStablyDissipative);
    }
    let mut current = g.clone();
    let mut steps = Vec::new();
    loop {
        let candidates = effective_endpoints(&current);
        if candidates.is_empty() {
            break;
        }
        let pick = candidates[choose(&candidates).min(candidates.len() - 1)];
        let (next, step) = trim_graph_step(&current, pick)?;
        current = next;
        steps.push(step);
    }
    Ok(finish(g.n(), current, steps))
}

/// Applies an explicit endpoint sequence, then continues with the default
/// lowest-index order.
pub fn trim_sequence(g: &ColoredGraph, endpoints: &[usize]) -> Result<TrimReport> {
    if !g.is_stably_dissipative() {
        return Err(Error::NotStablyDissipative);
    }
    let mut current = g.clone();
    let mut steps = Vec::new();
    for &i in endpoints {
        let (next, step) = trim_graph_step(&current, i)?;
        current = next;
        steps.push(step);
    }
    let rest = trim_to_core(&current)?;
    steps.extend(rest.steps);
    Ok(finish(g.n(), rest.final_graph, steps))
}

fn finish(n: usize, final_graph: ColoredGraph, steps: Vec<TrimStep>) -> TrimReport {
    let discarded: Vec<usize> = (0..n)
        .filter(|&v| final_graph.is_white(v) && final_graph.degree(v) == 0)
        .collect();
    TrimReport {
        rank: n - discarded.len(),
        steps,
        final_graph,
        discarded,
    }
}

/// Common rank of every dissipative matrix with graph `g`.
pub fn graph_rank(g: &ColoredGraph) -> Result<usize> {
    trim_to_core(g).map(|r| r.rank)
}
