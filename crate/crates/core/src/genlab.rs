//! Seeded generators: stably dissipative graphs, matrices with a given
//! graph, and sparsity-preserving perturbations.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Color, ColoredGraph, UnionFind};
use crate::{InteractionMatrix, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n: usize,
    pub black_fraction: f64,
    pub extra_edge_prob: f64,
    pub strong_cycle_prob: f64,
    pub magnitude_bound: u32,
    pub seed: u64,
    /// Apply `A → diag(c)⁻¹·A` with a random positive `c` after sampling.
    pub rescale: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n: 6,
            black_fraction: 0.4,
            extra_edge_prob: 0.15,
            strong_cycle_prob: 0.5,
            magnitude_bound: 5,
            seed: 0,
            rescale: false,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("black_fraction", self.black_fraction),
            ("extra_edge_prob", self.extra_edge_prob),
            ("strong_cycle_prob", self.strong_cycle_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        if self.magnitude_bound == 0 {
            return Err(Error::InvalidConfig("magnitude_bound must be positive".into()));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GenConfig {
            seed,
            ..self.clone()
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

const FOREST_EDGE_PROB: f64 = 0.85;

pub fn random_sd_graph(cfg: &GenConfig) -> Result<ColoredGraph> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let n = cfg.n;
    let colors: Vec<Color> = (0..n)
        .map(|_| {
            if rng.gen_bool(cfg.black_fraction) {
                Color::Black
            } else {
                Color::White
            }
        })
        .collect();
    let mut g = ColoredGraph::new(colors);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for k in 1..n {
        if rng.gen_bool(FOREST_EDGE_PROB) {
            let parent = order[rng.gen_range(0..k)];
            g.add_edge(order[k], parent)?;
        }
    }

    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !g.has_edge(i, j))
        .collect();
    pairs.shuffle(&mut rng);
    for (i, j) in pairs {
        if !rng.gen_bool(cfg.extra_edge_prob) {
            continue;
        }
        if g.is_black(i) && g.is_black(j) {
            g.add_edge(i, j)?;
            continue;
        }
        match weak_path(&g, i, j) {
            None => g.add_edge(i, j)?,
            Some(path) => {
                if !rng.gen_bool(cfg.strong_cycle_prob) {
                    continue;
                }
                // Blacken one edge of the closing path so the new cycle
                // runs through a strong link.
                let e = rng.gen_range(0..path.len() - 1);
                g = recolor_black(&g, &[path[e], path[e + 1]]);
                g.add_edge(i, j)?;
            }
        }
    }
    debug_assert!(g.is_stably_dissipative());
    Ok(g)
}

fn recolor_black(g: &ColoredGraph, vertices: &[usize]) -> ColoredGraph {
    let mut colors = g.colors().to_vec();
    for &v in vertices {
        colors[v] = Color::Black;
    }
    ColoredGraph::with_edges(colors, &g.edges()).expect("same edges")
}

/// Path from `from` to `to` in the weak subgraph, when one exists.
fn weak_path(g: &ColoredGraph, from: usize, to: usize) -> Option<Vec<usize>> {
    let w = g.weak_subgraph();
    let mut uf = UnionFind::new(g.n());
    for (a, b) in w.edges() {
        uf.union(a, b);
    }
    if uf.find(from) != uf.find(to) {
        return None;
    }
    let mut parent = vec![usize::MAX; g.n()];
    parent[from] = from;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for u in w.neighbours(v) {
            if parent[u] == usize::MAX {
                parent[u] = v;
                queue.push_back(u);
            }
        }
    }
    let mut path = vec![to];
    while *path.last().expect("nonempty") != from {
        path.push(parent[*path.last().expect("nonempty")]);
    }
    path.reverse();
    Some(path)
}

fn nonzero_rational(rng: &mut impl Rng, bound: u32) -> Rational {
    let b = bound as i64;
    let mut num = rng.gen_range(1..=b);
    if rng.gen_bool(0.5) {
        num = -num;
    }
    Rational::new(num.into(), rng.gen_range(1..=b).into())
}

fn positive_rational(rng: &mut impl Rng, bound: u32) -> Rational {
    let b = bound as i64;
    Rational::new(rng.gen_range(1..=b).into(), rng.gen_range(1..=b).into())
}

/// A dissipative matrix with graph `g`, certified by `c = 1` before the
/// optional rescaling.
pub fn sample_matrix(g: &ColoredGraph, cfg: &GenConfig) -> Result<InteractionMatrix> {
    if !g.is_stably_dissipative() {
        return Err(Error::NotStablyDissipative);
    }
    cfg.validate()?;
    let mut rng = cfg.rng();
    let n = g.n();
    let bound = cfg.magnitude_bound;
    let mut a = InteractionMatrix::zeros(n, n);
    let mut row_mass = vec![Rational::zero(); n];
    for (i, j) in g.edges() {
        if g.is_black(i) && g.is_black(j) {
            let s = nonzero_rational(&mut rng, bound);
            let k = if rng.gen_bool(0.5) {
                nonzero_rational(&mut rng, bound)
            } else {
                Rational::zero()
            };
            a[(i, j)] = s.clone() + k.clone();
            a[(j, i)] = s.clone() - k;
            let mag = if s < Rational::zero() { -s } else { s };
            row_mass[i] += mag.clone();
            row_mass[j] += mag;
        } else {
            let p = nonzero_rational(&mut rng, bound);
            a[(i, j)] = p.clone();
            a[(j, i)] = -p;
        }
    }
    for v in g.black_vertices() {
        let margin = positive_rational(&mut rng, bound);
        a[(v, v)] = -(row_mass[v].clone() + margin);
    }
    if cfg.rescale {
        let c: Vec<Rational> = (0..n).map(|_| positive_rational(&mut rng, bound)).collect();
        let inv: Vec<Rational> = c.iter().map(|ci| Rational::one() / ci.clone()).collect();
        a = a.scale_rows(&inv);
    }
    Ok(a)
}

const DELTA_GRID: i64 = 1000;

/// Multiplies every nonzero entry by `1 + δ`, `δ` uniform on a grid of
/// `[−ε, ε]`; zeros stay zero.
pub fn perturb(a: &InteractionMatrix, epsilon: &Rational, seed: u64) -> Result<InteractionMatrix> {
    if *epsilon <= Rational::zero() {
        return Err(Error::InvalidConfig("epsilon must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = a.clone();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if a[(i, j)].is_zero() {
                continue;
            }
            let factor = loop {
                let k = rng.gen_range(-DELTA_GRID..=DELTA_GRID);
                let delta = epsilon.clone() * Rational::new(BigInt::from(k), BigInt::from(DELTA_GRID));
                let f = Rational::one() + delta;
                if !f.is_zero() {
                    break f;
                }
            };
            out[(i, j)] = a[(i, j)].clone() * factor;
        }
    }
    Ok(out)
}
