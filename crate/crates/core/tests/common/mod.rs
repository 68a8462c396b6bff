#![allow(dead_code)]

use lvstab::genlab::{random_sd_graph, GenConfig};
use lvstab::{ColoredGraph, InteractionMatrix, LvSystem, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEVEN: [[i64; 7]; 7] = [
    [0, 1, 0, 0, 0, 0, 1],
    [-2, 0, 1, 0, 0, 0, 0],
    [0, -1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, -1],
    [0, 0, 0, -2, 0, 1, 0],
    [0, 0, 0, 0, -1, 0, 0],
    [-1, 0, 0, 1, 0, 0, -1],
];

pub fn seven() -> InteractionMatrix {
    let rows: Vec<&[i64]> = SEVEN.iter().map(|r| &r[..]).collect();
    InteractionMatrix::from_i64_rows(&rows).unwrap()
}

pub fn seven_system() -> LvSystem {
    LvSystem::with_unit_equilibrium(seven())
}

pub fn food_chain() -> InteractionMatrix {
    InteractionMatrix::from_i64_rows(&[&[-1, 1, 0], &[-1, 0, 1], &[0, -1, 0]]).unwrap()
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

/// Generator settings drawn from the seed itself, so a sweep over seeds
/// covers sizes, densities and rescaling.
pub fn varied_config(seed: u64, max_n: usize) -> GenConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe);
    GenConfig {
        n: rng.gen_range(1..=max_n),
        black_fraction: rng.gen_range(0.0..=1.0),
        extra_edge_prob: rng.gen_range(0.0..0.5),
        strong_cycle_prob: rng.gen_range(0.0..=1.0),
        magnitude_bound: rng.gen_range(1..=6),
        seed,
        rescale: seed % 2 == 1,
    }
}

pub fn varied_graph(seed: u64, max_n: usize) -> (GenConfig, ColoredGraph) {
    let cfg = varied_config(seed, max_n);
    let g = random_sd_graph(&cfg).unwrap();
    (cfg, g)
}

/// Every simple cycle of length ≥ 3 has an edge with two black ends.
pub fn brute_force_every_cycle_strong(g: &ColoredGraph) -> bool {
    fn dfs(g: &ColoredGraph, start: usize, v: usize, path: &mut Vec<usize>, ok: &mut bool) {
        for u in g.neighbours(v).collect::<Vec<_>>() {
            if !*ok {
                return;
            }
            if u == start && path.len() >= 3 {
                let mut cyc = path.clone();
                cyc.push(start);
                if !cyc.windows(2).any(|e| g.is_black(e[0]) && g.is_black(e[1])) {
                    *ok = false;
                }
            } else if u > start && !path.contains(&u) {
                path.push(u);
                dfs(g, start, u, path, ok);
                path.pop();
            }
        }
    }
    let mut ok = true;
    for s in 0..g.n() {
        dfs(g, s, s, &mut vec![s], &mut ok);
    }
    ok
}

/// Positive root of `f` on `(lo, hi)` by bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
