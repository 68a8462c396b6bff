mod common;

use common::*;
use lvstab::certify::{find_certificate, is_stably_dissipative, lemma1_seed, verify_certificate};
use lvstab::dynamics::{lyapunov_h, lyapunov_hdot, vector_field, vector_field_exact};
use lvstab::foliation::{
    conserved_levels, equilibria_set, exact_rank, kernel_basis, kernel_basis_t,
    kernel_transport_holds, leaf_equilibrium_intersection, Foliation, Leaf,
};
use lvstab::graph::build_graph;
use lvstab::linalg;
use lvstab::reduction::{reduce_full, reduce_simplified, AttractorClass, Mark};
use lvstab::trim::{graph_rank, trim_matrix, trim_sequence, trim_to_core};
use lvstab::{Certificate, Color, ColoredGraph, InteractionMatrix, LvSystem, Rational};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn seven_species_graph_is_the_path() {
    let g = build_graph(&seven()).unwrap();
    assert_eq!(g.black_vertices(), vec![6]);
    let mut edges = g.edges();
    edges.sort();
    assert_eq!(edges, vec![(0, 1), (0, 6), (1, 2), (3, 4), (3, 6), (4, 5)]);
    assert!(g.is_stably_dissipative());
    assert!(brute_force_every_cycle_strong(&g));
}

#[test]
fn seven_species_certificate() {
    let a = seven();
    let expected = Certificate::new(ints(&[2, 1, 1, 2, 1, 1, 2])).unwrap();
    let found = find_certificate(&a);
    assert_eq!(found.certificate().unwrap().normalized(), expected);
    let sd = is_stably_dissipative(&a);
    assert_eq!(sd.certificate().unwrap().normalized(), expected);
    assert!(verify_certificate(&a, &expected));
    assert!(!verify_certificate(&a, &Certificate::ones(7)));
    assert_eq!(lemma1_seed(&a, &expected), vec![6]);
}

#[test]
fn seven_species_reductions() {
    let g = build_graph(&seven()).unwrap();
    let full = reduce_full(&g);
    assert_eq!(full.with_mark(Mark::Bullet), vec![6]);
    assert_eq!(full.classify(), AttractorClass::PossiblyPeriodic);
    let simplified = reduce_simplified(&g);
    assert_eq!(simplified.with_mark(Mark::Bullet), vec![1, 4, 6]);
}

#[test]
fn seven_species_rank_and_kernels() {
    let a = seven();
    assert_eq!(exact_rank(&a), 6);
    assert_eq!(linalg::rank(&a), 6);
    assert_eq!(graph_rank(&build_graph(&a).unwrap()).unwrap(), 6);
    assert_eq!(kernel_basis(&a).vectors, vec![ints(&[1, 0, 2, 1, 0, 2, 0])]);
    assert_eq!(kernel_basis_t(&a).vectors, vec![ints(&[1, 0, 1, 1, 0, 1, 0])]);
    assert!(kernel_transport_holds(&a, &ints(&[2, 1, 1, 2, 1, 1, 2])));
    assert!(!kernel_transport_holds(&a, &ints(&[1, 1, 1, 1, 1, 1, 1])));
}

#[test]
fn trim_at_six_annihilates_four_five_pair() {
    let a = seven();
    let t = trim_matrix(&a, 5).unwrap();
    let changed: Vec<(usize, usize)> = (0..7)
        .flat_map(|i| (0..7).map(move |j| (i, j)))
        .filter(|&(i, j)| t[(i, j)] != a[(i, j)])
        .collect();
    assert_eq!(changed, vec![(3, 4), (4, 3)]);
    assert!(t[(3, 4)].is_zero() && t[(4, 3)].is_zero());
    assert_eq!(exact_rank(&t), 6);
}

#[test]
fn trim_chain_in_stated_order() {
    let g = build_graph(&seven()).unwrap();
    let r = trim_sequence(&g, &[5, 3, 0]).unwrap();
    assert_eq!(r.steps.len(), 3);
    assert_eq!(r.final_graph.components(), vec![vec![0, 1], vec![2], vec![3, 6], vec![4, 5]]);
    assert_eq!(r.discarded, vec![2]);
    assert_eq!(r.rank, 6);
    // The default lowest-index order ends in a different core of equal rank.
    let d = trim_to_core(&g).unwrap();
    assert_eq!(d.final_graph.components(), vec![vec![0, 6], vec![1, 2], vec![3, 4], vec![5]]);
    assert_eq!(d.rank, 6);
}

#[test]
fn trim_matrix_chain_keeps_rank() {
    let mut a = seven();
    for i in [5, 3, 0] {
        a = trim_matrix(&a, i).unwrap();
        assert_eq!(exact_rank(&a), 6);
    }
    let g = build_graph(&a).unwrap();
    assert_eq!(g.components(), vec![vec![0, 1], vec![2], vec![3, 6], vec![4, 5]]);
}

#[test]
fn food_chain_is_globally_attracting() {
    let a = food_chain();
    assert_eq!(
        is_stably_dissipative(&a).certificate().unwrap().normalized(),
        Certificate::ones(3)
    );
    let g = build_graph(&a).unwrap();
    assert!(reduce_full(&g).all_bullet());
    assert_eq!(reduce_full(&g).classify(), AttractorClass::GlobalPointAttractor);
    assert_eq!(exact_rank(&a), 3);
    assert_eq!(graph_rank(&g).unwrap(), 3);
}

#[test]
fn non_dissipative_pairs_are_refuted() {
    let a = InteractionMatrix::from_i64_rows(&[&[0, 1], &[1, 0]]).unwrap();
    assert_eq!(find_certificate(&a).label(), "RefutedAlgebra");
    assert_eq!(is_stably_dissipative(&a).label(), "RefutedAlgebra");
}

#[test]
fn cycle_test_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..400 {
        let n = rng.gen_range(1..=7);
        let colors = (0..n)
            .map(|_| if rng.gen_bool(0.4) { Color::Black } else { Color::White })
            .collect();
        let mut g = ColoredGraph::new(colors);
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.35) {
                    g.add_edge(i, j).unwrap();
                }
            }
        }
        assert_eq!(g.is_stably_dissipative(), brute_force_every_cycle_strong(&g), "{g:?}");
    }
}

#[test]
fn seven_species_vector_field() {
    let s = seven_system();
    let f = vector_field(&s, &[1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
    assert_eq!(f[0], 1.0);
    assert_eq!(f[2], -1.0);
    let q = ints(&[1; 7]);
    assert!(vector_field_exact(&s, &q).unwrap().iter().all(Zero::is_zero));
}

#[test]
fn seven_species_hdot_is_minus_two_square() {
    let s = seven_system();
    let c = Certificate::new(ints(&[2, 1, 1, 2, 1, 1, 2])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let x: Vec<f64> = (0..7).map(|_| rng.gen_range(0.05..4.0)).collect();
        let hdot = lyapunov_hdot(&s, &c, &x).unwrap();
        let expected = -2.0 * (x[6] - 1.0).powi(2);
        assert!((hdot - expected).abs() < 1e-12, "{hdot} vs {expected}");
    }
    let h = lyapunov_h(&s, &c, &[1.0; 7]).unwrap();
    assert_eq!(h, 10.0);
}

#[test]
fn seven_species_levels() {
    let a = seven();
    assert_eq!(conserved_levels(&a, &[1.0; 7]).unwrap().levels, vec![0.0]);
    let mut x = [1.0; 7];
    x[0] = std::f64::consts::E;
    assert!((conserved_levels(&a, &x).unwrap().levels[0] - 1.0).abs() < 1e-15);
}

/// The transposed-kernel combination is conserved by the flow; the kernel
/// generator itself is not.
#[test]
fn only_transposed_kernel_logs_are_conserved() {
    let a = seven();
    let w = &kernel_basis_t(&a).vectors[0];
    let v = &kernel_basis(&a).vectors[0];
    assert!(a.vec_mul(w).iter().all(Zero::is_zero));
    // d/dt Σ v_i log x_i = vᵀA(x − q); at x − q = e₂ this is 1 − 2 = −1.
    let mut d = vec![Rational::zero(); 7];
    d[1] = int(1);
    let rate = lvstab::matrix::dot(v, &a.mul_vec(&d));
    assert_eq!(rate, int(-1));
}

#[test]
fn seven_species_equilibria_and_leaf_point() {
    let s = seven_system();
    let e = equilibria_set(&s);
    assert_eq!(e.directions.vectors, vec![ints(&[1, 0, 2, 1, 0, 2, 0])]);
    assert_eq!(
        e.interval,
        Some((Some(Rational::new((-1).into(), 2.into())), None))
    );

    let x = leaf_equilibrium_intersection(&s, &Leaf { levels: vec![1.0] }).unwrap();
    let root = bisect(
        |t| 2.0 * (1.0 + t).ln() + 2.0 * (1.0 + 2.0 * t).ln() - 1.0,
        0.0,
        1.0,
    );
    // The commonly quoted value 0.191723 only holds to four digits; the
    // bisection root is 0.1917328.
    assert!((root - 0.191723).abs() < 1e-4);
    assert!((root - 0.191_732_783_410_487).abs() < 1e-12);
    let expected = [1.0 + root, 1.0, 1.0 + 2.0 * root, 1.0 + root, 1.0, 1.0 + 2.0 * root, 1.0];
    for (xi, ei) in x.iter().zip(expected) {
        assert!((xi - ei).abs() < 1e-10, "{x:?}");
    }
    let back = leaf_equilibrium_intersection(&s, &conserved_levels(&seven(), &[1.0; 7]).unwrap())
        .unwrap();
    assert!(back.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn newton_from_many_starts_agrees() {
    let s = seven_system();
    let f = Foliation::new(s.matrix());
    let leaf = Leaf { levels: vec![-0.4] };
    let reference = leaf_equilibrium_intersection(&s, &leaf).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let start: Vec<f64> = (0..7).map(|_| rng.gen_range(0.3..3.0)).collect();
        let x = f.intersect(&[1.0; 7], &leaf, Some(&start)).unwrap();
        for (a, b) in x.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn nonsingular_equilibria_set_is_q() {
    let s = LvSystem::with_unit_equilibrium(food_chain());
    assert!(equilibria_set(&s).directions.is_empty());
    let x = leaf_equilibrium_intersection(&s, &Leaf { levels: vec![] }).unwrap();
    assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-12));
}
