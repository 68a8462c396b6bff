mod common;

use common::*;
use lvstab::certify::{
    find_certificate, is_stably_dissipative, scaled_form, verify_certificate,
};
use lvstab::dynamics::{integrate, tail_oscillation, vector_field_exact, Monitors};
use lvstab::foliation::{
    conserved_levels, equilibria_set, exact_rank, kernel_basis, kernel_basis_t,
    kernel_transport_holds, leaf_equilibrium_intersection, Foliation,
};
use lvstab::genlab::{perturb, sample_matrix};
use lvstab::graph::build_graph;
use lvstab::linalg;
use lvstab::model::{system_from_rates, GrowthRates, MatrixDocument};
use lvstab::reduction::{
    reduce_full, reduce_full_random, reduce_simplified, reduce_simplified_random,
    AttractorClass, Mark,
};
use lvstab::trim::{effective_endpoints, graph_rank, trim_graph, trim_matrix, trim_to_core_with};
use lvstab::{CertifyOutcome, InteractionMatrix, LvSystem, Matrix, Rational};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arbitrary_matrix(seed: u64, n: usize) -> InteractionMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            if rng.gen_bool(0.5) {
                Rational::zero()
            } else {
                -int(rng.gen_range(1..4))
            }
        } else if rng.gen_bool(0.4) {
            Rational::new(rng.gen_range(-4i64..=4).into(), rng.gen_range(1i64..=3).into())
        } else {
            Rational::zero()
        }
    })
}

fn positive_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|_| Rational::new(rng.gen_range(1i64..=9).into(), rng.gen_range(1i64..=4).into()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn document_round_trip(seed in any::<u64>(), n in 1usize..6) {
        let a = arbitrary_matrix(seed, n);
        let doc = MatrixDocument { matrix: a.clone(), q: None, r: None };
        let back = MatrixDocument::parse(&doc.render()).unwrap();
        prop_assert_eq!(back.matrix, a);
    }

    #[test]
    fn rates_round_trip(seed in any::<u64>()) {
        let (cfg, g) = varied_graph(seed, 8);
        let a = sample_matrix(&g, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = positive_vector(&mut rng, g.n());
        let r: Vec<Rational> = a.mul_vec(&q).into_iter().map(|v| -v).collect();
        let sys = system_from_rates(&a, &GrowthRates(r.clone())).unwrap();
        let again: Vec<Rational> = a.mul_vec(sys.equilibrium()).into_iter().map(|v| -v).collect();
        prop_assert_eq!(again, r);
    }

    #[test]
    fn graph_is_symmetric(seed in any::<u64>(), n in 1usize..7) {
        let a = arbitrary_matrix(seed, n);
        prop_assert_eq!(build_graph(&a).unwrap(), build_graph(&a.transpose()).unwrap());
    }

    #[test]
    fn edge_removal_keeps_stable_dissipativity(seed in any::<u64>()) {
        let (_, g) = varied_graph(seed, 10);
        for (i, j) in g.edges() {
            let mut h = g.clone();
            h.remove_edge(i, j);
            prop_assert!(h.is_stably_dissipative());
        }
    }

    #[test]
    fn generated_graphs_pass_the_cycle_oracle(seed in any::<u64>()) {
        let (_, g) = varied_graph(seed, 8);
        prop_assert!(g.is_stably_dissipative());
        prop_assert!(brute_force_every_cycle_strong(&g));
    }

    #[test]
    fn reductions_terminate_and_nest(seed in any::<u64>()) {
        let (_, g) = varied_graph(seed, 10);
        let full = reduce_full(&g);
        let simplified = reduce_simplified(&g);
        prop_assert!(full.applications() <= 2 * g.n());
        prop_assert!(simplified.applications() <= 2 * g.n());
        for v in full.with_mark(Mark::Bullet) {
            prop_assert_eq!(simplified.mark(v), Mark::Bullet);
        }
    }

    #[test]
    fn reductions_are_confluent(seed in any::<u64>()) {
        let (_, g) = varied_graph(seed, 8);
        let full = reduce_full(&g).marks().to_vec();
        let simplified = reduce_simplified(&g).marks().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let f = reduce_full_random(&g, &mut rng);
            prop_assert_eq!(f.marks(), &full[..]);
            let s = reduce_simplified_random(&g, &mut rng);
            prop_assert_eq!(s.marks(), &simplified[..]);
        }
    }

    #[test]
    fn bullets_are_fixed_on_equilibria(seed in any::<u64>()) {
        let (cfg, g) = varied_graph(seed, 9);
        let bullets = reduce_simplified(&g).with_mark(Mark::Bullet);
        let all_bullet = bullets.len() == g.n();
        for k in 0..5 {
            let a = sample_matrix(&g, &cfg.with_seed(seed.wrapping_add(k))).unwrap();
            for v in kernel_basis(&a).vectors {
                for &b in &bullets {
                    prop_assert!(v[b].is_zero());
                }
            }
            prop_assert_eq!(all_bullet, exact_rank(&a) == g.n());
        }
    }

    #[test]
    fn equilibria_are_exact_fixed_points(seed in any::<u64>()) {
        let (cfg, g) = varied_graph(seed, 8);
        let a = sample_matrix(&g, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = positive_vector(&mut rng, g.n());
        let sys = LvSystem::new(a, q).unwrap();
        let e = equilibria_set(&sys);
        for _ in 0..5 {
            let coeffs: Vec<Rational> = (0..e.directions.dim())
                .map(|_| Rational::new(rng.gen_range(-3i64..=3).into(), 50.into()))
                .collect();
            let x = e.point(&coeffs);
            if x.iter().all(|v| *v > Rational::zero()) {
                prop_assert!(vector_field_exact(&sys, &x).unwrap().iter().all(Zero::is_zero));
            }
        }
    }

    #[test]
    fn rank_is_independent_of_trim_order(seed in any::<u64>()) {
        let (_, g) = varied_graph(seed, 10);
        let reference = graph_rank(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let r = trim_to_core_with(&g, |c| rng.gen_range(0..c.len())).unwrap();
            prop_assert_eq!(r.rank, reference);
        }
    }

    #[test]
    fn trims_preserve_structure_and_rank(seed in any::<u64>()) {
        let (cfg, g) = varied_graph(seed, 10);
        let a = sample_matrix(&g, &cfg).unwrap();
        let rank = exact_rank(&a);
        for i in effective_endpoints(&g) {
            let tg = trim_graph(&g, i).unwrap();
            prop_assert!(tg.is_stably_dissipative());
            let ta = trim_matrix(&a, i).unwrap();
            prop_assert_eq!(build_graph(&ta).unwrap(), tg);
            prop_assert_eq!(exact_rank(&ta), rank);
        }
    }

    #[test]
    fn main_theorem_small(seed in any::<u64>()) {
        let (cfg, g) = varied_graph(seed, 10);
        let expected = graph_rank(&g).unwrap();
        let eps = Rational::new(1.into(), 10.into());
        for k in 0..20 {
            let a = sample_matrix(&g, &cfg.with_seed(seed.wrapping_mul(31).wrapping_add(k))).unwrap();
            prop_assert_eq!(exact_rank(&a), expected);
            prop_assert_eq!(linalg::rank(&a), expected);
            let p = perturb(&a, &eps, seed ^ k).unwrap();
            prop_assert!(p.same_pattern(&a));
            prop_assert_eq!(exact_rank(&p), expected);
        }
    }

    #[test]
    fn certificates_verify_and_transport(seed in any::<u64>()) {
        let (cfg, g) = varied_graph(seed, 10);
        let a = sample_matrix(&g, &cfg).unwrap();
        let outcome = is_stably_dissipative(&a);
        let c = outcome.certificate().expect("samples certify").clone();
        prop_assert!(verify_certificate(&a, &c));
        let lambda = Rational::new(7.into(), 3.into());
        prop_assert!(verify_certificate(&a, &c.scaled(&lambda)));
        prop_assert!(kernel_transport_holds(&a, c.values()));
    }

    #[test]
    fn outcomes_on_arbitrary_matrices_are_honest(seed in any::<u64>(), n in 1usize..6) {
        let a = arbitrary_matrix(seed, n);
        match find_certificate(&a) {
            CertifyOutcome::Certified(c) => {
                prop_assert!(verify_certificate(&a, &c));
                prop_assert!(kernel_transport_holds(&a, c.values()));
            }
            CertifyOutcome::RefutedAlgebra { candidate, witness, .. } => {
                prop_assert!(scaled_form(&a, &candidate, &witness) > Rational::zero());
            }
            CertifyOutcome::RefutedGraph(_) | CertifyOutcome::Unknown(_) => {}
        }
    }

    #[test]
    fn kernels_are_exact(seed in any::<u64>(), n in 1usize..7) {
        let a = arbitrary_matrix(seed, n);
        let rank = exact_rank(&a);
        prop_assert_eq!(rank, linalg::rank(&a));
        let k = kernel_basis(&a);
        let kt = kernel_basis_t(&a);
        prop_assert_eq!(k.dim() + rank, n);
        prop_assert_eq!(kt.dim() + rank, n);
        for v in &k.vectors {
            prop_assert!(a.mul_vec(v).iter().all(Zero::is_zero));
        }
        for w in &kt.vectors {
            prop_assert!(a.vec_mul(w).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn foliation_coordinates_are_complete(seed in any::<u64>()) {
        let (cfg, g) = varied_graph(seed, 10);
        let a = sample_matrix(&g, &cfg).unwrap();
        let f = Foliation::new(&a);
        let mut stacked = f.w.vectors.clone();
        stacked.extend(f.v.iter().cloned());
        prop_assert_eq!(exact_rank(&Matrix::from_rows(stacked).unwrap()), g.n());
        prop_assert_eq!(f.dimension(), exact_rank(&a));
    }

    #[test]
    fn leaf_point_is_unique(seed in any::<u64>()) {
        let (cfg, g) = varied_graph(seed, 7);
        let a = sample_matrix(&g, &cfg).unwrap();
        let sys = LvSystem::with_unit_equilibrium(a.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let through: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(0.5..2.0)).collect();
        let leaf = conserved_levels(&a, &through).unwrap();
        let reference = leaf_equilibrium_intersection(&sys, &leaf).unwrap();
        let f = Foliation::new(&a);
        for _ in 0..20 {
            let start: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(0.3..3.0)).collect();
            let x = f.intersect(&vec![1.0; g.n()], &leaf, Some(&start)).unwrap();
            for (u, v) in x.iter().zip(&reference) {
                prop_assert!((u - v).abs() < 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lyapunov_is_monotone(seed in any::<u64>()) {
        let (cfg, g) = varied_graph(seed, 8);
        let a = sample_matrix(&g, &cfg).unwrap();
        let c = is_stably_dissipative(&a).certificate().unwrap().clone();
        let sys = LvSystem::with_unit_equilibrium(a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(0.3..3.0)).collect();
        let m = Monitors { certificate: Some(c), ..Monitors::default() };
        let t = integrate(&sys, &x0, 5.0, 1e-3, &m).unwrap();
        prop_assert!(t.states.iter().all(|x| x.iter().all(|v| *v > 0.0)));
        prop_assert!(t.h.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        prop_assert!(t.hdot.iter().all(|v| *v <= 1e-9));
    }
}

/// Graphs whose full reduction ends in bullets and crosses only.
fn foliated_cases() -> Vec<(u64, lvstab::genlab::GenConfig)> {
    (0..400u64)
        .filter_map(|seed| {
            let (cfg, g) = varied_graph(seed, 6);
            let full = reduce_full(&g);
            (full.classify() == AttractorClass::FoliatedPointAttractors && g.n() >= 2)
                .then_some((seed, cfg))
        })
        .take(8)
        .collect()
}

#[test]
fn foliated_systems_converge_within_their_leaf() {
    let cases = foliated_cases();
    assert!(!cases.is_empty());
    for (seed, cfg) in cases {
        let g = lvstab::genlab::random_sd_graph(&cfg).unwrap();
        let a = sample_matrix(&g, &cfg).unwrap();
        let sys = LvSystem::with_unit_equilibrium(a.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(0.5..2.0)).collect();
        let m = Monitors { record_every: 10, ..Monitors::default() };
        let t = integrate(&sys, &x0, 400.0, 1e-3, &m).unwrap();
        assert!(tail_oscillation(&t, 0.1) < 1e-6, "seed {seed}");
        let leaf = conserved_levels(&a, &x0).unwrap();
        let target = leaf_equilibrium_intersection(&sys, &leaf).unwrap();
        for (u, v) in t.last_state().iter().zip(&target) {
            assert!((u - v).abs() < 1e-6, "seed {seed}: {:?} vs {target:?}", t.last_state());
        }
    }
}

#[test]
fn unit_scaling_is_admissible_for_plain_samples() {
    for seed in (0..200u64).filter(|s| s % 2 == 0) {
        let (cfg, g) = varied_graph(seed, 9);
        let a = sample_matrix(&g, &cfg).unwrap();
        assert!(verify_certificate(&a, &lvstab::Certificate::ones(g.n())));
    }
}

#[test]
fn thousand_generated_samples_certify() {
    for seed in 0..1000u64 {
        let (cfg, g) = varied_graph(seed + 50_000, 12);
        assert!(g.is_stably_dissipative());
        let a = sample_matrix(&g, &cfg).unwrap();
        assert_eq!(build_graph(&a).unwrap(), g);
        assert!(is_stably_dissipative(&a).is_certified(), "seed {}", seed + 50_000);
    }
}
