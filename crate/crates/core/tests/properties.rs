use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use gasym_core::coherence::{cyclic_equivalence_check, l1_coherence};
use gasym_core::decompose::{component_norms, isotypic_projectors, IsotypicDecomposition};
use gasym_core::discrimination::{
    build_covariant_povm, covariantize_povm, orbit, solve_min_error, success_probability_pure, twirl, Povm,
};
use gasym_core::duality::{build_tagged_state, default_unit_components, duality_report, TagEnsemble};
use gasym_core::groups::{cyclic_group, dihedral_group, direct_sum_rep, GroupWithIrreps, Representation};
use gasym_core::numerics::{hermitian_eigensystem, kron, psd_sqrt, CMatrix, C64};
use gasym_core::random::{
    random_density, random_hermitian, random_matrix, random_povm_elements, random_unit_vector, sample_rng,
};

fn group(kind: u8) -> Arc<GroupWithIrreps> {
    Arc::new(match kind % 7 {
        0 => dihedral_group(3).unwrap(),
        1 => dihedral_group(5).unwrap(),
        k => cyclic_group(k as usize).unwrap(),
    })
}

/// Random subset of irreps of the chosen group, in a random basis.
fn random_mf(kind: u8, seed: u64) -> (IsotypicDecomposition, rand_chacha::ChaCha20Rng) {
    let g = group(kind);
    let mut rng = sample_rng(seed, 0);
    let mut labels = g.labels();
    labels.shuffle(&mut rng);
    let keep = rng.random_range(1..=labels.len());
    labels.truncate(keep);
    let rep = direct_sum_rep(g.clone(), &labels).unwrap();
    let v = hermitian_eigensystem(&random_hermitian(&mut rng, rep.dim())).unwrap().eigenvectors;
    let rotated = rep.matrices().iter().map(|m| m.conjugate_by(&v)).collect();
    let dec = isotypic_projectors(&Representation::from_matrices(g, rotated).unwrap()).unwrap();
    (dec, rng)
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn orbit_ps(rep: &Representation, rho: &CMatrix) -> f64 {
    solve_min_error(&orbit(rep, rho), &uniform(rep.group().order())).unwrap().success_probability
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_reconstruction(seed in any::<u64>(), dim in 1usize..=10) {
        let m = random_hermitian(&mut sample_rng(seed, 0), dim);
        let es = hermitian_eigensystem(&m).unwrap();
        prop_assert!(es.reconstruct().max_abs_diff(&m) <= 1e-10);
        prop_assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn psd_sqrt_squares_back(seed in any::<u64>(), dim in 1usize..=8) {
        let a = random_matrix(&mut sample_rng(seed, 0), dim, dim);
        let m = (&a.adjoint() * &a).hermitian_part();
        let r = psd_sqrt(&m).unwrap();
        prop_assert!((&r * &r).max_abs_diff(&m) <= 1e-9);
    }

    #[test]
    fn kron_associative_on_integers(entries in proptest::collection::vec(-5i32..=5, 3 * 8), shape in (1usize..=2, 1usize..=2, 1usize..=2)) {
        let (p, q, r) = shape;
        let mk = |off: usize, rows: usize, cols: usize| {
            CMatrix::from_fn(rows, cols, |i, j| C64::new(entries[off + i * cols + j] as f64, entries[off + 4 + i * cols + j] as f64))
        };
        let (a, b, c) = (mk(0, p, q), mk(8, q, r), mk(16, r, p));
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert_eq!(left.max_abs_diff(&right), 0.0);
    }

    #[test]
    fn kron_trace_factorizes(seed in any::<u64>(), da in 1usize..=4, db in 1usize..=4) {
        let mut rng = sample_rng(seed, 0);
        let a = random_hermitian(&mut rng, da);
        let b = random_hermitian(&mut rng, db);
        prop_assert!((kron(&a, &b).trace() - a.trace() * b.trace()).norm() <= 1e-12);
    }

    #[test]
    fn averaging_identity(kind in any::<u8>(), seed in any::<u64>()) {
        let (dec, mut rng) = random_mf(kind, seed);
        let d = dec.rep().dim();
        let x = random_matrix(&mut rng, d, 1).column(0);
        let lhs = twirl(dec.rep(), &CMatrix::projector(&x));
        let mut rhs = CMatrix::zeros(d, d);
        for c in dec.components() {
            rhs += &c.projector.scale_real(c.projector.mul_vec(&x).norm_sqr() / c.irrep_dim as f64);
        }
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10);
    }

    #[test]
    fn component_norms_square_sum_to_one(kind in any::<u8>(), seed in any::<u64>()) {
        let (dec, mut rng) = random_mf(kind, seed);
        let phi = random_unit_vector(&mut rng, dec.rep().dim());
        let total: f64 = component_norms(&dec, &phi).unwrap().iter().map(|(_, n)| n * n).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn covariant_seeds_obey_bound_and_trace(kind in any::<u8>(), seed in any::<u64>()) {
        let (dec, mut rng) = random_mf(kind, seed);
        let d = dec.rep().dim();
        let order = dec.group_order();
        let phi = random_unit_vector(&mut rng, d);
        let bound = success_probability_pure(&dec, &phi).unwrap();
        let phases: Vec<f64> = dec.components().iter().map(|_| rng.random_range(0.0..6.3)).collect();
        let built = build_covariant_povm(&dec, &random_unit_vector(&mut rng, d), &phases).unwrap();
        let povm = Povm::new(random_povm_elements(&mut rng, d, order)).unwrap();
        let covariant = covariantize_povm(dec.rep(), &povm).unwrap();
        for seed_op in [built.seed(), covariant.seed()] {
            prop_assert!(seed_op.sandwich(&phi, &phi).re <= bound + 1e-9);
            for c in dec.components() {
                let tr = c.projector.trace_product(seed_op).re;
                prop_assert!((tr - c.irrep_dim as f64 / order as f64).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn covariantization_preserves_success(kind in any::<u8>(), seed in any::<u64>()) {
        let (dec, mut rng) = random_mf(kind, seed);
        let d = dec.rep().dim();
        let order = dec.group_order();
        let rank = rng.random_range(1..=d);
        let rho = random_density(&mut rng, d, rank);
        let povm = Povm::new(random_povm_elements(&mut rng, d, order)).unwrap();
        let before = povm.success_probability(&orbit(dec.rep(), &rho), &uniform(order));
        let cov = covariantize_povm(dec.rep(), &povm).unwrap();
        prop_assert!((cov.orbit_success(&rho) - before).abs() <= 1e-10);
        prop_assert!(cov.completeness_error() <= 1e-9);
    }

    #[test]
    fn cyclic_coherence_identity(n in 2usize..=8, seed in any::<u64>()) {
        let phi = random_unit_vector(&mut sample_rng(seed, 0), n);
        let r = cyclic_equivalence_check(n, &phi).unwrap();
        prop_assert!(r.ratio_check.abs() <= 1e-10);
        prop_assert!(r.c_l1 >= 0.0 && r.c_l1 <= n as f64 - 1.0 + 1e-12);
    }

    #[test]
    fn coherence_phase_invariant(n in 2usize..=8, seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 0);
        let rho = random_density(&mut rng, n, n);
        let phases: Vec<C64> = (0..n).map(|_| C64::from_polar(1.0, rng.random_range(0.0..6.3))).collect();
        let moved = rho.conjugate_by(&CMatrix::diag(&phases)).hermitian_part();
        prop_assert!((l1_coherence(&moved, n).unwrap() - l1_coherence(&rho, n).unwrap()).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_matches_closed_form(kind in any::<u8>(), seed in any::<u64>()) {
        let (dec, mut rng) = random_mf(kind, seed);
        let phi = random_unit_vector(&mut rng, dec.rep().dim());
        let closed = success_probability_pure(&dec, &phi).unwrap();
        let r = solve_min_error(&orbit(dec.rep(), &CMatrix::projector(&phi)), &uniform(dec.group_order())).unwrap();
        prop_assert!((r.success_probability - closed).abs() <= 1e-6);
        if r.converged {
            prop_assert!(r.certificate_floor >= -1e-7);
        }
    }

    #[test]
    fn twirl_mixtures_never_help(kind in any::<u8>(), seed in any::<u64>()) {
        let (dec, mut rng) = random_mf(kind, seed);
        let d = dec.rep().dim();
        let rank = rng.random_range(1..=2);
        let rho = random_density(&mut rng, d, rank);
        let base = orbit_ps(dec.rep(), &rho);
        let tw = twirl(dec.rep(), &rho);
        for lambda in [0.25, 0.5, 0.75, 1.0] {
            let mixed = (&tw.scale_real(lambda) + &rho.scale_real(1.0 - lambda)).hermitian_part();
            prop_assert!(orbit_ps(dec.rep(), &mixed) <= base + 1e-6);
        }
    }

    #[test]
    fn success_is_convex(kind in any::<u8>(), seed in any::<u64>(), terms in 2usize..=3) {
        let (dec, mut rng) = random_mf(kind, seed);
        let d = dec.rep().dim();
        let weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut mixture = CMatrix::zeros(d, d);
        let mut average = 0.0;
        for w in weights {
            let rho = random_density(&mut rng, d, 1);
            mixture += &rho.scale_real(w / total);
            average += w / total * orbit_ps(dec.rep(), &rho);
        }
        prop_assert!(orbit_ps(dec.rep(), &mixture.hermitian_part()) <= average + 1e-6);
    }

    #[test]
    fn duality_inequality_and_order_chain(kind in any::<u8>(), seed in any::<u64>(), amb in 1usize..=5) {
        let g = group(kind);
        prop_assume!(g.irreps().len() >= 2);
        let dec = isotypic_projectors(&direct_sum_rep(g.clone(), &g.labels()).unwrap()).unwrap();
        let n = dec.components().len();
        let tags = TagEnsemble::random(&mut sample_rng(seed, 0), n, amb);
        let r = duality_report(&build_tagged_state(&dec, default_unit_components(&dec), tags).unwrap()).unwrap();
        prop_assert!(r.slack >= -1e-9, "slack {}", r.slack);
        prop_assert!(r.d_baseline - 1e-9 <= r.p_ug_achieved && r.p_ug_achieved <= r.p_ug_bound + 1e-9);
        prop_assert!(1.0 / n as f64 - 1e-9 <= r.p_hp_achieved && r.p_hp_achieved <= r.p_hp_bound + 1e-9);
    }
}
