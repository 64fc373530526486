use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use qscc::algebra::{fixture, FIXTURES};
use qscc::cocycle::{check_cocycle_identity, markov_gram, matrix_element, exp_inner_product};
use qscc::convolution::{convolve, r_map, ConvolutionSemigroup, OperatorMap};
use qscc::derivations::{inner_derivation, solve_inner, DerivationProblem};
use qscc::generators::{check_conditionally_positive, check_structure_map, random_representation};
use qscc::harness::{
    build_group_generator, random_coboundary_data, random_step_function, random_structure_generator,
    solve_coboundary,
};
use qscc::linalg::{self, c};
use qscc::{Bialgebra, CayleyTable, Element};

fn random_map(b: &Bialgebra, rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> OperatorMap {
    OperatorMap::new(b, (0..b.dim()).map(|_| linalg::random_matrix(rng, rows, cols)).collect()).unwrap()
}

fn random_element(b: &Bialgebra, rng: &mut ChaCha20Rng) -> Element {
    Element::new(linalg::random_vector(rng, b.dim()))
}

fn setup(fix: usize, seed: u64) -> (Bialgebra, ChaCha20Rng) {
    (fixture(FIXTURES[fix]).unwrap(), ChaCha20Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn representation_is_a_star_homomorphism(fix in 0..FIXTURES.len(), seed: u64) {
        let (b, mut rng) = setup(fix, seed);
        let (x, y) = (random_element(&b, &mut rng), random_element(&b, &mut rng));
        let xy = b.represent(&b.multiply(&x, &y).unwrap()).unwrap();
        let prod = b.represent(&x).unwrap() * b.represent(&y).unwrap();
        prop_assert!(linalg::max_abs(&(xy - prod)) <= 1e-12);
        let xs = b.represent(&b.star(&x).unwrap()).unwrap();
        prop_assert!(linalg::max_abs(&(xs - b.represent(&x).unwrap().adjoint())) <= 1e-12);
    }

    #[test]
    fn convolution_is_associative(fix in 0..FIXTURES.len(), seed: u64) {
        let (b, mut rng) = setup(fix, seed);
        let p: Vec<_> = (0..3).map(|_| random_map(&b, &mut rng, 2, 2)).collect();
        let lhs = convolve(&b, &convolve(&b, &p[0], &p[1]).unwrap(), &p[2]).unwrap();
        let rhs = convolve(&b, &p[0], &convolve(&b, &p[1], &p[2]).unwrap()).unwrap();
        prop_assert!(lhs.max_diff(&rhs) <= 1e-11);
    }

    #[test]
    fn r_map_dominates_pointwise(fix in 0..FIXTURES.len(), seed: u64) {
        let (b, mut rng) = setup(fix, seed);
        let phi = random_map(&b, &mut rng, 2, 2);
        let r = r_map(&b, &phi).unwrap();
        let x = random_element(&b, &mut rng);
        let direct = linalg::op_norm(&phi.apply(&x).unwrap());
        let lifted = linalg::op_norm(&r.represent(&b, &x));
        prop_assert!(direct <= lifted + 1e-12, "{direct} > {lifted}");
    }

    #[test]
    fn r_map_commutes_with_adjoint(fix in 0..FIXTURES.len(), seed: u64) {
        let (b, mut rng) = setup(fix, seed);
        let phi = random_map(&b, &mut rng, 2, 3);
        let lhs = r_map(&b, &phi.adjoint(&b).unwrap()).unwrap();
        let rhs = r_map(&b, &phi).unwrap().adjoint(&b).unwrap();
        prop_assert!(lhs.max_diff(&rhs) <= 1e-11);
    }

    #[test]
    fn semigroup_law(fix in 0..FIXTURES.len(), seed: u64, s in 0.0..1.5f64, t in 0.0..1.5f64) {
        let (b, mut rng) = setup(fix, seed);
        let sg = ConvolutionSemigroup::new(&b, random_map(&b, &mut rng, 1, 1)).unwrap();
        let rhs = convolve(&b, &sg.at(s), &sg.at(t)).unwrap();
        prop_assert!(sg.at(s + t).max_diff(&rhs) <= 1e-10);
    }

    #[test]
    fn structure_maps_satisfy_the_relation(fix in 0..FIXTURES.len(), seed: u64) {
        let (b, mut rng) = setup(fix, seed);
        let phi = random_structure_generator(&b, &mut rng, 1.0).unwrap();
        prop_assert!(check_structure_map(&b, &phi).unwrap().max() <= 1e-12);
        prop_assert!(check_conditionally_positive(&b, &phi.corner()).unwrap().positive);
    }

    #[test]
    fn cocycle_identity(fix in 0..FIXTURES.len(), seed: u64, s in 0.0..0.8f64, t in 0.0..0.8f64) {
        let (b, mut rng) = setup(fix, seed);
        let phi = random_structure_generator(&b, &mut rng, 0.7).unwrap();
        let d = phi.d_noise();
        let f = random_step_function(&mut rng, d, 3, 2.0, 0.7).unwrap();
        let fp = random_step_function(&mut rng, d, 2, 2.0, 0.7).unwrap();
        prop_assert!(check_cocycle_identity(&b, &phi, s, t, &f, &fp).unwrap() <= 1e-9);
    }

    #[test]
    fn real_generators_give_real_cocycles(fix in 0..FIXTURES.len(), seed: u64, t in 0.1..1.5f64) {
        let (b, mut rng) = setup(fix, seed);
        let phi = random_structure_generator(&b, &mut rng, 0.7).unwrap();
        let d = phi.d_noise();
        let f = random_step_function(&mut rng, d, 2, 1.5, 0.7).unwrap();
        let fp = random_step_function(&mut rng, d, 3, 1.5, 0.7).unwrap();
        let x = random_element(&b, &mut rng);
        let xs = b.star(&x).unwrap();
        let lhs = matrix_element(&b, &phi, &xs, &f, &fp, t).unwrap();
        let rhs = matrix_element(&b, &phi, &x, &fp, &f, t).unwrap().conj();
        prop_assert!((lhs - rhs).norm() <= 1e-10);
        // unital: l_t(1) is the identity between exponential vectors
        let one = matrix_element(&b, &phi, &b.unit(), &f, &fp, t).unwrap();
        prop_assert!((one - exp_inner_product(&fp, &f, t).unwrap()).norm() <= 1e-10);
    }

    #[test]
    fn markov_states_are_positive(fix in 0..FIXTURES.len(), seed: u64, t in 0.0..2.0f64) {
        let (b, mut rng) = setup(fix, seed);
        let phi = random_structure_generator(&b, &mut rng, 1.0).unwrap();
        let lam = ConvolutionSemigroup::new(&b, phi.corner()).unwrap().at(t);
        let gram = markov_gram(&b, &lam).unwrap();
        prop_assert!(linalg::min_eigenvalue(&linalg::hermitian_part(&gram)) >= -1e-9);
        prop_assert!((lam.eval(&b.unit()).unwrap() - c(1.0, 0.0)).norm() <= 1e-10);
    }

    #[test]
    fn inner_derivations_are_recovered(fix in 0..FIXTURES.len(), seed: u64) {
        let (b, mut rng) = setup(fix, seed);
        let nb = b.representation().blocks.len();
        let (k1, k2) = (rng.random_range(0..nb), rng.random_range(0..nb));
        let pp = random_representation(&b, &mut rng, &[k1, k2]).unwrap();
        let pi = random_representation(&b, &mut rng, &[k2]).unwrap();
        let t = linalg::random_matrix(&mut rng, pp.rows(), pi.rows());
        let delta = inner_derivation(&b, &pp, &pi, &t).unwrap();
        let sol = solve_inner(&b, &DerivationProblem { pi_prime: pp, pi, delta }).unwrap();
        prop_assert!(sol.residual <= 1e-9);
    }

    #[test]
    fn group_cocycles_from_coboundaries(group in prop::sample::select(vec![
        "z2", "z3", "z4", "z5", "z6", "z7", "z8", "s3", "d4",
    ]), seed: u64) {
        let table = CayleyTable::named(group).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let nb = qscc::algebra::build_group_algebra(&table).unwrap().representation().blocks.len();
        let blocks: Vec<usize> = (0..2).map(|_| rng.random_range(0..nb)).collect();
        let (mut data, _) = random_coboundary_data(&table, &mut rng, &blocks).unwrap();
        // scramble the noise basis; validity is basis independent
        let w = linalg::random_unitary(&mut rng, data.d_noise());
        data.u = data.u.iter().map(|u| &w * u * w.adjoint()).collect();
        data.xi = data.xi.iter().map(|x| &w * x).collect();
        prop_assert!(data.validate().unwrap().max() <= 1e-10);
        prop_assert!(build_group_generator(&data).unwrap().relation_residual <= 1e-10);
        let sol = solve_coboundary(&data).unwrap();
        prop_assert!(sol.xi_residual <= 1e-9 && sol.lambda_residual <= 1e-9);
    }
}

#[test]
fn function_algebra_counit_is_evaluation_at_identity() {
    for name in FIXTURES.iter().filter(|n| n.starts_with("c_")) {
        let b = fixture(name).unwrap();
        for i in 0..b.dim() {
            let expected = if i == 0 { 1.0 } else { 0.0 };
            assert_eq!(b.counit()[i], c(expected, 0.0), "{name}");
        }
    }
}

#[test]
fn convolution_submultiplicative_at_fixed_level() {
    use qscc::convolution::{amplified_norm, NormSearch};
    let search = NormSearch { seeds: 6, iterations: 60, ..NormSearch::default() };
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    for name in ["c_z3", "cg_s3"] {
        let b = fixture(name).unwrap();
        for _ in 0..2 {
            let p1 = random_map(&b, &mut rng, 2, 2);
            let p2 = random_map(&b, &mut rng, 2, 2);
            let n12 = amplified_norm(&b, &convolve(&b, &p1, &p2).unwrap(), 1, &search).unwrap();
            let n1 = amplified_norm(&b, &p1, 1, &search).unwrap();
            let n2 = amplified_norm(&b, &p2, 1, &search).unwrap();
            assert!(n12.value <= n1.value * n2.value + 1e-6, "{name}: {n12:?} {n1:?} {n2:?}");
        }
    }
}

#[test]
fn perturbed_group_cocycle_is_rejected() {
    let table = CayleyTable::dihedral4();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let (mut data, _) = random_coboundary_data(&table, &mut rng, &[4]).unwrap();
    data.lambda[2] += 1e-7;
    assert!(build_group_generator(&data).is_err());
}
