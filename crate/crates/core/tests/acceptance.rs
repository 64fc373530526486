//! Acceptance criteria. Each test prints one `criterion N PASS|FAIL` line;
//! run with `-- --nocapture --test-threads=1` to see them in order.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use qscc::algebra::{build_function_algebra, fixture, FIXTURES};
use qscc::cocycle::{
    check_cocycle_identity, exp_inner_product, markov_gram, matrix_element, simplex_series_oracle,
    toy_fock_evolve, Generator, StepFunction, TOY_FOCK_MEMORY_CAP,
};
use qscc::convolution::{conv_exp, convolve, e_map, r_map, Functional, OperatorMap};
use qscc::derivations::{
    character_defect, check_derivation, derivation_space_dimension, implement_chi_structure,
    implemented_chi_structure, inner_derivation, solve_inner, DerivationProblem,
};
use qscc::generators::{
    check_minimality, check_phi1, check_structure_map, classify, gns_construct, intertwine_minimal,
    make_cp_generator, make_structure_map, random_representation, CPQuadruple,
};
use qscc::harness::{
    compound_poisson_law, random_step_function, random_structure_generator, run_report, Battery,
    RunConfig,
};
use qscc::linalg::{self, c, CMatrix, CVector, C64};
use qscc::{Bialgebra, CayleyTable, Element, Tolerances};

fn verdict(n: u32, title: &str, pass: bool, detail: String) -> bool {
    println!("criterion {n:>2} {}: {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn random_map(b: &Bialgebra, rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> OperatorMap {
    OperatorMap::new(b, (0..b.dim()).map(|_| linalg::random_matrix(rng, rows, cols)).collect()).unwrap()
}

fn random_element(b: &Bialgebra, rng: &mut ChaCha20Rng) -> Element {
    Element::new(linalg::random_vector(rng, b.dim()))
}

fn random_blocks(b: &Bialgebra, rng: &mut ChaCha20Rng, count: usize) -> Vec<usize> {
    let nb = b.representation().blocks.len();
    (0..count).map(|_| rng.random_range(0..nb)).collect()
}

/// One-dimensional blocks of the faithful representation, as character values.
fn characters(b: &Bialgebra) -> Vec<CVector> {
    let rep = b.representation();
    (0..rep.blocks.len())
        .filter(|&k| rep.blocks[k] == 1)
        .map(|k| CVector::from_fn(b.dim(), |i, _| rep.block_of(&rep.images[i], k)[(0, 0)]))
        .collect()
}

#[test]
fn criterion_01_axiom_suite() {
    let start = Instant::now();
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for name in FIXTURES {
        let b = fixture(name).unwrap();
        for check in b.data().axiom_report(&tol) {
            worst = worst.max(check.residual);
            if !check.passed || check.residual > 1e-12 {
                failures.push(format!("{name}: {check:?}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(5);
    verdict(
        1,
        "axiom suite",
        pass,
        format!("{} fixtures, max residual {worst:.2e}, {:.2}s", FIXTURES.len(), elapsed.as_secs_f64()),
    );
    assert!(pass, "{failures:?} in {elapsed:?}");
}

#[test]
fn criterion_02_lift_identities() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for name in FIXTURES {
        let b = fixture(name).unwrap();
        for _ in 0..100 {
            let (p, q, r) = (rng.random_range(1..4), rng.random_range(1..4), rng.random_range(1..4));
            let phi1 = random_map(&b, &mut rng, p, q);
            let phi2 = random_map(&b, &mut rng, q, r);
            let r1 = r_map(&b, &phi1).unwrap();
            let r2 = r_map(&b, &phi2).unwrap();
            worst = worst.max(e_map(&b, &r1).unwrap().max_diff(&phi1));
            let lhs = r_map(&b, &convolve(&b, &phi1, &phi2).unwrap()).unwrap();
            worst = worst.max(lhs.max_diff(&r1.compose(&b, &r2).unwrap()));
            let adj = r_map(&b, &phi1.adjoint(&b).unwrap()).unwrap();
            worst = worst.max(adj.max_diff(&r1.adjoint(&b).unwrap()));
        }
    }
    let pass = worst <= 1e-11;
    verdict(2, "R/E-map identities", pass, format!("100 map pairs per fixture, max residual {worst:.2e}"));
    assert!(pass);
}

#[test]
fn criterion_03_semigroup_law_and_generator_recovery() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut law = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for name in FIXTURES {
        let b = fixture(name).unwrap();
        let gamma = Functional::functional(&b, &(linalg::random_vector(&mut rng, b.dim()) * c(0.5, 0.0))).unwrap();
        for _ in 0..20 {
            let (s, t) = (rng.random_range(0.0..1.5), rng.random_range(0.0..1.5));
            let lhs = conv_exp(&b, &gamma, s + t).unwrap();
            let rhs = convolve(&b, &conv_exp(&b, &gamma, s).unwrap(), &conv_exp(&b, &gamma, t).unwrap()).unwrap();
            law = law.max(lhs.max_diff(&rhs));
        }
        let errors: Vec<f64> = (0..6)
            .map(|k| {
                let h = 0.1 / f64::from(1u32 << k);
                let quotient = conv_exp(&b, &gamma, h)
                    .unwrap()
                    .sub(&OperatorMap::counit(&b))
                    .unwrap()
                    .scale(c(1.0 / h, 0.0));
                quotient.max_diff(&gamma)
            })
            .collect();
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    let pass = law <= 1e-10 && lo >= 1.6 && hi <= 2.4;
    verdict(
        3,
        "semigroup law and generator recovery",
        pass,
        format!("law residual {law:.2e}, halving ratios in [{lo:.3}, {hi:.3}]"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_cocycle_identity_and_series_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let mut identity = 0.0f64;
    let mut oracle_excess = f64::NEG_INFINITY;
    let mut cases = 0;
    for name in FIXTURES {
        let b = fixture(name).unwrap();
        for _ in 0..100 {
            let phi = random_structure_generator(&b, &mut rng, 0.7).unwrap();
            let d = phi.d_noise();
            let f = random_step_function(&mut rng, d, 3, 2.0, 0.7).unwrap();
            let fp = random_step_function(&mut rng, d, 2, 2.0, 0.7).unwrap();
            let (s, t) = (rng.random_range(0.0..0.9), rng.random_range(0.0..0.9));
            identity = identity.max(check_cocycle_identity(&b, &phi, s, t, &f, &fp).unwrap());
            cases += 1;
        }
        for _ in 0..10 {
            let phi = random_structure_generator(&b, &mut rng, 0.5).unwrap();
            let d = phi.d_noise();
            let f = random_step_function(&mut rng, d, 2, 1.0, 0.5).unwrap();
            let fp = random_step_function(&mut rng, d, 2, 1.0, 0.5).unwrap();
            let t = rng.random_range(0.1..=1.0);
            let x = random_element(&b, &mut rng);
            let exact = matrix_element(&b, &phi, &x, &f, &fp, t).unwrap();
            let series = simplex_series_oracle(&b, &phi, &x, &f, &fp, t, 4, true).unwrap();
            oracle_excess = oracle_excess.max((series.value - exact).norm() - series.tail_bound);
        }
    }
    let pass = identity <= 1e-9 && oracle_excess <= 1e-9;
    verdict(
        4,
        "cocycle identity and simplex-series oracle",
        pass,
        format!("{cases} cases, max residual {identity:.2e}; oracle excess over tail bound {oracle_excess:.2e}"),
    );
    assert!(pass);
}

/// `φ + ε(·) m`.
fn shifted(b: &Bialgebra, phi: &Generator, m: &CMatrix) -> Generator {
    Generator::new(phi.map().add(&OperatorMap::counit_times(b, m)).unwrap()).unwrap()
}

/// `|M(x*, f, f′) − conj M(x, f′, f)|`.
fn reality_gap(b: &Bialgebra, phi: &Generator, x: &Element, f: &StepFunction, fp: &StepFunction, t: f64) -> f64 {
    let lhs = matrix_element(b, phi, &b.star(x).unwrap(), f, fp, t).unwrap();
    let rhs = matrix_element(b, phi, x, fp, f, t).unwrap().conj();
    (lhs - rhs).norm()
}

/// `|M(1, f, f′) − ⟨ε(f′), ε(f)⟩|`.
fn unitality_gap(b: &Bialgebra, phi: &Generator, f: &StepFunction, fp: &StepFunction, t: f64) -> f64 {
    let one = matrix_element(b, phi, &b.unit(), f, fp, t).unwrap();
    (one - exp_inner_product(fp, f, t).unwrap()).norm()
}

#[test]
fn criterion_05_structure_maps_gns_and_predicates() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut structure = 0.0f64;
    let mut vacuum = 0.0f64;
    let mut gns = 0.0f64;
    let mut predicates_agree = true;
    let mut holding = 0.0f64;
    let mut broken = f64::INFINITY;
    for name in FIXTURES {
        let b = fixture(name).unwrap();
        for _ in 0..5 {
            let blocks = random_blocks(&b, &mut rng, 2);
            let pi = random_representation(&b, &mut rng, &blocks).unwrap();
            let cvec = linalg::random_vector(&mut rng, pi.rows());
            let phi = make_structure_map(&b, &pi, &cvec).unwrap();
            structure = structure.max(check_structure_map(&b, &phi).unwrap().max());

            // GNS on the corner, compared along the cocycle vacuum route
            let gamma = phi.corner();
            let (triple, rebuilt) = gns_construct(&b, &gamma, None).unwrap();
            gns = gns
                .max(triple.residuals(&b).unwrap().max())
                .max(check_structure_map(&b, &rebuilt).unwrap().max());
            let zero = StepFunction::zero(rebuilt.d_noise(), 2.0).unwrap();
            for k in 0..=20 {
                let t = 0.1 * f64::from(k);
                let lam = conv_exp(&b, &gamma, t).unwrap();
                for i in 0..b.dim() {
                    let x = b.basis(i);
                    let via_cocycle = if k == 0 {
                        b.counit()[i]
                    } else {
                        matrix_element(&b, &rebuilt, &x, &zero, &zero, t).unwrap()
                    };
                    vacuum = vacuum.max((via_cocycle - lam.eval(&x).unwrap()).norm());
                }
            }

            // unitality iff φ(1) = 0, reality iff φ(x*) = φ(x)†
            let d = phi.d_noise();
            let f = random_step_function(&mut rng, d, 2, 1.0, 0.6).unwrap();
            let fp = random_step_function(&mut rng, d, 2, 1.0, 0.6).unwrap();
            let x = random_element(&b, &mut rng);
            let t = 0.8;
            let mut e00 = CMatrix::zeros(d + 1, d + 1);
            e00[(0, 0)] = c(1.0, 0.0);
            let non_unital = shifted(&b, &phi, &(&e00 * c(-0.4, 0.0)));
            let non_real = shifted(&b, &phi, &(&e00 * c(0.0, 0.4)));
            for (g, unital, real) in [(&phi, true, true), (&non_unital, false, true), (&non_real, false, false)] {
                let class = classify(&b, g, 1e-10).unwrap();
                predicates_agree &= class.unital_corner == unital && class.real == real;
                let (u, r) = (unitality_gap(&b, g, &f, &fp, t), reality_gap(&b, g, &x, &f, &fp, t));
                if unital {
                    holding = holding.max(u);
                } else {
                    broken = broken.min(u);
                }
                if real {
                    holding = holding.max(r);
                } else {
                    broken = broken.min(r);
                }
            }
        }
    }
    let pass = structure <= 1e-12 && gns <= 1e-9 && vacuum <= 1e-9 && predicates_agree && holding <= 1e-10 && broken > 1e-6;
    verdict(
        5,
        "structure maps, GNS loop, unitality and reality",
        pass,
        format!(
            "structure {structure:.2e}, GNS triple {gns:.2e}, vacuum {vacuum:.2e}, identities hold to {holding:.2e}, \
             violated by at least {broken:.2e}, predicates agree: {predicates_agree}"
        ),
    );
    assert!(pass);
}

/// A quadruple with `−φ(1) = [[a, b†], [b, I − D†D]] ≥ 0`.
fn cp_quadruple(b: &Bialgebra, rng: &mut ChaCha20Rng, blocks: &[usize], m: usize) -> CPQuadruple {
    let rho = random_representation(b, rng, blocks).unwrap();
    let k = rho.rows();
    let raw = linalg::random_matrix(rng, k, m);
    let d = &raw / c(linalg::op_norm(&raw) * rng.random_range(1.0..1.5), 0.0);
    let xi = linalg::random_vector(rng, k);
    let defect = CMatrix::identity(m, m) - d.adjoint() * &d;
    let w = linalg::random_vector(rng, m) * c(0.3, 0.0);
    let col = &defect * &w;
    let mut neg = CMatrix::zeros(m + 1, m + 1);
    neg[(0, 0)] = c(w.dotc(&col).re + rng.random_range(0.0..0.5), 0.0);
    for j in 0..m {
        neg[(j + 1, 0)] = col[j];
        neg[(0, j + 1)] = col[j].conj();
    }
    neg.view_mut((1, 1), (m, m)).copy_from(&defect);
    CPQuadruple { rho, d, xi, phi1: -neg }
}

#[test]
fn criterion_06_completely_positive_form() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut min_eig = f64::INFINITY;
    let mut block = 0.0f64;
    let mut gram_min = f64::INFINITY;
    let mut isometry = 0.0f64;
    let mut recovered = 0.0f64;
    let mut intertwined = 0;
    for name in FIXTURES {
        let b = fixture(name).unwrap();
        let nb = b.representation().blocks.len();
        for _ in 0..5 {
            let m = rng.random_range(1..3);
            let blocks = random_blocks(&b, &mut rng, 2);
            let q = cp_quadruple(&b, &mut rng, &blocks, m);
            let phi = make_cp_generator(&b, &q).unwrap();
            let rep = check_phi1(&b, &phi, Some(&q)).unwrap();
            min_eig = min_eig.min(rep.min_eigenvalue);
            block = block.max(rep.block_residual.unwrap());
            for t in [0.1, 0.5, 1.0] {
                let lam = conv_exp(&b, &phi.corner(), t).unwrap();
                let gram = markov_gram(&b, &lam).unwrap();
                gram_min = gram_min.min(linalg::min_eigenvalue(&linalg::hermitian_part(&gram)));
            }
        }
        // distinct blocks and a random ξ give a cyclic, hence minimal, quadruple
        for _ in 0..3 {
            let first = rng.random_range(0..nb);
            let blocks = if nb > 1 { vec![first, (first + 1 + rng.random_range(0..nb - 1)) % nb] } else { vec![first] };
            let q1 = cp_quadruple(&b, &mut rng, &blocks, 1);
            if !check_minimality(&q1) {
                continue;
            }
            let w = linalg::random_unitary(&mut rng, q1.k());
            let q2 = CPQuadruple {
                rho: q1.rho.map_values(|r| &w * r * w.adjoint()),
                d: &w * &q1.d,
                xi: &w * &q1.xi,
                phi1: q1.phi1.clone(),
            };
            let v = intertwine_minimal(&b, &q1, &q2).unwrap();
            isometry = isometry.max(linalg::max_abs(&(v.adjoint() * &v - CMatrix::identity(q1.k(), q1.k()))));
            recovered = recovered.max(linalg::max_abs(&(&v - &w)));
            intertwined += 1;
        }
    }
    let pass = min_eig >= -1e-12 && block <= 1e-12 && gram_min >= -1e-9 && isometry <= 1e-10 && intertwined > 0;
    verdict(
        6,
        "completely positive generator form",
        pass,
        format!(
            "min eig of -phi(1) {min_eig:.2e}, block residual {block:.2e}, min Markov Gram eig {gram_min:.2e}, \
             {intertwined} intertwiners with isometry defect {isometry:.2e} (distance to conjugator {recovered:.2e})"
        ),
    );
    assert!(pass);
}

/// Nullities of the Leibniz system for every ordered pair of distinct
/// characters of the function algebra on `n` points.
fn two_character_dimensions() -> Vec<(usize, usize, usize, usize, f64)> {
    let mut out = Vec::new();
    for n in 2..=6 {
        let b = build_function_algebra(&CayleyTable::cyclic(n)).unwrap();
        let point = |g: usize| CVector::from_fn(n, |i, _| if i == g { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        for g in 0..n {
            for h in (0..n).filter(|&h| h != g) {
                let (chi_p, chi) = (point(g), point(h));
                assert!(character_defect(&b, &chi_p).unwrap() == 0.0 && character_defect(&b, &chi).unwrap() == 0.0);
                let pi_prime = OperatorMap::functional(&b, &chi_p).unwrap();
                let pi = OperatorMap::functional(&b, &chi).unwrap();
                let dim = derivation_space_dimension(&b, &pi_prime, &pi).unwrap();
                // χ′ − χ satisfies the Leibniz rule
                let delta = OperatorMap::functional(&b, &(&chi_p - &chi)).unwrap();
                let leibniz = check_derivation(&b, &DerivationProblem { pi_prime, pi, delta }).unwrap();
                out.push((n, g, h, dim, leibniz));
            }
        }
    }
    out
}

#[test]
fn criterion_07_derivations_and_chi_structures() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut inner = 0.0f64;
    let mut solves = 0;
    while solves < 100 {
        let b = fixture(FIXTURES[solves % FIXTURES.len()]).unwrap();
        let k1 = rng.random_range(1..3);
        let pp_blocks = random_blocks(&b, &mut rng, k1);
        let pi_blocks = random_blocks(&b, &mut rng, 1);
        let pp = random_representation(&b, &mut rng, &pp_blocks).unwrap();
        let pi = random_representation(&b, &mut rng, &pi_blocks).unwrap();
        let t = linalg::random_matrix(&mut rng, pp.rows(), pi.rows());
        let delta = inner_derivation(&b, &pp, &pi, &t).unwrap();
        let problem = DerivationProblem { pi_prime: pp.clone(), pi: pi.clone(), delta: delta.clone() };
        let sol = solve_inner(&b, &problem).unwrap();
        // independent reassembly δ(x) = π′(x)T − Tπ(x)
        let again = inner_derivation(&b, &pp, &pi, &sol.t).unwrap();
        inner = inner.max(sol.residual).max(again.max_diff(&delta));
        solves += 1;
    }

    let dims = two_character_dimensions();
    let nonzero: Vec<_> = dims.iter().filter(|d| d.3 != 0).collect();
    let leibniz = dims.iter().map(|d| d.4).fold(0.0, f64::max);

    let mut round_trip = 0.0f64;
    for name in FIXTURES {
        let b = fixture(name).unwrap();
        for chi in characters(&b) {
            for _ in 0..3 {
                let blocks = random_blocks(&b, &mut rng, 2);
                let pi = random_representation(&b, &mut rng, &blocks).unwrap();
                let xi = linalg::random_vector(&mut rng, pi.rows());
                let phi = implemented_chi_structure(&b, &pi, &xi, &chi).unwrap();
                let imp = implement_chi_structure(&b, &phi, &chi).unwrap();
                let n = imp.pi.rows();
                for i in 0..b.dim() {
                    let x = b.basis(i);
                    let nu = imp.pi.apply(&x).unwrap() - CMatrix::identity(n, n) * chi[i];
                    let col = &nu * &imp.xi;
                    let row = imp.xi.adjoint() * &nu;
                    let mut m = CMatrix::zeros(n + 1, n + 1);
                    m[(0, 0)] = imp.lambda.eval(&x).unwrap();
                    m.view_mut((1, 0), (n, 1)).copy_from(&col);
                    m.view_mut((0, 1), (1, n)).copy_from(&row);
                    m.view_mut((1, 1), (n, n)).copy_from(&nu);
                    round_trip = round_trip.max(linalg::max_abs(&(m - phi.value(i))));
                }
            }
        }
    }

    let pass = inner <= 1e-9 && nonzero.is_empty() && round_trip <= 1e-10;
    verdict(
        7,
        "derivations and chi-structures",
        pass,
        format!(
            "{solves} inner solves, max residual {inner:.2e}; {}/{} distinct character pairs have \
             nonzero derivation space (max dim {}, chi'-chi Leibniz residual {leibniz:.1e}); \
             chi-structure reassembly {round_trip:.2e}",
            nonzero.len(),
            dims.len(),
            dims.iter().map(|d| d.3).max().unwrap_or(0),
        ),
    );
    // The vanishing claim is false: χ′ − χ is a nonzero (χ′, χ)-derivation.
    // The literal claim is kept in `two_character_derivations_vanish`.
    assert!(inner <= 1e-9 && round_trip <= 1e-10);
    assert!(dims.iter().all(|d| d.3 == 1 && d.4 == 0.0));
}

#[test]
#[ignore = "fails: χ′ − χ spans a one-dimensional space of (χ′, χ)-derivations"]
fn two_character_derivations_vanish() {
    for (n, g, h, dim, _) in two_character_dimensions() {
        assert_eq!(dim, 0, "characters {g}, {h} on {n} points");
    }
}

#[test]
fn criterion_08_toy_fock_convergence() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut slowest = Duration::ZERO;
    let mut floor = f64::INFINITY;
    for name in FIXTURES {
        let b = fixture(name).unwrap();
        // a zero corner has nothing to converge; redraw
        let phi = loop {
            let phi = random_structure_generator(&b, &mut rng, 0.7).unwrap();
            if linalg::max_abs_vec(&phi.corner().coeffs()) > 1e-8 {
                break phi;
            }
        };
        let x = random_element(&b, &mut rng);
        let t = 1.0;
        let reference = conv_exp(&b, &phi.corner(), t).unwrap().eval(&x).unwrap();
        let start = Instant::now();
        let errors: Vec<f64> = (3..=10)
            .map(|k| {
                let run = toy_fock_evolve(&b, &phi, &x, t, 1 << k, false, TOY_FOCK_MEMORY_CAP).unwrap();
                (run.vacuum - reference).norm()
            })
            .collect();
        slowest = slowest.max(start.elapsed());
        floor = floor.min(errors[errors.len() - 1]);
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    let pass = lo >= 1.5 && hi <= 3.0 && slowest < Duration::from_secs(10);
    verdict(
        8,
        "toy-Fock convergence",
        pass,
        format!(
            "N = 8..1024, error ratios in [{lo:.3}, {hi:.3}], smallest final error {floor:.2e}, \
             slowest case {:.3}s",
            slowest.as_secs_f64()
        ),
    );
    assert!(pass);
}

/// `Σ_k e^{−rt}(rt)^k/k! μ^{*k}` on `ℤ/n`, summed until the Poisson tail is negligible.
fn compound_poisson_oracle(n: usize, rate: f64, mu: &[f64], t: f64) -> Vec<f64> {
    let mean = rate * t;
    let mut power = vec![0.0; n];
    power[0] = 1.0;
    let mut weight = (-mean).exp();
    let mut law: Vec<f64> = power.iter().map(|p| p * weight).collect();
    for k in 1..200 {
        let mut next = vec![0.0; n];
        for (g, pg) in power.iter().enumerate() {
            for (h, mh) in mu.iter().enumerate() {
                next[(g + h) % n] += pg * mh;
            }
        }
        power = next;
        weight *= mean / k as f64;
        for (l, p) in law.iter_mut().zip(&power) {
            *l += weight * p;
        }
    }
    law
}

#[test]
fn criterion_09_classical_cross_check() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let mut oracle = 0.0f64;
    for n in [2usize, 3, 4] {
        let b = build_function_algebra(&CayleyTable::cyclic(n)).unwrap();
        for _ in 0..5 {
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let mu: Vec<f64> = raw.iter().map(|p| p / total).collect();
            let (rate, t) = (rng.random_range(0.2..3.0), rng.random_range(0.1..2.0));
            let law = compound_poisson_law(&b, rate, &mu, t).unwrap();
            let expected = compound_poisson_oracle(n, rate, &mu, t);
            oracle = oracle.max(law.iter().zip(&expected).map(|(a, e)| (a - e).abs()).fold(0.0, f64::max));
        }
    }
    let config = RunConfig { n_samples: 100_000, ..RunConfig::default() };
    let start = Instant::now();
    let report = run_report(&config, Battery::Montecarlo).unwrap();
    let elapsed = start.elapsed();
    let worst = report.cases.iter().map(|c| c.residual).fold(0.0, f64::max);
    let pass = oracle <= 1e-12 && report.passed && elapsed < Duration::from_secs(60);
    verdict(
        9,
        "classical cross-check",
        pass,
        format!(
            "{} laws at 1e5 samples, worst (z/3, TV/3SE) {worst:.3}; reference vs direct series {oracle:.1e}; {:.2}s",
            report.cases.len(),
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass, "{:?}", report.cases);
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |file: &str| {
        let path = dir.path().join(file);
        let status = Command::new(env!("CARGO_BIN_EXE_qscc"))
            .args(["--seed", "42", "--out"])
            .arg(&path)
            .args(["report", "all"])
            .status()
            .unwrap();
        // 1 means a statistical case failed; the bytes must match either way
        assert!(matches!(status.code(), Some(0 | 1)), "{status}");
        std::fs::read(path).unwrap()
    };
    let first = run("first.json");
    let second = run("second.json");
    let config = RunConfig::default();
    let lib_a = run_report(&config, Battery::All).unwrap().to_json().unwrap();
    let lib_b = run_report(&config, Battery::All).unwrap().to_json().unwrap();
    let pass = !first.is_empty() && first == second && lib_a == lib_b;
    verdict(
        10,
        "determinism",
        pass,
        format!("two CLI report runs of {} bytes identical: {}", first.len(), first == second),
    );
    assert!(pass);
}
