//! Stochastic generators: structure maps implemented by a representation and
//! a vector, completely positive generator forms, and the GNS-type
//! reconstruction of a generator from a conditionally positive functional.

use serde::Serialize;

use crate::algebra::{Bialgebra, Element};
use crate::cocycle::{assemble, Generator};
use crate::convolution::{Functional, OperatorMap};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ZERO};

/// Largest residual of the unital *-representation identities for `π`.
pub fn representation_defect(b: &Bialgebra, pi: &OperatorMap) -> Result<f64> {
    pi.check_source(b)?;
    if !pi.is_square() {
        return Ok(f64::INFINITY);
    }
    let d = b.dim();
    let n = pi.rows();
    let mut worst = linalg::max_abs(&(pi.apply(&b.unit())? - CMatrix::identity(n, n)));
    worst = worst.max(pi.reality_defect(b)?);
    for i in 0..d {
        for j in 0..d {
            let prod = b.multiply(&b.basis(i), &b.basis(j))?;
            let r = pi.apply(&prod)? - pi.value(i) * pi.value(j);
            worst = worst.max(linalg::max_abs(&r));
        }
    }
    Ok(worst)
}

fn require_representation(b: &Bialgebra, pi: &OperatorMap, tol: f64) -> Result<()> {
    let r = representation_defect(b, pi)?;
    if !(r <= tol) {
        return Err(Error::NotRepresentation {
            residual: r,
            detail: "unital *-homomorphism identities fail".into(),
        });
    }
    Ok(())
}

/// `(π, δ, λ)` on a Hilbert space of dimension `n`.
#[derive(Debug, Clone)]
pub struct SchurmannTriple {
    pub pi: OperatorMap,
    pub delta: OperatorMap,
    pub lambda: Functional,
    pub n: usize,
}

/// Residuals of the defining relations of a Schürmann triple.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TripleResiduals {
    pub representation: f64,
    pub derivation: f64,
    pub lambda_relation: f64,
    pub reality: f64,
}

impl TripleResiduals {
    pub fn max(&self) -> f64 {
        self.representation
            .max(self.derivation)
            .max(self.lambda_relation)
            .max(self.reality)
    }
}

impl SchurmannTriple {
    pub fn residuals(&self, b: &Bialgebra) -> Result<TripleResiduals> {
        let d = b.dim();
        let eps = b.counit();
        let representation = if self.n == 0 {
            0.0
        } else {
            representation_defect(b, &self.pi)?
        };
        let mut derivation = 0.0f64;
        let mut lambda_relation = 0.0f64;
        for i in 0..d {
            let xs = Element::new(b.star_basis(i));
            for j in 0..d {
                let prod = b.multiply(&b.basis(i), &b.basis(j))?;
                if self.n > 0 {
                    let lhs = self.delta.apply(&prod)?;
                    let rhs = self.delta.value(i) * eps[j] + self.pi.value(i) * self.delta.value(j);
                    derivation = derivation.max(linalg::max_abs(&(lhs - rhs)));
                }
                // λ(x*y) − conj(λ(x))ε(y) − conj(ε(x))λ(y) = δ(x)†δ(y)
                let sy = b.multiply(&xs, &b.basis(j))?;
                let lhs = self.lambda.eval(&sy)?
                    - self.lambda.value(i)[(0, 0)].conj() * eps[j]
                    - eps[i].conj() * self.lambda.value(j)[(0, 0)];
                let rhs = if self.n > 0 {
                    self.delta.value(i).dotc(self.delta.value(j))
                } else {
                    ZERO
                };
                lambda_relation = lambda_relation.max((lhs - rhs).norm());
            }
        }
        Ok(TripleResiduals {
            representation,
            derivation,
            lambda_relation,
            reality: self.lambda.reality_defect(b)?,
        })
    }

    /// `φ = [[λ, δ(·*)†], [δ, π − ε I]]`.
    pub fn generator(&self, b: &Bialgebra) -> Result<Generator> {
        let d = b.dim();
        let eps = b.counit();
        let n = self.n;
        let values = (0..d)
            .map(|i| {
                let lam = self.lambda.value(i)[(0, 0)];
                if n == 0 {
                    return CMatrix::from_element(1, 1, lam);
                }
                let delta = self.delta.value(i).column(0).into_owned();
                let star = Element::new(b.star_basis(i));
                let delta_star = self.delta.apply(&star).expect("dimension checked");
                let row = delta_star.column(0).map(|z| z.conj());
                let nu = self.pi.value(i) - CMatrix::identity(n, n) * eps[i];
                assemble(lam, &delta, &row, &nu)
            })
            .collect();
        Generator::new(OperatorMap::new(b, values)?)
    }
}

/// `φ(x) = [⟨c|; I] (π(x) − ε(x) I) [|c⟩, I]`.
pub fn make_structure_map(b: &Bialgebra, pi: &OperatorMap, cvec: &CVector) -> Result<Generator> {
    require_representation(b, pi, 1e-10)?;
    let n = pi.rows();
    if cvec.len() != n {
        return Err(Error::DimensionMismatch {
            what: "implementing vector",
            expected: n,
            found: cvec.len(),
        });
    }
    let mut v = CMatrix::zeros(n, n + 1);
    v.set_column(0, cvec);
    v.view_mut((0, 1), (n, n)).copy_from(&CMatrix::identity(n, n));
    let eps = b.counit();
    let values = pi
        .values()
        .iter()
        .zip(eps.iter())
        .map(|(p, e)| v.adjoint() * (p - CMatrix::identity(n, n) * *e) * &v)
        .collect();
    Generator::new(OperatorMap::new(b, values)?)
}

/// Residuals of the ε-structure relation
/// `φ(x*y) = φ(x)†ε(y) + conj(ε(x))φ(y) + φ(x)† Δ φ(y)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StructureReport {
    pub relation: f64,
    pub reality: f64,
    pub unit: f64,
}

impl StructureReport {
    pub fn max(&self) -> f64 {
        self.relation.max(self.reality).max(self.unit)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// Checks the structure relation for a character `χ` given by its values on
/// the basis; `χ = ε` gives the ε-structure relation.
pub(crate) fn structure_residuals(
    b: &Bialgebra,
    phi: &OperatorMap,
    chi: &CVector,
) -> Result<StructureReport> {
    phi.check_source(b)?;
    let d = b.dim();
    let n = phi.rows();
    let mut proj = CMatrix::identity(n, n);
    proj[(0, 0)] = ZERO;
    let mut relation = 0.0f64;
    for i in 0..d {
        let xs = Element::new(b.star_basis(i));
        let pdag = phi.value(i).adjoint();
        for j in 0..d {
            let lhs = phi.apply(&b.multiply(&xs, &b.basis(j))?)?;
            let rhs = &pdag * chi[j] + phi.value(j) * chi[i].conj() + &pdag * &proj * phi.value(j);
            relation = relation.max(linalg::max_abs(&(lhs - rhs)));
        }
    }
    let unit = linalg::max_abs(&phi.apply(&b.unit())?);
    Ok(StructureReport {
        relation,
        reality: phi.reality_defect(b)?,
        unit,
    })
}

pub fn check_structure_map(b: &Bialgebra, phi: &Generator) -> Result<StructureReport> {
    structure_residuals(b, phi.map(), b.counit())
}

/// Data `(ρ, D, ξ, φ(1))` of a completely positive generator form.
#[derive(Debug, Clone)]
pub struct CPQuadruple {
    pub rho: OperatorMap,
    pub d: CMatrix,
    pub xi: CVector,
    pub phi1: CMatrix,
}

/// Checks of the value `φ(1)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Phi1Report {
    /// Smallest eigenvalue of `−φ(1)`.
    pub min_eigenvalue: f64,
    pub self_adjoint_defect: f64,
    /// `‖φ(1)₁₁ − (D†D − I)‖` when a quadruple is supplied.
    pub block_residual: Option<f64>,
    pub passed: bool,
}

impl CPQuadruple {
    pub fn k(&self) -> usize {
        self.rho.rows()
    }

    pub fn d_noise(&self) -> usize {
        self.d.ncols()
    }

    pub fn validate(&self, b: &Bialgebra) -> Result<()> {
        let k = self.k();
        if self.d.nrows() != k || self.xi.len() != k {
            return Err(Error::DimensionMismatch {
                what: "quadruple space",
                expected: k,
                found: self.d.nrows(),
            });
        }
        if self.phi1.shape() != (self.d_noise() + 1, self.d_noise() + 1) {
            return Err(Error::DimensionMismatch {
                what: "phi(1) size",
                expected: self.d_noise() + 1,
                found: self.phi1.nrows(),
            });
        }
        require_representation(b, &self.rho, 1e-10)?;
        let norm = linalg::op_norm(&self.d);
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvariantViolation(format!("‖D‖ = {norm} exceeds 1")));
        }
        let report = phi1_report(&self.phi1, Some(&self.d), 1e-10);
        if report.min_eigenvalue < -1e-10 || report.self_adjoint_defect > 1e-12 {
            return Err(Error::InvariantViolation(format!(
                "−φ(1) is not positive semidefinite (min eigenvalue {:.3e})",
                report.min_eigenvalue
            )));
        }
        if report.block_residual.unwrap_or(0.0) > 1e-12 {
            return Err(Error::InvariantViolation(format!(
                "lower-right block of φ(1) differs from D†D − I by {:.3e}",
                report.block_residual.unwrap_or(0.0)
            )));
        }
        Ok(())
    }

    /// `[|ξ⟩, D]`.
    fn column_map(&self) -> CMatrix {
        let k = self.k();
        let mut v = CMatrix::zeros(k, self.d_noise() + 1);
        v.set_column(0, &self.xi);
        v.view_mut((0, 1), (k, self.d_noise())).copy_from(&self.d);
        v
    }
}

/// `φ(x) = [⟨ξ|; D†] (ρ(x) − ε(x) I) [|ξ⟩, D] + ε(x) φ(1)`.
pub fn make_cp_generator(b: &Bialgebra, q: &CPQuadruple) -> Result<Generator> {
    q.validate(b)?;
    Ok(cp_form(b, q))
}

fn cp_form(b: &Bialgebra, q: &CPQuadruple) -> Generator {
    let v = q.column_map();
    let k = q.k();
    let values = q
        .rho
        .values()
        .iter()
        .zip(b.counit().iter())
        .map(|(r, e)| v.adjoint() * (r - CMatrix::identity(k, k) * *e) * &v + &q.phi1 * *e)
        .collect();
    Generator::new(OperatorMap::new(b, values).expect("values match the basis"))
        .expect("square values")
}

/// Largest difference between `φ` and the form built from `q`.
pub fn check_cp_form(b: &Bialgebra, phi: &Generator, q: &CPQuadruple) -> Result<f64> {
    phi.map().check_source(b)?;
    q.rho.check_source(b)?;
    if phi.d_noise() != q.d_noise() {
        return Ok(f64::INFINITY);
    }
    Ok(phi.map().max_diff(cp_form(b, q).map()))
}

fn phi1_report(phi1: &CMatrix, d: Option<&CMatrix>, tol: f64) -> Phi1Report {
    let neg = -phi1;
    let self_adjoint_defect = linalg::max_abs(&(phi1 - phi1.adjoint()));
    let min_eigenvalue = linalg::min_eigenvalue(&neg);
    let block_residual = d.map(|d| {
        let n = d.ncols();
        let target = d.adjoint() * d - CMatrix::identity(n, n);
        linalg::max_abs(&(phi1.view((1, 1), (n, n)) - target))
    });
    let passed = min_eigenvalue >= -tol
        && self_adjoint_defect <= tol
        && block_residual.is_none_or(|r| r <= 1e-12);
    Phi1Report {
        min_eigenvalue,
        self_adjoint_defect,
        block_residual,
        passed,
    }
}

/// `−φ(1) ≥ 0`, and the lower-right block `D†D − I` when `q` is given.
pub fn check_phi1(b: &Bialgebra, phi: &Generator, q: Option<&CPQuadruple>) -> Result<Phi1Report> {
    let phi1 = phi.apply(&b.unit())?;
    if let Some(q) = q {
        if q.d_noise() != phi.d_noise() {
            return Err(Error::NoiseDimensionMismatch {
                generator: phi.d_noise(),
                step: q.d_noise(),
            });
        }
    }
    Ok(phi1_report(&phi1, q.map(|q| &q.d), 1e-10))
}

/// Spanning data for `ρ(B)(ℂξ + Ran D)`.
fn cyclic_span(q: &CPQuadruple) -> CMatrix {
    let k = q.k();
    let v = q.column_map();
    let cols: Vec<CVector> = q
        .rho
        .values()
        .iter()
        .flat_map(|r| {
            let rv = r * &v;
            (0..rv.ncols()).map(move |j| rv.column(j).into_owned())
        })
        .collect();
    if cols.is_empty() {
        return CMatrix::zeros(k, 0);
    }
    CMatrix::from_columns(&cols)
}

/// `ρ(B)(ℂξ + Ran D)` spans the whole space.
pub fn check_minimality(q: &CPQuadruple) -> bool {
    let k = q.k();
    k == 0 || linalg::rank(&cyclic_span(q), 1e-10) == k
}

/// The isometry `V` with `V D₁ = D₂`, `V ξ₁ = ξ₂`, `V ρ₁(x) = ρ₂(x) V`.
pub fn intertwine_minimal(b: &Bialgebra, q1: &CPQuadruple, q2: &CPQuadruple) -> Result<CMatrix> {
    q1.rho.check_source(b)?;
    q2.rho.check_source(b)?;
    if !check_minimality(q1) {
        return Err(Error::InvariantViolation("first quadruple is not minimal".into()));
    }
    if q1.d_noise() != q2.d_noise() {
        return Err(Error::NoiseDimensionMismatch {
            generator: q1.d_noise(),
            step: q2.d_noise(),
        });
    }
    let (k1, k2) = (q1.k(), q2.k());
    let id2 = CMatrix::identity(k2, k2);
    let mut blocks: Vec<(CMatrix, CVector)> = Vec::new();
    blocks.push((linalg::kron(&q1.d.transpose(), &id2), linalg::vec_of(&q2.d)));
    blocks.push((
        linalg::kron(&CMatrix::from_columns(std::slice::from_ref(&q1.xi)).transpose(), &id2),
        q2.xi.clone(),
    ));
    for (r1, r2) in q1.rho.values().iter().zip(q2.rho.values()) {
        let a = linalg::kron(&r1.transpose(), &id2) - linalg::kron(&CMatrix::identity(k1, k1), r2);
        blocks.push((a, CVector::zeros(k1 * k2)));
    }
    let rows: usize = blocks.iter().map(|(a, _)| a.nrows()).sum();
    let mut a = CMatrix::zeros(rows, k1 * k2);
    let mut rhs = CMatrix::zeros(rows, 1);
    let mut r0 = 0;
    for (blk, v) in &blocks {
        a.view_mut((r0, 0), (blk.nrows(), k1 * k2)).copy_from(blk);
        rhs.view_mut((r0, 0), (v.len(), 1)).copy_from(v);
        r0 += blk.nrows();
    }
    let (sol, residual) = linalg::lstsq(&a, &rhs, 1e-12);
    let v = linalg::unvec(&sol.column(0).into_owned(), k2, k1);
    let defect = linalg::max_abs(&(v.adjoint() * &v - CMatrix::identity(k1, k1)));
    if residual > 1e-9 || defect > 1e-10 {
        return Err(Error::NoIntertwiner { residual, defect });
    }
    Ok(v)
}

/// Positivity of a functional on `Ker ε`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionalPositivity {
    pub positive: bool,
    /// Smallest eigenvalue of the Gram matrix `γ(b_i* b_j)` on `Ker ε`.
    pub margin: f64,
    pub hermitian_defect: f64,
}

/// Orthonormal basis of `Ker ε` (columns) and the Gram matrix of `γ` on it.
fn kernel_gram(b: &Bialgebra, gamma: &Functional) -> Result<(CMatrix, CMatrix)> {
    let row = CMatrix::from_rows(&[b.counit().transpose()]);
    let basis = linalg::null_space(&row, 1e-12);
    let m = basis.ncols();
    let g = gamma.coeffs();
    let elems: Vec<Element> = (0..m).map(|k| Element::new(basis.column(k).into_owned())).collect();
    let stars: Vec<Element> = elems.iter().map(|e| b.star(e)).collect::<Result<_>>()?;
    let mut gram = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = g.dot(&b.multiply(&stars[i], &elems[j])?.coords);
        }
    }
    Ok((basis, gram))
}

pub fn check_conditionally_positive(b: &Bialgebra, gamma: &Functional) -> Result<ConditionalPositivity> {
    gamma.check_source(b)?;
    let (_, gram) = kernel_gram(b, gamma)?;
    let hermitian_defect = linalg::max_abs(&(&gram - gram.adjoint()));
    let margin = if gram.nrows() == 0 {
        0.0
    } else {
        linalg::min_eigenvalue(&gram)
    };
    Ok(ConditionalPositivity {
        positive: margin >= -1e-10 && hermitian_defect <= 1e-10,
        margin,
        hermitian_defect,
    })
}

/// Reconstructs a Schürmann triple and generator from a conditionally
/// positive functional. `rank_tol` is relative to the largest Gram
/// eigenvalue (default `1e-10`); eigenvalues below `1e-12·max(1, max|γ(e_i)|)`
/// are always dropped as roundoff.
pub fn gns_construct(
    b: &Bialgebra,
    gamma: &Functional,
    rank_tol: Option<f64>,
) -> Result<(SchurmannTriple, Generator)> {
    gamma.check_source(b)?;
    if (gamma.rows(), gamma.cols()) != (1, 1) {
        return Err(Error::InvalidInput("GNS input must be a functional".into()));
    }
    let scale = 1.0f64.max(linalg::max_abs_vec(&gamma.coeffs()));
    let reality = gamma.reality_defect(b)?;
    if reality > 1e-10 * scale {
        return Err(Error::NotReal(reality));
    }
    let at_unit = gamma.eval(&b.unit())?;
    if at_unit.norm() > 1e-10 * scale {
        return Err(Error::NonzeroAtUnit(at_unit.norm()));
    }
    let (basis, gram) = kernel_gram(b, gamma)?;
    let (mu, vecs) = linalg::sorted_hermitian_eigen(&gram);
    let mu_max = mu.first().copied().unwrap_or(0.0);
    let mu_min = mu.last().copied().unwrap_or(0.0);
    let cut = (rank_tol.unwrap_or(1e-10) * mu_max.max(0.0)).max(1e-12 * scale);
    if mu_min < -(1e-10 * scale).max(cut) {
        return Err(Error::NotConditionallyPositive(mu_min));
    }
    let kept: Vec<usize> = (0..mu.len()).filter(|&k| mu[k] > cut && mu[k] > 0.0).collect();
    let n = kept.len();
    // chart a ↦ (√μ_k ⟨v_k, B†a⟩)_k and its inverse on basis vectors
    let chart = CMatrix::from_fn(n, basis.ncols(), |r, col| {
        let k = kept[r];
        vecs[(col, k)].conj() * mu[k].sqrt()
    });
    let chart = &chart * basis.adjoint();
    let lifts: Vec<CVector> = kept
        .iter()
        .map(|&k| &basis * vecs.column(k) / c(mu[k].sqrt(), 0.0))
        .collect();
    let d = b.dim();
    let unit = b.unit();
    let mut pi_vals = Vec::with_capacity(d);
    let mut delta_vals = Vec::with_capacity(d);
    for i in 0..d {
        let x = b.basis(i);
        let mut p = CMatrix::zeros(n, n);
        for (col, z) in lifts.iter().enumerate() {
            let xz = b.multiply(&x, &Element::new(z.clone()))?;
            p.set_column(col, &(&chart * xz.coords));
        }
        pi_vals.push(p);
        let centered = &x.coords - &unit.coords * b.counit()[i];
        delta_vals.push(CMatrix::from_columns(&[&chart * centered]));
    }
    let triple = if n == 0 {
        SchurmannTriple {
            pi: OperatorMap::zero(b, 0, 0),
            delta: OperatorMap::zero(b, 0, 1),
            lambda: gamma.clone(),
            n,
        }
    } else {
        SchurmannTriple {
            pi: OperatorMap::new(b, pi_vals)?,
            delta: OperatorMap::new(b, delta_vals)?,
            lambda: gamma.clone(),
            n,
        }
    };
    let generator = triple.generator(b)?;
    Ok((triple, generator))
}

/// Which generator classes a map belongs to.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Classification {
    pub epsilon_structure: bool,
    pub structure: StructureReport,
    pub cp_form_phi1: bool,
    pub phi1: Phi1Report,
    pub real: bool,
    pub reality_defect: f64,
    pub unital_corner: bool,
    /// `|λ(1)|`.
    pub corner_at_unit: f64,
}

pub fn classify(b: &Bialgebra, phi: &Generator, tol: f64) -> Result<Classification> {
    let structure = check_structure_map(b, phi)?;
    let phi1 = check_phi1(b, phi, None)?;
    let reality_defect = phi.map().reality_defect(b)?;
    let corner_at_unit = phi.lambda(&b.unit())?.norm();
    Ok(Classification {
        epsilon_structure: structure.passes(tol),
        structure,
        cp_form_phi1: phi1.passed,
        phi1,
        real: reality_defect <= tol,
        reality_defect,
        unital_corner: corner_at_unit <= tol,
        corner_at_unit,
    })
}

/// A random unital *-representation of `b`: a direct sum of its faithful
/// representation's blocks, each picked with multiplicity, conjugated by a
/// random unitary.
pub fn random_representation<R: rand::Rng + ?Sized>(
    b: &Bialgebra,
    rng: &mut R,
    blocks: &[usize],
) -> Result<OperatorMap> {
    let rep = b.representation();
    let sizes: usize = blocks.iter().map(|&k| rep.blocks[k]).sum();
    let u = linalg::random_unitary(rng, sizes);
    let values = (0..b.dim())
        .map(|i| {
            let mut m = CMatrix::zeros(sizes, sizes);
            let mut off = 0;
            for &k in blocks {
                let nb = rep.blocks[k];
                m.view_mut((off, off), (nb, nb))
                    .copy_from(&rep.block_of(&rep.images[i], k));
                off += nb;
            }
            u.adjoint() * m * &u
        })
        .collect();
    OperatorMap::new(b, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fixture;
    use crate::convolution::{self, conv_exp};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn trivial_representation_gives_zero_map() {
        let b = fixture("c_s3").unwrap();
        let pi = OperatorMap::counit(&b);
        let phi = make_structure_map(&b, &pi, &CVector::from_element(1, c(0.7, -0.2))).unwrap();
        assert!(phi.map().max_diff(&Generator::zero(&b, 1).into_map()) < 1e-15);
    }

    #[test]
    fn structure_maps_satisfy_the_relation() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for name in ["c_s3", "cg_s3", "c_z4", "cg_z3"] {
            let b = fixture(name).unwrap();
            let nblocks = b.representation().blocks.len();
            let pi = random_representation(&b, &mut rng, &[nblocks - 1, 0]).unwrap();
            let cv = linalg::random_vector(&mut rng, pi.rows());
            let phi = make_structure_map(&b, &pi, &cv).unwrap();
            let rep = check_structure_map(&b, &phi).unwrap();
            assert!(rep.passes(1e-12), "{name}: {rep:?}");
            assert!(check_phi1(&b, &phi, None).unwrap().passed);
            assert!(check_conditionally_positive(&b, &phi.corner()).unwrap().positive);
        }
    }

    #[test]
    fn random_map_fails_structure_relation() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let b = fixture("c_s3").unwrap();
        let vals = (0..6).map(|_| linalg::random_matrix(&mut rng, 2, 2)).collect();
        let phi = Generator::new(OperatorMap::new(&b, vals).unwrap()).unwrap();
        assert!(check_structure_map(&b, &phi).unwrap().relation > 1e-3);
    }

    #[test]
    fn non_representation_rejected() {
        let b = fixture("c_z2").unwrap();
        let pi = OperatorMap::new(&b, vec![CMatrix::identity(1, 1); 2]).unwrap();
        assert!(matches!(
            make_structure_map(&b, &pi, &CVector::zeros(1)),
            Err(Error::NotRepresentation { .. })
        ));
    }

    #[test]
    fn z2_character_structure_map_obeys_group_relation() {
        let b = fixture("cg_z2").unwrap();
        // sign character on L_e, L_g
        let pi = OperatorMap::functional(&b, &CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]))
            .unwrap();
        let phi = make_structure_map(&b, &pi, &CVector::from_element(1, c(1.0, 0.0))).unwrap();
        let psi_g = phi.map().value(1).clone();
        let expected = CMatrix::from_element(2, 2, c(-2.0, 0.0));
        assert!(linalg::max_abs(&(&psi_g - expected)) < 1e-15);
        // ψ_{gg} = ψ_e = 0 = 2ψ_g + ψ_g Δ ψ_g
        let proj = crate::cocycle::NoiseSpace::new(1).projector();
        let r = &psi_g * c(2.0, 0.0) + &psi_g * proj * &psi_g;
        assert!(linalg::max_abs(&r) < 1e-14);
    }

    fn sample_quadruple(b: &Bialgebra, rng: &mut ChaCha20Rng, blocks: &[usize], m: usize) -> CPQuadruple {
        let rho = random_representation(b, rng, blocks).unwrap();
        let k = rho.rows();
        let raw = linalg::random_matrix(rng, k, m);
        let d = &raw / c(linalg::op_norm(&raw) * 1.1, 0.0);
        let xi = linalg::random_vector(rng, k);
        // φ(1) = −[[a, b†],[b, I − D†D]] with the whole matrix PSD
        let defect = CMatrix::identity(m, m) - d.adjoint() * &d;
        let w = linalg::random_vector(rng, m) * c(0.1, 0.0);
        let bcol = &defect * &w;
        let a = w.dotc(&bcol).re + 0.3;
        let mut neg = CMatrix::zeros(m + 1, m + 1);
        neg[(0, 0)] = c(a, 0.0);
        for j in 0..m {
            neg[(j + 1, 0)] = bcol[j];
            neg[(0, j + 1)] = bcol[j].conj();
        }
        neg.view_mut((1, 1), (m, m)).copy_from(&defect);
        CPQuadruple { rho, d, xi, phi1: -neg }
    }

    #[test]
    fn cp_generator_round_trip_and_markov_positivity() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let b = fixture("cg_s3").unwrap();
        let q = sample_quadruple(&b, &mut rng, &[2, 1], 2);
        let phi = make_cp_generator(&b, &q).unwrap();
        assert!(check_cp_form(&b, &phi, &q).unwrap() <= 1e-12);
        let rep = check_phi1(&b, &phi, Some(&q)).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(linalg::max_abs(&(phi.apply(&b.unit()).unwrap() - &q.phi1)) < 1e-14);
        for t in [0.1, 0.5, 1.0] {
            let lam = conv_exp(&b, &phi.corner(), t).unwrap();
            let gram = crate::cocycle::markov_gram(&b, &lam).unwrap();
            assert!(linalg::min_eigenvalue(&gram) >= -1e-9);
            assert!(lam.eval(&b.unit()).unwrap().re <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn degenerate_quadruple() {
        let b = fixture("c_z3").unwrap();
        let mut phi1 = -CMatrix::identity(3, 3);
        phi1[(0, 0)] = ZERO;
        let q = CPQuadruple {
            rho: OperatorMap::counit(&b),
            d: CMatrix::zeros(1, 2),
            xi: CVector::zeros(1),
            phi1: phi1.clone(),
        };
        let phi = make_cp_generator(&b, &q).unwrap();
        for i in 0..3 {
            let expected = &phi1 * b.counit()[i];
            assert!(linalg::max_abs(&(phi.map().value(i) - expected)) < 1e-15);
        }
    }

    #[test]
    fn isometric_d_with_zero_phi1_is_unital() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let b = fixture("c_s3").unwrap();
        let rho = random_representation(&b, &mut rng, &[1, 3]).unwrap();
        let u = linalg::random_unitary(&mut rng, 2);
        let q = CPQuadruple {
            rho,
            d: u,
            xi: linalg::random_vector(&mut rng, 2),
            phi1: CMatrix::zeros(3, 3),
        };
        let phi = make_cp_generator(&b, &q).unwrap();
        assert!(linalg::max_abs(&phi.apply(&b.unit()).unwrap()) < 1e-14);
    }

    #[test]
    fn upward_perturbation_of_phi1_detected() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let b = fixture("c_z4").unwrap();
        let q = sample_quadruple(&b, &mut rng, &[1, 2], 1);
        let mut bad = q.clone();
        let lmin = linalg::min_eigenvalue(&(-&q.phi1));
        bad.phi1[(0, 0)] += c(lmin + 0.5, 0.0);
        assert!(matches!(make_cp_generator(&b, &bad), Err(Error::InvariantViolation(_))));
        let phi = cp_form(&b, &bad);
        assert!(!check_phi1(&b, &phi, None).unwrap().passed);
    }

    #[test]
    fn minimality_and_intertwiner() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let b = fixture("cg_s3").unwrap();
        let q1 = sample_quadruple(&b, &mut rng, &[2, 0], 1);
        assert!(check_minimality(&q1));
        let u = linalg::random_unitary(&mut rng, q1.k());
        let q2 = CPQuadruple {
            rho: q1.rho.map_values(|m| &u * m * u.adjoint()),
            d: &u * &q1.d,
            xi: &u * &q1.xi,
            phi1: q1.phi1.clone(),
        };
        let v = intertwine_minimal(&b, &q1, &q2).unwrap();
        assert!(linalg::max_abs(&(v.adjoint() * &v - CMatrix::identity(3, 3))) < 1e-10);
        assert!(linalg::max_abs(&(&v - &u)) < 1e-8);

        // pad K with a zero block
        let k = q1.k();
        let pad = |m: &CMatrix| {
            let mut p = CMatrix::zeros(k + 1, k + 1);
            p.view_mut((0, 0), (k, k)).copy_from(m);
            p[(k, k)] = c(1.0, 0.0);
            p
        };
        let mut d = CMatrix::zeros(k + 1, 1);
        d.view_mut((0, 0), (k, 1)).copy_from(&q1.d);
        let mut xi = CVector::zeros(k + 1);
        xi.rows_mut(0, k).copy_from(&q1.xi);
        let padded = CPQuadruple {
            rho: q1.rho.map_values(pad),
            d,
            xi,
            phi1: q1.phi1.clone(),
        };
        assert!(!check_minimality(&padded));
    }

    #[test]
    fn gns_of_zero_is_rank_zero() {
        let b = fixture("c_s3").unwrap();
        let (triple, phi) = gns_construct(&b, &OperatorMap::zero(&b, 1, 1), None).unwrap();
        assert_eq!(triple.n, 0);
        assert_eq!(phi.d_noise(), 0);
        assert!(linalg::max_abs(phi.map().value(3)) == 0.0);
    }

    #[test]
    fn gns_of_two_point_poisson() {
        let b = fixture("c_z2").unwrap();
        let r = 0.8;
        let gamma =
            Functional::functional(&b, &CVector::from_vec(vec![c(-r, 0.0), c(r, 0.0)])).unwrap();
        let (triple, phi) = gns_construct(&b, &gamma, None).unwrap();
        assert_eq!(triple.n, 1);
        // π(δ_g) = 1, π(δ_e) = 0: evaluation at g
        assert!((triple.pi.value(1)[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(triple.pi.value(0)[(0, 0)].norm() < 1e-12);
        // |δ(δ_g)|² = γ(δ_g* δ_g) = r
        assert!((triple.delta.value(1)[(0, 0)].norm_sqr() - r).abs() < 1e-12);
        assert!(triple.residuals(&b).unwrap().max() < 1e-9);
        assert!(check_structure_map(&b, &phi).unwrap().passes(1e-10));
    }

    #[test]
    fn gns_round_trip_reproduces_vacuum_semigroup() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for name in ["c_s3", "cg_s3", "cg_z4"] {
            let b = fixture(name).unwrap();
            let nb = b.representation().blocks.len();
            let pi = random_representation(&b, &mut rng, &[nb - 1, 1]).unwrap();
            let cv = linalg::random_vector(&mut rng, pi.rows());
            let phi = make_structure_map(&b, &pi, &cv).unwrap();
            let gamma = phi.corner();
            let (triple, phi2) = gns_construct(&b, &gamma, None).unwrap();
            assert!(triple.residuals(&b).unwrap().max() < 1e-9, "{name}");
            assert!(check_structure_map(&b, &phi2).unwrap().passes(1e-9), "{name}");
            assert!(phi2.corner().max_diff(&gamma) < 1e-12);
            for t in [0.0, 0.5, 1.3, 2.0] {
                let a = conv_exp(&b, &gamma, t).unwrap();
                let z = convolution::conv_exp(&b, &phi2.corner(), t).unwrap();
                assert!(a.max_diff(&z) < 1e-9);
            }
        }
    }

    #[test]
    fn conditional_positivity_signs() {
        let b = fixture("c_s3").unwrap();
        let zero = check_conditionally_positive(&b, &OperatorMap::zero(&b, 1, 1)).unwrap();
        assert!(zero.positive && zero.margin == 0.0);
        // compound Poisson γ = r(μ − ε) with μ uniform on the non-identity elements
        let mut coeffs = CVector::from_element(6, c(0.2, 0.0));
        coeffs[0] = c(-1.0, 0.0);
        let gamma = Functional::functional(&b, &coeffs).unwrap();
        assert!(check_conditionally_positive(&b, &gamma).unwrap().positive);
        let neg = check_conditionally_positive(&b, &gamma.scale(c(-1.0, 0.0))).unwrap();
        assert!(!neg.positive);
        assert!(matches!(
            gns_construct(&b, &gamma.scale(c(-1.0, 0.0)), None),
            Err(Error::NotConditionallyPositive(_))
        ));
    }

    #[test]
    fn gns_input_errors() {
        let b = fixture("cg_z3").unwrap();
        let not_real = Functional::functional(
            &b,
            &CVector::from_vec(vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0)]),
        )
        .unwrap();
        assert!(matches!(gns_construct(&b, &not_real, None), Err(Error::NotReal(_))));
        let at_unit = Functional::functional(&b, &CVector::from_element(3, c(1.0, 0.0))).unwrap();
        assert!(matches!(gns_construct(&b, &at_unit, None), Err(Error::NonzeroAtUnit(_))));
    }
}
