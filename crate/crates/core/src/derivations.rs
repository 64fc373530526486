//! `(π′, π)`-derivations `δ(ab) = δ(a)π(b) + π′(a)δ(b)`, their inner
//! implementations `δ(a) = π′(a)T − Tπ(a)`, and χ-structure maps.

use serde::{Deserialize, Serialize};

use crate::algebra::{Bialgebra, Element};
use crate::cocycle::assemble;
use crate::convolution::{Functional, OperatorMap, OperatorMapFile};
use crate::error::{Error, Result};
use crate::generators::structure_residuals;
use crate::linalg::{self, CMatrix, CVector, C64};

/// Representations `π′` (on `ℂ^{n′}`), `π` (on `ℂ^n`) and a candidate
/// derivation `δ` with values in `n′ × n` matrices.
#[derive(Debug, Clone)]
pub struct DerivationProblem {
    pub pi_prime: OperatorMap,
    pub pi: OperatorMap,
    pub delta: OperatorMap,
}

impl DerivationProblem {
    fn shapes(&self, b: &Bialgebra) -> Result<(usize, usize)> {
        for m in [&self.pi_prime, &self.pi, &self.delta] {
            m.check_source(b)?;
        }
        let (np, n) = (self.pi_prime.rows(), self.pi.rows());
        if !self.pi_prime.is_square() || !self.pi.is_square() {
            return Err(Error::InvalidInput("representations must be square".into()));
        }
        if (self.delta.rows(), self.delta.cols()) != (np, n) {
            return Err(Error::DimensionMismatch {
                what: "derivation value rows",
                expected: np,
                found: self.delta.rows(),
            });
        }
        Ok((np, n))
    }
}

/// JSON layout of a [`DerivationProblem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivationProblemFile {
    pub pi_prime: OperatorMapFile,
    pub pi: OperatorMapFile,
    pub delta: OperatorMapFile,
}

impl DerivationProblemFile {
    pub fn into_problem(self, b: &Bialgebra) -> Result<DerivationProblem> {
        Ok(DerivationProblem {
            pi_prime: self.pi_prime.into_map(b)?,
            pi: self.pi.into_map(b)?,
            delta: self.delta.into_map(b)?,
        })
    }
}

/// Max Leibniz residual over basis pairs.
pub fn check_derivation(b: &Bialgebra, p: &DerivationProblem) -> Result<f64> {
    p.shapes(b)?;
    let d = b.dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let prod = b.multiply(&b.basis(i), &b.basis(j))?;
            let lhs = p.delta.apply(&prod)?;
            let rhs = p.delta.value(i) * p.pi.value(j) + p.pi_prime.value(i) * p.delta.value(j);
            worst = worst.max(linalg::max_abs(&(lhs - rhs)));
        }
    }
    Ok(worst)
}

/// `δ(a) = π′(a)T − Tπ(a)`.
pub fn inner_derivation(
    b: &Bialgebra,
    pi_prime: &OperatorMap,
    pi: &OperatorMap,
    t: &CMatrix,
) -> Result<OperatorMap> {
    let values = pi_prime
        .values()
        .iter()
        .zip(pi.values())
        .map(|(pp, p)| pp * t - t * p)
        .collect();
    OperatorMap::new(b, values)
}

#[derive(Debug, Clone, Serialize)]
pub struct InnerSolution {
    #[serde(skip)]
    pub t: CMatrix,
    /// `max_a ‖π′(a)T − Tπ(a) − δ(a)‖` over the basis.
    pub residual: f64,
}

fn commutator_operator(pp: &CMatrix, p: &CMatrix) -> CMatrix {
    let (np, n) = (pp.nrows(), p.nrows());
    linalg::kron(&CMatrix::identity(n, n), pp) - linalg::kron(&p.transpose(), &CMatrix::identity(np, np))
}

/// Minimal-norm `T` implementing `δ`, by SVD least squares over the stacked
/// systems `(I ⊗ π′(e_i) − π(e_i)ᵀ ⊗ I) vec T = vec δ(e_i)`.
pub fn solve_inner(b: &Bialgebra, p: &DerivationProblem) -> Result<InnerSolution> {
    let (np, n) = p.shapes(b)?;
    let leibniz = check_derivation(b, p)?;
    if leibniz > 1e-8 {
        return Err(Error::NotADerivation(leibniz));
    }
    let d = b.dim();
    let mut a = CMatrix::zeros(d * np * n, np * n);
    let mut rhs = CMatrix::zeros(d * np * n, 1);
    for i in 0..d {
        a.view_mut((i * np * n, 0), (np * n, np * n))
            .copy_from(&commutator_operator(p.pi_prime.value(i), p.pi.value(i)));
        rhs.view_mut((i * np * n, 0), (np * n, 1))
            .copy_from(&linalg::vec_of(p.delta.value(i)));
    }
    let (sol, _) = linalg::lstsq(&a, &rhs, 1e-12);
    let t = linalg::unvec(&sol.column(0).into_owned(), np, n);
    let implemented = inner_derivation(b, &p.pi_prime, &p.pi, &t)?;
    let residual = implemented.max_diff(&p.delta);
    if residual > 1e-9 {
        return Err(Error::NotADerivation(residual));
    }
    Ok(InnerSolution { t, residual })
}

/// Dimension of the space of all `(π′, π)`-derivations: the nullity of the
/// Leibniz constraints as a linear system in `(δ(e_0), …, δ(e_{d−1}))`.
pub fn derivation_space_dimension(
    b: &Bialgebra,
    pi_prime: &OperatorMap,
    pi: &OperatorMap,
) -> Result<usize> {
    pi_prime.check_source(b)?;
    pi.check_source(b)?;
    let d = b.dim();
    let (np, n) = (pi_prime.rows(), pi.rows());
    let blk = np * n;
    let mut m = CMatrix::zeros(d * d * blk, d * blk);
    for i in 0..d {
        for j in 0..d {
            let row = (i * d + j) * blk;
            let prod = b.left_mult(i).column(j).into_owned();
            for (k, w) in prod.iter().enumerate() {
                if w.norm() > 0.0 {
                    let mut v = m.view_mut((row, k * blk), (blk, blk));
                    v += CMatrix::identity(blk, blk) * *w;
                }
            }
            // − δ_i π_j: vec(δ_i π_j) = (π_jᵀ ⊗ I) vec δ_i
            let mut v = m.view_mut((row, i * blk), (blk, blk));
            v -= linalg::kron(&pi.value(j).transpose(), &CMatrix::identity(np, np));
            // − π′_i δ_j: vec(π′_i δ_j) = (I ⊗ π′_i) vec δ_j
            let mut v = m.view_mut((row, j * blk), (blk, blk));
            v -= linalg::kron(&CMatrix::identity(n, n), pi_prime.value(i));
        }
    }
    Ok(d * blk - linalg::rank(&m, 1e-10))
}

/// Residual of `χ(ab) = χ(a)χ(b)`, `χ(a*) = conj χ(a)`, `χ(1) = 1`.
pub fn character_defect(b: &Bialgebra, chi: &CVector) -> Result<f64> {
    if chi.len() != b.dim() {
        return Err(Error::DimensionMismatch {
            what: "character",
            expected: b.dim(),
            found: chi.len(),
        });
    }
    let d = b.dim();
    let mut worst = (chi.dot(&b.unit().coords) - C64::new(1.0, 0.0)).norm();
    for i in 0..d {
        worst = worst.max((chi.dot(&b.star_basis(i)) - chi[i].conj()).norm());
        for j in 0..d {
            let prod = b.left_mult(i).column(j).into_owned();
            worst = worst.max((chi.dot(&prod) - chi[i] * chi[j]).norm());
        }
    }
    Ok(worst)
}

/// Residuals of the χ-structure relation
/// `φ(a*b) = φ(a)†χ(b) + conj χ(a) φ(b) + φ(a)† Δ φ(b)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChiStructureReport {
    pub relation: f64,
    pub reality: f64,
}

impl ChiStructureReport {
    pub fn max(&self) -> f64 {
        self.relation.max(self.reality)
    }
}

pub fn check_chi_structure(b: &Bialgebra, phi: &OperatorMap, chi: &CVector) -> Result<ChiStructureReport> {
    let defect = character_defect(b, chi)?;
    if defect > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "χ is not a *-character (residual {defect:.3e})"
        )));
    }
    if !phi.is_square() || phi.rows() == 0 {
        return Err(Error::InvalidInput("χ-structure values must be square".into()));
    }
    let r = structure_residuals(b, phi, chi)?;
    Ok(ChiStructureReport {
        relation: r.relation,
        reality: r.reality,
    })
}

/// The χ-structure map implemented by `(π, ξ)`:
/// `a ↦ [⟨ξ|; I] (π(a) − χ(a) I) [|ξ⟩, I]`.
pub fn implemented_chi_structure(
    b: &Bialgebra,
    pi: &OperatorMap,
    xi: &CVector,
    chi: &CVector,
) -> Result<OperatorMap> {
    let n = pi.rows();
    if xi.len() != n {
        return Err(Error::DimensionMismatch {
            what: "implementing vector",
            expected: n,
            found: xi.len(),
        });
    }
    let values = pi
        .values()
        .iter()
        .zip(chi.iter())
        .map(|(p, x)| {
            let nu = p - CMatrix::identity(n, n) * *x;
            let col = &nu * xi;
            let row = nu.adjoint() * xi;
            assemble(xi.dotc(&col), &col, &row.map(|z| z.conj()), &nu)
        })
        .collect();
    OperatorMap::new(b, values)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChiImplementationResiduals {
    pub relation: f64,
    /// `max_a ‖ν(a)ξ − δ(a)‖`.
    pub xi: f64,
    /// `λ` against `⟨ξ, ν(·)ξ⟩` on products of `Ker χ` and at `1`.
    pub lambda: f64,
    /// Entrywise difference between the input and the map rebuilt from `(π, ξ)`.
    pub reassembly: f64,
}

#[derive(Debug, Clone)]
pub struct ChiImplementation {
    pub pi: OperatorMap,
    pub xi: CVector,
    pub lambda: Functional,
    pub residuals: ChiImplementationResiduals,
}

/// Recovers `(π, ξ, λ)` from a χ-structure map.
pub fn implement_chi_structure(
    b: &Bialgebra,
    phi: &OperatorMap,
    chi: &CVector,
) -> Result<ChiImplementation> {
    let report = check_chi_structure(b, phi, chi)?;
    if report.max() > 1e-8 {
        return Err(Error::NotChiStructure(report.max()));
    }
    let d = b.dim();
    let n = phi.rows() - 1;
    let nus: Vec<CMatrix> = phi
        .values()
        .iter()
        .map(|m| m.view((1, 1), (n, n)).into_owned())
        .collect();
    let deltas: Vec<CVector> = phi
        .values()
        .iter()
        .map(|m| m.view((1, 0), (n, 1)).column(0).into_owned())
        .collect();
    let pi = OperatorMap::new(
        b,
        nus.iter()
            .zip(chi.iter())
            .map(|(nu, x)| nu + CMatrix::identity(n, n) * *x)
            .collect(),
    )?;
    let lambda = phi.map_values(|m| m.view((0, 0), (1, 1)).into_owned());

    let xi = if n == 0 {
        CVector::zeros(0)
    } else {
        let mut a = CMatrix::zeros(d * n, n);
        let mut rhs = CMatrix::zeros(d * n, 1);
        for i in 0..d {
            a.view_mut((i * n, 0), (n, n)).copy_from(&nus[i]);
            rhs.view_mut((i * n, 0), (n, 1)).copy_from(&deltas[i]);
        }
        linalg::lstsq(&a, &rhs, 1e-12).0.column(0).into_owned()
    };
    let xi_res = (0..d)
        .map(|i| linalg::max_abs_vec(&(&nus[i] * &xi - &deltas[i])))
        .fold(0.0, f64::max);
    if xi_res > 1e-9 {
        return Err(Error::NotImplemented(xi_res));
    }

    let lam_tilde = |coords: &CVector| {
        let mut nu = CMatrix::zeros(n, n);
        for (k, w) in coords.iter().enumerate() {
            nu += &nus[k] * *w;
        }
        xi.dotc(&(nu * &xi))
    };
    let row = CMatrix::from_rows(&[chi.transpose()]);
    let kernel = linalg::null_space(&row, 1e-12);
    let mut lambda_res = (lambda.eval(&b.unit())? - lam_tilde(&b.unit().coords)).norm();
    for i in 0..kernel.ncols() {
        let a = b.star(&Element::new(kernel.column(i).into_owned()))?;
        for j in 0..kernel.ncols() {
            let prod = b.multiply(&a, &Element::new(kernel.column(j).into_owned()))?;
            lambda_res = lambda_res.max((lambda.eval(&prod)? - lam_tilde(&prod.coords)).norm());
        }
    }
    let rebuilt = implemented_chi_structure(b, &pi, &xi, chi)?;
    let residuals = ChiImplementationResiduals {
        relation: report.relation,
        xi: xi_res,
        lambda: lambda_res,
        reassembly: rebuilt.max_diff(phi),
    };
    Ok(ChiImplementation {
        pi,
        xi,
        lambda,
        residuals,
    })
}
