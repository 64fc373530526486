//! Convolution calculus on the dual of a finite-dimensional *-bialgebra.
//!
//! An [`OperatorMap`] is a linear map `B → M_{r×c}` stored by its values on
//! the basis. Convolution is `φ₁ ⋆ φ₂ = (φ₁ ⊗ φ₂) ∘ Δ`, with the output index
//! of `φ₁` as the slow Kronecker index.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{matrix_to_rows, rows_to_matrix, Bialgebra, Element, Fingerprint, Pair};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, C64, ZERO};

/// Linear map from a bialgebra into `rows × cols` complex matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMap {
    source: Fingerprint,
    rows: usize,
    cols: usize,
    values: Vec<CMatrix>,
}

/// Scalar-valued maps are operator maps with `1 × 1` values.
pub type Functional = OperatorMap;

impl OperatorMap {
    pub fn new(b: &Bialgebra, values: Vec<CMatrix>) -> Result<Self> {
        if values.len() != b.dim() {
            return Err(Error::DimensionMismatch {
                what: "operator map values",
                expected: b.dim(),
                found: values.len(),
            });
        }
        let (rows, cols) = values[0].shape();
        if values.iter().any(|v| v.shape() != (rows, cols)) {
            return Err(Error::InvalidInput(
                "operator map values have different shapes".into(),
            ));
        }
        Ok(Self {
            source: b.fingerprint(),
            rows,
            cols,
            values,
        })
    }

    pub fn zero(b: &Bialgebra, rows: usize, cols: usize) -> Self {
        Self {
            source: b.fingerprint(),
            rows,
            cols,
            values: vec![CMatrix::zeros(rows, cols); b.dim()],
        }
    }

    /// Functional with the given values on the basis.
    pub fn functional(b: &Bialgebra, coeffs: &CVector) -> Result<Self> {
        Self::new(
            b,
            coeffs.iter().map(|z| CMatrix::from_element(1, 1, *z)).collect(),
        )
    }

    /// The counit `ε` as a functional.
    pub fn counit(b: &Bialgebra) -> Self {
        Self::functional(b, b.counit()).expect("counit has the right length")
    }

    /// `x ↦ ε(x) m`.
    pub fn counit_times(b: &Bialgebra, m: &CMatrix) -> Self {
        Self {
            source: b.fingerprint(),
            rows: m.nrows(),
            cols: m.ncols(),
            values: b.counit().iter().map(|e| m * *e).collect(),
        }
    }

    /// A representation of the bialgebra viewed as an operator map.
    pub fn from_representation(b: &Bialgebra) -> Self {
        Self::new(b, b.representation().images.clone()).expect("images match the basis")
    }

    pub fn source(&self) -> Fingerprint {
        self.source
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &CMatrix {
        &self.values[i]
    }

    /// Basis values of a functional as a coordinate vector.
    pub fn coeffs(&self) -> CVector {
        CVector::from_iterator(self.dim(), self.values.iter().map(|m| m[(0, 0)]))
    }

    pub fn check_source(&self, b: &Bialgebra) -> Result<()> {
        if self.source != b.fingerprint() {
            return Err(Error::SourceMismatch);
        }
        Ok(())
    }

    pub fn apply(&self, x: &Element) -> Result<CMatrix> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "element",
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(self.apply_coords(&x.coords))
    }

    pub(crate) fn apply_coords(&self, x: &CVector) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for (xi, v) in x.iter().zip(&self.values) {
            if *xi != ZERO {
                out += v * *xi;
            }
        }
        out
    }

    /// Scalar value of a functional at `x`.
    pub fn eval(&self, x: &Element) -> Result<C64> {
        Ok(self.apply(x)?[(0, 0)])
    }

    pub fn map_values(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let values: Vec<CMatrix> = self.values.iter().map(f).collect();
        let (rows, cols) = values[0].shape();
        Self {
            source: self.source,
            rows,
            cols,
            values,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_values(|m| m * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.source != other.source {
            return Err(Error::SourceMismatch);
        }
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch {
                what: "operator map rows",
                expected: self.rows,
                found: other.rows,
            });
        }
        Ok(Self {
            source: self.source,
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    /// Largest entry-wise difference; infinite on shape or source mismatch.
    pub fn max_diff(&self, other: &Self) -> f64 {
        if self.source != other.source || (self.rows, self.cols) != (other.rows, other.cols) {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max(linalg::max_abs(&(a - b))))
    }

    /// `φ†(x) = φ(x*)†`.
    pub fn adjoint(&self, b: &Bialgebra) -> Result<Self> {
        self.check_source(b)?;
        let s = b.star_matrix();
        let d = self.dim();
        let values = (0..d)
            .map(|i| {
                let mut m = CMatrix::zeros(self.cols, self.rows);
                for k in 0..d {
                    let w = s[(k, i)].conj();
                    if w != ZERO {
                        m += self.values[k].adjoint() * w;
                    }
                }
                m
            })
            .collect();
        Ok(Self {
            source: self.source,
            rows: self.cols,
            cols: self.rows,
            values,
        })
    }

    /// Largest residual of `φ(x*) = φ(x)†` over the basis.
    pub fn reality_defect(&self, b: &Bialgebra) -> Result<f64> {
        Ok(self.adjoint(b)?.max_diff(self))
    }

    pub fn to_file(&self) -> OperatorMapFile {
        OperatorMapFile {
            source_hash: self.source.hex(),
            p: self.rows,
            cols: (self.cols != self.rows).then_some(self.cols),
            values: self.values.iter().map(matrix_to_rows).collect(),
        }
    }
}

/// JSON form of an operator map. `cols` defaults to `p`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OperatorMapFile {
    pub source_hash: String,
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub values: Vec<Vec<Vec<Pair>>>,
}

impl OperatorMapFile {
    pub fn into_map(self, b: &Bialgebra) -> Result<OperatorMap> {
        if self.source_hash != b.fingerprint().hex() {
            return Err(Error::SourceMismatch);
        }
        let cols = self.cols.unwrap_or(self.p);
        let values = self
            .values
            .iter()
            .map(|m| rows_to_matrix(m, "operator map values"))
            .collect::<Result<Vec<_>>>()?;
        if values.iter().any(|m| m.shape() != (self.p, cols)) {
            return Err(Error::DimensionMismatch {
                what: "operator map value rows",
                expected: self.p,
                found: values.first().map_or(0, |m| m.nrows()),
            });
        }
        OperatorMap::new(b, values)
    }
}

/// `φ₁ ⋆ φ₂ = (φ₁ ⊗ φ₂) ∘ Δ`.
pub fn convolve(b: &Bialgebra, phi1: &OperatorMap, phi2: &OperatorMap) -> Result<OperatorMap> {
    phi1.check_source(b)?;
    phi2.check_source(b)?;
    let d = b.dim();
    let mut values = Vec::with_capacity(d);
    for i in 0..d {
        let mut m = CMatrix::zeros(phi1.rows * phi2.rows, phi1.cols * phi2.cols);
        for j in 0..d {
            for k in 0..d {
                let w = b.coproduct_coeff(i, j, k);
                if w == ZERO {
                    continue;
                }
                m += linalg::kron(&phi1.values[j], &phi2.values[k]) * w;
            }
        }
        values.push(m);
    }
    Ok(OperatorMap {
        source: phi1.source,
        rows: phi1.rows * phi2.rows,
        cols: phi1.cols * phi2.cols,
        values,
    })
}

/// `φ^{⋆n}`, with `φ^{⋆0} = ε`.
pub fn convolution_power(b: &Bialgebra, phi: &OperatorMap, n: usize) -> Result<OperatorMap> {
    let mut acc = OperatorMap::counit(b);
    for _ in 0..n {
        acc = convolve(b, &acc, phi)?;
    }
    Ok(acc)
}

/// A linear map `B → B ⊗ M_{r×c}`: `Φ(e_i) = Σ_j e_j ⊗ images[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMap {
    source: Fingerprint,
    rows: usize,
    cols: usize,
    images: Vec<Vec<CMatrix>>,
}

impl LiftedMap {
    pub fn new(b: &Bialgebra, images: Vec<Vec<CMatrix>>) -> Result<Self> {
        let d = b.dim();
        if images.len() != d || images.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                what: "lifted map images",
                expected: d,
                found: images.len(),
            });
        }
        let (rows, cols) = images[0][0].shape();
        if images.iter().flatten().any(|m| m.shape() != (rows, cols)) {
            return Err(Error::InvalidInput("lifted map components have different shapes".into()));
        }
        Ok(Self {
            source: b.fingerprint(),
            rows,
            cols,
            images,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Component along `e_j` of `Φ(e_i)`.
    pub fn component(&self, i: usize, j: usize) -> &CMatrix {
        &self.images[i][j]
    }

    fn check_source(&self, b: &Bialgebra) -> Result<()> {
        if self.source != b.fingerprint() {
            return Err(Error::SourceMismatch);
        }
        Ok(())
    }

    /// Components of `Φ(x)` along the basis.
    pub fn apply(&self, x: &Element) -> Vec<CMatrix> {
        let d = self.images.len();
        (0..d)
            .map(|j| {
                let mut m = CMatrix::zeros(self.rows, self.cols);
                for (i, xi) in x.coords.iter().enumerate() {
                    if *xi != ZERO {
                        m += &self.images[i][j] * *xi;
                    }
                }
                m
            })
            .collect()
    }

    /// `(ρ₀ ⊗ id)(Φ(x))`, whose operator norm is the norm of `Φ(x)` in `B ⊗ M`.
    pub fn represent(&self, b: &Bialgebra, x: &Element) -> CMatrix {
        let rep = b.representation();
        let n = rep.size();
        let mut out = CMatrix::zeros(n * self.rows, n * self.cols);
        for (j, comp) in self.apply(x).iter().enumerate() {
            if linalg::max_abs(comp) > 0.0 {
                out += linalg::kron(&rep.images[j], comp);
            }
        }
        out
    }

    /// Tensor-extended composition `(Φ₁ ⊗ id) ∘ Φ₂`, the lift of `φ₁ ⋆ φ₂`.
    pub fn compose(&self, b: &Bialgebra, other: &LiftedMap) -> Result<LiftedMap> {
        self.check_source(b)?;
        other.check_source(b)?;
        let d = b.dim();
        let images = (0..d)
            .map(|i| {
                (0..d)
                    .map(|l| {
                        let mut m =
                            CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
                        for j in 0..d {
                            let a2 = &other.images[i][j];
                            if linalg::max_abs(a2) == 0.0 {
                                continue;
                            }
                            m += linalg::kron(&self.images[j][l], a2);
                        }
                        m
                    })
                    .collect()
            })
            .collect();
        Ok(LiftedMap {
            source: self.source,
            rows: self.rows * other.rows,
            cols: self.cols * other.cols,
            images,
        })
    }

    /// `Φ†(x) = Φ(x*)†` with the involution of `B ⊗ M` acting as `* ⊗ †`.
    pub fn adjoint(&self, b: &Bialgebra) -> Result<LiftedMap> {
        self.check_source(b)?;
        let d = b.dim();
        let s = b.star_matrix();
        // daggered[k][l]: component along e_l of Φ(e_k)†
        let daggered: Vec<Vec<CMatrix>> = (0..d)
            .map(|k| {
                (0..d)
                    .map(|l| {
                        let mut m = CMatrix::zeros(self.cols, self.rows);
                        for j in 0..d {
                            if s[(l, j)] != ZERO {
                                m += self.images[k][j].adjoint() * s[(l, j)];
                            }
                        }
                        m
                    })
                    .collect()
            })
            .collect();
        let images = (0..d)
            .map(|i| {
                (0..d)
                    .map(|l| {
                        let mut m = CMatrix::zeros(self.cols, self.rows);
                        for k in 0..d {
                            let w = s[(k, i)].conj();
                            if w != ZERO {
                                m += &daggered[k][l] * w;
                            }
                        }
                        m
                    })
                    .collect()
            })
            .collect();
        Ok(LiftedMap {
            source: self.source,
            rows: self.cols,
            cols: self.rows,
            images,
        })
    }

    pub fn max_diff(&self, other: &LiftedMap) -> f64 {
        if self.source != other.source || (self.rows, self.cols) != (other.rows, other.cols) {
            return f64::INFINITY;
        }
        self.images
            .iter()
            .flatten()
            .zip(other.images.iter().flatten())
            .fold(0.0, |acc, (a, b)| acc.max(linalg::max_abs(&(a - b))))
    }
}

/// `Rφ = (id ⊗ φ) ∘ Δ`.
pub fn r_map(b: &Bialgebra, phi: &OperatorMap) -> Result<LiftedMap> {
    phi.check_source(b)?;
    let d = b.dim();
    let images = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let mut m = CMatrix::zeros(phi.rows, phi.cols);
                    for k in 0..d {
                        let w = b.coproduct_coeff(i, j, k);
                        if w != ZERO {
                            m += &phi.values[k] * w;
                        }
                    }
                    m
                })
                .collect()
        })
        .collect();
    Ok(LiftedMap {
        source: phi.source,
        rows: phi.rows,
        cols: phi.cols,
        images,
    })
}

/// `EΦ = (ε ⊗ id) ∘ Φ`.
pub fn e_map(b: &Bialgebra, lifted: &LiftedMap) -> Result<OperatorMap> {
    lifted.check_source(b)?;
    let eps = b.counit();
    let values = lifted
        .images
        .iter()
        .map(|row| {
            let mut m = CMatrix::zeros(lifted.rows, lifted.cols);
            for (j, comp) in row.iter().enumerate() {
                if eps[j] != ZERO {
                    m += comp * eps[j];
                }
            }
            m
        })
        .collect();
    Ok(OperatorMap {
        source: lifted.source,
        rows: lifted.rows,
        cols: lifted.cols,
        values,
    })
}

fn require_functional(gamma: &OperatorMap) -> Result<()> {
    if (gamma.rows, gamma.cols) != (1, 1) {
        return Err(Error::DimensionMismatch {
            what: "functional output size",
            expected: 1,
            found: gamma.rows,
        });
    }
    Ok(())
}

/// The `d × d` matrix of `x ↦ (id ⊗ γ)Δx` on coordinates.
pub fn lifted_generator(b: &Bialgebra, gamma: &Functional) -> Result<CMatrix> {
    gamma.check_source(b)?;
    require_functional(gamma)?;
    let d = b.dim();
    let g = gamma.coeffs();
    let mut tau = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let w = b.coproduct_coeff(i, j, k);
                if w != ZERO {
                    tau[(j, i)] += w * g[k];
                }
            }
        }
    }
    Ok(tau)
}

/// `exp_⋆(tγ)` via the matrix exponential of the lifted generator.
/// Negative `t` is accepted as a formal inverse.
pub fn conv_exp(b: &Bialgebra, gamma: &Functional, t: f64) -> Result<Functional> {
    let tau = lifted_generator(b, gamma)?;
    let coeffs = (b.counit().transpose() * linalg::expm(&(tau * c(t, 0.0)))).transpose();
    Functional::functional(b, &coeffs)
}

/// Truncated series `Σ_{n ≤ n_max} tⁿ/n! γ^{⋆n}` together with a bound on
/// the absolute error of each coordinate.
pub fn conv_exp_series(
    b: &Bialgebra,
    gamma: &Functional,
    t: f64,
    n_max: usize,
) -> Result<(Functional, f64)> {
    let tau = lifted_generator(b, gamma)?;
    let mut power = OperatorMap::counit(b);
    let mut sum = power.clone();
    let mut coef = 1.0;
    for n in 1..=n_max {
        power = convolve(b, &power, gamma)?;
        coef *= t / n as f64;
        sum = sum.add(&power.scale(c(coef, 0.0)))?;
    }
    Ok((sum, series_tail_bound(b, &tau, t, n_max)))
}

/// `‖ε‖ (‖τ‖|t|)^{N+1}/(N+1)! · e^{‖τ‖|t|}`.
pub fn series_tail_bound(b: &Bialgebra, tau: &CMatrix, t: f64, n_max: usize) -> f64 {
    let a = linalg::op_norm(tau) * t.abs();
    let mut term = 1.0;
    for n in 1..=n_max + 1 {
        term *= a / n as f64;
    }
    b.counit().norm() * term * a.exp()
}

/// Smallest truncation order whose tail bound is at most `tol`.
pub fn series_order_for(b: &Bialgebra, gamma: &Functional, t: f64, tol: f64) -> Result<usize> {
    let tau = lifted_generator(b, gamma)?;
    let mut n = 0;
    while series_tail_bound(b, &tau, t, n) > tol {
        n += 1;
        if n > 10_000 {
            return Err(Error::InvalidInput("series does not converge in 10000 terms".into()));
        }
    }
    Ok(n)
}

/// `t ↦ λ_t = exp_⋆(tγ)` with a cache of evaluated times.
#[derive(Debug)]
pub struct ConvolutionSemigroup {
    generator: Functional,
    lifted: CMatrix,
    counit: CVector,
    cache: Mutex<HashMap<u64, CVector>>,
}

impl ConvolutionSemigroup {
    pub fn new(b: &Bialgebra, generator: Functional) -> Result<Self> {
        let lifted = lifted_generator(b, &generator)?;
        Ok(Self {
            generator,
            lifted,
            counit: b.counit().clone(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn generator(&self) -> &Functional {
        &self.generator
    }

    pub fn lifted_generator(&self) -> &CMatrix {
        &self.lifted
    }

    /// Coordinates of `λ_t` on the basis.
    pub fn coeffs_at(&self, t: f64) -> CVector {
        let key = t.to_bits();
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return v.clone();
        }
        let v = (self.counit.transpose() * linalg::expm(&(&self.lifted * c(t, 0.0)))).transpose();
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key, v.clone());
        v
    }

    pub fn at(&self, t: f64) -> Functional {
        let v = self.coeffs_at(t);
        OperatorMap {
            source: self.generator.source,
            rows: 1,
            cols: 1,
            values: v.iter().map(|z| CMatrix::from_element(1, 1, *z)).collect(),
        }
    }

    pub fn eval(&self, t: f64, x: &Element) -> C64 {
        self.coeffs_at(t).dot(&x.coords)
    }
}

/// `x ↦ ⟨ĉ′, φ(x) ĉ⟩` with `ĉ = (1, c)`.
pub fn semigroup_generator(
    phi: &OperatorMap,
    c_prime: &CVector,
    c_vec: &CVector,
) -> Result<Functional> {
    let n = phi.rows;
    if !phi.is_square() || n == 0 {
        return Err(Error::InvalidInput("generator values must be square".into()));
    }
    for v in [c_prime, c_vec] {
        if v.len() + 1 != n {
            return Err(Error::NoiseDimensionMismatch {
                generator: n - 1,
                step: v.len(),
            });
        }
    }
    let hat = |v: &CVector| {
        let mut h = CVector::zeros(n);
        h[0] = c(1.0, 0.0);
        h.rows_mut(1, n - 1).copy_from(v);
        h
    };
    let (hp, h) = (hat(c_prime), hat(c_vec));
    Ok(phi.map_values(|m| CMatrix::from_element(1, 1, hp.dotc(&(m * &h)))))
}

// ---------------------------------------------------------------------------
// Amplified norms

/// Options for the multistart search behind [`amplified_norm`].
#[derive(Debug, Clone, Copy)]
pub struct NormSearch {
    pub seeds: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for NormSearch {
    fn default() -> Self {
        Self {
            seeds: 32,
            iterations: 150,
            seed: 0x5EED,
        }
    }
}

/// A lower estimate of `‖φ⁽ⁿ⁾‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub level: usize,
    pub value: f64,
    pub lower_bound: bool,
}

struct Amplifier<'a> {
    blocks: &'a [usize],
    /// `rinv[i]` lists `(b, p, q, w)` with `X_i += w W_b[(p,·),(q,·)]`.
    rinv: Vec<Vec<(usize, usize, usize, C64)>>,
    phi: &'a OperatorMap,
    rep: &'a [CMatrix],
    n: usize,
}

impl Amplifier<'_> {
    fn coords(&self, w: &[CMatrix]) -> Vec<CMatrix> {
        let n = self.n;
        self.rinv
            .iter()
            .map(|terms| {
                let mut x = CMatrix::zeros(n, n);
                for &(b, p, q, wt) in terms {
                    x += w[b].view((p * n, q * n), (n, n)) * wt;
                }
                x
            })
            .collect()
    }

    fn amplify(&self, images: &[CMatrix], xs: &[CMatrix]) -> CMatrix {
        let (r, cc) = images[0].shape();
        let mut out = CMatrix::zeros(r * self.n, cc * self.n);
        for (img, x) in images.iter().zip(xs) {
            if linalg::max_abs(x) > 0.0 {
                out += linalg::kron(img, x);
            }
        }
        out
    }

    /// Ratio `‖φ⁽ⁿ⁾(X)‖ / ‖ρ⁽ⁿ⁾(X)‖` and the gradient blocks of the numerator.
    fn objective(&self, w: &[CMatrix], want_grad: bool) -> (f64, Option<Vec<CMatrix>>) {
        let xs = self.coords(w);
        let denom = linalg::op_norm(&self.amplify(self.rep, &xs));
        if denom == 0.0 {
            return (0.0, None);
        }
        let m = self.amplify(&self.phi.values, &xs);
        let dec = linalg::svd(&m);
        let sigma = dec.s[0];
        let value = sigma / denom;
        if !want_grad {
            return (value, None);
        }
        let u = dec.u.column(0).into_owned();
        let v = dec.v.column(0).into_owned();
        let n = self.n;
        let kmat = &v * u.adjoint();
        let (r, cc) = (self.phi.rows, self.phi.cols);
        // H_i = Σ_{r,s} φ_i[r,s] K_{(s,r)} with K blocked in n×n pieces
        let hs: Vec<CMatrix> = self
            .phi
            .values
            .iter()
            .map(|phi_i| {
                let mut h = CMatrix::zeros(n, n);
                for a in 0..r {
                    for s in 0..cc {
                        let wt = phi_i[(a, s)];
                        if wt != ZERO {
                            h += kmat.view((s * n, a * n), (n, n)) * wt;
                        }
                    }
                }
                h
            })
            .collect();
        let mut grads: Vec<CMatrix> = self
            .blocks
            .iter()
            .map(|&nb| CMatrix::zeros(nb * n, nb * n))
            .collect();
        for (i, terms) in self.rinv.iter().enumerate() {
            for &(b, p, q, wt) in terms {
                // G_b[(q,a'),(p,a)] += wt H_i[a',a]
                let mut view = grads[b].view_mut((q * n, p * n), (n, n));
                view += &hs[i] * wt;
            }
        }
        (value, Some(grads))
    }
}

fn block_identity(blocks: &[usize], n: usize) -> Vec<CMatrix> {
    blocks
        .iter()
        .map(|&nb| CMatrix::identity(nb * n, nb * n))
        .collect()
}

fn ascend(amp: &Amplifier<'_>, start: Vec<CMatrix>, iterations: usize) -> (f64, Vec<CMatrix>) {
    let mut w = start;
    let (mut value, mut grad) = amp.objective(&w, true);
    let mut step = 0.5;
    for _ in 0..iterations {
        let Some(g) = grad.take() else { break };
        // U ← U exp(iηH), H the Hermitian part of i G U
        let dirs: Vec<CMatrix> = w
            .iter()
            .zip(&g)
            .map(|(u, gb)| linalg::hermitian_part(&(gb * u * c(0.0, 1.0))))
            .collect();
        let gnorm: f64 = dirs.iter().map(|h| h.norm_squared()).sum::<f64>().sqrt();
        if gnorm < 1e-12 {
            break;
        }
        let mut improved = false;
        while step > 1e-10 {
            let trial: Vec<CMatrix> = w
                .iter()
                .zip(&dirs)
                .map(|(u, h)| u * linalg::expm(&(h * c(0.0, step / gnorm))))
                .collect();
            let (tv, tg) = amp.objective(&trial, true);
            if tv > value {
                w = trial;
                value = tv;
                grad = tg;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (value, w)
}

fn embed(prev: &[CMatrix], blocks: &[usize], n: usize) -> Vec<CMatrix> {
    // X ↦ X ⊕ 1 from level n-1 to level n; block index (p, a)
    prev.iter()
        .zip(blocks)
        .map(|(u, &nb)| {
            let m = n - 1;
            let mut out = CMatrix::zeros(nb * n, nb * n);
            for p in 0..nb {
                for q in 0..nb {
                    for a in 0..m {
                        for a2 in 0..m {
                            out[(p * n + a, q * n + a2)] = u[(p * m + a, q * m + a2)];
                        }
                    }
                }
                out[(p * n + m, p * n + m)] = c(1.0, 0.0);
            }
            out
        })
        .collect()
}

/// Lower estimates of `‖φ⁽ᵏ⁾‖` for `k = 1..=n`, nondecreasing in `k`.
///
/// The search runs over block unitaries of the represented level-`k` algebra,
/// mapped back through the representation; each value is the attained ratio
/// `‖φ⁽ᵏ⁾(X)‖/‖X‖` and so a valid lower bound.
pub fn amplified_norm_profile(
    b: &Bialgebra,
    phi: &OperatorMap,
    n: usize,
    search: &NormSearch,
) -> Result<Vec<NormEstimate>> {
    phi.check_source(b)?;
    if n == 0 {
        return Err(Error::InvalidInput("amplification level must be at least 1".into()));
    }
    let rep = b.representation();
    let pinv = linalg::pinv(&rep.block_entry_matrix(), 1e-12);
    let mut rinv = vec![Vec::new(); b.dim()];
    let mut row = 0;
    for (blk, &nb) in rep.blocks.iter().enumerate() {
        for p in 0..nb {
            for q in 0..nb {
                for (i, terms) in rinv.iter_mut().enumerate() {
                    let wt = pinv[(i, row)];
                    if wt.norm() > 1e-15 {
                        terms.push((blk, p, q, wt));
                    }
                }
                row += 1;
            }
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(search.seed);
    let mut out: Vec<NormEstimate> = Vec::with_capacity(n);
    let mut best_w: Option<Vec<CMatrix>> = None;
    for level in 1..=n {
        let amp = Amplifier {
            blocks: &rep.blocks,
            rinv: rinv.clone(),
            phi,
            rep: &rep.images,
            n: level,
        };
        let mut starts = vec![block_identity(&rep.blocks, level)];
        if let Some(prev) = &best_w {
            starts.push(embed(prev, &rep.blocks, level));
        }
        for _ in 0..search.seeds {
            starts.push(
                rep.blocks
                    .iter()
                    .map(|&nb| linalg::random_unitary(&mut rng, nb * level))
                    .collect(),
            );
        }
        let mut best = (f64::NEG_INFINITY, Vec::new());
        for s in starts {
            let (v, w) = ascend(&amp, s, search.iterations);
            if v > best.0 {
                best = (v, w);
            }
        }
        let prev = out.last().map_or(0.0, |e| e.value);
        out.push(NormEstimate {
            level,
            value: best.0.max(prev),
            lower_bound: true,
        });
        best_w = Some(best.1);
    }
    Ok(out)
}

/// Lower estimate of `‖φ⁽ⁿ⁾‖`.
pub fn amplified_norm(
    b: &Bialgebra,
    phi: &OperatorMap,
    n: usize,
    search: &NormSearch,
) -> Result<NormEstimate> {
    Ok(*amplified_norm_profile(b, phi, n, search)?
        .last()
        .expect("n >= 1"))
}
