//! Finite-dimensional *-bialgebras given by structure tensors together with a
//! faithful block-diagonal *-representation.
//!
//! Coordinates are taken relative to a fixed basis `e_0 .. e_{d-1}`:
//!
//! * `e_i e_j = Σ_k m[i][j][k] e_k`, stored as left-multiplication matrices;
//! * `x* = S · conj(x)` for a fixed `d × d` matrix `S`;
//! * `Δ e_i = Σ_{j,k} Δ[(j,k), i] e_j ⊗ e_k` with row index `j * d + k`;
//! * `ε(x) = Σ_i ε_i x_i`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::CayleyTable;
use crate::linalg::{self, c, CMatrix, CVector, C64, ONE, ZERO};

/// Numerical tolerances used by structural checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Exact-arithmetic identities (associativity, coassociativity, ...).
    pub structural: f64,
    /// Spectral positivity threshold: eigenvalues `>= -spectral` count as nonnegative.
    pub spectral: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-12,
            spectral: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BialgebraKind {
    /// Coproduct is a unital *-homomorphism.
    Bialgebra,
    /// Coproduct is only unital and completely positive.
    Hyperbialgebra,
}

/// Block-diagonal matrix images of the basis elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub blocks: Vec<usize>,
    pub images: Vec<CMatrix>,
}

impl Representation {
    pub fn size(&self) -> usize {
        self.blocks.iter().sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for &b in &self.blocks {
            off.push(acc);
            acc += b;
        }
        off
    }

    /// Image of the block `b` of a full `N × N` matrix.
    pub fn block_of(&self, m: &CMatrix, b: usize) -> CMatrix {
        let off = self.offsets()[b];
        let n = self.blocks[b];
        m.view((off, off), (n, n)).into_owned()
    }

    /// Matrix `R` with `R[(b, p, q), i] = ρ_b(e_i)[p, q]`: coordinates to block entries.
    pub fn block_entry_matrix(&self) -> CMatrix {
        let rows: usize = self.blocks.iter().map(|n| n * n).sum();
        let d = self.images.len();
        let offs = self.offsets();
        let mut r = CMatrix::zeros(rows, d);
        for (i, img) in self.images.iter().enumerate() {
            let mut row = 0;
            for (b, &n) in self.blocks.iter().enumerate() {
                for p in 0..n {
                    for q in 0..n {
                        r[(row, i)] = img[(offs[b] + p, offs[b] + q)];
                        row += 1;
                    }
                }
            }
        }
        r
    }

    /// True when the image is the whole block algebra `⊕ M_{n_b}`.
    pub fn is_full_block_algebra(&self) -> bool {
        let full: usize = self.blocks.iter().map(|n| n * n).sum();
        full == self.images.len() && linalg::rank(&self.block_entry_matrix(), 1e-10) == full
    }
}

/// An element of a bialgebra, by coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub coords: CVector,
}

impl Element {
    pub fn new(coords: CVector) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// SHA-256 digest of a bialgebra's canonical file form.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint(pub [u8; 32]);

impl Fingerprint {
    pub fn hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fingerprint({})", &self.hex()[..16])
    }
}

/// Raw structure data; not yet checked against the axioms.
#[derive(Debug, Clone)]
pub struct BialgebraData {
    pub labels: Vec<String>,
    pub unit: CVector,
    /// `left_mult[i]` is the matrix of `y ↦ e_i y`.
    pub left_mult: Vec<CMatrix>,
    pub star_matrix: CMatrix,
    pub counit: CVector,
    /// `d² × d`, column `i` holds `Δ e_i`.
    pub coproduct: CMatrix,
    pub rep: Representation,
    pub alt_rep: Option<Representation>,
    pub kind: BialgebraKind,
}

/// Outcome of one axiom check.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub passed: bool,
    pub residual: f64,
    pub worst_at: String,
}

impl AxiomCheck {
    fn new(axiom: &str, residual: f64, tol: f64, worst_at: String) -> Self {
        Self {
            axiom: axiom.to_string(),
            passed: residual.is_finite() && residual <= tol,
            residual,
            worst_at,
        }
    }
}

/// Tracks the largest residual seen and where it occurred.
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            at: String::from("-"),
        }
    }

    fn see(&mut self, r: f64, at: impl FnOnce() -> String) {
        if r > self.value || r.is_nan() {
            self.value = r;
            self.at = at();
        }
    }
}

impl BialgebraData {
    pub fn dim(&self) -> usize {
        self.unit.len()
    }

    fn multiply_coords(&self, x: &CVector, y: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim());
        for (i, xi) in x.iter().enumerate() {
            if *xi != ZERO {
                out += (&self.left_mult[i] * y) * *xi;
            }
        }
        out
    }

    fn star_coords(&self, x: &CVector) -> CVector {
        &self.star_matrix * x.map(|z| z.conj())
    }

    fn represent_with(&self, rep: &Representation, x: &CVector) -> CMatrix {
        let n = rep.size();
        let mut m = CMatrix::zeros(n, n);
        for (i, xi) in x.iter().enumerate() {
            if *xi != ZERO {
                m += &rep.images[i] * *xi;
            }
        }
        m
    }

    /// Multiply two elements of `B ⊗ B` given in `d²` coordinates.
    fn tensor_multiply(&self, a: &CVector, b: &CVector) -> CVector {
        let d = self.dim();
        let mut out = CVector::zeros(d * d);
        for p in 0..d {
            for q in 0..d {
                let apq = a[p * d + q];
                if apq == ZERO {
                    continue;
                }
                for r in 0..d {
                    for s in 0..d {
                        let brs = b[r * d + s];
                        if brs == ZERO {
                            continue;
                        }
                        let w = apq * brs;
                        let left = self.left_mult[p].column(r);
                        let right = self.left_mult[q].column(s);
                        for (u, lu) in left.iter().enumerate() {
                            if *lu == ZERO {
                                continue;
                            }
                            for (v, rv) in right.iter().enumerate() {
                                out[u * d + v] += w * lu * rv;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn tensor_star(&self, a: &CVector) -> CVector {
        let d = self.dim();
        let mut out = CVector::zeros(d * d);
        for p in 0..d {
            for q in 0..d {
                let apq = a[p * d + q].conj();
                if apq == ZERO {
                    continue;
                }
                let sp = self.star_matrix.column(p);
                let sq = self.star_matrix.column(q);
                for (u, su) in sp.iter().enumerate() {
                    for (v, sv) in sq.iter().enumerate() {
                        out[u * d + v] += apq * su * sv;
                    }
                }
            }
        }
        out
    }

    fn shape_errors(&self) -> Option<String> {
        let d = self.dim();
        if d == 0 {
            return Some("dimension must be positive".into());
        }
        if self.labels.len() != d {
            return Some(format!("{} labels for dimension {d}", self.labels.len()));
        }
        if self.left_mult.len() != d || self.left_mult.iter().any(|m| m.shape() != (d, d)) {
            return Some("multiplication tensor has wrong shape".into());
        }
        if self.star_matrix.shape() != (d, d) {
            return Some("star matrix has wrong shape".into());
        }
        if self.counit.len() != d {
            return Some("counit has wrong length".into());
        }
        if self.coproduct.shape() != (d * d, d) {
            return Some("coproduct has wrong shape".into());
        }
        for (name, rep) in std::iter::once(("rep", &self.rep))
            .chain(self.alt_rep.as_ref().map(|r| ("alt_rep", r)))
        {
            let n = rep.size();
            if rep.images.len() != d || rep.images.iter().any(|m| m.shape() != (n, n)) {
                return Some(format!("{name} images have wrong shape"));
            }
            if rep.blocks.contains(&0) {
                return Some(format!("{name} has an empty block"));
            }
        }
        None
    }

    /// Runs every axiom check and returns the full report, in a fixed order.
    pub fn axiom_report(&self, tol: &Tolerances) -> Vec<AxiomCheck> {
        let mut out = Vec::new();
        if let Some(msg) = self.shape_errors() {
            out.push(AxiomCheck {
                axiom: "shape".into(),
                passed: false,
                residual: f64::INFINITY,
                worst_at: msg,
            });
            return out;
        }
        let d = self.dim();
        let s = tol.structural;
        let basis = |i: usize| linalg::unit_vector(d, i);

        let finite = self.left_mult.iter().all(|m| m.iter().all(|z| z.is_finite()))
            && self.coproduct.iter().all(|z| z.is_finite())
            && self.star_matrix.iter().all(|z| z.is_finite())
            && self.counit.iter().all(|z| z.is_finite())
            && self.unit.iter().all(|z| z.is_finite());
        out.push(AxiomCheck::new(
            "finite entries",
            if finite { 0.0 } else { f64::INFINITY },
            s,
            "-".into(),
        ));
        if !finite {
            return out;
        }

        // associativity
        let mut w = Worst::new();
        let prods: Vec<Vec<CVector>> = (0..d)
            .map(|i| (0..d).map(|j| self.left_mult[i].column(j).into_owned()).collect())
            .collect();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let lhs = self.multiply_coords(&prods[i][j], &basis(k));
                    let rhs = &self.left_mult[i] * &prods[j][k];
                    w.see(linalg::max_abs_vec(&(lhs - rhs)), || format!("({i},{j},{k})"));
                }
            }
        }
        out.push(AxiomCheck::new("associativity", w.value, s, w.at));

        // unit
        let mut w = Worst::new();
        for i in 0..d {
            let l = self.multiply_coords(&self.unit, &basis(i)) - basis(i);
            let r = self.multiply_coords(&basis(i), &self.unit) - basis(i);
            w.see(linalg::max_abs_vec(&l).max(linalg::max_abs_vec(&r)), || format!("({i})"));
        }
        out.push(AxiomCheck::new("unit", w.value, s, w.at));

        // star involution and anti-multiplicativity
        let ss = &self.star_matrix * self.star_matrix.map(|z| z.conj());
        let inv_res = linalg::max_abs(&(ss - CMatrix::identity(d, d)));
        out.push(AxiomCheck::new("star involution", inv_res, s, "-".into()));
        let mut w = Worst::new();
        for i in 0..d {
            for j in 0..d {
                let lhs = self.star_coords(&prods[i][j]);
                let rhs = self.multiply_coords(
                    &self.star_coords(&basis(j)),
                    &self.star_coords(&basis(i)),
                );
                w.see(linalg::max_abs_vec(&(lhs - rhs)), || format!("({i},{j})"));
            }
        }
        out.push(AxiomCheck::new("star antimultiplicative", w.value, s, w.at));

        // OSC1 coassociativity
        let mut w = Worst::new();
        let cop = &self.coproduct;
        for i in 0..d {
            let mut left = vec![ZERO; d * d * d];
            let mut right = vec![ZERO; d * d * d];
            for j in 0..d {
                for k in 0..d {
                    let a = cop[(j * d + k, i)];
                    if a == ZERO {
                        continue;
                    }
                    for p in 0..d {
                        for q in 0..d {
                            left[(p * d + q) * d + k] += a * cop[(p * d + q, j)];
                            right[(j * d + p) * d + q] += a * cop[(p * d + q, k)];
                        }
                    }
                }
            }
            let r = left
                .iter()
                .zip(&right)
                .fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()));
            w.see(r, || format!("({i})"));
        }
        out.push(AxiomCheck::new("OSC1 coassociativity", w.value, s, w.at));

        // OSC2 counit property
        let mut w = Worst::new();
        for i in 0..d {
            let mut left = CVector::zeros(d);
            let mut right = CVector::zeros(d);
            for j in 0..d {
                for k in 0..d {
                    let a = cop[(j * d + k, i)];
                    left[k] += a * self.counit[j];
                    right[j] += a * self.counit[k];
                }
            }
            let r = linalg::max_abs_vec(&(left - basis(i)))
                .max(linalg::max_abs_vec(&(right - basis(i))));
            w.see(r, || format!("({i})"));
        }
        out.push(AxiomCheck::new("OSC2 counit property", w.value, s, w.at));

        // counit is a unital *-character
        let eps = |x: &CVector| self.counit.transpose() * x;
        let mut w = Worst::new();
        w.see((eps(&self.unit)[0] - ONE).norm(), || "unit".into());
        for i in 0..d {
            let r = (eps(&self.star_coords(&basis(i)))[0] - self.counit[i].conj()).norm();
            w.see(r, || format!("star({i})"));
            for j in 0..d {
                let r = (eps(&prods[i][j])[0] - self.counit[i] * self.counit[j]).norm();
                w.see(r, || format!("({i},{j})"));
            }
        }
        out.push(AxiomCheck::new("counit character", w.value, s, w.at));

        // coproduct unital
        let delta = |x: &CVector| cop * x;
        let unit_tensor = linalg::kron_vec(&self.unit, &self.unit);
        let r = linalg::max_abs_vec(&(delta(&self.unit) - unit_tensor));
        out.push(AxiomCheck::new("coproduct unital", r, s, "-".into()));

        match self.kind {
            BialgebraKind::Bialgebra => {
                let mut w = Worst::new();
                let deltas: Vec<CVector> = (0..d).map(|i| cop.column(i).into_owned()).collect();
                for i in 0..d {
                    for j in 0..d {
                        let lhs = delta(&prods[i][j]);
                        let rhs = self.tensor_multiply(&deltas[i], &deltas[j]);
                        w.see(linalg::max_abs_vec(&(lhs - rhs)), || format!("({i},{j})"));
                    }
                    let lhs = delta(&self.star_coords(&basis(i)));
                    let rhs = self.tensor_star(&deltas[i]);
                    w.see(linalg::max_abs_vec(&(lhs - rhs)), || format!("star({i})"));
                }
                out.push(AxiomCheck::new("coproduct *-homomorphic", w.value, s, w.at));
            }
            BialgebraKind::Hyperbialgebra => {
                for (name, rep) in std::iter::once(("rep", &self.rep))
                    .chain(self.alt_rep.as_ref().map(|r| ("alt_rep", r)))
                {
                    let (res, at) = self.coproduct_choi_defect(rep);
                    out.push(AxiomCheck::new(
                        &format!("coproduct completely positive ({name})"),
                        res,
                        tol.spectral,
                        at,
                    ));
                }
            }
        }

        for (name, rep) in std::iter::once(("rep", &self.rep))
            .chain(self.alt_rep.as_ref().map(|r| ("alt_rep", r)))
        {
            out.extend(self.representation_checks(name, rep, tol));
        }
        out
    }

    /// Negative part of the smallest Choi eigenvalue of `x ↦ (ρ⊗ρ)(Δx)`,
    /// block by block. Infinite when `rep` is not the full block algebra.
    fn coproduct_choi_defect(&self, rep: &Representation) -> (f64, String) {
        if !rep.is_full_block_algebra() {
            return (
                f64::INFINITY,
                "representation image is not the full block algebra".into(),
            );
        }
        let d = self.dim();
        let r = rep.block_entry_matrix();
        let rinv = linalg::pinv(&r, 1e-12);
        let tensor_images: Vec<CMatrix> = (0..d * d)
            .map(|jk| linalg::kron(&rep.images[jk / d], &rep.images[jk % d]))
            .collect();
        let big = rep.size() * rep.size();
        let mut worst = 0.0f64;
        let mut at = String::from("-");
        let mut row0 = 0;
        for (b, &n) in rep.blocks.iter().enumerate() {
            let mut choi = CMatrix::zeros(n * big, n * big);
            for p in 0..n {
                for q in 0..n {
                    let x = rinv.column(row0 + p * n + q).into_owned();
                    let dx = &self.coproduct * x;
                    let mut img = CMatrix::zeros(big, big);
                    for (jk, coef) in dx.iter().enumerate() {
                        if coef.norm() > 0.0 {
                            img += &tensor_images[jk] * *coef;
                        }
                    }
                    choi.view_mut((p * big, q * big), (big, big)).copy_from(&img);
                }
            }
            let m = linalg::min_eigenvalue(&choi);
            if -m > worst {
                worst = -m;
                at = format!("block {b}");
            }
            row0 += n * n;
        }
        (worst, at)
    }

    fn representation_checks(
        &self,
        name: &str,
        rep: &Representation,
        tol: &Tolerances,
    ) -> Vec<AxiomCheck> {
        let d = self.dim();
        let s = tol.structural;
        let mut out = Vec::new();

        // block-diagonal structure
        let offs = rep.offsets();
        let mut w = Worst::new();
        for (i, img) in rep.images.iter().enumerate() {
            let mut masked = img.clone();
            for (b, &n) in rep.blocks.iter().enumerate() {
                masked
                    .view_mut((offs[b], offs[b]), (n, n))
                    .fill(ZERO);
            }
            w.see(linalg::max_abs(&masked), || format!("({i})"));
        }
        out.push(AxiomCheck::new(
            &format!("{name} block diagonal"),
            w.value,
            s,
            w.at,
        ));

        let mut w = Worst::new();
        let one = self.represent_with(rep, &self.unit);
        w.see(
            linalg::max_abs(&(one - CMatrix::identity(rep.size(), rep.size()))),
            || "unit".into(),
        );
        for i in 0..d {
            let ei = linalg::unit_vector(d, i);
            let star = self.represent_with(rep, &self.star_coords(&ei));
            w.see(linalg::max_abs(&(star - rep.images[i].adjoint())), || {
                format!("star({i})")
            });
            for j in 0..d {
                let prod = self.represent_with(rep, &self.left_mult[i].column(j).into_owned());
                let r = linalg::max_abs(&(prod - &rep.images[i] * &rep.images[j]));
                w.see(r, || format!("({i},{j})"));
            }
        }
        out.push(AxiomCheck::new(
            &format!("{name} unital *-homomorphism"),
            w.value,
            s,
            w.at,
        ));

        let stacked = rep.block_entry_matrix();
        let rk = linalg::rank(&stacked, 1e-10);
        out.push(AxiomCheck {
            axiom: format!("{name} faithful"),
            passed: rk == d,
            residual: (d - rk) as f64,
            worst_at: format!("rank {rk} of {d}"),
        });
        out
    }
}

/// A validated finite-dimensional *-bialgebra. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Bialgebra {
    data: BialgebraData,
    fingerprint: Fingerprint,
}

impl Bialgebra {
    /// Validates all axioms; fails on the first violated one.
    pub fn new(data: BialgebraData, tol: &Tolerances) -> Result<Self> {
        for check in data.axiom_report(tol) {
            if !check.passed {
                if check.axiom.ends_with("faithful") {
                    return Err(Error::AxiomViolation {
                        axiom: format!("{} (representation not faithful)", check.axiom),
                        indices: check.worst_at,
                        residual: check.residual,
                    });
                }
                return Err(Error::AxiomViolation {
                    axiom: check.axiom,
                    indices: check.worst_at,
                    residual: check.residual,
                });
            }
        }
        let file = BialgebraFile::from_data(&data);
        let digest = Sha256::digest(serde_json::to_vec(&file)?);
        let mut fp = [0u8; 32];
        fp.copy_from_slice(&digest);
        Ok(Self {
            data,
            fingerprint: Fingerprint(fp),
        })
    }

    pub fn data(&self) -> &BialgebraData {
        &self.data
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn kind(&self) -> BialgebraKind {
        self.data.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.data.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.data.labels.iter().position(|l| l == label)
    }

    pub fn representation(&self) -> &Representation {
        &self.data.rep
    }

    pub fn coproduct(&self) -> &CMatrix {
        &self.data.coproduct
    }

    /// Coefficient of `e_j ⊗ e_k` in `Δ e_i`.
    #[inline]
    pub fn coproduct_coeff(&self, i: usize, j: usize, k: usize) -> C64 {
        self.data.coproduct[(j * self.dim() + k, i)]
    }

    pub fn counit(&self) -> &CVector {
        &self.data.counit
    }

    pub fn star_matrix(&self) -> &CMatrix {
        &self.data.star_matrix
    }

    pub fn left_mult(&self, i: usize) -> &CMatrix {
        &self.data.left_mult[i]
    }

    pub fn unit(&self) -> Element {
        Element::new(self.data.unit.clone())
    }

    pub fn basis(&self, i: usize) -> Element {
        Element::new(linalg::unit_vector(self.dim(), i))
    }

    pub fn zero(&self) -> Element {
        Element::new(CVector::zeros(self.dim()))
    }

    pub fn element(&self, coords: CVector) -> Result<Element> {
        self.check_dim(coords.len())?;
        Ok(Element::new(coords))
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "element",
                expected: self.dim(),
                found: n,
            });
        }
        Ok(())
    }

    pub fn counit_of(&self, x: &Element) -> Result<C64> {
        self.check_dim(x.dim())?;
        Ok(self.data.counit.dot(&x.coords))
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check_dim(x.dim())?;
        self.check_dim(y.dim())?;
        Ok(Element::new(self.data.multiply_coords(&x.coords, &y.coords)))
    }

    pub fn star(&self, x: &Element) -> Result<Element> {
        self.check_dim(x.dim())?;
        Ok(Element::new(self.data.star_coords(&x.coords)))
    }

    /// Coordinates of `e_i*`.
    pub fn star_basis(&self, i: usize) -> CVector {
        self.data.star_matrix.column(i).into_owned()
    }

    pub fn represent(&self, x: &Element) -> Result<CMatrix> {
        self.check_dim(x.dim())?;
        Ok(self.data.represent_with(&self.data.rep, &x.coords))
    }

    /// `x ≥ 0` iff `ρ₀(x)` is self-adjoint and positive semidefinite.
    pub fn is_positive(&self, x: &Element, tol: &Tolerances) -> Result<bool> {
        let m = self.represent(x)?;
        let scale = 1.0f64.max(linalg::max_abs(&m));
        if linalg::max_abs(&(&m - m.adjoint())) > tol.structural * scale {
            return Ok(false);
        }
        Ok(linalg::min_eigenvalue(&m) >= -tol.spectral)
    }

    /// Coordinates of `Δx` in `B ⊗ B`.
    pub fn coproduct_of(&self, x: &Element) -> Result<CVector> {
        self.check_dim(x.dim())?;
        Ok(&self.data.coproduct * &x.coords)
    }

    /// Is `Δ = flip ∘ Δ`?
    pub fn cocommutativity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    worst = worst.max(
                        (self.coproduct_coeff(i, j, k) - self.coproduct_coeff(i, k, j)).norm(),
                    );
                }
            }
        }
        worst
    }

    pub fn to_file(&self) -> BialgebraFile {
        BialgebraFile::from_data(&self.data)
    }

    pub fn load(path: impl AsRef<Path>, tol: &Tolerances) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, tol)
    }

    pub fn from_json(text: &str, tol: &Tolerances) -> Result<Self> {
        let file: BialgebraFile = serde_json::from_str(text)?;
        Self::new(file.into_data()?, tol)
    }

    /// Element coordinates from either a basis label or an inline JSON array
    /// of `[re, im]` pairs.
    pub fn parse_element(&self, spec: &str) -> Result<Element> {
        if let Some(i) = self.label_index(spec) {
            return Ok(self.basis(i));
        }
        let pairs: Vec<[f64; 2]> = serde_json::from_str(spec).map_err(|_| {
            Error::Parse(format!("{spec:?} is neither a basis label nor a coordinate array"))
        })?;
        self.element(CVector::from_iterator(
            pairs.len(),
            pairs.iter().map(|p| c(p[0], p[1])),
        ))
    }
}

// ---------------------------------------------------------------------------
// Builders

/// Function algebra `C(H)` of a finite monoid, on the delta-function basis.
pub fn build_function_algebra(table: &CayleyTable) -> Result<Bialgebra> {
    let table = CayleyTable::new(table.labels.clone(), table.table.clone())?;
    let d = table.order();
    let left_mult = (0..d)
        .map(|i| {
            let mut m = CMatrix::zeros(d, d);
            m[(i, i)] = ONE;
            m
        })
        .collect();
    let mut coproduct = CMatrix::zeros(d * d, d);
    for a in 0..d {
        for b in 0..d {
            coproduct[(a * d + b, table.mul(a, b))] = ONE;
        }
    }
    let images = (0..d)
        .map(|i| {
            let mut m = CMatrix::zeros(d, d);
            m[(i, i)] = ONE;
            m
        })
        .collect();
    let data = BialgebraData {
        labels: table.labels.iter().map(|l| format!("delta_{l}")).collect(),
        unit: CVector::from_element(d, ONE),
        left_mult,
        star_matrix: CMatrix::identity(d, d),
        counit: linalg::unit_vector(d, 0),
        coproduct,
        rep: Representation {
            blocks: vec![1; d],
            images,
        },
        alt_rep: None,
        kind: BialgebraKind::Bialgebra,
    };
    Bialgebra::new(data, &Tolerances::default())
}

/// Group algebra `ℂG` on the basis `{L_g}` with the irreducible
/// representations as faithful block-diagonal representation.
pub fn build_group_algebra(table: &CayleyTable) -> Result<Bialgebra> {
    let table = CayleyTable::new(table.labels.clone(), table.table.clone())?;
    let inv = table.inverses()?;
    let d = table.order();
    let left_mult = (0..d).map(|g| table.left_regular(g)).collect();
    let mut star_matrix = CMatrix::zeros(d, d);
    for g in 0..d {
        star_matrix[(inv[g], g)] = ONE;
    }
    let mut coproduct = CMatrix::zeros(d * d, d);
    for g in 0..d {
        coproduct[(g * d + g, g)] = ONE;
    }
    let irreps = table.irreducible_representations()?;
    let blocks: Vec<usize> = irreps.iter().map(|r| r[0].nrows()).collect();
    let n: usize = blocks.iter().sum();
    let images = (0..d)
        .map(|g| {
            let mut m = CMatrix::zeros(n, n);
            let mut off = 0;
            for r in &irreps {
                let k = r[g].nrows();
                m.view_mut((off, off), (k, k)).copy_from(&r[g]);
                off += k;
            }
            m
        })
        .collect();
    let data = BialgebraData {
        labels: table.labels.iter().map(|l| format!("L_{l}")).collect(),
        unit: linalg::unit_vector(d, 0),
        left_mult,
        star_matrix,
        counit: CVector::from_element(d, ONE),
        coproduct,
        rep: Representation { blocks, images },
        alt_rep: None,
        kind: BialgebraKind::Bialgebra,
    };
    Bialgebra::new(data, &Tolerances::default())
}

/// Bundled fixture names accepted by [`fixture`].
pub const FIXTURES: &[&str] = &[
    "c_z2", "c_z3", "c_z4", "c_z6", "c_s3", "cg_z2", "cg_z3", "cg_z4", "cg_z6", "cg_s3",
];

/// `c_<group>` is the function algebra, `cg_<group>` the group algebra.
pub fn fixture(name: &str) -> Result<Bialgebra> {
    if let Some(g) = name.strip_prefix("cg_") {
        build_group_algebra(&CayleyTable::named(g)?)
    } else if let Some(g) = name.strip_prefix("c_") {
        build_function_algebra(&CayleyTable::named(g)?)
    } else {
        Err(Error::InvalidInput(format!("unknown fixture {name:?}")))
    }
}

// ---------------------------------------------------------------------------
// File format

pub type Pair = [f64; 2];

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SparseEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RepFile {
    pub blocks: Vec<usize>,
    pub images: Vec<Vec<Vec<Pair>>>,
}

/// JSON form of a bialgebra. `mult` entries give the coefficient of `e_k` in
/// `e_i e_j`; `coproduct` entries the coefficient of `e_j ⊗ e_k` in `Δ e_i`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BialgebraFile {
    pub dim: usize,
    pub basis: Vec<String>,
    pub unit: Vec<Pair>,
    pub mult: Vec<SparseEntry>,
    pub star_matrix: Vec<Vec<Pair>>,
    pub counit: Vec<Pair>,
    pub coproduct: Vec<SparseEntry>,
    pub rep: RepFile,
    pub kind: BialgebraKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alt_rep: Option<RepFile>,
}

pub fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<Pair>], what: &'static str) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse(format!("ragged matrix in {what}")));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}

pub fn pairs_to_vector(p: &[Pair]) -> CVector {
    CVector::from_iterator(p.len(), p.iter().map(|z| c(z[0], z[1])))
}

pub fn vector_to_pairs(v: &CVector) -> Vec<Pair> {
    v.iter().map(|z| pair(*z)).collect()
}

impl RepFile {
    fn from_rep(rep: &Representation) -> Self {
        Self {
            blocks: rep.blocks.clone(),
            images: rep.images.iter().map(matrix_to_rows).collect(),
        }
    }

    fn into_rep(self) -> Result<Representation> {
        Ok(Representation {
            blocks: self.blocks,
            images: self
                .images
                .iter()
                .map(|m| rows_to_matrix(m, "rep.images"))
                .collect::<Result<_>>()?,
        })
    }
}

impl BialgebraFile {
    pub fn from_data(data: &BialgebraData) -> Self {
        let d = data.dim();
        let mut mult = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let z = data.left_mult[i][(k, j)];
                    if z != ZERO {
                        mult.push(SparseEntry { i, j, k, re: z.re, im: z.im });
                    }
                }
            }
        }
        let mut coproduct = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let z = data.coproduct[(j * d + k, i)];
                    if z != ZERO {
                        coproduct.push(SparseEntry { i, j, k, re: z.re, im: z.im });
                    }
                }
            }
        }
        Self {
            dim: d,
            basis: data.labels.clone(),
            unit: vector_to_pairs(&data.unit),
            mult,
            star_matrix: matrix_to_rows(&data.star_matrix),
            counit: vector_to_pairs(&data.counit),
            coproduct,
            rep: RepFile::from_rep(&data.rep),
            kind: data.kind,
            alt_rep: data.alt_rep.as_ref().map(RepFile::from_rep),
        }
    }

    /// Converts to raw data, checking indices and shapes (not axioms).
    pub fn into_data(self) -> Result<BialgebraData> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::Parse("dim must be positive".into()));
        }
        let check_len = |n: usize, what: &'static str| {
            if n != d {
                Err(Error::DimensionMismatch {
                    what,
                    expected: d,
                    found: n,
                })
            } else {
                Ok(())
            }
        };
        check_len(self.basis.len(), "basis")?;
        check_len(self.unit.len(), "unit")?;
        check_len(self.counit.len(), "counit")?;
        let mut left_mult = vec![CMatrix::zeros(d, d); d];
        for e in &self.mult {
            if e.i >= d || e.j >= d || e.k >= d {
                return Err(Error::Parse(format!("mult index out of range: {e:?}")));
            }
            left_mult[e.i][(e.k, e.j)] += c(e.re, e.im);
        }
        let mut coproduct = CMatrix::zeros(d * d, d);
        for e in &self.coproduct {
            if e.i >= d || e.j >= d || e.k >= d {
                return Err(Error::Parse(format!("coproduct index out of range: {e:?}")));
            }
            coproduct[(e.j * d + e.k, e.i)] += c(e.re, e.im);
        }
        let star_matrix = rows_to_matrix(&self.star_matrix, "star_matrix")?;
        if star_matrix.shape() != (d, d) {
            return Err(Error::Parse("star_matrix must be dim x dim".into()));
        }
        Ok(BialgebraData {
            labels: self.basis,
            unit: pairs_to_vector(&self.unit),
            left_mult,
            star_matrix,
            counit: pairs_to_vector(&self.counit),
            coproduct,
            rep: self.rep.into_rep()?,
            alt_rep: self.alt_rep.map(RepFile::into_rep).transpose()?,
            kind: self.kind,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn random_element(b: &Bialgebra, rng: &mut ChaCha20Rng) -> Element {
        b.element(linalg::random_vector(rng, b.dim())).unwrap()
    }

    #[test]
    fn z2_function_algebra_coproduct() {
        let b = build_function_algebra(&CayleyTable::cyclic(2)).unwrap();
        assert_eq!(b.dim(), 2);
        // Δδ_e = δ_e⊗δ_e + δ_g⊗δ_g
        assert_eq!(b.coproduct_coeff(0, 0, 0), ONE);
        assert_eq!(b.coproduct_coeff(0, 1, 1), ONE);
        assert_eq!(b.coproduct_coeff(0, 0, 1), ZERO);
        assert_eq!(b.coproduct_coeff(0, 1, 0), ZERO);
    }

    #[test]
    fn trivial_monoid_is_complex_numbers() {
        let b = build_function_algebra(&CayleyTable::trivial()).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(b.coproduct_coeff(0, 0, 0), ONE);
    }

    #[test]
    fn function_algebra_counit_is_evaluation_at_identity() {
        for t in [CayleyTable::cyclic(4), CayleyTable::symmetric3()] {
            let b = build_function_algebra(&t).unwrap();
            for h in 0..b.dim() {
                let expected = if h == 0 { ONE } else { ZERO };
                assert_eq!(b.counit()[h], expected);
            }
        }
    }

    #[test]
    fn function_algebra_of_a_monoid() {
        // {1, 0} under multiplication is a monoid, not a group
        let t = CayleyTable::from_table(vec![vec![0, 1], vec![1, 1]]).unwrap();
        let b = build_function_algebra(&t).unwrap();
        assert_eq!(b.dim(), 2);
        assert!(build_group_algebra(&t).is_err());
    }

    #[test]
    fn group_algebra_basis_is_group_like_and_cocommutative() {
        let b = build_group_algebra(&CayleyTable::symmetric3()).unwrap();
        assert_eq!(b.representation().blocks, vec![1, 1, 2]);
        let d = b.dim();
        for g in 0..d {
            let dg = b.coproduct_of(&b.basis(g)).unwrap();
            let expected = linalg::kron_vec(&b.basis(g).coords, &b.basis(g).coords);
            assert_eq!(dg, expected);
        }
        assert_eq!(b.cocommutativity_defect(), 0.0);
    }

    #[test]
    fn z2_group_algebra_images() {
        let b = build_group_algebra(&CayleyTable::cyclic(2)).unwrap();
        assert_eq!(b.representation().blocks, vec![1, 1]);
        let img = b.represent(&b.basis(1)).unwrap();
        assert!((img[(0, 0)] - ONE).norm() < 1e-14);
        assert!((img[(1, 1)] + ONE).norm() < 1e-14);
        assert_eq!(img[(0, 1)], ZERO);
    }

    #[test]
    fn all_fixtures_pass_every_axiom() {
        let tol = Tolerances::default();
        for name in FIXTURES {
            let b = fixture(name).unwrap();
            for check in b.data().axiom_report(&tol) {
                assert!(check.passed, "{name}: {check:?}");
            }
        }
    }

    #[test]
    fn corrupted_coproduct_names_osc1() {
        let b = fixture("c_z3").unwrap();
        let mut file = b.to_file();
        file.coproduct[0].re += 0.5;
        let err = Bialgebra::new(file.into_data().unwrap(), &Tolerances::default()).unwrap_err();
        match err {
            Error::AxiomViolation { axiom, .. } => assert!(axiom.contains("OSC1"), "{axiom}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_faithful_representation_rejected() {
        let b = fixture("cg_z2").unwrap();
        let mut data = b.data().clone();
        // keep only the trivial block: L_e and L_g both map to 1
        data.rep = Representation {
            blocks: vec![1],
            images: vec![CMatrix::identity(1, 1); 2],
        };
        let err = Bialgebra::new(data, &Tolerances::default()).unwrap_err();
        match err {
            Error::AxiomViolation { axiom, .. } => assert!(axiom.contains("faithful"), "{axiom}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn element_arithmetic() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let tol = Tolerances::default();
        for name in ["c_s3", "cg_s3", "cg_z4"] {
            let b = fixture(name).unwrap();
            for _ in 0..20 {
                let x = random_element(&b, &mut rng);
                let y = random_element(&b, &mut rng);
                assert!(linalg::max_abs_vec(&(b.multiply(&b.unit(), &x).unwrap().coords - &x.coords)) < 1e-12);
                let xx = b.star(&b.star(&x).unwrap()).unwrap();
                assert!(linalg::max_abs_vec(&(xx.coords - &x.coords)) < 1e-12);
                let xsx = b.multiply(&b.star(&x).unwrap(), &x).unwrap();
                assert!(b.is_positive(&xsx, &tol).unwrap());
                let lhs = b.represent(&b.multiply(&x, &y).unwrap()).unwrap();
                let rhs = b.represent(&x).unwrap() * b.represent(&y).unwrap();
                assert!(linalg::max_abs(&(lhs - rhs)) < 1e-12);
                let lhs = b.represent(&b.star(&x).unwrap()).unwrap();
                assert!(linalg::max_abs(&(lhs - b.represent(&x).unwrap().adjoint())) < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let b = fixture("c_z2").unwrap();
        let x = Element::new(CVector::zeros(3));
        assert!(matches!(
            b.multiply(&x, &b.unit()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn file_round_trip_preserves_fingerprint() {
        let b = fixture("cg_s3").unwrap();
        let text = serde_json::to_string(&b.to_file()).unwrap();
        let back = Bialgebra::from_json(&text, &Tolerances::default()).unwrap();
        assert_eq!(b.fingerprint(), back.fingerprint());
    }

    #[test]
    fn hyperbialgebra_flag_checks_choi_positivity() {
        let b = fixture("c_z2").unwrap();
        let mut data = b.data().clone();
        data.kind = BialgebraKind::Hyperbialgebra;
        let hb = Bialgebra::new(data.clone(), &Tolerances::default()).unwrap();
        assert_eq!(hb.kind(), BialgebraKind::Hyperbialgebra);
        // Δ(δ_e) = δ_e⊗δ_e − δ_g⊗δ_g is not positive
        data.coproduct[(3, 0)] = c(-1.0, 0.0);
        let report = data.axiom_report(&Tolerances::default());
        let cp = report
            .iter()
            .find(|c| c.axiom.starts_with("coproduct completely positive"))
            .unwrap();
        assert!(!cp.passed);
    }
}
