//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Kronecker product `a ⊗ b` with row index `(i_a, i_b) -> i_a * b.nrows() + i_b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for k in 0..b.len() {
            out[i * b.len() + k] = a[i] * b[k];
        }
    }
    out
}

/// Largest absolute entry; zero for empty matrices.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigenvalues (ascending) of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Smallest eigenvalue of the Hermitian part; `+inf` for an empty matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .first()
        .copied()
        .unwrap_or(f64::INFINITY)
}

/// Eigen-decomposition of a Hermitian matrix with eigenpairs sorted by
/// descending eigenvalue and each eigenvector phase-fixed so that its first
/// component of modulus above `1e-12` is real and positive.
pub fn sorted_hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut vecs = CMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[k]);
        let mut v = eig.eigenvectors.column(k).into_owned();
        phase_fix(&mut v);
        vecs.set_column(col, &v);
    }
    (vals, vecs)
}

/// Rotate `v` so that its first non-negligible component is real positive.
pub fn phase_fix(v: &mut CVector) {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// Full singular value decomposition `m = U diag(s) V†` with `s` sorted
/// descending. Backed by `faer`; nalgebra's SVD loses orthogonality of the
/// singular vectors on rank-deficient input.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(m: &CMatrix) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Svd {
            u: CMatrix::identity(r, r),
            s: Vec::new(),
            v: CMatrix::identity(c, c),
        };
    }
    let fm = faer::Mat::<C64>::from_fn(r, c, |i, j| m[(i, j)]);
    let dec = fm.svd().expect("SVD iteration converges");
    let (u, v) = (dec.U(), dec.V());
    Svd {
        u: CMatrix::from_fn(r, r, |i, j| u[(i, j)]),
        s: dec.S().column_vector().iter().map(|z| z.re).collect(),
        v: CMatrix::from_fn(c, c, |i, j| v[(i, j)]),
    }
}

/// Largest singular value (spectral norm).
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Numerical rank with threshold `rel_tol * sigma_max`.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormal basis (columns) of the null space of `m`, using a cut-off of
/// `rel_tol * sigma_max` (absolute `rel_tol` when `m` vanishes).
pub fn null_space(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let ncols = m.ncols();
    if m.nrows() == 0 {
        return CMatrix::identity(ncols, ncols);
    }
    let dec = svd(m);
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let cut = if smax > 0.0 { rel_tol * smax } else { rel_tol };
    let cols: Vec<CVector> = (0..ncols)
        .filter(|&k| dec.s.get(k).is_none_or(|&s| s <= cut))
        .map(|k| {
            let mut v = dec.v.column(k).into_owned();
            phase_fix(&mut v);
            v
        })
        .collect();
    if cols.is_empty() {
        CMatrix::zeros(ncols, 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}

/// Minimum-norm least-squares solution of `a x = b` with singular values
/// below `rel_cut * sigma_max` discarded. Returns `(x, residual_norm)`.
pub fn lstsq(a: &CMatrix, b: &CMatrix, rel_cut: f64) -> (CMatrix, f64) {
    let mut x = CMatrix::zeros(a.ncols(), b.ncols());
    if a.nrows() > 0 && a.ncols() > 0 {
        let dec = svd(a);
        let smax = dec.s.first().copied().unwrap_or(0.0);
        for (k, &s) in dec.s.iter().enumerate() {
            if s > rel_cut * smax && s > 0.0 {
                let coeff = dec.u.column(k).adjoint() * b / c(s, 0.0);
                x += dec.v.column(k) * coeff;
            }
        }
    }
    let res = (a * &x - b).norm();
    (x, res)
}

/// Moore–Penrose pseudo-inverse with relative singular-value cut-off.
pub fn pinv(a: &CMatrix, rel_cut: f64) -> CMatrix {
    let eye = CMatrix::identity(a.nrows(), a.nrows());
    lstsq(a, &eye, rel_cut).0
}

/// Column-major vectorisation.
pub fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.iter().copied())
}

pub fn unvec(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_iterator(rows, cols, v.iter().copied())
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| random_complex(rng))
}

/// Haar-ish random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let g = random_matrix(rng, n, n);
    let qr = g.qr();
    let (q, r) = qr.unpack();
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= ph;
            }
        }
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    hermitian_part(&random_matrix(rng, n, n))
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant
/// (via `nalgebra`).
pub fn expm(m: &CMatrix) -> CMatrix {
    if m.nrows() == 0 {
        return m.clone();
    }
    m.clone().exp()
}

pub fn unit_vector(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = ONE;
    v
}

/// Hermitian inner product `⟨a, b⟩`, conjugate-linear in `a`.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// Singular values, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let fm = faer::Mat::<C64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    fm.singular_values().expect("SVD iteration converges")
}
