//! Matrix elements of quantum stochastic convolution cocycles between
//! exponential vectors of step functions.
//!
//! For step functions the matrix element factorizes over the common
//! refinement of the two partitions: on each piece of length `δ` with values
//! `c′, c` the cocycle contributes the convolution semigroup generated by
//! `x ↦ ⟨ĉ′, φ(x) ĉ⟩`, earliest piece leftmost.

use serde::{Deserialize, Serialize};

use crate::algebra::{Bialgebra, Element};
use crate::convolution::{self, convolve, Functional, OperatorMap};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, C64, ONE, ZERO};

/// The noise dimension space `ℂ ⊕ k` with `k = ℂ^{d_noise}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSpace {
    pub d_noise: usize,
}

impl NoiseSpace {
    pub fn new(d_noise: usize) -> Self {
        Self { d_noise }
    }

    pub fn total(&self) -> usize {
        self.d_noise + 1
    }

    pub fn e0(&self) -> CVector {
        linalg::unit_vector(self.total(), 0)
    }

    /// `diag(0, I)`.
    pub fn projector(&self) -> CMatrix {
        let mut p = CMatrix::identity(self.total(), self.total());
        p[(0, 0)] = ZERO;
        p
    }

    /// `ĉ = (1, c)`.
    pub fn hat(&self, v: &CVector) -> CVector {
        let mut h = CVector::zeros(self.total());
        h[0] = ONE;
        h.rows_mut(1, self.d_noise).copy_from(v);
        h
    }
}

/// Right-continuous step function `[0, T) → ℂ^{d_noise}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<CVector>,
    d_noise: usize,
}

/// One piece of a common refinement: `[start, end)` with the values of
/// `f′` and `f` there.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub left: CVector,
    pub right: CVector,
}

impl Piece {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

impl StepFunction {
    /// `breakpoints = [0, t₁, …, t_m]`, `values[k]` on `[t_k, t_{k+1})`.
    pub fn new(breakpoints: Vec<f64>, values: Vec<CVector>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidStepFunction(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidStepFunction("first breakpoint must be 0".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || !breakpoints.iter().all(|t| t.is_finite()) {
            return Err(Error::InvalidStepFunction(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        let d_noise = values[0].len();
        if values.iter().any(|v| v.len() != d_noise) {
            return Err(Error::InvalidStepFunction("values have different lengths".into()));
        }
        if values.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::InvalidStepFunction("non-finite value".into()));
        }
        Ok(Self {
            breakpoints,
            values,
            d_noise,
        })
    }

    pub fn constant(v: CVector, horizon: f64) -> Result<Self> {
        Self::new(vec![0.0, horizon], vec![v])
    }

    pub fn zero(d_noise: usize, horizon: f64) -> Result<Self> {
        Self::constant(CVector::zeros(d_noise), horizon)
    }

    /// Pieces given by durations rather than breakpoints.
    pub fn from_pieces(pieces: &[(f64, CVector)]) -> Result<Self> {
        let mut bps = vec![0.0];
        let mut acc = 0.0;
        for (dt, _) in pieces {
            acc += dt;
            bps.push(acc);
        }
        Self::new(bps, pieces.iter().map(|(_, v)| v.clone()).collect())
    }

    pub fn d_noise(&self) -> usize {
        self.d_noise
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().expect("nonempty")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[CVector] {
        &self.values
    }

    pub fn value_at(&self, s: f64) -> CVector {
        let k = self.breakpoints[1..].partition_point(|&b| b <= s);
        self.values[k.min(self.values.len() - 1)].clone()
    }

    fn require(&self, t: f64) -> Result<()> {
        // relative slack absorbs rounding in accumulated breakpoints
        if self.horizon() < t * (1.0 - 1e-14) {
            return Err(Error::HorizonMismatch {
                required: t,
                found: self.horizon(),
            });
        }
        Ok(())
    }

    /// `s ↦ f(s + a)` on `[0, b − a)`.
    pub fn window(&self, a: f64, b: f64) -> Result<Self> {
        self.require(b)?;
        if !(0.0 <= a && a < b) {
            return Err(Error::InvalidStepFunction(format!("empty window [{a}, {b})")));
        }
        let mut bps = vec![0.0];
        let mut vals = Vec::new();
        for k in 0..self.values.len() {
            let (lo, hi) = (self.breakpoints[k].max(a), self.breakpoints[k + 1].min(b));
            if lo < hi {
                vals.push(self.values[k].clone());
                bps.push(hi - a);
            }
        }
        *bps.last_mut().expect("nonempty") = b - a;
        Self::new(bps, vals)
    }

    /// `s ↦ f(T − s)` on `[0, T)` for `T` the horizon.
    pub fn time_reversed(&self) -> Self {
        let t = self.horizon();
        let mut bps: Vec<f64> = self.breakpoints.iter().rev().map(|b| t - b).collect();
        bps[0] = 0.0;
        Self {
            breakpoints: bps,
            values: self.values.iter().rev().cloned().collect(),
            d_noise: self.d_noise,
        }
    }
}

/// Common refinement of `f′` and `f` on `[0, t)`.
pub fn common_refinement(fp: &StepFunction, f: &StepFunction, t: f64) -> Result<Vec<Piece>> {
    if fp.d_noise != f.d_noise {
        return Err(Error::NoiseDimensionMismatch {
            generator: fp.d_noise,
            step: f.d_noise,
        });
    }
    fp.require(t)?;
    f.require(t)?;
    let mut cuts: Vec<f64> = fp
        .breakpoints
        .iter()
        .chain(&f.breakpoints)
        .copied()
        .filter(|&b| b > 0.0 && b < t)
        .collect();
    cuts.push(0.0);
    cuts.push(t);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    Ok(cuts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            Piece {
                start: w[0],
                end: w[1],
                left: fp.value_at(mid),
                right: f.value_at(mid),
            }
        })
        .collect())
}

/// `⟨ε(f), ε(g)⟩ = exp ∫₀^T ⟨f(s), g(s)⟩ ds`, conjugate-linear in `f`.
pub fn exp_inner_product(f: &StepFunction, g: &StepFunction, horizon: f64) -> Result<C64> {
    let pieces = common_refinement(f, g, horizon)?;
    let exponent: C64 = pieces
        .iter()
        .map(|p| linalg::inner(&p.left, &p.right) * p.duration())
        .sum();
    Ok(exponent.exp())
}

/// A stochastic generator: an operator map into `B(ℂ ⊕ ℂ^{d_noise})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    map: OperatorMap,
}

impl Generator {
    pub fn new(map: OperatorMap) -> Result<Self> {
        if !map.is_square() || map.rows() == 0 {
            return Err(Error::InvalidInput(format!(
                "generator values must be square, got {}x{}",
                map.rows(),
                map.cols()
            )));
        }
        Ok(Self { map })
    }

    pub fn zero(b: &Bialgebra, d_noise: usize) -> Self {
        Self {
            map: OperatorMap::zero(b, d_noise + 1, d_noise + 1),
        }
    }

    /// Assembles `φ(e_i) = [[λ_i, δ†_i], [δ_i, ν_i]]`.
    pub fn from_blocks(
        b: &Bialgebra,
        lambda: &[C64],
        delta: &[CVector],
        delta_dag: &[CVector],
        nu: &[CMatrix],
    ) -> Result<Self> {
        let d = b.dim();
        if lambda.len() != d || delta.len() != d || delta_dag.len() != d || nu.len() != d {
            return Err(Error::DimensionMismatch {
                what: "generator blocks",
                expected: d,
                found: lambda.len(),
            });
        }
        let n = nu[0].nrows();
        let values = (0..d)
            .map(|i| {
                if delta[i].len() != n || delta_dag[i].len() != n || nu[i].shape() != (n, n) {
                    return Err(Error::DimensionMismatch {
                        what: "generator block size",
                        expected: n,
                        found: delta[i].len(),
                    });
                }
                Ok(assemble(lambda[i], &delta[i], &delta_dag[i], &nu[i]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(OperatorMap::new(b, values)?)
    }

    pub fn map(&self) -> &OperatorMap {
        &self.map
    }

    pub fn into_map(self) -> OperatorMap {
        self.map
    }

    pub fn d_noise(&self) -> usize {
        self.map.rows() - 1
    }

    pub fn noise(&self) -> NoiseSpace {
        NoiseSpace::new(self.d_noise())
    }

    pub fn apply(&self, x: &Element) -> Result<CMatrix> {
        self.map.apply(x)
    }

    pub fn lambda(&self, x: &Element) -> Result<C64> {
        Ok(self.apply(x)?[(0, 0)])
    }

    pub fn delta(&self, x: &Element) -> Result<CVector> {
        let m = self.apply(x)?;
        Ok(m.view((1, 0), (self.d_noise(), 1)).column(0).into_owned())
    }

    /// The row block `δ†(x)`, returned as a column of its entries.
    pub fn delta_dag(&self, x: &Element) -> Result<CVector> {
        let m = self.apply(x)?;
        Ok(m.view((0, 1), (1, self.d_noise())).transpose().column(0).into_owned())
    }

    pub fn nu(&self, x: &Element) -> Result<CMatrix> {
        let n = self.d_noise();
        Ok(self.apply(x)?.view((1, 1), (n, n)).into_owned())
    }

    /// The vacuum corner `x ↦ λ(x)` as a functional.
    pub fn corner(&self) -> Functional {
        let z = CVector::zeros(self.d_noise());
        convolution::semigroup_generator(&self.map, &z, &z).expect("square generator")
    }

    pub fn is_real(&self, b: &Bialgebra, tol: f64) -> Result<bool> {
        Ok(self.map.reality_defect(b)? <= tol)
    }
}

pub(crate) fn assemble(lambda: C64, delta: &CVector, delta_dag: &CVector, nu: &CMatrix) -> CMatrix {
    let n = nu.nrows();
    let mut m = CMatrix::zeros(n + 1, n + 1);
    m[(0, 0)] = lambda;
    for k in 0..n {
        m[(k + 1, 0)] = delta[k];
        m[(0, k + 1)] = delta_dag[k];
    }
    m.view_mut((1, 1), (n, n)).copy_from(nu);
    m
}

fn check_noise(phi: &Generator, f: &StepFunction) -> Result<()> {
    if phi.d_noise() != f.d_noise() {
        return Err(Error::NoiseDimensionMismatch {
            generator: phi.d_noise(),
            step: f.d_noise(),
        });
    }
    Ok(())
}

/// Per-piece semigroup factors `λ^{c′_k, c_k}_{δ_k}`, in time order.
fn piece_factors(
    b: &Bialgebra,
    phi: &Generator,
    pieces: &[Piece],
) -> Result<Vec<Functional>> {
    pieces
        .iter()
        .map(|p| {
            let g = convolution::semigroup_generator(phi.map(), &p.left, &p.right)?;
            convolution::conv_exp(b, &g, p.duration())
        })
        .collect()
}

fn product(b: &Bialgebra, factors: &[Functional]) -> Result<Functional> {
    let mut acc = OperatorMap::counit(b);
    for f in factors {
        acc = convolve(b, &acc, f)?;
    }
    Ok(acc)
}

/// `x ↦ ⟨ε(f′_{[0,t)}), l_t(x) ε(f_{[0,t)})⟩` as a functional.
pub fn cocycle_functional(
    b: &Bialgebra,
    phi: &Generator,
    f: &StepFunction,
    fp: &StepFunction,
    t: f64,
) -> Result<Functional> {
    phi.map().check_source(b)?;
    check_noise(phi, f)?;
    check_noise(phi, fp)?;
    if t == 0.0 {
        return Ok(OperatorMap::counit(b));
    }
    let pieces = common_refinement(fp, f, t)?;
    let ip = exp_inner_product(fp, f, t)?;
    Ok(product(b, &piece_factors(b, phi, &pieces)?)?.scale(ip))
}

/// `⟨ε(f′), l_t(x) ε(f)⟩` for `f, f′` truncated to `[0, t)`.
pub fn matrix_element(
    b: &Bialgebra,
    phi: &Generator,
    x: &Element,
    f: &StepFunction,
    fp: &StepFunction,
    t: f64,
) -> Result<C64> {
    cocycle_functional(b, phi, f, fp, t)?.eval(x)
}

/// As [`matrix_element`] for the opposite cocycle: the per-piece factors are
/// convolved latest piece leftmost.
pub fn opposite_matrix_element(
    b: &Bialgebra,
    phi: &Generator,
    x: &Element,
    f: &StepFunction,
    fp: &StepFunction,
    t: f64,
) -> Result<C64> {
    phi.map().check_source(b)?;
    check_noise(phi, f)?;
    check_noise(phi, fp)?;
    if t == 0.0 {
        return b.counit_of(x);
    }
    let pieces = common_refinement(fp, f, t)?;
    let ip = exp_inner_product(fp, f, t)?;
    let mut factors = piece_factors(b, phi, &pieces)?;
    factors.reverse();
    Ok(ip * product(b, &factors)?.eval(x)?)
}

/// Result of the simplex-series oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: C64,
    pub tail_bound: f64,
    pub n_max: usize,
}

/// Truncated form representation
/// `⟨ε′,ε⟩ Σ_{n ≤ n_max} ∫_{0<s₁<…<s_n<t} ⟨ξ′_σ, τ_n φ^{⋆n}(x) ξ_σ⟩ dσ`,
/// with `ξ_σ = f̂(s_n) ⊗ … ⊗ f̂(s₁)` and `τ_n` the leg reversal.
///
/// The integrand is constant on each cell fixing how many points fall in
/// each piece of the refinement, so the simplex integral is evaluated exactly
/// as a sum over cells of volume `Π δ_k^{n_k}/n_k!`. With `reverse_legs`
/// false the leg reversal is skipped.
pub fn simplex_series_oracle(
    b: &Bialgebra,
    phi: &Generator,
    x: &Element,
    f: &StepFunction,
    fp: &StepFunction,
    t: f64,
    n_max: usize,
    reverse_legs: bool,
) -> Result<SeriesValue> {
    phi.map().check_source(b)?;
    check_noise(phi, f)?;
    check_noise(phi, fp)?;
    let ip = exp_inner_product(fp, f, t)?;
    let pieces = if t > 0.0 {
        common_refinement(fp, f, t)?
    } else {
        Vec::new()
    };
    // A product vector contracts φ^{⋆n}(x) leg by leg: the value is the
    // convolution of the per-leg slice functionals in leg order, i.e.
    // εᵀ τ_{k₁} ⋯ τ_{k_n} x with τ_k the lifted slice of piece k.
    let taus: Vec<CMatrix> = pieces
        .iter()
        .map(|p| {
            let g = convolution::semigroup_generator(phi.map(), &p.left, &p.right)?;
            convolution::lifted_generator(b, &g)
        })
        .collect::<Result<_>>()?;
    let eps_row = b.counit().transpose();
    let mut total = b.counit_of(x)?;
    for n in 1..=n_max {
        if pieces.is_empty() {
            break;
        }
        let mut counts = vec![0usize; pieces.len()];
        counts[0] = n;
        loop {
            let volume: f64 = pieces
                .iter()
                .zip(&counts)
                .map(|(p, &k)| p.duration().powi(k as i32) / factorial(k))
                .product();
            // times in increasing order: legs of piece 0 first
            let mut legs_in_time_order: Vec<usize> = Vec::with_capacity(n);
            for (k, &cnt) in counts.iter().enumerate() {
                legs_in_time_order.extend(std::iter::repeat_n(k, cnt));
            }
            // ξ pairs decreasing times with increasing legs; τ_n reverses the legs
            let leg_pieces: Vec<usize> = if reverse_legs {
                legs_in_time_order
            } else {
                legs_in_time_order.into_iter().rev().collect()
            };
            let mut v = x.coords.clone();
            for &k in leg_pieces.iter().rev() {
                v = &taus[k] * v;
            }
            total += c(volume, 0.0) * (&eps_row * v)[0];
            if !next_composition(&mut counts) {
                break;
            }
        }
    }
    let tail = series_tail(b, x, &pieces, &taus, n_max);
    Ok(SeriesValue {
        value: ip * total,
        tail_bound: ip.norm() * tail,
        n_max,
    })
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// Advances `counts` to the next composition of the same total, in
/// lexicographically decreasing order. Returns false after the last one.
fn next_composition(counts: &mut [usize]) -> bool {
    let m = counts.len();
    if m < 2 {
        return false;
    }
    // find the rightmost position (excluding the last) with a nonzero count
    let Some(k) = (0..m - 1).rev().find(|&k| counts[k] > 0) else {
        return false;
    };
    counts[k] -= 1;
    let rest: usize = counts[k + 1..].iter().sum::<usize>() + 1;
    for v in counts[k + 1..].iter_mut() {
        *v = 0;
    }
    counts[k + 1] = rest;
    true
}

/// `‖ε‖ ‖x‖ aᴺ⁺¹/(N+1)! eᵃ` with `a = Σ_k δ_k ‖τ_k‖`: by the multinomial
/// theorem the order-`n` term is at most `‖ε‖ ‖x‖ aⁿ/n!`.
fn series_tail(b: &Bialgebra, x: &Element, pieces: &[Piece], taus: &[CMatrix], n_max: usize) -> f64 {
    let a: f64 = pieces
        .iter()
        .zip(taus)
        .map(|(p, tau)| p.duration() * linalg::op_norm(tau))
        .sum();
    let mut term = 1.0;
    for n in 1..=n_max + 1 {
        term *= a / n as f64;
    }
    b.counit().norm() * x.coords.norm() * term * a.exp()
}

/// Max residual over the basis of
/// `l_{s+t} = ⟨ε′₃,ε₃⟩ l_s^{ε′₁,ε₁} ⋆ l_t^{ε′₂,ε₂}`, where the indices refer
/// to the restrictions of `f, f′` to `[0,s)`, `[s,s+t)` (shifted) and
/// `[s+t, T)` for `T` the common horizon.
pub fn check_cocycle_identity(
    b: &Bialgebra,
    phi: &Generator,
    s: f64,
    t: f64,
    f: &StepFunction,
    fp: &StepFunction,
) -> Result<f64> {
    let horizon = f.horizon().min(fp.horizon());
    let tail_ip = if horizon > s + t {
        exp_inner_product(&fp.window(s + t, horizon)?, &f.window(s + t, horizon)?, horizon - s - t)?
    } else {
        ONE
    };
    let lhs = cocycle_functional(b, phi, f, fp, s + t)?.scale(tail_ip);
    let first = cocycle_functional(b, phi, f, fp, s)?;
    let second = if s + t > s {
        let (fw, fpw) = (f.window(s, s + t)?, fp.window(s, s + t)?);
        // (s + t) − s may round below t
        let tw = fw.horizon().min(fpw.horizon());
        cocycle_functional(b, phi, &fw, &fpw, tw)?
    } else {
        OperatorMap::counit(b)
    };
    let rhs = convolve(b, &first, &second)?.scale(tail_ip);
    Ok(lhs.max_diff(&rhs))
}

/// Toy-Fock evolution output.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyFock {
    /// `⟨e₀^{⊗N}, Ψ_h^{⋆N}(x) e₀^{⊗N}⟩`.
    pub vacuum: C64,
    /// `Ψ_h^{⋆N}(x)` on `(ℂ^{1+d_noise})^{⊗N}` when requested.
    pub full: Option<CMatrix>,
}

/// Default memory cap for the full-matrix mode, in bytes.
pub const TOY_FOCK_MEMORY_CAP: u128 = 1 << 28;

/// Random-walk approximation with `N` steps of size `h = t/N` and single-step
/// map `Ψ_h(y) = ε(y) I + D_h φ(y) D_h`, `D_h = diag(√h, I)`.
///
/// The vacuum slice contracts step by step through `(ε + hλ)^{⋆N}`. With
/// `full = true` the whole `N`-fold convolution is formed, subject to
/// `memory_cap` bytes.
pub fn toy_fock_evolve(
    b: &Bialgebra,
    phi: &Generator,
    x: &Element,
    t: f64,
    steps: usize,
    full: bool,
    memory_cap: u128,
) -> Result<ToyFock> {
    phi.map().check_source(b)?;
    if steps == 0 {
        return Err(Error::InvalidInput("toy-Fock evolution needs at least one step".into()));
    }
    let h = t / steps as f64;
    let step_gen = OperatorMap::counit(b).add(&phi.corner().scale(c(h, 0.0)))?;
    let tau = convolution::lifted_generator(b, &step_gen)?;
    let mut v = x.coords.clone();
    for _ in 0..steps {
        v = &tau * v;
    }
    let vacuum = b.counit().dot(&v);
    let full = if full {
        let n = phi.d_noise() as u128 + 1;
        let side = n
            .checked_pow(steps as u32)
            .ok_or(Error::MemoryCap { required: u128::MAX, cap: memory_cap })?;
        let required = side
            .saturating_mul(side)
            .saturating_mul(16)
            .saturating_mul(b.dim() as u128 + 1);
        if required > memory_cap {
            return Err(Error::MemoryCap { required, cap: memory_cap });
        }
        let mut dh = CMatrix::identity(n as usize, n as usize);
        dh[(0, 0)] = c(h.sqrt(), 0.0);
        let psi = OperatorMap::counit_times(b, &CMatrix::identity(n as usize, n as usize))
            .add(&phi.map().map_values(|m| &dh * m * &dh))?;
        let mut acc = psi.clone();
        for _ in 1..steps {
            acc = convolve(b, &acc, &psi)?;
        }
        Some(acc.apply(x)?)
    } else {
        None
    };
    Ok(ToyFock { vacuum, full })
}

/// Joint moment `Π λ_{t_i − s_i}(x_i)` over disjoint half-open intervals,
/// with `λ` the vacuum semigroup of `φ`.
pub fn weak_qlp_moments(
    b: &Bialgebra,
    phi: &Generator,
    intervals: &[(f64, f64)],
    elements: &[Element],
) -> Result<C64> {
    if intervals.len() != elements.len() {
        return Err(Error::DimensionMismatch {
            what: "intervals vs elements",
            expected: intervals.len(),
            found: elements.len(),
        });
    }
    for &(s, t) in intervals {
        if !(0.0 <= s && s <= t) {
            return Err(Error::InvalidInput(format!("bad interval [{s}, {t})")));
        }
    }
    for (i, &(s1, t1)) in intervals.iter().enumerate() {
        for &(s2, t2) in &intervals[i + 1..] {
            if s1 < t2 && s2 < t1 {
                return Err(Error::OverlappingIntervals(s1, t1, s2, t2));
            }
        }
    }
    let sg = convolution::ConvolutionSemigroup::new(b, phi.corner())?;
    let mut out = ONE;
    for (&(s, t), x) in intervals.iter().zip(elements) {
        b.counit_of(x)?;
        out *= sg.eval(t - s, x);
    }
    Ok(out)
}

/// Gram matrix `[λ(e_i* e_j)]` of a functional over the basis.
pub fn markov_gram(b: &Bialgebra, lambda: &Functional) -> Result<CMatrix> {
    lambda.check_source(b)?;
    let d = b.dim();
    let coeffs = lambda.coeffs();
    let stars: Vec<Element> = (0..d).map(|i| Element::new(b.star_basis(i))).collect();
    let mut g = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let p = b.multiply(&stars[i], &b.basis(j))?;
            g[(i, j)] = coeffs.dot(&p.coords);
        }
    }
    Ok(g)
}

/// Serializable step function: `[[t_end, [[re, im], ...]], ...]`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StepFunctionFile(pub Vec<(f64, Vec<[f64; 2]>)>);

impl StepFunctionFile {
    pub fn into_step_function(self) -> Result<StepFunction> {
        let mut bps = vec![0.0];
        let mut vals = Vec::new();
        for (t, v) in self.0 {
            bps.push(t);
            vals.push(crate::algebra::pairs_to_vector(&v));
        }
        StepFunction::new(bps, vals)
    }
}
