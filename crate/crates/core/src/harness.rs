//! Group-cocycle generators on group algebras, the classical compound-Poisson
//! Monte Carlo oracle on function algebras, and seeded report batteries.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    build_function_algebra, build_group_algebra, fixture, matrix_to_rows, pairs_to_vector,
    rows_to_matrix, vector_to_pairs, Bialgebra, Pair, Tolerances, FIXTURES,
};
use crate::cocycle::{assemble, check_cocycle_identity, Generator, StepFunction};
use crate::convolution::{conv_exp, OperatorMap};
use crate::derivations::{
    implement_chi_structure, implemented_chi_structure, inner_derivation, solve_inner,
    DerivationProblem,
};
use crate::error::{Error, Result};
use crate::generators::{check_conditionally_positive, gns_construct, make_structure_map, random_representation};
use crate::group::CayleyTable;
use crate::linalg::{self, c, CMatrix, CVector};

// ---------------------------------------------------------------------------
// Group cocycles

/// Unitary representation `U`, 1-cocycle `ξ` and real `λ` on a finite group,
/// indexed like the group's Cayley table.
#[derive(Debug, Clone)]
pub struct GroupCocycleData {
    pub table: CayleyTable,
    pub u: Vec<CMatrix>,
    pub xi: Vec<CVector>,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CocycleDataResiduals {
    pub unitary: f64,
    pub representation: f64,
    /// `ξ_{gh} − ξ_g − U_g ξ_h`.
    pub cocycle: f64,
    /// `λ_{gh} − λ_g − λ_h + Im⟨ξ_g, U_g ξ_h⟩`.
    pub lambda: f64,
}

impl CocycleDataResiduals {
    pub fn max(&self) -> f64 {
        self.unitary
            .max(self.representation)
            .max(self.cocycle)
            .max(self.lambda)
    }
}

impl GroupCocycleData {
    pub fn d_noise(&self) -> usize {
        self.u.first().map_or(0, |m| m.nrows())
    }

    pub fn residuals(&self) -> Result<CocycleDataResiduals> {
        let n = self.table.order();
        if !self.table.is_group() {
            return Err(Error::NotAGroup("cocycle data needs inverses".into()));
        }
        for (what, len) in [("U", self.u.len()), ("ξ", self.xi.len()), ("λ", self.lambda.len())] {
            if len != n {
                return Err(Error::InvalidInput(format!("{what} has {len} entries for a group of order {n}")));
            }
        }
        let k = self.d_noise();
        for (g, (u, x)) in self.u.iter().zip(&self.xi).enumerate() {
            if u.shape() != (k, k) || x.len() != k {
                return Err(Error::InvalidInput(format!("inconsistent noise dimension at g = {g}")));
            }
        }
        let id = CMatrix::identity(k, k);
        let mut r = CocycleDataResiduals {
            unitary: 0.0,
            representation: 0.0,
            cocycle: 0.0,
            lambda: 0.0,
        };
        for g in 0..n {
            r.unitary = r.unitary.max(linalg::max_abs(&(self.u[g].adjoint() * &self.u[g] - &id)));
            for h in 0..n {
                let gh = self.table.mul(g, h);
                r.representation = r
                    .representation
                    .max(linalg::max_abs(&(&self.u[gh] - &self.u[g] * &self.u[h])));
                let uxh = &self.u[g] * &self.xi[h];
                r.cocycle = r
                    .cocycle
                    .max(linalg::max_abs_vec(&(&self.xi[gh] - &self.xi[g] - &uxh)));
                let im = self.xi[g].dotc(&uxh).im;
                r.lambda = r
                    .lambda
                    .max((self.lambda[gh] - self.lambda[g] - self.lambda[h] + im).abs());
            }
        }
        Ok(r)
    }

    /// Errors with [`Error::InvariantViolation`] above `1e-10`.
    pub fn validate(&self) -> Result<CocycleDataResiduals> {
        let r = self.residuals()?;
        if r.max() > 1e-10 {
            return Err(Error::InvariantViolation(format!(
                "group cocycle data: unitary {:.3e}, representation {:.3e}, cocycle {:.3e}, lambda {:.3e}",
                r.unitary, r.representation, r.cocycle, r.lambda
            )));
        }
        Ok(r)
    }

    /// `ξ_g = U_g η − η`, `λ_g = Im⟨η, U_g η⟩`.
    pub fn coboundary(table: CayleyTable, u: Vec<CMatrix>, eta: &CVector) -> Self {
        let xi = u.iter().map(|ug| ug * eta - eta).collect();
        let lambda = u.iter().map(|ug| eta.dotc(&(ug * eta)).im).collect();
        Self { table, u, xi, lambda }
    }

    /// `ψ_g = [iλ_g − ½‖ξ_g‖², −⟨ξ_g|U_g; |ξ_g⟩, U_g − I]`.
    pub fn psi(&self, g: usize) -> CMatrix {
        let k = self.d_noise();
        let x = &self.xi[g];
        let u = &self.u[g];
        let top = c(-0.5 * x.norm_squared(), self.lambda[g]);
        let row = -(u.transpose() * x.map(|z| z.conj()));
        assemble(top, x, &row, &(u - CMatrix::identity(k, k)))
    }

    pub fn to_file(&self) -> GroupCocycleFile {
        GroupCocycleFile {
            table: self.table.clone(),
            u: self.u.iter().map(matrix_to_rows).collect(),
            xi: self.xi.iter().map(vector_to_pairs).collect(),
            lambda: self.lambda.clone(),
        }
    }
}

/// JSON layout of [`GroupCocycleData`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupCocycleFile {
    pub table: CayleyTable,
    pub u: Vec<Vec<Vec<Pair>>>,
    pub xi: Vec<Vec<Pair>>,
    pub lambda: Vec<f64>,
}

impl GroupCocycleFile {
    pub fn into_data(self) -> Result<GroupCocycleData> {
        let table = CayleyTable::new(self.table.labels, self.table.table)?;
        let u = self
            .u
            .iter()
            .map(|rows| rows_to_matrix(rows, "U"))
            .collect::<Result<_>>()?;
        Ok(GroupCocycleData {
            table,
            u,
            xi: self.xi.iter().map(|p| pairs_to_vector(p)).collect(),
            lambda: self.lambda,
        })
    }
}

/// Generator on the group algebra together with its defining-relation residual.
#[derive(Debug, Clone)]
pub struct GroupGenerator {
    pub algebra: Bialgebra,
    pub generator: Generator,
    /// Max over `ψ_{gh} − ψ_g − ψ_h − ψ_g Δ ψ_h`, `ψ_g† − ψ_{g⁻¹}` and `ψ_e`.
    pub relation_residual: f64,
}

/// Builds `φ(L_g) = ψ_g` on the group algebra of `data.table`.
pub fn build_group_generator(data: &GroupCocycleData) -> Result<GroupGenerator> {
    data.validate()?;
    let algebra = build_group_algebra(&data.table)?;
    let n = data.table.order();
    let psis: Vec<CMatrix> = (0..n).map(|g| data.psi(g)).collect();
    let k = data.d_noise();
    let mut proj = CMatrix::identity(k + 1, k + 1);
    proj[(0, 0)] = linalg::ZERO;
    let inv = data.table.inverses()?;
    let mut residual = linalg::max_abs(&psis[0]);
    for g in 0..n {
        residual = residual.max(linalg::max_abs(&(psis[g].adjoint() - &psis[inv[g]])));
        for h in 0..n {
            let gh = data.table.mul(g, h);
            let rhs = &psis[g] + &psis[h] + &psis[g] * &proj * &psis[h];
            residual = residual.max(linalg::max_abs(&(&psis[gh] - rhs)));
        }
    }
    if residual > 1e-10 {
        return Err(Error::InvariantViolation(format!(
            "group generator relation residual {residual:.3e}"
        )));
    }
    let generator = Generator::new(OperatorMap::new(&algebra, psis)?)?;
    Ok(GroupGenerator {
        algebra,
        generator,
        relation_residual: residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Coboundary {
    #[serde(serialize_with = "serialize_vector")]
    pub eta: CVector,
    pub xi_residual: f64,
    pub lambda_residual: f64,
}

fn serialize_vector<S: serde::Serializer>(v: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
    vector_to_pairs(v).serialize(s)
}

/// Minimal-norm `η` with `ξ_g = U_g η − η`, then the `λ` condition.
/// Errors with [`Error::NoCoboundary`] carrying both residuals above `1e-8`.
pub fn solve_coboundary(data: &GroupCocycleData) -> Result<Coboundary> {
    data.validate()?;
    let n = data.table.order();
    let k = data.d_noise();
    let eta = if k == 0 {
        CVector::zeros(0)
    } else {
        let mut a = CMatrix::zeros(n * k, k);
        let mut rhs = CMatrix::zeros(n * k, 1);
        for g in 0..n {
            a.view_mut((g * k, 0), (k, k))
                .copy_from(&(&data.u[g] - CMatrix::identity(k, k)));
            rhs.view_mut((g * k, 0), (k, 1)).copy_from(&data.xi[g]);
        }
        linalg::lstsq(&a, &rhs, 1e-12).0.column(0).into_owned()
    };
    let mut xi_residual = 0.0f64;
    let mut lambda_residual = 0.0f64;
    for g in 0..n {
        let ue = &data.u[g] * &eta;
        xi_residual = xi_residual.max(linalg::max_abs_vec(&(&ue - &eta - &data.xi[g])));
        lambda_residual = lambda_residual.max((eta.dotc(&ue).im - data.lambda[g]).abs());
    }
    if xi_residual > 1e-8 || lambda_residual > 1e-8 {
        return Err(Error::NoCoboundary {
            xi: xi_residual,
            lambda: lambda_residual,
        });
    }
    Ok(Coboundary {
        eta,
        xi_residual,
        lambda_residual,
    })
}

/// Coboundary data over a random unitary representation assembled from the
/// given irreducible blocks of the group algebra's faithful representation.
pub fn random_coboundary_data<R: Rng + ?Sized>(
    table: &CayleyTable,
    rng: &mut R,
    blocks: &[usize],
) -> Result<(GroupCocycleData, CVector)> {
    let b = build_group_algebra(table)?;
    let pi = random_representation(&b, rng, blocks)?;
    let eta = linalg::random_vector(rng, pi.rows());
    let data = GroupCocycleData::coboundary(table.clone(), pi.values().to_vec(), &eta);
    Ok((data, eta))
}

// ---------------------------------------------------------------------------
// Compound Poisson oracle

/// Empirical law of `X_t` over the group, in Cayley-table order.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalLaw {
    pub frequencies: Vec<f64>,
    /// `√(p̂(1 − p̂)/n)` per point.
    pub standard_errors: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

/// Poisson variate: inversion for `mean ≤ 30`, rounded normal above.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean > 30.0 {
        let z: f64 = rng.sample(StandardNormal);
        return (mean + mean.sqrt() * z).round().max(0.0) as u64;
    }
    let u: f64 = rng.random();
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut k = 0u64;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
    }
    k
}

fn check_probability_vector(mu: &[f64], n: usize) -> Result<()> {
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            what: "jump law",
            expected: n,
            found: mu.len(),
        });
    }
    let total: f64 = mu.iter().sum();
    if mu.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("jump law must be a probability vector".into()));
    }
    Ok(())
}

/// Samples `X_t = J_1 ⋯ J_N` with `N ~ Poisson(rate·t)` and iid jumps `J ~ μ`.
pub fn simulate_compound_poisson(
    table: &CayleyTable,
    rate: f64,
    mu: &[f64],
    t: f64,
    n_samples: usize,
    seed: u64,
) -> Result<EmpiricalLaw> {
    let n = table.order();
    check_probability_vector(mu, n)?;
    if !(rate >= 0.0) || !(t >= 0.0) || n_samples == 0 {
        return Err(Error::InvalidInput("rate, time and sample count must be nonnegative and n > 0".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let jumps = WeightedIndex::new(mu).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut counts = vec![0usize; n];
    for _ in 0..n_samples {
        let mut x = 0;
        for _ in 0..sample_poisson(&mut rng, rate * t) {
            x = table.mul(x, jumps.sample(&mut rng));
        }
        counts[x] += 1;
    }
    let ns = n_samples as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&k| k as f64 / ns).collect();
    let standard_errors = frequencies.iter().map(|p| (p * (1.0 - p) / ns).sqrt()).collect();
    Ok(EmpiricalLaw {
        frequencies,
        standard_errors,
        n_samples,
        seed,
    })
}

/// `λ_t(δ_g)` for the convolution semigroup on `C(G)` generated by
/// `rate·(μ − ε)`.
pub fn compound_poisson_law(b: &Bialgebra, rate: f64, mu: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = b.dim();
    check_probability_vector(mu, n)?;
    let coeffs = CVector::from_iterator(
        n,
        mu.iter().zip(b.counit().iter()).map(|(&p, e)| c(rate * p, 0.0) - *e * rate),
    );
    let gamma = OperatorMap::functional(b, &coeffs)?;
    Ok(conv_exp(b, &gamma, t)?.coeffs().iter().map(|z| z.re).collect())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LawComparison {
    /// Largest `|p̂ − p| / σ` with `σ = √(p(1 − p)/n)` from the reference law.
    pub max_z: f64,
    pub total_variation: f64,
    pub max_standard_error: f64,
    pub within_3se: bool,
    pub total_variation_ok: bool,
}

impl LawComparison {
    pub fn passed(&self) -> bool {
        self.within_3se && self.total_variation_ok
    }
}

pub fn compare_laws(empirical: &EmpiricalLaw, reference: &[f64]) -> LawComparison {
    let ns = empirical.n_samples as f64;
    let mut max_z = 0.0f64;
    let mut max_se = 0.0f64;
    let mut tv = 0.0;
    for (&p_hat, &p) in empirical.frequencies.iter().zip(reference) {
        let se = (p * (1.0 - p)).max(0.0).sqrt() / ns.sqrt();
        let dev = (p_hat - p).abs();
        max_se = max_se.max(se);
        tv += 0.5 * dev;
        let z = if se > 0.0 {
            dev / se
        } else if dev <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        max_z = max_z.max(z);
    }
    LawComparison {
        max_z,
        total_variation: tv,
        max_standard_error: max_se,
        within_3se: max_z <= 3.0,
        total_variation_ok: tv <= 3.0 * max_se,
    }
}

// ---------------------------------------------------------------------------
// Random instances shared by batteries and tests

/// A random ε-structure map `V†(π − ε)V`, with `π` built from one or two
/// random blocks of the faithful representation.
pub fn random_structure_generator<R: Rng + ?Sized>(b: &Bialgebra, rng: &mut R, scale: f64) -> Result<Generator> {
    let nb = b.representation().blocks.len();
    let count = rng.random_range(1..=2);
    let blocks: Vec<usize> = (0..count).map(|_| rng.random_range(0..nb)).collect();
    let pi = random_representation(b, rng, &blocks)?;
    let cvec = linalg::random_vector(rng, pi.rows()) * c(scale, 0.0);
    make_structure_map(b, &pi, &cvec)
}

pub fn random_step_function<R: Rng + ?Sized>(
    rng: &mut R,
    d_noise: usize,
    pieces: usize,
    horizon: f64,
    scale: f64,
) -> Result<StepFunction> {
    let mut cuts: Vec<f64> = (0..pieces.saturating_sub(1))
        .map(|_| rng.random_range(0.0..horizon))
        .collect();
    cuts.sort_by(f64::total_cmp);
    let mut bps = vec![0.0];
    bps.extend(cuts);
    bps.push(horizon);
    bps.dedup();
    let vals = (1..bps.len())
        .map(|_| linalg::random_vector(rng, d_noise) * c(scale, 0.0))
        .collect();
    StepFunction::new(bps, vals)
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Battery {
    Axioms,
    Cocycle,
    Gns,
    Derivations,
    Montecarlo,
    All,
}

impl Battery {
    pub const ALL: [Battery; 5] = [
        Battery::Axioms,
        Battery::Cocycle,
        Battery::Gns,
        Battery::Derivations,
        Battery::Montecarlo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Battery::Axioms => "axioms",
            Battery::Cocycle => "cocycle",
            Battery::Gns => "gns",
            Battery::Derivations => "derivations",
            Battery::Montecarlo => "montecarlo",
            Battery::All => "all",
        }
    }
}

impl fmt::Display for Battery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Battery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Battery::ALL
            .into_iter()
            .chain([Battery::All])
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown battery {s:?}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Evaluation times for the Monte Carlo battery.
    pub times: Vec<f64>,
    pub n_samples: usize,
    /// Random cases per fixture in the cocycle, GNS and derivation batteries.
    pub cases: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            tolerances: Tolerances::default(),
            times: vec![0.5, 1.0, 2.0],
            n_samples: 100_000,
            cases: 4,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub battery: Battery,
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub battery: Battery,
    pub seed: u64,
    pub config: RunConfig,
    pub passed: bool,
    pub cases: Vec<CaseResult>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for case in &self.cases {
            w.serialize(case).map_err(|e| Error::InvalidInput(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

struct Cases {
    battery: Battery,
    out: Vec<CaseResult>,
}

impl Cases {
    fn push(&mut self, name: String, outcome: Result<f64>, tolerance: f64) {
        let residual = outcome.unwrap_or(f64::INFINITY);
        self.out.push(CaseResult {
            battery: self.battery,
            name,
            passed: residual <= tolerance,
            residual,
            tolerance,
        });
    }
}

fn battery_rng(seed: u64, battery: Battery) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(battery as u64);
    rng
}

fn axioms_battery(config: &RunConfig, cases: &mut Cases) {
    for name in FIXTURES {
        let outcome = fixture(name).map(|b| {
            let report = b.data().axiom_report(&config.tolerances);
            if report.iter().all(|c| c.passed) {
                report.iter().map(|c| c.residual).fold(0.0, f64::max)
            } else {
                f64::INFINITY
            }
        });
        cases.push(format!("{name}/axioms"), outcome, config.tolerances.structural);
    }
}

fn cocycle_battery(config: &RunConfig, cases: &mut Cases) {
    let mut rng = battery_rng(config.seed, Battery::Cocycle);
    for name in FIXTURES {
        for k in 0..config.cases {
            let outcome = fixture(name).and_then(|b| {
                let phi = random_structure_generator(&b, &mut rng, 0.7)?;
                let d = phi.d_noise();
                let f = random_step_function(&mut rng, d, 3, 1.5, 0.7)?;
                let fp = random_step_function(&mut rng, d, 3, 1.5, 0.7)?;
                let s = rng.random_range(0.0..0.7);
                let t = rng.random_range(0.0..0.7);
                check_cocycle_identity(&b, &phi, s, t, &f, &fp)
            });
            cases.push(format!("{name}/cocycle/{k}"), outcome, 1e-9);
        }
    }
}

fn gns_battery(config: &RunConfig, cases: &mut Cases) {
    let mut rng = battery_rng(config.seed, Battery::Gns);
    for name in FIXTURES {
        for k in 0..config.cases {
            let outcome = fixture(name).and_then(|b| {
                let phi = random_structure_generator(&b, &mut rng, 1.0)?;
                let gamma = phi.corner();
                let cp = check_conditionally_positive(&b, &gamma)?;
                if !cp.positive {
                    return Ok(f64::INFINITY);
                }
                let (triple, rebuilt) = gns_construct(&b, &gamma, None)?;
                Ok(triple.residuals(&b)?.max().max(rebuilt.corner().max_diff(&gamma)))
            });
            cases.push(format!("{name}/gns/{k}"), outcome, 1e-9);
        }
    }
}

fn derivations_battery(config: &RunConfig, cases: &mut Cases) {
    let mut rng = battery_rng(config.seed, Battery::Derivations);
    for name in FIXTURES {
        for k in 0..config.cases {
            let outcome = fixture(name).and_then(|b| {
                let nb = b.representation().blocks.len();
                let (kp, k) = (rng.random_range(0..nb), rng.random_range(0..nb));
                let pp = random_representation(&b, &mut rng, &[kp])?;
                let pi = random_representation(&b, &mut rng, &[k])?;
                let t = linalg::random_matrix(&mut rng, pp.rows(), pi.rows());
                let delta = inner_derivation(&b, &pp, &pi, &t)?;
                let sol = solve_inner(&b, &DerivationProblem { pi_prime: pp, pi: pi.clone(), delta })?;
                let xi = linalg::random_vector(&mut rng, pi.rows());
                let phi = implemented_chi_structure(&b, &pi, &xi, b.counit())?;
                let imp = implement_chi_structure(&b, &phi, b.counit())?;
                Ok(sol.residual.max(imp.residuals.reassembly))
            });
            cases.push(format!("{name}/derivations/{k}"), outcome, 1e-9);
        }
    }
}

fn montecarlo_battery(config: &RunConfig, cases: &mut Cases) {
    let mut rng = battery_rng(config.seed, Battery::Montecarlo);
    for n in [2usize, 3, 4] {
        let table = CayleyTable::cyclic(n);
        let b = match build_function_algebra(&table) {
            Ok(b) => b,
            Err(e) => {
                cases.push(format!("c_z{n}/montecarlo"), Err(e), 1.0);
                continue;
            }
        };
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mu: Vec<f64> = raw.iter().map(|p| p / total).collect();
        for (k, &t) in config.times.iter().enumerate() {
            let sim_seed = rng.random();
            let outcome = simulate_compound_poisson(&table, 1.0, &mu, t, config.n_samples, sim_seed)
                .and_then(|emp| {
                    let reference = compound_poisson_law(&b, 1.0, &mu, t)?;
                    let cmp = compare_laws(&emp, &reference);
                    // normalized so that 1 is the acceptance threshold
                    let tv_ratio = if cmp.max_standard_error > 0.0 {
                        cmp.total_variation / (3.0 * cmp.max_standard_error)
                    } else if cmp.total_variation <= 1e-12 {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    Ok((cmp.max_z / 3.0).max(tv_ratio))
                });
            cases.push(format!("c_z{n}/montecarlo/t{k}"), outcome, 1.0);
        }
    }
}

/// Runs a battery; writes the JSON report to `config.out` when set.
pub fn run_report(config: &RunConfig, battery: Battery) -> Result<Report> {
    if config.n_samples == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    let selected: Vec<Battery> = match battery {
        Battery::All => Battery::ALL.to_vec(),
        one => vec![one],
    };
    let mut all = Vec::new();
    for bat in selected {
        let mut cases = Cases { battery: bat, out: Vec::new() };
        match bat {
            Battery::Axioms => axioms_battery(config, &mut cases),
            Battery::Cocycle => cocycle_battery(config, &mut cases),
            Battery::Gns => gns_battery(config, &mut cases),
            Battery::Derivations => derivations_battery(config, &mut cases),
            Battery::Montecarlo => montecarlo_battery(config, &mut cases),
            Battery::All => unreachable!(),
        }
        all.extend(cases.out);
    }
    let report = Report {
        battery,
        seed: config.seed,
        config: config.clone(),
        passed: all.iter().all(|c| c.passed),
        cases: all,
    };
    if let Some(path) = &config.out {
        std::fs::write(path, report.to_json()?)?;
    }
    Ok(report)
}
