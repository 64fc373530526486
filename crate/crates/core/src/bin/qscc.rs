use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qscc::algebra::{fixture, matrix_to_rows, pair, vector_to_pairs, FIXTURES};
use qscc::cocycle::{
    matrix_element, opposite_matrix_element, simplex_series_oracle, Generator, StepFunctionFile,
};
use qscc::convolution::{conv_exp, OperatorMap, OperatorMapFile};
use qscc::derivations::{implement_chi_structure, solve_inner, DerivationProblemFile};
use qscc::generators::{check_conditionally_positive, classify, gns_construct};
use qscc::harness::{
    build_group_generator, compare_laws, compound_poisson_law, run_report, simulate_compound_poisson,
    solve_coboundary, Battery, GroupCocycleFile, RunConfig,
};
use qscc::linalg::CVector;
use qscc::{Bialgebra, CayleyTable, Error, Tolerances};

#[derive(Parser)]
#[command(name = "qscc", version, about = "Convolution cocycles and quantum Lévy processes on finite-dimensional *-bialgebras")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Pass/fail tolerance; overrides the structural tolerance when validating.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check every bialgebra axiom. BIALGEBRA is a file or a bundled fixture name.
    Validate { bialgebra: String },
    /// Print a bundled fixture as a bialgebra file.
    Fixture { name: String },
    /// Evaluate the convolution semigroup of a functional.
    Semigroup {
        bialgebra: String,
        functional: PathBuf,
        #[arg(long, num_args = 1.., default_values_t = [1.0])]
        t: Vec<f64>,
        /// Basis label or `[[re, im], ...]`; defaults to all coefficients.
        #[arg(long)]
        element: Option<String>,
    },
    /// Matrix element of the cocycle between exponential vectors.
    CocycleEval {
        bialgebra: String,
        generator: PathBuf,
        element: String,
        /// Step function of the right exponential vector.
        f: PathBuf,
        /// Step function of the left exponential vector.
        fp: PathBuf,
        #[arg(long)]
        t: f64,
        /// Also run the series oracle to this order.
        #[arg(long)]
        series: Option<usize>,
        /// Evaluate the opposite cocycle instead.
        #[arg(long)]
        opposite: bool,
    },
    /// Reconstruct a Schürmann triple and generator from a functional.
    Gns { bialgebra: String, functional: PathBuf },
    /// Report which generator classes a map belongs to.
    Classify { bialgebra: String, generator: PathBuf },
    /// Inner-derivation solver.
    #[command(subcommand)]
    Derivation(DerivationCommand),
    /// Implement a χ-structure map as (π, ξ, λ).
    #[command(subcommand)]
    ChiStructure(ChiCommand),
    /// Build the group-algebra generator from group cocycle data.
    GroupGen {
        data: PathBuf,
        /// Also write the generator as an operator-map file.
        #[arg(long)]
        generator_out: Option<PathBuf>,
    },
    /// Solve for a coboundary vector.
    Coboundary { data: PathBuf },
    /// Compound-Poisson Monte Carlo against the convolution semigroup on C(G).
    Montecarlo {
        #[arg(long, default_value = "z2")]
        group: String,
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        /// Jump law as a JSON array; defaults to uniform on non-identity elements.
        #[arg(long)]
        mu: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Run a named battery: axioms, cocycle, gns, derivations, montecarlo or all.
    Report {
        battery: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        cases: usize,
        #[arg(long, num_args = 1.., default_values_t = [0.5, 1.0, 2.0])]
        times: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum DerivationCommand {
    /// Find T with δ(a) = π′(a)T − Tπ(a).
    Solve { bialgebra: String, problem: PathBuf },
}

#[derive(Subcommand)]
enum ChiCommand {
    /// Recover (π, ξ, λ) from a χ-structure map. CHI is `counit`, a file or `[[re, im], ...]`.
    Implement {
        bialgebra: String,
        phi: PathBuf,
        chi: String,
    },
}

struct Outcome {
    value: Value,
    passed: bool,
    csv: Option<String>,
}

impl Outcome {
    fn new(value: Value, passed: bool) -> Self {
        Self { value, passed, csv: None }
    }
}

fn load_bialgebra(spec: &str, tol: &Tolerances) -> qscc::Result<Bialgebra> {
    if Path::new(spec).exists() {
        Bialgebra::load(spec, tol)
    } else if FIXTURES.contains(&spec) || spec.starts_with("c_") || spec.starts_with("cg_") {
        fixture(spec)
    } else {
        Err(Error::InvalidInput(format!("{spec:?} is neither a file nor a fixture")))
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> qscc::Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn load_map(b: &Bialgebra, path: &Path) -> qscc::Result<OperatorMap> {
    read_json::<OperatorMapFile>(path)?.into_map(b)
}

fn to_value<T: Serialize>(v: &T) -> qscc::Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn parse_chi(b: &Bialgebra, spec: &str) -> qscc::Result<CVector> {
    if spec == "counit" {
        return Ok(b.counit().clone());
    }
    let text = if Path::new(spec).exists() {
        std::fs::read_to_string(spec)?
    } else {
        spec.to_string()
    };
    let pairs: Vec<[f64; 2]> = serde_json::from_str(&text)?;
    Ok(qscc::algebra::pairs_to_vector(&pairs))
}

fn run(cli: &Cli) -> qscc::Result<Outcome> {
    let mut tolerances = Tolerances::default();
    if let Some(t) = cli.tol {
        tolerances.structural = t;
    }
    let tol = cli.tol.unwrap_or(1e-9);
    match &cli.command {
        Command::Validate { bialgebra } => {
            let b = load_bialgebra(bialgebra, &Tolerances { structural: f64::INFINITY, ..tolerances })?;
            let checks = b.data().axiom_report(&tolerances);
            let passed = checks.iter().all(|c| c.passed);
            Ok(Outcome::new(
                json!({ "fingerprint": b.fingerprint().hex(), "passed": passed, "checks": checks }),
                passed,
            ))
        }
        Command::Fixture { name } => Ok(Outcome::new(to_value(&fixture(name)?.to_file())?, true)),
        Command::Semigroup { bialgebra, functional, t, element } => {
            let b = load_bialgebra(bialgebra, &tolerances)?;
            let gamma = load_map(&b, functional)?;
            let x = element.as_deref().map(|e| b.parse_element(e)).transpose()?;
            let mut rows = Vec::new();
            for &ti in t {
                let lam = conv_exp(&b, &gamma, ti)?;
                let mut row = json!({ "t": ti, "coefficients": vector_to_pairs(&lam.coeffs()) });
                if let Some(x) = &x {
                    row["value"] = to_value(&pair(lam.eval(x)?))?;
                }
                rows.push(row);
            }
            Ok(Outcome::new(json!({ "semigroup": rows }), true))
        }
        Command::CocycleEval { bialgebra, generator, element, f, fp, t, series, opposite } => {
            let b = load_bialgebra(bialgebra, &tolerances)?;
            let phi = Generator::new(load_map(&b, generator)?)?;
            let x = b.parse_element(element)?;
            let f = read_json::<StepFunctionFile>(f)?.into_step_function()?;
            let fp = read_json::<StepFunctionFile>(fp)?.into_step_function()?;
            let value = if *opposite {
                opposite_matrix_element(&b, &phi, &x, &f, &fp, *t)?
            } else {
                matrix_element(&b, &phi, &x, &f, &fp, *t)?
            };
            let mut out = json!({ "value": pair(value) });
            let mut passed = true;
            if let Some(n_max) = series {
                let s = simplex_series_oracle(&b, &phi, &x, &f, &fp, *t, *n_max, !*opposite)?;
                let diff = (s.value - value).norm();
                passed = diff <= s.tail_bound + tol;
                out["series"] = json!({
                    "value": pair(s.value),
                    "tail_bound": s.tail_bound,
                    "n_max": s.n_max,
                    "difference": diff,
                });
            }
            Ok(Outcome::new(out, passed))
        }
        Command::Gns { bialgebra, functional } => {
            let b = load_bialgebra(bialgebra, &tolerances)?;
            let gamma = load_map(&b, functional)?;
            let cp = check_conditionally_positive(&b, &gamma)?;
            if !cp.positive {
                return Ok(Outcome::new(json!({ "conditional_positivity": cp }), false));
            }
            let (triple, generator) = gns_construct(&b, &gamma, None)?;
            let residuals = triple.residuals(&b)?;
            Ok(Outcome::new(
                json!({
                    "conditional_positivity": cp,
                    "noise_dimension": triple.n,
                    "residuals": residuals,
                    "generator": generator.map().to_file(),
                }),
                residuals.max() <= tol,
            ))
        }
        Command::Classify { bialgebra, generator } => {
            let b = load_bialgebra(bialgebra, &tolerances)?;
            let phi = Generator::new(load_map(&b, generator)?)?;
            Ok(Outcome::new(to_value(&classify(&b, &phi, cli.tol.unwrap_or(1e-10))?)?, true))
        }
        Command::Derivation(DerivationCommand::Solve { bialgebra, problem }) => {
            let b = load_bialgebra(bialgebra, &tolerances)?;
            let p = read_json::<DerivationProblemFile>(problem)?.into_problem(&b)?;
            let sol = solve_inner(&b, &p)?;
            Ok(Outcome::new(
                json!({ "T": matrix_to_rows(&sol.t), "residual": sol.residual }),
                sol.residual <= tol,
            ))
        }
        Command::ChiStructure(ChiCommand::Implement { bialgebra, phi, chi }) => {
            let b = load_bialgebra(bialgebra, &tolerances)?;
            let phi = load_map(&b, phi)?;
            let chi = parse_chi(&b, chi)?;
            let imp = implement_chi_structure(&b, &phi, &chi)?;
            Ok(Outcome::new(
                json!({
                    "pi": imp.pi.to_file(),
                    "xi": vector_to_pairs(&imp.xi),
                    "lambda": imp.lambda.to_file(),
                    "residuals": imp.residuals,
                }),
                imp.residuals.reassembly <= cli.tol.unwrap_or(1e-10),
            ))
        }
        Command::GroupGen { data, generator_out } => {
            let data = read_json::<GroupCocycleFile>(data)?.into_data()?;
            let gg = build_group_generator(&data)?;
            let file = gg.generator.map().to_file();
            if let Some(path) = generator_out {
                std::fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
            }
            Ok(Outcome::new(
                json!({
                    "algebra_fingerprint": gg.algebra.fingerprint().hex(),
                    "relation_residual": gg.relation_residual,
                    "generator": file,
                }),
                true,
            ))
        }
        Command::Coboundary { data } => {
            let data = read_json::<GroupCocycleFile>(data)?.into_data()?;
            Ok(Outcome::new(to_value(&solve_coboundary(&data)?)?, true))
        }
        Command::Montecarlo { group, rate, mu, t, samples } => {
            let table = CayleyTable::named(group)?;
            let n = table.order();
            let mu: Vec<f64> = match mu {
                Some(s) => serde_json::from_str(s)?,
                None if n > 1 => (0..n).map(|g| if g == 0 { 0.0 } else { 1.0 / (n - 1) as f64 }).collect(),
                None => vec![1.0],
            };
            let b = qscc::algebra::build_function_algebra(&table)?;
            let emp = simulate_compound_poisson(&table, *rate, &mu, *t, *samples, cli.seed)?;
            let reference = compound_poisson_law(&b, *rate, &mu, *t)?;
            let cmp = compare_laws(&emp, &reference);
            Ok(Outcome::new(
                json!({ "empirical": emp, "reference": reference, "comparison": cmp }),
                cmp.passed(),
            ))
        }
        Command::Report { battery, samples, cases, times } => {
            let battery: Battery = battery.parse()?;
            let config = RunConfig {
                seed: cli.seed,
                tolerances,
                times: times.clone(),
                n_samples: *samples,
                cases: *cases,
                out: None,
            };
            let report = run_report(&config, battery)?;
            let csv = match cli.format {
                Format::Csv => Some(report.to_csv()?),
                Format::Json => None,
            };
            Ok(Outcome {
                value: to_value(&report)?,
                passed: report.passed,
                csv,
            })
        }
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, rows);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, rows);
            }
        }
        Value::String(text) => rows.push((prefix.to_string(), text.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn render(outcome: &Outcome, format: Format) -> qscc::Result<String> {
    match (format, &outcome.csv) {
        (Format::Csv, Some(csv)) => Ok(csv.clone()),
        (Format::Csv, None) => {
            let mut rows = Vec::new();
            flatten("", &outcome.value, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"]).map_err(|e| Error::InvalidInput(e.to_string()))?;
            for (k, v) in rows {
                w.write_record([k, v]).map_err(|e| Error::InvalidInput(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
        }
        (Format::Json, _) => Ok(serde_json::to_string_pretty(&outcome.value)? + "\n"),
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_)
        | Error::Json(_)
        | Error::Parse(_)
        | Error::InvalidInput(_)
        | Error::DimensionMismatch { .. }
        | Error::SourceMismatch
        | Error::InvalidTable(_)
        | Error::NoiseDimensionMismatch { .. }
        | Error::HorizonMismatch { .. }
        | Error::InvalidStepFunction(_)
        | Error::OverlappingIntervals(..)
        | Error::MemoryCap { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let text = match render(&outcome, cli.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
