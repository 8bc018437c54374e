//! Command-line surface: JSON in, JSON out, deterministic bytes.
//!
//! Exit codes: 0 on success, 1 on domain errors (with a structured error
//! report), 2 on malformed input.

use clap::{Parser, Subcommand};
use rootstack_core::equivariant;
use rootstack_core::jsonio::{self, InputError};
use rootstack_core::localize;
use rootstack_core::reflection::{self, InertiaVerdict};
use rootstack_core::samples::{self, Rng};
use rootstack_core::scalar::scalar_to_string;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rootstack",
    about = "Exact computations with sheaf data on root stacks over affine bases",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a diagram or pair document and report every failure.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the lattice extension of a pair at a point.
    Extend {
        #[arg(long)]
        input: PathBuf,
        /// Lattice point, e.g. "3,-1" or "(3,-1)".
        #[arg(long)]
        point: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Decompose the class of a pair into base and leaf components.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare the class decomposition of a graded module against its
    /// character class.
    Equivariant {
        #[arg(long)]
        input: PathBuf,
        /// Expected order; rejected if the document disagrees.
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Close a matrix group and run the mirror-arrangement dichotomy check.
    Reflection {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the built-in identity sweeps.
    Selfcheck {
        /// Seed for the randomized sweeps.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Domain(String, String),
    Malformed(String),
}

impl Failure {
    fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Domain(..) => ExitCode::from(1),
            Failure::Malformed(_) => ExitCode::from(2),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Failure::Domain(kind, detail) => json!({
                "schema": jsonio::SCHEMA_VERSION,
                "error": {"kind": kind, "detail": detail},
            }),
            Failure::Malformed(detail) => json!({
                "schema": jsonio::SCHEMA_VERSION,
                "error": {"kind": "MalformedInput", "detail": detail},
            }),
        }
    }
}

impl From<rootstack_core::Error> for Failure {
    fn from(e: rootstack_core::Error) -> Self {
        Failure::Domain(e.kind().to_string(), e.to_string())
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        match e {
            InputError::Malformed(m) => Failure::Malformed(m),
            InputError::Domain(d) => d.into(),
            InputError::Invalid(fs) => Failure::Domain("InvalidInput".into(), fs.join("; ")),
        }
    }
}

fn read_json(path: &PathBuf) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Malformed(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Malformed(format!("invalid JSON: {e}")))
}

fn emit(output: &Option<PathBuf>, v: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v)
        .map_err(|e| Failure::Malformed(format!("serialization: {e}")))?;
    text.push('\n');
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Malformed(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_point(s: &str, n: usize) -> Result<Vec<i64>, Failure> {
    let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<&str> = trimmed.split(',').collect();
    if parts.len() != n {
        return Err(Failure::Malformed(format!(
            "point has {} coordinates, expected {n}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<i64>()
                .map_err(|e| Failure::Malformed(format!("bad coordinate '{p}': {e}")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(Value, Option<PathBuf>, bool), Failure> {
    match cli.command {
        Command::Validate { input, output } => {
            let v = read_json(&input)?;
            let ty = v
                .get("type")
                .and_then(Value::as_str)
                .ok_or_else(|| Failure::Malformed("missing 'type' field".into()))?
                .to_string();
            let failures: Vec<String> = match ty.as_str() {
                "diagram" => match jsonio::diagram_from_json(&v) {
                    Ok(_) => vec![],
                    Err(InputError::Invalid(fs)) => fs,
                    Err(e) => return Err(e.into()),
                },
                "pair" => match jsonio::pair_from_json(&v) {
                    Ok(_) => vec![],
                    Err(InputError::Invalid(fs)) => fs,
                    Err(e) => return Err(e.into()),
                },
                other => {
                    return Err(Failure::Malformed(format!(
                        "cannot validate documents of type '{other}'"
                    )))
                }
            };
            let valid = failures.is_empty();
            let report = json!({
                "schema": jsonio::SCHEMA_VERSION,
                "valid": valid,
                "failures": failures,
            });
            Ok((report, output, valid))
        }
        Command::Extend {
            input,
            point,
            output,
        } => {
            let v = read_json(&input)?;
            let pair = jsonio::pair_from_json(&v)?;
            let pt = parse_point(&point, pair.dim())?;
            let value = pair.evaluate(&pt);
            let (twist, q) = pair.reduce_point(&pt);
            let edges: Vec<Value> = (0..pair.dim())
                .map(|dir| {
                    let e = pair.evaluate_edge(&pt, dir);
                    json!({
                        "dir": dir + 1,
                        "matrix": jsonio::mat_to_json(e.map.matrix()),
                        "twist_delta": e.twist_delta,
                    })
                })
                .collect();
            let report = json!({
                "schema": jsonio::SCHEMA_VERSION,
                "point": pt,
                "q": q,
                "twist": twist,
                "module": jsonio::module_to_json(&value.module),
                "edges": edges,
            });
            Ok((report, output, true))
        }
        Command::Decompose { input, output } => {
            let v = read_json(&input)?;
            let pair = jsonio::pair_from_json(&v)?;
            let dec = localize::decompose(&pair)?;
            Ok((jsonio::decomposition_to_json(&dec), output, true))
        }
        Command::Equivariant { input, r, output } => {
            let v = read_json(&input)?;
            let m = jsonio::graded_from_json(&v)?;
            if let Some(r) = r {
                if r != m.order() {
                    return Err(Failure::Domain(
                        "InvalidInput".into(),
                        format!("document has order {}, expected {r}", m.order()),
                    ));
                }
            }
            let report = equivariant::compare(&m)?;
            let out = json!({
                "schema": jsonio::SCHEMA_VERSION,
                "character": report.character,
                "decomposition": jsonio::decomposition_to_json(
                    &localize::decompose(&equivariant::to_pair(&m))?
                ),
                "intertwiner": report.intertwiner,
                "consistent": report.consistent,
            });
            Ok((out, output, true))
        }
        Command::Reflection { input, output } => {
            let v = read_json(&input)?;
            let (field, dim, generators) = jsonio::group_from_json(&v)?;
            let group = reflection::ReflectionGroup::close(field, dim, generators)?;
            let verdict = reflection::abelian_inertia_check(&group)?;
            let verdict_json = match verdict {
                InertiaVerdict::Confirmed => json!({"kind": "Confirmed"}),
                InertiaVerdict::NotApplicable { abelian } => {
                    json!({"kind": "NotApplicable", "abelian": abelian})
                }
                InertiaVerdict::LemmaFalsified => json!({"kind": "LemmaFalsified"}),
            };
            let mirrors: Vec<Vec<String>> = group
                .mirror_normals()
                .iter()
                .map(|m| m.iter().map(scalar_to_string).collect())
                .collect();
            let out = json!({
                "schema": jsonio::SCHEMA_VERSION,
                "order": group.order(),
                "reflections": group.reflection_count(),
                "mirrors": mirrors,
                "normal_crossing": group.normal_crossing(),
                "abelian": group.is_abelian(),
                "verdict": verdict_json,
            });
            Ok((out, output, true))
        }
        Command::Selfcheck { seed, output } => {
            let report = selfcheck(seed)?;
            Ok((report, output, true))
        }
    }
}

/// The built-in sweeps: the numeric rank identity for every index vector
/// with bounded product, and the retraction identities of the two
/// adjunctions on seeded random inputs.
fn selfcheck(seed: u64) -> Result<Value, Failure> {
    use rootstack_core::ring::BaseRing;
    use rootstack_core::scalar::FieldSpec;

    // rank identity: 1 + sum over faces of prod (r_i - 1) = prod r_i
    let mut rank_checked = 0u64;
    let mut stack: Vec<Vec<u64>> = (1..=64u64).map(|r| vec![r]).collect();
    while let Some(r) = stack.pop() {
        let product: u64 = r.iter().product();
        if product <= 64 && r.len() < 6 {
            for next in 1..=64 {
                if product * next <= 64 {
                    let mut longer = r.clone();
                    longer.push(next);
                    stack.push(longer);
                }
            }
        }
        let n = r.len();
        let mut total: u64 = 1;
        for k in 1..=n {
            for t in localize::FaceIndex::subsets(n, k) {
                let prod: u64 = t.dirs().iter().map(|&i| r[i] - 1).product();
                total += prod;
            }
        }
        if total != product {
            return Err(Failure::Domain(
                "InternalExactness".into(),
                format!("rank identity fails at r = {r:?}"),
            ));
        }
        rank_checked += 1;
    }

    // adjunction identities on seeded random inputs
    let mut rng = Rng::new(seed);
    let mut adjunction_checked = 0u64;
    for field in [FieldSpec::Q, FieldSpec::fp(5)] {
        for base in [BaseRing::field(field), BaseRing::poly_line(field)] {
            for n in 1..=2usize {
                for _ in 0..5 {
                    let divisors = samples::random_divisors(&base, &mut rng, n, 3);
                    let m = samples::random_module(&base, &mut rng, 2);
                    let p = localize::pi_upper(&m, &divisors);
                    if localize::pi_lower(&p) != m {
                        return Err(Failure::Domain(
                            "InternalExactness".into(),
                            "section of the extension differs from the input".into(),
                        ));
                    }
                    let level = 1 + rng.below(n as u64) as usize;
                    let leaves = samples::random_leaf_family(&base, &divisors, level, &mut rng);
                    let d =
                        localize::d_adjoint(&leaves, &base, &divisors).map_err(Failure::from)?;
                    for (t, leaf) in localize::FaceIndex::subsets(n, level).iter().zip(&leaves) {
                        let back = localize::face_leaf(&d, t).map_err(Failure::from)?;
                        if &back != leaf {
                            return Err(Failure::Domain(
                                "InternalExactness".into(),
                                format!("face of the adjoint differs from the leaf at {t:?}"),
                            ));
                        }
                    }
                    adjunction_checked += 1;
                }
            }
        }
    }
    Ok(json!({
        "schema": jsonio::SCHEMA_VERSION,
        "seed": seed,
        "rank_identity_checked": rank_checked,
        "adjunction_checked": adjunction_checked,
        "ok": true,
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((report, output, success)) => {
            if emit(&output, &report).is_err() {
                return ExitCode::from(2);
            }
            if success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            let report = f.to_json();
            let mut text = serde_json::to_string_pretty(&report).unwrap_or_default();
            text.push('\n');
            eprint!("{text}");
            f.exit_code()
        }
    }
}
