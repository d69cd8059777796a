pub mod parser;
pub mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use qshift_core::cohomology::{
    koszul_dims_at_hbar_zero, milnor_number, twisted_derham_dims, CohomologyReport, MilnorOptions, TruncationMode, TruncationSpec,
};
use qshift_core::coefficients::{format_rational, int};
use qshift_core::derham::{canonical_symplectic, check_compatibility, CompatVerdict, CompatWindow};
use qshift_core::duality::{is_self_dual, solve_sign_profile, GenKind, SelfDualVerdict};
use qshift_core::gca::{make_crit_locus, CritLocus};
use qshift_core::quantise::{
    bv_quantisation, filtration_dims, kappa, nu_eigen_analysis, FiltrationKind, FiltrationLabel, FiltrationWindow,
};

pub use parser::{parse_problem, ParseError, ProblemFile};
pub use report::{Report, Status, REPORT_SCHEMA};

pub const SEED_ENV: &str = "QSHIFT_SEED";

#[derive(Debug, Parser)]
#[command(name = "qshift", version, about = "Exact checks on quantisations of derived critical loci")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Weight,
    Truncate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    G,
    Ftilde,
    Conv,
}

#[derive(Clone, Debug, clap::Args)]
pub struct DimsArgs {
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub max_degree: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Milnor number of the Jacobian ring.
    Milnor { file: PathBuf },
    /// Cohomology of the twisted complex over Q(h).
    VcDims {
        file: PathBuf,
        #[command(flatten)]
        dims: DimsArgs,
    },
    /// Cohomology of the Koszul complex.
    KoszulDims {
        file: PathBuf,
        #[command(flatten)]
        dims: DimsArgs,
    },
    /// Master equation residual of the BV quantisation.
    CheckMc { file: PathBuf },
    /// Compatibility of the canonical symplectic form with the BV quantisation.
    CheckCompat {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        window: i32,
    },
    /// Self-duality of the BV quantisation.
    CheckSelfdual { file: PathBuf },
    /// Spectrum of the obstruction map on arity p symbols.
    Eigen {
        file: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        weight_bound: Option<u32>,
    },
    /// Dimensions of a filtration piece.
    Filtration {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        level: i32,
        #[arg(long, default_value_t = 0)]
        p: i32,
        #[arg(long)]
        weight_bound: Option<u32>,
        #[arg(long, default_value_t = 4)]
        max_hbar: i32,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Milnor { .. } => "milnor",
            Command::VcDims { .. } => "vc-dims",
            Command::KoszulDims { .. } => "koszul-dims",
            Command::CheckMc { .. } => "check-mc",
            Command::CheckCompat { .. } => "check-compat",
            Command::CheckSelfdual { .. } => "check-selfdual",
            Command::Eigen { .. } => "eigen",
            Command::Filtration { .. } => "filtration",
        }
    }

    pub fn file(&self) -> &PathBuf {
        match self {
            Command::Milnor { file }
            | Command::VcDims { file, .. }
            | Command::KoszulDims { file, .. }
            | Command::CheckMc { file }
            | Command::CheckCompat { file, .. }
            | Command::CheckSelfdual { file }
            | Command::Eigen { file, .. }
            | Command::Filtration { file, .. } => file,
        }
    }
}

const KNOWN_OPTIONS: [&str; 3] = ["max_degree", "seed", "weight_bound"];

/// Reads the problem file, runs the command and times it.
pub fn run(cmd: &Command, seed_override: Option<u64>) -> Report {
    let start = Instant::now();
    let name = cmd.name();
    let mut report = match std::fs::read_to_string(cmd.file()) {
        Err(e) => Report::error(name, format!("cannot read {}: {e}", cmd.file().display())),
        Ok(text) => match parse_problem(&text) {
            Err(e) => Report::error(name, e.to_string()),
            Ok(problem) => run_command(cmd, &problem, seed_override),
        },
    };
    report.timing_ms = start.elapsed().as_millis() as u64;
    report
}

/// Seed from the environment, if set and numeric.
pub fn env_seed() -> Option<u64> {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok())
}

pub fn run_command(cmd: &Command, problem: &ProblemFile, seed_override: Option<u64>) -> Report {
    for key in problem.options.keys() {
        if !KNOWN_OPTIONS.contains(&key.as_str()) {
            eprintln!("warning: ignoring unknown option `{key}`");
        }
    }
    let name = cmd.name();
    let x = match make_crit_locus(&problem.potential(), problem.vars.len()) {
        Ok(x) => x,
        Err(e) => return Report::error(name, e.to_string()),
    };
    match dispatch(cmd, problem, &x, seed_override) {
        Ok(r) => r,
        Err(e) => Report::error(name, e.to_string()),
    }
}

fn dims_payload(r: &CohomologyReport, mode: TruncationMode, seed: u64) -> Value {
    let dims: Map<String, Value> = r.dims_by_degree.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    json!({
        "dims": dims,
        "total": r.total_dim(),
        "field": r.field.to_string(),
        "stabilised": r.stabilised,
        "euler_characteristic": r.euler_characteristic,
        "mode": match mode { TruncationMode::WeightGraded => "weight", TruncationMode::DegreeTruncated => "truncate" },
        "level": r.level,
        "seed": seed,
        "rank_computations": r.certificates.len(),
        "rank_fallbacks": r.certificates.iter().filter(|c| c.fallback_used).count(),
    })
}

fn dispatch(cmd: &Command, problem: &ProblemFile, x: &CritLocus, seed_override: Option<u64>) -> qshift_core::Result<Report> {
    let name = cmd.name();
    let names = &problem.vars;
    let weight_bound = |flag: Option<u32>| flag.or(problem.option_u32("weight_bound")).unwrap_or(2);
    Ok(match cmd {
        Command::Milnor { .. } => {
            let n = milnor_number(x, &MilnorOptions::default())?;
            Report::new(name, Status::Ok, json!({ "milnor_number": n }))
        }
        Command::VcDims { dims, .. } | Command::KoszulDims { dims, .. } => {
            let mode = match dims.mode {
                Some(ModeArg::Weight) => TruncationMode::WeightGraded,
                Some(ModeArg::Truncate) => TruncationMode::DegreeTruncated,
                None if x.signature.weights.is_some() => TruncationMode::WeightGraded,
                None => TruncationMode::DegreeTruncated,
            };
            let bound = dims.max_degree.or(problem.option_u32("max_degree")).unwrap_or(16);
            let seed = seed_override.or(dims.seed).or(problem.option_u32("seed").map(u64::from)).unwrap_or(0);
            let spec = TruncationSpec::new(mode, bound);
            let r = if matches!(cmd, Command::VcDims { .. }) {
                twisted_derham_dims(x, &spec, seed)?
            } else {
                koszul_dims_at_hbar_zero(x, &spec, seed)?
            };
            Report::new(name, Status::Ok, dims_payload(&r, mode, seed))
        }
        Command::CheckMc { .. } => {
            let residual = kappa(x, &bv_quantisation(x))?;
            let payload = json!({ "residual_zero": residual.is_zero(), "terms": residual.len() });
            let r = Report::new(name, Status::Ok, payload).with_residual(&residual, names);
            if residual.is_zero() {
                r
            } else {
                r.fail("the master equation residual is nonzero")
            }
        }
        Command::CheckCompat { window, .. } => {
            let w = CompatWindow { max_hbar: *window, ..CompatWindow::default() };
            match check_compatibility(&canonical_symplectic(x), &bv_quantisation(x), x, &w)? {
                CompatVerdict::ExactCocycleEquality => Report::new(name, Status::Ok, json!({ "verdict": "exact" })),
                CompatVerdict::CoboundaryWitness(h) => {
                    Report::new(name, Status::Ok, json!({ "verdict": "coboundary" })).with_residual(&h, names)
                }
                CompatVerdict::Fails { residual, window } => Report::new(
                    name,
                    Status::Ok,
                    json!({ "verdict": "fails", "max_hbar": window.max_hbar, "coefficient_degree": window.coefficient_degree }),
                )
                .with_residual(&residual, names)
                .fail("no coboundary witness in the search window"),
            }
        }
        Command::CheckSelfdual { .. } => {
            let profile = solve_sign_profile(x)?;
            let signs: Map<String, Value> = GenKind::ALL.iter().map(|g| (g.name().to_string(), json!(profile.sign(*g)))).collect();
            match is_self_dual(&bv_quantisation(x), &profile)? {
                SelfDualVerdict::Strict => Report::new(name, Status::Ok, json!({ "verdict": "strict", "profile": signs })),
                SelfDualVerdict::Fails(r) => Report::new(name, Status::Ok, json!({ "verdict": "fails", "profile": signs }))
                    .with_residual(&r, names)
                    .fail("the quantisation differs from its dual"),
            }
        }
        Command::Eigen { p, k, weight_bound: wb, .. } => {
            let r = nu_eigen_analysis(x, *p, *k, Some(weight_bound(*wb)))?;
            let scalar = r.combined_scalar.as_ref().map(format_rational);
            let payload = json!({
                "p": r.p,
                "k": r.k,
                "block_dim": r.block_dim,
                "eigenvalues": r.eigenvalues.iter().map(|(l, _)| l).collect::<Vec<_>>(),
                "multiplicities": r.eigenvalues.iter().map(|(_, n)| n).collect::<Vec<_>>(),
                "diagonalisable": r.diagonalisable,
                "combined_scalar": scalar,
                "invertible": r.invertible,
            });
            let expected_scalar = int(1 - *k as i64);
            let ok = r.eigenvalues == vec![(*p as i64, r.block_dim)]
                && r.combined_scalar.as_ref() == Some(&expected_scalar)
                && r.invertible == (*k != 1);
            let report = Report::new(name, Status::Ok, payload);
            if ok {
                report
            } else {
                report.fail(format!("expected eigenvalue {p} and combined scalar {}", format_rational(&expected_scalar)))
            }
        }
        Command::Filtration { kind, level, p, weight_bound: wb, max_hbar, .. } => {
            let kind = match kind {
                KindArg::G => FiltrationKind::G,
                KindArg::Ftilde => FiltrationKind::Ftilde,
                KindArg::Conv => FiltrationKind::GconvF,
            };
            let m = x.m() as i32;
            let window = FiltrationWindow { degrees: -m..=m, hbar: -1..=*max_hbar, weight_bound: Some(weight_bound(*wb)) };
            let table = filtration_dims(FiltrationLabel { kind, level: *level }, *p, &window, x)?;
            let mut nested: BTreeMap<i32, Map<String, Value>> = BTreeMap::new();
            for ((d, e), n) in table {
                nested.entry(d).or_default().insert(e.to_string(), json!(n));
            }
            let dims: Map<String, Value> = nested.into_iter().map(|(d, row)| (d.to_string(), Value::Object(row))).collect();
            Report::new(
                name,
                Status::Ok,
                json!({
                    "kind": format!("{kind:?}"),
                    "level": level,
                    "p": p,
                    "weight_bound": window.weight_bound,
                    "dims": dims,
                }),
            )
        }
    })
}
