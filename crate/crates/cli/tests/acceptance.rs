//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines always reach the output.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;
use qshift_cli::parser::parse_problem;
use qshift_cli::REPORT_SCHEMA;
use qshift_core::coefficients::int;
use qshift_core::cohomology::{milnor_number, twisted_derham_dims, MilnorOptions, TruncationMode, TruncationSpec};
use qshift_core::derham::{canonical_symplectic, check_compatibility, check_key_identity, mu, CompatVerdict, CompatWindow};
use qshift_core::diffops::{Operator, Polyvector};
use qshift_core::duality::{gparity_fixed_dims, is_self_dual, solve_sign_profile, star, transpose, SelfDualVerdict};
use qshift_core::gca::CritLocus;
use qshift_core::quantise::{
    bv_quantisation, filtration_dims, kappa, nu_eigen_analysis, FiltrationKind, FiltrationLabel, FiltrationWindow,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Draws `n` values from `strategy` with a fixed seed.
fn sample<S: Strategy>(strategy: S, n: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..n).map(|_| strategy.new_tree(&mut runner).expect("strategy generates").current()).collect()
}

fn master_equation() -> Outcome {
    let mut slowest = Duration::ZERO;
    for (name, x) in corpus() {
        let t = Instant::now();
        let r = kappa(&x, &bv_quantisation(&x)).map_err(|e| e.to_string())?;
        slowest = slowest.max(t.elapsed());
        ensure(r.is_zero(), || format!("{name}: residual {r}"))?;
    }
    ensure(slowest < Duration::from_secs(1), || format!("slowest instance took {slowest:?}"))?;
    Ok(format!("9 potentials, residual 0, slowest {} ms", slowest.as_millis()))
}

fn compatibility() -> Outcome {
    let mut slowest = Duration::ZERO;
    for (name, x) in corpus() {
        let t = Instant::now();
        let m = x.m();
        let delta = bv_quantisation(&x);
        let omega = canonical_symplectic(&x);
        let v = check_compatibility(&omega, &delta, &x, &CompatWindow::default()).map_err(|e| e.to_string())?;
        ensure(v == CompatVerdict::ExactCocycleEquality, || format!("{name}: {v:?}"))?;
        let expected =
            (0..m).fold(Operator::zero(m), |acc, i| acc.add(&Operator::deta(m, i).compose(&Operator::dy(m, i)).unwrap().shift_hbar(2)));
        let image = mu(&omega, &delta, &x).map_err(|e| e.to_string())?;
        ensure(image == expected, || format!("{name}: mu gives {image}"))?;
        ensure(delta.series().hbar_derivative_scaled() == expected, || format!("{name}: h^2 dΔ/dh differs"))?;
        slowest = slowest.max(t.elapsed());
    }
    ensure(slowest < Duration::from_secs(5), || format!("slowest instance took {slowest:?}"))?;
    Ok(format!("exact on 9 potentials with m <= 3, slowest {} ms", slowest.as_millis()))
}

fn vanishing_cycles() -> Outcome {
    let opts = MilnorOptions::default();
    let mut named: Vec<(String, CritLocus)> = corpus().into_iter().map(|(n, x)| (n.to_string(), x)).collect();
    for k in 1..=5u32 {
        named.push((format!("x^{}", k + 1), locus(1, &[(&[k + 1], 1)])));
    }
    let pinned = [("x^3+y^3", 4), ("x^3+y^5", 8), ("x^2+y^2+z^2", 1), ("x^2", 1), ("x^3", 2), ("x^4", 3), ("x^5", 4), ("x^6", 5)];
    let mut slowest = Duration::ZERO;
    for (name, x) in &named {
        let t = Instant::now();
        let mu_f = milnor_number(x, &opts).map_err(|e| format!("{name}: {e}"))?;
        for mode in [TruncationMode::WeightGraded, TruncationMode::DegreeTruncated] {
            let r = twisted_derham_dims(x, &TruncationSpec::new(mode, 24), 0).map_err(|e| format!("{name}: {e}"))?;
            ensure(r.total_dim() == mu_f, || format!("{name} {mode:?}: {} against Milnor {mu_f}", r.total_dim()))?;
            ensure(r.dims_by_degree.len() == 1, || format!("{name} {mode:?}: spread over {:?}", r.dims_by_degree))?;
        }
        if let Some((_, v)) = pinned.iter().find(|(n, _)| n == name) {
            ensure(mu_f == *v, || format!("{name}: expected {v}, got {mu_f}"))?;
        }
        slowest = slowest.max(t.elapsed());
    }
    ensure(slowest < Duration::from_secs(30), || format!("slowest instance took {slowest:?}"))?;
    Ok(format!("{} potentials, both truncations, slowest {} ms", named.len(), slowest.as_millis()))
}

fn key_identity() -> Outcome {
    let cases = sample((arb_potential(2, 3), arb_quantisation(2), arb_word(2, 3)), 200);
    let mut non_mc = 0;
    for (i, (x, d, w)) in cases.iter().enumerate() {
        if !kappa(x, d).map_err(|e| e.to_string())?.is_zero() {
            non_mc += 1;
        }
        let r = check_key_identity(w, d, x).map_err(|e| e.to_string())?;
        ensure(r.is_zero(), || format!("instance {i}: residual {r}"))?;
    }
    ensure(non_mc > 0, || "no instance left the solution set".into())?;
    Ok(format!("{} instances, {non_mc} not solving the master equation", cases.len()))
}

fn bracket_coherence() -> Outcome {
    let pairs = sample((arb_polyvector(2, 2, 2, 3), arb_polyvector(2, 1, 3, 3)), 200);
    for (i, (p, q)) in pairs.iter().enumerate() {
        let (pa, qa) = (p.arity().unwrap_or(0), q.arity().unwrap_or(0));
        let comm = p.lift().commutator(&q.lift()).map_err(|e| e.to_string())?;
        let lhs = if comm.is_zero() { Polyvector::zero(2) } else { comm.symbol((pa + qa).saturating_sub(1)).map_err(|e| e.to_string())? };
        ensure(lhs == p.schouten(q).map_err(|e| e.to_string())?, || format!("pair {i} differs"))?;
    }
    let sign = |a: &Polyvector, b: &Polyvector| a.degree().unwrap_or(0) * b.degree().unwrap_or(0) % 2 != 0;
    let triples = sample((arb_polyvector(2, 2, 2, 2), arb_polyvector(2, 1, 2, 2), arb_polyvector(2, 2, 2, 2)), 100);
    for (i, (p, q, r)) in triples.iter().enumerate() {
        let lhs = p.schouten(&q.schouten(r).unwrap()).unwrap();
        let a = p.schouten(q).unwrap().schouten(r).unwrap();
        let b = q.schouten(&p.schouten(r).unwrap()).unwrap();
        let b = if sign(p, q) { b.scale(&int(-1)) } else { b };
        ensure(lhs == a.add(&b), || format!("Jacobi fails on triple {i}"))?;
        let lhs = p.schouten(&q.mul(r).unwrap()).unwrap();
        let a = p.schouten(q).unwrap().mul(r).unwrap();
        let b = q.mul(&p.schouten(r).unwrap()).unwrap();
        let b = if sign(p, q) { b.scale(&int(-1)) } else { b };
        ensure(lhs == a.add(&b), || format!("Leibniz fails on triple {i}"))?;
    }
    Ok(format!("{} pairs against commutator symbols, {} Jacobi and Leibniz triples", pairs.len(), triples.len()))
}

fn self_duality() -> Outcome {
    for (name, x) in corpus() {
        let p = solve_sign_profile(&x).map_err(|e| e.to_string())?;
        let v = is_self_dual(&bv_quantisation(&x), &p).map_err(|e| e.to_string())?;
        ensure(v == SelfDualVerdict::Strict, || format!("{name}: {v:?}"))?;
    }
    let x = corpus().remove(3).1;
    let p = solve_sign_profile(&x).map_err(|e| e.to_string())?;
    let ops = sample((arb_operator(2, 2, 4, 4), arb_operator(2, 1, 2, 3)), 100);
    for (i, (a, b)) in ops.iter().enumerate() {
        let t = |d: &Operator| transpose(d, &p).unwrap();
        ensure(t(&t(a)) == *a, || format!("operator {i}: transpose is not an involution"))?;
        let order = a.order().unwrap();
        let expect = a.symbol(order).unwrap();
        let expect = if order % 2 == 1 { expect.scale(&int(-1)) } else { expect };
        ensure(order > 4 || t(a).symbol(order).unwrap() == expect, || format!("operator {i}: symbol sign"))?;
        let mut lhs = Operator::zero(2);
        let mut rhs = Operator::zero(2);
        for pa in a.homogeneous_parts().into_values() {
            for pb in b.homogeneous_parts().into_values() {
                lhs = lhs.add(&t(&pa.compose(&pb).unwrap()));
                let r = t(&pb).compose(&t(&pa)).unwrap();
                let odd = pa.degree().unwrap_or(0) * pb.degree().unwrap_or(0) % 2 != 0;
                rhs = rhs.add(&if odd { r.neg() } else { r });
            }
        }
        ensure(lhs == rhs, || format!("pair {i}: transpose is not anti-multiplicative"))?;
    }
    for q in sample(arb_quantisation(2), 50) {
        ensure(star(&star(&q, &p).unwrap(), &p).unwrap() == q, || "star is not an involution".into())?;
    }
    let mut slots = 0;
    for j in 2..=5 {
        for k in 0..j.min(4) {
            let (n, fixed) = gparity_fixed_dims(2, j, k, 2, &p).map_err(|e| e.to_string())?;
            ensure(fixed == if k % 2 == 0 { n } else { 0 }, || format!("slot j={j} k={k}: {fixed} of {n} fixed"))?;
            slots += 1;
        }
    }
    Ok(format!("strict on 9 potentials, 100 random operators, 50 stars, {slots} graded slots"))
}

fn obstruction_eigenvalues() -> Outcome {
    let loci = [(corpus().remove(0).1, 2u32, 4usize), (corpus().remove(4).1, 1, 2)];
    let mut blocks = 0;
    for (x, w, max_p) in &loci {
        for p in 0..=*max_p {
            for k in 1..=4usize {
                let r = nu_eigen_analysis(x, p, k, Some(*w)).map_err(|e| e.to_string())?;
                ensure(r.eigenvalues == vec![(p as i64, r.block_dim)], || format!("p={p} k={k}: spectrum {:?}", r.eigenvalues))?;
                ensure(r.combined_scalar == Some(int(1 - k as i64)), || format!("p={p} k={k}: {:?}", r.combined_scalar))?;
                ensure(r.invertible == (k >= 2), || format!("p={p} k={k}: invertible {}", r.invertible))?;
                blocks += 1;
            }
        }
    }
    Ok(format!("{blocks} blocks with p <= 4, k <= 4"))
}

fn binom(n: i64, k: i64) -> usize {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) as usize / (i + 1) as usize)
}

fn count_exact(m: usize, o: usize, d: i32, w: u32) -> usize {
    let mi = m as i64;
    let mut total = 0;
    for t in 0..=m.min(o) {
        let s = t as i32 - d;
        if (0..=m as i32).contains(&s) {
            total += binom(mi, s as i64) * binom(mi, t as i64) * binom((o - t) as i64 + mi - 1, mi - 1);
        }
    }
    binom(i64::from(w) + mi, mi) * total
}

fn count_upto(m: usize, k: i32, d: i32, w: u32) -> usize {
    (0..=k.max(-1)).map(|o| count_exact(m, o as usize, d, w)).sum()
}

fn filtration_shapes() -> Outcome {
    let window = FiltrationWindow { degrees: -2..=2, hbar: -1..=4, weight_bound: Some(2) };
    let mut cells = 0;
    for (name, x) in corpus().into_iter().filter(|(_, x)| x.m() <= 2) {
        let m = x.m();
        for i in 0..=3 {
            for p in 0..=4 {
                let dims = filtration_dims(FiltrationLabel { kind: FiltrationKind::G, level: i }, p, &window, &x).map_err(|e| e.to_string())?;
                for ((d, e), n) in dims {
                    let j = e + 1;
                    let expect = if j >= p { count_upto(m, (j - i).min(j), d, 2) } else { 0 };
                    ensure(n == expect, || format!("{name}: G^{i} F~^{p} at ({d}, h^{e}) is {n}, expected {expect}"))?;
                    cells += 1;
                }
            }
        }
        let conv = filtration_dims(FiltrationLabel { kind: FiltrationKind::GconvF, level: 2 }, 0, &window, &x).map_err(|e| e.to_string())?;
        let f2 = filtration_dims(FiltrationLabel { kind: FiltrationKind::Ftilde, level: 2 }, 0, &window, &x).map_err(|e| e.to_string())?;
        for ((d, e), n) in &conv {
            let a_part = if *e == 0 { count_exact(m, 0, *d, 2) } else { 0 };
            ensure(*n == a_part + f2[&(*d, *e)], || format!("{name}: (G*F~)^2 at ({d}, h^{e})"))?;
            cells += 1;
        }
    }
    Ok(format!("{cells} table cells on potentials with m <= 2"))
}

fn parser_and_reports() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
    files.sort();
    let schema = serde_json::from_str(REPORT_SCHEMA).map_err(|e| e.to_string())?;
    let validator = jsonschema::validator_for(&schema).map_err(|e| e.to_string())?;
    let run = |args: &[&str]| -> Result<(serde_json::Value, i32), String> {
        let out = Command::new(env!("CARGO_BIN_EXE_qshift")).args(args).env_remove("QSHIFT_SEED").output().map_err(|e| e.to_string())?;
        let json = serde_json::from_slice(&out.stdout).map_err(|e| format!("{args:?}: {e}"))?;
        Ok((json, out.status.code().unwrap_or(-1)))
    };
    let commands: [&[&str]; 8] = [
        &["milnor"],
        &["vc-dims"],
        &["koszul-dims"],
        &["check-mc"],
        &["check-compat"],
        &["check-selfdual"],
        &["eigen", "--p", "1", "--k", "2", "--weight-bound", "1"],
        &["filtration", "--kind", "conv", "--level", "2", "--weight-bound", "1"],
    ];
    let mut reports = 0;
    for file in &files {
        let text = std::fs::read_to_string(file).map_err(|e| e.to_string())?;
        let parsed = parse_problem(&text).map_err(|e| e.to_string())?;
        ensure(parse_problem(&parsed.to_string()).as_ref() == Ok(&parsed), || format!("{}: round trip", file.display()))?;
        for cmd in commands {
            let mut args = vec![cmd[0], file.to_str().unwrap()];
            args.extend_from_slice(&cmd[1..]);
            let (json, code) = run(&args)?;
            ensure(validator.is_valid(&json), || format!("{args:?}: schema violation"))?;
            ensure(code == 0 && json["status"] == "ok", || format!("{args:?}: exit {code}, {}", json["status"]))?;
            reports += 1;
        }
    }
    let tmp = std::env::temp_dir().join(format!("qshift-acceptance-{}.qs", std::process::id()));
    std::fs::write(&tmp, "vars x; f = x + z;").map_err(|e| e.to_string())?;
    let (json, code) = run(&["milnor", tmp.to_str().unwrap()])?;
    std::fs::remove_file(&tmp).ok();
    ensure(code == 2 && json["status"] == "error" && validator.is_valid(&json), || format!("bad input gave exit {code}"))?;
    Ok(format!("{} files round trip, {reports} reports valid, error exit code 2", files.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("master equation on the corpus", master_equation),
        ("compatibility of the canonical pair", compatibility),
        ("vanishing cycle dimensions equal Milnor numbers", vanishing_cycles),
        ("key identity on random instances", key_identity),
        ("bracket coherence, Jacobi and Leibniz", bracket_coherence),
        ("self-duality suite", self_duality),
        ("obstruction eigenvalues", obstruction_eigenvalues),
        ("filtration shapes", filtration_shapes),
        ("parser, reports and exit codes", parser_and_reports),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{ms} ms]"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}: {reason} [{ms} ms]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
