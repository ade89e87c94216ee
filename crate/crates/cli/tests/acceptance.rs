//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex;
use rand::Rng;
use serde_json::{json, Value};

use junta_cli::{run_experiment, run_single, ExperimentSpec, ResultRecord};
use junta_core::dist_learn::random_junta;
use junta_core::hypercube::{fourier_dense, fourier_transform, inverse_transform, CubeFunction};
use junta_core::io::{write_json, DistributionFile, StateFile};
use junta_core::linalg::ComplexMatrix;
use junta_core::qac0::{choi_of_boolean_function, fnorm_agreement_fit};
use junta_core::qstate::{pauli_expand, pauli_reconstruct, random_state, DensityMatrix, Pauli, PauliSpectrum, PauliString};
use junta_core::rng::substream;
use junta_core::shadows::{collect_shadows, estimate_lowdeg, single_sample_second_moment};

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn spec(command: &str, grid: Value, trials: usize, seed: u64) -> ExperimentSpec {
    serde_json::from_value(json!({"command": command, "grid": grid, "trials": trials, "seed": seed})).unwrap()
}

fn metric(r: &ResultRecord, key: &str) -> Option<f64> {
    r.metrics.get(key).and_then(Value::as_f64)
}

fn flag(r: &ResultRecord, key: &str) -> bool {
    r.metrics.get(key).and_then(Value::as_bool).unwrap_or(false)
}

fn errors(records: &[ResultRecord]) -> Vec<String> {
    records.iter().filter_map(|r| r.error.clone()).collect()
}

/// Criterion 1: Parseval and round trips to 1e-10 on 100 instances each, under 10 s.
fn parseval() -> Outcome {
    let start = Instant::now();
    let mut rng = substream(1, 0);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = 1 + i % 10;
        let f = CubeFunction::new(n, (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let energy: f64 = fourier_dense(&f).iter().map(|c| c * c).sum();
        worst = worst.max((energy - f.mean_square()).abs());
        let back = inverse_transform(&fourier_transform(&f));
        for (a, b) in back.values().iter().zip(f.values()) {
            worst = worst.max((a - b).abs());
        }
    }
    for i in 0..100 {
        let n = 1 + i % 4;
        let d = 1usize << n;
        let m = if i % 2 == 0 {
            random_state::<f64, _>(n, 1 + i % d, &mut rng).unwrap().into_matrix()
        } else {
            let data = (0..d * d)
                .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            ComplexMatrix::from_vec(d, data).unwrap().hermitian_part()
        };
        let spec = pauli_expand(&m).unwrap();
        let fro = m.frobenius_norm();
        worst = worst.max((spec.sum_squares() - fro * fro / d as f64).abs());
        worst = worst.max(pauli_reconstruct(&spec).unwrap().max_abs_diff(&m));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-10 && secs < 10.0,
        format!("max deviation {worst:.2e} (tol 1e-10), {secs:.2} s (limit 10 s)"),
    )
}

/// Criterion 2: Shadow estimates within 5 standard errors; second moments within 5%.
fn shadows() -> Outcome {
    let start = Instant::now();
    let (n, t) = (3usize, 200_000usize);
    let mut worst_z = 0.0f64;
    let mut worst_moment = 0.0f64;
    for s in 0..5u64 {
        let mut rng = substream(200 + s, 0);
        let rho = random_state::<f64, _>(n, 1 << n, &mut rng).unwrap();
        let exact = pauli_expand(rho.matrix()).unwrap();
        let set = collect_shadows(&rho, t, 300 + s).unwrap();
        let est = estimate_lowdeg::<f64>(&set, 2).unwrap();
        for (p, c) in est.iter() {
            let w = p.weight() as i32;
            let var = 3f64.powi(w) / 4f64.powi(n as i32);
            worst_z = worst_z.max((c - exact.get(p)).abs() / (var / t as f64).sqrt());
            if w > 0 {
                let m: f64 = single_sample_second_moment(&set, p).unwrap();
                worst_moment = worst_moment.max((m / var - 1.0).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_z <= 5.0 && worst_moment <= 0.05 && secs < 120.0,
        format!(
            "max |error|/SE {worst_z:.2} (limit 5), max second-moment deviation {:.2}% (limit 5%), {secs:.1} s",
            100.0 * worst_moment
        ),
    )
}

/// Criterion 3: n=10, k=3 junta distributions: TV ≤ ε in ≥ 45/50, under 2 s per trial.
fn junta_distributions(dir: &Path) -> Outcome {
    let mut truths = Vec::new();
    for j in 0..5u64 {
        let mut rng = substream(400 + j, 0);
        let (_, p) = random_junta::<f64, _>(10, 3, &mut rng).unwrap();
        let path = dir.join(format!("junta{j}.json"));
        write_json(&path, &DistributionFile::from_distribution(&p)).unwrap();
        truths.push(Value::from(path.to_string_lossy().into_owned()));
    }
    let mut s = spec(
        "learn-dist",
        json!({"n": [10], "k": [3], "eps": [0.2], "delta": [0.1], "c": [8], "truth": truths}),
        10,
        3,
    );
    s.timing = true;
    let records = run_experiment(&s).unwrap();
    let errs = errors(&records);
    let good = records.iter().filter(|r| metric(r, "tv_exact").is_some_and(|tv| tv <= 0.2)).count();
    let worst_tv = records.iter().filter_map(|r| metric(r, "tv_exact")).fold(0.0, f64::max);
    let slowest = records.iter().filter_map(|r| metric(r, "elapsed_ms")).fold(0.0, f64::max);
    outcome(
        errs.is_empty() && records.len() == 50 && good >= 45 && slowest < 2000.0,
        format!(
            "{good}/{} trials with TV ≤ 0.2 (need 45), max TV {worst_tv:.3}, slowest trial {slowest:.0} ms (limit 2000){}",
            records.len(),
            if errs.is_empty() { String::new() } else { format!(", errors: {errs:?}") }
        ),
    )
}

/// A 2-junta on random qubits of n = 6 whose fifteen non-identity
/// coefficients are all large: a product of two mixed qubits with Bloch
/// components of magnitude at least 0.35.
fn strong_junta_state<R: Rng>(rng: &mut R) -> DensityMatrix<f64> {
    let n = 6;
    let q1 = rng.gen_range(0..n);
    let q2 = (q1 + rng.gen_range(1..n)) % n;
    let mut bloch = || -> [f64; 4] {
        let mut r = [1.0; 4];
        for c in &mut r[1..] {
            *c = rng.gen_range(0.35..0.54) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        }
        r
    };
    let (r1, r2) = (bloch(), bloch());
    let mut spectrum = PauliSpectrum::new(n);
    for (a, pa) in Pauli::ALL.iter().enumerate() {
        for (b, pb) in Pauli::ALL.iter().enumerate() {
            let mut codes = vec![Pauli::I; n];
            codes[q1] = *pa;
            codes[q2] = *pb;
            spectrum
                .insert(PauliString::new(&codes).unwrap(), r1[a] * r2[b] / (1 << n) as f64)
                .unwrap();
        }
    }
    DensityMatrix::new(pauli_reconstruct(&spectrum).unwrap()).unwrap()
}

/// Criterion 4: n=6, k=2 junta states: projected trace distance ≤ √2 ε in ≥ 18/20;
/// exact support recovery in ≥ 90% of the trials where every true
/// coefficient clears twice the cutoff. Random planted states rarely clear
/// it, so a second batch plants states that always do.
fn junta_states(dir: &Path) -> Outcome {
    let eps = 0.25;
    let grid = json!({"n": [6], "k": [2], "eps": [eps], "delta": [0.1], "c": [8]});
    let records = run_experiment(&spec("learn-state", grid.clone(), 20, 4)).unwrap();
    let mut rng = substream(41, 0);
    let truths: Vec<Value> = (0..5)
        .map(|j| {
            let path = dir.join(format!("state{j}.json"));
            write_json(&path, &StateFile::from_state(&strong_junta_state(&mut rng))).unwrap();
            Value::from(path.to_string_lossy().into_owned())
        })
        .collect();
    let mut strong_grid = grid;
    strong_grid["truth"] = Value::from(truths);
    let strong = run_experiment(&spec("learn-state", strong_grid, 4, 42)).unwrap();
    let errs: Vec<String> = errors(&records).into_iter().chain(errors(&strong)).collect();

    let limit = 2f64.sqrt() * eps;
    let close = records
        .iter()
        .filter(|r| metric(r, "trace_distance").is_some_and(|d| d <= limit))
        .count();
    let worst = records.iter().filter_map(|r| metric(r, "trace_distance")).fold(0.0, f64::max);
    let eligible: Vec<&ResultRecord> = records.iter().chain(&strong).filter(|r| flag(r, "support_eligible")).collect();
    let recovered = eligible.iter().filter(|r| flag(r, "support_recovered")).count();
    let strong_eligible = strong.iter().filter(|r| flag(r, "support_eligible")).count();
    let support_ok = !eligible.is_empty() && recovered as f64 >= 0.9 * eligible.len() as f64;
    outcome(
        errs.is_empty() && close >= 18 && strong_eligible == strong.len() && support_ok,
        format!(
            "{close}/20 with trace distance ≤ √2·ε = {limit:.4} (need 18), max {worst:.4}; support recovered in {recovered}/{} eligible trials (need 90%; {strong_eligible}/{} strong plants eligible){}",
            eligible.len(),
            strong.len(),
            if errs.is_empty() { String::new() } else { format!(", errors: {errs:?}") }
        ),
    )
}

/// Criterion 5: Choi states are juntas on the output light cone (residual ≤ 1e-10).
fn light_cone_law() -> Outcome {
    let records = run_experiment(&spec(
        "qac0-analyze",
        json!({"n": [1, 2, 3], "a": [0, 1, 2], "depth": [1, 2], "max_arity": [3], "toffoli_rate": [0.6]}),
        3,
        5,
    ))
    .unwrap();
    let errs = errors(&records);
    let residuals: Vec<f64> = records.iter().filter_map(|r| metric(r, "cone_residual")).collect();
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    let toffolis: usize = records.iter().filter_map(|r| metric(r, "size")).map(|s| s as usize).sum();
    outcome(
        errs.is_empty() && residuals.len() >= 50 && worst <= 1e-10,
        format!(
            "{} circuits ({toffolis} Toffolis), max off-cone residual {worst:.2e} (tol 1e-10)",
            residuals.len()
        ),
    )
}

/// Criterion 6: Ancilla relation per coefficient to 1e-9 on 20 circuits, n ≤ 3, a ≤ 1.
fn ancilla_relation() -> Outcome {
    let records = run_experiment(&spec(
        "qac0-analyze",
        json!({"n": [1, 2, 3], "a": [0, 1], "depth": [2], "random_sigma": [true]}),
        4,
        6,
    ))
    .unwrap();
    let errs = errors(&records);
    let residuals: Vec<f64> = records.iter().filter_map(|r| metric(r, "ancilla_residual")).collect();
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    outcome(
        errs.is_empty() && residuals.len() >= 20 && worst <= 1e-9,
        format!("{} circuits with random σ, max coefficient deviation {worst:.2e} (tol 1e-9)", residuals.len()),
    )
}

fn random_boolean<R: Rng>(n: usize, rng: &mut R) -> CubeFunction<f64> {
    CubeFunction::new(n, (0..1 << n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()).unwrap()
}

/// Criterion 7: One κ per n with κ ‖ρ_f − ρ_g‖_F² = Pr[f ≠ g], residual ≤ 1e-10.
fn agreement_identity() -> Outcome {
    // exhaustive at n = 2 first
    let all: Vec<CubeFunction<f64>> = (0..16u32)
        .map(|t| CubeFunction::new(2, (0..4).map(|x| if t >> x & 1 == 1 { -1.0 } else { 1.0 }).collect()).unwrap())
        .collect();
    let pairs: Vec<_> = all.iter().flat_map(|f| all.iter().map(move |g| (f.clone(), g.clone()))).collect();
    let brute = fnorm_agreement_fit(&pairs).unwrap();
    let brute_ok = brute.kappa.is_some_and(|k| (k - 2.0).abs() <= 1e-10) && brute.max_residual <= 1e-10;
    let mut rng = substream(7, 0);
    let mut ok = brute_ok;
    let mut parts = vec![format!(
        "n=2 exhaustive κ = {:.12}, residual {:.1e}",
        brute.kappa.unwrap_or(f64::NAN),
        brute.max_residual
    )];
    for n in 1..=3usize {
        let pairs: Vec<_> = (0..20).map(|_| (random_boolean(n, &mut rng), random_boolean(n, &mut rng))).collect();
        assert!(choi_of_boolean_function(&pairs[0].0).is_ok());
        let fit = fnorm_agreement_fit(&pairs).unwrap();
        let expected = 2f64.powi(n as i32 - 1);
        let k = fit.kappa.unwrap_or(f64::NAN);
        ok &= (k - expected).abs() <= 1e-10 && fit.max_residual <= 1e-10;
        parts.push(format!("n={n} κ = {k:.12} (2^(n-1) = {expected}), residual {:.1e}", fit.max_residual));
    }
    outcome(ok, parts.join("; "))
}

/// Criterion 8: Address function: degree D+1 and distance ≥ (2^D − k)/2^{D+1}, with
/// equality 1/4 at (D, k) = (1, 1).
fn address_function() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in 1..=2usize {
        let ks: Vec<usize> = (0..=(1 << d)).collect();
        let records = run_experiment(&spec("address-distance", json!({"d": [d], "k": ks}), 1, 8)).unwrap();
        ok &= errors(&records).is_empty();
        for r in &records {
            let k = r.params["k"].as_u64().unwrap();
            let dist = metric(r, "distance").unwrap_or(f64::NAN);
            let bound = metric(r, "bound").unwrap_or(f64::NAN);
            let deg = metric(r, "degree").unwrap_or(f64::NAN);
            ok &= deg == (d + 1) as f64 && dist >= bound - 1e-15;
            if d == 1 && k == 1 {
                ok &= dist == 0.25;
            }
            parts.push(format!("D={d},k={k}: {dist}≥{bound}"));
        }
    }
    outcome(ok, format!("degrees D+1 confirmed; {}", parts.join(", ")))
}

/// Criterion 9: Junta tester at n=4, k=1, ε=0.1: oracle certifier always right,
/// Frobenius certifier right in ≥ 90% of 20 seeds per case, copies equal to
/// the budget.
fn junta_tester() -> Outcome {
    let base = |cert: &str| {
        json!({"n": [4], "k": [1], "eps": [0.1], "delta": [0.1], "c": [8], "certifier": [cert], "instance": ["close", "far"]})
    };
    let oracle = run_experiment(&spec("test-state", base("oracle"), 5, 9)).unwrap();
    let frob = run_experiment(&spec("test-state", base("frobenius"), 20, 10)).unwrap();
    let errs: Vec<String> = errors(&oracle).into_iter().chain(errors(&frob)).collect();
    let oracle_ok = oracle.iter().all(|r| flag(r, "correct"));
    let budget_ok = oracle
        .iter()
        .chain(&frob)
        .all(|r| metric(r, "copies_used").is_some() && metric(r, "copies_used") == metric(r, "budget"));
    let per_case: Vec<(String, usize, usize)> = ["close", "far"]
        .iter()
        .map(|case| {
            let rs: Vec<&ResultRecord> = frob.iter().filter(|r| r.params["instance"] == *case).collect();
            (case.to_string(), rs.iter().filter(|r| flag(r, "correct")).count(), rs.len())
        })
        .collect();
    let frob_ok = per_case.iter().all(|(_, good, total)| *total == 20 && *good as f64 >= 0.9 * 20.0);
    let budget = frob.first().and_then(|r| metric(r, "budget")).unwrap_or(f64::NAN);
    outcome(
        errs.is_empty() && oracle_ok && frob_ok && budget_ok,
        format!(
            "oracle {}/{} correct; frobenius close {}/20, far {}/20 (need 18 each); copies = budget in every run ({budget} per Frobenius run){}",
            oracle.iter().filter(|r| flag(r, "correct")).count(),
            oracle.len(),
            per_case[0].1,
            per_case[1].1,
            if errs.is_empty() { String::new() } else { format!(", errors: {errs:?}") }
        ),
    )
}

/// Criterion 10: CLI experiments replay byte-identically at any thread count, and
/// every record regenerates from its (command, params, seed).
fn determinism(dir: &Path) -> Outcome {
    let exe = env!("CARGO_BIN_EXE_junta");
    let specs = [
        spec("learn-dist", json!({"n": [8], "k": [2], "eps": [0.2, 0.3]}), 2, 21),
        spec("learn-state", json!({"n": [3], "k": [1], "eps": [0.3]}), 2, 22),
        spec("test-state", json!({"n": [3], "k": [1], "eps": [0.15], "certifier": ["frobenius"], "instance": ["close", "far"]}), 1, 23),
        spec("qac0-analyze", json!({"n": [2], "a": [1], "random_sigma": [false, true]}), 2, 24),
        spec("qac0-learn", json!({"n": [1], "a": [1], "eps": [0.3]}), 1, 25),
        spec("qac0-choi", json!({"n": [2], "kind": ["ancilla", "full"]}), 1, 26),
        spec("shadows-bench", json!({"n": [3], "k": [2], "samples": [20000]}), 2, 27),
        spec("address-distance", json!({"d": [2], "k": [1, 2]}), 1, 28),
    ];
    let mut failures = Vec::new();
    let mut records_checked = 0;
    for s in &specs {
        let path = dir.join(format!("{}.json", s.command));
        std::fs::write(&path, serde_json::to_string(s).unwrap()).unwrap();
        let outputs: Vec<Vec<u8>> = [("1", None), ("4", None), ("", Some("3"))]
            .iter()
            .map(|(threads, env)| {
                let mut cmd = Command::new(exe);
                cmd.env_remove("JUNTA_THREADS");
                if let Some(e) = env {
                    cmd.env("JUNTA_THREADS", e);
                }
                if !threads.is_empty() {
                    cmd.args(["--threads", threads]);
                }
                let out = cmd.arg("run").arg(&path).output().expect("run the CLI");
                if !out.status.success() {
                    failures.push(format!("{} exited with {:?}", s.command, out.status.code()));
                }
                out.stdout
            })
            .collect();
        if outputs.iter().any(|o| o != &outputs[0] || o.is_empty()) {
            failures.push(format!("{} output differs across thread counts", s.command));
        }
        let text = String::from_utf8(outputs[0].clone()).unwrap();
        for r in junta_cli::read_records(&text).unwrap() {
            records_checked += 1;
            let again = run_single(&r.command, &r.params, r.seed, r.cell, r.trial, false);
            if again != r {
                failures.push(format!("{} record ({}, {}) does not replay", r.command, r.cell, r.trial));
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} specs identical at 1, 4 and JUNTA_THREADS=3 threads; {records_checked} records replayed from (command, params, seed)",
                specs.len()
            )
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<(&str, Check)> = vec![
        ("Fourier/Pauli Parseval and round trips", Box::new(parseval)),
        ("classical-shadow unbiasedness and variance", Box::new(shadows)),
        ("junta-distribution learning", Box::new(|| junta_distributions(dir.path()))),
        ("junta-state learning", Box::new(|| junta_states(dir.path()))),
        ("light-cone junta law", Box::new(light_cone_law)),
        ("ancilla Choi relation", Box::new(ancilla_relation)),
        ("Boolean-Choi agreement identity", Box::new(agreement_identity)),
        ("address function", Box::new(address_function)),
        ("junta tester", Box::new(junta_tester)),
        ("determinism", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    println!("acceptance criteria:");
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "  [{}] {:>2}. {name}: {} ({:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
