//! One function per experiment command. Each takes the cell parameters and a
//! seed and returns a metrics map; all randomness is derived from the seed.

use std::collections::BTreeMap;
use std::io::Write;

use anyhow::{bail, ensure, Context, Result};
use rand::seq::SliceRandom;
use serde_json::{json, Value};

use junta_core::dist_learn::{
    learn_from_samples, learn_junta_distribution, random_junta, DistributionSampler, LearnerConfig, SampleSet,
};
use junta_core::hypercube::{degree, fourier_transform, mask_indices, tv_distance, Distribution};
use junta_core::io::{read_json, CircuitFile, DistributionFile, StateFile};
use junta_core::qac0::{
    address_function, ancilla_relation_residual, boolean_distance_to_junta, choi_state_full, choi_state_with_ancilla,
    concentration_search, light_cone, random_circuit, removal_perturbation, with_random_sigma, Qac0Circuit,
    RandomCircuitSpec, MAX_FULL_CHOI_QUBITS,
};
use junta_core::qstate::{
    embed_junta, pauli_expand, proxy_distance, random_pure, random_state, trace_distance,
    DensityMatrix, JuntaStateDescriptor,
};
use junta_core::rng::{derive_seed, keyed};
use junta_core::shadows::{collect_shadows, estimate_lowdeg, single_sample_second_moment, ShadowSet};
use junta_core::state_learn::{
    frobenius_merit, learn_junta_state, learn_qac0_choi, qac0_concentration_k, threshold_cutoff, Qac0LearnConfig,
    SimulatedState, StateLearnConfig,
};
use junta_core::state_test::{
    test_junta, test_junta_budget, Certifier, Decision, FrobeniusCertifier, JuntaTestConfig, OracleCertifier,
};

pub type Params = BTreeMap<String, Value>;
pub type Metrics = BTreeMap<String, Value>;

/// Every command accepted by [`run_command`].
pub const COMMANDS: &[&str] = &[
    "learn-dist",
    "learn-state",
    "test-state",
    "qac0-choi",
    "qac0-analyze",
    "qac0-learn",
    "shadows-bench",
    "address-distance",
];

/// Runs one experiment.
pub fn run_command(command: &str, params: &Params, seed: u64) -> Result<Metrics> {
    match command {
        "learn-dist" => learn_dist(params, seed),
        "learn-state" => learn_state(params, seed),
        "test-state" => test_state(params, seed),
        "qac0-choi" => qac0_choi(params, seed),
        "qac0-analyze" => qac0_analyze(params, seed),
        "qac0-learn" => qac0_learn(params, seed),
        "shadows-bench" => shadows_bench(params, seed),
        "address-distance" => address_distance(params),
        other => bail!("unknown command {other:?}"),
    }
}

fn get<'a>(p: &'a Params, key: &str) -> Option<&'a Value> {
    p.get(key).filter(|v| !v.is_null())
}

fn usize_opt(p: &Params, key: &str) -> Result<Option<usize>> {
    get(p, key)
        .map(|v| {
            v.as_u64()
                .map(|x| x as usize)
                .with_context(|| format!("parameter {key} must be a non-negative integer, got {v}"))
        })
        .transpose()
}

fn usize_param(p: &Params, key: &str, default: Option<usize>) -> Result<usize> {
    usize_opt(p, key)?
        .or(default)
        .with_context(|| format!("missing parameter {key}"))
}

fn f64_param(p: &Params, key: &str, default: Option<f64>) -> Result<f64> {
    match get(p, key) {
        Some(v) => v.as_f64().with_context(|| format!("parameter {key} must be a number, got {v}")),
        None => default.with_context(|| format!("missing parameter {key}")),
    }
}

fn str_opt<'a>(p: &'a Params, key: &str) -> Result<Option<&'a str>> {
    get(p, key)
        .map(|v| v.as_str().with_context(|| format!("parameter {key} must be a string, got {v}")))
        .transpose()
}

fn bool_param(p: &Params, key: &str, default: bool) -> Result<bool> {
    match get(p, key) {
        Some(v) => v.as_bool().with_context(|| format!("parameter {key} must be a boolean, got {v}")),
        None => Ok(default),
    }
}

fn read_state(path: &str) -> Result<DensityMatrix<f64>> {
    let file: StateFile = read_json(path).with_context(|| format!("reading state {path}"))?;
    Ok(file.to_state()?)
}

fn learn_dist(p: &Params, seed: u64) -> Result<Metrics> {
    let k = usize_param(p, "k", None)?;
    let cfg = LearnerConfig {
        k,
        eps: f64_param(p, "eps", None)?,
        delta: f64_param(p, "delta", Some(0.1))?,
        c: f64_param(p, "c", Some(8.0))?,
    };
    let mut m = Metrics::new();
    let truth: Distribution<f64> = match str_opt(p, "truth")? {
        Some(path) => {
            let file: DistributionFile = read_json(path).with_context(|| format!("reading distribution {path}"))?;
            file.to_distribution()?
        }
        None => {
            let n = usize_param(p, "n", None)?;
            let (vars, dist) = random_junta(n, k, &mut keyed(seed, &[0]))?;
            m.insert("planted_vars".into(), json!(vars));
            dist
        }
    };
    if let Some(n) = usize_opt(p, "n")? {
        if n != truth.n() {
            bail!("n = {n} does not match the truth file ({} variables)", truth.n());
        }
    }
    let mut sampler = DistributionSampler::new(&truth, keyed(seed, &[1]))?;
    let out = match usize_opt(p, "samples")? {
        Some(t) => learn_from_samples::<f64>(&SampleSet::draw(&mut sampler, t)?, &cfg)?,
        None => learn_junta_distribution::<f64>(&mut sampler, &cfg)?,
    };
    let surviving: Vec<Value> = out
        .surviving
        .iter()
        .map(|(s, c)| json!({"set": mask_indices(s), "coeff": c}))
        .collect();
    m.insert("T".into(), json!(out.samples_used));
    m.insert("tv_exact".into(), json!(tv_distance(&truth, &out.distribution)?));
    m.insert("junta_set".into(), json!(out.junta_set));
    m.insert("surviving_sets".into(), Value::Array(surviving));
    Ok(m)
}

/// A random `k`-junta state on random qubits of an `n`-qubit register.
fn planted_junta_state(n: usize, k: usize, seed: u64) -> Result<(Vec<usize>, DensityMatrix<f64>)> {
    let mut rng = keyed(seed, &[0]);
    let mut qubits: Vec<usize> = (0..n).collect();
    qubits.shuffle(&mut rng);
    qubits.truncate(k);
    qubits.sort_unstable();
    let block = random_state(k, 1 << k, &mut rng)?;
    let state = embed_junta(&JuntaStateDescriptor {
        n,
        qubits: qubits.clone(),
        state: block,
    })?;
    Ok((qubits, state))
}

fn learn_state(p: &Params, seed: u64) -> Result<Metrics> {
    let k = usize_param(p, "k", None)?;
    let eps = f64_param(p, "eps", None)?;
    let mut m = Metrics::new();
    let truth = match str_opt(p, "truth")? {
        Some(path) => read_state(path)?,
        None => {
            let (qubits, state) = planted_junta_state(usize_param(p, "n", None)?, k, seed)?;
            m.insert("planted_qubits".into(), json!(qubits));
            state
        }
    };
    let n = truth.n();
    let cfg = StateLearnConfig {
        k,
        eps,
        delta: f64_param(p, "delta", Some(0.1))?,
        c: f64_param(p, "c", Some(8.0))?,
        seed: derive_seed(seed, &[1]),
    };
    let mut access = SimulatedState::new(truth.clone())?;
    let out = learn_junta_state::<f64>(&mut access, &cfg)?;

    // support of the truth among strings the learner can keep
    let cutoff = threshold_cutoff(n, k, eps);
    let exact = pauli_expand(truth.matrix())?;
    let true_support: Vec<_> = exact
        .iter()
        .filter(|(q, c)| q.weight() > 0 && q.weight() <= k && c.abs() > 1e-12)
        .collect();
    let eligible = exact
        .iter()
        .filter(|(q, c)| q.weight() > 0 && c.abs() > 1e-12)
        .all(|(q, c)| q.weight() <= k && c.abs() > 2.0 * cutoff);
    let learned: Vec<_> = out.spectrum.iter().filter(|(q, _)| q.weight() > 0).map(|(q, _)| *q).collect();
    let recovered = learned.len() == true_support.len() && true_support.iter().all(|(q, _)| learned.contains(q));

    m.insert("T".into(), json!(out.copies_used));
    m.insert(
        "trace_distance".into(),
        match &out.psd_projected {
            Some(s) => json!(trace_distance(s, &truth)?),
            None => Value::Null,
        },
    );
    m.insert("trace_distance_raw".into(), json!(trace_distance(&out.matrix, truth.matrix())?));
    m.insert("frobenius_merit".into(), json!(frobenius_merit(truth.matrix(), &out.matrix, n)?));
    m.insert("support_recovered".into(), json!(recovered));
    m.insert("support_eligible".into(), json!(eligible));
    m.insert("kept".into(), json!(learned.len()));
    m.insert("threshold_cutoff".into(), json!(cutoff));
    Ok(m)
}

fn test_state(p: &Params, seed: u64) -> Result<Metrics> {
    let k = usize_param(p, "k", None)?;
    let cfg = JuntaTestConfig {
        k,
        eps: f64_param(p, "eps", None)?,
        delta: f64_param(p, "delta", Some(0.1))?,
        c: f64_param(p, "c", Some(8.0))?,
        seed: derive_seed(seed, &[1]),
    };
    let mut m = Metrics::new();
    let (truth, expected) = match str_opt(p, "truth")? {
        Some(path) => (read_state(path)?, None),
        None => {
            let n = usize_param(p, "n", None)?;
            match str_opt(p, "instance")?.unwrap_or("close") {
                "close" => {
                    let (qubits, state) = planted_junta_state(n, k, seed)?;
                    m.insert("planted_qubits".into(), json!(qubits));
                    (state, Some(Decision::JuntaClose))
                }
                "far" => {
                    // |0⟩⟨0| on qubit 0 and a random pure state on the rest
                    if n < 2 {
                        bail!("the far instance needs n ≥ 2");
                    }
                    let zero = DensityMatrix::basis_state(1, 0)?;
                    let rest = random_pure(n - 1, &mut keyed(seed, &[0]))?;
                    (zero.tensor(&rest)?, Some(Decision::JuntaFar))
                }
                other => bail!("instance must be close or far, got {other:?}"),
            }
        }
    };
    let n = truth.n();
    if let Some(want) = usize_opt(p, "n")? {
        if want != n {
            bail!("n = {want} does not match the truth file ({n} qubits)");
        }
    }
    let oracle;
    let frobenius;
    let certifier: &dyn Certifier<f64> = match str_opt(p, "certifier")?.unwrap_or("frobenius") {
        "oracle" => {
            oracle = OracleCertifier::new(truth.clone());
            &oracle
        }
        "frobenius" => {
            frobenius = FrobeniusCertifier {
                c: f64_param(p, "certifier_c", Some(8.0))?,
            };
            &frobenius
        }
        other => bail!("certifier must be frobenius or oracle, got {other:?}"),
    };
    let budget = test_junta_budget(n, &cfg, certifier)?;
    let mut access = SimulatedState::new(truth.clone())?;
    let verdict = test_junta(&mut access, &cfg, certifier)?;
    if n <= junta_core::qstate::MAX_PROXY_QUBITS {
        m.insert("proxy_distance".into(), json!(proxy_distance(&truth, k.min(n))?.1));
    }
    if let Some(e) = expected {
        m.insert("expected".into(), serde_json::to_value(e)?);
        m.insert("correct".into(), json!(verdict.decision == e));
    }
    m.insert("decision".into(), serde_json::to_value(verdict.decision)?);
    m.insert("best_subset".into(), json!(verdict.best_subset));
    m.insert("copies_used".into(), json!(verdict.copies_used));
    m.insert("budget".into(), json!(budget));
    m.insert("certifier".into(), json!(certifier.name()));
    m.insert("verdict".into(), serde_json::to_value(&verdict)?);
    Ok(m)
}

fn circuit_from_params(p: &Params, seed: u64) -> Result<Qac0Circuit<f64>> {
    if let Some(path) = str_opt(p, "circuit")? {
        let file: CircuitFile = read_json(path).with_context(|| format!("reading circuit {path}"))?;
        return Ok(file.to_circuit()?);
    }
    let spec = RandomCircuitSpec {
        n: usize_param(p, "n", None)?,
        a: usize_param(p, "a", Some(0))?,
        depth: usize_param(p, "depth", Some(2))?,
        max_arity: usize_param(p, "max_arity", Some(3))?,
        toffoli_rate: f64_param(p, "toffoli_rate", Some(0.5))?,
    };
    let mut rng = keyed(seed, &[0]);
    let c = random_circuit(&spec, &mut rng)?;
    if bool_param(p, "random_sigma", false)? {
        Ok(with_random_sigma(c, &mut rng)?)
    } else {
        Ok(c)
    }
}

fn circuit_metrics(c: &Qac0Circuit<f64>, m: &mut Metrics) {
    m.insert("size".into(), json!(c.size()));
    m.insert("depth".into(), json!(c.depth()));
    m.insert("max_arity".into(), json!(c.max_toffoli_arity()));
    m.insert("total_qubits".into(), json!(c.total_qubits()));
}

fn qac0_choi(p: &Params, seed: u64) -> Result<Metrics> {
    let c = circuit_from_params(p, seed)?;
    let choi = match str_opt(p, "kind")?.unwrap_or("ancilla") {
        "ancilla" => choi_state_with_ancilla(&c)?,
        "full" => choi_state_full(&c)?,
        other => bail!("kind must be ancilla or full, got {other:?}"),
    };
    let mut m = Metrics::new();
    circuit_metrics(&c, &mut m);
    m.insert("circuit".into(), serde_json::to_value(CircuitFile::from_circuit(&c))?);
    m.insert("qubits".into(), json!(choi.state.n()));
    m.insert("state".into(), serde_json::to_value(StateFile::from_state(&choi.state))?);
    Ok(m)
}

fn qac0_analyze(p: &Params, seed: u64) -> Result<Metrics> {
    let c = circuit_from_params(p, seed)?;
    let mut m = Metrics::new();
    circuit_metrics(&c, &mut m);
    let cone = light_cone(&c, c.output_qubit())?;
    m.insert("cone_size".into(), json!(cone.len()));
    m.insert("light_cone".into(), json!(cone));
    let eps = f64_param(p, "eps", Some(0.1))?;
    let (k, clamped) = qac0_concentration_k(c.n(), c.size(), c.depth(), c.ancillas(), eps);
    m.insert("concentration_k".into(), json!(k));
    m.insert("concentration_k_clamped".into(), json!(clamped));
    if c.total_qubits() <= MAX_FULL_CHOI_QUBITS {
        let choi = choi_state_full(&c)?;
        let (set, residual) = concentration_search(&choi.state, cone.len() + 1)?;
        m.insert("cone_junta_set".into(), json!(set));
        m.insert("cone_residual".into(), json!(residual));
        m.insert("ancilla_residual".into(), json!(ancilla_relation_residual(&c)?));
        let report = removal_perturbation(&c, usize_param(p, "l", Some(3))?)?;
        m.insert("removed".into(), json!(report.removed));
        m.insert("removal_distance_sq".into(), json!(report.spectral_distance_sq));
        m.insert("removal_constant".into(), json!(report.constant));
    }
    Ok(m)
}

fn qac0_learn(p: &Params, seed: u64) -> Result<Metrics> {
    let c = circuit_from_params(p, seed)?;
    let truth = choi_state_with_ancilla(&c)?.state;
    let cfg = Qac0LearnConfig {
        n: c.n(),
        s: c.size(),
        depth: c.depth(),
        ancillas: c.ancillas(),
        eps: f64_param(p, "eps", None)?,
        delta: f64_param(p, "delta", Some(0.1))?,
        c: f64_param(p, "c", Some(8.0))?,
        seed: derive_seed(seed, &[1]),
    };
    let mut access = SimulatedState::new(truth.clone())?;
    let out = learn_qac0_choi::<f64>(&mut access, &cfg)?;
    let mut m = Metrics::new();
    circuit_metrics(&c, &mut m);
    m.insert("k".into(), json!(out.k));
    m.insert("k_clamped".into(), json!(out.clamped));
    m.insert("T".into(), json!(out.learned.copies_used));
    m.insert("frobenius_merit".into(), json!(frobenius_merit(truth.matrix(), &out.learned.matrix, c.n())?));
    m.insert(
        "trace_distance".into(),
        match &out.learned.psd_projected {
            Some(s) => json!(trace_distance(s, &truth)?),
            None => Value::Null,
        },
    );
    Ok(m)
}

fn shadows_bench(p: &Params, seed: u64) -> Result<Metrics> {
    let mut m = Metrics::new();
    ensure!(
        str_opt(p, "shadows")?.is_none() || str_opt(p, "truth")?.is_some(),
        "estimating from a shadow dump needs the true state as truth"
    );
    let rho = match str_opt(p, "truth")? {
        Some(path) => read_state(path)?,
        None => {
            let n = usize_param(p, "n", None)?;
            random_state(n, usize_param(p, "rank", Some(1 << n))?, &mut keyed(seed, &[0]))?
        }
    };
    let n = rho.n();
    let k = usize_param(p, "k", Some(2.min(n)))?;
    let t = usize_param(p, "samples", Some(100_000))?;
    let set = match str_opt(p, "shadows")? {
        Some(path) => {
            let file = std::fs::File::open(path).with_context(|| format!("opening {path}"))?;
            let set = ShadowSet::read_jsonl(std::io::BufReader::new(file)).with_context(|| format!("reading {path}"))?;
            ensure!(set.n() == n, "shadow dump has n = {} but the state has n = {n}", set.n());
            set
        }
        None => collect_shadows(&rho, t, derive_seed(seed, &[1]))?,
    };
    if let Some(path) = str_opt(p, "dump")? {
        let file = std::fs::File::create(path).with_context(|| format!("creating {path}"))?;
        let mut w = std::io::BufWriter::new(file);
        set.write_jsonl(&mut w)?;
        w.flush()?;
    }
    let t = set.len();
    let est = estimate_lowdeg::<f64>(&set, k)?;
    let exact = pauli_expand(rho.matrix())?;
    let errors: Vec<f64> = est.iter().map(|(q, c)| (c - exact.get(q)).abs()).collect();
    let mut moment_dev = 0.0f64;
    for (q, _) in est.iter().filter(|(q, _)| q.weight() > 0) {
        let expected = 3f64.powi(q.weight() as i32) / 4f64.powi(n as i32);
        let got: f64 = single_sample_second_moment(&set, q)?;
        moment_dev = moment_dev.max((got / expected - 1.0).abs());
    }
    m.insert("T".into(), json!(t));
    m.insert("strings".into(), json!(est.len()));
    m.insert("max_abs_error".into(), json!(errors.iter().cloned().fold(0.0, f64::max)));
    m.insert("mean_abs_error".into(), json!(errors.iter().sum::<f64>() / errors.len() as f64));
    m.insert("max_second_moment_deviation".into(), json!(moment_dev));
    m.insert("l2_error".into(), json!(errors.iter().map(|e| e * e).sum::<f64>().sqrt()));
    Ok(m)
}

fn address_distance(p: &Params) -> Result<Metrics> {
    let d = usize_param(p, "d", None)?;
    let f = address_function::<f64>(d)?;
    let k = usize_param(p, "k", None)?;
    let (set, dist) = boolean_distance_to_junta(&f, k)?;
    let bound = ((1usize << d) as f64 - k as f64) / 2f64.powi(d as i32 + 1);
    let mut m = Metrics::new();
    m.insert("variables".into(), json!(f.n()));
    m.insert("degree".into(), json!(degree(&fourier_transform(&f))));
    m.insert("distance".into(), json!(dist));
    m.insert("bound".into(), json!(bound));
    m.insert("best_subset".into(), json!(set));
    Ok(m)
}
