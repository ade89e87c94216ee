use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use junta_cli::{emit_curve, read_records, run_experiment, run_single, write_records, Aggregator, ExperimentSpec, Params, THREADS_ENV};

#[derive(Parser)]
#[command(name = "junta", version, about = "Learn and test junta distributions, junta states and QAC0 Choi states")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Report wall-clock time as `elapsed_ms`; output is then run-dependent.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Learning {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 8.0)]
    c: f64,
    /// Hidden object as a JSON file; a random planted instance otherwise.
    #[arg(long)]
    truth: Option<PathBuf>,
}

/// A circuit from a file or a random one of the given shape.
#[derive(Args)]
struct CircuitArgs {
    #[arg(long)]
    circuit: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    a: usize,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long, default_value_t = 3)]
    max_arity: usize,
    #[arg(long, default_value_t = 0.5)]
    toffoli_rate: f64,
    /// Prepare ancillas and output in a random mixed state instead of |0…0⟩.
    #[arg(long)]
    random_sigma: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a k-junta distribution from samples.
    LearnDist {
        #[command(flatten)]
        learning: Learning,
        /// Override the sample count.
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Learn a k-junta state from Pauli-basis measurements.
    LearnState {
        #[command(flatten)]
        learning: Learning,
        #[command(flatten)]
        common: Common,
    },
    /// Test whether a state is a k-junta.
    TestState {
        #[command(flatten)]
        learning: Learning,
        #[arg(long, default_value = "frobenius", value_parser = ["frobenius", "oracle"])]
        certifier: String,
        /// Planted instance when no truth file is given.
        #[arg(long, default_value = "close", value_parser = ["close", "far"])]
        instance: String,
        #[command(flatten)]
        common: Common,
    },
    /// QAC0 circuits and their Choi states.
    #[command(subcommand)]
    Qac0(Qac0Command),
    /// Classical-shadow estimation.
    #[command(subcommand)]
    Shadows(ShadowsCommand),
    /// The address function.
    #[command(subcommand)]
    Address(AddressCommand),
    /// Run an experiment grid from a JSON spec; writes JSON lines.
    Run {
        spec: PathBuf,
        /// Overrides the spec's output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the spec's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Aggregate JSON-lines records into a CSV curve.
    Curve {
        records: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// `mean` or `q<fraction>`, e.g. `q0.9`.
        #[arg(long, default_value = "mean")]
        agg: Aggregator,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Qac0Command {
    /// Print the Choi state.
    Choi {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long, default_value = "ancilla", value_parser = ["ancilla", "full"])]
        kind: String,
        #[command(flatten)]
        common: Common,
    },
    /// Light cone, concentration, ancilla relation and Toffoli removal.
    Analyze {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Toffolis touching at least this many qubits are removed.
        #[arg(long, default_value_t = 3)]
        l: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Learn the Choi state from copies.
    Learn {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 8.0)]
        c: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum ShadowsCommand {
    /// Estimation error of all low-weight coefficients.
    Bench {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Write the measurement record as JSON lines.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Estimate from a previous dump instead of measuring (needs --truth).
        #[arg(long)]
        shadows: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum AddressCommand {
    /// Exact distance to the nearest k-junta.
    Distance {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Parameter map without the unset entries.
fn params(entries: Vec<(&str, Option<Value>)>) -> Params {
    entries
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect()
}

fn path_value(p: &Option<PathBuf>) -> Option<Value> {
    p.as_ref().map(|p| Value::from(p.to_string_lossy().into_owned()))
}

fn learning_params(l: &Learning) -> Vec<(&'static str, Option<Value>)> {
    vec![
        ("n", l.n.map(Value::from)),
        ("k", Some(l.k.into())),
        ("eps", Some(l.eps.into())),
        ("delta", Some(l.delta.into())),
        ("c", Some(l.c.into())),
        ("truth", path_value(&l.truth)),
    ]
}

fn circuit_params(c: &CircuitArgs) -> Vec<(&'static str, Option<Value>)> {
    vec![
        ("circuit", path_value(&c.circuit)),
        ("n", c.n.map(Value::from)),
        ("a", Some(c.a.into())),
        ("depth", Some(c.depth.into())),
        ("max_arity", Some(c.max_arity.into())),
        ("toffoli_rate", Some(c.toffoli_rate.into())),
        ("random_sigma", Some(c.random_sigma.into())),
    ]
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Runs one command and prints its metrics as a JSON object.
fn single(command: &str, p: Params, common: &Common, timing: bool) -> Result<ExitCode> {
    let record = run_single(command, &p, common.seed, 0, 0, timing);
    if let Some(e) = &record.error {
        eprintln!("error: {e}");
        return Ok(ExitCode::from(1));
    }
    let mut text = serde_json::to_string(&record.metrics)?;
    text.push('\n');
    write_output(common.out.as_ref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let timing = cli.timing;
    match cli.command {
        Command::LearnDist { learning, samples, common } => {
            let mut p = learning_params(&learning);
            p.push(("samples", samples.map(Value::from)));
            single("learn-dist", params(p), &common, timing)
        }
        Command::LearnState { learning, common } => single("learn-state", params(learning_params(&learning)), &common, timing),
        Command::TestState {
            learning,
            certifier,
            instance,
            common,
        } => {
            let mut p = learning_params(&learning);
            p.push(("certifier", Some(certifier.into())));
            p.push(("instance", Some(instance.into())));
            single("test-state", params(p), &common, timing)
        }
        Command::Qac0(Qac0Command::Choi { circuit, kind, common }) => {
            let mut p = circuit_params(&circuit);
            p.push(("kind", Some(kind.into())));
            single("qac0-choi", params(p), &common, timing)
        }
        Command::Qac0(Qac0Command::Analyze { circuit, l, eps, common }) => {
            let mut p = circuit_params(&circuit);
            p.push(("l", Some(l.into())));
            p.push(("eps", Some(eps.into())));
            single("qac0-analyze", params(p), &common, timing)
        }
        Command::Qac0(Qac0Command::Learn {
            circuit,
            eps,
            delta,
            c,
            common,
        }) => {
            let mut p = circuit_params(&circuit);
            p.push(("eps", Some(eps.into())));
            p.push(("delta", Some(delta.into())));
            p.push(("c", Some(c.into())));
            single("qac0-learn", params(p), &common, timing)
        }
        Command::Shadows(ShadowsCommand::Bench {
            n,
            k,
            samples,
            truth,
            dump,
            shadows,
            common,
        }) => {
            let p = params(vec![
                ("n", n.map(Value::from)),
                ("k", k.map(Value::from)),
                ("samples", Some(samples.into())),
                ("truth", path_value(&truth)),
                ("dump", path_value(&dump)),
                ("shadows", path_value(&shadows)),
            ]);
            single("shadows-bench", p, &common, timing)
        }
        Command::Address(AddressCommand::Distance { d, k, common }) => {
            let p = params(vec![("d", Some(d.into())), ("k", Some(k.into()))]);
            single("address-distance", p, &common, timing)
        }
        Command::Run { spec, out, seed } => {
            let loaded = fs::read_to_string(&spec)
                .with_context(|| format!("reading {}", spec.display()))
                .and_then(|text| serde_json::from_str::<ExperimentSpec>(&text).context("parsing the experiment spec"));
            let mut spec = match loaded {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return Ok(ExitCode::from(1));
                }
            };
            spec.timing |= timing;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let records = match run_experiment(&spec) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return Ok(ExitCode::from(1));
                }
            };
            let mut buf = Vec::new();
            write_records(&records, &mut buf)?;
            write_output(out.as_ref().or(spec.out.as_ref()), &String::from_utf8(buf)?)?;
            let failed = records.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                eprintln!("{failed} of {} records failed", records.len());
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Curve { records, x, y, agg, out } => {
            let text = fs::read_to_string(&records).with_context(|| format!("reading {}", records.display()))?;
            let csv = emit_curve(&read_records(&text)?, &x, &y, agg)?;
            write_output(out.as_ref(), &csv)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
