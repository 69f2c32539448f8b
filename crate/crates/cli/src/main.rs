// Copyright 2026 The qpoisson Developers
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except
// in compliance with the License. You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under
// the License.

//! Command-line front end: parse and normalize circuit files, simulate them,
//! run the built-in Poisson solver demonstrations, sweep noise intensities,
//! and report circuit metrics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use qpoisson::analysis::{
    circuit_metrics, run_sweep_circuit, SweepCircuit, SweepConfig, SweepMode,
};
use qpoisson::gates::{Circuit, GateKind};
use qpoisson::noise::ChannelName;
use qpoisson::poisson::{solve_ideal, PoissonInstance};
use qpoisson::qasm;
use qpoisson::sim;
use qpoisson::state::StateVector;

#[derive(Parser)]
#[command(
    name = "qpoisson",
    about = "Quantum 1D-Poisson solver circuits: simulation, noise sweeps, metrics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a circuit file and print its normalized form.
    Parse { file: PathBuf },
    /// Run a circuit (file or builtin `n2`/`n3`) on |0...0> and print the
    /// outcome distribution of its measured bits.
    Simulate {
        /// Path to a circuit file, or a builtin listing name.
        source: String,
        /// Sample this many shots instead of printing exact probabilities.
        #[arg(long)]
        shots: Option<u64>,
        /// Seed for shot sampling.
        #[arg(long, default_value_t = 2023)]
        seed: u64,
    },
    /// Solve a Poisson instance and compare against the classical oracle.
    Solve {
        /// Instance size (builtin right-hand sides exist for 2 and 3).
        #[arg(long)]
        n: Option<usize>,
        /// JSON instance file: {"n": 2, "b": [0.7, 0.5, 0.5]}.
        #[arg(long)]
        b_file: Option<PathBuf>,
    },
    /// Sweep noise intensities over the solver circuit and write CSV/JSON.
    Sweep {
        #[arg(long)]
        n: usize,
        /// Channel: ad, pd, bf, dp, composite, or all four.
        #[arg(long, default_value = "all")]
        noise: NoiseArg,
        #[arg(long, default_value_t = 1)]
        i_min: u32,
        #[arg(long, default_value_t = 9)]
        i_max: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Trials averaged per cell in sampled mode.
        #[arg(long, default_value_t = 3)]
        trials: u32,
        #[arg(long, default_value_t = 16384)]
        shots: u64,
        #[arg(long, default_value_t = 2023)]
        seed: u64,
        /// Sweep the built solver or the bundled reference listing.
        #[arg(long, value_enum, default_value_t = CircuitArg::Builder)]
        circuit: CircuitArg,
        /// Output directory (default: $QPOISSON_OUT_DIR or the working directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Deviation target for the threshold summary.
        #[arg(long, default_value_t = 0.10)]
        target: f64,
    },
    /// Print gate counts and depth of a circuit (file or builtin `n2`/`n3`).
    Metrics { source: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum CircuitArg {
    Builder,
    Listing,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Ad,
    Pd,
    Bf,
    Dp,
    Composite,
    All,
}

impl NoiseArg {
    fn channels(self) -> Vec<ChannelName> {
        match self {
            NoiseArg::Ad => vec![ChannelName::AmplitudeDamping],
            NoiseArg::Pd => vec![ChannelName::PhaseDamping],
            NoiseArg::Bf => vec![ChannelName::BitFlip],
            NoiseArg::Dp => vec![ChannelName::Depolarizing],
            NoiseArg::Composite => vec![ChannelName::Composite],
            NoiseArg::All => vec![
                ChannelName::AmplitudeDamping,
                ChannelName::PhaseDamping,
                ChannelName::BitFlip,
                ChannelName::Depolarizing,
            ],
        }
    }
}

fn main() {
    // Die quietly when a downstream pipe closes instead of panicking.
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Parse { file } => cmd_parse(&file),
        Command::Simulate {
            source,
            shots,
            seed,
        } => cmd_simulate(&source, shots, seed),
        Command::Solve { n, b_file } => cmd_solve(n, b_file.as_deref()),
        Command::Sweep {
            n,
            noise,
            i_min,
            i_max,
            mode,
            trials,
            shots,
            seed,
            circuit,
            out,
            target,
        } => cmd_sweep(
            n, noise, i_min, i_max, mode, trials, shots, seed, circuit, out, target,
        ),
        Command::Metrics { source } => cmd_metrics(&source),
    }
}

fn load_source(source: &str) -> Result<String> {
    let path = Path::new(source);
    if path.exists() {
        return std::fs::read_to_string(path)
            .with_context(|| format!("reading `{source}`"));
    }
    if let Some(text) = qpoisson::builtin_listing(source) {
        return Ok(text.to_string());
    }
    bail!("`{source}` is neither a file nor a builtin circuit (try `n2` or `n3`)")
}

fn load_circuit(source: &str) -> Result<Circuit> {
    let text = load_source(source)?;
    qasm::parse(&text).map_err(|e| anyhow::anyhow!("parse: {e}"))
}

fn cmd_parse(file: &Path) -> Result<()> {
    let text = std::fs::read_to_string(file)
        .with_context(|| format!("reading `{}`", file.display()))?;
    let circuit = qasm::parse(&text).map_err(|e| anyhow::anyhow!("parse: {e}"))?;
    print!("{}", qasm::serialize(&circuit));
    Ok(())
}

/// Map a full-register basis index to the measured classical bitstring.
fn clbit_string(index: usize, measures: &[(usize, usize)], num_clbits: usize) -> String {
    let mut bits = vec!['0'; num_clbits];
    for &(qubit, clbit) in measures {
        if index >> qubit & 1 == 1 {
            bits[num_clbits - 1 - clbit] = '1';
        }
    }
    bits.into_iter().collect()
}

fn cmd_simulate(source: &str, shots: Option<u64>, seed: u64) -> Result<()> {
    let circuit = load_circuit(source)?;
    let state = sim::run_ideal(&circuit, StateVector::zero(circuit.num_qubits))
        .map_err(|e| anyhow::anyhow!("simulate: {e}"))?;

    let measures: Vec<(usize, usize)> = circuit
        .ops()
        .iter()
        .filter(|op| op.kind == GateKind::Measure)
        .map(|op| (op.qubits[0], op.clbit.expect("measure has a classical bit")))
        .collect();

    let render = |index: usize| -> String {
        if measures.is_empty() {
            sim::bitstring(index, circuit.num_qubits)
        } else {
            clbit_string(index, &measures, circuit.num_clbits)
        }
    };

    let mut table: BTreeMap<String, f64> = BTreeMap::new();
    match shots {
        None => {
            for (index, p) in state.probabilities().into_iter().enumerate() {
                if p > 1e-12 {
                    *table.entry(render(index)).or_insert(0.0) += p;
                }
            }
            println!("outcome probability (exact)");
        }
        Some(shots) => {
            let hist = sim::sample_statevector(&state, shots, seed)
                .map_err(|e| anyhow::anyhow!("sample: {e}"))?;
            for (&index, &count) in hist.counts() {
                *table.entry(render(index)).or_insert(0.0) += count as f64 / shots as f64;
            }
            println!("outcome frequency ({shots} shots, seed {seed})");
        }
    }
    for (bits, p) in table {
        println!("{bits} {p:.6}");
    }
    Ok(())
}

fn load_instance(n: Option<usize>, b_file: Option<&Path>) -> Result<PoissonInstance> {
    match b_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading `{}`", path.display()))?;
            let raw: PoissonInstance =
                serde_json::from_str(&text).context("parsing instance file")?;
            let instance = PoissonInstance::new(raw.n, raw.b).context("validating instance")?;
            if let Some(n) = n {
                if n != instance.n {
                    bail!("--n {n} conflicts with instance file n={}", instance.n);
                }
            }
            Ok(instance)
        }
        None => {
            let n = n.context("pass --n or --b-file")?;
            PoissonInstance::builtin(n).with_context(|| {
                format!("no builtin right-hand side for n={n}; supply --b-file")
            })
        }
    }
}

fn cmd_solve(n: Option<usize>, b_file: Option<&Path>) -> Result<()> {
    let instance = load_instance(n, b_file)?;
    let start = std::time::Instant::now();
    let result = solve_ideal(&instance).map_err(|e| anyhow::anyhow!("solve: {e}"))?;
    let elapsed = start.elapsed();

    println!("n = {} ({} interior points)", instance.n, instance.b.len());
    println!("basis  P(basis,flag=1)  oracle 64*v^2   |v| estimate    |v| oracle");
    for (j, (est, oracle)) in result
        .solution_estimate
        .iter()
        .zip(&result.oracle_solution)
        .enumerate()
    {
        let basis = sim::bitstring(j + 1, instance.n);
        let p = result.post_selected_probs[&(j + 1)];
        println!(
            "{basis}  {p:>15.6}  {:>13.6}  {est:>13.6}  {:>12.6}",
            64.0 * oracle * oracle,
            oracle.abs()
        );
    }
    println!("success probability: {:.6}", result.success_probability);
    let worst = result
        .solution_estimate
        .iter()
        .zip(&result.oracle_solution)
        .map(|(est, oracle)| (est - oracle.abs()).abs())
        .fold(0.0f64, f64::max);
    println!("max |estimate - oracle|: {worst:.3e}");
    println!("elapsed: {elapsed:.2?}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    n: usize,
    noise: NoiseArg,
    i_min: u32,
    i_max: u32,
    mode: ModeArg,
    trials: u32,
    shots: u64,
    seed: u64,
    circuit: CircuitArg,
    out: Option<PathBuf>,
    target: f64,
) -> Result<()> {
    let config = SweepConfig {
        n,
        noise_types: noise.channels(),
        i_min,
        i_max,
        mode: match mode {
            ModeArg::Exact => SweepMode::Exact,
            ModeArg::Sampled => SweepMode::Sampled,
        },
        trials,
        shots,
        seed,
    };
    let target_circuit = match circuit {
        CircuitArg::Builder => SweepCircuit::from_instance(
            &PoissonInstance::builtin(n)
                .with_context(|| format!("no builtin instance for n={n}"))?,
        )
        .map_err(|e| anyhow::anyhow!("build: {e}"))?,
        CircuitArg::Listing => SweepCircuit::from_listing(n)
            .with_context(|| format!("no bundled listing for n={n}"))?,
    };
    let report = run_sweep_circuit(&config, &target_circuit)
        .map_err(|e| anyhow::anyhow!("sweep: {e}"))?;

    let out_dir = out
        .or_else(|| std::env::var_os("QPOISSON_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating `{}`", out_dir.display()))?;
    let csv_path = out_dir.join("deviation.csv");
    let json_path = out_dir.join("summary.json");
    std::fs::write(&csv_path, report.to_csv())
        .with_context(|| format!("writing `{}`", csv_path.display()))?;
    let summary = report.summary_json(target);
    std::fs::write(&json_path, format!("{:#}\n", summary))
        .with_context(|| format!("writing `{}`", json_path.display()))?;

    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    for row in &report.rows {
        println!(
            "{} i={} p={:.4e} Dbar={:.4}",
            row.noise.code(),
            row.i,
            row.p,
            row.dbar
        );
    }
    if let Some((name, p)) = report.worst_threshold(target) {
        println!("worst-channel threshold at Dbar={target}: {} p={p:.3e}", name.code());
    }
    Ok(())
}

fn cmd_metrics(source: &str) -> Result<()> {
    let circuit = load_circuit(source)?;
    let m = circuit_metrics(&circuit);
    println!("qubits: {}", circuit.num_qubits);
    println!("classical bits: {}", circuit.num_clbits);
    println!("one/two-qubit gates: {}", m.one_two_qubit_gate_count);
    println!("toffoli gates: {}", m.ccx_count);
    println!("decomposed basic gates: {}", m.decomposed_basic_gate_count);
    println!("measurements: {}", m.measure_count);
    println!("depth: {}", m.depth);
    Ok(())
}
