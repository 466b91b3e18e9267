//! Command-line front end: validate PMD parameters, build classical and
//! quantum models, simulate, bound classical competitors, sweep the
//! published parameter grids, and compile quantum-walk programs.
//!
//! Every command accepts `--seed`, `--output`, `--format json|csv`, and
//! `--config`. A config file is a flat `key = value` list mirroring the
//! long flag names; command-line flags take precedence, and the
//! `PMDSIM_SEED` environment variable is the fallback seed source.
//! Identical invocations with identical seeds produce byte-identical
//! output.
//!
//! Exit codes: 0 success, 2 parameter validation failure, 3 solver or
//! compiler failure.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pmdsim::bound::{classical_bound, BoundError};
use pmdsim::metrics::CountTable;
use pmdsim::process::{
    string_to_word, word_to_string, EpsilonMachine, EpsilonMachineJson, PmdParams, ProcessError,
};
use pmdsim::quantum::{mat2_to_pairs, NoiseSpec, QuantumError, QuantumModel, QuantumModelJson};
use pmdsim::sweep::{
    decay_sweep_triples, default_sweep_triples, derive_seed, period_sweep_triples, run_sweep,
    run_tomo, sweep_csv, PmdTriple, RunRow, SweepSpec, TomoReport,
};
use pmdsim::walk::{compile_walk, program_waveplates, verify_walk, WalkError, WalkProgramJson};
use rand::rngs::StdRng;
use rand::SeedableRng;

#[derive(Parser)]
#[command(
    name = "pmdsim",
    about = "Quantum models of periodically-modulated-decay renewal processes",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalOpts {
    /// Seed for all randomness (fallback: config `seed`, then PMDSIM_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write output to this path instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    /// Flat key=value config file mirroring the long flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Validate parameters and summarise both models.
    Info(ParamArgs),
    /// Solve and dump the quantum model (schema qm-v1).
    Model(ParamArgs),
    /// Exact conditional word distributions, classical and quantum.
    Exact {
        #[command(flatten)]
        params: ParamArgs,
        /// Word length.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Sample trajectories from the quantum model.
    Sample {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        horizon: Option<usize>,
        /// Initial memory state (default: all states).
        #[arg(long)]
        state: Option<usize>,
        #[arg(long)]
        shots: Option<u64>,
        /// Depolarizing probability per timestep.
        #[arg(long)]
        noise_p: Option<f64>,
    },
    /// Lower bound on the distortion of k-state classical models.
    Bound {
        #[command(flatten)]
        params: ParamArgs,
        /// Memory states allowed to the classical model.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Sweep a parameter grid and report distortions and bounds.
    Sweep {
        /// Which grid to run.
        #[arg(long, value_enum)]
        grid: Option<GridChoice>,
        /// Custom grid: comma-separated period list.
        #[arg(long)]
        n_list: Option<String>,
        /// Custom grid: decay-factor range start.
        #[arg(long)]
        gamma_from: Option<f64>,
        /// Custom grid: decay-factor range end (inclusive).
        #[arg(long)]
        gamma_to: Option<f64>,
        /// Custom grid: decay-factor step.
        #[arg(long)]
        gamma_step: Option<f64>,
        /// Custom grid: modulation strength.
        #[arg(long)]
        v: Option<f64>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        noise_p: Option<f64>,
        /// Memory states allowed to the classical competitor.
        #[arg(long)]
        bound_k: Option<usize>,
    },
    /// Final-memory-state integrity per initial state and outcome.
    Tomo {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        noise_p: Option<f64>,
    },
    /// Compile, verify, and decompose the quantum-walk program.
    Walk(ParamArgs),
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    /// Base decay factor in (0, 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Modulation strength in [0, 1).
    #[arg(long)]
    v: Option<f64>,
    /// Period (number of causal states).
    #[arg(long)]
    n: Option<u32>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum GridChoice {
    /// Periods 3..=8 at gamma 0.5, v 0.4.
    Period,
    /// Periods 3..=5, gamma 0.45..=0.64 step 0.01, v 0.4.
    Decay,
    /// Both default grids.
    All,
    /// Grid from --n-list / --gamma-from / --gamma-to / --gamma-step / --v.
    Custom,
}

enum AppError {
    Validation(String),
    Solver(String),
    Io(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Validation(_) => 2,
            AppError::Solver(_) => 3,
            AppError::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Validation(m) | AppError::Solver(m) | AppError::Io(m) => m,
        }
    }
}

impl From<ProcessError> for AppError {
    fn from(e: ProcessError) -> Self {
        match e {
            ProcessError::Singular => AppError::Solver(e.to_string()),
            _ => AppError::Validation(e.to_string()),
        }
    }
}

impl From<QuantumError> for AppError {
    fn from(e: QuantumError) -> Self {
        match e {
            QuantumError::Horizon { .. } | QuantumError::InvalidNoise(_) => {
                AppError::Validation(e.to_string())
            }
            _ => AppError::Solver(e.to_string()),
        }
    }
}

impl From<BoundError> for AppError {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::InvalidK { .. } => AppError::Validation(e.to_string()),
            BoundError::Process(p) => p.into(),
            BoundError::EmptyBlock { .. } => AppError::Solver(e.to_string()),
        }
    }
}

impl From<WalkError> for AppError {
    fn from(e: WalkError) -> Self {
        match e {
            WalkError::NonUnitaryInput { .. } | WalkError::Horizon { .. } => {
                AppError::Validation(e.to_string())
            }
            _ => AppError::Solver(e.to_string()),
        }
    }
}

/// Flat key=value file; lines starting with '#' are comments.
struct Config(HashMap<String, String>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Self, AppError> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                AppError::Io(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    AppError::Validation(format!(
                        "config line {} is not `key = value`: {line}",
                        lineno + 1
                    ))
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Config(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, AppError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                AppError::Validation(format!("config key `{key}` has invalid value `{raw}`"))
            }),
        }
    }
}

/// Flag, then config, then a default.
fn resolve<T: FromStr + Copy>(
    flag: Option<T>,
    config: &Config,
    key: &str,
    default: T,
) -> Result<T, AppError> {
    Ok(flag.or(config.get(key)?).unwrap_or(default))
}

fn resolve_seed(flag: Option<u64>, config: &Config) -> Result<u64, AppError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = config.get("seed")? {
        return Ok(s);
    }
    match std::env::var("PMDSIM_SEED") {
        Ok(raw) => raw
            .parse()
            .map_err(|_| AppError::Validation(format!("PMDSIM_SEED has invalid value `{raw}`"))),
        Err(_) => Ok(0),
    }
}

fn resolve_params(args: &ParamArgs, config: &Config) -> Result<PmdParams, AppError> {
    let gamma = resolve(args.gamma, config, "gamma", 0.5)?;
    let v = resolve(args.v, config, "v", 0.4)?;
    let n = resolve(args.n, config, "n", 4)?;
    Ok(PmdParams::new(gamma, v, n)?)
}

fn emit(output: Option<&Path>, content: &str) -> Result<(), AppError> {
    match output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| AppError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(content.as_bytes())
            .map_err(|e| AppError::Io(format!("cannot write stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    let config = Config::load(cli.global.config.as_deref())?;
    let seed = resolve_seed(cli.global.seed, &config)?;
    let format = match (cli.global.format, config.0.get("format").map(String::as_str)) {
        (Some(f), _) => f,
        (None, Some("csv")) => OutFormat::Csv,
        (None, Some("json")) | (None, None) => OutFormat::Json,
        (None, Some(other)) => {
            return Err(AppError::Validation(format!(
                "config key `format` has invalid value `{other}`"
            )))
        }
    };
    let output = cli
        .global
        .output
        .clone()
        .or_else(|| config.0.get("output").map(PathBuf::from));
    let output = output.as_deref();

    match &cli.command {
        Command::Info(params) => {
            let pmd = resolve_params(params, &config)?;
            cmd_info(&pmd, format, output)
        }
        Command::Model(params) => {
            let pmd = resolve_params(params, &config)?;
            cmd_model(&pmd, format, output)
        }
        Command::Exact { params, horizon } => {
            let pmd = resolve_params(params, &config)?;
            let horizon = resolve(*horizon, &config, "horizon", 2)?;
            cmd_exact(&pmd, horizon, format, output)
        }
        Command::Sample {
            params,
            horizon,
            state,
            shots,
            noise_p,
        } => {
            let pmd = resolve_params(params, &config)?;
            let horizon = resolve(*horizon, &config, "horizon", 2)?;
            let shots = resolve(*shots, &config, "shots", 1)?;
            let noise_p = resolve(*noise_p, &config, "noise-p", 0.0)?;
            let state = match state {
                Some(s) => Some(*s),
                None => config.get("state")?,
            };
            cmd_sample(&pmd, horizon, state, shots, noise_p, seed, format, output)
        }
        Command::Bound { params, k, horizon } => {
            let pmd = resolve_params(params, &config)?;
            let k = resolve(*k, &config, "k", 2)?;
            let horizon = resolve(*horizon, &config, "horizon", 2)?;
            cmd_bound(&pmd, k, horizon, format, output)
        }
        Command::Sweep {
            grid,
            n_list,
            gamma_from,
            gamma_to,
            gamma_step,
            v,
            horizon,
            shots,
            noise_p,
            bound_k,
        } => {
            let grid = grid.unwrap_or(GridChoice::All);
            let triples = match grid {
                GridChoice::Period => period_sweep_triples(),
                GridChoice::Decay => decay_sweep_triples(),
                GridChoice::All => default_sweep_triples(),
                GridChoice::Custom => custom_triples(
                    n_list
                        .as_deref()
                        .or(config.0.get("n-list").map(String::as_str)),
                    resolve(*gamma_from, &config, "gamma-from", 0.45)?,
                    resolve(*gamma_to, &config, "gamma-to", 0.64)?,
                    resolve(*gamma_step, &config, "gamma-step", 0.01)?,
                    resolve(*v, &config, "v", 0.4)?,
                )?,
            };
            let spec = SweepSpec {
                triples,
                horizon: resolve(*horizon, &config, "horizon", 2)?,
                shots: resolve(*shots, &config, "shots", 1_000_000)?,
                noise_p: resolve(*noise_p, &config, "noise-p", 0.0)?,
                seed,
                bound_k: resolve(*bound_k, &config, "bound-k", 2)?,
            };
            cmd_sweep(&spec, format, output)
        }
        Command::Tomo {
            params,
            horizon,
            noise_p,
        } => {
            let gamma = resolve(params.gamma, &config, "gamma", 0.49)?;
            let v = resolve(params.v, &config, "v", 0.4)?;
            let n = resolve(params.n, &config, "n", 4)?;
            let pmd = PmdParams::new(gamma, v, n)?;
            let horizon = resolve(*horizon, &config, "horizon", 2)?;
            let noise_p = resolve(*noise_p, &config, "noise-p", 0.0)?;
            cmd_tomo(&pmd, horizon, noise_p, format, output)
        }
        Command::Walk(params) => {
            let pmd = resolve_params(params, &config)?;
            cmd_walk(&pmd, format, output)
        }
    }
}

fn custom_triples(
    n_list: Option<&str>,
    gamma_from: f64,
    gamma_to: f64,
    gamma_step: f64,
    v: f64,
) -> Result<Vec<PmdTriple>, AppError> {
    let n_list = n_list.unwrap_or("3,4,5");
    let periods: Vec<u32> = n_list
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| AppError::Validation(format!("bad period `{s}` in --n-list")))
        })
        .collect::<Result<_, _>>()?;
    if gamma_step <= 0.0 || gamma_to < gamma_from {
        return Err(AppError::Validation(
            "gamma range must satisfy from <= to with positive step".into(),
        ));
    }
    let mut out = Vec::new();
    for &n in &periods {
        let mut i = 0u32;
        loop {
            let gamma = gamma_from + gamma_step * i as f64;
            if gamma > gamma_to + 1e-12 {
                break;
            }
            out.push(PmdTriple {
                n_period: n,
                gamma,
                v,
            });
            i += 1;
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct InfoReport {
    schema: &'static str,
    kind: &'static str,
    n_period: u32,
    gamma: f64,
    v: f64,
    theta: f64,
    d_mu: f64,
    d_q: f64,
    /// phi(0)..phi(4 n_period).
    survival: Vec<f64>,
    machine: EpsilonMachineJson,
}

fn cmd_info(pmd: &PmdParams, format: OutFormat, output: Option<&Path>) -> Result<(), AppError> {
    let machine = EpsilonMachine::new(pmd)?;
    let model = QuantumModel::from_pmd(pmd)?;
    let survival: Vec<f64> = (0..=4 * pmd.n_period()).map(|n| pmd.survival(n)).collect();
    let report = InfoReport {
        schema: "report-v1",
        kind: "info",
        n_period: pmd.n_period(),
        gamma: pmd.gamma(),
        v: pmd.v(),
        theta: pmd.theta(),
        d_mu: machine.memory_cost_bits(),
        d_q: model.memory_cost(),
        survival,
        machine: EpsilonMachineJson::from(&machine),
    };
    match format {
        OutFormat::Json => emit(output, &to_json(&report)),
        OutFormat::Csv => {
            let mut csv = String::from("field,value\n");
            csv.push_str(&format!("n_period,{}\n", report.n_period));
            csv.push_str(&format!("gamma,{}\n", report.gamma));
            csv.push_str(&format!("v,{}\n", report.v));
            csv.push_str(&format!("theta,{}\n", report.theta));
            csv.push_str(&format!("d_mu,{}\n", report.d_mu));
            csv.push_str(&format!("d_q,{}\n", report.d_q));
            for (n, phi) in report.survival.iter().enumerate() {
                csv.push_str(&format!("survival_{n},{phi}\n"));
            }
            emit(output, &csv)
        }
    }
}

fn cmd_model(pmd: &PmdParams, format: OutFormat, output: Option<&Path>) -> Result<(), AppError> {
    let model = QuantumModel::from_pmd(pmd)?;
    let json = QuantumModelJson::from(&model);
    match format {
        OutFormat::Json => emit(output, &to_json(&json)),
        OutFormat::Csv => {
            let mut csv = String::from("field,value\n");
            csv.push_str(&format!("n_states,{}\n", json.n_states));
            csv.push_str(&format!("gamma,{}\n", json.gamma));
            csv.push_str(&format!("v,{}\n", json.v));
            csv.push_str(&format!("eta,{}\n", json.params.eta));
            csv.push_str(&format!("alpha,{}\n", json.params.alpha));
            csv.push_str(&format!("phi,{}\n", json.params.phi));
            csv.push_str(&format!("beta0,{}\n", json.params.beta0));
            csv.push_str(&format!("beta1,{}\n", json.params.beta1));
            csv.push_str(&format!("xi1,{}\n", json.params.xi1));
            csv.push_str(&format!("zeta,{}\n", json.params.zeta));
            csv.push_str(&format!(
                "completeness_residual,{}\n",
                json.completeness_residual
            ));
            for (label, m) in [("kraus0", &json.kraus0), ("kraus1", &json.kraus1)] {
                for (i, pair) in m.iter().enumerate() {
                    let row = i / 2;
                    let col = i % 2;
                    csv.push_str(&format!("{label}_{row}{col}_re,{}\n", pair[0]));
                    csv.push_str(&format!("{label}_{row}{col}_im,{}\n", pair[1]));
                }
            }
            emit(output, &csv)
        }
    }
}

#[derive(Serialize)]
struct ExactReport {
    schema: &'static str,
    kind: &'static str,
    n_period: u32,
    gamma: f64,
    v: f64,
    horizon: usize,
    words: Vec<String>,
    classical: Vec<Vec<f64>>,
    quantum: Vec<Vec<f64>>,
    max_abs_diff: f64,
}

fn cmd_exact(
    pmd: &PmdParams,
    horizon: usize,
    format: OutFormat,
    output: Option<&Path>,
) -> Result<(), AppError> {
    let machine = EpsilonMachine::new(pmd)?;
    let model = QuantumModel::from_pmd(pmd)?;
    let classical = machine.exact_distribution(horizon)?;
    let quantum = model.exact_distribution(horizon)?;
    let report = ExactReport {
        schema: "report-v1",
        kind: "exact",
        n_period: pmd.n_period(),
        gamma: pmd.gamma(),
        v: pmd.v(),
        horizon,
        words: (0..1usize << horizon)
            .map(|w| word_to_string(w, horizon))
            .collect(),
        classical: classical.rows().to_vec(),
        quantum: quantum.rows().to_vec(),
        max_abs_diff: classical.max_abs_diff(&quantum),
    };
    match format {
        OutFormat::Json => emit(output, &to_json(&report)),
        OutFormat::Csv => {
            let mut csv = String::from("initial_state,word,classical,quantum,abs_diff\n");
            for j in 0..report.classical.len() {
                for (w, word) in report.words.iter().enumerate() {
                    let c = report.classical[j][w];
                    let q = report.quantum[j][w];
                    csv.push_str(&format!("{j},{word},{c},{q},{}\n", (c - q).abs()));
                }
            }
            emit(output, &csv)
        }
    }
}

#[derive(Serialize)]
struct SampleTrajectory {
    initial_state: usize,
    word: String,
    /// Final memory density matrix, row-major `[re, im]` pairs.
    final_rho: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct SampleStateBlock {
    initial_state: usize,
    counts: Vec<u64>,
    empirical: Vec<f64>,
    empirical_smoothed: Vec<f64>,
}

#[derive(Serialize)]
struct SampleReport {
    schema: &'static str,
    kind: &'static str,
    n_period: u32,
    gamma: f64,
    v: f64,
    horizon: usize,
    shots: u64,
    noise_p: f64,
    seed: u64,
    words: Vec<String>,
    states: Vec<SampleStateBlock>,
    /// Individual trajectories, included for small shot counts.
    trajectories: Vec<SampleTrajectory>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    pmd: &PmdParams,
    horizon: usize,
    state: Option<usize>,
    shots: u64,
    noise_p: f64,
    seed: u64,
    format: OutFormat,
    output: Option<&Path>,
) -> Result<(), AppError> {
    let model = QuantumModel::from_pmd(pmd)?;
    let noise = NoiseSpec::depolarizing(noise_p)?;
    let states: Vec<usize> = match state {
        Some(j) if j < model.n_states() => vec![j],
        Some(j) => {
            return Err(AppError::Validation(format!(
                "state {j} out of range 0..{}",
                model.n_states()
            )))
        }
        None => (0..model.n_states()).collect(),
    };
    if !(1..=pmdsim::process::MAX_HORIZON).contains(&horizon) {
        return Err(QuantumError::Horizon {
            horizon,
            max: pmdsim::process::MAX_HORIZON,
        }
        .into());
    }
    let mut blocks = Vec::new();
    let mut trajectories = Vec::new();
    for (i, &j) in states.iter().enumerate() {
        let mut rng = StdRng::seed_from_u64(derive_seed(seed, i as u64));
        let mut counts = vec![0u64; 1usize << horizon];
        for _ in 0..shots {
            let (word, rho) = model.sample_with(j, horizon, noise, &mut rng);
            let idx = string_to_word(&word).expect("sampler emits binary");
            counts[idx] += 1;
            if shots <= 32 {
                trajectories.push(SampleTrajectory {
                    initial_state: j,
                    word,
                    final_rho: mat2_to_pairs(&rho),
                });
            }
        }
        let table =
            CountTable::new(horizon, shots, vec![counts.clone()]).expect("counts sum to shots");
        blocks.push(SampleStateBlock {
            initial_state: j,
            counts,
            empirical: table.empirical(0.0).row(0).to_vec(),
            empirical_smoothed: table.empirical(0.5).row(0).to_vec(),
        });
    }
    let report = SampleReport {
        schema: "report-v1",
        kind: "sample",
        n_period: pmd.n_period(),
        gamma: pmd.gamma(),
        v: pmd.v(),
        horizon,
        shots,
        noise_p,
        seed,
        words: (0..1usize << horizon)
            .map(|w| word_to_string(w, horizon))
            .collect(),
        states: blocks,
        trajectories,
    };
    match format {
        OutFormat::Json => emit(output, &to_json(&report)),
        OutFormat::Csv => {
            let mut csv = String::from("initial_state,word,count,empirical,empirical_smoothed\n");
            for block in &report.states {
                for (w, word) in report.words.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{word},{},{},{}\n",
                        block.initial_state,
                        block.counts[w],
                        block.empirical[w],
                        block.empirical_smoothed[w]
                    ));
                }
            }
            emit(output, &csv)
        }
    }
}

#[derive(Serialize)]
struct BoundReport {
    schema: &'static str,
    kind: &'static str,
    n_period: u32,
    gamma: f64,
    v: f64,
    k: usize,
    horizon: usize,
    bound_bits: f64,
    argmin_partition: String,
}

fn cmd_bound(
    pmd: &PmdParams,
    k: usize,
    horizon: usize,
    format: OutFormat,
    output: Option<&Path>,
) -> Result<(), AppError> {
    let machine = EpsilonMachine::new(pmd)?;
    let result = classical_bound(&machine, k, horizon)?;
    let report = BoundReport {
        schema: "report-v1",
        kind: "bound",
        n_period: pmd.n_period(),
        gamma: pmd.gamma(),
        v: pmd.v(),
        k,
        horizon,
        bound_bits: result.bits,
        argmin_partition: result.partition.block_notation(),
    };
    match format {
        OutFormat::Json => emit(output, &to_json(&report)),
        OutFormat::Csv => {
            let csv = format!(
                "n_period,gamma,v,k,L,bound_bits,argmin_partition\n{},{},{},{},{},{},{}\n",
                report.n_period,
                report.gamma,
                report.v,
                report.k,
                report.horizon,
                report.bound_bits,
                report.argmin_partition
            );
            emit(output, &csv)
        }
    }
}

#[derive(Serialize)]
struct SweepReport<'a> {
    schema: &'static str,
    kind: &'static str,
    spec: &'a SweepSpec,
    rows: Vec<RunRow>,
}

fn cmd_sweep(spec: &SweepSpec, format: OutFormat, output: Option<&Path>) -> Result<(), AppError> {
    let rows = run_sweep(spec);
    if !rows.is_empty() && rows.iter().all(|r| r.error.is_some()) {
        return Err(AppError::Solver(format!(
            "every grid point failed; first error: {}",
            rows[0].error.as_deref().unwrap_or("unknown")
        )));
    }
    match format {
        OutFormat::Json => emit(
            output,
            &to_json(&SweepReport {
                schema: "report-v1",
                kind: "sweep",
                spec,
                rows,
            }),
        ),
        OutFormat::Csv => emit(output, &sweep_csv(&rows)),
    }
}

#[derive(Serialize)]
struct TomoOut {
    schema: &'static str,
    kind: &'static str,
    #[serde(flatten)]
    report: TomoReport,
}

fn cmd_tomo(
    pmd: &PmdParams,
    horizon: usize,
    noise_p: f64,
    format: OutFormat,
    output: Option<&Path>,
) -> Result<(), AppError> {
    let report = run_tomo(pmd, horizon, noise_p).map_err(AppError::Solver)?;
    match format {
        OutFormat::Json => emit(
            output,
            &to_json(&TomoOut {
                schema: "report-v1",
                kind: "tomo",
                report,
            }),
        ),
        OutFormat::Csv => {
            let mut csv =
                String::from("initial_state,outcome,probability,target_state,infidelity\n");
            for c in &report.conditions {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    c.initial_state, c.outcome, c.probability, c.target_state, c.infidelity
                ));
            }
            emit(output, &csv)
        }
    }
}

#[derive(Serialize)]
struct WaveplateDegrees {
    position: i32,
    step: u8,
    q1_deg: f64,
    h_deg: f64,
    q2_deg: f64,
    residual: f64,
}

#[derive(Serialize)]
struct WalkReport {
    #[serde(flatten)]
    program: WalkProgramJson,
    verification_deviation: f64,
    waveplates_deg: Vec<WaveplateDegrees>,
}

fn cmd_walk(pmd: &PmdParams, format: OutFormat, output: Option<&Path>) -> Result<(), AppError> {
    let model = QuantumModel::from_pmd(pmd)?;
    let program = compile_walk(&model)?;
    let deviation = verify_walk(&program, &model)?;
    let waveplates: Vec<WaveplateDegrees> = program_waveplates(&program)?
        .into_iter()
        .map(|row| WaveplateDegrees {
            position: row.position,
            step: row.step,
            q1_deg: row.q1_rad.to_degrees(),
            h_deg: row.h_rad.to_degrees(),
            q2_deg: row.q2_rad.to_degrees(),
            residual: row.residual,
        })
        .collect();
    let report = WalkReport {
        program: WalkProgramJson::from(&program),
        verification_deviation: deviation,
        waveplates_deg: waveplates,
    };
    match format {
        OutFormat::Json => emit(output, &to_json(&report)),
        OutFormat::Csv => {
            let mut csv = String::from("position,step,q1_deg,h_deg,q2_deg\n");
            for w in &report.waveplates_deg {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    w.position, w.step, w.q1_deg, w.h_deg, w.q2_deg
                ));
            }
            emit(output, &csv)
        }
    }
}
