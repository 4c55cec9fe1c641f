//! Command-line front end.
//!
//! Exit codes: 0 accept or success, 1 reject, 2 configuration or input
//! error, 3 resource cap exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{self, derive_seed, Adversary, ExperimentSpec};
use crate::codes::{CodeParams, DualDecoder, ErrorDistribution, FoldedCode, DEFAULT_ENUM_CAP};
use crate::protocol::{invert, owf_eval, verify, Proof, Protocol, ProtocolParams, Prover};
use crate::qsim::{identity_suite, DEFAULT_AMPLITUDE_CAP};
use crate::randomness::{self, approx_distribution, codeword_bits, extract, ExtractorSpec};
use crate::rom::{Bits, OracleMode};
use crate::{Error, Result};

pub const EXIT_ACCEPT: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAP: i32 = 3;

/// Everything a run depends on besides the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub code: CodeParams,
    pub protocol: ProtocolSection,
    pub run: RunSection,
    pub soundness: SoundnessSection,
    pub decode_bench: DecodeBenchSection,
    pub fourier: FourierSection,
    pub entropy: EntropySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSection {
    pub oracle_seed: u64,
    pub lambda: usize,
    pub repetitions: usize,
    /// Independent prover runs tried by `prove` before giving up.
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub workers: usize,
    pub trials: u64,
    pub out: PathBuf,
    pub cap_amplitudes: u64,
    pub enum_cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SoundnessSection {
    pub adversary: String,
    pub budget: u64,
    pub restricted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecodeBenchSection {
    pub q: u64,
    pub m: usize,
    pub alpha: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FourierSection {
    pub max_dim: u64,
    pub max_q: u64,
    pub samples: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropySection {
    /// Entropy level selecting the registered parameter set.
    pub level: u32,
    pub eps: f64,
    pub delta: f64,
    pub output_bits: usize,
    pub extractor_error: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            code: CodeParams { q: 5, m: 1, k: Some(2), alpha: None, epsilon: None },
            protocol: ProtocolSection::default(),
            run: RunSection::default(),
            soundness: SoundnessSection::default(),
            decode_bench: DecodeBenchSection::default(),
            fourier: FourierSection::default(),
            entropy: EntropySection::default(),
        }
    }
}

impl Default for ProtocolSection {
    fn default() -> Self {
        ProtocolSection {
            oracle_seed: 7,
            lambda: crate::protocol::DEFAULT_LAMBDA,
            repetitions: crate::protocol::DEFAULT_REPETITIONS,
            attempts: 16,
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 1,
            workers: 1,
            trials: 100,
            out: PathBuf::from("poqlab-out"),
            cap_amplitudes: DEFAULT_AMPLITUDE_CAP,
            enum_cap: DEFAULT_ENUM_CAP,
        }
    }
}

impl Default for SoundnessSection {
    fn default() -> Self {
        SoundnessSection { adversary: "greedy".into(), budget: 64, restricted: false }
    }
}

impl Default for DecodeBenchSection {
    fn default() -> Self {
        DecodeBenchSection { q: 256, m: 1, alpha: 0.9, trials: 20 }
    }
}

impl Default for FourierSection {
    fn default() -> Self {
        FourierSection { max_dim: 1024, max_q: 16, samples: 20, tolerance: 1e-8 }
    }
}

impl Default for EntropySection {
    fn default() -> Self {
        EntropySection { level: 4, eps: 0.05, delta: 0.05, output_bits: 1, extractor_error: 0.5 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Structural checks that touch no cap-bounded resource.
    pub fn validate(&self) -> Result<()> {
        FoldedCode::from_params(&self.code).map_err(|e| Error::Config(format!("code: {e}")))?;
        if self.protocol.lambda == 0 || self.protocol.repetitions == 0 || self.protocol.attempts == 0 {
            return Err(Error::Config("lambda, repetitions and attempts must be positive".into()));
        }
        if self.run.workers == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        self.soundness.adversary.parse::<Adversary>()?;
        let e = &self.entropy;
        if !(e.eps > 0.0 && e.eps < 1.0 && e.delta > 0.0 && e.delta < 1.0) {
            return Err(Error::Config("entropy eps and delta must lie in (0, 1)".into()));
        }
        if !(e.extractor_error > 0.0 && e.extractor_error < 1.0) {
            return Err(Error::Config("extractor_error must lie in (0, 1)".into()));
        }
        randomness::pom_level(e.level).map_err(|e| Error::Config(e.to_string()))?;
        if !(self.decode_bench.alpha > 0.0 && self.decode_bench.alpha < 1.0) {
            return Err(Error::Config("decode_bench.alpha must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn protocol_params(&self) -> ProtocolParams {
        let mut p = ProtocolParams::new(self.code.clone(), self.protocol.oracle_seed);
        p.lambda = self.protocol.lambda;
        p.repetitions = self.protocol.repetitions;
        p
    }

    pub fn build_protocol(&self) -> Result<Protocol> {
        Protocol::new(self.protocol_params(), self.run.cap_amplitudes)
    }
}

#[derive(Debug, Parser)]
#[command(name = "poqlab", version, about = "Desk-scale laboratory for a random-oracle proof of quantumness")]
struct Cli {
    /// TOML run configuration; built-in defaults otherwise.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Run seed; overrides `run.seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Largest state vector the simulator may allocate.
    #[arg(long = "cap-amplitudes", global = true, value_name = "N")]
    cap_amplitudes: Option<u64>,
    /// Trial count; overrides `run.trials`.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the honest prover and write a proof file.
    Prove {
        /// Target bits; all ones by default.
        #[arg(long)]
        y: Option<String>,
        /// Also write the final two-register state as QSV1.
        #[arg(long)]
        dump_state: bool,
    },
    /// Check a proof file against the configured oracle.
    Verify { proof: PathBuf },
    /// Invert the derived one-way function on `y`.
    Invert {
        #[arg(long)]
        y: String,
    },
    /// Run a named experiment and write JSON-lines plus a CSV summary.
    Experiment { name: ExperimentName },
    /// Proof of min-entropy, output-distribution estimate and extraction.
    Entropy {
        /// Replace the honest prover by one that always outputs the same proof.
        #[arg(long)]
        stub: bool,
        /// Extractor seed as hex; drawn from the run seed otherwise.
        #[arg(long)]
        extractor_seed: Option<String>,
    },
    /// Print the built-in configuration as TOML.
    PrintDefaults,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentName {
    FourierSelftest,
    DecodeBench,
    Soundness,
    Collision,
    InverterUniformity,
}

impl ExperimentName {
    fn file_stem(self) -> &'static str {
        match self {
            ExperimentName::FourierSelftest => "fourier-selftest",
            ExperimentName::DecodeBench => "decode-bench",
            ExperimentName::Soundness => "soundness",
            ExperimentName::Collision => "collision",
            ExperimentName::InverterUniformity => "inverter-uniformity",
        }
    }
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_ACCEPT };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CapExceeded { .. } => EXIT_CAP,
        _ => EXIT_CONFIG,
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.run.workers = w;
    }
    if let Some(o) = &cli.out {
        cfg.run.out = o.clone();
    }
    if let Some(c) = cli.cap_amplitudes {
        cfg.run.cap_amplitudes = c;
    }
    if let Some(t) = cli.trials {
        cfg.run.trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<i32> {
    if let Command::PrintDefaults = cli.command {
        print!("{}", RunConfig::default().to_toml());
        return Ok(EXIT_ACCEPT);
    }
    let cfg = load_config(&cli)?;
    match cli.command {
        Command::PrintDefaults => unreachable!(),
        Command::Prove { y, dump_state } => cmd_prove(&cfg, y.as_deref(), dump_state),
        Command::Verify { proof } => cmd_verify(&cfg, &proof),
        Command::Invert { y } => cmd_invert(&cfg, &y),
        Command::Experiment { name } => cmd_experiment(&cfg, name),
        Command::Entropy { stub, extractor_seed } => cmd_entropy(&cfg, stub, extractor_seed.as_deref()),
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.run.out)?;
    Ok(&cfg.run.out)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report serializes")
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&to_json(r));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

fn parse_target(proto: &Protocol, y: Option<&str>) -> Result<Bits> {
    let y = match y {
        Some(s) => s.parse::<Bits>().map_err(|e| Error::Config(format!("y: {e}")))?,
        None => Bits::ones(proto.n()),
    };
    if y.len() != proto.n() {
        return Err(Error::Config(format!("y must have {} bits", proto.n())));
    }
    Ok(y)
}

#[derive(Debug, Serialize)]
struct ProveReport {
    params_hash: String,
    y: String,
    accepted: bool,
    attempts: usize,
    exact_success: f64,
    proof: String,
}

fn cmd_prove(cfg: &RunConfig, y: Option<&str>, dump_state: bool) -> Result<i32> {
    let proto = cfg.build_protocol()?;
    let y = parse_target(&proto, y)?;
    let h = proto.oracle(OracleMode::Explicit)?;
    let prover = Prover::new(&proto, &h, &y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.run.seed, "prove", 0));
    let mut proof = Proof::abort();
    let mut attempts = 0;
    let mut accepted = false;
    while attempts < cfg.protocol.attempts && !accepted {
        attempts += 1;
        proof = prover.sample(&mut rng)?;
        accepted = verify(&proto, &mut h.clone(), &proof, &y);
    }
    let dir = out_dir(cfg)?;
    let text = proof.to_text(&proto, &y)?;
    fs::write(dir.join("proof.txt"), &text)?;
    if dump_state {
        if let Some(factors) = crate::protocol::preimage_factors(&h, &y)? {
            fs::write(dir.join("state.qsv1"), proto.final_state(&factors)?.to_qsv1())?;
        }
    }
    let report = ProveReport {
        params_hash: proto.params.hash(),
        y: y.to_string(),
        accepted,
        attempts,
        exact_success: prover.success_probability(),
        proof: text.lines().last().unwrap_or_default().to_string(),
    };
    let line = to_json(&report);
    fs::write(dir.join("prove.json"), format!("{line}\n"))?;
    println!("{line}");
    Ok(if accepted { EXIT_ACCEPT } else { EXIT_REJECT })
}

fn cmd_verify(cfg: &RunConfig, path: &Path) -> Result<i32> {
    let proto = cfg.build_protocol()?;
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let (proof, y) = Proof::from_text(&proto, &text)?;
    let mut h = proto.oracle(OracleMode::Lazy)?;
    let ok = verify(&proto, &mut h, &proof, &y);
    println!("{}", to_json(&serde_json::json!({ "accepted": ok, "queries": h.query_count() })));
    Ok(if ok { EXIT_ACCEPT } else { EXIT_REJECT })
}

fn cmd_invert(cfg: &RunConfig, y: &str) -> Result<i32> {
    let proto = cfg.build_protocol()?;
    let y = parse_target(&proto, Some(y))?;
    let h = proto.oracle(OracleMode::Explicit)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.run.seed, "invert", 0));
    let proof = invert(&proto, &h, &y, &mut rng)?;
    let found = match &proof.codeword {
        Some(x) => owf_eval(&proto, &mut h.clone(), x)? == y,
        None => false,
    };
    let dir = out_dir(cfg)?;
    fs::write(dir.join("invert.txt"), proof.to_text(&proto, &y)?)?;
    println!("{}", to_json(&serde_json::json!({ "y": y.to_string(), "preimage_found": found })));
    Ok(if found { EXIT_ACCEPT } else { EXIT_REJECT })
}

fn cmd_experiment(cfg: &RunConfig, name: ExperimentName) -> Result<i32> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.run.seed, name.file_stem(), 0));
    let (records, csv, summary): (Vec<serde_json::Value>, String, serde_json::Value) = match name {
        ExperimentName::FourierSelftest => fourier_selftest(cfg, &mut rng)?,
        ExperimentName::DecodeBench => decode_bench(cfg, &mut rng)?,
        ExperimentName::Soundness => soundness(cfg)?,
        ExperimentName::Collision => collision(cfg)?,
        ExperimentName::InverterUniformity => inverter_uniformity(cfg, &mut rng)?,
    };
    let dir = out_dir(cfg)?;
    write_jsonl(&dir.join(format!("{}.jsonl", name.file_stem())), &records)?;
    fs::write(dir.join(format!("{}.csv", name.file_stem())), csv)?;
    println!("{}", to_json(&summary));
    Ok(EXIT_ACCEPT)
}

type ExperimentOutput = (Vec<serde_json::Value>, String, serde_json::Value);

fn value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report serializes")
}

fn fourier_selftest(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<ExperimentOutput> {
    let f = &cfg.fourier;
    let reports = identity_suite(f.max_dim, f.max_q, f.samples, rng)?;
    let all_pass = reports.iter().all(|r| r.passed(f.tolerance));
    let worst = reports.iter().map(|r| r.max_error()).fold(0.0, f64::max);
    let mut csv = String::from("q,m,n,samples,max_error,pass\n");
    for r in &reports {
        let _ = writeln!(csv, "{},{},{},{},{:e},{}", r.q, r.m, r.n, r.samples, r.max_error(), r.passed(f.tolerance));
    }
    let summary = serde_json::json!({
        "experiment": "fourier-selftest",
        "parameter_sets": reports.len(),
        "tolerance": f.tolerance,
        "max_error": worst,
        "all_pass": all_pass,
    });
    Ok((reports.iter().map(value).collect(), csv, summary))
}

#[derive(Debug, Serialize)]
struct DecodeRecord {
    error_model: String,
    weight: Option<usize>,
    trials: u64,
    successes: u64,
    measured_rate: f64,
}

fn decode_bench(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<ExperimentOutput> {
    let d = &cfg.decode_bench;
    let code = FoldedCode::from_alpha(d.q, d.m, d.alpha, None)?;
    let decoder = DualDecoder::new(&code, cfg.run.enum_cap)?;
    let dual = decoder.dual().clone();
    let f = code.field().clone();
    let radius = decoder.radius();
    let n = dual.n();
    let m = dual.m();
    let mut weights: Vec<usize> = vec![0, radius / 4, radius / 2, 3 * radius / 4, radius, radius + 1, radius + radius / 8 + 2];
    weights.retain(|&w| w <= n);
    weights.dedup();
    let mut records = Vec::new();
    let run = |rng: &mut ChaCha8Rng, e: Vec<u32>| -> bool {
        let x = dual.inner().random_codeword(rng);
        let z = f.vec_add(&x, &e);
        decoder.decode(&z) == Some(x)
    };
    for &w in &weights {
        let mut ok = 0;
        for _ in 0..d.trials {
            let mut e = vec![0u32; dual.big_n()];
            let positions: Vec<usize> = rand::seq::index::sample(rng, n, w).into_iter().collect();
            for pos in positions {
                loop {
                    let sym: Vec<u32> = (0..m).map(|_| rand::Rng::gen_range(rng, 0..f.q())).collect();
                    if sym.iter().any(|&c| c != 0) {
                        e[pos * m..(pos + 1) * m].copy_from_slice(&sym);
                        break;
                    }
                }
            }
            ok += run(rng, e) as u64;
        }
        records.push(DecodeRecord {
            error_model: "fixed-weight".into(),
            weight: Some(w),
            trials: d.trials,
            successes: ok,
            measured_rate: ok as f64 / d.trials.max(1) as f64,
        });
    }
    let dist = ErrorDistribution::new(&dual);
    let mut ok = 0;
    for _ in 0..d.trials {
        let e = dist.sample(rng);
        ok += run(rng, e) as u64;
    }
    records.push(DecodeRecord {
        error_model: "D^n".into(),
        weight: None,
        trials: d.trials,
        successes: ok,
        measured_rate: ok as f64 / d.trials.max(1) as f64,
    });
    let mut csv = String::from("error_model,weight,trials,successes,measured_rate\n");
    for r in &records {
        let w = r.weight.map(|w| w.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{},{},{}", r.error_model, w, r.trials, r.successes, r.measured_rate);
    }
    let summary = serde_json::json!({
        "experiment": "decode-bench",
        "q": d.q,
        "m": d.m,
        "n": n,
        "dual_k": dual.k(),
        "radius": radius,
        "list_decoder": decoder.uses_list_decoder(),
        "rates": records.iter().map(|r| r.measured_rate).collect::<Vec<_>>(),
    });
    Ok((records.iter().map(value).collect(), csv, summary))
}

fn soundness(cfg: &RunConfig) -> Result<ExperimentOutput> {
    let proto = cfg.build_protocol()?;
    let spec = ExperimentSpec {
        adversary: cfg.soundness.adversary.parse()?,
        budget: cfg.soundness.budget,
        trials: cfg.run.trials,
        seed: cfg.run.seed,
        restricted: cfg.soundness.restricted,
        workers: cfg.run.workers,
    };
    let (report, records) = adversary::soundness_experiment(&proto, &spec)?;
    let mut csv = String::from("q,m,k,adversary,Q,trials,successes,measured_rate,wilson_low,wilson_high\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{},{},{},{}",
        report.params.q,
        report.params.m,
        proto.code.k(),
        cfg.soundness.adversary,
        report.budget,
        report.trials,
        report.successes,
        report.measured_rate,
        report.wilson_low,
        report.wilson_high
    );
    Ok((records.iter().map(value).collect(), csv, value(&report)))
}

fn collision(cfg: &RunConfig) -> Result<ExperimentOutput> {
    let code = FoldedCode::from_params(&cfg.code)?;
    let r = adversary::collision_probability_exact(&code, cfg.run.enum_cap)?;
    let csv = format!(
        "q,m,k,n,code_size,scaled_identity,scaled_enumeration,scaled_bound,bound_holds\n{},{},{},{},{},{},{},{},{}\n",
        code.field().q(),
        code.m(),
        code.k(),
        r.n,
        r.code_size,
        r.scaled_identity,
        r.scaled_enumeration.map(|v| v.to_string()).unwrap_or_default(),
        r.scaled_bound.map(|v| v.to_string()).unwrap_or_default(),
        r.bound_holds
    );
    Ok((vec![value(&r)], csv, value(&r)))
}

fn inverter_uniformity(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<ExperimentOutput> {
    let proto = cfg.build_protocol()?;
    let h = proto.oracle(OracleMode::Explicit)?;
    let y = Bits::ones(proto.n());
    let r = adversary::inverter_uniformity_test(&proto, &h, &y, cfg.run.trials, rng)?;
    let csv = format!(
        "preimages,trials,accepted,exact_tv,measured_tv,tolerance,within_tolerance\n{},{},{},{},{},{},{}\n",
        r.preimages, r.trials, r.accepted, r.exact_tv, r.measured_tv, r.tolerance, r.within_tolerance
    );
    Ok((vec![value(&r)], csv, value(&r)))
}

#[derive(Debug, Serialize)]
struct EntropyReport {
    level: u32,
    params: CodeParams,
    stub: bool,
    runs: u64,
    accepted_runs: u64,
    /// Min-entropy of accepted outputs from the estimate.
    measured_min_entropy: Option<f64>,
    /// Min-entropy of the prover's accepted-output distribution, from amplitudes.
    exact_min_entropy: Option<f64>,
    exact_support: usize,
    extractor: Option<ExtractorReport>,
    /// Why no bits were extracted, when none were.
    extractor_skipped: Option<String>,
}

#[derive(Debug, Serialize)]
struct ExtractorReport {
    spec: ExtractorSpec,
    seed: String,
    output: String,
}

fn cmd_entropy(cfg: &RunConfig, stub: bool, extractor_seed: Option<&str>) -> Result<i32> {
    let e = &cfg.entropy;
    let mut params = ProtocolParams::new(randomness::pom_level(e.level)?, cfg.protocol.oracle_seed);
    params.lambda = cfg.protocol.lambda;
    let proto = Protocol::new(params, cfg.run.cap_amplitudes)?;
    let h = proto.oracle(OracleMode::Explicit)?;
    let y = Bits::ones(proto.n());
    let prover = Prover::new(&proto, &h, &y)?;
    let accepted: Vec<u64> = proto
        .codewords()
        .iter()
        .copied()
        .filter(|&z| verify(&proto, &mut h.clone(), &Proof::of(proto.code.word_from_index(z)), &y))
        .collect();
    let fixed = accepted.first().map(|&z| Proof::of(proto.code.word_from_index(z))).unwrap_or_else(Proof::abort);
    let ell = codeword_bits(&proto, &vec![0; proto.code.big_n()]).len() + 1;
    let encode = |x: Option<Vec<u32>>| -> Bits {
        let mut out = Bits::zeros(ell);
        if let Some(x) = x {
            out.set(1, true);
            let body = codeword_bits(&proto, &x);
            for i in 1..=body.len() {
                out.set(i + 1, body.get(i));
            }
        }
        out
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.run.seed, "entropy", 0));
    let sample = |rng: &mut ChaCha8Rng| -> Result<Option<Vec<u32>>> {
        let proof = if stub { fixed.clone() } else { prover.sample(rng)? };
        Ok(randomness::pom_verify(&proto, &mut h.clone(), &proof))
    };
    let est = approx_distribution(ell, e.eps, e.delta, &mut rng, |rng| Ok(encode(sample(rng)?)))?;
    let accepted_counts: Vec<u64> = est.counts.iter().filter(|(z, _)| z.get(1)).map(|(_, &c)| c).collect();
    let accepted_runs: u64 = accepted_counts.iter().sum();
    let measured = accepted_counts.iter().max().map(|&m| 0.0 - (m as f64 / accepted_runs as f64).log2());

    let (exact_min_entropy, exact_support) = if stub {
        (fixed.codeword.as_ref().map(|_| 0.0), usize::from(!fixed.is_abort()))
    } else {
        let dist = prover.output_distribution();
        let probs: Vec<f64> = accepted.iter().map(|&z| dist.get(z as usize).copied().unwrap_or(0.0)).collect();
        let mass: f64 = probs.iter().sum();
        let support = probs.iter().filter(|&&p| p > 1e-12).count();
        if mass > 0.0 {
            let norm: Vec<f64> = probs.iter().map(|p| p / mass).collect();
            (Some(randomness::min_entropy(&norm)), support)
        } else {
            (None, 0)
        }
    };

    let mut extractor_skipped = None;
    let spec = match measured {
        Some(hmin) => match ExtractorSpec::new(ell - 1, hmin, e.output_bits, e.extractor_error) {
            Ok(spec) => Some(spec),
            Err(err) => {
                extractor_skipped = Some(err.to_string());
                None
            }
        },
        None => {
            extractor_skipped = Some("no accepted proofs".into());
            None
        }
    };
    let mut extractor = None;
    if let Some(spec) = spec {
        let seed = match extractor_seed {
            Some(s) => spec.seed_from_hex(s).map_err(|err| Error::Config(format!("extractor seed: {err}")))?,
            None => spec.random_seed(&mut rng),
        };
        let mut source = None;
        for _ in 0..cfg.protocol.attempts.max(64) {
            if let Some(x) = sample(&mut rng)? {
                source = Some(codeword_bits(&proto, &x));
                break;
            }
        }
        match source {
            Some(src) => {
                let out = extract(&spec, &src, &seed)?;
                extractor = Some(ExtractorReport { spec, seed: spec.seed_hex(&seed), output: out.to_string() });
            }
            None => extractor_skipped = Some("no accepted proof to extract from".into()),
        }
    }
    let report = EntropyReport {
        level: e.level,
        params: proto.params.code.clone(),
        stub,
        runs: est.runs,
        accepted_runs,
        measured_min_entropy: measured,
        exact_min_entropy,
        exact_support,
        extractor,
        extractor_skipped,
    };
    let dir = out_dir(cfg)?;
    fs::write(dir.join("entropy.tsv"), est.dump())?;
    let line = to_json(&report);
    fs::write(dir.join("entropy.jsonl"), format!("{line}\n"))?;
    println!("{line}");
    Ok(EXIT_ACCEPT)
}
