//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::metrics::{evaluate, MetricsError};
use crate::mlp::{MlpError, MlpNetwork};
use crate::separation::{run_idlma, run_ilrma, IdlmaConfig, IlrmaConfig, SeparationError, SourceDistribution, TraceRecord};
use crate::signal::{read_wav, simulate_mixture, write_wav, MixingSpec, MultichannelSignal, SignalError, WavEncoding};
use crate::source_model::{DnnModel, FloorPolicy, ModelError, OracleModel, SourceModel};
use crate::stft::{istft, stft, ComplexSpectrogram, StftConfig, StftError};

#[derive(Debug, Parser)]
#[command(name = "idlma", version, about = "Determined multichannel source separation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mix mono source files into a multichannel observation.
    Mix(MixArgs),
    /// Separate a multichannel mixture into one file per source.
    Separate(SeparateArgs),
    /// Score separated signals against references.
    Eval(EvalArgs),
    /// Print the structure and checksum of a network weight file.
    InspectWeights(InspectArgs),
}

#[derive(Debug, Args)]
pub struct MixArgs {
    /// JSON mixing spec, e.g. {"type":"gain","rows":[[1,0.5],[0.3,1]]}
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Encoding::Float32)]
    pub encoding: Encoding,
    /// Mono source files, one per mixing-spec column.
    #[arg(required = true)]
    pub sources: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Encoding {
    Pcm16,
    Float32,
}

impl From<Encoding> for WavEncoding {
    fn from(e: Encoding) -> Self {
        match e {
            Encoding::Pcm16 => WavEncoding::Pcm16,
            Encoding::Float32 => WavEncoding::Float32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Gauss,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceModelKind {
    Oracle,
    Nmf,
    Dnn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FloorMode {
    Fixed,
    Relative,
}

#[derive(Debug, Args)]
pub struct SeparateArgs {
    /// Multichannel mixture WAV.
    pub mixture: PathBuf,
    /// Directory receiving source_1.wav .. source_N.wav.
    #[arg(long, short)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelKind::T)]
    pub model: ModelKind,
    /// Degrees of freedom of the t model.
    #[arg(long, default_value_t = 1000.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 10)]
    pub outer_rounds: usize,
    #[arg(long, default_value_t = 10)]
    pub inner_iters: usize,
    #[arg(long, default_value_t = 512.0)]
    pub window_ms: f64,
    #[arg(long, default_value_t = 256.0)]
    pub hop_ms: f64,
    /// 1-based reference microphone for back-projection.
    #[arg(long, default_value_t = 1)]
    pub ref_channel: usize,
    #[arg(long, value_enum, default_value_t = SourceModelKind::Oracle)]
    pub source_model: SourceModelKind,
    #[arg(long, default_value_t = 20)]
    pub nmf_bases: usize,
    /// Defaults to relative.
    #[arg(long, value_enum)]
    pub floor_mode: Option<FloorMode>,
    /// Coefficient (relative) or absolute floor (fixed). The relative
    /// coefficient defaults to 0.1, or 1e-3 for nmf.
    #[arg(long)]
    pub floor_value: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Network weight file per source (dnn model).
    #[arg(long)]
    pub weights: Vec<PathBuf>,
    /// Clean source file per source (oracle model).
    #[arg(long)]
    pub reference: Vec<PathBuf>,
    /// JSON-lines cost trace; defaults to <out-dir>/trace.jsonl.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Record per-sweep wall time in the trace (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
    #[arg(long, value_enum, default_value_t = Encoding::Float32)]
    pub encoding: Encoding,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Separated signals, one mono file each.
    #[arg(long = "estimate", required = true)]
    pub estimates: Vec<PathBuf>,
    /// Clean references, one mono file each.
    #[arg(long = "reference", required = true)]
    pub references: Vec<PathBuf>,
    #[arg(long)]
    pub mixture: PathBuf,
    /// 1-based mixture channel used as the unprocessed baseline.
    #[arg(long, default_value_t = 1)]
    pub ref_channel: usize,
    /// Include evaluation wall time in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub path: PathBuf,
}

/// Failure classes, mapped to the process exit status.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<SignalError> for CliError {
    fn from(e: SignalError) -> Self {
        match e {
            SignalError::Unreadable(_) | SignalError::Unwritable(_) => CliError::Io(e.to_string()),
            SignalError::NonFinite { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<StftError> for CliError {
    fn from(e: StftError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SeparationError> for CliError {
    fn from(e: SeparationError) -> Self {
        match &e {
            SeparationError::Singular { .. } | SeparationError::NonFinite(_) => CliError::Numerical(e.to_string()),
            SeparationError::Model {
                error: ModelError::Network(_),
                ..
            } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

fn weights_error(path: &Path, e: MlpError) -> CliError {
    let msg = format!("{}: {e}", path.display());
    match e {
        MlpError::Io(_) => CliError::Io(msg),
        _ => CliError::Validation(msg),
    }
}

pub fn run(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Mix(a) => cmd_mix(&a),
        Command::Separate(a) => cmd_separate(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::InspectWeights(a) => cmd_inspect_weights(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn read_mono(path: &Path) -> Result<MultichannelSignal, CliError> {
    let s = read_wav(path)?;
    if s.num_channels() != 1 {
        return Err(CliError::Validation(format!(
            "{}: expected a mono file, found {} channels",
            path.display(),
            s.num_channels()
        )));
    }
    Ok(s)
}

fn check_compatible(path: &Path, s: &MultichannelSignal, rate: u32, len: usize) -> Result<(), CliError> {
    if s.sample_rate() != rate {
        return Err(CliError::Validation(format!(
            "{}: sample rate {} Hz differs from {rate} Hz",
            path.display(),
            s.sample_rate()
        )));
    }
    if s.len() != len {
        return Err(CliError::Validation(format!(
            "{}: {} samples, expected {len}",
            path.display(),
            s.len()
        )));
    }
    Ok(())
}

pub fn cmd_mix(args: &MixArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.spec).map_err(|e| CliError::Io(format!("{}: {e}", args.spec.display())))?;
    let spec: MixingSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: invalid mixing spec: {e}", args.spec.display())))?;
    spec.validate()?;
    let (_, n) = spec.shape();
    if args.sources.len() != n {
        return Err(CliError::Validation(format!(
            "mixing spec has {n} source columns but {} source files were given",
            args.sources.len()
        )));
    }
    let sources = args.sources.iter().map(|p| read_mono(p)).collect::<Result<Vec<_>, _>>()?;
    let mix = simulate_mixture(&sources, &spec)?;
    write_wav(&args.out, &mix, args.encoding.into())?;
    println!("{}", serde_json::to_string(&spec).expect("spec serializes"));
    Ok(())
}

struct SeparatePlan {
    distribution: SourceDistribution,
    floor: FloorPolicy,
    ref_channel: usize,
}

fn plan_separation(args: &SeparateArgs) -> Result<SeparatePlan, CliError> {
    let bad = |m: String| Err(CliError::Validation(m));
    let distribution = match args.model {
        ModelKind::Gauss => SourceDistribution::Gauss,
        ModelKind::T => SourceDistribution::StudentT { nu: args.nu },
    };
    distribution.validate()?;
    if args.ref_channel == 0 {
        return bad("--ref-channel is 1-based".into());
    }
    if !(args.window_ms > 0.0 && args.hop_ms > 0.0 && args.hop_ms <= args.window_ms) {
        return bad("need 0 < --hop-ms <= --window-ms".into());
    }
    match args.source_model {
        SourceModelKind::Oracle => {
            if args.reference.is_empty() {
                return bad("--source-model oracle needs one --reference per source".into());
            }
        }
        SourceModelKind::Dnn => {
            if args.weights.is_empty() {
                return bad("--source-model dnn needs one --weights file per source".into());
            }
        }
        SourceModelKind::Nmf => {
            if args.model == ModelKind::T {
                return bad("--source-model nmf runs the Gauss low-rank model; use --model gauss".into());
            }
            if args.nmf_bases == 0 {
                return bad("--nmf-bases must be at least 1".into());
            }
        }
    }
    if args.source_model != SourceModelKind::Oracle && !args.reference.is_empty() {
        return bad("--reference only applies to --source-model oracle".into());
    }
    if args.source_model != SourceModelKind::Dnn && !args.weights.is_empty() {
        return bad("--weights only applies to --source-model dnn".into());
    }
    let relative_default = match args.source_model {
        SourceModelKind::Nmf => crate::separation::ILRMA_RELATIVE_FLOOR,
        _ => 0.1,
    };
    let floor = match args.floor_mode.unwrap_or(FloorMode::Relative) {
        FloorMode::Fixed => FloorPolicy::Fixed(args.floor_value.unwrap_or(crate::source_model::NMF_FLOOR)),
        FloorMode::Relative => FloorPolicy::Relative(args.floor_value.unwrap_or(relative_default)),
    };
    floor
        .validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(SeparatePlan {
        distribution,
        floor,
        ref_channel: args.ref_channel - 1,
    })
}

fn write_trace(path: &Path, trace: &[TraceRecord], timing: bool) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for rec in trace {
        let rec = TraceRecord {
            wall_ms: if timing { rec.wall_ms } else { None },
            ..*rec
        };
        writeln!(out, "{}", serde_json::to_string(&rec).expect("trace serializes")).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn cmd_separate(args: &SeparateArgs) -> Result<(), CliError> {
    let plan = plan_separation(args)?;
    let mixture = read_wav(&args.mixture)?;
    let (m, rate, len) = (mixture.num_channels(), mixture.sample_rate(), mixture.len());
    if plan.ref_channel >= m {
        return Err(CliError::Validation(format!(
            "--ref-channel {} out of range for a {m}-channel mixture",
            args.ref_channel
        )));
    }
    let per_source = |what: &str, count: usize| {
        if count == m {
            Ok(())
        } else {
            Err(CliError::Validation(format!("{m}-channel mixture needs {m} {what}, got {count}")))
        }
    };
    match args.source_model {
        SourceModelKind::Oracle => per_source("--reference files", args.reference.len())?,
        SourceModelKind::Dnn => per_source("--weights files", args.weights.len())?,
        SourceModelKind::Nmf => {}
    }
    let config = StftConfig::from_millis(args.window_ms, args.hop_ms, rate)?;
    let observations = mixture
        .channels()
        .iter()
        .map(|c| stft(c, config))
        .collect::<Result<Vec<_>, _>>()?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::Io(format!("{}: {e}", args.out_dir.display())))?;
    let trace_path = args.trace.clone().unwrap_or_else(|| args.out_dir.join("trace.jsonl"));

    let result = match args.source_model {
        SourceModelKind::Nmf => run_ilrma(
            &observations,
            &IlrmaConfig {
                bases: args.nmf_bases,
                sweeps: args.outer_rounds * args.inner_iters,
                seed: args.seed,
                floor: plan.floor,
                ref_channel: plan.ref_channel,
            },
        ),
        kind => {
            let mut models: Vec<Box<dyn SourceModel>> = Vec::with_capacity(m);
            if kind == SourceModelKind::Oracle {
                for path in &args.reference {
                    let r = read_mono(path)?;
                    check_compatible(path, &r, rate, len)?;
                    models.push(Box::new(OracleModel::new(&stft(r.channel(0), config)?)));
                }
            } else {
                for path in &args.weights {
                    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    let net = MlpNetwork::from_bytes(&bytes).map_err(|e| weights_error(path, e))?;
                    if net.meta().freq_bins != config.bins() {
                        return Err(CliError::Validation(format!(
                            "{}: network expects {} frequency bins, STFT gives {}",
                            path.display(),
                            net.meta().freq_bins,
                            config.bins()
                        )));
                    }
                    models.push(Box::new(DnnModel::new(net)));
                }
            }
            run_idlma(
                &observations,
                &mut models,
                &IdlmaConfig {
                    distribution: plan.distribution,
                    outer_rounds: args.outer_rounds,
                    inner_sweeps: args.inner_iters,
                    floor: plan.floor,
                    ref_channel: plan.ref_channel,
                },
            )
        }
    };
    let output = match result {
        Ok(o) => o,
        Err(failure) => {
            write_trace(&trace_path, &failure.trace, args.timing)?;
            log::error!("failed in round {}, sweep {}", failure.round, failure.sweep);
            return Err(failure.error.into());
        }
    };
    write_trace(&trace_path, &output.trace, args.timing)?;

    let nothing_ran = output.trace.is_empty();
    for (n, est) in output.estimates.iter().enumerate() {
        let samples = if nothing_ran {
            mixture.channel(plan.ref_channel).to_vec()
        } else {
            synthesize(est, config, len)?
        };
        let path = args.out_dir.join(format!("source_{}.wav", n + 1));
        write_wav(&path, &MultichannelSignal::mono(samples, rate)?, args.encoding.into())?;
    }
    Ok(())
}

fn synthesize(spec: &ComplexSpectrogram, config: StftConfig, len: usize) -> Result<Vec<f64>, CliError> {
    let samples = istft(spec, config, len)?;
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Numerical("resynthesized signal is not finite".into()));
    }
    Ok(samples)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    if args.ref_channel == 0 {
        return Err(CliError::Validation("--ref-channel is 1-based".into()));
    }
    if args.estimates.len() != args.references.len() {
        return Err(CliError::Validation(format!(
            "{} estimates for {} references",
            args.estimates.len(),
            args.references.len()
        )));
    }
    let mixture = read_wav(&args.mixture)?;
    if args.ref_channel > mixture.num_channels() {
        return Err(CliError::Validation(format!(
            "--ref-channel {} out of range for a {}-channel mixture",
            args.ref_channel,
            mixture.num_channels()
        )));
    }
    let load = |paths: &[PathBuf]| -> Result<Vec<Vec<f64>>, CliError> {
        paths
            .iter()
            .map(|p| {
                let s = read_mono(p)?;
                check_compatible(p, &s, mixture.sample_rate(), mixture.len())?;
                Ok(s.into_channels().remove(0))
            })
            .collect()
    };
    let estimates = load(&args.estimates)?;
    let references = load(&args.references)?;
    let start = Instant::now();
    let mut report = evaluate(&estimates, &references, mixture.channel(args.ref_channel - 1))?;
    if args.timing {
        report.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    println!("{}", report.to_json_line());
    Ok(())
}

pub fn cmd_inspect_weights(args: &InspectArgs) -> Result<(), CliError> {
    let bytes = std::fs::read(&args.path).map_err(|e| CliError::Io(format!("{}: {e}", args.path.display())))?;
    let net = MlpNetwork::from_bytes(&bytes).map_err(|e| weights_error(&args.path, e))?;
    let sizes = net.layer_sizes();
    let last = sizes.len() - 1;
    for (k, size) in sizes.iter().enumerate() {
        let role = match k {
            0 => "input".to_string(),
            k if k == last => "output".to_string(),
            k => format!("hidden {k}"),
        };
        println!("layer {k} ({role}): {size}");
    }
    let meta = net.meta();
    println!("freq_bins: {}", meta.freq_bins);
    println!("context: {}", meta.context);
    println!("delta2: {:e}", meta.delta2);
    let digest = Sha256::digest(&bytes);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    println!("sha256: {hex}");
    Ok(())
}
