//! `dac`: encode, decode, generate correlated data, estimate residual
//! entropy, and run the rate experiment.
//!
//! Exit status: 0 on success, 1 on usage or input errors, 2 when an internal
//! invariant is violated.

mod formats;
mod model_file;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use dac_core::experiments::{self, rate_table, ExperimentConfig, ModelSpec};
use dac_core::{encode, hmm, DacParams, Decoder, Execution, HmmModel};

use formats::SequenceFormat;

#[derive(Parser)]
#[command(name = "dac", version, about = "Distributed arithmetic coding with hidden Markov side information")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a binary sequence file into a codeword file.
    Encode(EncodeArgs),
    /// Decode a codeword file using side information.
    Decode(DecodeArgs),
    /// Generate X, Z and Y = X xor Z sequence files.
    Gen(GenArgs),
    /// Estimate the entropy rate of the residual model.
    Entropy(EntropyArgs),
    /// Run the gamma-ladder rate experiment.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct CodecArgs {
    /// Bias probability P(x = 1).
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Overlap factor in (0, 1].
    #[arg(long)]
    gamma: f64,
    /// Trailing symbols coded without overlap.
    #[arg(long = "T", alias = "tail", default_value_t = 15)]
    tail: usize,
    /// Register precision in bits.
    #[arg(long, default_value_t = dac_core::arith::DEFAULT_PRECISION)]
    precision: u32,
}

impl CodecArgs {
    fn params(&self, max_branches: usize) -> anyhow::Result<DacParams> {
        Ok(DacParams::new(self.p, self.gamma, max_branches, self.tail)?.with_precision(self.precision)?)
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Tabulated model id (1-4).
    #[arg(long, conflicts_with_all = ["model_file", "a00"])]
    model: Option<u32>,
    /// TOML model file.
    #[arg(long)]
    model_file: Option<PathBuf>,
    #[arg(long, requires_all = ["a11", "b00", "b11"], conflicts_with = "model_file")]
    a00: Option<f64>,
    #[arg(long, requires = "a00")]
    a11: Option<f64>,
    #[arg(long, requires = "a00")]
    b00: Option<f64>,
    #[arg(long, requires = "a00")]
    b11: Option<f64>,
}

fn table_model(id: u32) -> anyhow::Result<ModelSpec> {
    ModelSpec::by_id(id).ok_or_else(|| anyhow!("unknown model {id}; expected 1-4"))
}

impl ModelArgs {
    fn resolve(&self) -> anyhow::Result<HmmModel> {
        if let Some(id) = self.model {
            return Ok(table_model(id)?.hmm()?);
        }
        if let Some(path) = &self.model_file {
            return model_file::read_model(path);
        }
        match (self.a00, self.a11, self.b00, self.b11) {
            (Some(a00), Some(a11), Some(b00), Some(b11)) => {
                Ok(ModelSpec { id: 0, a00, a11, b00, b11 }.hmm()?)
            }
            _ => bail!("a model is required: --model, --model-file, or --a00 --a11 --b00 --b11"),
        }
    }
}

#[derive(Args)]
struct EncodeArgs {
    /// Source sequence file (text or SEQ1).
    #[arg(long, short)]
    input: PathBuf,
    /// Codeword output file.
    #[arg(long, short)]
    output: PathBuf,
    #[command(flatten)]
    codec: CodecArgs,
}

#[derive(Args)]
struct DecodeArgs {
    /// Codeword file (DAC1).
    #[arg(long)]
    codeword: PathBuf,
    /// Side-information sequence file.
    #[arg(long = "si")]
    side_info: PathBuf,
    /// Decoded sequence output file.
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = SequenceFormat::Text)]
    format: SequenceFormat,
    /// Maximum surviving branches.
    #[arg(long = "M", alias = "max-branches", default_value_t = 2048)]
    max_branches: usize,
    #[command(flatten)]
    codec: CodecArgs,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    z: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long, value_enum, default_value_t = SequenceFormat::Text)]
    format: SequenceFormat,
}

#[derive(Args)]
struct EntropyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Comma-separated model ids.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    models: Vec<u32>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long = "N", default_value_t = 1024)]
    n: usize,
    #[arg(long = "M", default_value_t = 2048)]
    max_branches: usize,
    #[arg(long = "T", default_value_t = 15)]
    tail: usize,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Master seed; per-trial seeds derive from it.
    #[arg(long, default_value_t = ExperimentConfig::default().master_seed)]
    seed: u64,
    /// Sample length for the entropy estimate that sets the starting gamma.
    #[arg(long, default_value_t = 1_000_000)]
    entropy_samples: usize,
    /// Per-trial CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-model summary CSV output.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Run trials on one thread.
    #[arg(long)]
    sequential: bool,
}

fn cmd_encode(args: &EncodeArgs) -> anyhow::Result<()> {
    let x = formats::read_sequence(&args.input)?;
    let params = args.codec.params(1)?;
    let cw = encode(&x, &params)?;
    formats::write_codeword(&args.output, &cw)?;
    println!(
        "rate {:.6} bits/symbol ({} bits for {} symbols)",
        cw.rate(),
        cw.n_bits(),
        cw.n_symbols
    );
    Ok(())
}

fn cmd_decode(args: &DecodeArgs) -> anyhow::Result<()> {
    let cw = formats::read_codeword(&args.codeword)?;
    let y = formats::read_sequence(&args.side_info)?;
    let model = args.model.resolve()?;
    let params = args.codec.params(args.max_branches)?;
    let out = Decoder::new(&model, params)?.decode(&cw, &y)?;
    formats::write_sequence(&args.output, &out.symbols, args.format)?;
    if !out.consistent {
        eprintln!("warning: no surviving hypothesis reproduces the codeword termination");
    }
    println!("decoded {} symbols, log2-likelihood {:.4}", out.symbols.len(), out.metric);
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> anyhow::Result<()> {
    if args.n == 0 {
        bail!("--n must be positive");
    }
    if !(args.p > 0.0 && args.p < 1.0) {
        bail!("--p must lie in (0, 1)");
    }
    let model = args.model.resolve()?;
    let (x, z, y) = experiments::generate(&model, args.p, args.n, args.seed);
    for (path, seq) in [(&args.x, &x), (&args.z, &z), (&args.y, &y)] {
        formats::write_sequence(path, seq, args.format)?;
    }
    Ok(())
}

fn cmd_entropy(args: &EntropyArgs) -> anyhow::Result<()> {
    let model = args.model.resolve()?;
    let h = hmm::entropy_rate(&model, args.n, args.seed)?;
    println!("{h:.6}");
    Ok(())
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| path.display().to_string())?,
    ))
}

fn cmd_experiment(args: &ExperimentArgs) -> anyhow::Result<()> {
    let models = args
        .models
        .iter()
        .map(|&id| table_model(id))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let config = ExperimentConfig {
        p: args.p,
        n: args.n,
        max_branches: args.max_branches,
        tail: args.tail,
        trials: args.trials,
        master_seed: args.seed,
        entropy_samples: args.entropy_samples,
        execution: if args.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        ..ExperimentConfig::default()
    };
    let table = rate_table(&models, &config)?;
    if let Some(path) = &args.out {
        table.write_trials_csv(create(path)?)?;
    }
    if let Some(path) = &args.summary {
        table.write_summary_csv(create(path)?)?;
    }
    print!("{table}");
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<dac_core::Error>() {
        Some(dac_core::Error::NoSuccess { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Entropy(a) => cmd_entropy(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
