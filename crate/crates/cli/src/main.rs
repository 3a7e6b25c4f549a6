//! Benchmark CLI: replay streams through the sliding-window algorithms,
//! generate synthetic streams, and run the verification suite.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use smdk::element::{Element, Payload};
use smdk::harness::{
    run_experiment, Algorithm, CostSpec, ExperimentConfig, GenSpec, IngestFormat, StreamSource,
    UtilityKind,
};

#[derive(Parser)]
#[command(
    name = "smdk",
    about = "Streaming submodular maximization under d-knapsack constraints over sliding windows",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Replay a stream in window slides and write per-slide metrics CSV.
    Run(RunArgs),
    /// Generate a synthetic stream as JSONL (plus a vocabulary sidecar for
    /// token streams).
    Gen(GenArgs),
    /// Run the verification suite (all criteria, or a subset from a config
    /// file).
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Algorithm: ks | kw | kwplus | ceg | brute
    #[arg(long)]
    algo: String,
    /// Utility function: coverage | ivm | bmc | modular
    #[arg(long)]
    utility: String,
    /// Sliding-window size W
    #[arg(long)]
    window: usize,
    /// Elements per slide T (default: 0.01% of W, at least 1)
    #[arg(long)]
    slide: Option<usize>,
    /// Checkpoint interval L for kw (default: ceil(sqrt(W*T)))
    #[arg(long)]
    interval: Option<u64>,
    /// Estimate-grid resolution
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// Checkpoint pruning aggressiveness for kwplus
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Buffer admission fraction for kwplus
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Buffer capacity per candidate for kwplus
    #[arg(long, default_value_t = 20)]
    eta: usize,
    /// Knapsack dimension
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// IVM regularization
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// IVM kernel bandwidth
    #[arg(long, default_value_t = 0.75)]
    bandwidth: f64,
    /// Input stream file (jsonl or csv)
    #[arg(long, conflicts_with = "gen")]
    input: Option<PathBuf>,
    /// Input format
    #[arg(long, default_value = "jsonl")]
    format: String,
    /// Synthetic generator spec, e.g. "vectors,n=10000,dim=5,costs=iid(0.02,0.08)"
    #[arg(long)]
    gen: Option<String>,
    /// Cost scheme for records without explicit costs,
    /// e.g. "uniform(20);length(20,5)"
    #[arg(long)]
    costs: Option<String>,
    /// Vocabulary file (`word<TAB>probability`) for coverage ingestion
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Stream seed (costs, generation)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Metrics CSV path ("-" for stdout)
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct GenArgs {
    /// Generator spec, e.g. "tokens,n=1000,vocab=500,len=8,costs=uniform(20)"
    #[arg(long)]
    spec: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSONL path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Optional JSON config: {"criteria": [1, 2, ...]}
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize)]
struct VerifyConfig {
    criteria: Vec<u32>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Gen(args) => gen(args),
        Command::Verify(args) => verify(args),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let source = match (&args.input, &args.gen) {
        (Some(path), None) => StreamSource::File {
            path: path.clone(),
            format: args.format.parse::<IngestFormat>()?,
        },
        (None, Some(spec)) => StreamSource::Generated(GenSpec::parse(spec)?),
        (None, None) => bail!("provide an input stream with --input PATH or --gen SPEC"),
        (Some(_), Some(_)) => unreachable!("clap rejects --input with --gen"),
    };
    let mut config = ExperimentConfig::new(
        args.algo.parse::<Algorithm>()?,
        args.utility.parse::<UtilityKind>()?,
        args.window,
        source,
    );
    if let Some(slide) = args.slide {
        config.slide = slide;
    }
    config.interval = args.interval;
    config.lambda = args.lambda;
    config.beta = args.beta;
    config.alpha = args.alpha;
    config.eta = args.eta;
    config.d = args.d;
    config.sigma = args.sigma;
    config.bandwidth = args.bandwidth;
    config.seed = args.seed;
    config.costs = args.costs.as_deref().map(CostSpec::parse).transpose()?;
    config.vocab = args.vocab;

    let outcome = if args.out == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        run_experiment(&config, &mut lock)?
    } else {
        let file = File::create(&args.out)
            .with_context(|| format!("cannot create output file {}", args.out))?;
        let mut writer = BufWriter::new(file);
        let outcome = run_experiment(&config, &mut writer)?;
        writer.flush()?;
        outcome
    };
    eprintln!(
        "{} slides; mean utility {:.4}; mean {:.1} us/slide; max {} checkpoints; max {} stored elements",
        outcome.summary.slides,
        outcome.summary.mean_utility,
        outcome.summary.mean_micros,
        outcome.summary.max_checkpoints,
        outcome.summary.max_stored_elements,
    );
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let spec = GenSpec::parse(&args.spec)?;
    let elements = spec.generate(args.seed)?;
    let file = File::create(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut writer = BufWriter::new(file);
    for element in &elements {
        let record = element_record(element)?;
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    eprintln!("wrote {} elements to {}", elements.len(), args.out.display());

    if let Some(vocabulary) = spec.vocabulary() {
        let vocab_path = args.out.with_extension("vocab");
        let mut vocab_file = BufWriter::new(File::create(&vocab_path)?);
        for (word, p) in vocabulary {
            writeln!(vocab_file, "{word}\t{p}")?;
        }
        vocab_file.flush()?;
        eprintln!("wrote vocabulary to {}", vocab_path.display());
    }
    Ok(())
}

/// Generated elements serialize in the ingestion record shape, so a
/// generated file feeds straight back into `run --input`.
fn element_record(element: &Element) -> Result<serde_json::Value> {
    let payload = match element.payload() {
        Payload::Value(v) => serde_json::json!({ "value": v }),
        Payload::Features(v) => serde_json::json!({ "features": v.as_slice() }),
        Payload::Items(items) => serde_json::json!({ "items": items.as_slice() }),
        Payload::Tokens(bag) => {
            let mut map = serde_json::Map::new();
            for (id, count) in bag.iter() {
                map.insert(format!("w{id}"), serde_json::json!(count));
            }
            serde_json::json!({ "tokens": map })
        }
    };
    Ok(serde_json::json!({
        "payload": payload,
        "costs": element.costs(),
    }))
}

fn verify(args: VerifyArgs) -> Result<()> {
    let ids = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let config: VerifyConfig = serde_json::from_str(&text)?;
            config.criteria
        }
        None => smdk::acceptance::all_ids(),
    };
    let reports = smdk::acceptance::run(&ids);
    let mut failed = 0;
    for report in &reports {
        println!("{}", report.line());
        if !report.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        bail!("{failed} criterion(s) failed");
    }
    Ok(())
}
