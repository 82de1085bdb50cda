//! Thin sequential driver over the core library: experiment runners,
//! single-client sampling, and federation runs. Every run drops a
//! manifest with the fully resolved configuration and hashes of the
//! artifacts it wrote.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 completed
//! with findings (poisoned records or failed clients).

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use streamvol_core::experiments::{
    stability_experiment, summarize, timing_experiment, write_records_csv, write_records_json,
    write_records_jsonl, write_summary_json, ExperimentRecord, StabilityRunSpec, SummaryRow,
    TimingRunSpec,
};
use streamvol_core::rng::sha256_hex;
use streamvol_core::sampler::{SamplerConfig, SelectionDecision, StreamLength};
use streamvol_core::stream::{
    generate_drift_stream, load_embedding_stream, run_client, run_federation, ClientReport,
    ClientSpec, DriftStreamSpec, FederationSpec, StreamSource,
};

#[derive(Parser)]
#[command(name = "streamvol", version, about = "Budgeted stream sampling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace incremental-inverse error against the direct oracle
    Stability(StabilityArgs),
    /// Measure per-update wall time of the three inverse strategies
    Timing(TimingArgs),
    /// Run the sampler over one synthetic or file-backed stream
    Sample(SampleArgs),
    /// Run a multi-client federation from a spec file
    Federate(FederateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Jsonl,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Jsonl => "jsonl",
        }
    }

    fn as_str(self) -> &'static str {
        self.extension()
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Directory for result files
    #[arg(long, env = "STREAMVOL_OUT_DIR", default_value = "streamvol-out")]
    out_dir: PathBuf,
    /// Format for experiment record files
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct StabilityArgs {
    /// JSON run spec; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated dimensions
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct TimingArgs {
    /// JSON run spec; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated dimensions
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Timed updates per repetition
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SampleArgs {
    /// Generate the stream instead of reading a file
    #[arg(long, conflicts_with = "input")]
    synthetic: bool,
    /// Embedding stream file (binary or csv)
    #[arg(long, required_unless_present = "synthetic")]
    input: Option<PathBuf>,
    /// Embedding dimension; for file input this is a cross-check
    #[arg(long)]
    dim: Option<usize>,
    /// Synthetic stream length
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Synthetic class count
    #[arg(long, default_value_t = 10)]
    classes: usize,
    /// Class arrival skew (0 = exchangeable order)
    #[arg(long, default_value_t = 1.5)]
    skew: f64,
    /// Per-step mean drift magnitude
    #[arg(long, default_value_t = 5e-4)]
    drift: f64,
    /// Per-coordinate noise scale
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    /// Labeling budget k
    #[arg(long)]
    budget: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Override the declared stream length
    #[arg(long)]
    stream_length: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct FederateArgs {
    /// Federation spec (JSON)
    spec: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Serialize)]
struct ArtifactEntry {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    format: &'static str,
    config: serde_json::Value,
    artifacts: Vec<ArtifactEntry>,
}

/// Tracks written files so the manifest can hash every artifact.
struct RunDir {
    dir: PathBuf,
    artifacts: Vec<ArtifactEntry>,
}

impl RunDir {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str) -> Result<()> {
        let bytes = fs::read(self.path(name))?;
        self.artifacts.push(ArtifactEntry {
            file: name.to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        fs::write(self.path(name), text + "\n")?;
        self.record(name)
    }

    fn finish(mut self, command: &'static str, format: Format, config: serde_json::Value) -> Result<()> {
        let manifest = Manifest {
            command,
            format: format.as_str(),
            config,
            artifacts: std::mem::take(&mut self.artifacts),
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(self.path("manifest.json"), text + "\n")?;
        Ok(())
    }
}

fn write_records(
    run: &mut RunDir,
    name_stem: &str,
    format: Format,
    records: &[ExperimentRecord],
) -> Result<()> {
    let name = format!("{name_stem}.{}", format.extension());
    let path = run.path(&name);
    match format {
        Format::Csv => write_records_csv(&path, records)?,
        Format::Json => write_records_json(&path, records)?,
        Format::Jsonl => write_records_jsonl(&path, records)?,
    }
    run.record(&name)
}

fn print_summary_table(rows: &[SummaryRow]) {
    println!(
        "{:<12} {:<10} {:>6} {:>14} {:>14} {:>6}",
        "experiment", "method", "dim", "mean", "std", "n"
    );
    for row in rows {
        println!(
            "{:<12} {:<10} {:>6} {:>14.6e} {:>14.6e} {:>6}",
            row.experiment, row.method, row.dim, row.mean, row.std, row.n
        );
    }
}

fn load_spec_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read spec file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn cmd_stability(args: StabilityArgs) -> Result<i32> {
    let mut spec: StabilityRunSpec = match &args.config {
        Some(path) => load_spec_file(path)?,
        None => StabilityRunSpec::default(),
    };
    if let Some(dims) = args.dims {
        spec.dims = dims;
    }
    if let Some(iters) = args.iters {
        spec.iterations = iters;
    }
    if let Some(lambda) = args.lambda {
        spec.lambda = lambda;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }

    let cells = stability_experiment(&spec)?;
    let mut run = RunDir::create(&args.out.out_dir)?;
    let mut all_records = Vec::new();
    let mut poisoned = 0usize;
    for cell in &cells {
        write_records(
            &mut run,
            &format!("stability_{}_{}", cell.dim, spec.seed),
            args.out.format,
            &cell.records,
        )?;
        poisoned += cell.records.iter().filter(|r| r.poisoned).count();
        all_records.extend(cell.records.iter().cloned());
    }
    let summary = summarize(&all_records);
    write_summary_json(&run.path("stability_summary.json"), &summary)?;
    run.record("stability_summary.json")?;
    print_summary_table(&summary);

    run.finish("stability", args.out.format, serde_json::to_value(&spec)?)?;
    if poisoned > 0 {
        eprintln!("note: {poisoned} poisoned records (a method failed and was dropped)");
        return Ok(2);
    }
    Ok(0)
}

fn cmd_timing(args: TimingArgs) -> Result<i32> {
    let mut spec: TimingRunSpec = match &args.config {
        Some(path) => load_spec_file(path)?,
        None => TimingRunSpec::default(),
    };
    if let Some(dims) = args.dims {
        spec.dims = dims;
    }
    if let Some(iters) = args.iters {
        spec.iterations = iters;
    }
    if let Some(warmup) = args.warmup {
        spec.warmup = warmup;
    }
    if let Some(reps) = args.reps {
        spec.repetitions = reps;
    }
    if let Some(lambda) = args.lambda {
        spec.lambda = lambda;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }

    let (records, summary) = timing_experiment(&spec)?;
    let mut run = RunDir::create(&args.out.out_dir)?;
    for &dim in &spec.dims {
        let per_dim: Vec<ExperimentRecord> = records
            .iter()
            .filter(|r| r.dim == dim)
            .cloned()
            .collect();
        write_records(
            &mut run,
            &format!("timing_{dim}_{}", spec.seed),
            args.out.format,
            &per_dim,
        )?;
    }
    write_summary_json(&run.path("timing_summary.json"), &summary)?;
    run.record("timing_summary.json")?;
    print_summary_table(&summary);

    run.finish("timing", args.out.format, serde_json::to_value(&spec)?)?;
    Ok(0)
}

/// Report with the decision trace stripped; the trace lives in its own
/// JSON-lines file.
fn batch_report(report: &ClientReport) -> Result<serde_json::Value> {
    let mut value = serde_json::to_value(report)?;
    value
        .as_object_mut()
        .expect("report serializes to an object")
        .remove("decisions");
    Ok(value)
}

fn write_trace(run: &mut RunDir, name: &str, decisions: &[SelectionDecision]) -> Result<()> {
    let mut text = String::new();
    for decision in decisions {
        text.push_str(&serde_json::to_string(decision)?);
        text.push('\n');
    }
    fs::write(run.path(name), text)?;
    run.record(name)
}

/// Count data lines without holding the file in memory.
fn count_csv_records(path: &Path) -> Result<usize> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    let _header = lines.next();
    let mut n = 0usize;
    for line in lines {
        if !line?.trim().is_empty() {
            n += 1;
        }
    }
    Ok(n)
}

fn cmd_sample(args: SampleArgs) -> Result<i32> {
    let mut run = RunDir::create(&args.out.out_dir)?;

    let (source, dim, declared_len) = if args.synthetic {
        let dim = args.dim.unwrap_or(32);
        let spec = DriftStreamSpec {
            dim,
            num_classes: args.classes,
            length: args.n,
            skew: args.skew,
            drift: args.drift,
            noise: args.noise,
            seed: args.seed,
        };
        (StreamSource::Synthetic(spec), dim, args.n)
    } else {
        let path = args.input.clone().expect("clap enforces input");
        // Resolve the dimension and length up front so a mismatch fails
        // before any sample is consumed.
        let reader = load_embedding_stream(&path, 0)?;
        let file_dim = reader.dim();
        if let Some(flag_dim) = args.dim {
            if flag_dim != file_dim {
                bail!("stream dimension {file_dim} does not match --dim {flag_dim}");
            }
        }
        let declared = match reader.declared_len() {
            Some(n) => n,
            None => count_csv_records(&path)?,
        };
        drop(reader);
        (StreamSource::File { path }, file_dim, declared)
    };

    let length = args.stream_length.unwrap_or(declared_len);
    let mut budget = args.budget;
    if budget > length {
        eprintln!("note: budget {budget} exceeds stream length {length}, clamping");
        budget = length;
    }
    let config = SamplerConfig {
        dim,
        budget,
        stream_length: StreamLength::Known(length),
        lambda: args.lambda,
        seed: args.seed,
    };
    config.validate()?;

    let report = match &source {
        StreamSource::Synthetic(spec) => {
            let stream = generate_drift_stream(spec)?;
            run_client(stream.into_iter().map(Ok), &config)?
        }
        StreamSource::File { path } => {
            let reader = load_embedding_stream(path, 0)?;
            run_client(reader, &config)?
        }
    };

    write_trace(&mut run, &format!("trace_{}.jsonl", args.seed), &report.decisions)?;
    run.write_json(&format!("batch_{}.json", args.seed), &batch_report(&report)?)?;
    println!(
        "observed {} samples, selected {} of budget {}",
        report.observed, report.batch.fill, report.batch.k
    );

    let resolved = ClientSpec {
        client_id: 0,
        source,
        sampler: config,
    };
    run.finish("sample", args.out.format, serde_json::to_value(&resolved)?)?;
    Ok(0)
}

fn cmd_federate(args: FederateArgs) -> Result<i32> {
    let spec: FederationSpec = load_spec_file(&args.spec)?;
    let report = run_federation(&spec)?;

    let mut run = RunDir::create(&args.out.out_dir)?;
    for outcome in &report.clients {
        match (&outcome.report, &outcome.error) {
            (Some(client_report), _) => {
                write_trace(
                    &mut run,
                    &format!("client_{}_trace.jsonl", outcome.client_id),
                    &client_report.decisions,
                )?;
                run.write_json(
                    &format!("client_{}_batch.json", outcome.client_id),
                    &batch_report(client_report)?,
                )?;
            }
            (None, Some(error)) => {
                eprintln!("client {} failed: {error}", outcome.client_id);
            }
            (None, None) => unreachable!("outcome carries a report or an error"),
        }
    }

    // Summary keeps per-client stats but not the full traces.
    let mut summary = serde_json::to_value(&report)?;
    if let Some(clients) = summary
        .get_mut("clients")
        .and_then(serde_json::Value::as_array_mut)
    {
        for client in clients {
            if let Some(r) = client.get_mut("report").filter(|r| !r.is_null()) {
                r.as_object_mut().expect("report object").remove("decisions");
            }
        }
    }
    run.write_json("federation_summary.json", &summary)?;
    println!(
        "{} clients: {} succeeded, {} failed",
        report.num_clients, report.succeeded, report.failed
    );

    run.finish("federate", args.out.format, serde_json::to_value(&spec)?)?;
    Ok(if report.failed > 0 { 2 } else { 0 })
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };

    let outcome = match cli.command {
        Command::Stability(args) => cmd_stability(args),
        Command::Timing(args) => cmd_timing(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Federate(args) => cmd_federate(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
