mod config;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use tsetlin_index::bench::{emit_report, run_experiment, Experiment, ReportFormat, Workload};
use tsetlin_index::data::synthetic::noisy_xor;
use tsetlin_index::data::{
    binarize_images, load_dataset, load_idx_images, load_idx_labels, save_dataset, vectorize_text,
    BinarizeSpec, BoolDataset, Vocabulary,
};
use tsetlin_index::persist::save_model;
use tsetlin_index::verify::{verify, VerifyOptions};
use tsetlin_index::{Backend, Machine};

#[derive(Debug, Parser)]
#[command(
    name = "tmbench",
    version,
    about = "Train and benchmark Tsetlin machines with direct and indexed clause evaluation",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// key=value file mirroring any flag below
    #[arg(long, global = true, env = "TMBENCH_CONFIG")]
    config: Option<PathBuf>,

    /// Dataset files (comma separated); `synthetic:xor[:FEATURES]` generates noisy XOR
    #[arg(long, global = true, value_delimiter = ',', env = "TMBENCH_DATASET")]
    dataset: Vec<String>,

    /// Test split for each dataset, in the same order; defaults to the training split
    #[arg(
        long = "test-dataset",
        global = true,
        value_delimiter = ',',
        env = "TMBENCH_TEST_DATASET"
    )]
    test_dataset: Vec<String>,

    /// Clauses per class (comma separated grid)
    #[arg(long, global = true, value_delimiter = ',', env = "TMBENCH_CLAUSES")]
    clauses: Vec<usize>,

    /// Grey levels per pixel when binarizing images
    #[arg(long, global = true, env = "TMBENCH_BITS")]
    bits: Option<usize>,

    /// Vocabulary size when vectorizing text
    #[arg(long, global = true, env = "TMBENCH_FEATURES")]
    features: Option<usize>,

    #[arg(long, global = true, env = "TMBENCH_EPOCHS")]
    epochs: Option<usize>,

    #[arg(long, global = true, env = "TMBENCH_REPS")]
    reps: Option<usize>,

    #[arg(long, global = true, value_enum, env = "TMBENCH_BACKEND")]
    backend: Option<BackendArg>,

    #[arg(long, global = true, env = "TMBENCH_SEED")]
    seed: Option<u64>,

    /// Vote threshold T (default: 15 for synthetic data, clauses/25 otherwise)
    #[arg(long = "T", global = true, env = "TMBENCH_T")]
    threshold: Option<u32>,

    /// Specificity s
    #[arg(long = "s", global = true, env = "TMBENCH_S")]
    specificity: Option<f64>,

    #[arg(long, global = true, env = "TMBENCH_OUT")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, env = "TMBENCH_FORMAT")]
    format: Option<FormatArg>,

    /// Input file for `binarize` (IDX images or label<TAB>text lines)
    #[arg(long, global = true, env = "TMBENCH_INPUT")]
    input: Option<PathBuf>,

    /// IDX label file for `binarize`
    #[arg(long, global = true, env = "TMBENCH_LABELS")]
    labels: Option<PathBuf>,

    /// Class count for `binarize` (default: largest label + 1)
    #[arg(long, global = true, env = "TMBENCH_CLASSES")]
    classes: Option<usize>,

    /// Vocabulary file: loaded if present, otherwise written after building
    #[arg(long, global = true, env = "TMBENCH_VOCAB")]
    vocab: Option<PathBuf>,

    /// Random instances per `verify` suite
    #[arg(long, global = true, env = "TMBENCH_INSTANCES")]
    instances: Option<usize>,

    /// Corrupt one index entry before `verify` checks run
    #[arg(long = "inject-fault", global = true, env = "TMBENCH_INJECT_FAULT")]
    inject_fault: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one machine and report per-epoch accuracy
    Train,
    /// Time training and inference across a clause grid
    Bench,
    /// Check indexed evaluation and index maintenance against direct evaluation
    Verify,
    /// Convert IDX images or text into a binary dataset file
    Binarize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Direct,
    Indexed,
    Both,
}

impl BackendArg {
    fn backends(self) -> Vec<Backend> {
        match self {
            BackendArg::Direct => vec![Backend::Direct],
            BackendArg::Indexed => vec![Backend::Indexed],
            BackendArg::Both => vec![Backend::Direct, Backend::Indexed],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

const XOR_EXAMPLES: usize = 5000;
const XOR_NOISE: f64 = 0.1;
const XOR_FEATURES: usize = 12;

fn dataset_id(spec: &str) -> String {
    if spec.starts_with("synthetic:") {
        return spec.to_owned();
    }
    Path::new(spec)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_owned())
}

/// Loads a dataset file or generates a synthetic one. Synthetic test
/// splits are noise free.
fn open_dataset(spec: &str, seed: u64, test: bool) -> Result<BoolDataset> {
    if let Some(rest) = spec.strip_prefix("synthetic:") {
        let mut parts = rest.split(':');
        match parts.next() {
            Some("xor") => {}
            _ => bail!("unknown synthetic dataset {spec:?}; try synthetic:xor"),
        }
        let features = match parts.next() {
            Some(f) => f
                .parse()
                .with_context(|| format!("feature count in {spec:?}"))?,
            None => XOR_FEATURES,
        };
        let (noise, stream) = if test { (0.0, 1) } else { (XOR_NOISE, 0) };
        return Ok(noisy_xor(
            XOR_EXAMPLES,
            features,
            noise,
            seed.wrapping_mul(2).wrapping_add(stream),
        )?);
    }
    load_dataset(spec).with_context(|| format!("loading dataset {spec}"))
}

fn workloads(cli: &Cli, seed: u64) -> Result<Vec<Workload>> {
    if cli.dataset.is_empty() {
        bail!("--dataset is required");
    }
    if !cli.test_dataset.is_empty() && cli.test_dataset.len() != cli.dataset.len() {
        bail!(
            "{} datasets but {} test datasets",
            cli.dataset.len(),
            cli.test_dataset.len()
        );
    }
    cli.dataset
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let train = open_dataset(spec, seed, false)?;
            let test = match cli.test_dataset.get(i) {
                Some(t) => open_dataset(t, seed, true)?,
                None if spec.starts_with("synthetic:") => open_dataset(spec, seed, true)?,
                None => train.clone(),
            };
            Ok(Workload::new(dataset_id(spec), train, test)?)
        })
        .collect()
}

fn experiment(cli: &Cli, default_backend: BackendArg) -> Experiment {
    let d = Experiment::default();
    Experiment {
        clauses: if cli.clauses.is_empty() {
            d.clauses
        } else {
            cli.clauses.clone()
        },
        epochs: cli.epochs.unwrap_or(d.epochs),
        repetitions: cli.reps.unwrap_or(d.repetitions),
        backends: cli.backend.unwrap_or(default_backend).backends(),
        threshold: cli.threshold,
        specificity: cli.specificity.unwrap_or(d.specificity),
        half_range: d.half_range,
        seed: cli.seed.unwrap_or(d.seed),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_bench(cli: &Cli) -> Result<()> {
    let exp = experiment(cli, BackendArg::Both);
    let loads = workloads(cli, exp.seed)?;
    let report = run_experiment(&exp, &loads)?;
    let format = match cli.format.unwrap_or(FormatArg::Csv) {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Markdown => ReportFormat::Markdown,
    };
    emit_report(&report, format, output(cli.out.as_deref())?)?;
    if let Some(out) = &cli.out {
        let mut meta = out.clone().into_os_string();
        meta.push(".meta");
        fs::write(&meta, report.metadata.to_text())?;
    }
    eprint!("{}", report.metadata.to_text());
    Ok(())
}

fn cmd_train(cli: &Cli) -> Result<()> {
    if cli.dataset.len() != 1 {
        bail!("train takes exactly one --dataset");
    }
    let exp = experiment(cli, BackendArg::Indexed);
    if exp.backends.len() != 1 {
        bail!("train takes a single backend (direct or indexed)");
    }
    if exp.clauses.len() != 1 {
        bail!("train takes a single --clauses value");
    }
    exp.validate()?;
    let load = workloads(cli, exp.seed)?.remove(0);
    let config = exp.config_for(&load, exp.clauses[0], 0);
    let mut machine = Machine::new(config, exp.backends[0])?;
    let train_rows = load.train.to_dense();
    let test_rows = load.test.to_dense();
    let o = load.features();
    let train_labels: Vec<usize> = load.train.labels().collect();
    let test_labels: Vec<usize> = load.test.labels().collect();
    let epochs = cli.epochs.unwrap_or(10);
    println!("epoch,train_s,test_s,accuracy");
    for epoch in 1..=epochs {
        let start = Instant::now();
        for (x, &y) in train_rows.chunks(o).zip(&train_labels) {
            machine.train_step(x, y)?;
        }
        let train_s = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let mut correct = 0usize;
        for (x, &y) in test_rows.chunks(o).zip(&test_labels) {
            if machine.predict(x)? == y {
                correct += 1;
            }
        }
        let test_s = start.elapsed().as_secs_f64();
        let acc = correct as f64 / test_labels.len().max(1) as f64;
        println!("{epoch},{train_s:.4},{test_s:.4},{acc:.4}");
    }
    if let Some(out) = &cli.out {
        save_model(machine.bank(), out)?;
        eprintln!("model written to {}", out.display());
    }
    Ok(())
}

fn cmd_verify(cli: &Cli) -> Result<bool> {
    let mut opts = VerifyOptions {
        seed: cli.seed.unwrap_or(0),
        inject_fault: cli.inject_fault,
        ..VerifyOptions::default()
    };
    if let Some(n) = cli.instances {
        opts.equivalence_instances = n;
        opts.training_instances = n.div_ceil(10).max(1);
    }
    let report = verify(&opts)?;
    print!("{}", report.summary());
    Ok(report.passed())
}

fn read_text_corpus(path: &Path) -> Result<(Vec<String>, Vec<usize>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (label, doc) = line
            .split_once('\t')
            .ok_or_else(|| anyhow!("line {}: expected label<TAB>text", n + 1))?;
        labels.push(
            label
                .trim()
                .parse()
                .with_context(|| format!("line {}: bad label {label:?}", n + 1))?,
        );
        docs.push(doc.to_owned());
    }
    Ok((docs, labels))
}

fn cmd_binarize(cli: &Cli) -> Result<()> {
    let input = cli
        .input
        .as_deref()
        .ok_or_else(|| anyhow!("--input is required"))?;
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| anyhow!("--out is required"))?;
    let source = input.display().to_string();
    let ds = if let Some(size) = cli.features {
        let (docs, labels) = read_text_corpus(input)?;
        let vocab = match &cli.vocab {
            Some(p) if p.exists() => Vocabulary::load(p)?,
            other => {
                let v = Vocabulary::build(&docs, size)?;
                if let Some(p) = other {
                    v.save(p)?;
                }
                v
            }
        };
        let classes = cli
            .classes
            .unwrap_or_else(|| labels.iter().max().map_or(1, |m| m + 1));
        vectorize_text(&docs, &labels, classes, &vocab, &source)?
    } else {
        let bits = cli.bits.unwrap_or(1);
        let images = load_idx_images(input)?;
        let labels_path = cli
            .labels
            .as_deref()
            .ok_or_else(|| anyhow!("--labels is required for images"))?;
        let labels = load_idx_labels(labels_path)?;
        let classes = cli
            .classes
            .unwrap_or_else(|| labels.iter().max().map_or(1, |&m| m as usize + 1));
        binarize_images(
            &images.pixels,
            images.pixels_per_image(),
            &labels,
            classes,
            &BinarizeSpec::even(bits)?,
            &source,
        )?
    };
    save_dataset(&ds, out)?;
    eprintln!(
        "{} examples, {} features, {} classes -> {}",
        ds.len(),
        ds.features(),
        ds.classes(),
        out.display()
    );
    Ok(())
}

fn run() -> Result<bool> {
    let args = config::expand_args(std::env::args_os().collect())?;
    let cli = Cli::parse_from(args);
    match cli.command {
        Command::Bench => cmd_bench(&cli).map(|_| true),
        Command::Train => cmd_train(&cli).map(|_| true),
        Command::Verify => cmd_verify(&cli),
        Command::Binarize => cmd_binarize(&cli).map(|_| true),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
