//! Command-line front end: detect, train-contrastive, train, evaluate,
//! features, report.
//!
//! Every failure path prints a machine-readable error JSON on stderr and
//! maps onto a stable exit code: 0 success, 2 configuration, 3 data,
//! 4 provider, 5 internal.

use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use involvement::checkpoint::{Checkpoint, CheckpointError};
use involvement::config::{ConfigError, TrainConfig};
use involvement::contrastive::{
    self, ContrastiveError, ContrastiveTrainConfig, ProjectionHead,
};
use involvement::corpus::{
    self, CorpusError, DatasetFormat, Document, SegmentMode,
};
use involvement::embedding::{
    CachedProvider, EmbeddingError, EmbeddingProvider, LocalHashProvider, Pooling, RemoteProvider,
};
use involvement::eval::{self, EvalError};
use involvement::fusion::{self, Detector, FusionError, PreparedDocument};
use involvement::llm::{ChatClient, LlmEngine, LlmError};
use involvement::lowlevel::{self, NormStats};
use involvement::report::{self, LevelBands, ReportError};
use involvement::tensor::ParamStore;

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_PROVIDER: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

#[derive(Debug)]
struct CliError {
    code: u8,
    kind: &'static str,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, kind: "config", message: message.into() }
    }
    fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, kind: "data", message: message.into() }
    }
    fn provider(message: impl Into<String>) -> Self {
        Self { code: EXIT_PROVIDER, kind: "provider", message: message.into() }
    }
    fn internal(message: impl Into<String>) -> Self {
        Self { code: EXIT_INTERNAL, kind: "internal", message: message.into() }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::config(e.to_string())
    }
}
impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        Self::data(e.to_string())
    }
}
impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        Self::data(e.to_string())
    }
}
impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        Self::data(e.to_string())
    }
}
impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> Self {
        Self::data(e.to_string())
    }
}
impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        Self::provider(e.to_string())
    }
}
impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        Self::provider(e.to_string())
    }
}
impl From<ContrastiveError> for CliError {
    fn from(e: ContrastiveError) -> Self {
        match e {
            ContrastiveError::Embedding(_) | ContrastiveError::Llm(_) => {
                Self::provider(e.to_string())
            }
            ContrastiveError::Io(_) | ContrastiveError::Schema { .. }
            | ContrastiveError::EmptyDataset => Self::data(e.to_string()),
            _ => Self::internal(e.to_string()),
        }
    }
}
impl From<FusionError> for CliError {
    fn from(e: FusionError) -> Self {
        match e {
            FusionError::Embedding(_) | FusionError::Llm(_) => Self::provider(e.to_string()),
            FusionError::ModelNotLoaded(_)
            | FusionError::EmptyDocument
            | FusionError::EmptyDataset
            | FusionError::MissingLabel { .. }
            | FusionError::Checkpoint(_) => Self::data(e.to_string()),
            FusionError::Contrastive(inner) => Self::from(inner),
            _ => Self::internal(e.to_string()),
        }
    }
}
impl From<involvement::tensor::TensorError> for CliError {
    fn from(e: involvement::tensor::TensorError) -> Self {
        Self::internal(e.to_string())
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::data(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "involvement", version, about = "Sentence-level detection of LLM involvement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Html,
}

#[derive(Args, Clone)]
struct ProviderArgs {
    /// Use the deterministic offline embedding provider and rule-based
    /// text generators instead of a remote service.
    #[arg(long)]
    offline: bool,
    /// Base URL of the chat/embedding service (required unless --offline).
    #[arg(long)]
    provider_url: Option<String>,
    /// Model name for remote chat completions.
    #[arg(long, default_value = "default")]
    provider_model: String,
    /// Directory for the response and embedding caches.
    #[arg(long, env = "INVOLVEMENT_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
}

impl ProviderArgs {
    fn engine(&self) -> Result<LlmEngine, CliError> {
        let mut engine = if self.offline {
            LlmEngine::offline()
        } else {
            let url = self.provider_url.as_deref().ok_or_else(|| {
                CliError::config("--provider-url is required unless --offline is set")
            })?;
            LlmEngine::remote(ChatClient::new(url, &self.provider_model))
        };
        if let Some(dir) = &self.cache_dir {
            engine = engine.with_cache_dir(dir.join("llm"))?;
        }
        Ok(engine)
    }

    fn provider(&self, dim: usize, seed: u64) -> Result<Box<dyn EmbeddingProvider>, CliError> {
        let inner: Box<dyn EmbeddingProvider> = if self.offline {
            Box::new(LocalHashProvider::new(dim, seed))
        } else {
            let url = self.provider_url.as_deref().ok_or_else(|| {
                CliError::config("--provider-url is required unless --offline is set")
            })?;
            Box::new(RemoteProvider::new(url, &self.provider_model, dim, Pooling::Mean))
        };
        Ok(match &self.cache_dir {
            Some(dir) => Box::new(CachedProvider::new(inner, dir.join("embed"))?),
            None => inner,
        })
    }
}

#[derive(Args, Clone)]
struct BandArgs {
    /// Mean score at or below which a sentence counts as uninvolved.
    #[arg(long, default_value_t = 0.05)]
    floor: f64,
    #[arg(long, default_value_t = 0.25)]
    band_low: f64,
    #[arg(long, default_value_t = 0.5)]
    band_medium: f64,
    #[arg(long, default_value_t = 0.75)]
    band_high: f64,
}

impl BandArgs {
    fn bands(&self) -> LevelBands {
        LevelBands {
            floor: self.floor,
            low: self.band_low,
            medium: self.band_medium,
            high: self.band_high,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Score every sentence of a document with a trained model.
    Detect {
        /// Input text file; stdin when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Model checkpoint produced by `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
        #[command(flatten)]
        bands: BandArgs,
    },
    /// Stage one: train the contrastive projection head on its own.
    TrainContrastive {
        /// Labeled JSONL dataset used to split LLM-leaning and human text.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Checkpoint path for the trained head.
        #[arg(long)]
        out: PathBuf,
        /// Also write the generated quadruples as JSONL.
        #[arg(long)]
        quadruples_out: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Stage two (with stage one first unless a head is supplied): train
    /// the full detector.
    Train {
        #[arg(long)]
        input: PathBuf,
        /// Optional held-out validation dataset.
        #[arg(long)]
        val: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Checkpoint from `train-contrastive`; when given, its head
        /// parameters are copied in and stage one is skipped.
        #[arg(long)]
        contrastive: Option<PathBuf>,
        #[arg(long)]
        model_out: PathBuf,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Score a labeled dataset with a trained model and report metrics.
    Evaluate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        /// Require labels to be exactly 0 or 1 and report accuracy-style
        /// generalization metrics.
        #[arg(long)]
        binary: bool,
        /// Comma-separated thresholds for an accuracy sweep.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Dump per-sentence low-level feature vectors as JSONL.
    Features {
        /// Input text file; stdin when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Print the versioned feature layout manifest instead of vectors.
        #[arg(long)]
        manifest: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Re-render a saved detection report as JSON or HTML.
    Report {
        /// A DetectionReport JSON file produced by `detect`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Html)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = serde_json::json!({
                "error": { "kind": e.kind, "message": e.message, "exit_code": e.code }
            });
            eprintln!("{payload}");
            ExitCode::from(e.code)
        }
    }
}

fn read_input(input: Option<&Path>) -> Result<String, CliError> {
    match input {
        Some(path) => Ok(std::fs::read_to_string(path)?),
        None => {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text)?;
            Ok(text)
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<TrainConfig, CliError> {
    let mut config = match path {
        Some(p) => TrainConfig::load(p)?,
        None => TrainConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn fit_norm_stats(docs: &[Document]) -> NormStats {
    let vectors: Vec<_> = docs
        .iter()
        .flat_map(|d| d.sentences.iter())
        .map(lowlevel::extract)
        .collect();
    NormStats::fit(&vectors)
}

fn prepare_all(
    docs: &[Document],
    provider: &dyn EmbeddingProvider,
    engine: &LlmEngine,
    stats: &NormStats,
) -> Result<Vec<PreparedDocument>, CliError> {
    docs.iter()
        .map(|d| fusion::prepare_document(d, provider, engine, stats).map_err(CliError::from))
        .collect()
}

/// Split a labeled corpus into contrastive pools: sentences whose mean
/// label crosses 0.5 anchor quadruples, the rest serve as human negatives.
fn contrastive_pools(docs: &[Document]) -> (Vec<(String, String)>, Vec<String>) {
    let mut llm = Vec::new();
    let mut human = Vec::new();
    for doc in docs {
        for sentence in &doc.sentences {
            let Some(labels) = sentence.labels else { continue };
            if labels.mean() >= 0.5 {
                llm.push((format!("{}-{}", doc.id, sentence.index), sentence.text.clone()));
            } else {
                human.push(sentence.text.clone());
            }
        }
    }
    (llm, human)
}

fn train_head_on(
    docs: &[Document],
    store: &mut ParamStore,
    head: &ProjectionHead,
    config: &TrainConfig,
    engine: &LlmEngine,
    provider: &dyn EmbeddingProvider,
    quadruples_out: Option<&Path>,
) -> Result<Vec<f64>, CliError> {
    let (llm_texts, human_texts) = contrastive_pools(docs);
    if llm_texts.is_empty() || human_texts.is_empty() {
        return Err(CliError::data(
            "contrastive training needs both LLM-leaning and human sentences in the dataset",
        ));
    }
    let quadruples = contrastive::build_quadruples(&llm_texts, &human_texts, engine, config.seed)?;
    if let Some(path) = quadruples_out {
        contrastive::save_quadruples(path, &quadruples)?;
    }
    let embedded: Vec<_> = quadruples
        .iter()
        .map(|q| contrastive::embed_quadruple(q, provider))
        .collect::<Result<_, _>>()?;
    let train_config = ContrastiveTrainConfig {
        alpha: config.alpha,
        lr: config.lr,
        weight_decay: config.weight_decay,
        epochs: config.epochs,
        batch_size: config.batch_train,
        step_size: config.step_size,
        gamma: config.gamma,
        seed: config.seed,
    };
    Ok(contrastive::train_contrastive(&embedded, head, store, &train_config)?)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Detect { input, model, format, output, provider, bands } => {
            let bands = bands.bands();
            bands.validate()?;
            let detector = Detector::load(&model)?;
            let raw = read_input(input.as_deref())?;
            let doc = corpus::segment_document(&raw, SegmentMode::RuleBased)?;
            let engine = provider.engine()?;
            let embedder =
                provider.provider(detector.config.d_model, detector.config.seed)?;
            let prepared =
                fusion::prepare_document(&doc, embedder.as_ref(), &engine, &detector.norm_stats)?;
            let scores = detector.predict_document(&prepared)?;
            let report = report::build_report(&doc, &scores, bands)?;
            let rendered = match format {
                Format::Json => report.to_json(),
                Format::Html => report.to_html(),
            };
            emit(output.as_deref(), &rendered)
        }
        Command::TrainContrastive { input, config, seed, out, quadruples_out, provider } => {
            let config = load_config(config.as_deref(), seed)?;
            let docs = corpus::load_labeled_dataset(&input, DatasetFormat::Regression)?;
            let engine = provider.engine()?;
            let embedder = provider.provider(config.d_model, config.seed)?;
            let mut store = ParamStore::new();
            let head =
                ProjectionHead::init(&mut store, config.d_model, config.d_proj, config.seed);
            let curve = train_head_on(
                &docs,
                &mut store,
                &head,
                &config,
                &engine,
                embedder.as_ref(),
                quadruples_out.as_deref(),
            )?;
            Checkpoint::new(store)
                .with_metadata("kind", serde_json::json!("contrastive-head"))
                .with_metadata("config", serde_json::to_value(&config).expect("config"))
                .with_metadata("config_hash", serde_json::json!(config.content_hash()))
                .with_metadata("seed", serde_json::json!(config.seed))
                .save(&out)?;
            let summary = serde_json::json!({
                "command": "train-contrastive",
                "config": config,
                "config_hash": config.content_hash(),
                "seed": config.seed,
                "epochs": curve.len(),
                "first_loss": curve.first(),
                "final_loss": curve.last(),
                "checkpoint": out,
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary"));
            Ok(())
        }
        Command::Train { input, val, config, seed, contrastive: head_ckpt, model_out, provider } => {
            let config = load_config(config.as_deref(), seed)?;
            let train_docs = corpus::load_labeled_dataset(&input, DatasetFormat::Regression)?;
            let val_docs = match &val {
                Some(path) => corpus::load_labeled_dataset(path, DatasetFormat::Regression)?,
                None => Vec::new(),
            };
            let engine = provider.engine()?;
            let embedder = provider.provider(config.d_model, config.seed)?;
            let stats = fit_norm_stats(&train_docs);
            let mut detector = Detector::init(&config, stats)?;
            let contrastive_curve = match &head_ckpt {
                Some(path) => {
                    let checkpoint = Checkpoint::load(path)?;
                    for (path, param) in checkpoint.params.iter() {
                        if path.starts_with(contrastive::HEAD_PREFIX) {
                            detector.store.get_mut(path)?.value = param.value.clone();
                        }
                    }
                    Vec::new()
                }
                None => {
                    // The head trains in its own store so the optimizer only
                    // sees contrastive parameters; weights are copied back in.
                    let mut head_store = ParamStore::new();
                    let head = ProjectionHead::init(
                        &mut head_store,
                        config.d_model,
                        config.d_proj,
                        config.seed,
                    );
                    let curve = train_head_on(
                        &train_docs,
                        &mut head_store,
                        &head,
                        &config,
                        &engine,
                        embedder.as_ref(),
                        None,
                    )?;
                    for (path, param) in head_store.iter() {
                        detector.store.get_mut(path)?.value = param.value.clone();
                    }
                    curve
                }
            };
            let prepared_train =
                prepare_all(&train_docs, embedder.as_ref(), &engine, &detector.norm_stats)?;
            let prepared_val =
                prepare_all(&val_docs, embedder.as_ref(), &engine, &detector.norm_stats)?;
            let outcome = fusion::train(&mut detector, &prepared_train, &prepared_val)?;
            detector.save(&model_out)?;
            let summary = serde_json::json!({
                "command": "train",
                "config": config,
                "config_hash": config.content_hash(),
                "seed": config.seed,
                "contrastive_epochs": contrastive_curve.len(),
                "best_epoch": outcome.best_epoch,
                "best_val_mae": outcome.best_val_mae,
                "final_train_loss": outcome.history.last().map(|m| m.train_loss),
                "checkpoint": model_out,
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary"));
            Ok(())
        }
        Command::Evaluate { input, model, threshold, binary, sweep, output, provider } => {
            let detector = Detector::load(&model)?;
            let threshold = threshold.unwrap_or(detector.config.threshold);
            if !(threshold > 0.0 && threshold < 1.0) {
                return Err(CliError::config(format!(
                    "--threshold must lie in (0,1), got {threshold}"
                )));
            }
            let docs = corpus::load_labeled_dataset(
                &input,
                if binary { DatasetFormat::Binary } else { DatasetFormat::Regression },
            )?;
            let engine = provider.engine()?;
            let embedder =
                provider.provider(detector.config.d_model, detector.config.seed)?;
            let mut preds = Vec::new();
            let mut labels = Vec::new();
            for doc in &docs {
                let prepared =
                    fusion::prepare_document(doc, embedder.as_ref(), &engine, &detector.norm_stats)?;
                let scores = detector.predict_document(&prepared)?;
                for (score, sentence) in scores.iter().zip(&doc.sentences) {
                    let label = sentence.labels.ok_or_else(|| {
                        CliError::data(format!("document {} has an unlabeled sentence", doc.id))
                    })?;
                    preds.push(score.as_array());
                    labels.push(label.as_array());
                }
            }
            let metrics = if binary {
                eval::binary_generalization_eval(&preds, &labels, threshold)?
            } else {
                eval::regression_metrics(&preds, &labels, threshold)?
            };
            let sweep_json = if sweep.is_empty() {
                serde_json::Value::Null
            } else {
                let table = eval::threshold_sweep(&preds, &labels, &sweep)?;
                serde_json::json!({ "csv": table.to_csv(), "plot": table.to_plot_json() })
            };
            let payload = serde_json::json!({
                "command": "evaluate",
                "metrics": metrics,
                "threshold": threshold,
                "binary": binary,
                "sweep": sweep_json,
                "config_hash": detector.config.content_hash(),
                "seed": detector.config.seed,
            });
            emit(
                output.as_deref(),
                &serde_json::to_string_pretty(&payload).expect("metrics"),
            )
        }
        Command::Features { input, manifest, output } => {
            if manifest {
                let manifest = lowlevel::layout_manifest();
                return emit(
                    output.as_deref(),
                    &serde_json::to_string_pretty(&manifest).expect("manifest"),
                );
            }
            let raw = read_input(input.as_deref())?;
            let doc = corpus::segment_document(&raw, SegmentMode::RuleBased)?;
            let mut lines = String::new();
            for sentence in &doc.sentences {
                let vector = lowlevel::extract(sentence);
                let row = serde_json::json!({
                    "index": sentence.index,
                    "text": sentence.text,
                    "values": vector.values,
                    "layout_hash": lowlevel::layout_hash(),
                });
                lines.push_str(&row.to_string());
                lines.push('\n');
            }
            emit(output.as_deref(), lines.trim_end())
        }
        Command::Report { input, format, output } => {
            let text = std::fs::read_to_string(&input)?;
            let report: report::DetectionReport = serde_json::from_str(&text)
                .map_err(|e| CliError::data(format!("cannot parse report: {e}")))?;
            let rendered = match format {
                Format::Json => report.to_json(),
                Format::Html => report.to_html(),
            };
            emit(output.as_deref(), &rendered)
        }
    }
}
