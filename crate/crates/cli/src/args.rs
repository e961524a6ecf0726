use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "metamix", version, about = "Dataset domain vectors and data-mixture search")]
pub struct Cli {
    /// Cap on worker threads for scoring and classification.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// JSON file of default flag values; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a meta-domain vocabulary from embeddings.
    #[command(subcommand)]
    Vocab(VocabCommand),
    /// Train or apply the built-in meta-domain classifier.
    #[command(subcommand)]
    Classifier(ClassifierCommand),
    /// Compute domain vectors for one or more corpora.
    Vectorize(VectorizeArgs),
    /// Search for a data mixture.
    #[command(subcommand)]
    Mix(MixCommand),
    /// Rank correlations and baselines.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Synthetic worlds with a known loss oracle.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Run the whole pipeline on the bundled synthetic world.
    Demo(DemoArgs),
}

#[derive(Debug, Subcommand)]
pub enum VocabCommand {
    /// Cluster embeddings into k meta-domains.
    Build(VocabBuildArgs),
    /// Best-of-restarts inertia for several k, as CSV.
    Curve(VocabCurveArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct VocabBuildArgs {
    #[arg(long)]
    #[serde(skip)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Corpus whose metadata key defines extra pass-through meta-domains.
    #[arg(long, requires = "passthrough_key")]
    #[serde(skip)]
    pub passthrough_corpus: Option<PathBuf>,
    #[arg(long)]
    pub passthrough_key: Option<String>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct VocabCurveArgs {
    #[arg(long)]
    #[serde(skip)]
    pub embeddings: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub ks: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ClassifierCommand {
    /// Fit on a corpus whose records carry integer labels.
    Train(TrainArgs),
    /// Write per-document probabilities as JSON Lines.
    Predict(PredictArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    #[serde(skip)]
    pub corpus: PathBuf,
    /// Number of meta-domains (classes).
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub l2: f64,
    #[arg(long, default_value_t = 1 << 18)]
    pub buckets: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub orders: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub holdout: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    #[serde(skip)]
    pub corpus: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub model: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["model", "proba"]))]
#[command(group = clap::ArgGroup::new("input").required(true).args(["corpora", "corpus"]))]
pub struct VectorizeArgs {
    /// JSON list of {"name", "path"} objects, or a {name: path} map.
    #[arg(long)]
    #[serde(skip)]
    pub corpora: Option<PathBuf>,
    /// A single corpus; writes one domain-vector record instead of a matrix.
    #[arg(long)]
    #[serde(skip)]
    pub corpus: Option<PathBuf>,
    /// Dataset name recorded for --corpus (default: file stem).
    #[arg(long, requires = "corpus")]
    pub name: Option<String>,
    #[arg(long)]
    #[serde(skip)]
    pub model: Option<PathBuf>,
    /// Probability file, or a directory holding <name>.jsonl per dataset.
    #[arg(long)]
    #[serde(skip)]
    pub proba: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum MixCommand {
    /// Training-free search: minimize distance(V r, v_valid).
    Da2(Da2Args),
    /// Loss-regression search.
    #[command(subcommand)]
    Regress(RegressCommand),
    /// Distance of each mixture in a fixed grid, as CSV.
    Score(ScoreArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceArg {
    Huber,
    L1,
    L2,
    Js,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionArg {
    Mean,
    Sum,
}

#[derive(Debug, Args, Serialize)]
pub struct DistanceArgs {
    #[arg(long, value_enum, default_value_t = DistanceArg::Huber)]
    pub distance: DistanceArg,
    #[arg(long, default_value_t = 0.005)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = ReductionArg::Mean)]
    pub reduction: ReductionArg,
}

#[derive(Debug, Args, Serialize)]
pub struct CandidateArgs {
    /// Number of accepted Dirichlet candidates.
    #[arg(long, default_value_t = 10_000)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 100)]
    pub top_k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON {"total_tokens", "dataset_tokens": [...]}.
    #[arg(long)]
    #[serde(skip)]
    pub budget: Option<PathBuf>,
    /// Dataset token shares for the Dirichlet prior when no budget is given.
    #[arg(long, value_delimiter = ',')]
    pub token_shares: Option<Vec<f64>>,
    /// Maximum draws before giving up (default 100 * k).
    #[arg(long)]
    pub retry_ceiling: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct Da2Args {
    #[arg(long)]
    #[serde(skip)]
    pub matrix: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub valid: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub candidates: CandidateArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub distance: DistanceArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreArgs {
    #[arg(long)]
    #[serde(skip)]
    pub matrix: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub valid: PathBuf,
    /// CSV of `label,w0,w1,...` mixtures.
    #[arg(long)]
    #[serde(skip)]
    pub grid: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub distance: DistanceArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum RegressCommand {
    /// Fit one loss regressor per meta-domain.
    Fit(RegressFitArgs),
    /// Minimize the predicted validation loss over Dirichlet candidates.
    Search(RegressSearchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Gbdt,
    Ridge,
}

#[derive(Debug, Args, Serialize)]
pub struct RegressFitArgs {
    /// JSON Lines {"ratio" | "v", "losses"}.
    #[arg(long)]
    #[serde(skip)]
    pub samples: PathBuf,
    /// Needed when samples carry ratios.
    #[arg(long)]
    #[serde(skip)]
    pub matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = KindArg::Gbdt)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 200)]
    pub trees: usize,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0.8)]
    pub subsample: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.1)]
    pub holdout: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RegressSearchArgs {
    #[arg(long)]
    #[serde(skip)]
    pub models: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub matrix: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub valid: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub candidates: CandidateArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Spearman and Pearson between predicted and actual scores.
    Rank(RankArgs),
    /// Domain vector from embedding nearest neighbours.
    KnnBaseline(KnnArgs),
    /// Uniform random scores.
    RandomBaseline(RandomArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct RankArgs {
    /// CSV `label,score`.
    #[arg(long)]
    #[serde(skip)]
    pub pred: PathBuf,
    /// CSV `label,score`.
    #[arg(long)]
    #[serde(skip)]
    pub actual: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolArg {
    /// Each document votes 1/k for each of its k nearest centroids.
    Vote,
    /// Mean-pool the embeddings, then softmax of negative distances.
    Mean,
}

#[derive(Debug, Args, Serialize)]
pub struct KnnArgs {
    #[arg(long)]
    #[serde(skip)]
    pub embeddings: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub vocab: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = PoolArg::Vote)]
    pub pool: PoolArg,
    /// Dataset name recorded in the output (default: file stem).
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RandomArgs {
    #[arg(long, required_unless_present = "labels")]
    pub count: Option<usize>,
    /// Row labels; defaults to 0..count.
    #[arg(long, value_delimiter = ',')]
    pub labels: Option<Vec<String>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Generate separable meta-domain token distributions.
    World(WorldArgs),
    /// Write a corpus drawn from a known meta-domain mixture.
    Dataset(DatasetArgs),
    /// Cross-entropy oracle loss of mixtures.
    Oracle(OracleArgs),
    /// Oracle losses of random mixtures, as regression samples.
    FitSamples(FitSamplesArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct WorldArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 120)]
    pub alphabet: usize,
    #[arg(long, default_value_t = 64)]
    pub doc_length: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DatasetArgs {
    #[arg(long)]
    #[serde(skip)]
    pub world: PathBuf,
    /// Meta-domain mixing weights.
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
    #[arg(long)]
    pub docs: usize,
    /// Also write each document's meta-domain as "label".
    #[arg(long)]
    pub labels: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("mixtures").required(true).args(["ratio", "grid"]))]
pub struct OracleArgs {
    #[arg(long)]
    #[serde(skip)]
    pub world: PathBuf,
    /// True dataset matrix.
    #[arg(long)]
    #[serde(skip)]
    pub matrix: PathBuf,
    /// Target domain vector weighting the per-meta-domain losses.
    #[arg(long)]
    #[serde(skip)]
    pub valid: PathBuf,
    /// One mixture; writes JSON.
    #[arg(long, value_delimiter = ',')]
    pub ratio: Option<Vec<f64>>,
    /// CSV of `label,w0,w1,...`; writes `label,score` CSV.
    #[arg(long)]
    #[serde(skip)]
    pub grid: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FitSamplesArgs {
    #[arg(long)]
    #[serde(skip)]
    pub world: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub matrix: PathBuf,
    #[arg(long, default_value_t = 512)]
    pub count: usize,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Labeled training documents per meta-domain.
    #[arg(long, default_value_t = 300)]
    pub train_docs: usize,
    /// Documents per mixture dataset.
    #[arg(long, default_value_t = 1000)]
    pub dataset_docs: usize,
    #[arg(long, default_value_t = 1000)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 10_000)]
    pub k: usize,
    #[arg(long, default_value_t = 256)]
    pub fit_samples: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}
