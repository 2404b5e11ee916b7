//! Command-line front end.
//!
//! Every subcommand accepts `--config <file>` with flat `key=value` lines;
//! a key stands for the flag of the same name, and flags given on the
//! command line win. Exit codes: 0 success, 1 usage, 2 invalid input,
//! 3 runtime failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cards::{parse_pbn, Bid, Deal, Hand, Seat};
use crate::datagen::{self, BuildOptions, TrainingRow};
use crate::dds::Solver;
use crate::model::{self, split_rows, without_rotations, B2VModel, Examples, LinearBaseline, ModelError, TrainConfig};
use crate::opening::{self, LabeledCorpus, LabeledHand, OpenerConfig};
use crate::rl::{self, Agent, AgentKind, BankOptions, CemConfig, EpisodeBank, RlError};
use crate::scoring::{self, ContractResult, Vulnerability};
use crate::vecspace::{self, Corpus};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Invalid(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Invalid(m) | CliError::Runtime(m) => m,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

impl From<datagen::DatagenError> for CliError {
    fn from(e: datagen::DatagenError) -> Self {
        use datagen::DatagenError as E;
        match e {
            E::Pbn(_) | E::Invalid(_) | E::Rows { .. } | E::Csv(_) => invalid(e),
            E::Io(_) => runtime(e),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "bridgevec", version, about = "Bridge hand embeddings and the experiments around them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a training dataset: random N-S pairs, averaged double-dummy targets, ×8 augmentation.
    GenData(GenDataArgs),
    /// Train the trick-prediction model on a dataset and save it as JSON.
    Train(TrainArgs),
    /// Accuracy tables for a model on the held-out part of a dataset, with a linear baseline.
    Eval(EvalArgs),
    /// Validation MSE across embedding sizes and seeds.
    Sweep(SweepArgs),
    /// Print the embedding of one hand.
    Embed(EmbedArgs),
    /// Nearest hands to a hand in embedding space.
    Knn(KnnArgs),
    /// Nearest hands to embed(y) + embed(h1) − embed(h2).
    Analogy(AnalogyArgs),
    /// Per-component mean and standard deviation of embeddings over a corpus.
    Stats(StatsArgs),
    /// Hands nearest the zero vector.
    MeanHand(MeanHandArgs),
    /// Write a corpus of hands with their embeddings as CSV.
    ExportEmb(ExportEmbArgs),
    /// Label random hands with the rule-based opening bids.
    ExpertLabel(ExpertLabelArgs),
    /// Train the Raw, Heuristic and Combined opening classifiers and report training accuracy.
    OpeningTrain(OpeningTrainArgs),
    /// Opening-bid accuracy table of all classifiers on a test set.
    OpeningEval(OpeningEvalArgs),
    /// Nearest labelled hands, with their openings, for hands whose opening is debatable.
    Controversy(ControversyArgs),
    /// Precompute contract-guessing episodes (rewards for all 36 calls).
    Bank(BankArgs),
    /// Train one contract-guessing agent with the cross-entropy method.
    Cem(CemArgs),
    /// Train both agents on identical episode draws and compare their learning curves.
    CompareAgents(CompareArgs),
    /// Solve a full deal double dummy and print the trick table.
    Dds(DdsArgs),
    /// Score an undoubled contract.
    Score(ScoreArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Flat key=value file supplying defaults for this command's flags.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenDataArgs {
    /// Number of random N-S hand pairs (each yields 8 rows).
    #[arg(long, default_value_t = 2000)]
    pairs: usize,
    /// East-West layouts averaged per pair.
    #[arg(long, default_value_t = 5)]
    layouts: usize,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV; metadata goes to <out>.meta.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = all cores); output does not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct TrainOpts {
    /// Embedding size.
    #[arg(long, default_value_t = 8)]
    embed_dim: usize,
    /// Training epochs.
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    /// Mini-batch size.
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Share of N-S pairs held out for validation.
    #[arg(long, default_value_t = 0.1)]
    val_fraction: f64,
    /// Seed for the split, initialization and shuffling.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl TrainOpts {
    fn config(&self) -> Result<TrainConfig, CliError> {
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(invalid("--val-fraction must be in (0, 1)"));
        }
        if self.embed_dim == 0 || self.epochs == 0 || self.batch_size < 2 || !(self.lr > 0.0) {
            return Err(invalid("--embed-dim, --epochs must be positive, --batch-size at least 2, --lr positive"));
        }
        Ok(TrainConfig {
            batch_size: self.batch_size,
            lr: self.lr,
            epochs: self.epochs,
            val_fraction: self.val_fraction,
            seed: self.seed,
            embed_dim: self.embed_dim,
        })
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Dataset CSV from gen-data.
    #[arg(long)]
    data: PathBuf,
    /// Where to save the model JSON.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-epoch loss CSV (epoch,train_mse,val_mse).
    #[arg(long)]
    history: Option<PathBuf>,
    /// Train without the suit-rotation copies of each pair.
    #[arg(long)]
    no_rotations: bool,
    #[command(flatten)]
    opts: TrainOpts,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Dataset CSV; the held-out pairs are chosen as in train.
    #[arg(long)]
    data: PathBuf,
    /// Share of N-S pairs held out (must match training).
    #[arg(long, default_value_t = 0.1)]
    val_fraction: f64,
    /// Split seed (must match training).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Print the accuracy table as CSV instead.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Dataset CSV.
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated embedding sizes.
    #[arg(long, default_value = "2,4,8,16")]
    sizes: String,
    /// Seeds per size (seed, seed+1, ...).
    #[arg(long, default_value_t = 3)]
    seeds: usize,
    /// Optional CSV of every run (embed_dim,seed,val_mse).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    opts: TrainOpts,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    /// Model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Hand in PBN, e.g. A.KQ9832.T94.AKT.
    #[arg(long)]
    hand: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CorpusOpts {
    /// Model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Exported embeddings CSV to search instead of a random corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Size of the random corpus.
    #[arg(long, default_value_t = 50_000)]
    corpus_size: usize,
    /// Seed of the random corpus.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl CorpusOpts {
    fn load(&self) -> Result<(B2VModel, Corpus), CliError> {
        let model = load_model(&self.model)?;
        let corpus = match &self.corpus {
            Some(p) => vecspace::import_embeddings(p).map_err(invalid)?,
            None => vecspace::build_corpus(&model, &vecspace::random_hands(self.corpus_size, self.seed)),
        };
        if corpus.is_empty() {
            return Err(invalid("corpus is empty"));
        }
        if corpus.dim() != model.embed_dim {
            return Err(invalid(format!("corpus vectors have {} components, model {}", corpus.dim(), model.embed_dim)));
        }
        Ok((model, corpus))
    }
}

#[derive(Args, Debug)]
struct KnnArgs {
    /// Query hand in PBN.
    #[arg(long)]
    hand: String,
    /// Number of neighbours.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[command(flatten)]
    corpus: CorpusOpts,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct AnalogyArgs {
    /// Base hand y.
    #[arg(long)]
    y: String,
    /// Hand h1 (added).
    #[arg(long)]
    h1: String,
    /// Hand h2 (subtracted).
    #[arg(long)]
    h2: String,
    /// Number of neighbours.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[command(flatten)]
    corpus: CorpusOpts,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    corpus: CorpusOpts,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct MeanHandArgs {
    /// Number of hands to list.
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[command(flatten)]
    corpus: CorpusOpts,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ExportEmbArgs {
    /// Model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Number of random hands.
    #[arg(long, default_value_t = 50_000)]
    n: usize,
    /// Seed of the random hands.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ExpertLabelArgs {
    /// Number of random hands.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Seed of the random hands.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Probability of replacing a label by a random opening.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Output CSV (pbn,bid).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct OpenerOpts {
    /// Training epochs.
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    /// Mini-batch size.
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Seed for initialization and shuffling.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl OpenerOpts {
    fn config(&self) -> Result<OpenerConfig, CliError> {
        if self.epochs == 0 || self.batch_size == 0 || !(self.lr > 0.0) {
            return Err(invalid("--epochs, --batch-size and --lr must be positive"));
        }
        Ok(OpenerConfig { epochs: self.epochs, batch_size: self.batch_size, lr: self.lr, seed: self.seed })
    }
}

#[derive(Args, Debug)]
struct OpeningTrainArgs {
    /// Labelled training hands (pbn,bid).
    #[arg(long)]
    train: PathBuf,
    #[command(flatten)]
    opts: OpenerOpts,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct OpeningEvalArgs {
    /// Labelled training hands (pbn,bid).
    #[arg(long)]
    train: PathBuf,
    /// Labelled test hands (pbn,bid).
    #[arg(long)]
    test: PathBuf,
    /// Model JSON for the nearest-neighbour classifier.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    opts: OpenerOpts,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ControversyArgs {
    /// Model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Labelled hands to search (pbn,bid).
    #[arg(long)]
    train: PathBuf,
    /// Hand to report; repeatable. Defaults to four debatable openings.
    #[arg(long)]
    hand: Vec<String>,
    /// Neighbours per hand.
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BankArgs {
    /// Output CSV; metadata goes to <out>.meta.
    #[arg(long)]
    out: PathBuf,
    /// Number of episodes.
    #[arg(long, default_value_t = 5000)]
    episodes: usize,
    /// Episodes solved double dummy (the first ones); the rest use the model.
    #[arg(long, default_value_t = 500)]
    exact: usize,
    /// East-West layouts per exact episode.
    #[arg(long, default_value_t = 5)]
    layouts: usize,
    /// Model JSON for approximate episodes.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = all cores); output does not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CemOpts {
    /// Episode bank CSV.
    #[arg(long)]
    bank: PathBuf,
    /// Model JSON (needed by the embedding agent).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Training steps.
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Episodes drawn per step.
    #[arg(long, default_value_t = 1000)]
    population: usize,
    /// Share of each population kept as elite.
    #[arg(long, default_value_t = 0.1)]
    elite: f64,
    /// Adam learning rate.
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
}

impl CemOpts {
    fn config(&self, seed: u64) -> CemConfig {
        CemConfig { population: self.population, elite_fraction: self.elite, steps: self.steps, lr: self.lr, seed }
    }
}

#[derive(Args, Debug)]
struct CemArgs {
    /// binary or hand2vec.
    #[arg(long, default_value = "hand2vec")]
    agent: String,
    /// Seed for initialization, episode draws and action sampling.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Optional learning-curve CSV (step,mean_reward).
    #[arg(long)]
    curve: Option<PathBuf>,
    #[command(flatten)]
    opts: CemOpts,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Comma-separated seeds; each trains both agents.
    #[arg(long, default_value = "1,2,3")]
    seeds: String,
    /// Directory for per-seed curve CSVs.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Episodes shown in the decision table.
    #[arg(long, default_value_t = 10)]
    report: usize,
    #[command(flatten)]
    opts: CemOpts,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DdsArgs {
    /// Full deal, e.g. "N:A.KQ9832.T94.AKT Q4.AT7.QJ872.732 KJ95.J65.K3.J654 T87632.4.A65.Q98".
    #[arg(long)]
    deal: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    /// Contract such as 4H, 3NT, 1C.
    #[arg(long)]
    bid: String,
    /// Tricks taken by declarer's side.
    #[arg(long)]
    tricks: u8,
    /// none or vul.
    #[arg(long, default_value = "none")]
    vul: String,
    #[command(flatten)]
    common: Common,
}

/// Runs the command line `args` (program name first), writing results to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = apply_config(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    write!(out, "{e}").map_err(runtime)
                }
                _ => Err(CliError::Usage(e.to_string())),
            };
        }
    };
    match cli.command {
        Command::GenData(a) => gen_data(a, out),
        Command::Train(a) => train(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Embed(a) => embed(a, out),
        Command::Knn(a) => knn(a, out),
        Command::Analogy(a) => analogy(a, out),
        Command::Stats(a) => stats(a, out),
        Command::MeanHand(a) => mean_hand(a, out),
        Command::ExportEmb(a) => export_emb(a, out),
        Command::ExpertLabel(a) => expert_label(a, out),
        Command::OpeningTrain(a) => opening_train(a, out),
        Command::OpeningEval(a) => opening_eval(a, out),
        Command::Controversy(a) => controversy(a, out),
        Command::Bank(a) => bank(a, out),
        Command::Cem(a) => cem(a, out),
        Command::CompareAgents(a) => compare(a, out),
        Command::Dds(a) => dds(a, out),
        Command::Score(a) => score(a, out),
    }
}

/// The clap definition, for help output and introspection.
pub fn command() -> clap::Command {
    <Cli as clap::CommandFactory>::command()
}

/// Entry point for the binary: prints diagnostics and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(args, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.message();
            let msg = msg.trim_end();
            eprintln!("error: {}", msg.strip_prefix("error: ").unwrap_or(msg));
            e.code()
        }
    }
}

/// Appends `--key=value` for every config-file key whose flag is absent.
fn apply_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let pos = args.iter().position(|a| a == "--config");
    let path = match pos {
        Some(i) => args
            .get(i + 1)
            .cloned()
            .ok_or_else(|| CliError::Usage("--config needs a file".into()))?,
        None => match args.iter().find_map(|a| a.to_str()?.strip_prefix("--config=").map(OsString::from)) {
            Some(p) => p,
            None => return Ok(args),
        },
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| invalid(format!("{}: {e}", path.to_string_lossy())))?;
    let kv = crate::config::parse_kv(&text).map_err(invalid)?;
    for (k, v) in kv {
        let flag = format!("--{k}");
        let present = args.iter().any(|a| {
            a.to_str()
                .is_some_and(|s| s == flag || s.starts_with(&format!("{flag}=")))
        });
        if !present {
            args.push(format!("{flag}={v}").into());
        }
    }
    Ok(args)
}

fn gen_data(a: GenDataArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let opts = BuildOptions {
        n_pairs: a.pairs,
        n_layouts: a.layouts,
        seed: a.seed,
        jobs: a.jobs,
    };
    let start = std::time::Instant::now();
    let total = a.pairs;
    let meta = datagen::build_dataset(&opts, &a.out, |done| {
        eprintln!("{done}/{total} pairs, {:.0}s", start.elapsed().as_secs_f64());
    })?;
    writeln!(
        out,
        "wrote {} rows ({} pairs x 8) to {}",
        meta.rows,
        meta.n_pairs,
        a.out.display()
    )
    .map_err(runtime)
}

fn dds(a: DdsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let deal = Deal::parse(&a.deal).map_err(invalid)?;
    let table = Solver::default().solve_table(&deal);
    write!(out, "{table}").map_err(runtime)
}

fn score(a: ScoreArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bid: Bid = a.bid.parse().map_err(invalid)?;
    let vul: Vulnerability = a.vul.parse().map_err(invalid)?;
    let s = scoring::contract_score(ContractResult {
        bid,
        declarer: Seat::N,
        tricks_taken: a.tricks,
        vul,
    })
    .map_err(invalid)?;
    writeln!(out, "{s}").map_err(runtime)
}

fn hand_arg(text: &str) -> Result<Hand, CliError> {
    parse_pbn(text).map_err(|e| invalid(format!("{text:?}: {e}")))
}

fn load_model(path: &Path) -> Result<B2VModel, CliError> {
    B2VModel::load(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_rows(path: &Path) -> Result<Vec<TrainingRow>, CliError> {
    let rows = datagen::load_dataset(path)?;
    if rows.len() % 8 != 0 {
        return Err(invalid(format!("{}: {} rows is not a whole number of 8-row pair blocks", path.display(), rows.len())));
    }
    Ok(rows)
}

fn w(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<(), CliError> {
    write!(out, "{text}").map_err(runtime)
}

fn list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|t| t.trim().parse().map_err(|_| invalid(format!("bad {what} {t:?}"))))
        .collect()
}

fn model_err(e: ModelError) -> CliError {
    match e {
        ModelError::Data(_) | ModelError::Overlap => invalid(e),
        _ => runtime(e),
    }
}

fn train(a: TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = a.opts.config()?;
    let rows = load_rows(&a.data)?;
    let (tr, va) = split_rows(&rows, 8, cfg.val_fraction, cfg.seed);
    let tr = if a.no_rotations { without_rotations(&tr) } else { tr };
    let (tr, va) = (Examples::from_rows(&tr), Examples::from_rows(&va));
    let mut m = model::init_model(cfg.embed_dim, cfg.seed);
    let start = std::time::Instant::now();
    let mut lines = String::new();
    let h = model::train(&mut m, &tr, &va, &cfg, |e| {
        let line = format!("epoch {:>3}  train_mse {:.4}  val_mse {:.4}\n", e.epoch, e.train_loss, e.val_loss);
        eprint!("{line}");
        lines.push_str(&line);
    })
    .map_err(model_err)?;
    eprintln!("trained in {:.1}s", start.elapsed().as_secs_f64());
    w(out, &lines)?;
    m.save(&a.out).map_err(runtime)?;
    if let Some(p) = &a.history {
        let mut csv = String::from("epoch,train_mse,val_mse\n");
        for e in &h.epochs {
            csv.push_str(&format!("{},{},{}\n", e.epoch, e.train_loss, e.val_loss));
        }
        std::fs::write(p, csv).map_err(runtime)?;
    }
    w(out, format!("kept epoch {} (val_mse {:.4}); saved {}\n", h.best_epoch, h.best_val_loss, a.out.display()))?;
    w(out, format!("{}\n", model::evaluate(&m, &va)))
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(a.val_fraction > 0.0 && a.val_fraction < 1.0) {
        return Err(invalid("--val-fraction must be in (0, 1)"));
    }
    let m = load_model(&a.model)?;
    let rows = load_rows(&a.data)?;
    let (tr, va) = split_rows(&rows, 8, a.val_fraction, a.seed);
    if va.is_empty() {
        return Err(invalid("validation split is empty"));
    }
    let metrics = model::evaluate(&m, &Examples::from_rows(&va));
    if a.csv {
        return w(out, metrics.to_csv());
    }
    let base = LinearBaseline::fit(&tr).map_err(model_err)?.mse(&va);
    w(out, format!("{metrics}\n"))?;
    w(out, format!(
        "linear baseline (hcp + suit lengths) mse {:.4}; model is {:.1}% lower\n",
        base,
        100.0 * (1.0 - metrics.mse / base)
    ))
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = a.opts.config()?;
    let sizes: Vec<usize> = list(&a.sizes, "size")?;
    if sizes.contains(&0) || a.seeds == 0 {
        return Err(invalid("sizes and --seeds must be positive"));
    }
    let rows = load_rows(&a.data)?;
    let mut runs = String::from("embed_dim,seed,val_mse\n");
    let points = model::size_sweep(&rows, 8, &sizes, a.seeds, &cfg, |d, seed, mse| {
        eprintln!("size {d} seed {seed}: val_mse {mse:.4}");
        runs.push_str(&format!("{d},{seed},{mse}\n"));
    })
    .map_err(model_err)?;
    if let Some(p) = &a.out {
        std::fs::write(p, &runs).map_err(runtime)?;
    }
    w(out, format!("{:>9} {:>10} {:>10}\n", "embed_dim", "mean_mse", "std"))?;
    for p in points {
        w(out, format!("{:>9} {:>10.4} {:>10.4}\n", p.embed_dim, p.mean, p.std))?;
    }
    Ok(())
}

fn embed(a: EmbedArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let hand = hand_arg(&a.hand)?;
    let m = load_model(&a.model)?;
    let v: Vec<String> = m.embed(hand).iter().map(|x| format!("{x:.prec$}", prec = vecspace::EXPORT_DECIMALS)).collect();
    w(out, format!("{}\n", v.join(",")))
}

fn knn(a: KnnArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let hand = hand_arg(&a.hand)?;
    let (m, corpus) = a.corpus.load()?;
    let n = corpus.nearest(&m.embed(hand), a.k).map_err(invalid)?;
    w(out, vecspace::format_neighbors(&n))
}

fn analogy(a: AnalogyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (y, h1, h2) = (hand_arg(&a.y)?, hand_arg(&a.h1)?, hand_arg(&a.h2)?);
    let (m, corpus) = a.corpus.load()?;
    let n = corpus.analogy(&m, y, h1, h2, a.k).map_err(invalid)?;
    w(out, vecspace::format_neighbors(&n))
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (_, corpus) = a.corpus.load()?;
    w(out, format!("{}\n", corpus.stats().map_err(invalid)?))
}

fn mean_hand(a: MeanHandArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (_, corpus) = a.corpus.load()?;
    let n = corpus.mean_hand_query(a.k).map_err(invalid)?;
    w(out, vecspace::format_neighbors(&n))
}

fn export_emb(a: ExportEmbArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let m = load_model(&a.model)?;
    let corpus = vecspace::build_corpus(&m, &vecspace::random_hands(a.n, a.seed));
    let n = vecspace::export_embeddings(&corpus, &a.out).map_err(runtime)?;
    w(out, format!("wrote {n} embeddings to {}\n", a.out.display()))
}

fn expert_label(a: ExpertLabelArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.noise) {
        return Err(invalid("--noise must be in [0, 1]"));
    }
    let labels = opening::expert_labels(a.n, a.seed, a.noise);
    opening::write_labels(&a.out, &labels).map_err(runtime)?;
    w(out, format!("wrote {} labelled hands to {}\n", labels.len(), a.out.display()))
}

fn read_labels(path: &Path) -> Result<Vec<LabeledHand>, CliError> {
    let l = opening::read_labels(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    if l.is_empty() {
        return Err(invalid(format!("{}: no labelled hands", path.display())));
    }
    Ok(l)
}

fn opening_train(a: OpeningTrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = a.opts.config()?;
    let train = read_labels(&a.train)?;
    let nets = opening::train_openers(&train, &cfg).map_err(invalid)?;
    let hands: Vec<Hand> = train.iter().map(|l| l.hand).collect();
    let mut counts = std::collections::BTreeMap::new();
    for l in &train {
        *counts.entry(l.bid).or_insert(0usize) += 1;
    }
    let prior = *counts.values().max().expect("non-empty") as f64 / train.len() as f64;
    let rows = std::iter::once(("majority class".to_string(), prior))
        .chain(nets.nets.iter().map(|n| (n.kind.name().to_string(), opening::accuracy(&n.predict(&hands), &train))))
        .collect();
    w(out, "training-set accuracy\n")?;
    w(out, opening::AccuracyTable { rows })
}

fn opening_eval(a: OpeningEvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = a.opts.config()?;
    let train = read_labels(&a.train)?;
    let test = read_labels(&a.test)?;
    let m = load_model(&a.model)?;
    let lc = LabeledCorpus::build(&m, &train);
    let nets = opening::train_openers(&train, &cfg).map_err(invalid)?;
    let table = opening::evaluate_openers(&nets, (&lc, &m), &test).map_err(invalid)?;
    w(out, table)
}

fn controversy(a: ControversyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.k < 2 {
        return Err(invalid("--k must be at least 2"));
    }
    let texts: Vec<String> = if a.hand.is_empty() {
        opening::CONTROVERSIAL.iter().map(|s| s.to_string()).collect()
    } else {
        a.hand.clone()
    };
    let hands = texts.iter().map(|t| hand_arg(t)).collect::<Result<Vec<_>, _>>()?;
    let m = load_model(&a.model)?;
    let lc = LabeledCorpus::build(&m, &read_labels(&a.train)?);
    for h in hands {
        let rows = opening::controversy_report(h, &lc, &m, a.k).map_err(invalid)?;
        w(out, format!("{}\n", opening::format_controversy(h, &rows)))?;
    }
    Ok(())
}

fn bank(a: BankArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.exact > a.episodes {
        return Err(invalid("--exact exceeds --episodes"));
    }
    if a.layouts == 0 {
        return Err(invalid("--layouts must be at least 1"));
    }
    let model = a.model.as_deref().map(load_model).transpose()?;
    let opts = BankOptions { n_episodes: a.episodes, n_exact: a.exact, n_layouts: a.layouts, seed: a.seed, jobs: a.jobs };
    let start = std::time::Instant::now();
    let total = a.episodes;
    let bank = rl::build_bank(&opts, model.as_ref(), |d| {
        eprintln!("{d}/{total} episodes, {:.0}s", start.elapsed().as_secs_f64());
    })
    .map_err(|e| match e {
        RlError::NoModel | RlError::Invalid(_) => invalid(e),
        _ => runtime(e),
    })?;
    bank.save(&a.out).map_err(runtime)?;
    w(out, format!("wrote {} episodes ({} exact) to {}\n", bank.len(), bank.n_exact(), a.out.display()))
}

fn load_bank(path: &Path) -> Result<EpisodeBank, CliError> {
    EpisodeBank::load(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn agent_kind(text: &str) -> Result<AgentKind, CliError> {
    match text {
        "binary" => Ok(AgentKind::Binary),
        "hand2vec" => Ok(AgentKind::Hand2Vec),
        _ => Err(invalid(format!("unknown agent {text:?} (binary or hand2vec)"))),
    }
}

fn rl_err(e: RlError) -> CliError {
    match e {
        RlError::NoModel | RlError::Invalid(_) => invalid(e),
        _ => runtime(e),
    }
}

fn curve_csv(out_dir: &Path, name: &str, curve: &[f64]) -> Result<(), CliError> {
    rl::write_curve(&out_dir.join(name), curve).map_err(runtime)
}

fn cem(a: CemArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let kind = agent_kind(&a.agent)?;
    let bank = load_bank(&a.opts.bank)?;
    let model = a.opts.model.as_deref().map(load_model).transpose()?;
    let x = kind.inputs(&bank.hands(), model.as_ref()).map_err(rl_err)?;
    let mut agent = Agent::new(kind, x.ncols(), a.seed);
    let run = rl::cem_train(&mut agent, &x, &bank, &a.opts.config(a.seed)).map_err(rl_err)?;
    if run.resampled {
        eprintln!("note: population exceeds the bank; episodes repeat within a step");
    }
    if let Some(p) = &a.curve {
        rl::write_curve(p, &run.curve).map_err(runtime)?;
    }
    for (i, r) in run.curve.iter().enumerate() {
        if (i + 1) % 10 == 0 || i == 0 {
            w(out, format!("step {:>4}  mean_reward {:>9.2}\n", i + 1, r))?;
        }
    }
    Ok(())
}

fn compare(a: CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let seeds: Vec<u64> = list(&a.seeds, "seed")?;
    let bank = load_bank(&a.opts.bank)?;
    let model = a.opts.model.as_deref().map(load_model).transpose()?;
    let kinds = [AgentKind::Binary, AgentKind::Hand2Vec];
    let runs = rl::compare_agents(kinds, &bank, model.as_ref(), &a.opts.config(seeds[0]), &seeds).map_err(rl_err)?;
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).map_err(runtime)?;
        for r in &runs {
            curve_csv(dir, &format!("binary_seed{}.csv", r.seed), &r.first.curve)?;
            curve_csv(dir, &format!("hand2vec_seed{}.csv", r.seed), &r.second.curve)?;
        }
    }
    let step = rl::EARLY_PHASE.min(a.opts.steps);
    w(out, format!("{:>6} {:>14} {:>14} {:>12} {:>12}\n", "seed", format!("bin@{step}"), format!("h2v@{step}"), "early_gap", "late_gap"))?;
    for r in &runs {
        w(out, format!(
            "{:>6} {:>14.2} {:>14.2} {:>12.2} {:>12.2}\n",
            r.seed,
            r.first.curve[step - 1],
            r.second.curve[step - 1],
            r.early_gap(),
            r.late_gap()
        ))?;
    }
    let wins = runs.iter().filter(|r| r.gap_at(step) >= 0.0).count();
    w(out, format!("{} ahead at step {step} in {wins} of {} seeds\n\n", kinds[1].name(), runs.len()))?;
    let hands = bank.hands();
    let xb = kinds[0].inputs(&hands, model.as_ref()).map_err(rl_err)?;
    let xh = kinds[1].inputs(&hands, model.as_ref()).map_err(rl_err)?;
    let shown: Vec<usize> = (0..a.report.min(bank.len())).collect();
    let r = &runs[0];
    w(out, format!("decisions after {} steps (seed {})\n", a.opts.steps, r.seed))?;
    w(out, rl::decision_report([(&r.first_agent, &xb), (&r.second_agent, &xh)], &bank, &shown).map_err(rl_err)?)
}
