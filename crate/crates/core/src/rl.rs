//! Contract guessing as a one-step game: an agent sees only North's hand
//! and names a contract for North to declare. Rewards are precomputed per
//! episode for all 36 calls, and policies are trained with the
//! cross-entropy method.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cards::{self, Bid, Hand, Seat, Strain};
use crate::datagen::{self, sample_pair, DatagenError};
use crate::dds::{Solver, TrickTable};
use crate::model::{encode_hands, B2VModel};
use crate::nn::{self, Activation, Adam, Layer, Mode, Net, NnError};
use crate::scoring::{self, ContractResult, Vulnerability};

pub const ACTIONS: usize = 36;
const VUL: Vulnerability = Vulnerability::NotVulnerable;

#[derive(Debug, Error)]
pub enum RlError {
    #[error("hands overlap")]
    Overlap,
    #[error("approximate episodes need a trick model")]
    NoModel,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Data(#[from] DatagenError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardMode {
    /// Double-dummy tricks on sampled East-West layouts.
    Exact,
    /// Rounded trick-model predictions, no layouts.
    Approx,
}

impl fmt::Display for RewardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewardMode::Exact => "exact",
            RewardMode::Approx => "approx",
        })
    }
}

impl std::str::FromStr for RewardMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(RewardMode::Exact),
            "approx" => Ok(RewardMode::Approx),
            _ => Err(format!("unknown reward mode {s:?} (exact or approx)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub hand_n: Hand,
    pub hand_s: Hand,
    pub mode: RewardMode,
    /// Layouts averaged; 0 for approximate episodes.
    pub layouts: usize,
    /// Mean of (achieved − best NS score) per call, indexed by [`Bid::index`].
    pub rewards: [f64; ACTIONS],
}

impl Episode {
    /// Mean best North-South score over the layouts.
    pub fn best_score(&self) -> f64 {
        -self.rewards[0]
    }

    /// Mean score North gets for declaring `bid`.
    pub fn score(&self, bid: Bid) -> f64 {
        self.rewards[bid.index()] + self.best_score()
    }
}

/// Rewards averaged over trick tables whose N and S rows are filled in.
pub fn rewards_from_tables(tables: &[TrickTable]) -> [f64; ACTIONS] {
    let mut r = [0.0; ACTIONS];
    for t in tables {
        let best = scoring::best_ns_score(t, VUL);
        for bid in Bid::all() {
            let sc = match bid {
                Bid::Pass => 0,
                Bid::Contract { strain, .. } => scoring::contract_score(ContractResult {
                    bid,
                    declarer: Seat::N,
                    tricks_taken: t.get(Seat::N, strain),
                    vul: VUL,
                })
                .expect("contract with tricks in range"),
            };
            r[bid.index()] += f64::from(sc - best);
        }
    }
    r.map(|v| v / tables.len() as f64)
}

/// N and S rows from the trick model, rounded and clamped to 0..=13.
pub fn predicted_table(model: &B2VModel, hand_n: Hand, hand_s: Hand) -> TrickTable {
    let p = model.predict_batch(&[(hand_n, hand_s), (hand_s, hand_n)]);
    let mut t = TrickTable::default();
    for (row, seat) in [Seat::N, Seat::S].into_iter().enumerate() {
        for strain in Strain::ALL {
            t.set(seat, strain, p[[row, strain.index()]].round().clamp(0.0, 13.0) as u8);
        }
    }
    t
}

pub fn build_episode(
    solver: &mut Solver,
    hand_n: Hand,
    hand_s: Hand,
    n_layouts: usize,
    seed: u64,
    mode: RewardMode,
    model: Option<&B2VModel>,
) -> Result<Episode, RlError> {
    if !hand_n.cards().is_disjoint(hand_s.cards()) {
        return Err(RlError::Overlap);
    }
    let (tables, layouts) = match mode {
        RewardMode::Exact => (datagen::layouts(solver, hand_n, hand_s, n_layouts, seed)?, n_layouts),
        RewardMode::Approx => (vec![predicted_table(model.ok_or(RlError::NoModel)?, hand_n, hand_s)], 0),
    };
    Ok(Episode { hand_n, hand_s, mode, layouts, rewards: rewards_from_tables(&tables) })
}

#[derive(Debug, Clone)]
pub struct BankOptions {
    pub n_episodes: usize,
    /// The first `n_exact` episodes are exact, the rest approximate.
    pub n_exact: usize,
    pub n_layouts: usize,
    pub seed: u64,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeBank {
    pub episodes: Vec<Episode>,
    pub seed: u64,
    pub n_layouts: usize,
}

const BANK_HEADER_FIXED: [&str; 4] = ["pbn_n", "pbn_s", "mode", "layouts"];

fn bank_header() -> Vec<String> {
    let mut h: Vec<String> = BANK_HEADER_FIXED.iter().map(|s| s.to_string()).collect();
    h.extend(Bid::all().map(|b| format!("r_{}", b.to_string().to_lowercase())));
    h
}

/// Episodes for seeded random N-S pairs, in index order regardless of `jobs`.
/// `progress` sees the number of episodes finished so far.
pub fn build_bank(
    opts: &BankOptions,
    model: Option<&B2VModel>,
    progress: impl Fn(usize) + Sync,
) -> Result<EpisodeBank, RlError> {
    if opts.n_episodes == 0 {
        return Err(RlError::Invalid("a bank needs at least one episode".into()));
    }
    if opts.n_exact < opts.n_episodes && model.is_none() {
        return Err(RlError::NoModel);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| RlError::Invalid(e.to_string()))?;
    let done = std::sync::atomic::AtomicUsize::new(0);
    let episodes = pool.install(|| {
        (0..opts.n_episodes)
            .into_par_iter()
            .with_min_len(1)
            .map_init(Solver::default, |solver, i| {
                let (n, s, layout_seed) = sample_pair(opts.seed, i as u64);
                let mode = if i < opts.n_exact { RewardMode::Exact } else { RewardMode::Approx };
                let e = build_episode(solver, n, s, opts.n_layouts, layout_seed, mode, model);
                let d = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                if mode == RewardMode::Exact || d % 500 == 0 {
                    progress(d);
                }
                e
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(EpisodeBank { episodes, seed: opts.seed, n_layouts: opts.n_layouts })
}

pub fn bank_meta_path(path: &Path) -> PathBuf {
    datagen::meta_path(path)
}

impl EpisodeBank {
    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn n_exact(&self) -> usize {
        self.episodes.iter().filter(|e| e.mode == RewardMode::Exact).count()
    }

    pub fn hands(&self) -> Vec<Hand> {
        self.episodes.iter().map(|e| e.hand_n).collect()
    }

    /// Writes the CSV and a `key=value` side-car with the generation settings.
    pub fn save(&self, path: &Path) -> Result<(), RlError> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(bank_header())?;
        for e in &self.episodes {
            let mut rec = vec![e.hand_n.to_string(), e.hand_s.to_string(), e.mode.to_string(), e.layouts.to_string()];
            rec.extend(e.rewards.iter().map(|r| r.to_string()));
            w.write_record(rec)?;
        }
        w.flush()?;
        let meta = format!(
            "format=bridgevec-bank\nseed={}\nn_layouts={}\nepisodes={}\nexact={}\ngenerator={}\nvulnerability={}\n",
            self.seed,
            self.n_layouts,
            self.len(),
            self.n_exact(),
            cards::RNG_NAME,
            VUL
        );
        std::fs::write(bank_meta_path(path), meta)?;
        Ok(())
    }

    /// Reads a bank CSV; seed and layout count come from the side-car if present.
    pub fn load(path: &Path) -> Result<EpisodeBank, RlError> {
        let mut rd = csv::Reader::from_path(path)?;
        if rd.headers()?.iter().collect::<Vec<_>>() != bank_header() {
            return Err(RlError::Parse { line: 1, message: "unexpected header".into() });
        }
        let mut episodes = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let line = i + 2;
            let rec = rec?;
            let bad = |message: String| RlError::Parse { line, message };
            if rec.len() != 4 + ACTIONS {
                return Err(bad(format!("{} fields, expected {}", rec.len(), 4 + ACTIONS)));
            }
            let hand_n = cards::parse_pbn(&rec[0]).map_err(|e| bad(e.to_string()))?;
            let hand_s = cards::parse_pbn(&rec[1]).map_err(|e| bad(e.to_string()))?;
            if !hand_n.cards().is_disjoint(hand_s.cards()) {
                return Err(bad("hands overlap".into()));
            }
            let mode: RewardMode = rec[2].parse().map_err(bad)?;
            let layouts: usize = rec[3].parse().map_err(|e| bad(format!("layouts: {e}")))?;
            let mut rewards = [0.0; ACTIONS];
            for (j, r) in rewards.iter_mut().enumerate() {
                *r = rec[4 + j].parse::<f64>().map_err(|e| bad(format!("reward {}: {e}", j)))?;
                if !r.is_finite() || *r > 0.0 {
                    return Err(bad(format!("reward {} = {} is not a finite non-positive number", j, r)));
                }
            }
            episodes.push(Episode { hand_n, hand_s, mode, layouts, rewards });
        }
        if episodes.is_empty() {
            return Err(RlError::Invalid(format!("{}: no episodes", path.display())));
        }
        let (mut seed, mut n_layouts) = (0, episodes.iter().map(|e| e.layouts).max().unwrap_or(0));
        if let Ok(text) = std::fs::read_to_string(bank_meta_path(path)) {
            let kv = crate::config::parse_kv(&text).map_err(RlError::Invalid)?;
            seed = kv.get("seed").and_then(|v| v.parse().ok()).unwrap_or(seed);
            n_layouts = kv.get("n_layouts").and_then(|v| v.parse().ok()).unwrap_or(n_layouts);
        }
        Ok(EpisodeBank { episodes, seed, n_layouts })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    /// 52-card binary vector.
    Binary,
    /// Hand embedding from the trick model.
    Hand2Vec,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Binary => "AgentBinary",
            AgentKind::Hand2Vec => "AgentHand2Vec",
        }
    }

    /// Agent inputs for `hands`, one row each.
    pub fn inputs(self, hands: &[Hand], model: Option<&B2VModel>) -> Result<Array2<f64>, RlError> {
        match self {
            AgentKind::Binary => Ok(encode_hands(hands)),
            AgentKind::Hand2Vec => Ok(model.ok_or(RlError::NoModel)?.embed_batch(hands)),
        }
    }
}

const POLICY_HIDDEN: usize = 128;
/// Shrinks the initial output layer so the untrained policy is close to uniform.
const OUTPUT_INIT_SCALE: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct Agent {
    pub kind: AgentKind,
    pub net: Net,
}

impl Agent {
    pub fn new(kind: AgentKind, input_width: usize, seed: u64) -> Agent {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = POLICY_HIDDEN;
        let relu = Activation::Relu;
        let mut net = Net::mlp(&[input_width, h, h, h, ACTIONS], &[relu, relu, relu, Activation::Linear], &mut rng);
        if let Some(Layer::Dense(d)) = net.layers.last_mut() {
            d.w *= OUTPUT_INIT_SCALE;
        }
        Agent { kind, net }
    }

    /// Action probabilities, one row per input row.
    pub fn policy(&self, x: &Array2<f64>) -> Result<Array2<f64>, RlError> {
        Ok(nn::softmax(&self.net.infer(x)?))
    }

    /// Action distribution for one input and a call drawn from it, or the
    /// most likely call when `rng` is `None`.
    pub fn act(&self, x: &[f64], rng: Option<&mut ChaCha8Rng>) -> Result<(Vec<f64>, Bid), RlError> {
        let row = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("one row");
        let p = self.policy(&row)?.row(0).to_vec();
        let a = match rng {
            Some(rng) => sample(&p, rng),
            None => argmax(&p),
        };
        Ok((p, Bid::from_index(a)))
    }
}

fn argmax(p: &[f64]) -> usize {
    p.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b }).0
}

fn sample(p: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &v) in p.iter().enumerate() {
        acc += v;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

#[derive(Debug, Clone)]
pub struct CemConfig {
    pub population: usize,
    pub elite_fraction: f64,
    pub steps: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for CemConfig {
    fn default() -> Self {
        CemConfig { population: 1000, elite_fraction: 0.1, steps: 200, lr: 1e-4, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CemRun {
    /// Population mean reward before each step's update.
    pub curve: Vec<f64>,
    /// True when the population was larger than the bank.
    pub resampled: bool,
}

/// Trains `agent` in place. `inputs` holds the agent's input row for every
/// bank episode. Episode draws depend only on the seed, so agents of
/// different kinds see identical episodes.
pub fn cem_train(agent: &mut Agent, inputs: &Array2<f64>, bank: &EpisodeBank, cfg: &CemConfig) -> Result<CemRun, RlError> {
    if !(cfg.elite_fraction > 0.0 && cfg.elite_fraction < 1.0) {
        return Err(RlError::Invalid(format!("elite fraction {} not in (0, 1)", cfg.elite_fraction)));
    }
    if cfg.population == 0 {
        return Err(RlError::Invalid("population must be positive".into()));
    }
    if inputs.nrows() != bank.len() || inputs.ncols() != agent.net.inputs() {
        return Err(RlError::Invalid(format!(
            "inputs {}x{} do not fit bank of {} and agent width {}",
            inputs.nrows(),
            inputs.ncols(),
            bank.len(),
            agent.net.inputs()
        )));
    }
    let mut draws = ChaCha8Rng::seed_from_u64(cfg.seed);
    draws.set_stream(1);
    let mut actions = ChaCha8Rng::seed_from_u64(cfg.seed);
    actions.set_stream(2);
    let n_elite = ((cfg.population as f64 * cfg.elite_fraction).round() as usize).clamp(1, cfg.population);
    let mut adam = Adam::new(cfg.lr);
    let mut curve = Vec::with_capacity(cfg.steps);
    for _ in 0..cfg.steps {
        let idx: Vec<usize> = (0..cfg.population).map(|_| draws.random_range(0..bank.len())).collect();
        let x = inputs.select(Axis(0), &idx);
        let p = agent.policy(&x)?;
        let chosen: Vec<usize> = p.rows().into_iter().map(|r| sample(r.as_slice().expect("contiguous"), &mut actions)).collect();
        let rewards: Vec<f64> = idx.iter().zip(&chosen).map(|(&e, &a)| bank.episodes[e].rewards[a]).collect();
        curve.push(rewards.iter().sum::<f64>() / rewards.len() as f64);
        let mut order: Vec<usize> = (0..cfg.population).collect();
        order.sort_by(|&a, &b| rewards[b].total_cmp(&rewards[a]));
        let elite = &order[..n_elite];
        let xe = x.select(Axis(0), elite);
        let ye: Vec<usize> = elite.iter().map(|&i| chosen[i]).collect();
        let (logits, cache) = agent.net.forward(&xe, Mode::Train)?;
        let (_, g) = nn::loss_softmax_ce(&logits, &ye)?;
        let (grads, _) = agent.net.backward(&cache, &g)?;
        adam.step_net(&mut agent.net, &grads);
    }
    Ok(CemRun { curve, resampled: cfg.population > bank.len() })
}

pub fn write_curve(path: &Path, curve: &[f64]) -> Result<(), RlError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["step", "mean_reward"])?;
    for (i, r) in curve.iter().enumerate() {
        w.write_record([(i + 1).to_string(), r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean of `b − a` over steps `from..=to` (1-based, clipped to the curves).
pub fn mean_gap(a: &[f64], b: &[f64], from: usize, to: usize) -> f64 {
    let to = to.min(a.len()).min(b.len());
    if from == 0 || from > to {
        return 0.0;
    }
    let n = (to - from + 1) as f64;
    (from - 1..to).map(|i| b[i] - a[i]).sum::<f64>() / n
}

pub const EARLY_PHASE: usize = 50;

#[derive(Debug, Clone)]
pub struct SeedComparison {
    pub seed: u64,
    pub first: CemRun,
    pub second: CemRun,
    pub first_agent: Agent,
    pub second_agent: Agent,
}

impl SeedComparison {
    /// Mean reward advantage of the second agent over steps 1-50.
    pub fn early_gap(&self) -> f64 {
        mean_gap(&self.first.curve, &self.second.curve, 1, EARLY_PHASE)
    }

    /// Same over the last 50 steps.
    pub fn late_gap(&self) -> f64 {
        let n = self.first.curve.len();
        mean_gap(&self.first.curve, &self.second.curve, n.saturating_sub(EARLY_PHASE) + 1, n)
    }

    /// Second minus first at a 1-based step.
    pub fn gap_at(&self, step: usize) -> f64 {
        mean_gap(&self.first.curve, &self.second.curve, step, step)
    }
}

/// Trains one agent of each kind per seed on identical episode draws.
pub fn compare_agents(
    kinds: [AgentKind; 2],
    bank: &EpisodeBank,
    model: Option<&B2VModel>,
    cfg: &CemConfig,
    seeds: &[u64],
) -> Result<Vec<SeedComparison>, RlError> {
    if seeds.is_empty() {
        return Err(RlError::Invalid("need at least one seed".into()));
    }
    let hands = bank.hands();
    let xa = kinds[0].inputs(&hands, model)?;
    let xb = kinds[1].inputs(&hands, model)?;
    seeds
        .iter()
        .map(|&seed| {
            let c = CemConfig { seed, ..cfg.clone() };
            let mut a = Agent::new(kinds[0], xa.ncols(), seed);
            let mut b = Agent::new(kinds[1], xb.ncols(), seed);
            let first = cem_train(&mut a, &xa, bank, &c)?;
            let second = cem_train(&mut b, &xb, bank, &c)?;
            Ok(SeedComparison { seed, first, second, first_agent: a, second_agent: b })
        })
        .collect()
}

/// Greedy call of each agent on the given episodes with its reward and score.
pub fn decision_report(
    agents: [(&Agent, &Array2<f64>); 2],
    bank: &EpisodeBank,
    episodes: &[usize],
) -> Result<String, RlError> {
    let mut s = format!(
        "{:<20} | {:<20} | {:<20}\n{:<20} | {:<6} {:>6} {:>6} | {:<6} {:>6} {:>6}\n",
        "",
        agents[0].0.kind.name(),
        agents[1].0.kind.name(),
        "hand",
        "bid",
        "rew",
        "sc",
        "bid",
        "rew",
        "sc"
    );
    for &e in episodes {
        let ep = &bank.episodes[e];
        s.push_str(&format!("{:<20}", ep.hand_n.to_string()));
        for (agent, x) in agents {
            let (_, bid) = agent.act(x.row(e).as_slice().expect("contiguous"), None)?;
            s.push_str(&format!(
                " | {:<6} {:>6.0} {:>6.0}",
                bid.to_string(),
                ep.rewards[bid.index()],
                ep.score(bid)
            ));
        }
        s.push('\n');
    }
    Ok(s)
}
