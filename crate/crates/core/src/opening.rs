//! Opening-bid classification: a rule-based labeller, a 1-nearest-neighbour
//! classifier over hand embeddings, and small MLP classifiers on raw cards,
//! hand-evaluation features, or both.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use ndarray::{concatenate, Array1, Array2, Axis};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{self, Bid, Hand, Rank, Strain, Suit};
use crate::model::{encode_hands, B2VModel};
use crate::nn::{self, Activation, Adam, Mode, Net};
use crate::vecspace::{Corpus, Neighbors, VecError};

#[derive(Debug, Error)]
pub enum OpeningError {
    #[error("training set is empty")]
    Empty,
    #[error("training labels have a single class ({0}); nothing to separate")]
    SingleClass(Bid),
    #[error(transparent)]
    Vec(#[from] VecError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledHand {
    pub hand: Hand,
    pub bid: Bid,
}

/// Longest suit, ties to the higher-ranking suit.
fn longest(hand: Hand) -> (Suit, u32) {
    Suit::ALL
        .into_iter()
        .map(|s| (s, hand.suit_len(s)))
        .fold((Suit::Spades, 0), |best, cur| if cur.1 > best.1 { cur } else { best })
}

fn bid(level: u8, strain: Strain) -> Bid {
    Bid::contract(level, strain).expect("level in range")
}

/// Simplified Polish Club opening, rules tried in order:
///
/// 1. PASS below 7 HCP.
/// 2. Below 12 HCP: 7+ card suit and at most 10 HCP opens at the three
///    level in it, a 6-card suit with 6-10 HCP at the two level, else PASS.
/// 3. 1NT with 15-17 balanced, 2NT with 21-22 balanced.
/// 4. 1♠ or 1♥ with a 5+ card major, the longer (then higher) one.
/// 5. 1♦ with 4+ diamonds, unbalanced.
/// 6. 2♣ with 12-14 HCP and 6+ clubs, or 5 clubs and a 4-card major.
/// 7. 1♣ otherwise.
pub fn expert_open(hand: Hand) -> Bid {
    let hcp = hand.hcp();
    let len = |s: Suit| hand.suit_len(s);
    if hcp < 7 {
        return Bid::Pass;
    }
    if hcp < 12 {
        let (suit, n) = longest(hand);
        return match n {
            7.. if hcp <= 10 => bid(3, suit.strain()),
            6 if (6..=10).contains(&hcp) => bid(2, suit.strain()),
            _ => Bid::Pass,
        };
    }
    let balanced = hand.is_balanced();
    if balanced && (15..=17).contains(&hcp) {
        return bid(1, Strain::NoTrump);
    }
    if balanced && (21..=22).contains(&hcp) {
        return bid(2, Strain::NoTrump);
    }
    let (s, h) = (len(Suit::Spades), len(Suit::Hearts));
    if s >= 5 || h >= 5 {
        return bid(1, if s >= h { Strain::Spades } else { Strain::Hearts });
    }
    if len(Suit::Diamonds) >= 4 && !balanced {
        return bid(1, Strain::Diamonds);
    }
    let c = len(Suit::Clubs);
    if hcp <= 14 && (c >= 6 || (c == 5 && (s == 4 || h == 4))) {
        return bid(2, Strain::Clubs);
    }
    bid(1, Strain::Clubs)
}

/// HCP; spade, heart, diamond, club lengths; ace, king, queen, jack counts.
pub fn heuristic_features(hand: Hand) -> [f64; 9] {
    let mut f = [0.0; 9];
    f[0] = hand.hcp() as f64;
    for s in Suit::ALL {
        f[1 + s.index()] = hand.suit_len(s) as f64;
    }
    for (i, r) in [Rank::ACE, Rank::KING, Rank::QUEEN, Rank::JACK].into_iter().enumerate() {
        f[5 + i] = hand.count_rank(r) as f64;
    }
    f
}

/// Bids seen in the opening experiment's label set, PASS through 4♥.
pub fn label_set() -> Vec<Bid> {
    ["PASS", "1C", "1D", "1H", "1S", "1NT", "2C", "2D", "2H", "2S", "2NT", "3C", "3D", "3H", "3S", "4H"]
        .iter()
        .map(|s| s.parse().expect("valid bid"))
        .collect()
}

/// `n` random hands labelled by [`expert_open`]; with probability `noise`
/// a label is replaced by a uniform draw from [`label_set`].
pub fn expert_labels(n: usize, seed: u64, noise: f64) -> Vec<LabeledHand> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = label_set();
    (0..n)
        .map(|_| {
            let hand = Hand::random(&mut rng);
            let mut bid = expert_open(hand);
            if noise > 0.0 && rng.random::<f64>() < noise {
                bid = *labels.choose(&mut rng).expect("non-empty");
            }
            LabeledHand { hand, bid }
        })
        .collect()
}

pub fn write_labels(path: &Path, hands: &[LabeledHand]) -> Result<(), OpeningError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["pbn", "bid"])?;
    for h in hands {
        w.write_record([h.hand.to_string(), h.bid.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<LabeledHand>, OpeningError> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let bad = |message: String| OpeningError::Parse { line, message };
        let hand = cards::parse_pbn(rec.get(0).unwrap_or("")).map_err(|e| bad(e.to_string()))?;
        let bid: Bid = rec.get(1).unwrap_or("").parse().map_err(bad)?;
        out.push(LabeledHand { hand, bid });
    }
    Ok(out)
}

/// Training hands embedded with one model, with their labels.
pub struct LabeledCorpus {
    pub corpus: Corpus,
    pub labels: Vec<Bid>,
}

impl LabeledCorpus {
    pub fn build(model: &B2VModel, hands: &[LabeledHand]) -> LabeledCorpus {
        let h: Vec<Hand> = hands.iter().map(|l| l.hand).collect();
        LabeledCorpus {
            corpus: crate::vecspace::build_corpus(model, &h),
            labels: hands.iter().map(|l| l.bid).collect(),
        }
    }
}

/// Label of the nearest training hand in embedding space.
pub fn knn_open(lc: &LabeledCorpus, model: &B2VModel, hand: Hand) -> Result<Bid, OpeningError> {
    let n = lc.corpus.nearest(&model.embed(hand), 1)?;
    Ok(lc.labels[n.hits[0].index])
}

/// Labels of the nearest training hands of many queries at once.
pub fn knn_open_batch(lc: &LabeledCorpus, model: &B2VModel, hands: &[Hand]) -> Result<Vec<Bid>, OpeningError> {
    let e = model.embed_batch(hands);
    e.rows()
        .into_iter()
        .map(|row| {
            let n = lc.corpus.nearest(row.as_slice().expect("contiguous"), 1)?;
            Ok(lc.labels[n.hits[0].index])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputKind {
    /// The 52-card binary encoding.
    Raw,
    /// The nine hand-evaluation features.
    Heuristic,
    /// Both, 61 inputs.
    Combined,
}

impl InputKind {
    pub const ALL: [InputKind; 3] = [InputKind::Raw, InputKind::Heuristic, InputKind::Combined];

    pub fn width(self) -> usize {
        match self {
            InputKind::Raw => 52,
            InputKind::Heuristic => 9,
            InputKind::Combined => 61,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InputKind::Raw => "Raw",
            InputKind::Heuristic => "Heuristic",
            InputKind::Combined => "Combined",
        }
    }

    fn inputs(self, hands: &[Hand]) -> Array2<f64> {
        let heur = || {
            let mut x = Array2::zeros((hands.len(), 9));
            for (i, h) in hands.iter().enumerate() {
                for (j, v) in heuristic_features(*h).into_iter().enumerate() {
                    x[[i, j]] = v;
                }
            }
            x
        };
        match self {
            InputKind::Raw => encode_hands(hands),
            InputKind::Heuristic => heur(),
            InputKind::Combined => concatenate![Axis(1), encode_hands(hands), heur()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct OpenerConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for OpenerConfig {
    fn default() -> Self {
        OpenerConfig { epochs: 200, batch_size: 64, lr: 1e-3, seed: 1 }
    }
}

/// A level net (PASS, 1..7) and a denomination net (C, D, H, S, NT) over
/// one kind of input, standardized with training-set statistics.
#[derive(Debug, Clone)]
pub struct OpenerNet {
    pub kind: InputKind,
    pub level: Net,
    pub denomination: Net,
    mean: Array1<f64>,
    scale: Array1<f64>,
}

const HIDDEN: [usize; 3] = [8, 16, 8];

fn classifier(inputs: usize, classes: usize, rng: &mut ChaCha8Rng) -> Net {
    let relu = Activation::Relu;
    Net::mlp(
        &[inputs, HIDDEN[0], HIDDEN[1], HIDDEN[2], classes],
        &[relu, relu, relu, Activation::Linear],
        rng,
    )
}

fn fit_classifier(net: &mut Net, x: &Array2<f64>, y: &[usize], cfg: &OpenerConfig, rng: &mut ChaCha8Rng) {
    let mut adam = Adam::new(cfg.lr);
    let mut order: Vec<usize> = (0..y.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for batch in order.chunks(cfg.batch_size) {
            let xb = x.select(Axis(0), batch);
            let yb: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
            let (logits, cache) = net.forward(&xb, Mode::Train).expect("widths fixed");
            let (_, g) = nn::loss_softmax_ce(&logits, &yb).expect("labels in range");
            let (grads, _) = net.backward(&cache, &g).expect("same cache");
            adam.step_net(net, &grads);
        }
    }
}

fn argmax(row: ndarray::ArrayView1<f64>) -> usize {
    row.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
        .0
}

impl OpenerNet {
    pub fn train(kind: InputKind, train: &[LabeledHand], cfg: &OpenerConfig) -> Result<OpenerNet, OpeningError> {
        check_labels(train)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let hands: Vec<Hand> = train.iter().map(|l| l.hand).collect();
        let raw = kind.inputs(&hands);
        let mean = raw.mean_axis(Axis(0)).expect("non-empty");
        let scale = raw.std_axis(Axis(0), 0.0).mapv(|s| if s > 1e-9 { 1.0 / s } else { 1.0 });
        let x = (&raw - &mean) * &scale;
        let levels: Vec<usize> = train.iter().map(|l| l.bid.level() as usize).collect();
        let mut level = classifier(kind.width(), 8, &mut rng);
        fit_classifier(&mut level, &x, &levels, cfg, &mut rng);
        let contracts: Vec<usize> = (0..train.len()).filter(|&i| train[i].bid != Bid::Pass).collect();
        let mut denomination = classifier(kind.width(), 5, &mut rng);
        if !contracts.is_empty() {
            let xd = x.select(Axis(0), &contracts);
            let yd: Vec<usize> = contracts
                .iter()
                .map(|&i| train[i].bid.strain().expect("contract").index())
                .collect();
            fit_classifier(&mut denomination, &xd, &yd, cfg, &mut rng);
        }
        Ok(OpenerNet { kind, level, denomination, mean, scale })
    }

    pub fn predict(&self, hands: &[Hand]) -> Vec<Bid> {
        let x = (&self.kind.inputs(hands) - &self.mean) * &self.scale;
        let lv = self.level.infer(&x).expect("widths fixed");
        let dn = self.denomination.infer(&x).expect("widths fixed");
        lv.rows()
            .into_iter()
            .zip(dn.rows())
            .map(|(l, d)| match argmax(l) {
                0 => Bid::Pass,
                level => bid(level as u8, Strain::from_index(argmax(d))),
            })
            .collect()
    }
}

fn check_labels(train: &[LabeledHand]) -> Result<(), OpeningError> {
    let first = train.first().ok_or(OpeningError::Empty)?.bid;
    if train.iter().all(|l| l.bid == first) {
        return Err(OpeningError::SingleClass(first));
    }
    Ok(())
}

/// Raw, Heuristic and Combined openers.
pub struct OpenerNets {
    pub nets: Vec<OpenerNet>,
}

pub fn train_openers(train: &[LabeledHand], cfg: &OpenerConfig) -> Result<OpenerNets, OpeningError> {
    let nets = InputKind::ALL
        .into_iter()
        .map(|k| OpenerNet::train(k, train, cfg))
        .collect::<Result<_, _>>()?;
    Ok(OpenerNets { nets })
}

pub fn accuracy(pred: &[Bid], truth: &[LabeledHand]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(p, t)| **p == t.bid).count();
    hits as f64 / truth.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyTable {
    pub rows: Vec<(String, f64)>,
}

impl AccuracyTable {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.0 == name).map(|r| r.1)
    }
}

impl fmt::Display for AccuracyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} accuracy", "model")?;
        for (name, acc) in &self.rows {
            writeln!(f, "{name:<16} {:>7.2}%", 100.0 * acc)?;
        }
        Ok(())
    }
}

/// Accuracy of the embedding 1-NN, the rule table and each MLP on `test`.
pub fn evaluate_openers(
    nets: &OpenerNets,
    knn: (&LabeledCorpus, &B2VModel),
    test: &[LabeledHand],
) -> Result<AccuracyTable, OpeningError> {
    let hands: Vec<Hand> = test.iter().map(|l| l.hand).collect();
    let mut rows = vec![
        ("Embedding 1-NN".to_string(), accuracy(&knn_open_batch(knn.0, knn.1, &hands)?, test)),
        ("Expert".to_string(), accuracy(&hands.iter().map(|h| expert_open(*h)).collect::<Vec<_>>(), test)),
    ];
    for net in &nets.nets {
        rows.push((net.kind.name().to_string(), accuracy(&net.predict(&hands), test)));
    }
    Ok(AccuracyTable { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControversyRow {
    pub hand: Hand,
    pub label: Bid,
    pub distance: f64,
}

/// The `k` labelled hands nearest to `hand` in embedding space.
pub fn controversy_report(hand: Hand, lc: &LabeledCorpus, model: &B2VModel, k: usize) -> Result<Vec<ControversyRow>, OpeningError> {
    let n: Neighbors = lc.corpus.nearest(&model.embed(hand), k)?;
    Ok(n.hits
        .into_iter()
        .map(|h| ControversyRow { hand: h.hand, label: lc.labels[h.index], distance: h.distance })
        .collect())
}

pub fn format_controversy(hand: Hand, rows: &[ControversyRow]) -> String {
    let mut s = format!("{:<20} {:<20} {:<8} {:>8}\n", "hand", "nearest hands", "opening", "distance");
    for (i, r) in rows.iter().enumerate() {
        let first = if i == 0 { hand.to_string() } else { String::new() };
        s.push_str(&format!("{first:<20} {:<20} {:<8} {:>8.3}\n", r.hand.to_string(), r.label.to_string(), r.distance));
    }
    s
}

/// The four hands discussed as non-obvious openings.
pub const CONTROVERSIAL: [&str; 4] = ["AK8765.Q76.J65.6", "AQ765.K5.QJ5.A65", "AJ102.KQ.65.QJ654", "AK65.AK65.K765.6"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_pbn;

    fn open(s: &str) -> String {
        expert_open(parse_pbn(s).unwrap()).to_string()
    }

    #[test]
    fn rule_table_examples() {
        assert_eq!(open("J84.Q73.9652.K74"), "PASS");
        assert_eq!(open("AK4.Q73.K652.A74"), "1NT");
        assert_eq!(open("AK4.QJ73.K65.A74"), "1NT");
        assert_eq!(open("AQ984.K73.K52.74"), "1S");
        assert_eq!(open("A4.KQJ873.652.74"), "2H");
        assert_eq!(open("4.KQJ8732.K52.74"), "3H");
        assert_eq!(open("AKQ4.AQ73.Q2.A74"), "2NT");
        assert_eq!(open("4.Q73.KQ652.AK74"), "1D");
        assert_eq!(open("A4.Q73.K5.AJ7432"), "2C");
        assert_eq!(open("A4.K73.K542.A743"), "1C");
        assert_eq!(open("AKQ84.AKJ73.K.74"), "1S");
    }

    #[test]
    fn features_of_the_reference_hand() {
        let f = heuristic_features(parse_pbn("A.KQ9832.T94.AKT").unwrap());
        assert_eq!(f, [16.0, 1.0, 6.0, 3.0, 3.0, 2.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn every_hand_gets_a_label_in_range() {
        let labels = label_set();
        let mut seen = std::collections::BTreeSet::new();
        for l in expert_labels(100_000, 3, 0.0) {
            assert!(l.bid == Bid::Pass || l.bid.level() <= 3, "{:?}", l);
            assert!(labels.contains(&l.bid), "{:?}", l);
            seen.insert(l.bid);
        }
        assert!(seen.len() >= 12);
    }

    #[test]
    fn label_file_round_trip() {
        let l = expert_labels(30, 1, 0.2);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.csv");
        write_labels(&p, &l).unwrap();
        assert_eq!(read_labels(&p).unwrap(), l);
    }

    #[test]
    fn single_class_training_is_refused() {
        let l: Vec<LabeledHand> = expert_labels(50, 1, 0.0).into_iter().map(|l| LabeledHand { bid: Bid::Pass, ..l }).collect();
        assert!(matches!(train_openers(&l, &OpenerConfig::default()), Err(OpeningError::SingleClass(Bid::Pass))));
    }
}
