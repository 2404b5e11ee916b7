//! The hand-embedding network: a shared encoder maps each of the two hands
//! to a batch-normalized vector, and a head maps the concatenated pair to
//! five trick counts (C, D, H, S, NT) for the first hand as declarer.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use ndarray::{concatenate, s, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{self, Hand, Seat, Suit};
use crate::datagen::TrainingRow;
use crate::nn::{self, Activation, Adam, BatchNorm, Dense, Layer, Mode, Net, NnError};

pub const FORMAT: &str = "bridgevec-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("model file: {0}")]
    Format(String),
    #[error("hands overlap")]
    Overlap,
    #[error("dataset is empty or too small: {0}")]
    Data(String),
    #[error("training diverged at epoch {0}")]
    Diverged(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct B2VModel {
    pub format: String,
    pub version: u32,
    /// Input index convention of the binary hand encoding.
    pub encoding: String,
    pub embed_dim: usize,
    /// 52 → 32 → 32 → embed_dim, batch-normalized.
    pub encoder: Net,
    /// 2·embed_dim → 128 → 128 → 5.
    pub head: Net,
}

/// Encoder and head with their own widths; [`init_model`] uses the standard ones.
pub fn init_model_with(embed_dim: usize, hidden: [usize; 2], head_hidden: [usize; 2], seed: u64) -> B2VModel {
    assert!(embed_dim >= 1, "embedding needs at least one component");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elu = Activation::Elu;
    let mut enc = Net::mlp(&[52, hidden[0], hidden[1]], &[elu, elu], &mut rng).layers;
    enc.push(Layer::Dense(Dense::new(hidden[1], embed_dim, Activation::Linear, &mut rng)));
    enc.push(Layer::BatchNorm(BatchNorm::new(embed_dim)));
    let head = Net::mlp(
        &[2 * embed_dim, head_hidden[0], head_hidden[1], 5],
        &[elu, elu, Activation::Linear],
        &mut rng,
    );
    B2VModel {
        format: FORMAT.into(),
        version: VERSION,
        encoding: cards::ENCODING_ID.into(),
        embed_dim,
        encoder: Net::new(enc).expect("widths chain"),
        head,
    }
}

pub fn init_model(embed_dim: usize, seed: u64) -> B2VModel {
    init_model_with(embed_dim, [32, 32], [128, 128], seed)
}

/// Binary encodings of hands, one row each.
pub fn encode_hands(hands: &[Hand]) -> Array2<f64> {
    let mut x = Array2::zeros((hands.len(), 52));
    for (i, h) in hands.iter().enumerate() {
        for c in h.cards().iter() {
            x[[i, c.encoding_index()]] = 1.0;
        }
    }
    x
}

/// Everything `backward_pair` needs from one training-mode pass.
pub struct PairCache {
    enc_n: nn::Cache,
    enc_s: nn::Cache,
    head: nn::Cache,
}

/// Gradients for the encoder (summed over both hand positions) and head.
pub struct PairGrads {
    pub encoder: nn::Grads,
    pub head: nn::Grads,
}

impl B2VModel {
    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.head.param_count()
    }

    /// Flat parameters, encoder then head.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.encoder.params();
        p.extend(self.head.params());
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let k = self.encoder.param_count();
        self.encoder.set_params(&p[..k]);
        self.head.set_params(&p[k..]);
    }

    /// Training-mode forward pass. Each hand position is normalized with
    /// its own batch statistics through the one shared encoder.
    pub fn forward_pair(&mut self, xn: &Array2<f64>, xs: &Array2<f64>) -> Result<(Array2<f64>, PairCache), NnError> {
        let (en, enc_n) = self.encoder.forward(xn, Mode::Train)?;
        let (es, enc_s) = self.encoder.forward(xs, Mode::Train)?;
        let joint = concatenate![Axis(1), en, es];
        let (out, head) = self.head.forward(&joint, Mode::Train)?;
        Ok((out, PairCache { enc_n, enc_s, head }))
    }

    pub fn backward_pair(&self, cache: &PairCache, grad_out: &Array2<f64>) -> Result<PairGrads, NnError> {
        let (head, g) = self.head.backward(&cache.head, grad_out)?;
        let d = self.embed_dim;
        let (mut encoder, _) = self.encoder.backward(&cache.enc_n, &g.slice(s![.., ..d]).to_owned())?;
        let (from_s, _) = self.encoder.backward(&cache.enc_s, &g.slice(s![.., d..]).to_owned())?;
        encoder.add(&from_s);
        Ok(PairGrads { encoder, head })
    }

    /// Inference-mode embeddings, one row per hand.
    pub fn embed_batch(&self, hands: &[Hand]) -> Array2<f64> {
        self.encoder.infer(&encode_hands(hands)).expect("52 inputs")
    }

    pub fn embed(&self, hand: Hand) -> Vec<f64> {
        self.embed_batch(&[hand]).row(0).to_vec()
    }

    /// Tricks for the first hand of each pair as declarer.
    pub fn predict_batch(&self, pairs: &[(Hand, Hand)]) -> Array2<f64> {
        let n: Vec<Hand> = pairs.iter().map(|p| p.0).collect();
        let s: Vec<Hand> = pairs.iter().map(|p| p.1).collect();
        self.predict_encoded(&encode_hands(&n), &encode_hands(&s))
    }

    fn predict_encoded(&self, xn: &Array2<f64>, xs: &Array2<f64>) -> Array2<f64> {
        let en = self.encoder.infer(xn).expect("52 inputs");
        let es = self.encoder.infer(xs).expect("52 inputs");
        self.head.infer(&concatenate![Axis(1), en, es]).expect("head width")
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let text = serde_json::to_string(self).map_err(|e| ModelError::Format(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<B2VModel, ModelError> {
        let text = std::fs::read_to_string(path)?;
        let m: B2VModel = serde_json::from_str(&text).map_err(|e| ModelError::Format(e.to_string()))?;
        if m.format != FORMAT || m.version != VERSION {
            return Err(ModelError::Format(format!("unsupported format {} v{}", m.format, m.version)));
        }
        if m.encoding != cards::ENCODING_ID {
            return Err(ModelError::Format(format!("unknown hand encoding {}", m.encoding)));
        }
        if m.encoder.inputs() != 52 || m.encoder.outputs() != m.embed_dim || m.head.inputs() != 2 * m.embed_dim || m.head.outputs() != 5 {
            return Err(ModelError::Format("layer widths do not fit together".into()));
        }
        Ok(m)
    }
}

/// Five trick estimates (C, D, H, S, NT) for `declarer` (N or S), raw and unclamped.
pub fn predict(model: &B2VModel, hand_n: Hand, hand_s: Hand, declarer: Seat) -> Result<[f64; 5], ModelError> {
    if !hand_n.cards().is_disjoint(hand_s.cards()) {
        return Err(ModelError::Overlap);
    }
    let pair = if declarer == Seat::S { (hand_s, hand_n) } else { (hand_n, hand_s) };
    let out = model.predict_batch(&[pair]);
    Ok(std::array::from_fn(|i| out[[0, i]]))
}

pub fn embed(model: &B2VModel, hand: Hand) -> Vec<f64> {
    model.embed(hand)
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr: f64,
    pub epochs: usize,
    /// Share of N-S pairs (blocks of augmented rows) held out.
    pub val_fraction: f64,
    pub seed: u64,
    pub embed_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 256,
            lr: 1e-3,
            epochs: 30,
            val_fraction: 0.1,
            seed: 1,
            embed_dim: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainHistory {
    /// Validation MSE of the untrained model.
    pub initial_val_loss: f64,
    pub epochs: Vec<EpochStats>,
    /// Epoch (1-based) whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

/// Examples as encoded matrices: N hands, S hands, N-declarer targets.
pub struct Examples {
    pub xn: Array2<f64>,
    pub xs: Array2<f64>,
    pub y: Array2<f64>,
}

impl Examples {
    pub fn from_rows(rows: &[TrainingRow]) -> Examples {
        let n: Vec<Hand> = rows.iter().map(|r| r.hand_n).collect();
        let s: Vec<Hand> = rows.iter().map(|r| r.hand_s).collect();
        let mut y = Array2::zeros((rows.len(), 5));
        for (i, r) in rows.iter().enumerate() {
            for j in 0..5 {
                y[[i, j]] = r.targets[j];
            }
        }
        Examples { xn: encode_hands(&n), xs: encode_hands(&s), y }
    }

    pub fn len(&self) -> usize {
        self.y.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, idx: &[usize]) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        (
            self.xn.select(Axis(0), idx),
            self.xs.select(Axis(0), idx),
            self.y.select(Axis(0), idx),
        )
    }
}

/// Splits rows into train and validation sets by groups of `group` rows,
/// so augmented copies of one pair never straddle the split.
pub fn split_rows(rows: &[TrainingRow], group: usize, val_fraction: f64, seed: u64) -> (Vec<TrainingRow>, Vec<TrainingRow>) {
    let groups: Vec<&[TrainingRow]> = rows.chunks(group).collect();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_val = ((groups.len() as f64) * val_fraction).round() as usize;
    let (val, train) = order.split_at(n_val);
    let pick = |ids: &[usize]| -> Vec<TrainingRow> {
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        ids.iter().flat_map(|&g| groups[g].iter().copied()).collect()
    };
    (pick(train), pick(val))
}

/// Keeps each pair's original and flipped rows, dropping suit rotations.
/// Expects the 8-row blocks written by dataset generation.
pub fn without_rotations(rows: &[TrainingRow]) -> Vec<TrainingRow> {
    rows.chunks(8).flat_map(|c| [c[0], c[4]]).collect()
}

pub fn mse(model: &B2VModel, ex: &Examples) -> f64 {
    let pred = model.predict_encoded(&ex.xn, &ex.xs);
    nn::loss_mse(&pred, &ex.y).expect("shapes match").0
}

/// Trains on `train` with Adam and MSE, keeping the parameters with the
/// lowest validation loss.
pub fn train(
    model: &mut B2VModel,
    train: &Examples,
    val: &Examples,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainHistory, ModelError> {
    if train.len() < 2 || val.is_empty() {
        return Err(ModelError::Data(format!("{} training and {} validation examples", train.len(), val.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut adam_enc = Adam::new(cfg.lr);
    let mut adam_head = Adam::new(cfg.lr);
    let mut history = TrainHistory {
        initial_val_loss: mse(model, val),
        ..Default::default()
    };
    history.best_val_loss = f64::INFINITY;
    let mut best = model.clone();
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let (mut sum, mut count) = (0.0, 0);
        for batch in order.chunks(cfg.batch_size.max(2)) {
            if batch.len() < 2 {
                continue;
            }
            let (xn, xs, y) = train.select(batch);
            let (pred, cache) = model.forward_pair(&xn, &xs)?;
            let (loss, g) = nn::loss_mse(&pred, &y)?;
            if !loss.is_finite() {
                return Err(ModelError::Diverged(epoch));
            }
            let grads = model.backward_pair(&cache, &g)?;
            adam_enc.step_net(&mut model.encoder, &grads.encoder);
            adam_head.step_net(&mut model.head, &grads.head);
            sum += loss * batch.len() as f64;
            count += batch.len();
        }
        let stats = EpochStats {
            epoch,
            train_loss: sum / count as f64,
            val_loss: mse(model, val),
        };
        if !stats.val_loss.is_finite() {
            return Err(ModelError::Diverged(epoch));
        }
        if stats.val_loss < history.best_val_loss {
            history.best_val_loss = stats.val_loss;
            history.best_epoch = epoch;
            best = model.clone();
        }
        on_epoch(&stats);
        history.epochs.push(stats);
    }
    *model = best;
    Ok(history)
}

/// Splits, trains a fresh model and returns it with its history.
pub fn train_rows(rows: &[TrainingRow], group: usize, cfg: &TrainConfig) -> Result<(B2VModel, TrainHistory), ModelError> {
    let (tr, va) = split_rows(rows, group, cfg.val_fraction, cfg.seed);
    let mut model = init_model(cfg.embed_dim, cfg.seed);
    let h = train(&mut model, &Examples::from_rows(&tr), &Examples::from_rows(&va), cfg, |_| {})?;
    Ok((model, h))
}

/// Accuracy buckets: unrounded shares with error below 0.5, 1, 2 and
/// rounded shares with error at most 0, 1, 2, separately for suits and NT.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub suit: [f64; 3],
    pub nt: [f64; 3],
    pub suit_rounded: [f64; 3],
    pub nt_rounded: [f64; 3],
    pub mse: f64,
    pub examples: usize,
}

/// Bucketed accuracy of raw predictions against targets (columns C, D, H, S, NT).
pub fn metrics(pred: &Array2<f64>, target: &Array2<f64>) -> Metrics {
    let mut m = Metrics {
        examples: pred.nrows(),
        ..Default::default()
    };
    let (mut n_suit, mut n_nt) = (0.0f64, 0.0f64);
    let mut sq = 0.0;
    for (p, t) in pred.rows().into_iter().zip(target.rows()) {
        for j in 0..5 {
            let err = (p[j] - t[j]).abs();
            let rerr = (p[j].round() - t[j].round()).abs();
            sq += (p[j] - t[j]).powi(2);
            let (buckets, rounded, n) = if j < 4 {
                (&mut m.suit, &mut m.suit_rounded, &mut n_suit)
            } else {
                (&mut m.nt, &mut m.nt_rounded, &mut n_nt)
            };
            *n += 1.0;
            for (k, lim) in [0.5, 1.0, 2.0].into_iter().enumerate() {
                if err < lim {
                    buckets[k] += 1.0;
                }
            }
            for (k, lim) in [0.0, 1.0, 2.0].into_iter().enumerate() {
                if rerr <= lim {
                    rounded[k] += 1.0;
                }
            }
        }
    }
    for v in m.suit.iter_mut().chain(m.suit_rounded.iter_mut()) {
        *v /= n_suit.max(1.0);
    }
    for v in m.nt.iter_mut().chain(m.nt_rounded.iter_mut()) {
        *v /= n_nt.max(1.0);
    }
    m.mse = sq / (5.0 * pred.nrows().max(1) as f64);
    m
}

pub fn evaluate(model: &B2VModel, ex: &Examples) -> Metrics {
    metrics(&model.predict_encoded(&ex.xn, &ex.xs), &ex.y)
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |v: f64| format!("{:.2}%", 100.0 * v);
        writeln!(f, "trick error (not rounded)      <0.5        <1        <2")?;
        writeln!(f, "suit                     {:>10}{:>10}{:>10}", pct(self.suit[0]), pct(self.suit[1]), pct(self.suit[2]))?;
        writeln!(f, "no-trump                 {:>10}{:>10}{:>10}", pct(self.nt[0]), pct(self.nt[1]), pct(self.nt[2]))?;
        writeln!(f, "trick error (rounded)          0        <=1       <=2")?;
        writeln!(f, "suit                     {:>10}{:>10}{:>10}", pct(self.suit_rounded[0]), pct(self.suit_rounded[1]), pct(self.suit_rounded[2]))?;
        writeln!(f, "no-trump                 {:>10}{:>10}{:>10}", pct(self.nt_rounded[0]), pct(self.nt_rounded[1]), pct(self.nt_rounded[2]))?;
        write!(f, "mse {:.4} over {} examples", self.mse, self.examples)
    }
}

impl Metrics {
    /// Machine-readable form: `table,strain,threshold,fraction` lines.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("table,strain,threshold,fraction\n");
        for (table, vals, th) in [
            ("unrounded", [self.suit, self.nt], ["0.5", "1", "2"]),
            ("rounded", [self.suit_rounded, self.nt_rounded], ["0", "1", "2"]),
        ] {
            for (strain, v) in ["suit", "nt"].iter().zip(vals) {
                for (t, x) in th.iter().zip(v) {
                    s.push_str(&format!("{table},{strain},{t},{x:.6}\n"));
                }
            }
        }
        s.push_str(&format!("mse,all,,{:.6}\n", self.mse));
        s
    }
}

/// Finite-difference check of the assembled model's MSE gradient on one
/// batch; returns the largest relative error.
pub fn grad_check_model(model: &B2VModel, xn: &Array2<f64>, xs: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let mut work = model.clone();
    nn::grad_check(
        &model.params(),
        |p, want_grad| {
            work.set_params(p);
            let (pred, cache) = work.forward_pair(xn, xs).expect("shapes fixed");
            let (l, g) = nn::loss_mse(&pred, y).expect("shapes fixed");
            let grad = want_grad.then(|| {
                let g = work.backward_pair(&cache, &g).expect("same cache");
                let mut flat = g.encoder.flat();
                flat.extend(g.head.flat());
                flat
            });
            (l, grad)
        },
        1e-4,
        1e-6,
    )
}

/// Features of one hand for the linear baseline: HCP and the four suit lengths.
fn simple_features(h: Hand) -> [f64; 5] {
    let mut f = [h.hcp() as f64, 0.0, 0.0, 0.0, 0.0];
    for s in Suit::ALL {
        f[1 + s.index()] = h.suit_len(s) as f64;
    }
    f
}

/// Least-squares linear map from both hands' HCP and suit lengths (plus an
/// intercept) to the five N-declarer targets.
pub struct LinearBaseline {
    /// 11 × 5.
    pub coef: DMatrix<f64>,
}

impl LinearBaseline {
    fn design(rows: &[TrainingRow]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), 11, |i, j| match j {
            0 => 1.0,
            1..=5 => simple_features(rows[i].hand_n)[j - 1],
            _ => simple_features(rows[i].hand_s)[j - 6],
        })
    }

    pub fn fit(rows: &[TrainingRow]) -> Result<LinearBaseline, ModelError> {
        if rows.len() < 11 {
            return Err(ModelError::Data(format!("{} rows for 11 coefficients", rows.len())));
        }
        let x = Self::design(rows);
        let mut coef = DMatrix::zeros(11, 5);
        let svd = x.clone().svd(true, true);
        for j in 0..5 {
            let y = DVector::from_fn(rows.len(), |i, _| rows[i].targets[j]);
            let c = svd.solve(&y, 1e-10).map_err(|e| ModelError::Data(e.to_string()))?;
            coef.set_column(j, &c);
        }
        Ok(LinearBaseline { coef })
    }

    pub fn predict(&self, rows: &[TrainingRow]) -> Array2<f64> {
        let p = Self::design(rows) * &self.coef;
        Array2::from_shape_fn((rows.len(), 5), |(i, j)| p[(i, j)])
    }

    pub fn mse(&self, rows: &[TrainingRow]) -> f64 {
        let pred = self.predict(rows);
        nn::loss_mse(&pred, &Examples::from_rows(rows).y).expect("shapes match").0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub embed_dim: usize,
    pub mses: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Trains one model per (size, seed) on a shared split and reports the
/// mean and sample standard deviation of the kept validation MSE.
pub fn size_sweep(
    rows: &[TrainingRow],
    group: usize,
    sizes: &[usize],
    seeds: usize,
    base: &TrainConfig,
    mut on_run: impl FnMut(usize, u64, f64),
) -> Result<Vec<SweepPoint>, ModelError> {
    let (tr, va) = split_rows(rows, group, base.val_fraction, base.seed);
    let (tr, va) = (Examples::from_rows(&tr), Examples::from_rows(&va));
    let mut out = Vec::new();
    for &d in sizes {
        let mut mses = Vec::new();
        for k in 0..seeds.max(1) as u64 {
            let cfg = TrainConfig {
                embed_dim: d,
                seed: base.seed + k,
                ..base.clone()
            };
            let mut m = init_model(d, cfg.seed);
            let h = train(&mut m, &tr, &va, &cfg, |_| {})?;
            on_run(d, cfg.seed, h.best_val_loss);
            mses.push(h.best_val_loss);
        }
        let mean = mses.iter().sum::<f64>() / mses.len() as f64;
        let std = if mses.len() > 1 {
            (mses.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (mses.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        out.push(SweepPoint { embed_dim: d, mses, mean, std });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_pbn;

    #[test]
    fn parameter_count_matches_the_layer_shapes() {
        let m = init_model(8, 1);
        let want = (52 * 32 + 32) + (32 * 32 + 32) + (32 * 8 + 8) + (16 * 128 + 128) + (128 * 128 + 128) + (128 * 5 + 5);
        assert_eq!(m.param_count(), want);
        assert_eq!(want, 22_349);
        assert_eq!(init_model(8, 1), m);
        assert_ne!(init_model(8, 2).params(), m.params());
    }

    #[test]
    fn declarer_swap_is_input_swap() {
        let m = init_model(8, 3);
        let a = parse_pbn("A432.A432.432.32").unwrap();
        let b = parse_pbn("KQJ5.KQJ5.76.765").unwrap();
        assert_eq!(predict(&m, a, b, Seat::S).unwrap(), predict(&m, b, a, Seat::N).unwrap());
        assert!(predict(&m, a, a, Seat::N).is_err());
    }

    #[test]
    fn metric_buckets_nest() {
        let t = Array2::from_shape_fn((50, 5), |(i, j)| ((i * 7 + j) % 14) as f64);
        let p = Array2::from_shape_fn((50, 5), |(i, j)| t[[i, j]] + ((i + j) % 5) as f64 * 0.6 - 1.2);
        let m = metrics(&p, &t);
        for b in [m.suit, m.nt, m.suit_rounded, m.nt_rounded] {
            assert!(b[0] <= b[1] && b[1] <= b[2]);
        }
        let perfect = metrics(&t, &t);
        assert_eq!(perfect.suit, [1.0; 3]);
        assert_eq!(perfect.nt_rounded, [1.0; 3]);
    }

    fn random_pairs(n: usize, seed: u64) -> (Vec<Hand>, Vec<Hand>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let d = cards::random_deal(&mut rng);
                (d.hand(Seat::N), d.hand(Seat::S))
            })
            .unzip()
    }

    #[test]
    fn reduced_width_model_gradients_match_finite_differences() {
        let m = init_model_with(4, [8, 8], [16, 16], 5);
        let (n, s) = random_pairs(8, 1);
        let y = Array2::from_shape_fn((8, 5), |(i, j)| ((i + 2 * j) % 13) as f64);
        let err = grad_check_model(&m, &encode_hands(&n), &encode_hands(&s), &y);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn encoder_gradient_sums_both_positions() {
        let mut m = init_model_with(4, [8, 8], [16, 16], 2);
        let (n, s) = random_pairs(6, 3);
        let (xn, xs) = (encode_hands(&n), encode_hands(&s));
        let y = Array2::from_elem((6, 5), 7.0);
        let (pred, cache) = m.forward_pair(&xn, &xs).unwrap();
        let (_, g) = nn::loss_mse(&pred, &y).unwrap();
        let total = m.backward_pair(&cache, &g).unwrap();
        // by hand: head gradient split, one encoder backward per position
        let (_, gin) = m.head.backward(&cache.head, &g).unwrap();
        let (a, _) = m.encoder.backward(&cache.enc_n, &gin.slice(s![.., ..4]).to_owned()).unwrap();
        let (b, _) = m.encoder.backward(&cache.enc_s, &gin.slice(s![.., 4..]).to_owned()).unwrap();
        let manual: Vec<f64> = a.flat().iter().zip(b.flat()).map(|(x, y)| x + y).collect();
        assert_eq!(total.encoder.flat(), manual);
        assert!(b.max_abs() > 0.0);
    }

    #[test]
    fn learns_a_constant_target() {
        let (n, s) = random_pairs(1000, 4);
        let rows: Vec<TrainingRow> = n
            .iter()
            .zip(&s)
            .map(|(&hand_n, &hand_s)| TrainingRow { hand_n, hand_s, targets: [6.5; 10] })
            .collect();
        let cfg = TrainConfig { epochs: 60, batch_size: 64, lr: 3e-3, ..Default::default() };
        let (m, h) = train_rows(&rows, 1, &cfg).unwrap();
        assert!(h.best_val_loss < 0.01 * h.initial_val_loss, "{h:?}");
        let p = m.predict_batch(&n.iter().copied().zip(s.iter().copied()).collect::<Vec<_>>());
        let mean_err = p.mapv(|v| (v - 6.5).abs()).mean().unwrap();
        assert!(mean_err < 0.2, "{mean_err}");
        let (_, h2) = train_rows(&rows, 1, &cfg).unwrap();
        assert_eq!(h.epochs, h2.epochs);
    }

    #[test]
    fn linear_baseline_recovers_a_linear_target() {
        let (n, s) = random_pairs(100, 6);
        let rows: Vec<TrainingRow> = n
            .iter()
            .zip(&s)
            .map(|(&hand_n, &hand_s)| {
                let t = 0.2 * hand_n.hcp() as f64 + 0.1 * hand_s.hcp() as f64 + 0.3 * hand_s.suit_len(Suit::Spades) as f64;
                TrainingRow { hand_n, hand_s, targets: [t; 10] }
            })
            .collect();
        let lin = LinearBaseline::fit(&rows).unwrap();
        assert!(lin.mse(&rows) < 1e-12);
    }

    #[test]
    fn save_and_load_round_trip() {
        let m = init_model(4, 9);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        m.save(&p).unwrap();
        assert_eq!(B2VModel::load(&p).unwrap(), m);
    }
}
