//! Queries over a corpus of embedded hands: exact Euclidean nearest
//! neighbours, analogy arithmetic, the hands nearest the origin, component
//! statistics, and CSV export.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cards::{self, Hand, Suit};
use crate::model::B2VModel;

#[derive(Debug, Error)]
pub enum VecError {
    #[error("corpus is empty")]
    Empty,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("need at least {0} corpus entries")]
    TooSmall(usize),
    #[error("vector has {got} components, corpus has {want}")]
    Dimension { got: usize, want: usize },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Embedded hands, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub hands: Vec<Hand>,
    /// One row per hand.
    pub vectors: Array2<f64>,
    pub model_id: String,
}

/// Uniformly random hands from a seeded stream.
pub fn random_hands(n: usize, seed: u64) -> Vec<Hand> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Hand::random(&mut rng)).collect()
}

/// Short fingerprint of a model's parameters and statistics.
pub fn model_id(model: &B2VModel) -> String {
    use sha2::{Digest, Sha256};
    let text = serde_json::to_string(model).expect("model serializes");
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn build_corpus(model: &B2VModel, hands: &[Hand]) -> Corpus {
    Corpus {
        hands: hands.to_vec(),
        vectors: model.embed_batch(hands),
        model_id: model_id(model),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub hand: Hand,
    pub distance: f64,
}

/// Result of a k-nearest query; `truncated` when `k` exceeded the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbors {
    pub hits: Vec<Neighbor>,
    pub truncated: bool,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.hands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hands.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn push(&mut self, hand: Hand, v: &[f64]) -> Result<(), VecError> {
        if !self.is_empty() && v.len() != self.dim() {
            return Err(VecError::Dimension { got: v.len(), want: self.dim() });
        }
        if self.is_empty() {
            self.vectors = Array2::zeros((0, v.len()));
        }
        self.vectors
            .push_row(ArrayView1::from(v))
            .expect("width checked");
        self.hands.push(hand);
        Ok(())
    }

    /// Exact k smallest Euclidean distances by linear scan, ties in corpus order.
    pub fn nearest(&self, query: &[f64], k: usize) -> Result<Neighbors, VecError> {
        if k == 0 {
            return Err(VecError::ZeroK);
        }
        if self.is_empty() {
            return Err(VecError::Empty);
        }
        if query.len() != self.dim() {
            return Err(VecError::Dimension { got: query.len(), want: self.dim() });
        }
        let mut d: Vec<(f64, usize)> = self
            .vectors
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, row)| (sq_dist(row, query), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let take = k.min(d.len());
        if take < d.len() {
            d.select_nth_unstable_by(take - 1, cmp);
            d.truncate(take);
        }
        d.sort_by(cmp);
        Ok(Neighbors {
            hits: d
                .into_iter()
                .map(|(s, i)| Neighbor { index: i, hand: self.hands[i], distance: s.sqrt() })
                .collect(),
            truncated: k > self.len(),
        })
    }

    /// Nearest hands to `embed(y) + (embed(h1) − embed(h2))`.
    pub fn analogy(&self, model: &B2VModel, y: Hand, h1: Hand, h2: Hand, k: usize) -> Result<Neighbors, VecError> {
        let e = model.embed_batch(&[y, h1, h2]);
        let diff = &e.row(1) - &e.row(2);
        let target = &e.row(0) + &diff;
        self.nearest(target.as_slice().expect("contiguous"), k)
    }

    /// Hands nearest the zero vector.
    pub fn mean_hand_query(&self, k: usize) -> Result<Neighbors, VecError> {
        self.nearest(&vec![0.0; self.dim()], k)
    }

    pub fn stats(&self) -> Result<ComponentStats, VecError> {
        if self.len() < 2 {
            return Err(VecError::TooSmall(2));
        }
        Ok(ComponentStats {
            mean: self.vectors.mean_axis(Axis(0)).expect("non-empty"),
            std: self.vectors.std_axis(Axis(0), 1.0),
        })
    }
}

fn sq_dist(a: ArrayView1<f64>, b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn nearest(corpus: &Corpus, query: &[f64], k: usize) -> Result<Neighbors, VecError> {
    corpus.nearest(query, k)
}

/// Per-component sample mean and standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStats {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

impl std::fmt::Display for ComponentStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "     ")?;
        for i in 0..self.mean.len() {
            write!(f, "{:>9}", format!("v_{i}"))?;
        }
        write!(f, "\nmean ")?;
        for m in &self.mean {
            write!(f, "{m:>9.4}")?;
        }
        write!(f, "\nstd  ")?;
        for s in &self.std {
            write!(f, "{s:>9.4}")?;
        }
        Ok(())
    }
}

/// Decimal places of exported vector components.
pub const EXPORT_DECIMALS: usize = 6;

/// Writes `pbn,v_0..v_{d-1},hcp,spades,hearts,diamonds,clubs`; returns the row count.
pub fn export_embeddings(corpus: &Corpus, path: &Path) -> Result<usize, VecError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header = vec!["pbn".to_string()];
    header.extend((0..corpus.dim()).map(|i| format!("v_{i}")));
    header.extend(["hcp", "spades", "hearts", "diamonds", "clubs"].map(String::from));
    w.write_record(&header)?;
    for (h, v) in corpus.hands.iter().zip(corpus.vectors.rows()) {
        let mut rec = vec![h.to_string()];
        rec.extend(v.iter().map(|x| format!("{x:.prec$}", prec = EXPORT_DECIMALS)));
        rec.push(h.hcp().to_string());
        rec.extend(Suit::ALL.map(|s| h.suit_len(s).to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(corpus.len())
}

/// Reads an exported file back into a corpus (vectors at export precision).
pub fn import_embeddings(path: &Path) -> Result<Corpus, VecError> {
    let mut rd = csv::Reader::from_path(path)?;
    let dim = rd.headers()?.iter().filter(|h| h.starts_with("v_")).count();
    let mut corpus = Corpus {
        hands: Vec::new(),
        vectors: Array2::zeros((0, dim)),
        model_id: "imported".into(),
    };
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let bad = |message: String| VecError::Parse { line, message };
        let hand = cards::parse_pbn(rec.get(0).unwrap_or("")).map_err(|e| bad(e.to_string()))?;
        let v: Vec<f64> = (1..=dim)
            .map(|j| rec.get(j).and_then(|s| s.parse().ok()).ok_or_else(|| bad(format!("bad component v_{}", j - 1))))
            .collect::<Result<_, _>>()?;
        corpus.push(hand, &v)?;
    }
    Ok(corpus)
}

/// Neighbour table: rank, PBN, HCP, shape, distance.
pub fn format_neighbors(n: &Neighbors) -> String {
    let mut s = format!("{:>3}  {:<20} {:>3}  {:<7} {:>8}\n", "#", "hand", "hcp", "shape", "distance");
    for (i, hit) in n.hits.iter().enumerate() {
        let shape: String = hit.hand.shape().iter().map(|l| format!("{l:X}")).collect();
        s.push_str(&format!(
            "{:>3}  {:<20} {:>3}  {:<7} {:>8.4}\n",
            i + 1,
            hit.hand.to_string(),
            hit.hand.hcp(),
            shape,
            hit.distance
        ));
    }
    if n.truncated {
        s.push_str("(fewer hands in the corpus than requested)\n");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::init_model;

    fn small() -> (B2VModel, Corpus) {
        let m = init_model(8, 1);
        let c = build_corpus(&m, &random_hands(300, 2));
        (m, c)
    }

    #[test]
    fn a_corpus_hand_is_its_own_nearest() {
        let (_, c) = small();
        let q = c.vectors.row(17).to_vec();
        let n = c.nearest(&q, 3).unwrap();
        assert_eq!(n.hits[0].index, 17);
        assert_eq!(n.hits[0].distance, 0.0);
        assert!(n.hits.windows(2).all(|w| w[0].distance <= w[1].distance));
    }

    #[test]
    fn oversized_k_returns_everything_flagged() {
        let (_, c) = small();
        let n = c.nearest(&[0.0; 8], 1000).unwrap();
        assert_eq!(n.hits.len(), 300);
        assert!(n.truncated);
        assert!(matches!(c.nearest(&[0.0; 8], 0), Err(VecError::ZeroK)));
        assert!(matches!(c.nearest(&[0.0; 3], 1), Err(VecError::Dimension { .. })));
    }

    #[test]
    fn ties_keep_corpus_order() {
        let h = random_hands(3, 9);
        let mut c = Corpus { hands: vec![], vectors: Array2::zeros((0, 2)), model_id: "t".into() };
        for hand in &h {
            c.push(*hand, &[1.0, 1.0]).unwrap();
        }
        let idx: Vec<usize> = c.nearest(&[0.0, 0.0], 3).unwrap().hits.iter().map(|n| n.index).collect();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn identical_analogy_terms_reduce_to_plain_query() {
        let (m, c) = small();
        let [y, h] = [c.hands[3], c.hands[8]];
        let a = c.analogy(&m, y, h, h, 5).unwrap();
        let b = c.nearest(&m.embed(y), 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stats_of_a_repeated_vector() {
        let h = random_hands(4, 1);
        let mut c = Corpus { hands: vec![], vectors: Array2::zeros((0, 3)), model_id: "t".into() };
        for hand in &h {
            c.push(*hand, &[1.5, -2.0, 0.0]).unwrap();
        }
        let s = c.stats().unwrap();
        assert_eq!(s.mean.to_vec(), vec![1.5, -2.0, 0.0]);
        assert_eq!(s.std.to_vec(), vec![0.0; 3]);
    }

    #[test]
    fn export_round_trip_keeps_neighbours() {
        let (_, c) = small();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        assert_eq!(export_embeddings(&c, &p).unwrap(), 300);
        let back = import_embeddings(&p).unwrap();
        assert_eq!(back.hands, c.hands);
        for i in [0, 50, 299] {
            let q = c.vectors.row(i).to_vec();
            let a: Vec<usize> = c.nearest(&q, 5).unwrap().hits.iter().map(|n| n.index).collect();
            let b: Vec<usize> = back.nearest(&q, 5).unwrap().hits.iter().map(|n| n.index).collect();
            assert_eq!(a, b);
        }
        let text = std::fs::read_to_string(&p).unwrap();
        let row = text.lines().nth(1).unwrap();
        let hcp: u32 = row.split(',').nth(9).unwrap().parse().unwrap();
        assert_eq!(hcp, c.hands[0].hcp());
    }
}
