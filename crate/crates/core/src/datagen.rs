//! Training data: North-South hand pairs with double-dummy trick targets
//! averaged over random East-West layouts, plus flip and suit-rotation
//! augmentation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cards::{self, CardSet, Deal, Hand, PbnError, Seat, Strain, Suit};
use crate::dds::Solver;

pub const HEADER: [&str; 12] = [
    "hand_n", "hand_s", "n_c", "n_d", "n_h", "n_s", "n_nt", "s_c", "s_d", "s_h", "s_s", "s_nt",
];

/// Pairs solved between writes to the output file.
const CHUNK: usize = 32;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error(transparent)]
    Pbn(#[from] PbnError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("{path}: {count} invalid row(s), first: {first}")]
    Rows { path: String, count: usize, first: String },
}

/// Two hands and averaged tricks for declarer N (C, D, H, S, NT) then S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingRow {
    pub hand_n: Hand,
    pub hand_s: Hand,
    pub targets: [f64; 10],
}

impl TrainingRow {
    /// The five targets for North (or South) as declarer.
    pub fn declarer_targets(&self, seat: Seat) -> [f64; 5] {
        let off = if seat == Seat::S { 5 } else { 0 };
        std::array::from_fn(|i| self.targets[off + i])
    }
}

/// Averages the N and S rows of the trick table over `n_layouts` seeded
/// East-West completions; both declarers share the same layouts.
pub fn make_row(hand_n: Hand, hand_s: Hand, n_layouts: usize, seed: u64) -> Result<TrainingRow, DatagenError> {
    make_row_with(&mut Solver::default(), hand_n, hand_s, n_layouts, seed)
}

pub fn make_row_with(
    solver: &mut Solver,
    hand_n: Hand,
    hand_s: Hand,
    n_layouts: usize,
    seed: u64,
) -> Result<TrainingRow, DatagenError> {
    let tables = layouts(solver, hand_n, hand_s, n_layouts, seed)?;
    let mut targets = [0.0; 10];
    for t in &tables {
        for (j, strain) in Strain::ALL.into_iter().enumerate() {
            targets[j] += f64::from(t.get(Seat::N, strain));
            targets[5 + j] += f64::from(t.get(Seat::S, strain));
        }
    }
    for v in &mut targets {
        *v /= n_layouts as f64;
    }
    Ok(TrainingRow { hand_n, hand_s, targets })
}

/// N and S rows of the trick table for each seeded East-West completion.
pub fn layouts(
    solver: &mut Solver,
    hand_n: Hand,
    hand_s: Hand,
    n_layouts: usize,
    seed: u64,
) -> Result<Vec<crate::dds::TrickTable>, DatagenError> {
    if n_layouts == 0 {
        return Err(DatagenError::Invalid("n_layouts must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_layouts)
        .map(|_| {
            let (e, w) = cards::deal_remaining_with(hand_n, hand_s, &mut rng)?;
            let deal = Deal::new([hand_n, e, hand_s, w])?;
            Ok(solver.solve_rows(&deal, &[Seat::N, Seat::S]))
        })
        .collect()
}

/// Swaps the hands and the two target blocks.
pub fn flip_row(row: &TrainingRow) -> TrainingRow {
    let mut targets = [0.0; 10];
    targets[..5].copy_from_slice(&row.targets[5..]);
    targets[5..].copy_from_slice(&row.targets[..5]);
    TrainingRow {
        hand_n: row.hand_s,
        hand_s: row.hand_n,
        targets,
    }
}

/// Suit rotation by one step on both hands, targets following their suits.
fn rotate_once(row: &TrainingRow) -> TrainingRow {
    let mut targets = row.targets;
    for block in 0..2 {
        for suit in Suit::ALL {
            let to = suit.rotated().strain().index();
            targets[block * 5 + to] = row.targets[block * 5 + suit.strain().index()];
        }
    }
    TrainingRow {
        hand_n: row.hand_n.rotate_suits(),
        hand_s: row.hand_s.rotate_suits(),
        targets,
    }
}

/// The row rotated by one, two and three suit steps.
pub fn rotate_row(row: &TrainingRow) -> [TrainingRow; 3] {
    let r1 = rotate_once(row);
    let r2 = rotate_once(&r1);
    let r3 = rotate_once(&r2);
    [r1, r2, r3]
}

/// The row, its three rotations, then the same four for the flipped row.
pub fn augment(row: &TrainingRow) -> [TrainingRow; 8] {
    let f = flip_row(row);
    let [a, b, c] = rotate_row(row);
    let [d, e, g] = rotate_row(&f);
    [*row, a, b, c, f, d, e, g]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetMeta {
    pub seed: u64,
    pub n_layouts: usize,
    pub n_pairs: usize,
    pub rows: usize,
    pub generator: String,
}

impl DatasetMeta {
    pub fn to_text(&self) -> String {
        format!(
            "format=bridgevec-dataset-1\nseed={}\nn_layouts={}\nrows_before_augmentation={}\nrows_after_augmentation={}\ngenerator={}\nencoding={}\n",
            self.seed,
            self.n_layouts,
            self.n_pairs,
            self.rows,
            self.generator,
            cards::ENCODING_ID
        )
    }

    pub fn parse(text: &str) -> Result<DatasetMeta, DatagenError> {
        let kv = crate::config::parse_kv(text).map_err(DatagenError::Invalid)?;
        let get = |k: &str| kv.get(k).cloned().ok_or_else(|| DatagenError::Invalid(format!("meta lacks {k}")));
        let num = |k: &str| -> Result<u64, DatagenError> {
            get(k)?.parse().map_err(|_| DatagenError::Invalid(format!("meta {k} is not a number")))
        };
        Ok(DatasetMeta {
            seed: num("seed")?,
            n_layouts: num("n_layouts")? as usize,
            n_pairs: num("rows_before_augmentation")? as usize,
            rows: num("rows_after_augmentation")? as usize,
            generator: get("generator")?,
        })
    }
}

/// Side-car metadata path: `<path>.meta`.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".meta");
    PathBuf::from(p)
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub n_pairs: usize,
    pub n_layouts: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

/// Random North-South pair `index` of the stream seeded by `seed`, and the
/// seed for its East-West layouts.
pub fn sample_pair(seed: u64, index: u64) -> (Hand, Hand, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = Hand::random(&mut rng);
    let s = Hand::random_from(CardSet::DECK.difference(n.cards()), &mut rng).expect("39 cards left");
    (n, s, rng.random())
}

/// Generates the dataset, writing CSV rows in pair order and the side-car
/// meta file. Output does not depend on `jobs`. `progress` sees the number
/// of pairs finished.
pub fn build_dataset(
    opts: &BuildOptions,
    out_path: &Path,
    progress: impl Fn(usize) + Sync,
) -> Result<DatasetMeta, DatagenError> {
    if opts.n_pairs == 0 || opts.n_layouts == 0 {
        return Err(DatagenError::Invalid("n_pairs and n_layouts must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| DatagenError::Invalid(e.to_string()))?;
    let mut out = csv::Writer::from_writer(BufWriter::new(File::create(out_path)?));
    out.write_record(HEADER)?;
    let mut done = 0;
    for start in (0..opts.n_pairs).step_by(CHUNK) {
        let end = (start + CHUNK).min(opts.n_pairs);
        let rows: Vec<TrainingRow> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map_init(Solver::default, |solver, i| {
                    let (n, s, layout_seed) = sample_pair(opts.seed, i as u64);
                    make_row_with(solver, n, s, opts.n_layouts, layout_seed)
                })
                .collect::<Result<_, _>>()
        })?;
        for row in &rows {
            for r in augment(row) {
                write_row(&mut out, &r)?;
            }
        }
        out.flush()?;
        done = end;
        progress(done);
    }
    out.flush()?;
    let meta = DatasetMeta {
        seed: opts.seed,
        n_layouts: opts.n_layouts,
        n_pairs: done,
        rows: done * 8,
        generator: cards::RNG_NAME.to_string(),
    };
    std::fs::write(meta_path(out_path), meta.to_text())?;
    Ok(meta)
}

fn write_row<W: Write>(out: &mut csv::Writer<W>, row: &TrainingRow) -> Result<(), DatagenError> {
    let mut rec = vec![row.hand_n.to_string(), row.hand_s.to_string()];
    rec.extend(row.targets.iter().map(|t| format!("{t:.4}")));
    out.write_record(&rec)?;
    Ok(())
}

pub fn write_dataset(path: &Path, rows: &[TrainingRow]) -> Result<(), DatagenError> {
    let mut out = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    out.write_record(HEADER)?;
    for r in rows {
        write_row(&mut out, r)?;
    }
    out.flush()?;
    Ok(())
}

/// One problem found by [`validate_dataset`]; `line` is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub rows: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn parse_record(rec: &csv::StringRecord) -> Result<TrainingRow, String> {
    if rec.len() != HEADER.len() {
        return Err(format!("expected {} columns, found {}", HEADER.len(), rec.len()));
    }
    let hand_n = cards::parse_pbn(&rec[0]).map_err(|e| format!("hand_n: {e}"))?;
    let hand_s = cards::parse_pbn(&rec[1]).map_err(|e| format!("hand_s: {e}"))?;
    if !hand_n.cards().is_disjoint(hand_s.cards()) {
        return Err("hands overlap".into());
    }
    let mut targets = [0.0; 10];
    for (i, t) in targets.iter_mut().enumerate() {
        let v: f64 = rec[2 + i]
            .trim()
            .parse()
            .map_err(|_| format!("{}: not a number: {:?}", HEADER[2 + i], &rec[2 + i]))?;
        if !(0.0..=13.0).contains(&v) {
            return Err(format!("{}: target {v} outside [0, 13]", HEADER[2 + i]));
        }
        *t = v;
    }
    Ok(TrainingRow { hand_n, hand_s, targets })
}

fn reader(path: &Path) -> Result<csv::Reader<File>, DatagenError> {
    Ok(csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_path(path)?)
}

/// Checks every row, and the row count against the side-car meta file when
/// one exists.
pub fn validate_dataset(path: &Path) -> Result<ValidationReport, DatagenError> {
    let mut rd = reader(path)?;
    let mut report = ValidationReport::default();
    if rd.headers()?.iter().collect::<Vec<_>>() != HEADER {
        report.violations.push(Violation { line: 1, message: "unexpected header".into() });
    }
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        report.rows += 1;
        match rec {
            Ok(rec) => {
                if let Err(message) = parse_record(&rec) {
                    report.violations.push(Violation { line, message });
                }
            }
            Err(e) => report.violations.push(Violation { line, message: e.to_string() }),
        }
    }
    let meta = meta_path(path);
    if meta.exists() {
        let meta = DatasetMeta::parse(&std::fs::read_to_string(meta)?)?;
        if meta.rows != report.rows {
            report.violations.push(Violation {
                line: report.rows + 1,
                message: format!("meta lists {} rows, file has {}", meta.rows, report.rows),
            });
        }
    }
    Ok(report)
}

/// Reads every row; any invalid row is an error.
pub fn load_dataset(path: &Path) -> Result<Vec<TrainingRow>, DatagenError> {
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        match rec.map_err(|e| e.to_string()).and_then(|r| parse_record(&r)) {
            Ok(r) => rows.push(r),
            Err(m) => bad.push(format!("line {}: {m}", i + 2)),
        }
    }
    if let Some(first) = bad.first() {
        return Err(DatagenError::Rows {
            path: path.display().to_string(),
            count: bad.len(),
            first: first.clone(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_pbn;

    fn reference_row() -> TrainingRow {
        TrainingRow {
            hand_n: parse_pbn("A72.K7.AQJ74.A94").unwrap(),
            hand_s: parse_pbn("J.J852.T9.KQ6532").unwrap(),
            targets: [11.1, 10.5, 7.3, 5.0, 10.6, 11.1, 10.6, 7.2, 4.9, 10.6],
        }
    }

    #[test]
    fn flip_is_an_involution() {
        let r = reference_row();
        let f = flip_row(&r);
        assert_eq!(f.hand_n.to_string(), "J.J852.T9.KQ6532");
        assert_eq!(&f.targets[..5], &[11.1, 10.6, 7.2, 4.9, 10.6]);
        assert_eq!(flip_row(&f), r);
    }

    #[test]
    fn rotation_moves_targets_with_suits() {
        let r = reference_row();
        let [r1, _, _] = rotate_row(&r);
        assert_eq!(r1.hand_n, r.hand_n.rotate_suits());
        // hearts become spades, clubs become diamonds
        assert_eq!(r1.targets[Strain::Spades.index()], r.targets[Strain::Hearts.index()]);
        assert_eq!(r1.targets[Strain::Diamonds.index()], r.targets[Strain::Clubs.index()]);
        for x in rotate_row(&r) {
            assert_eq!(x.targets[4], r.targets[4]);
            assert_eq!(x.targets[9], r.targets[9]);
        }
        assert_eq!(rotate_once(&rotate_row(&r)[2]), r);
    }

    #[test]
    fn pair_sampling_is_deterministic_and_disjoint() {
        let a = sample_pair(3, 17);
        assert_eq!(a, sample_pair(3, 17));
        assert_ne!(a.0, sample_pair(3, 18).0);
        assert!(a.0.cards().is_disjoint(a.1.cards()));
    }

    #[test]
    fn meta_round_trips() {
        let m = DatasetMeta {
            seed: 9,
            n_layouts: 5,
            n_pairs: 2,
            rows: 16,
            generator: "chacha8".into(),
        };
        assert_eq!(DatasetMeta::parse(&m.to_text()).unwrap(), m);
    }
}
