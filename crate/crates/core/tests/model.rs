use bridgevec::cards::{Hand, Seat};
use bridgevec::datagen::{augment, TrainingRow};
use bridgevec::model::{self, init_model, predict, split_rows, without_rotations, B2VModel, Examples, TrainConfig};
use bridgevec::vecspace::random_hands;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Rows whose targets are a fixed function of HCP and suit lengths, as
/// eight-row augmented blocks.
fn synthetic_rows(pairs: usize) -> Vec<TrainingRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    (0..pairs)
        .flat_map(|_| {
            let n = Hand::random(&mut rng);
            let s = Hand::random_from(bridgevec::cards::CardSet::DECK.difference(n.cards()), &mut rng).unwrap();
            let f = |h: Hand, o: Hand, j: usize| -> f64 {
                let pts = (h.hcp() + o.hcp()) as f64;
                let fit = if j < 4 { (h.lengths()[3 - j] + o.lengths()[3 - j]) as f64 } else { 6.5 };
                (pts / 40.0 * 9.0 + (fit - 6.5) * 0.6 + 2.0).clamp(0.0, 13.0)
            };
            let mut t = [0.0; 10];
            for j in 0..5 {
                t[j] = f(n, s, j);
                t[5 + j] = f(s, n, j);
            }
            augment(&TrainingRow { hand_n: n, hand_s: s, targets: t })
        })
        .collect()
}

#[test]
fn training_beats_the_untrained_model_and_reloads_exactly() {
    let rows = synthetic_rows(150);
    let (tr, va) = split_rows(&rows, 8, 0.1, 1);
    assert_eq!(tr.len() + va.len(), rows.len());
    assert!(tr.iter().all(|r| !va.iter().any(|v| v.hand_n == r.hand_n && v.hand_s == r.hand_s)));
    let cfg = TrainConfig { epochs: 8, batch_size: 64, lr: 3e-3, ..TrainConfig::default() };
    let (m, h) = model::train_rows(&rows, 8, &cfg).unwrap();
    assert!(h.best_val_loss < 0.5 * h.initial_val_loss, "{h:?}");
    let (m2, h2) = model::train_rows(&rows, 8, &cfg).unwrap();
    assert_eq!(m, m2);
    assert_eq!(h.best_val_loss, h2.best_val_loss);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    m.save(&p).unwrap();
    let back = B2VModel::load(&p).unwrap();
    let (n, s) = (rows[0].hand_n, rows[0].hand_s);
    assert_eq!(predict(&back, n, s, Seat::N).unwrap(), predict(&m, n, s, Seat::N).unwrap());
    assert_eq!(back.embed(n), m.embed(n));
    assert!(predict(&m, n, n, Seat::N).is_err());
    assert_eq!(m.embed_batch(&random_hands(5, 3)).dim(), (5, 8));
}

#[test]
fn dropping_rotations_keeps_original_and_flip() {
    let rows = synthetic_rows(3);
    let kept = without_rotations(&rows);
    assert_eq!(kept.len(), 6);
    assert_eq!(kept[0], rows[0]);
    assert_eq!(kept[1], rows[4]);
    assert_eq!(Examples::from_rows(&kept).len(), 6);
}

#[test]
fn corrupt_model_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    let mut m = init_model(4, 1);
    m.encoding = "other".into();
    m.save(&p).unwrap();
    assert!(B2VModel::load(&p).is_err());
    std::fs::write(&p, "{not json").unwrap();
    assert!(B2VModel::load(&p).is_err());
}
