//! Double-dummy solver.
//!
//! [`Solver`] runs a zero-window alpha-beta search over card plays. Each
//! probe answers "can North-South still take `target` tricks?"; the exact
//! value is found by stepping the target up or down from a guess.
//!
//! Each search result carries the set of cards whose ranks it depended on.
//! Trick-boundary positions are cached in a [`TransTable`] as classes: the
//! suit lengths of every hand plus the holders of just those relevant top
//! cards, so one entry covers every position differing only in lower spots.
//! Cards adjacent in rank among the cards still in play are interchangeable,
//! and only one of each run is searched; low cards that cannot affect the
//! trick are pruned the same way. Sure winners cut the search off early.
//!
//! [`oracle`] holds an unpruned exhaustive minimax used to cross-check the
//! solver on reduced decks.

pub mod oracle;
mod search;
mod table;

use std::fmt;

use thiserror::Error;

use crate::cards::{CardSet, Deal, Seat, Strain, FULL_DECK};

pub use oracle::{oracle_solve, MiniDeal};
pub use table::TransTable;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DdsError {
    #[error("hands overlap")]
    Overlap,
    #[error("hands must hold equal numbers of cards, found {0:?}")]
    UnequalHands([u32; 4]),
    #[error("card outside the deck")]
    InvalidCard,
    #[error("reduced deck too large for exhaustive search: {0} ranks per suit (max {max})", max = oracle::MAX_RANKS)]
    DeckTooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// log2 of the number of transposition-table slots; 0 disables the table.
    pub tt_bits: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tt_bits: 20 }
    }
}

/// Tricks for every (declarer, strain) pair, rows N, E, S, W and columns C, D, H, S, NT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrickTable {
    pub tricks: [[u8; 5]; 4],
}

impl TrickTable {
    pub fn get(&self, declarer: Seat, strain: Strain) -> u8 {
        self.tricks[declarer.index()][strain.index()]
    }

    pub fn set(&mut self, declarer: Seat, strain: Strain, tricks: u8) {
        self.tricks[declarer.index()][strain.index()] = tricks;
    }
}

impl fmt::Display for TrickTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "declarer   C   D   H   S  NT")?;
        for seat in [Seat::N, Seat::S, Seat::E, Seat::W] {
            write!(f, "{:>8}", seat.to_char())?;
            for t in self.tricks[seat.index()] {
                write!(f, "{t:>4}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Counters from the most recent solve.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    pub nodes: u64,
    pub probes: u32,
}

/// A reusable solver. Cached bounds stay valid across deals, declarers and
/// calls, so one instance per worker thread amortizes the table.
pub struct Solver {
    config: SolverConfig,
    tables: [Option<TransTable>; 5],
    last: SolveStats,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(SolverConfig::default())
    }
}

impl Solver {
    pub fn new(config: SolverConfig) -> Self {
        Solver {
            config,
            tables: Default::default(),
            last: SolveStats::default(),
        }
    }

    pub fn stats(&self) -> SolveStats {
        self.last
    }

    /// Tricks won by the declaring side with the opening lead from declarer's left.
    pub fn solve(&mut self, deal: &Deal, declarer: Seat, strain: Strain) -> u8 {
        let hands = deal.hands().map(|h| h.cards());
        self.solve_cards(hands, declarer, strain)
            .expect("a valid deal is a valid position")
    }

    /// Like [`Solver::solve`] for any position with equal-sized, disjoint hands.
    pub fn solve_cards(
        &mut self,
        hands: [CardSet; 4],
        declarer: Seat,
        strain: Strain,
    ) -> Result<u8, DdsError> {
        self.solve_with_guess(hands, declarer, strain, None)
    }

    fn solve_with_guess(
        &mut self,
        hands: [CardSet; 4],
        declarer: Seat,
        strain: Strain,
        guess: Option<u8>,
    ) -> Result<u8, DdsError> {
        validate(&hands)?;
        let total = hands[0].len() as u8;
        let leader = declarer.lho();
        let table = if self.config.tt_bits == 0 {
            None
        } else {
            let bits = self.config.tt_bits;
            Some(self.tables[strain.index()].get_or_insert_with(|| TransTable::new(bits)))
        };
        let mut search = search::Search::new(hands.map(|h| h.0), strain, table);
        // Searched value is North-South tricks.
        let ns_guess = guess.map(|g| if declarer.is_ns() { g } else { total - g });
        let ns = search.value(leader.index(), ns_guess);
        self.last = SolveStats {
            nodes: search.nodes,
            probes: search.probes,
        };
        Ok(if declarer.is_ns() { ns } else { total - ns })
    }

    pub fn solve_table(&mut self, deal: &Deal) -> TrickTable {
        self.solve_rows(deal, &Seat::ALL)
    }

    /// Fills only the rows of the given declarers; other rows stay zero.
    pub fn solve_rows(&mut self, deal: &Deal, declarers: &[Seat]) -> TrickTable {
        let hands = deal.hands().map(|h| h.cards());
        let mut table = TrickTable::default();
        for strain in Strain::ALL {
            let mut prev: Option<(Seat, u8)> = None;
            for &d in declarers {
                // Partners usually take the same number of tricks.
                let guess = prev.map(|(p, t)| if p.is_ns() == d.is_ns() { t } else { 13 - t });
                let t = self
                    .solve_with_guess(hands, d, strain, guess)
                    .expect("a valid deal is a valid position");
                table.set(d, strain, t);
                prev = Some((d, t));
            }
        }
        table
    }
}

fn validate(hands: &[CardSet; 4]) -> Result<(), DdsError> {
    let mut seen = 0u64;
    for h in hands {
        if h.0 & !FULL_DECK != 0 {
            return Err(DdsError::InvalidCard);
        }
        if seen & h.0 != 0 {
            return Err(DdsError::Overlap);
        }
        seen |= h.0;
    }
    let lens = hands.map(|h| h.len());
    if lens.iter().any(|&l| l != lens[0]) {
        return Err(DdsError::UnequalHands(lens));
    }
    Ok(())
}

pub fn solve(deal: &Deal, declarer: Seat, strain: Strain) -> u8 {
    Solver::default().solve(deal, declarer, strain)
}

pub fn solve_table(deal: &Deal) -> TrickTable {
    Solver::default().solve_table(deal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::{parse_pbn, Hand};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) const FIG_DEAL: &str =
        "N:A.KQ9832.T94.AKT Q4.AT7.QJ872.732 KJ95.J65.K3.J654 T87632.4.A65.Q98";

    #[test]
    fn all_trumps_take_everything() {
        let n = parse_pbn("AKQJT98765432...").unwrap();
        let s = parse_pbn(".AKQJT98765432..").unwrap();
        let (e, w) = crate::cards::deal_remaining(n, s, 1).unwrap();
        let deal = Deal::new([n, e, s, w]).unwrap();
        assert_eq!(solve(&deal, Seat::N, Strain::Spades), 13);
        assert_eq!(solve(&deal, Seat::S, Strain::Hearts), 13);
    }

    #[test]
    fn reference_board_hearts() {
        let deal = Deal::parse(FIG_DEAL).unwrap();
        assert_eq!(solve(&deal, Seat::N, Strain::Hearts), 10);
    }

    #[test]
    fn value_does_not_depend_on_table_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut with = Solver::default();
        let mut without = Solver::new(SolverConfig { tt_bits: 0 });
        let mut tiny = Solver::new(SolverConfig { tt_bits: 2 });
        for _ in 0..6 {
            let deal = crate::cards::random_deal(&mut rng);
            // 8-card endings keep the table-free search quick.
            let hands = deal.hands().map(|h| {
                CardSet(h.cards().iter().take(8).fold(0, |m, c| m | 1 << c.bit()))
            });
            for strain in Strain::ALL {
                let a = with.solve_cards(hands, Seat::S, strain).unwrap();
                let b = without.solve_cards(hands, Seat::S, strain).unwrap();
                let c = tiny.solve_cards(hands, Seat::S, strain).unwrap();
                assert_eq!((a, a), (b, c));
            }
        }
    }

    #[test]
    fn matches_exhaustive_search_on_small_decks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut solver = Solver::new(SolverConfig { tt_bits: 12 });
        // the oracle is slow at five ranks
        for (ranks, deals) in [(3, 40), (4, 40), (5, 3)] {
            for _ in 0..deals {
                let m = MiniDeal::random(ranks, &mut rng).unwrap();
                for declarer in Seat::ALL {
                    for strain in Strain::ALL {
                        let want = oracle_solve(&m, declarer, strain).unwrap();
                        let got = solver.solve_cards(m.card_sets(), declarer, strain).unwrap();
                        assert_eq!(got, want, "{m:?} {declarer} {strain:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn reference_board_table() {
        let deal = Deal::parse(FIG_DEAL).unwrap();
        let t = solve_table(&deal);
        // columns C, D, H, S, NT
        assert_eq!(t.tricks[Seat::N.index()], [9, 6, 10, 7, 8]);
        assert_eq!(t.tricks[Seat::S.index()], [9, 6, 10, 7, 8]);
        assert_eq!(t.tricks[Seat::E.index()], [3, 7, 3, 6, 3]);
        assert_eq!(t.tricks[Seat::W.index()], [4, 7, 3, 6, 3]);
    }

    #[test]
    fn rejects_invalid_positions() {
        let n = parse_pbn("AKQJT98765432...").unwrap().cards();
        let mut solver = Solver::default();
        assert_eq!(
            solver.solve_cards([n, n, CardSet::EMPTY, CardSet::EMPTY], Seat::N, Strain::NoTrump),
            Err(DdsError::Overlap)
        );
        let one = Hand::random(&mut ChaCha8Rng::seed_from_u64(1)).cards();
        assert!(matches!(
            solver.solve_cards([one, CardSet::EMPTY, CardSet::EMPTY, CardSet::EMPTY], Seat::N, Strain::NoTrump),
            Err(DdsError::UnequalHands(_))
        ));
    }
}
