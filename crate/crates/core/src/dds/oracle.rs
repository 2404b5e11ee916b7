//! Plain exhaustive minimax over every legal play sequence, for reduced decks.
//!
//! No pruning, no caching, no equivalence reduction: it shares nothing with
//! the solver beyond the card types, which is what makes it a useful check.

use rand::seq::SliceRandom;

use super::DdsError;
use crate::cards::{Card, CardSet, Rank, Seat, Strain, Suit};

/// Largest deck the oracle accepts, in ranks per suit.
pub const MAX_RANKS: usize = 5;

/// A deal over the top `ranks` cards of each suit, `ranks` cards per seat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiniDeal {
    ranks: usize,
    hands: [Vec<Card>; 4],
}

impl MiniDeal {
    pub fn new(hands: [Vec<Card>; 4]) -> Result<MiniDeal, DdsError> {
        let ranks = hands[0].len();
        if ranks > MAX_RANKS {
            return Err(DdsError::DeckTooLarge(ranks));
        }
        let lens = hands.each_ref().map(|h| h.len() as u32);
        if lens.iter().any(|&l| l as usize != ranks) {
            return Err(DdsError::UnequalHands(lens));
        }
        let lowest = 15 - ranks as u8;
        let mut seen = CardSet::EMPTY;
        for c in hands.iter().flatten() {
            if c.rank.value() < lowest {
                return Err(DdsError::InvalidCard);
            }
            if !seen.insert(*c) {
                return Err(DdsError::Overlap);
            }
        }
        Ok(MiniDeal { ranks, hands })
    }

    /// Uniformly random reduced deal.
    pub fn random<R: rand::Rng>(ranks: usize, rng: &mut R) -> Result<MiniDeal, DdsError> {
        if ranks > MAX_RANKS {
            return Err(DdsError::DeckTooLarge(ranks));
        }
        let mut deck: Vec<Card> = Suit::ALL
            .into_iter()
            .flat_map(|s| (0..ranks).map(move |i| Card::new(s, Rank::new(14 - i as u8).unwrap())))
            .collect();
        deck.shuffle(rng);
        let hands = std::array::from_fn(|i| deck[i * ranks..(i + 1) * ranks].to_vec());
        MiniDeal::new(hands)
    }

    pub fn ranks(&self) -> usize {
        self.ranks
    }

    pub fn hand(&self, seat: Seat) -> &[Card] {
        &self.hands[seat.index()]
    }

    pub fn card_sets(&self) -> [CardSet; 4] {
        self.hands.each_ref().map(|h| h.iter().copied().collect())
    }
}

/// Tricks the declaring side takes with best play, opening lead from declarer's left.
pub fn oracle_solve(mini: &MiniDeal, declarer: Seat, strain: Strain) -> Result<u8, DdsError> {
    if mini.ranks > MAX_RANKS {
        return Err(DdsError::DeckTooLarge(mini.ranks));
    }
    let mut hands = mini.hands.clone();
    Ok(best_for(&mut hands, declarer.lho(), strain.suit(), declarer.is_ns()))
}

/// Tricks won by the side (`ns` = North-South) that maximizes them, the
/// other side minimizing, with `leader` to lead.
pub fn best_for(hands: &mut [Vec<Card>; 4], leader: Seat, trump: Option<Suit>, ns: bool) -> u8 {
    let mut trick = Vec::with_capacity(4);
    minimax(hands, &mut trick, leader, leader, trump, ns)
}

fn minimax(
    hands: &mut [Vec<Card>; 4],
    trick: &mut Vec<Card>,
    leader: Seat,
    to_play: Seat,
    trump: Option<Suit>,
    ns: bool,
) -> u8 {
    if trick.is_empty() && hands[leader.index()].is_empty() {
        return 0;
    }
    let hand = &hands[to_play.index()];
    let led = trick.first().map(|c| c.suit);
    let can_follow = led.is_some_and(|s| hand.iter().any(|c| c.suit == s));
    let legal: Vec<usize> = (0..hand.len())
        .filter(|&i| !can_follow || Some(hand[i].suit) == led)
        .collect();

    let maximizing = to_play.is_ns() == ns;
    let mut best: Option<u8> = None;
    for i in legal {
        let card = hands[to_play.index()].remove(i);
        trick.push(card);
        let value = if trick.len() == 4 {
            let win_pos = winner(trick, trump);
            let winner_seat = Seat::from_index(leader.index() + win_pos);
            let won = u8::from(winner_seat.is_ns() == ns);
            let finished: Vec<Card> = std::mem::take(trick);
            let v = won + minimax(hands, trick, winner_seat, winner_seat, trump, ns);
            *trick = finished;
            v
        } else {
            minimax(hands, trick, leader, to_play.lho(), trump, ns)
        };
        trick.pop();
        hands[to_play.index()].insert(i, card);
        best = Some(match best {
            None => value,
            Some(b) if maximizing => b.max(value),
            Some(b) => b.min(value),
        });
    }
    best.unwrap_or(0)
}

fn winner(trick: &[Card], trump: Option<Suit>) -> usize {
    let mut best = 0;
    for (i, c) in trick.iter().enumerate().skip(1) {
        let b = trick[best];
        let beats = if c.suit == b.suit {
            c.rank > b.rank
        } else {
            Some(c.suit) == trump
        };
        if beats {
            best = i;
        }
    }
    best
}
