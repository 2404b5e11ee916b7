//! Cards, hands and deals, with PBN text handling and the hand heuristics
//! (HCP, shape) used throughout the crate.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Identifier of the random generator behind every seeded draw in the crate.
pub const RNG_NAME: &str = "chacha8";

/// Identifier of the 52-wide binary encoding layout, stored in weights files.
pub const ENCODING_ID: &str = "shdc-a2";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Suit {
    Spades = 0,
    Hearts = 1,
    Diamonds = 2,
    Clubs = 3,
}

impl Suit {
    /// PBN order: spades, hearts, diamonds, clubs.
    pub const ALL: [Suit; 4] = [Suit::Spades, Suit::Hearts, Suit::Diamonds, Suit::Clubs];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Suit {
        Suit::ALL[i & 3]
    }

    pub fn symbol(self) -> char {
        match self {
            Suit::Spades => 'S',
            Suit::Hearts => 'H',
            Suit::Diamonds => 'D',
            Suit::Clubs => 'C',
        }
    }

    /// Suit that takes this suit's place after one PBN group rotation.
    ///
    /// `K2.A76543.Q2.J32` rotates to `A76543.Q2.J32.K2`: hearts become
    /// spades, diamonds hearts, clubs diamonds and spades clubs.
    pub fn rotated(self) -> Suit {
        Suit::from_index(self.index() + 3)
    }

    pub fn strain(self) -> Strain {
        match self {
            Suit::Spades => Strain::Spades,
            Suit::Hearts => Strain::Hearts,
            Suit::Diamonds => Strain::Diamonds,
            Suit::Clubs => Strain::Clubs,
        }
    }
}

/// Card rank, 2 through 14 (ace).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rank(u8);

impl Rank {
    pub const TWO: Rank = Rank(2);
    pub const TEN: Rank = Rank(10);
    pub const JACK: Rank = Rank(11);
    pub const QUEEN: Rank = Rank(12);
    pub const KING: Rank = Rank(13);
    pub const ACE: Rank = Rank(14);

    pub fn new(value: u8) -> Option<Rank> {
        (2..=14).contains(&value).then_some(Rank(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn from_char(c: char) -> Option<Rank> {
        let v = match c.to_ascii_uppercase() {
            'A' => 14,
            'K' => 13,
            'Q' => 12,
            'J' => 11,
            'T' => 10,
            d @ '2'..='9' => d as u8 - b'0',
            _ => return None,
        };
        Some(Rank(v))
    }

    pub fn to_char(self) -> char {
        b"23456789TJQKA"[self.0 as usize - 2] as char
    }

    pub fn hcp(self) -> u32 {
        self.0.saturating_sub(10) as u32
    }

    /// Descending ranks, ace first.
    pub fn all_desc() -> impl Iterator<Item = Rank> {
        (2..=14u8).rev().map(Rank)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Card {
    pub suit: Suit,
    pub rank: Rank,
}

impl Card {
    pub fn new(suit: Suit, rank: Rank) -> Card {
        Card { suit, rank }
    }

    /// Bit position inside a [`CardSet`]: 16 bits per suit, rank as offset.
    pub fn bit(self) -> u32 {
        self.suit.index() as u32 * 16 + self.rank.0 as u32
    }

    pub fn from_bit(bit: u32) -> Card {
        Card {
            suit: Suit::from_index((bit / 16) as usize),
            rank: Rank((bit % 16) as u8),
        }
    }

    /// Position in the 52-wide binary encoding: suit-major (S, H, D, C), ace first.
    pub fn encoding_index(self) -> usize {
        self.suit.index() * 13 + (14 - self.rank.0 as usize)
    }

    pub fn from_encoding_index(i: usize) -> Card {
        Card::new(Suit::from_index(i / 13), Rank(14 - (i % 13) as u8))
    }

    pub fn deck() -> impl Iterator<Item = Card> {
        Suit::ALL
            .into_iter()
            .flat_map(|s| Rank::all_desc().map(move |r| Card::new(s, r)))
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.suit.symbol(), self.rank.to_char())
    }
}

/// Mask with every legal rank bit set in all four suits.
pub const FULL_DECK: u64 = 0x7ffc_7ffc_7ffc_7ffc;

/// Set of cards as a bitboard, see [`Card::bit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct CardSet(pub u64);

impl CardSet {
    pub const EMPTY: CardSet = CardSet(0);
    pub const DECK: CardSet = CardSet(FULL_DECK);

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, card: Card) -> bool {
        self.0 >> card.bit() & 1 == 1
    }

    pub fn insert(&mut self, card: Card) -> bool {
        let had = self.contains(card);
        self.0 |= 1 << card.bit();
        !had
    }

    pub fn remove(&mut self, card: Card) {
        self.0 &= !(1 << card.bit());
    }

    /// Rank bits of one suit, bit `r` set for rank `r`.
    pub fn suit_bits(self, suit: Suit) -> u16 {
        (self.0 >> (suit.index() * 16)) as u16
    }

    pub fn suit_len(self, suit: Suit) -> u32 {
        self.suit_bits(suit).count_ones()
    }

    pub fn union(self, other: CardSet) -> CardSet {
        CardSet(self.0 | other.0)
    }

    pub fn intersection(self, other: CardSet) -> CardSet {
        CardSet(self.0 & other.0)
    }

    pub fn difference(self, other: CardSet) -> CardSet {
        CardSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: CardSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Cards in ascending bit order, see [`Card::bit`].
    pub fn iter(self) -> impl Iterator<Item = Card> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let b = bits.trailing_zeros();
            bits &= bits - 1;
            Some(Card::from_bit(b))
        })
    }
}

impl FromIterator<Card> for CardSet {
    fn from_iter<I: IntoIterator<Item = Card>>(iter: I) -> Self {
        let mut s = CardSet::EMPTY;
        for c in iter {
            s.insert(c);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PbnError {
    #[error("expected 4 dot-separated suit groups, found {0}")]
    WrongGroupCount(usize),
    #[error("invalid rank character {0:?}")]
    InvalidRank(char),
    #[error("duplicate card {0}")]
    DuplicateCard(Card),
    #[error("a hand holds exactly 13 cards, found {0}")]
    WrongCardCount(u32),
    #[error("hands overlap on {0}")]
    Overlap(Card),
    #[error("invalid deal: {0}")]
    Deal(String),
}

/// Exactly 13 distinct cards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hand(CardSet);

impl Hand {
    pub fn from_set(cards: CardSet) -> Result<Hand, PbnError> {
        if cards.0 & !FULL_DECK != 0 {
            return Err(PbnError::Deal("card outside the deck".into()));
        }
        match cards.len() {
            13 => Ok(Hand(cards)),
            n => Err(PbnError::WrongCardCount(n)),
        }
    }

    pub fn from_cards<I: IntoIterator<Item = Card>>(cards: I) -> Result<Hand, PbnError> {
        let mut set = CardSet::EMPTY;
        for c in cards {
            if !set.insert(c) {
                return Err(PbnError::DuplicateCard(c));
            }
        }
        Hand::from_set(set)
    }

    pub fn cards(self) -> CardSet {
        self.0
    }

    pub fn contains(self, card: Card) -> bool {
        self.0.contains(card)
    }

    pub fn suit_len(self, suit: Suit) -> u32 {
        self.0.suit_len(suit)
    }

    /// Suit lengths in PBN order S, H, D, C.
    pub fn lengths(self) -> [u32; 4] {
        Suit::ALL.map(|s| self.suit_len(s))
    }

    pub fn hcp(self) -> u32 {
        self.0.iter().map(|c| c.rank.hcp()).sum()
    }

    /// Suit lengths sorted longest first.
    pub fn shape(self) -> [u32; 4] {
        let mut l = self.lengths();
        l.sort_unstable_by(|a, b| b.cmp(a));
        l
    }

    /// 4333, 4432 or 5332.
    pub fn is_balanced(self) -> bool {
        matches!(self.shape(), [4, 3, 3, 3] | [4, 4, 3, 2] | [5, 3, 3, 2])
    }

    pub fn count_rank(self, rank: Rank) -> u32 {
        Suit::ALL
            .iter()
            .filter(|&&s| self.contains(Card::new(s, rank)))
            .count() as u32
    }

    pub fn encode_binary(self) -> [f64; 52] {
        let mut v = [0.0; 52];
        for c in self.0.iter() {
            v[c.encoding_index()] = 1.0;
        }
        v
    }

    /// Inverse of [`Hand::encode_binary`]; entries above 0.5 count as held.
    pub fn decode_binary(v: &[f64]) -> Result<Hand, PbnError> {
        if v.len() != 52 {
            return Err(PbnError::Deal(format!("encoding has {} entries", v.len())));
        }
        Hand::from_cards(
            v.iter()
                .enumerate()
                .filter(|(_, &x)| x > 0.5)
                .map(|(i, _)| Card::from_encoding_index(i)),
        )
    }

    /// Moves every card to the next suit of the PBN group rotation.
    pub fn rotate_suits(self) -> Hand {
        Hand(self.0.iter().map(|c| Card::new(c.suit.rotated(), c.rank)).collect())
    }

    pub fn rotate_suits_by(self, k: usize) -> Hand {
        (0..k % 4).fold(self, |h, _| h.rotate_suits())
    }

    pub fn random<R: rand::Rng>(rng: &mut R) -> Hand {
        Hand::random_from(CardSet::DECK, rng).expect("full deck has 52 cards")
    }

    /// Uniformly random 13-card subset of `pool`.
    pub fn random_from<R: rand::Rng>(pool: CardSet, rng: &mut R) -> Result<Hand, PbnError> {
        let mut cards: Vec<Card> = pool.iter().collect();
        if cards.len() < 13 {
            return Err(PbnError::WrongCardCount(cards.len() as u32));
        }
        let (chosen, _) = cards.partial_shuffle(rng, 13);
        Hand::from_cards(chosen.iter().copied())
    }
}

impl FromStr for Hand {
    type Err = PbnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_pbn(s)
    }
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_pbn(*self))
    }
}

pub fn parse_pbn(text: &str) -> Result<Hand, PbnError> {
    let text = text.trim();
    let groups: Vec<&str> = text.split('.').collect();
    if groups.len() != 4 {
        return Err(PbnError::WrongGroupCount(groups.len()));
    }
    let mut set = CardSet::EMPTY;
    for (suit, group) in Suit::ALL.into_iter().zip(groups) {
        let mut chars = group.chars().peekable();
        while let Some(c) = chars.next() {
            // "10" is accepted as an alias for "T".
            let rank = if c == '1' && chars.peek() == Some(&'0') {
                chars.next();
                Rank::TEN
            } else {
                Rank::from_char(c).ok_or(PbnError::InvalidRank(c))?
            };
            let card = Card::new(suit, rank);
            if !set.insert(card) {
                return Err(PbnError::DuplicateCard(card));
            }
        }
    }
    Hand::from_set(set)
}

pub fn format_pbn(hand: Hand) -> String {
    let mut out = String::with_capacity(16);
    for (i, suit) in Suit::ALL.into_iter().enumerate() {
        if i > 0 {
            out.push('.');
        }
        for rank in Rank::all_desc() {
            if hand.contains(Card::new(suit, rank)) {
                out.push(rank.to_char());
            }
        }
    }
    out
}

pub fn hcp(hand: Hand) -> u32 {
    hand.hcp()
}

pub fn shape(hand: Hand) -> [u32; 4] {
    hand.shape()
}

pub fn encode_binary(hand: Hand) -> [f64; 52] {
    hand.encode_binary()
}

pub fn rotate_suits(hand: Hand) -> Hand {
    hand.rotate_suits()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Seat {
    N = 0,
    E = 1,
    S = 2,
    W = 3,
}

impl Seat {
    /// Clockwise from North.
    pub const ALL: [Seat; 4] = [Seat::N, Seat::E, Seat::S, Seat::W];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Seat {
        Seat::ALL[i & 3]
    }

    /// Left-hand opponent, the next seat clockwise.
    pub fn lho(self) -> Seat {
        Seat::from_index(self.index() + 1)
    }

    pub fn partner(self) -> Seat {
        Seat::from_index(self.index() + 2)
    }

    pub fn is_ns(self) -> bool {
        matches!(self, Seat::N | Seat::S)
    }

    pub fn from_char(c: char) -> Option<Seat> {
        match c.to_ascii_uppercase() {
            'N' => Some(Seat::N),
            'E' => Some(Seat::E),
            'S' => Some(Seat::S),
            'W' => Some(Seat::W),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        b"NESW"[self.index()] as char
    }
}

impl fmt::Display for Seat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Strain {
    Clubs = 0,
    Diamonds = 1,
    Hearts = 2,
    Spades = 3,
    NoTrump = 4,
}

impl Strain {
    /// Output order C, D, H, S, NT.
    pub const ALL: [Strain; 5] = [
        Strain::Clubs,
        Strain::Diamonds,
        Strain::Hearts,
        Strain::Spades,
        Strain::NoTrump,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Strain {
        Strain::ALL[i]
    }

    pub fn suit(self) -> Option<Suit> {
        match self {
            Strain::Clubs => Some(Suit::Clubs),
            Strain::Diamonds => Some(Suit::Diamonds),
            Strain::Hearts => Some(Suit::Hearts),
            Strain::Spades => Some(Suit::Spades),
            Strain::NoTrump => None,
        }
    }

    pub fn is_major(self) -> bool {
        matches!(self, Strain::Hearts | Strain::Spades)
    }

    pub fn token(self) -> &'static str {
        ["C", "D", "H", "S", "NT"][self.index()]
    }

    pub fn from_token(s: &str) -> Option<Strain> {
        match s.to_ascii_uppercase().as_str() {
            "C" => Some(Strain::Clubs),
            "D" => Some(Strain::Diamonds),
            "H" => Some(Strain::Hearts),
            "S" => Some(Strain::Spades),
            "N" | "NT" => Some(Strain::NoTrump),
            _ => None,
        }
    }
}

impl fmt::Display for Strain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A call in an uncontested auction: pass or a contract bid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bid {
    Pass,
    Contract { level: u8, strain: Strain },
}

impl Bid {
    pub fn contract(level: u8, strain: Strain) -> Option<Bid> {
        (1..=7).contains(&level).then_some(Bid::Contract { level, strain })
    }

    /// All 36 calls: PASS, 1C, 1D, ... 7NT.
    pub fn all() -> impl Iterator<Item = Bid> {
        (0..36).map(Bid::from_index)
    }

    /// Index in `0..36`, PASS first, then contracts in ascending auction order.
    pub fn index(self) -> usize {
        match self {
            Bid::Pass => 0,
            Bid::Contract { level, strain } => 1 + (level as usize - 1) * 5 + strain.index(),
        }
    }

    pub fn from_index(i: usize) -> Bid {
        assert!(i < 36, "bid index {i} out of range");
        if i == 0 {
            Bid::Pass
        } else {
            Bid::Contract {
                level: ((i - 1) / 5 + 1) as u8,
                strain: Strain::from_index((i - 1) % 5),
            }
        }
    }

    pub fn level(self) -> u8 {
        match self {
            Bid::Pass => 0,
            Bid::Contract { level, .. } => level,
        }
    }

    pub fn strain(self) -> Option<Strain> {
        match self {
            Bid::Pass => None,
            Bid::Contract { strain, .. } => Some(strain),
        }
    }
}

impl fmt::Display for Bid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bid::Pass => f.write_str("PASS"),
            Bid::Contract { level, strain } => write!(f, "{level}{strain}"),
        }
    }
}

impl FromStr for Bid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("pass") || s.eq_ignore_ascii_case("p") {
            return Ok(Bid::Pass);
        }
        let mut chars = s.chars();
        let level = chars
            .next()
            .and_then(|c| c.to_digit(10))
            .ok_or_else(|| format!("invalid bid {s:?}"))?;
        let strain = Strain::from_token(chars.as_str()).ok_or_else(|| format!("invalid bid {s:?}"))?;
        Bid::contract(level as u8, strain).ok_or_else(|| format!("bid level out of range in {s:?}"))
    }
}

/// Four pairwise disjoint hands covering the deck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Deal {
    hands: [Hand; 4],
}

impl Deal {
    pub fn new(hands: [Hand; 4]) -> Result<Deal, PbnError> {
        let mut seen = CardSet::EMPTY;
        for h in hands {
            let overlap = seen.intersection(h.cards());
            if let Some(c) = overlap.iter().next() {
                return Err(PbnError::Overlap(c));
            }
            seen = seen.union(h.cards());
        }
        Ok(Deal { hands })
    }

    pub fn hand(&self, seat: Seat) -> Hand {
        self.hands[seat.index()]
    }

    pub fn hands(&self) -> [Hand; 4] {
        self.hands
    }

    /// Parses `"N:<hand> <hand> <hand> <hand>"`, hands clockwise from the named seat.
    pub fn parse(text: &str) -> Result<Deal, PbnError> {
        let text = text.trim();
        let (first, rest) = text
            .split_once(':')
            .ok_or_else(|| PbnError::Deal("missing '<seat>:' prefix".into()))?;
        let mut fc = first.trim().chars();
        let first = match (fc.next().and_then(Seat::from_char), fc.next()) {
            (Some(s), None) => s,
            _ => return Err(PbnError::Deal(format!("invalid first seat {first:?}"))),
        };
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(PbnError::Deal(format!("expected 4 hands, found {}", parts.len())));
        }
        let mut hands = [None; 4];
        for (i, p) in parts.iter().enumerate() {
            let seat = Seat::from_index(first.index() + i);
            hands[seat.index()] = Some(parse_pbn(p)?);
        }
        Deal::new(hands.map(|h| h.expect("all four seats filled")))
    }

    pub fn to_pbn(&self) -> String {
        format!(
            "N:{} {} {} {}",
            self.hands[0], self.hands[1], self.hands[2], self.hands[3]
        )
    }

    pub fn total_hcp(&self) -> u32 {
        self.hands.iter().map(|h| h.hcp()).sum()
    }
}

impl fmt::Display for Deal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_pbn())
    }
}

/// Completes a deal from the North and South hands with a seeded uniformly
/// random East/West split of the remaining 26 cards.
pub fn deal_remaining(hand_n: Hand, hand_s: Hand, seed: u64) -> Result<(Hand, Hand), PbnError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    deal_remaining_with(hand_n, hand_s, &mut rng)
}

pub fn deal_remaining_with<R: rand::Rng>(
    hand_n: Hand,
    hand_s: Hand,
    rng: &mut R,
) -> Result<(Hand, Hand), PbnError> {
    if let Some(c) = hand_n.cards().intersection(hand_s.cards()).iter().next() {
        return Err(PbnError::Overlap(c));
    }
    let mut rest: Vec<Card> = CardSet::DECK
        .difference(hand_n.cards().union(hand_s.cards()))
        .iter()
        .collect();
    rest.shuffle(rng);
    let east = Hand::from_cards(rest[..13].iter().copied())?;
    let west = Hand::from_cards(rest[13..].iter().copied())?;
    Ok((east, west))
}

/// Uniformly random deal.
pub fn random_deal<R: rand::Rng>(rng: &mut R) -> Deal {
    let mut deck: Vec<Card> = Card::deck().collect();
    deck.shuffle(rng);
    let hands: [Hand; 4] = std::array::from_fn(|i| {
        Hand::from_cards(deck[i * 13..(i + 1) * 13].iter().copied()).expect("13 distinct cards")
    });
    Deal::new(hands).expect("shuffled deck partitions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(s: &str) -> Hand {
        parse_pbn(s).unwrap()
    }

    #[test]
    fn parses_reference_example() {
        let hand = h("A.KQ9832.T94.AKT");
        assert_eq!(hand.lengths(), [1, 6, 3, 3]);
        assert_eq!(format_pbn(hand), "A.KQ9832.T94.AKT");
    }

    #[test]
    fn single_suit_hand() {
        let hand = h("AKQJT98765432...");
        assert_eq!(hand.lengths(), [13, 0, 0, 0]);
        assert_eq!(hand.shape(), [13, 0, 0, 0]);
        assert_eq!(hand.to_string(), "AKQJT98765432...");
    }

    #[test]
    fn parse_errors_are_distinct() {
        assert_eq!(parse_pbn("A.KQ.T9."), Err(PbnError::WrongCardCount(5)));
        assert_eq!(parse_pbn("A.KQ9832.T94"), Err(PbnError::WrongGroupCount(3)));
        assert_eq!(
            parse_pbn("A.KQ9832.T94.AKX"),
            Err(PbnError::InvalidRank('X'))
        );
        assert!(matches!(
            parse_pbn("AA.KQ983.T94.AKT"),
            Err(PbnError::DuplicateCard(_))
        ));
    }

    #[test]
    fn canonicalizes_unsorted_and_lowercase_input() {
        let hand = h("2a.kq9832.4T9.KA");
        assert_eq!(hand.to_string(), "A2.KQ9832.T94.AK");
        assert_eq!(h(&hand.to_string()).to_string(), hand.to_string());
        assert_eq!(h("AJ102.KQ.65.QJ654").to_string(), "AJT2.KQ.65.QJ654");
    }

    #[test]
    fn hcp_and_shape() {
        assert_eq!(hcp(h("A.KQ9832.T94.AKT")), 16);
        assert_eq!(shape(h("A.KQ9832.T94.AKT")), [6, 3, 3, 1]);
        assert_eq!(shape(h("A72.K432.JT9.Q96")), [4, 3, 3, 3]);
        assert_eq!(hcp(h("T98765.T98.T9.T9")), 0);
    }

    #[test]
    fn deck_has_forty_hcp() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            assert_eq!(random_deal(&mut rng).total_hcp(), 40);
        }
    }

    #[test]
    fn rotation_matches_group_shift() {
        let hand = h("K2.A76543.Q2.J32");
        let r1 = rotate_suits(hand);
        assert_eq!(r1.to_string(), "A76543.Q2.J32.K2");
        assert_eq!(r1.rotate_suits().to_string(), "Q2.J32.K2.A76543");
        assert_eq!(hand.rotate_suits_by(3).to_string(), "J32.K2.A76543.Q2");
        assert_eq!(hand.rotate_suits_by(4), hand);
    }

    #[test]
    fn spade_encoding_positions() {
        let v = encode_binary(h("AKQJT98765432..."));
        assert!(v[..13].iter().all(|&x| x == 1.0));
        assert!(v[13..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn encoding_is_injective_on_random_hands() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = std::collections::HashMap::new();
        for _ in 0..10_000 {
            let hand = Hand::random(&mut rng);
            let key: Vec<u8> = hand.encode_binary().iter().map(|&x| x as u8).collect();
            if let Some(prev) = seen.insert(key, hand) {
                assert_eq!(prev, hand);
            }
        }
    }

    #[test]
    fn deal_parsing_rotates_from_first_seat() {
        let d = Deal::parse("E:Q4.AT7.QJ872.732 KJ95.J65.K3.J654 T87632.4.A65.Q98 A.KQ9832.T94.AKT")
            .unwrap();
        assert_eq!(d.hand(Seat::N).to_string(), "A.KQ9832.T94.AKT");
        assert_eq!(d.hand(Seat::W).to_string(), "T87632.4.A65.Q98");
        assert_eq!(
            d.to_pbn(),
            "N:A.KQ9832.T94.AKT Q4.AT7.QJ872.732 KJ95.J65.K3.J654 T87632.4.A65.Q98"
        );
        assert!(Deal::parse("N:A.KQ9832.T94.AKT A.KQ9832.T94.AKT KJ95.J65.K3.J654 T87632.4.A65.Q98").is_err());
    }

    #[test]
    fn seat_relations() {
        for s in Seat::ALL {
            assert_eq!(s.partner().partner(), s);
            assert_eq!(s.lho().lho().lho().lho(), s);
        }
        assert_eq!(Seat::N.lho(), Seat::E);
    }

    #[test]
    fn bid_indexing() {
        let all: Vec<Bid> = Bid::all().collect();
        assert_eq!(all.len(), 36);
        for (i, b) in all.iter().enumerate() {
            assert_eq!(b.index(), i);
            assert_eq!(b.to_string().parse::<Bid>().unwrap(), *b);
        }
        assert_eq!("1NT".parse::<Bid>().unwrap(), Bid::contract(1, Strain::NoTrump).unwrap());
        assert!("8C".parse::<Bid>().is_err());
    }

    #[test]
    fn deal_remaining_partitions_and_repeats() {
        let n = h("A.KQ9832.T94.AKT");
        let s = h("KJ95.J65.K3.J654");
        let (e, w) = deal_remaining(n, s, 42).unwrap();
        let d = Deal::new([n, e, s, w]).unwrap();
        assert_eq!(d.total_hcp(), 40);
        assert_eq!(deal_remaining(n, s, 42).unwrap(), (e, w));
        assert!(matches!(deal_remaining(n, n, 1), Err(PbnError::Overlap(_))));
    }

    #[test]
    fn east_spade_lengths_follow_hypergeometric() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        // N holds 3 spades, S holds 2: 8 spades remain among 26 cards.
        let n = h("AKQ.AKQJ.AKQ.AKQ");
        let s = h("JT.T987.JT98.JT9");
        let remaining_spades = 13 - 5;
        let trials = 100_000u64;
        let mut counts = vec![0u64; remaining_spades + 1];
        for seed in 0..trials {
            let (e, _) = deal_remaining(n, s, seed).unwrap();
            counts[e.suit_len(Suit::Spades) as usize] += 1;
        }
        // Oracle: P(k) = C(8,k) C(18,13-k) / C(26,13).
        let choose = |n: u64, k: u64| -> f64 {
            if k > n {
                return 0.0;
            }
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        };
        let total = choose(26, 13);
        let mut chi2 = 0.0;
        let mut dof = 0;
        for (k, &obs) in counts.iter().enumerate() {
            let p = choose(8, k as u64) * choose(18, 13 - k as u64) / total;
            let expected = p * trials as f64;
            if expected < 5.0 {
                continue;
            }
            chi2 += (obs as f64 - expected).powi(2) / expected;
            dof += 1;
        }
        let crit = ChiSquared::new((dof - 1) as f64).unwrap().inverse_cdf(0.99);
        assert!(chi2 < crit, "chi2 {chi2} exceeds {crit}");
    }

    fn arb_hand() -> impl Strategy<Value = Hand> {
        any::<u64>().prop_map(|seed| Hand::random(&mut ChaCha8Rng::seed_from_u64(seed)))
    }

    proptest! {
        #[test]
        fn pbn_round_trip(hand in arb_hand()) {
            prop_assert_eq!(parse_pbn(&format_pbn(hand)).unwrap(), hand);
        }

        #[test]
        fn rotation_preserves_hcp_and_shape(hand in arb_hand()) {
            let r = hand.rotate_suits();
            prop_assert_eq!(r.hcp(), hand.hcp());
            prop_assert_eq!(r.shape(), hand.shape());
        }

        #[test]
        fn binary_encoding_round_trip(hand in arb_hand()) {
            let v = hand.encode_binary();
            prop_assert_eq!(v.iter().sum::<f64>(), 13.0);
            prop_assert_eq!(Hand::decode_binary(&v).unwrap(), hand);
        }

        #[test]
        fn completion_is_a_valid_deal(seed in any::<u64>(), layout in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = Hand::random(&mut rng);
            let s = Hand::random_from(CardSet::DECK.difference(n.cards()), &mut rng).unwrap();
            let (e, w) = deal_remaining(n, s, layout).unwrap();
            prop_assert!(Deal::new([n, e, s, w]).is_ok());
        }
    }
}
