use super::table::{Position, TransTable};
use crate::cards::Strain;

const NO_TRUMP: usize = 4;

#[inline]
fn suit_of(bits: u64, suit: usize) -> u32 {
    ((bits >> (suit * 16)) & 0xffff) as u32
}

#[inline]
fn top_bit(x: u32) -> u32 {
    31 - x.leading_zeros()
}

/// The bits of `x` selected by `mask`, packed into the low bits.
#[inline]
fn compress(x: u32, mask: u32) -> u32 {
    #[cfg(all(target_arch = "x86_64", target_feature = "bmi2"))]
    {
        // SAFETY: the target feature is enabled at compile time
        unsafe { std::arch::x86_64::_pext_u32(x, mask) }
    }
    #[cfg(not(all(target_arch = "x86_64", target_feature = "bmi2")))]
    compress_portable(x, mask)
}

#[cfg_attr(all(target_arch = "x86_64", target_feature = "bmi2"), allow(dead_code))]
fn compress_portable(x: u32, mask: u32) -> u32 {
    let (mut m, mut out, mut i) = (mask, 0, 0);
    while m != 0 {
        let b = m & m.wrapping_neg();
        if x & b != 0 {
            out |= 1 << i;
        }
        i += 1;
        m ^= b;
    }
    out
}

/// Two-bit codes from the low bits `lo` and high bits `hi`.
#[inline]
fn interleave(lo: u32, hi: u32) -> u32 {
    #[cfg(all(target_arch = "x86_64", target_feature = "bmi2"))]
    {
        use std::arch::x86_64::_pdep_u32;
        // SAFETY: the target feature is enabled at compile time
        unsafe { _pdep_u32(lo, 0x5555_5555) | _pdep_u32(hi, 0xaaaa_aaaa) }
    }
    #[cfg(not(all(target_arch = "x86_64", target_feature = "bmi2")))]
    interleave_portable(lo, hi)
}

#[cfg_attr(all(target_arch = "x86_64", target_feature = "bmi2"), allow(dead_code))]
fn interleave_portable(lo: u32, hi: u32) -> u32 {
    let spread = |mut x: u32| {
        x &= 0xffff;
        x = (x | x << 8) & 0x00ff_00ff;
        x = (x | x << 4) & 0x0f0f_0f0f;
        x = (x | x << 2) & 0x3333_3333;
        (x | x << 1) & 0x5555_5555
    };
    spread(lo) | spread(hi) << 1
}

#[derive(Clone, Copy)]
struct Moves {
    cards: [u8; 13],
    scores: [i16; 13],
    /// Highest card of the run of equivalent cards each move stands for.
    run_top: [u8; 13],
    len: usize,
    /// Cards that must stay relevant when every move fails, because some
    /// moves were skipped as dominated.
    cover: u64,
}

impl Moves {
    fn new() -> Self {
        Moves {
            cards: [0; 13],
            scores: [0; 13],
            run_top: [0; 13],
            len: 0,
            cover: 0,
        }
    }

    fn push(&mut self, card: u32, run_top: u32, score: i32) {
        // insertion keeps the list sorted by descending score
        let mut i = self.len;
        while i > 0 && (self.scores[i - 1] as i32) < score {
            self.cards[i] = self.cards[i - 1];
            self.scores[i] = self.scores[i - 1];
            self.run_top[i] = self.run_top[i - 1];
            i -= 1;
        }
        self.cards[i] = card as u8;
        self.scores[i] = score as i16;
        self.run_top[i] = run_top as u8;
        self.len += 1;
    }
}

pub(super) struct Search<'t> {
    hands: [u64; 4],
    trump: usize,
    table: Option<&'t mut TransTable>,
    trick: [u32; 4],
    in_trick: u64,
    pub nodes: u64,
    pub probes: u32,
    killers: [u8; 14],
}

impl<'t> Search<'t> {
    pub fn new(hands: [u64; 4], strain: Strain, table: Option<&'t mut TransTable>) -> Self {
        Search {
            hands,
            trump: strain.suit().map_or(NO_TRUMP, |s| s.index()),
            table,
            trick: [0; 4],
            in_trick: 0,
            nodes: 0,
            probes: 0,
            killers: [255; 14],
        }
    }

    /// Exact North-South tricks with `leader` on lead.
    pub fn value(&mut self, leader: usize, guess: Option<u8>) -> u8 {
        let total = self.hands[leader].count_ones() as i32;
        let (mut lo, mut hi) = (0, total);
        let mut target = guess.map_or((total + 1) / 2, i32::from);
        while lo < hi {
            let t = target.clamp(lo + 1, hi);
            self.probes += 1;
            if self.trick_start(leader, t).0 {
                lo = t;
                target = t + 1;
            } else {
                hi = t - 1;
                target = t - 1;
            }
        }
        lo as u8
    }

    /// Can North-South take `target` of the remaining tricks?
    ///
    /// Also returns the cards whose ranks the answer depends on: the answer
    /// holds for every position with the same suit lengths per hand in which
    /// the cards down to the lowest such card of each suit sit in the same
    /// hands.
    fn trick_start(&mut self, leader: usize, target: i32) -> (bool, u64) {
        self.nodes += 1;
        if target <= 0 {
            return (true, 0);
        }
        let left = self.hands[leader].count_ones() as i32;
        if target > left {
            return (false, 0);
        }
        if left == 1 {
            let (ns_won, rel) = self.last_trick(leader);
            return (i32::from(ns_won) >= target, rel);
        }
        let (sure, sure_rel) = self.quick_tricks(leader);
        let sure = sure as i32;
        // the other side's top trumps win tricks whatever the leader does
        let (theirs, their_rel) = self.top_trump_tricks(leader + 1);
        let theirs = theirs as i32;
        if leader % 2 == 0 {
            if sure >= target {
                return (true, sure_rel);
            }
            if left - theirs < target {
                return (false, their_rel);
            }
        } else {
            if left - sure < target {
                return (false, sure_rel);
            }
            if theirs >= target {
                return (true, their_rel);
            }
        }

        let pos = self.table.as_ref().map(|_| self.position(leader));
        if let (Some(pos), Some(table)) = (&pos, self.table.as_ref()) {
            if let Some(b) = table.probe(pos) {
                if b.lower as i32 >= target {
                    return (true, self.top_cards(b.lower_top));
                }
                if (b.upper as i32) < target {
                    return (false, self.top_cards(b.upper_top));
                }
            }
        }

        let (won, rel) = self.play(leader, 0, target);

        if let (Some(pos), Some(table)) = (&pos, self.table.as_mut()) {
            let all = self.hands[0] | self.hands[1] | self.hands[2] | self.hands[3];
            let top: [u8; 4] = std::array::from_fn(|s| {
                let r = suit_of(rel, s);
                if r == 0 {
                    0
                } else {
                    (suit_of(all, s) >> r.trailing_zeros()).count_ones() as u8
                }
            });
            if won {
                table.store(pos, top, target as i8, left as i8);
            } else {
                table.store(pos, top, 0, (target - 1) as i8);
            }
        }
        (won, rel)
    }

    fn play(&mut self, leader: usize, pos: usize, target: i32) -> (bool, u64) {
        let seat = (leader + pos) & 3;
        let mut moves = self.moves(leader, seat, pos);
        if pos == 0 {
            // the lead that last refuted a trick at this depth goes first
            let killer = u32::from(self.killers[self.hands[seat].count_ones() as usize]);
            if let Some(i) = (1..moves.len).find(|&i| u32::from(moves.cards[i]) == killer) {
                moves.cards[..=i].rotate_right(1);
                moves.run_top[..=i].rotate_right(1);
            }
        }
        self.play_moves(leader, pos, target, moves)
    }

    fn play_moves(&mut self, leader: usize, pos: usize, target: i32, moves: Moves) -> (bool, u64) {
        self.nodes += 1;
        let seat = (leader + pos) & 3;
        let ns = seat % 2 == 0;
        let mut rel = 0u64;
        for i in 0..moves.len {
            let card = moves.cards[i];
            let bit = 1u64 << card;
            self.hands[seat] &= !bit;
            self.trick[pos] = card as u32;
            self.in_trick |= bit;
            let (result, r) = if pos == 3 {
                let win_pos = self.trick_winner();
                let winner = (leader + win_pos) & 3;
                let win_card = self.trick[win_pos];
                let contested = (0..4).any(|j| j != win_pos && self.trick[j] / 16 == win_card / 16);
                let next = if winner % 2 == 0 { target - 1 } else { target };
                let (saved, trick) = (self.in_trick, self.trick);
                self.in_trick = 0;
                let (res, r) = self.trick_start(winner, next);
                self.in_trick = saved;
                self.trick = trick;
                (res, if contested { r | 1u64 << win_card } else { r })
            } else {
                self.play(leader, pos + 1, target)
            };
            self.hands[seat] |= bit;
            self.in_trick &= !bit;
            if result == ns {
                if pos == 0 {
                    self.killers[self.hands[seat].count_ones() as usize] = card;
                }
                return (result, r);
            }
            rel |= r;
        }
        rel |= moves.cover;
        // A skipped equivalent of a searched card is covered unless the
        // lowest relevant card of the suit falls inside the run above it.
        for i in 0..moves.len {
            let (card, top) = (u32::from(moves.cards[i]), u32::from(moves.run_top[i]));
            let low = suit_of(rel, (card / 16) as usize);
            if low != 0 {
                let low = low.trailing_zeros() + card / 16 * 16;
                if low > card && low <= top {
                    rel |= 1u64 << card;
                }
            }
        }
        (!ns, rel)
    }

    /// Position in the trick of the card currently winning it.
    fn winner_among(&self, n: usize) -> usize {
        let mut best = 0;
        for i in 1..n {
            let (c, b) = (self.trick[i], self.trick[best]);
            let (cs, bs) = ((c / 16) as usize, (b / 16) as usize);
            if cs == bs {
                if c > b {
                    best = i;
                }
            } else if cs == self.trump {
                best = i;
            }
        }
        best
    }

    fn trick_winner(&self) -> usize {
        self.winner_among(4)
    }

    fn last_trick(&mut self, leader: usize) -> (bool, u64) {
        for pos in 0..4 {
            self.trick[pos] = self.hands[(leader + pos) & 3].trailing_zeros();
        }
        let win_pos = self.trick_winner();
        let win_card = self.trick[win_pos];
        let contested = (0..4).any(|j| j != win_pos && self.trick[j] / 16 == win_card / 16);
        let winner = (leader + win_pos) & 3;
        (winner % 2 == 0, if contested { 1u64 << win_card } else { 0 })
    }

    fn holder(&self, bit: u64) -> usize {
        (0..4).find(|&s| self.hands[s] & bit != 0).unwrap_or(4)
    }

    /// Tricks the leader's side can cash from the top: the leader's own
    /// winners, then one suit of partner's winners reached with a low card.
    /// Returns the count and the cards that make them winners.
    fn quick_tricks(&self, leader: usize) -> (u32, u64) {
        let partner = (leader + 2) & 3;
        let lho = (leader + 1) & 3;
        let rho = (leader + 3) & 3;
        let has_trump =
            |seat: usize| self.trump != NO_TRUMP && suit_of(self.hands[seat], self.trump) != 0;
        let (mut lho_trumps, mut rho_trumps) = (has_trump(lho), has_trump(rho));
        if lho_trumps || rho_trumps {
            // top trumps that can draw every opposing trump first stop the ruffs
            let t = self.trump;
            let mine = suit_of(self.hands[leader], t);
            let rest = suit_of(self.hands[partner] | self.hands[lho] | self.hands[rho], t);
            let top = (mine >> (top_bit(rest) + 1)).count_ones();
            let longest = suit_of(self.hands[lho], t)
                .count_ones()
                .max(suit_of(self.hands[rho], t).count_ones());
            if top >= longest {
                lho_trumps = false;
                rho_trumps = false;
            }
        }
        let left = self.hands[leader].count_ones();
        // tricks from `cards` of `seat` standing above everything else in suit `s`
        let cash = |seat: usize, s: usize, top: u32| {
            let len = |h: usize| suit_of(self.hands[h], s).count_ones();
            let others = [0, 1, 2, 3].into_iter().filter(|&h| h != seat).map(len).max().unwrap_or(0);
            let mut tricks = if top >= others { len(seat) } else { top };
            if self.trump != NO_TRUMP && s != self.trump {
                if lho_trumps {
                    tricks = tricks.min(len(lho));
                }
                if rho_trumps {
                    tricks = tricks.min(len(rho));
                }
            }
            tricks
        };
        let mut total = 0;
        let mut rel = 0u64;
        let mut cross: Option<(u32, u64)> = None;
        for s in 0..4 {
            let mine = suit_of(self.hands[leader], s);
            if mine == 0 {
                continue;
            }
            let opp = suit_of(self.hands[lho] | self.hands[rho], s);
            let rest = opp | suit_of(self.hands[partner], s);
            let (top, top_cards) = if rest == 0 {
                (mine.count_ones(), 0)
            } else {
                let cut = top_bit(rest) + 1;
                let cards = mine >> cut << cut;
                (cards.count_ones(), cards)
            };
            if top > 0 {
                let tricks = cash(leader, s, top);
                if tricks > 0 {
                    total += tricks;
                    rel |= u64::from(top_cards) << (s * 16);
                }
                continue;
            }
            // partner's winners, entered with one of our low cards
            let theirs = suit_of(self.hands[partner], s);
            let beat = opp | mine;
            let cut = if beat == 0 { 0 } else { top_bit(beat) + 1 };
            let p_cards = theirs >> cut << cut;
            if p_cards == 0 {
                continue;
            }
            let tricks = cash(partner, s, p_cards.count_ones());
            if tricks > cross.map_or(0, |c| c.0) {
                cross = Some((tricks, u64::from(p_cards) << (s * 16)));
            }
        }
        if let Some((tricks, cards)) = cross {
            // partner must not be forced to discard the winners while we cash ours
            let suit = (cards.trailing_zeros() / 16) as usize;
            let spare = left - suit_of(self.hands[partner], suit).count_ones();
            if spare >= total {
                total += tricks;
                rel |= cards;
            }
        }
        (total.min(left), rel)
    }

    /// Tricks the side of `seat` is sure to win with its top trumps: each of
    /// the highest trumps held in sequence by one hand wins a trick.
    fn top_trump_tricks(&self, seat: usize) -> (u32, u64) {
        if self.trump == NO_TRUMP {
            return (0, 0);
        }
        let (a, b) = (seat & 3, (seat + 2) & 3);
        let mut trumps =
            suit_of(self.hands[0] | self.hands[1] | self.hands[2] | self.hands[3], self.trump);
        let (mut na, mut nb) = (0, 0);
        let mut cards = 0u64;
        while trumps != 0 {
            let bit = 1u64 << (self.trump * 16 + top_bit(trumps) as usize);
            trumps ^= 1 << top_bit(trumps);
            if self.hands[a] & bit != 0 {
                na += 1;
            } else if self.hands[b] & bit != 0 {
                nb += 1;
            } else {
                break;
            }
            cards |= bit;
        }
        (na.max(nb), cards)
    }

    fn position(&self, leader: usize) -> Position {
        let all = self.hands[0] | self.hands[1] | self.hands[2] | self.hands[3];
        let mut shape = 0u64;
        for h in 0..4 {
            for s in 0..4 {
                shape |= u64::from(suit_of(self.hands[h], s).count_ones()) << (h * 16 + s * 4);
            }
        }
        // holder index bits: low bit set for E and W, high bit for S and W
        let lo = self.hands[1] | self.hands[3];
        let hi = self.hands[2] | self.hands[3];
        let mut code = 0u128;
        for s in 0..4 {
            let cards = suit_of(all, s);
            if cards == 0 {
                continue;
            }
            let lane = interleave(compress(suit_of(lo, s), cards), compress(suit_of(hi, s), cards));
            let len = cards.count_ones();
            code |= u128::from(lane << (32 - 2 * len)) << (32 * s);
        }
        Position {
            shape,
            leader: leader as u8,
            code,
        }
    }

    /// The `top[s]` highest remaining cards of each suit.
    fn top_cards(&self, top: [u8; 4]) -> u64 {
        let all = self.hands[0] | self.hands[1] | self.hands[2] | self.hands[3];
        let mut out = 0u64;
        for (s, &k) in top.iter().enumerate() {
            let mut bits = suit_of(all, s);
            for _ in 0..k {
                let r = top_bit(bits);
                bits ^= 1 << r;
                out |= 1u64 << (s * 16 + r as usize);
            }
        }
        out
    }

    /// Legal cards, one per run of rank-equivalent cards, best-first.
    fn moves(&self, leader: usize, seat: usize, pos: usize) -> Moves {
        let hand = self.hands[seat];
        let led = (self.trick[0] / 16) as usize;
        let legal = if pos == 0 {
            hand
        } else {
            let follow = hand & (0xffffu64 << (led * 16));
            if follow != 0 {
                follow
            } else {
                hand
            }
        };
        let all = self.hands[0] | self.hands[1] | self.hands[2] | self.hands[3] | self.in_trick;
        let winning = (pos > 0).then(|| {
            let best = self.winner_among(pos);
            (self.trick[best], (leader + best) & 3)
        });

        let mut moves = Moves::new();
        for s in 0..4 {
            let own = suit_of(legal, s);
            if own == 0 {
                continue;
            }
            let mut rest = suit_of(all, s);
            let mut first = true;
            let mut run: Option<(u32, u32)> = None;
            let mut top_run = false;
            let base = (s * 16) as u32;
            while rest != 0 {
                let r = top_bit(rest);
                rest ^= 1 << r;
                if own >> r & 1 == 1 {
                    run = match run {
                        None => {
                            top_run = first;
                            Some((r, r))
                        }
                        Some((hi, _)) => Some((hi, r)),
                    };
                } else if let Some((hi, low)) = run.take() {
                    let card = base + low;
                    moves.push(card, base + hi, self.score(seat, pos, card, top_run, winning));
                }
                first = false;
            }
            if let Some((hi, low)) = run {
                let card = base + low;
                moves.push(card, base + hi, self.score(seat, pos, card, top_run, winning));
            }
        }
        if let Some((best, _)) = winning {
            // A card that cannot beat the one winning the trick never
            // decides it, so within a suit only the lowest such card is
            // tried. Last to play, the same holds for the cards that win.
            let mut order: [usize; 13] = std::array::from_fn(|i| i);
            order[..moves.len].sort_unstable_by_key(|&i| moves.cards[i]);
            let mut seen = [[false; 2]; 4];
            let mut chosen = [false; 13];
            for &i in &order[..moves.len] {
                let card = u32::from(moves.cards[i]);
                let suit = (card / 16) as usize;
                let beats = self.beats(card, best);
                if beats && pos < 3 {
                    chosen[i] = true;
                } else if !seen[suit][beats as usize] {
                    seen[suit][beats as usize] = true;
                    chosen[i] = true;
                } else if suit == (best / 16) as usize {
                    moves.cover = 1u64 << best;
                }
            }
            let mut keep = Moves::new();
            keep.cover = moves.cover;
            for i in (0..moves.len).filter(|&i| chosen[i]) {
                keep.cards[keep.len] = moves.cards[i];
                keep.scores[keep.len] = moves.scores[i];
                keep.run_top[keep.len] = moves.run_top[i];
                keep.len += 1;
            }
            return keep;
        }
        moves
    }

    /// Does `card` beat the card `best` currently winning the trick?
    fn beats(&self, card: u32, best: u32) -> bool {
        if card / 16 == best / 16 {
            card > best
        } else {
            (card / 16) as usize == self.trump
        }
    }

    fn score(
        &self,
        seat: usize,
        pos: usize,
        card: u32,
        top_run: bool,
        winning: Option<(u32, usize)>,
    ) -> i32 {
        let suit = (card / 16) as usize;
        let rank = (card % 16) as i32;
        let partner = (seat + 2) & 3;
        let Some((best, winner)) = winning else {
            // leading
            let lho = (seat + 1) & 3;
            let rho = (seat + 3) & 3;
            let ruffable_by = |s: usize| {
                self.trump != NO_TRUMP
                    && suit != self.trump
                    && suit_of(self.hands[s], suit) == 0
                    && suit_of(self.hands[s], self.trump) != 0
            };
            if top_run {
                return if ruffable_by(lho) || ruffable_by(rho) { 5 } else { 60 + rank };
            }
            let all = self.hands[0] | self.hands[1] | self.hands[2] | self.hands[3];
            let top = suit_of(all, suit);
            let top_holder = self.holder(1u64 << (suit * 16 + top_bit(top) as usize));
            if ruffable_by(partner) && !ruffable_by(lho) && !ruffable_by(rho) {
                return 50 - rank;
            }
            if top_holder == partner {
                return 45 - rank;
            }
            return 20 - rank;
        };
        let led = (self.trick[0] / 16) as usize;
        let best_suit = (best / 16) as usize;
        let ours = winner % 2 == seat % 2;
        let beats = if suit == best_suit {
            card > best
        } else {
            suit == self.trump
        };
        if suit == led {
            if ours {
                40 - rank
            } else if beats {
                if pos == 3 {
                    70 - rank
                } else {
                    55 - rank
                }
            } else {
                30 - rank
            }
        } else if suit == self.trump {
            if ours {
                if pos == 3 {
                    -20 - rank
                } else {
                    10 - rank
                }
            } else if beats {
                65 - rank
            } else {
                -10 - rank
            }
        } else {
            // discard: low cards from suits without a winner
            let keep = if top_run { 15 } else { 0 };
            25 - rank - keep
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn bit_packing_matches_portable_versions(x: u32, mask in 0u32..0x2000, hi in 0u32..0x2000) {
            prop_assert_eq!(compress(x, mask), compress_portable(x, mask));
            let lo = x & 0x1fff;
            prop_assert_eq!(interleave(lo, hi), interleave_portable(lo, hi));
        }
    }

    #[test]
    fn interleave_pairs_bits() {
        assert_eq!(interleave_portable(0b11, 0b01), 0b0111);
        assert_eq!(compress_portable(0b1010, 0b1110), 0b101);
    }
}
