use rustc_hash::FxHashMap;

/// Bounds on North-South tricks for classes of trick-boundary positions.
///
/// A class fixes the leader, every hand's length in every suit, and the
/// holders of the top `k` cards of each suit, highest first. Lower cards
/// only count by length. Entries are grouped by leader and suit lengths;
/// once the table holds its capacity it is emptied and refilled.
pub struct TransTable {
    lists: FxHashMap<(u64, u8), Vec<Entry>>,
    len: usize,
    capacity: usize,
}

/// Longest list kept for one leader and shape; the oldest entry goes first.
const MAX_LIST: usize = 512;

#[derive(Clone, Copy)]
struct Entry {
    /// Holder bits of the specified cards, and their values.
    mask: u128,
    value: u128,
    lower: i8,
    upper: i8,
    /// Number of specified top cards per suit.
    top: [u8; 4],
}

/// The current position as seen by the table.
#[derive(Clone, Copy)]
pub struct Position {
    /// Length of every suit in every hand, four bits each.
    pub shape: u64,
    pub leader: u8,
    /// Holders of the cards of each suit, two bits per card, highest card
    /// in the top bits of the suit's 32-bit lane.
    pub code: u128,
}

fn mask(top: [u8; 4]) -> u128 {
    let mut m = 0u128;
    for (s, &k) in top.iter().enumerate() {
        let lane = if k == 0 { 0 } else { u32::MAX << (32 - 2 * u32::from(k)) };
        m |= u128::from(lane) << (32 * s);
    }
    m
}

impl TransTable {
    /// Table holding up to `2^bits` entries.
    pub fn new(bits: u32) -> Self {
        TransTable {
            lists: FxHashMap::default(),
            len: 0,
            capacity: 1 << bits,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Tightest known `(lower, upper)` over every stored class containing `pos`,
    /// with the number of specified top cards per suit of the entry that set each.
    pub fn probe(&self, pos: &Position) -> Option<Bound> {
        let list = self.lists.get(&(pos.shape, pos.leader))?;
        let mut found: Option<Bound> = None;
        for e in list.iter().rev() {
            if pos.code & e.mask != e.value {
                continue;
            }
            let f = found.get_or_insert(Bound {
                lower: 0,
                upper: i8::MAX,
                lower_top: [0; 4],
                upper_top: [0; 4],
            });
            if e.lower > f.lower {
                f.lower = e.lower;
                f.lower_top = e.top;
            }
            if e.upper < f.upper {
                f.upper = e.upper;
                f.upper_top = e.top;
            }
        }
        found
    }

    pub fn store(&mut self, pos: &Position, top: [u8; 4], lower: i8, upper: i8) {
        if self.len >= self.capacity {
            self.clear();
        }
        let mask = mask(top);
        let value = pos.code & mask;
        let list = self.lists.entry((pos.shape, pos.leader)).or_default();
        if let Some(e) = list.iter_mut().find(|e| e.mask == mask && e.value == value) {
            e.lower = e.lower.max(lower);
            e.upper = e.upper.min(upper);
            return;
        }
        if list.len() >= MAX_LIST {
            list.remove(0);
            self.len -= 1;
        }
        list.push(Entry {
            mask,
            value,
            lower,
            upper,
            top,
        });
        self.len += 1;
    }

    pub fn clear(&mut self) {
        self.lists.clear();
        self.len = 0;
    }
}

/// Result of a table probe.
#[derive(Debug, Clone, Copy)]
pub struct Bound {
    pub lower: i8,
    pub upper: i8,
    pub lower_top: [u8; 4],
    pub upper_top: [u8; 4],
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Position from per-suit holder lists, highest card first.
    fn pos(shape: u64, suits: [&[u8]; 4]) -> Position {
        let mut code = 0u128;
        for (s, holders) in suits.iter().enumerate() {
            let mut lane = 0u32;
            for (i, &h) in holders.iter().enumerate() {
                lane |= u32::from(h) << (30 - 2 * i);
            }
            code |= u128::from(lane) << (32 * s);
        }
        Position {
            shape,
            leader: 0,
            code,
        }
    }

    #[test]
    fn bounds_tighten() {
        let mut t = TransTable::new(6);
        let p = pos(0x1111, [&[0, 1], &[2, 3], &[], &[]]);
        t.store(&p, [2, 2, 0, 0], 1, 2);
        t.store(&p, [2, 2, 0, 0], 0, 1);
        assert_eq!(t.len(), 1);
        let b = t.probe(&p).unwrap();
        assert_eq!((b.lower, b.upper), (1, 1));
        assert!(t.probe(&Position { shape: 0x1112, ..p }).is_none());
    }

    #[test]
    fn partial_patterns_match_on_top_cards_only() {
        let mut t = TransTable::new(6);
        let stored = pos(0x1111, [&[0, 1, 2], &[], &[], &[]]);
        // only the top card of the first suit is specified
        t.store(&stored, [1, 0, 0, 0], 2, 3);
        let same_top = pos(0x1111, [&[0, 2, 1], &[], &[], &[]]);
        assert_eq!(t.probe(&same_top).unwrap().lower, 2);
        let other_top = pos(0x1111, [&[1, 0, 2], &[], &[], &[]]);
        assert!(t.probe(&other_top).is_none());
    }

    #[test]
    fn full_table_starts_over() {
        let mut t = TransTable::new(2);
        for k in 0..4u8 {
            t.store(&pos(0x1, [&[k], &[], &[], &[]]), [1, 0, 0, 0], 0, 1);
        }
        assert_eq!(t.len(), 4);
        t.store(&pos(0x2, [&[0], &[], &[], &[]]), [1, 0, 0, 0], 0, 1);
        assert_eq!(t.len(), 1);
    }
}
