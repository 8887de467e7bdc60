//! Append-only, timestamped write log standing in for a Turing machine tape.
//!
//! Every write to a cell is recorded as a [`HistoryEntry`] carrying the cell
//! position, the written symbol, the step at which it was written and a
//! 64-bit checksum over those three fields. Entries are grouped per position
//! and kept in timestamp order, so resolving "what did cell `p` hold at time
//! `t`" is a binary search for the entry with the largest timestamp `<= t`.
//!
//! ```text
//!  t
//!  4        x
//!  3  0
//!  2
//!  1  1     1
//!  0  1  0  1          <- seeded input
//!    p0 p1 p2 p3 ...   <- p3 never written: reads as blank
//! ```
//!
//! Checksums are verified lazily, only on the entry a read selects. A full
//! [`HistoryStore::audit`] walks every entry.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::Hasher;

use fnv::FnvHasher;
use thiserror::Error;

use crate::machine::Symbol;

/// Bits of fixed per-entry overhead in the compact storage accounting: the
/// 64-bit checksum, one sign bit for the position and two 6-bit length
/// prefixes for the variable-width timestamp and position magnitude.
pub const ENTRY_OVERHEAD_BITS: u32 = 64 + 1 + 6 + 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HistoryError {
    #[error("non-monotonic timestamp at position {position}: {timestamp} <= last {last}")]
    NonMonotonicTimestamp {
        position: i64,
        timestamp: u64,
        last: u64,
    },
    #[error("unknown symbol id {0}")]
    UnknownSymbol(u32),
    #[error("integrity violation in entry {index} (position {position}, timestamp {timestamp})")]
    IntegrityViolation {
        index: usize,
        position: i64,
        timestamp: u64,
    },
    #[error("store is not empty ({0} entries)")]
    StoreNotEmpty(usize),
    #[error("entry index {index} out of range (store holds {len})")]
    IndexOutOfRange { index: usize, len: usize },
}

/// One recorded tape write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryEntry {
    position: i64,
    symbol: Symbol,
    timestamp: u64,
    checksum: u64,
}

impl HistoryEntry {
    fn new(position: i64, symbol: Symbol, timestamp: u64) -> Self {
        HistoryEntry {
            position,
            symbol,
            timestamp,
            checksum: checksum(position, symbol, timestamp),
        }
    }

    pub fn position(&self) -> i64 {
        self.position
    }

    pub fn symbol(&self) -> Symbol {
        self.symbol
    }

    pub fn timestamp(&self) -> u64 {
        self.timestamp
    }

    pub fn checksum(&self) -> u64 {
        self.checksum
    }

    /// True when the stored checksum matches one recomputed from the fields.
    pub fn is_intact(&self) -> bool {
        self.checksum == checksum(self.position, self.symbol, self.timestamp)
    }

    /// Size of this entry in a compact variable-width encoding.
    pub fn storable_bits(&self, symbol_bits: u32) -> u32 {
        ENTRY_OVERHEAD_BITS
            + symbol_bits
            + bit_len(self.timestamp)
            + bit_len(self.position.unsigned_abs())
    }
}

/// FNV-1a over the little-endian field bytes. Every FNV-1a round is a
/// bijection on the hash state for a fixed input byte, so a change confined
/// to one byte (in particular any single-bit flip) always changes the result.
pub fn checksum(position: i64, symbol: Symbol, timestamp: u64) -> u64 {
    let mut h = FnvHasher::default();
    h.write(&position.to_le_bytes());
    h.write(&symbol.0.to_le_bytes());
    h.write(&timestamp.to_le_bytes());
    h.finish()
}

/// Number of bits needed to write `x` in binary (`0` needs none).
pub fn bit_len(x: u64) -> u32 {
    u64::BITS - x.leading_zeros()
}

/// `ceil(log2(n))`, with `ceil_log2(0) == ceil_log2(1) == 0`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        bit_len(n - 1)
    }
}

/// Cost of one resolved read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReadCost {
    /// Timestamp comparisons performed by the search.
    pub comparisons: u32,
    /// Number of writes recorded at the queried position.
    pub writes_at_position: usize,
}

impl ReadCost {
    /// Upper bound `ceil(log2 k) + 1` on comparisons for `k` writes; zero
    /// writes need no comparison.
    pub fn bound(&self) -> u32 {
        match self.writes_at_position {
            0 => 0,
            k => ceil_log2(k as u64) + 1,
        }
    }

    pub fn within_bound(&self) -> bool {
        self.comparisons <= self.bound()
    }
}

/// Which field of an entry a fault flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryField {
    Position,
    Symbol,
    Timestamp,
    Checksum,
}

/// A detected checksum mismatch, as reported by [`HistoryStore::audit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditFinding {
    pub index: usize,
    pub entry: HistoryEntry,
}

#[derive(Debug, Clone)]
pub struct HistoryStore {
    blank: Symbol,
    alphabet_len: u32,
    cells: HashMap<i64, Vec<Stored>>,
    /// Insertion order: (position, index within that position's sequence).
    order: Vec<(i64, u32)>,
}

#[derive(Debug, Clone, Copy)]
struct Stored {
    entry: HistoryEntry,
    /// Insertion index across the whole store.
    index: usize,
}

impl HistoryStore {
    /// An empty store over an alphabet of `alphabet_len` symbols (ids
    /// `0..alphabet_len`), reading never-written cells as `blank`.
    pub fn new(blank: Symbol, alphabet_len: u32) -> Self {
        assert!(blank.0 < alphabet_len, "blank must belong to the alphabet");
        HistoryStore {
            blank,
            alphabet_len,
            cells: HashMap::new(),
            order: Vec::new(),
        }
    }

    pub fn blank(&self) -> Symbol {
        self.blank
    }

    pub fn alphabet_len(&self) -> u32 {
        self.alphabet_len
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Record `symbol` written at `position` during step `timestamp`.
    pub fn append_write(
        &mut self,
        position: i64,
        symbol: Symbol,
        timestamp: u64,
    ) -> Result<(), HistoryError> {
        if symbol.0 >= self.alphabet_len {
            return Err(HistoryError::UnknownSymbol(symbol.0));
        }
        let seq = self.cells.entry(position).or_default();
        if let Some(last) = seq.last() {
            if timestamp <= last.entry.timestamp {
                return Err(HistoryError::NonMonotonicTimestamp {
                    position,
                    timestamp,
                    last: last.entry.timestamp,
                });
            }
        }
        let slot = u32::try_from(seq.len()).expect("too many writes to one cell");
        seq.push(Stored {
            entry: HistoryEntry::new(position, symbol, timestamp),
            index: self.order.len(),
        });
        self.order.push((position, slot));
        Ok(())
    }

    /// Symbol at `position` as of `time`: the latest write with timestamp
    /// `<= time`, or blank when there is none.
    pub fn read_latest(&self, position: i64, time: u64) -> Result<Symbol, HistoryError> {
        self.read_latest_counted(position, time).map(|(s, _)| s)
    }

    /// [`read_latest`](Self::read_latest) that also reports how many
    /// timestamp comparisons the search made.
    pub fn read_latest_counted(
        &self,
        position: i64,
        time: u64,
    ) -> Result<(Symbol, ReadCost), HistoryError> {
        let Some(seq) = self.cells.get(&position) else {
            return Ok((self.blank, ReadCost::default()));
        };
        let (found, comparisons) = search(seq, time);
        let cost = ReadCost {
            comparisons,
            writes_at_position: seq.len(),
        };
        let Some(slot) = found else {
            return Ok((self.blank, cost));
        };
        let Stored { entry, index } = &seq[slot];
        if !entry.is_intact() {
            return Err(HistoryError::IntegrityViolation {
                index: *index,
                position: entry.position,
                timestamp: entry.timestamp,
            });
        }
        Ok((entry.symbol, cost))
    }

    /// Insertion index of the entry a `read_latest(position, time)` would
    /// select, if any.
    pub fn latest_index(&self, position: i64, time: u64) -> Option<usize> {
        let seq = self.cells.get(&position)?;
        search(seq, time).0.map(|slot| seq[slot].index)
    }

    /// Place the initial tape: `symbols[i]` at `origin + i`, timestamp 0.
    pub fn seed_input(&mut self, symbols: &[Symbol], origin: i64) -> Result<(), HistoryError> {
        if !self.is_empty() {
            return Err(HistoryError::StoreNotEmpty(self.len()));
        }
        if let Some(bad) = symbols.iter().find(|s| s.0 >= self.alphabet_len) {
            return Err(HistoryError::UnknownSymbol(bad.0));
        }
        for (i, &s) in symbols.iter().enumerate() {
            self.append_write(origin + i as i64, s, 0)?;
        }
        Ok(())
    }

    /// Entry at insertion index `index`.
    pub fn entry(&self, index: usize) -> Option<&HistoryEntry> {
        let &(p, slot) = self.order.get(index)?;
        self.cells.get(&p).map(|seq| &seq[slot as usize].entry)
    }

    pub fn last_entry(&self) -> Option<&HistoryEntry> {
        self.len().checked_sub(1).and_then(|i| self.entry(i))
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> impl Iterator<Item = &HistoryEntry> + '_ {
        self.order
            .iter()
            .map(move |&(p, slot)| &self.cells[&p][slot as usize].entry)
    }

    /// Number of writes ever recorded at `position`.
    pub fn writes_at(&self, position: i64) -> usize {
        self.cells.get(&position).map_or(0, Vec::len)
    }

    /// Smallest and largest position with at least one entry.
    pub fn position_span(&self) -> Option<(i64, i64)> {
        let lo = self.cells.keys().min()?;
        let hi = self.cells.keys().max()?;
        Some((*lo, *hi))
    }

    /// Fault injection: alter the symbol of entry `index` without touching
    /// its checksum.
    pub fn corrupt_entry(&mut self, index: usize) -> Result<(), HistoryError> {
        self.flip_bit(index, EntryField::Symbol, 0)
    }

    /// Fault injection: flip bit `bit` of one field of entry `index`.
    pub fn flip_bit(
        &mut self,
        index: usize,
        field: EntryField,
        bit: u32,
    ) -> Result<(), HistoryError> {
        let len = self.len();
        let &(p, slot) = self
            .order
            .get(index)
            .ok_or(HistoryError::IndexOutOfRange { index, len })?;
        let entry = &mut self.cells.get_mut(&p).expect("indexed cell")[slot as usize].entry;
        match field {
            EntryField::Position => entry.position ^= 1i64 << (bit % 64),
            EntryField::Symbol => entry.symbol.0 ^= 1u32 << (bit % 32),
            EntryField::Timestamp => entry.timestamp ^= 1u64 << (bit % 64),
            EntryField::Checksum => entry.checksum ^= 1u64 << (bit % 64),
        }
        Ok(())
    }

    /// Verify every entry's checksum.
    pub fn audit(&self) -> Vec<AuditFinding> {
        self.entries()
            .enumerate()
            .filter(|(_, e)| !e.is_intact())
            .map(|(index, e)| AuditFinding { index, entry: *e })
            .collect()
    }

    /// Tab-separated dump, one line per entry in insertion order:
    /// `position<TAB>symbol<TAB>timestamp<TAB>checksum-hex`.
    pub fn dump(&self) -> String {
        let mut out = String::with_capacity(self.len() * 32);
        for e in self.entries() {
            writeln!(
                out,
                "{}\t{}\t{}\t{:016x}",
                e.position, e.symbol.0, e.timestamp, e.checksum
            )
            .unwrap();
        }
        out
    }
}

/// Binary search for the last entry with `timestamp <= time`, counting
/// comparisons. Returns the slot (if any) and the comparison count.
fn search(seq: &[Stored], time: u64) -> (Option<usize>, u32) {
    // Invariant: seq[..lo] <= time < seq[hi..].
    let (mut lo, mut hi) = (0usize, seq.len());
    let mut comparisons = 0;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        comparisons += 1;
        if seq[mid].entry.timestamp <= time {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    (lo.checked_sub(1), comparisons)
}
