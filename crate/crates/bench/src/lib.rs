//! Fixtures shared by the criterion benches.

use histm_core::corpus;
use histm_core::{HistoryStore, MachineSpec, Symbol};

/// Corpus machine by name; panics on parse failure.
pub fn machine(name: &str) -> MachineSpec {
    corpus::load(name).expect("corpus machine parses")
}

/// A store holding `writes` entries spread round-robin over `cells` cells,
/// with strictly increasing timestamps.
pub fn filled_store(cells: i64, writes: u64) -> HistoryStore {
    let mut store = HistoryStore::new(Symbol(0), 2);
    for t in 1..=writes {
        store
            .append_write(t as i64 % cells, Symbol((t % 2) as u32), t)
            .expect("monotone timestamps");
    }
    store
}
