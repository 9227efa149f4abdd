use std::sync::OnceLock;

use crate::task::Value;

/// Single-assignment collection map for one event.
///
/// Slots are indexed by the graph's key table. Writes go through
/// `OnceLock::set`, so a second write to the same key fails without
/// disturbing the first, and readers never observe a partially written
/// value.
pub struct EventStore {
    slots: Vec<OnceLock<Value>>,
}

impl EventStore {
    pub(crate) fn new(n_keys: usize) -> EventStore {
        let mut slots = Vec::with_capacity(n_keys);
        slots.resize_with(n_keys, OnceLock::new);
        EventStore { slots }
    }

    /// Returns false when the slot was already written.
    pub(crate) fn set(&self, slot: usize, value: Value) -> bool {
        self.slots[slot].set(value).is_ok()
    }

    pub(crate) fn get(&self, slot: usize) -> Option<&Value> {
        self.slots[slot].get()
    }

    pub(crate) fn has(&self, slot: usize) -> bool {
        self.slots[slot].get().is_some()
    }
}
