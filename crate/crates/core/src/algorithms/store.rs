//! Per-station packet memory shared by the protocol implementations.

use std::collections::{BTreeMap, HashMap};

use crate::model::{PacketHeader, PacketId, Round, Station};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Held {
    pub header: PacketHeader,
    /// Round the packet entered this station (injection or adoption).
    pub arrival: Round,
}

impl Held {
    pub fn destination(&self) -> Station {
        self.header.destination
    }
}

/// Packets held by one station, iterated in arrival order.
#[derive(Debug, Clone, Default)]
pub struct PacketStore {
    by_seq: BTreeMap<u64, Held>,
    seq_of: HashMap<PacketId, u64>,
    next_seq: u64,
}

impl PacketStore {
    pub fn push(&mut self, header: PacketHeader, arrival: Round) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.by_seq.insert(seq, Held { header, arrival });
        self.seq_of.insert(header.id, seq);
    }

    pub fn remove(&mut self, id: PacketId) -> Option<Held> {
        let seq = self.seq_of.remove(&id)?;
        self.by_seq.remove(&seq)
    }

    pub fn contains(&self, id: PacketId) -> bool {
        self.seq_of.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.by_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_seq.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Held> {
        self.by_seq.values()
    }

    /// Oldest packet satisfying `pred`.
    pub fn first_where(&self, mut pred: impl FnMut(&Held) -> bool) -> Option<Held> {
        self.by_seq.values().find(|h| pred(h)).copied()
    }

    pub fn count_where(&self, mut pred: impl FnMut(&Held) -> bool) -> usize {
        self.by_seq.values().filter(|h| pred(h)).count()
    }
}
