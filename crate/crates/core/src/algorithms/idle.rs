//! Baseline protocols used by tests and the impossibility experiments.

use crate::algorithms::store::PacketStore;
use crate::engine::Protocol;
use crate::model::{Feedback, Mode, PacketHeader, Response, Round, Station};

/// Every station stays off forever; packets accumulate.
pub struct Dormant {
    queues: Vec<PacketStore>,
}

impl Dormant {
    pub fn new(n: usize) -> Self {
        Self { queues: vec![PacketStore::default(); n] }
    }
}

impl Protocol for Dormant {
    fn first_wake(&self, _station: Station) -> Option<Round> {
        None
    }

    fn inject(&mut self, round: Round, station: Station, packet: PacketHeader) {
        self.queues[station].push(packet, round);
    }

    fn act(&mut self, _round: Round, station: Station) -> Result<Mode, String> {
        Err(format!("dormant station {station} was switched on"))
    }

    fn feedback(&mut self, _: Round, _: Station, _: &Feedback) -> Result<Response, String> {
        Ok(Response::default())
    }

    fn queue_len(&self, station: Station) -> usize {
        self.queues[station].len()
    }
}

/// Stations 0 and 1 listen in every round; nobody ever transmits.
pub struct ListeningPair {
    queues: Vec<PacketStore>,
}

impl ListeningPair {
    pub fn new(n: usize) -> Self {
        Self { queues: vec![PacketStore::default(); n] }
    }
}

impl Protocol for ListeningPair {
    fn first_wake(&self, station: Station) -> Option<Round> {
        (station < 2).then_some(1)
    }

    fn inject(&mut self, round: Round, station: Station, packet: PacketHeader) {
        self.queues[station].push(packet, round);
    }

    fn act(&mut self, _: Round, _: Station) -> Result<Mode, String> {
        Ok(Mode::Listen)
    }

    fn feedback(&mut self, _: Round, _: Station, _: &Feedback) -> Result<Response, String> {
        Ok(Response::default())
    }

    fn queue_len(&self, station: Station) -> usize {
        self.queues[station].len()
    }
}
