//! Round-synchronous channel execution.
//!
//! The engine owns the authoritative location of every packet. Protocols keep
//! their own per-station queues and are cross-checked against the engine after
//! every round, so a protocol that loses or duplicates a packet fails fast.

use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::model::{
    Feedback, Message, Mode, Packet, PacketHeader, PacketId, Round, Station,
};

/// Per-station behaviour plugged into the engine.
///
/// Only switched-on stations are consulted through `act` and `feedback`.
/// `inject` is delivered regardless of mode because injected packets land in
/// a station's memory even while it is off. Implementations must keep each
/// station's state separate; the only inter-station channel is `Feedback`.
pub trait Protocol: Send {
    /// Round in which `station` is first switched on; `None` for never.
    fn first_wake(&self, station: Station) -> Option<Round>;

    fn inject(&mut self, round: Round, station: Station, packet: PacketHeader);

    fn act(&mut self, round: Round, station: Station) -> Result<Mode, String>;

    /// Called for every switched-on station after the channel resolves.
    fn feedback(
        &mut self,
        round: Round,
        station: Station,
        feedback: &Feedback,
    ) -> Result<crate::model::Response, String>;

    fn queue_len(&self, station: Station) -> usize;

    /// Replicated-state invariants, checked after every round.
    fn check(&self, _round: Round) -> Result<(), String> {
        Ok(())
    }

    fn stats(&self) -> ProtocolStats {
        ProtocolStats::default()
    }
}

/// Algorithm-specific observations exported into reports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolStats {
    /// `(start round, length)` of every window or phase that has begun.
    pub windows: Vec<(Round, u64)>,
    /// Number of replicated-state consistency checks that were evaluated.
    pub invariant_checks: u64,
    /// Seasons in which the conductor announced itself big.
    pub big_seasons: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Injected { id: PacketId, station: Station },
    Delivered { id: PacketId },
    Moved { id: PacketId, from: Station, to: Station },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutcome {
    pub round: Round,
    pub on_mask: u64,
    pub transmitters: u64,
    pub feedback: Feedback,
    pub delivered: Option<PacketId>,
    pub adopted_by: Option<(Station, PacketId)>,
    /// Largest control-bit count among messages transmitted this round.
    pub control_bits: usize,
    pub events: Vec<Event>,
}

pub struct Engine {
    n: usize,
    cap: usize,
    protocol: Box<dyn Protocol>,
    next_on: Vec<Option<Round>>,
    packets: Vec<Packet>,
    location: Vec<Option<Station>>,
    held: Vec<usize>,
    round: Round,
}

impl Engine {
    pub fn new(n: usize, cap: usize, protocol: Box<dyn Protocol>) -> Self {
        let next_on = (0..n).map(|s| protocol.first_wake(s)).collect();
        Self {
            n,
            cap,
            protocol,
            next_on,
            packets: Vec::new(),
            location: Vec::new(),
            held: vec![0; n],
            round: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn round(&self) -> Round {
        self.round
    }

    pub fn packets(&self) -> &[Packet] {
        &self.packets
    }

    pub fn held(&self) -> &[usize] {
        &self.held
    }

    pub fn total_queued(&self) -> usize {
        self.held.iter().sum()
    }

    pub fn protocol(&self) -> &dyn Protocol {
        self.protocol.as_ref()
    }

    /// Stations that will be on in the next round.
    pub fn upcoming_on_mask(&self) -> u64 {
        let next = self.round + 1;
        self.next_on
            .iter()
            .enumerate()
            .filter(|(_, t)| matches!(t, Some(t) if *t <= next))
            .fold(0u64, |m, (s, _)| m | 1u64 << s)
    }

    /// Executes one round with the given `(station, destination)` injections.
    pub fn step(&mut self, injections: &[(Station, Station)]) -> Result<RoundOutcome, EngineError> {
        self.round += 1;
        let round = self.round;
        let mut events = Vec::new();

        for &(station, destination) in injections {
            if station >= self.n || destination >= self.n {
                return Err(EngineError::BadInjection { round, station: station.max(destination) });
            }
            let id = self.packets.len() as PacketId;
            let mut packet = Packet {
                id,
                destination,
                injection_round: round,
                injection_station: station,
                hops: vec![station],
                delivery_round: None,
            };
            events.push(Event::Injected { id, station });
            if destination == station {
                // Already at its destination: consumed on arrival.
                packet.delivery_round = Some(round);
                self.packets.push(packet);
                self.location.push(None);
                events.push(Event::Delivered { id });
                continue;
            }
            let header = PacketHeader::from(&packet);
            self.packets.push(packet);
            self.location.push(Some(station));
            self.held[station] += 1;
            self.protocol.inject(round, station, header);
        }

        let on: Vec<Station> = (0..self.n)
            .filter(|&s| matches!(self.next_on[s], Some(t) if t <= round))
            .collect();
        if on.len() > self.cap {
            return Err(EngineError::EnergyCapViolation { round, on: on.len(), cap: self.cap });
        }
        let on_mask = on.iter().fold(0u64, |m, &s| m | 1u64 << s);

        let mut transmitted: Vec<Message> = Vec::new();
        for &s in &on {
            let mode = self
                .protocol
                .act(round, s)
                .map_err(|detail| EngineError::Protocol { round, detail })?;
            if let Mode::Transmit(mut msg) = mode {
                msg.sender = s;
                if let Some(h) = msg.packet {
                    if self.location.get(h.id as usize).copied().flatten() != Some(s) {
                        return Err(EngineError::PhantomTransmit { round, station: s });
                    }
                }
                transmitted.push(msg);
            }
        }
        let transmitters = transmitted.iter().fold(0u64, |m, msg| m | 1u64 << msg.sender);
        let control_bits = transmitted.iter().map(|m| m.control.len()).max().unwrap_or(0);
        let feedback = match transmitted.len() {
            0 => Feedback::Silent,
            1 => Feedback::Heard(transmitted.pop().expect("one message")),
            _ => Feedback::Collision,
        };

        let heard_packet = match &feedback {
            Feedback::Heard(msg) => msg.packet.map(|h| (h, msg.sender)),
            _ => None,
        };
        let mut delivered = None;
        if let Some((h, sender)) = heard_packet {
            if on_mask >> h.destination & 1 == 1 {
                let packet = &mut self.packets[h.id as usize];
                if packet.delivery_round.is_some() {
                    return Err(EngineError::DuplicateDelivery { round, id: h.id });
                }
                packet.delivery_round = Some(round);
                self.location[h.id as usize] = None;
                self.held[sender] -= 1;
                delivered = Some(h.id);
                events.push(Event::Delivered { id: h.id });
            }
        }

        let mut adopted_by = None;
        for &s in &on {
            let resp = self
                .protocol
                .feedback(round, s, &feedback)
                .map_err(|detail| EngineError::Protocol { round, detail })?;
            if let Some(0) = resp.timer {
                return Err(EngineError::InvalidTimer { round, station: s });
            }
            self.next_on[s] = match resp.timer {
                None => Some(round + 1),
                Some(u64::MAX) => None,
                Some(c) => round.checked_add(c).and_then(|t| t.checked_add(1)),
            };
            if resp.adopt {
                let Some((h, sender)) = heard_packet else {
                    return Err(EngineError::InvalidAdoption { round, station: s });
                };
                if delivered.is_some() || s == sender {
                    return Err(EngineError::InvalidAdoption { round, station: s });
                }
                if adopted_by.is_some() {
                    return Err(EngineError::MultipleAdoption { round });
                }
                adopted_by = Some((s, h.id));
            }
        }
        if let Some((to, id)) = adopted_by {
            let from = self.location[id as usize].expect("heard packet is held");
            self.location[id as usize] = Some(to);
            self.held[from] -= 1;
            self.held[to] += 1;
            self.packets[id as usize].hops.push(to);
            events.push(Event::Moved { id, from, to });
        }

        for s in 0..self.n {
            let reported = self.protocol.queue_len(s);
            if reported != self.held[s] {
                return Err(EngineError::QueueMismatch { round, station: s, reported, held: self.held[s] });
            }
        }
        self.protocol
            .check(round)
            .map_err(|detail| EngineError::Protocol { round, detail })?;

        Ok(RoundOutcome {
            round,
            on_mask,
            transmitters,
            feedback,
            delivered,
            adopted_by,
            control_bits,
            events,
        })
    }
}
