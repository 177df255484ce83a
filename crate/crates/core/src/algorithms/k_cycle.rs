//! Energy-oblivious indirect routing over a cycle of overlapping groups.
//!
//! Groups take turns in segments of `delta` rounds. Inside the active group
//! a token passes over the members; the holder sends its old packets one per
//! round and a silent round moves the token on. A packet for a station
//! outside the group is adopted by the connector to the next group.

use crate::algorithms::layout::{ActivityLayout, GroupLayout};
use crate::algorithms::store::PacketStore;
use crate::algorithms::token::RrwToken;
use crate::engine::Protocol;
use crate::model::{Feedback, Message, Mode, PacketHeader, Response, Round, Station};

pub struct KCycle {
    layout: GroupLayout,
    tokens: Vec<RrwToken>,
    queues: Vec<PacketStore>,
}

impl KCycle {
    pub fn new(layout: GroupLayout) -> Self {
        let tokens = layout.groups.iter().map(|g| RrwToken::new(g.clone())).collect();
        let queues = vec![PacketStore::default(); layout.n];
        Self { layout, tokens, queues }
    }

    pub fn layout(&self) -> &GroupLayout {
        &self.layout
    }

    fn eligible(&self, g: usize, v: Station) -> Option<PacketHeader> {
        let group = &self.layout.groups[g];
        let forward = self.layout.connectors[g];
        let start = self.tokens[g].phase_start();
        self.queues[v]
            .first_where(|h| h.arrival < start && (v != forward || group.contains(&h.destination())))
            .map(|h| h.header)
    }
}

impl Protocol for KCycle {
    fn first_wake(&self, station: Station) -> Option<Round> {
        if self.layout.on_mask(1) >> station & 1 == 1 {
            Some(1)
        } else {
            self.layout.next_on(station, 1)
        }
    }

    fn inject(&mut self, round: Round, station: Station, packet: PacketHeader) {
        self.queues[station].push(packet, round);
    }

    fn act(&mut self, round: Round, station: Station) -> Result<Mode, String> {
        let g = self.layout.active_group(round);
        if self.tokens[g].holder() != station {
            return Ok(Mode::Listen);
        }
        Ok(match self.eligible(g, station) {
            Some(p) => Mode::Transmit(Message::plain(station, p)),
            None => Mode::Listen,
        })
    }

    fn feedback(&mut self, round: Round, station: Station, feedback: &Feedback) -> Result<Response, String> {
        let g = self.layout.active_group(round);
        let mut adopt = false;
        match feedback {
            Feedback::Heard(msg) => {
                let p = msg.packet.ok_or("plain message without packet")?;
                if msg.sender == station {
                    self.queues[station].remove(p.id);
                } else if station == self.layout.connectors[g] && !self.layout.groups[g].contains(&p.destination) {
                    adopt = true;
                    self.queues[station].push(p, round);
                }
            }
            Feedback::Silent => {
                self.tokens[g].on_silent(round);
            }
            Feedback::Collision => return Err("collision inside a token group".into()),
        }
        let next = self.layout.next_on(station, round);
        Ok(Response { adopt, timer: crate::model::timer_until(round, next) })
    }

    fn queue_len(&self, station: Station) -> usize {
        self.queues[station].len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Engine, Event};

    fn engine(n: usize, k: usize) -> Engine {
        let layout = GroupLayout::new(n, k).unwrap();
        let cap = layout.k;
        Engine::new(n, cap, Box::new(KCycle::new(layout)))
    }

    #[test]
    fn cross_group_packet_relayed_by_connector() {
        let mut e = engine(5, 3);
        let mut moved = None;
        let mut delivered = None;
        for r in 1..=60 {
            let inj: &[(Station, Station)] = if r == 1 { &[(1, 3)] } else { &[] };
            let out = e.step(inj).unwrap();
            for ev in &out.events {
                match *ev {
                    Event::Moved { from, to, .. } => moved = Some((out.round, from, to)),
                    Event::Delivered { .. } => delivered = Some(out.round),
                    Event::Injected { .. } => {}
                }
            }
        }
        assert_eq!(moved, Some((5, 1, 2)));
        assert_eq!(delivered, Some(28));
        assert_eq!(e.packets()[0].hops, vec![1, 2]);
    }

    #[test]
    fn token_reaches_every_member() {
        let mut e = engine(7, 3);
        e.step(&[(1, 2), (2, 1), (0, 1)]).unwrap();
        let mut senders = Vec::new();
        for _ in 0..18 {
            let out = e.step(&[]).unwrap();
            if let Feedback::Heard(m) = &out.feedback {
                senders.push(m.sender);
            }
        }
        assert_eq!(senders, vec![0, 1, 2]);
    }
}
