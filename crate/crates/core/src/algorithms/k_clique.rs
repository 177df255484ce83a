//! Energy-oblivious direct routing over pairs of station sets.
//!
//! Pairs of sets take single rounds in turn. Each pair runs its own token;
//! the holder sends old packets addressed inside the pair.

use crate::algorithms::layout::{ActivityLayout, PairLayout};
use crate::algorithms::store::PacketStore;
use crate::algorithms::token::RrwToken;
use crate::engine::Protocol;
use crate::model::{mask_of, Feedback, Message, Mode, PacketHeader, Response, Round, Station};

pub struct KClique {
    layout: PairLayout,
    tokens: Vec<RrwToken>,
    masks: Vec<u64>,
    queues: Vec<PacketStore>,
}

impl KClique {
    pub fn new(layout: PairLayout) -> Self {
        let members: Vec<_> = (0..layout.pairs.len()).map(|p| layout.members(p)).collect();
        let masks = members.iter().map(|m| mask_of(m.iter().copied())).collect();
        let tokens = members.into_iter().map(RrwToken::new).collect();
        let queues = vec![PacketStore::default(); layout.n];
        Self { layout, tokens, masks, queues }
    }

    pub fn layout(&self) -> &PairLayout {
        &self.layout
    }
}

impl Protocol for KClique {
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
        let p = self.layout.active_pair(round);
        let token = &self.tokens[p];
        if token.holder() != station {
            return Ok(Mode::Listen);
        }
        let (start, mask) = (token.phase_start(), self.masks[p]);
        let packet = self.queues[station].first_where(|h| h.arrival < start && mask >> h.destination() & 1 == 1);
        Ok(match packet {
            Some(h) => Mode::Transmit(Message::plain(station, h.header)),
            None => Mode::Listen,
        })
    }

    fn feedback(&mut self, round: Round, station: Station, feedback: &Feedback) -> Result<Response, String> {
        let p = self.layout.active_pair(round);
        match feedback {
            Feedback::Heard(msg) => {
                let h = msg.packet.ok_or("plain message without packet")?;
                if msg.sender == station {
                    self.queues[station].remove(h.id);
                }
            }
            Feedback::Silent => {
                self.tokens[p].on_silent(round);
            }
            Feedback::Collision => return Err("collision inside a token pair".into()),
        }
        Ok(Response::sleep_until(round, self.layout.next_on(station, round)))
    }

    fn queue_len(&self, station: Station) -> usize {
        self.queues[station].len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Engine;

    #[test]
    fn token_visits_pair_members_in_order() {
        let layout = PairLayout::new(8, 4).unwrap();
        let mut e = Engine::new(8, 4, Box::new(KClique::new(layout)));
        e.step(&[(1, 2), (2, 3), (3, 0)]).unwrap();
        let mut heard = Vec::new();
        for _ in 0..80 {
            let out = e.step(&[]).unwrap();
            if let Feedback::Heard(m) = &out.feedback {
                heard.push((out.round, m.sender));
            }
        }
        assert_eq!(heard, vec![(28, 2), (31, 1), (49, 3)]);
        assert!(e.packets().iter().all(|p| p.hops.len() == 1 && p.delivery_round.is_some()));
    }
}
