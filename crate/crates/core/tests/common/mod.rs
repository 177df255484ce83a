#![allow(dead_code)]

use macsim_core::algorithms::PacketStore;
use macsim_core::bits::ControlBits;
use macsim_core::engine::Protocol;
use macsim_core::model::{timer_until, Feedback, Message, Mode, PacketHeader, Response, Round, Station};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random on-sets within the cap, random transmissions and a replicated
/// adoption rule, to exercise the engine beyond the shipped algorithms.
pub struct Chaos {
    pub masks: Vec<u64>,
    queues: Vec<PacketStore>,
    rng: ChaCha8Rng,
}

impl Chaos {
    pub fn new(n: usize, cap: usize, horizon: Round, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let masks = (0..=horizon + 1)
            .map(|_| {
                let size = rng.gen_range(0..=cap);
                let mut m = 0u64;
                while (m.count_ones() as usize) < size {
                    m |= 1 << rng.gen_range(0..n);
                }
                m
            })
            .collect();
        Self { masks, queues: vec![PacketStore::default(); n], rng }
    }

    pub fn mask(&self, round: Round) -> u64 {
        self.masks[round as usize]
    }

    fn next_on(&self, station: Station, after: Round) -> Option<Round> {
        (after + 1..self.masks.len() as Round).find(|&r| self.mask(r) >> station & 1 == 1)
    }

    /// Even rounds: the smallest on station other than sender and destination adopts.
    fn adopter(&self, round: Round, sender: Station, p: &PacketHeader) -> Option<Station> {
        let m = self.mask(round);
        if round % 2 == 1 || m >> p.destination & 1 == 1 {
            return None;
        }
        (0..64).find(|&s| m >> s & 1 == 1 && s != sender && s != p.destination)
    }
}

impl Protocol for Chaos {
    fn first_wake(&self, station: Station) -> Option<Round> {
        self.next_on(station, 0)
    }

    fn inject(&mut self, round: Round, station: Station, packet: PacketHeader) {
        self.queues[station].push(packet, round);
    }

    fn act(&mut self, _round: Round, station: Station) -> Result<Mode, String> {
        let len = self.queues[station].len();
        if len == 0 || self.rng.gen_bool(0.5) {
            return Ok(Mode::Listen);
        }
        let pick = self.rng.gen_range(0..len);
        let p = self.queues[station].iter().nth(pick).expect("index in range").header;
        let mut control = ControlBits::new();
        for _ in 0..self.rng.gen_range(0..4) {
            control.push_bit(self.rng.gen_bool(0.5));
        }
        Ok(Mode::Transmit(Message::with_control(station, Some(p), control)))
    }

    fn feedback(&mut self, round: Round, station: Station, feedback: &Feedback) -> Result<Response, String> {
        let mut adopt = false;
        if let Feedback::Heard(m) = feedback {
            let p = m.packet.expect("chaos always sends packets");
            let delivered = self.mask(round) >> p.destination & 1 == 1;
            let adopter = self.adopter(round, m.sender, &p);
            if station == m.sender && (delivered || adopter.is_some()) {
                self.queues[station].remove(p.id);
            }
            if adopter == Some(station) {
                self.queues[station].push(p, round);
                adopt = true;
            }
        }
        Ok(Response { adopt, timer: timer_until(round, self.next_on(station, round)) })
    }

    fn queue_len(&self, station: Station) -> usize {
        self.queues[station].len()
    }
}
