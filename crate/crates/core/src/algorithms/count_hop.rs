//! Phase-structured direct routing with counts carried in control bits.
//!
//! The first phase is `n` silent rounds. Every later phase opens with a count
//! chain: for each destination stage `v` in order, the stations other than
//! `v` transmit in name order, each passing on the triple
//! (global cumulative count, stage cumulative count, previous stage total)
//! to the next transmitter in the chain. Station `n - 1` hears the last
//! triple and broadcasts the phase total to the stations that still need it.
//! Then each stage block delivers its old packets directly, every station in
//! its own interval, with the destination listening throughout.

use std::collections::BTreeMap;

use crate::algorithms::store::PacketStore;
use crate::bits::ControlBits;
use crate::engine::{Protocol, ProtocolStats};
use crate::model::{Feedback, Message, Mode, PacketHeader, Response, Round, Station};
use crate::rational::{floor_to_i128, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    /// Hear the chain message at this chain position.
    ChainListen(u64),
    ChainSend(u64),
    TotalListen,
    TotalSend,
    Send(Station),
    Receive,
}

#[derive(Debug, Clone, Default)]
struct StationState {
    queue: PacketStore,
    phase_start: Round,
    roles: BTreeMap<Round, Role>,
    next_phase: Option<Round>,
    heard: Option<(u64, u64, u64)>,
    total: Option<u64>,
}

pub struct CountHop {
    n: usize,
    width: u32,
    stations: Vec<StationState>,
    phases: Vec<(Round, u64)>,
}

impl CountHop {
    /// `width` is the bit width of each transmitted count.
    pub fn new(n: usize, width: u32) -> Self {
        assert!(n >= 3, "count-hop needs at least 3 stations");
        let mut me = Self { n, width: width.max(1), stations: vec![StationState::default(); n], phases: Vec::new() };
        me.phases.push((1, n as u64));
        for v in 0..n {
            me.stations[v].phase_start = n as Round + 1;
            me.plan_phase(v, n as Round + 1);
        }
        me
    }

    /// Width that fits every count arising within `horizon` rounds.
    pub fn width_for(horizon: Round, beta: Rational) -> u32 {
        let max = horizon as i128 + floor_to_i128(&beta) + 1;
        (128 - (max as u128).leading_zeros()).max(1)
    }

    fn chain_len(&self) -> u64 {
        (self.n * (self.n - 1)) as u64
    }

    /// Number of control rounds opening every phase after the first.
    pub fn overhead(&self) -> u64 {
        self.chain_len() + self.n as u64 - 2
    }

    fn stage_of(&self, j: u64) -> Station {
        (j / (self.n as u64 - 1)) as Station
    }

    fn participant(&self, j: u64) -> Station {
        let u = self.stage_of(j);
        let p = (j % (self.n as u64 - 1)) as Station;
        if p < u {
            p
        } else {
            p + 1
        }
    }

    fn plan_phase(&mut self, v: Station, start: Round) {
        let chain = self.chain_len();
        let mut roles = Vec::new();
        for j in 0..chain {
            if self.participant(j) == v {
                roles.push((start + j, Role::ChainSend(j)));
                if j > 0 {
                    roles.push((start + j - 1, Role::ChainListen(j - 1)));
                }
            }
        }
        if v == self.n - 1 {
            roles.push((start + chain - 1, Role::ChainListen(chain - 1)));
            for b in 0..self.n as u64 - 2 {
                roles.push((start + chain + b, Role::TotalSend));
            }
        } else if v + 2 < self.n {
            roles.push((start + chain + v as u64, Role::TotalListen));
        }
        self.stations[v].roles.extend(roles);
    }

    fn transmit_base(&self, v: Station) -> Round {
        self.stations[v].phase_start + self.overhead()
    }

    fn old_for(&self, v: Station, dest: Station) -> u64 {
        let start = self.stations[v].phase_start;
        self.stations[v].queue.count_where(|h| h.arrival < start && h.destination() == dest) as u64
    }

    fn learn_total(&mut self, v: Station, total: u64) {
        let base = self.transmit_base(v);
        self.stations[v].total = Some(total);
        if v == 0 {
            self.phases.push((self.stations[v].phase_start, self.overhead() + total));
        }
        self.stations[v].next_phase = Some(base + total);
        self.plan_phase(v, base + total);
    }

    fn enter_phase(&mut self, v: Station, round: Round) {
        let st = &mut self.stations[v];
        if let Some(p) = st.next_phase.filter(|&p| p <= round) {
            st.phase_start = p;
            st.next_phase = None;
            st.heard = None;
            st.total = None;
        }
    }

    /// Stage boundaries learnt from a triple heard at chain position `j` by
    /// `v`, which sends next at `j + 1` or is the final listener.
    fn learn_from_triple(&mut self, v: Station, j: u64, (g, s, t_prev): (u64, u64, u64)) {
        let sender_stage = self.stage_of(j);
        let base = self.transmit_base(v);
        let last = j + 1 == self.chain_len();
        let next_stage = !last && self.stage_of(j + 1) != sender_stage;
        let block = if sender_stage == v + 1 && !next_stage {
            Some((g - s - t_prev, g - s))
        } else if sender_stage == v && (last || next_stage) {
            Some((g - s, g))
        } else {
            None
        };
        if let Some((from, to)) = block {
            for r in from..to {
                self.stations[v].roles.insert(base + r, Role::Receive);
            }
        }
        if last {
            self.learn_total(v, g);
        }
    }

    fn chain_message(&mut self, v: Station, j: u64) -> Result<Message, String> {
        let u = self.stage_of(j);
        let (g, s, t_prev) = match (j, self.stations[v].heard) {
            (0, _) => (0, 0, 0),
            (_, Some((g, s, t))) if self.stage_of(j - 1) == u => (g, s, t),
            (_, Some((g, s, _))) => (g, 0, s),
            (_, None) => return Err(format!("station {v} missed the chain message before position {j}")),
        };
        let c = self.old_for(v, u);
        let base = self.transmit_base(v);
        for r in g..g + c {
            self.stations[v].roles.insert(base + r, Role::Send(u));
        }
        let mut control = ControlBits::new();
        for x in [g + c, s + c, t_prev] {
            if self.width < 64 && x >> self.width != 0 {
                return Err(format!("count {x} exceeds {} bits", self.width));
            }
            control.push_uint(x, self.width);
        }
        if j + 1 == self.chain_len() {
            self.learn_total(v, g + c);
        }
        Ok(Message::with_control(v, None, control))
    }
}

impl Protocol for CountHop {
    fn first_wake(&self, station: Station) -> Option<Round> {
        self.stations[station].roles.keys().next().copied()
    }

    fn inject(&mut self, round: Round, station: Station, packet: PacketHeader) {
        self.stations[station].queue.push(packet, round);
    }

    fn act(&mut self, round: Round, station: Station) -> Result<Mode, String> {
        self.enter_phase(station, round);
        let role = self.stations[station].roles.get(&round).copied();
        match role {
            None => Err(format!("station {station} on without a role")),
            Some(Role::ChainListen(_) | Role::TotalListen | Role::Receive) => Ok(Mode::Listen),
            Some(Role::ChainSend(j)) => Ok(Mode::Transmit(self.chain_message(station, j)?)),
            Some(Role::TotalSend) => {
                let total = self.stations[station].total.ok_or("phase total unknown")?;
                let mut control = ControlBits::new();
                control.push_uint(total, self.width);
                Ok(Mode::Transmit(Message::with_control(station, None, control)))
            }
            Some(Role::Send(dest)) => {
                let st = &self.stations[station];
                let start = st.phase_start;
                let p = st
                    .queue
                    .first_where(|h| h.arrival < start && h.destination() == dest)
                    .ok_or_else(|| format!("station {station} overran its interval for {dest}"))?;
                Ok(Mode::Transmit(Message::plain(station, p.header)))
            }
        }
    }

    fn feedback(&mut self, round: Round, station: Station, feedback: &Feedback) -> Result<Response, String> {
        let role = self.stations[station].roles.remove(&round).ok_or("feedback without a role")?;
        match (role, feedback) {
            (Role::ChainListen(j), Feedback::Heard(msg)) => {
                let mut r = msg.control.reader();
                let triple = (
                    r.uint(self.width).ok_or("short chain message")?,
                    r.uint(self.width).ok_or("short chain message")?,
                    r.uint(self.width).ok_or("short chain message")?,
                );
                self.stations[station].heard = Some(triple);
                self.learn_from_triple(station, j, triple);
            }
            (Role::TotalListen, Feedback::Heard(msg)) => {
                let total = msg.control.reader().uint(self.width).ok_or("short total message")?;
                self.learn_total(station, total);
            }
            (Role::Send(_), Feedback::Heard(msg)) => {
                if let Some(p) = msg.packet {
                    self.stations[station].queue.remove(p.id);
                }
            }
            (Role::ChainSend(_) | Role::TotalSend | Role::Receive, Feedback::Heard(_)) => {}
            (role, fb) => return Err(format!("station {station} in role {role:?} got {:?}", fb.kind())),
        }
        let next = self.stations[station].roles.range(round + 1..).next().map(|(r, _)| *r);
        Ok(Response::sleep_until(round, next))
    }

    fn queue_len(&self, station: Station) -> usize {
        self.stations[station].queue.len()
    }

    fn stats(&self) -> ProtocolStats {
        ProtocolStats { windows: self.phases.clone(), ..ProtocolStats::default() }
    }
}
