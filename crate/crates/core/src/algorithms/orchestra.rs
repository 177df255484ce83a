//! Season-structured direct routing for injection rate 1 under energy cap 3.
//!
//! A season is `n - 1` rounds. Its conductor transmits in every round: the
//! packet scheduled for the slot (if any), a big bit, and the receive
//! schedule of the musician learning in that slot. Musicians learn one by one
//! in name order and receive according to what the same conductor taught
//! them the last time it conducted.

use std::cell::Cell;

use crate::algorithms::store::PacketStore;
use crate::bits::ControlBits;
use crate::engine::{Protocol, ProtocolStats};
use crate::model::{Feedback, Message, Mode, PacketHeader, Response, Round, Station};

#[derive(Debug, Clone)]
struct StationState {
    list: Vec<Station>,
    conductor: Station,
    /// Big bit heard from the current conductor, once learned this season.
    learned_big: Option<bool>,
    /// `current[c]`: slots (bit `q - 1`) to receive in `c`'s current or next season.
    current: Vec<u64>,
    /// `pending[c]`: slots taught by `c` during its ongoing season.
    pending: Vec<u64>,
    queue: PacketStore,
    cur_schedule: Vec<PacketHeader>,
    next_schedule: Vec<PacketHeader>,
    big: bool,
}

pub struct Orchestra {
    n: usize,
    stations: Vec<StationState>,
    processed_season: u64,
    big_seasons: u64,
    seasons: Vec<(Round, u64)>,
    checks: Cell<u64>,
}

impl Orchestra {
    pub fn new(n: usize) -> Self {
        assert!(n >= 3, "orchestra needs at least 3 stations");
        let st = StationState {
            list: (0..n).collect(),
            conductor: 0,
            learned_big: None,
            current: vec![0; n],
            pending: vec![0; n],
            queue: PacketStore::default(),
            cur_schedule: Vec::new(),
            next_schedule: Vec::new(),
            big: false,
        };
        Self {
            n,
            stations: vec![st; n],
            processed_season: 1,
            big_seasons: 0,
            seasons: Vec::new(),
            checks: Cell::new(0),
        }
    }

    fn len(&self) -> u64 {
        (self.n - 1) as u64
    }

    fn season(&self, round: Round) -> u64 {
        (round - 1) / self.len() + 1
    }

    fn slot(&self, round: Round) -> u64 {
        (round - 1) % self.len() + 1
    }

    /// Slot in which `m` learns while `c` conducts.
    fn learning_slot(m: Station, c: Station) -> u64 {
        if m < c {
            m as u64 + 1
        } else {
            m as u64
        }
    }

    fn learner(&self, c: Station, slot: u64) -> Station {
        (0..self.n).filter(|&v| v != c).nth((slot - 1) as usize).expect("slot in range")
    }

    pub fn baton_list(&self, station: Station) -> &[Station] {
        &self.stations[station].list
    }

    pub fn conductor_seen_by(&self, station: Station) -> Station {
        self.stations[station].conductor
    }

    fn successor(list: &[Station], c: Station) -> Station {
        let i = list.iter().position(|&v| v == c).expect("conductor on list");
        list[(i + 1) % list.len()]
    }

    /// Conductor of the next season as `v` sees it; `None` before `v` has learned the big bit.
    fn next_conductor(st: &StationState, v: Station) -> Option<Station> {
        let c = st.conductor;
        let big = if v == c { Some(st.big) } else { st.learned_big }?;
        Some(if big { c } else { Self::successor(&st.list, c) })
    }

    fn end_season(&mut self) {
        for v in 0..self.n {
            let st = &mut self.stations[v];
            let c = st.conductor;
            let big = if v == c { st.big } else { st.learned_big.unwrap_or(false) };
            if big {
                let i = st.list.iter().position(|&x| x == c).expect("conductor on list");
                let c = st.list.remove(i);
                st.list.insert(0, c);
            } else {
                st.conductor = Self::successor(&st.list, c);
            }
            if v != c {
                st.current[c] = std::mem::take(&mut st.pending[c]);
            }
            st.learned_big = None;
        }
    }

    fn start_season(&mut self, c: Station, start: Round) {
        let limit = self.n * self.n - 1;
        let slots = self.len() as usize;
        let st = &mut self.stations[c];
        let old = st.queue.count_where(|h| h.arrival < start);
        st.big = old >= limit;
        st.cur_schedule = std::mem::take(&mut st.next_schedule);
        let taken: Vec<_> = st.cur_schedule.iter().map(|h| h.id).collect();
        st.next_schedule = st
            .queue
            .iter()
            .filter(|h| h.arrival < start && !taken.contains(&h.header.id))
            .take(slots)
            .map(|h| h.header)
            .collect();
        if st.big {
            self.big_seasons += 1;
        }
        self.seasons.push((start, self.len()));
    }

    /// Earliest round after `now` in which `v` must be on.
    fn next_wake(&self, v: Station, now: Round) -> Round {
        let st = &self.stations[v];
        let q = self.slot(now);
        let last = self.len();
        let c = st.conductor;
        if v == c && q < last {
            return now + 1;
        }
        if v != c {
            let mut slots = st.current[c] & !((1u64 << q) - 1);
            let ls = Self::learning_slot(v, c);
            if ls > q {
                slots |= 1 << (ls - 1);
            }
            if slots != 0 {
                return now - q + 1 + slots.trailing_zeros() as u64;
            }
        }
        let next = Self::next_conductor(st, v).expect("big bit learned before the season ends");
        let next_start = now - q + last + 1;
        if next == v {
            return next_start;
        }
        let schedule = if next == c { st.pending[c] } else { st.current[next] };
        let slots = schedule | 1 << (Self::learning_slot(v, next) - 1);
        next_start + slots.trailing_zeros() as u64
    }
}

impl Protocol for Orchestra {
    fn first_wake(&self, station: Station) -> Option<Round> {
        Some(if station == 0 { 1 } else { Self::learning_slot(station, 0) })
    }

    fn inject(&mut self, round: Round, station: Station, packet: PacketHeader) {
        self.stations[station].queue.push(packet, round);
    }

    fn act(&mut self, round: Round, station: Station) -> Result<Mode, String> {
        let season = self.season(round);
        while self.processed_season < season {
            self.end_season();
            self.processed_season += 1;
        }
        let q = self.slot(round);
        let c = self.stations[station].conductor;
        if station != c {
            return Ok(Mode::Listen);
        }
        if q == 1 {
            self.start_season(c, round);
        }
        let learner = self.learner(c, q);
        let st = &self.stations[c];
        let mut control = ControlBits::new();
        control.push_bit(st.big);
        for slot in 0..self.len() as usize {
            control.push_bit(st.next_schedule.get(slot).is_some_and(|h| h.destination == learner));
        }
        let packet = st.cur_schedule.get((q - 1) as usize).copied();
        if let Some(p) = packet {
            if !st.queue.contains(p.id) {
                return Err(format!("scheduled packet {} no longer held", p.id));
            }
        }
        Ok(Mode::Transmit(Message::with_control(c, packet, control)))
    }

    fn feedback(&mut self, round: Round, station: Station, feedback: &Feedback) -> Result<Response, String> {
        let q = self.slot(round);
        let c = self.stations[station].conductor;
        let Feedback::Heard(msg) = feedback else {
            return Err(format!("conductor {c} not heard in round {round}"));
        };
        if msg.sender != c {
            return Err(format!("heard {} while {c} conducts", msg.sender));
        }
        if station == c {
            if let Some(p) = msg.packet {
                self.stations[c].queue.remove(p.id);
            }
        } else if Self::learning_slot(station, c) == q {
            let mut r = msg.control.reader();
            let big = r.bit().ok_or("missing big bit")?;
            let mut slots = 0u64;
            for i in 0..self.len() {
                if r.bit().ok_or("truncated schedule")? {
                    slots |= 1 << i;
                }
            }
            let st = &mut self.stations[station];
            st.learned_big = Some(big);
            st.pending[c] = slots;
        }
        Ok(Response::sleep_until(round, Some(self.next_wake(station, round))))
    }

    fn queue_len(&self, station: Station) -> usize {
        self.stations[station].queue.len()
    }

    fn check(&self, round: Round) -> Result<(), String> {
        if self.slot(round) != 1 {
            return Ok(());
        }
        self.checks.set(self.checks.get() + 1);
        let first = &self.stations[0];
        for (v, st) in self.stations.iter().enumerate().skip(1) {
            if st.list != first.list || st.conductor != first.conductor {
                return Err(format!(
                    "station {v} sees list {:?} conductor {}, station 0 sees {:?} conductor {}",
                    st.list, st.conductor, first.list, first.conductor
                ));
            }
        }
        Ok(())
    }

    fn stats(&self) -> ProtocolStats {
        ProtocolStats {
            windows: self.seasons.clone(),
            invariant_checks: self.checks.get(),
            big_seasons: self.big_seasons,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learning_slots_follow_names() {
        assert_eq!(Orchestra::learning_slot(0, 2), 1);
        assert_eq!(Orchestra::learning_slot(1, 2), 2);
        assert_eq!(Orchestra::learning_slot(3, 2), 3);
        let o = Orchestra::new(4);
        assert_eq!(o.learner(2, 3), 3);
        assert_eq!(o.learner(0, 1), 1);
    }

    #[test]
    fn big_conductor_moves_to_front() {
        let mut o = Orchestra::new(4);
        for st in &mut o.stations {
            st.conductor = 2;
            st.learned_big = Some(true);
        }
        o.stations[2].big = true;
        o.end_season();
        for v in 0..4 {
            assert_eq!(o.baton_list(v), &[2, 0, 1, 3]);
            assert_eq!(o.conductor_seen_by(v), 2);
        }
    }

    #[test]
    fn default_rotation() {
        let mut o = Orchestra::new(4);
        for st in &mut o.stations {
            st.learned_big = Some(false);
        }
        o.end_season();
        assert_eq!(o.baton_list(3), &[0, 1, 2, 3]);
        assert_eq!(o.conductor_seen_by(3), 1);
    }
}
