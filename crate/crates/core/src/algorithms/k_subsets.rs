//! Energy-oblivious direct routing over all `k`-subsets of stations.
//!
//! Round `t` belongs to thread `(t - 1) mod C(n, k)`, whose subset is on.
//! At each phase start a station spreads the packets it received in earlier
//! phases over the threads containing both itself and the destination, as
//! evenly as possible. Each thread runs move-big-to-front on its own queues:
//! the holder declares itself big while its thread queue reaches the
//! threshold, moving to the front of the thread's list and keeping the turn;
//! otherwise it sends what it held when the turn arrived and passes on.

use std::cell::Cell;
use std::collections::BTreeMap;

use crate::algorithms::layout::{ActivityLayout, ThreadLayout};
use crate::algorithms::store::PacketStore;
use crate::bits::ControlBits;
use crate::engine::{Protocol, ProtocolStats};
use crate::model::{Feedback, Message, Mode, PacketHeader, Response, Round, Station};

/// Assigns `packets` packets one at a time to the eligible thread with the
/// fewest allocated so far, ties to the smallest index; returns the choices.
pub fn balanced_allocate(counters: &mut [u64], packets: usize) -> Vec<usize> {
    (0..packets)
        .map(|_| {
            let (i, _) = counters
                .iter()
                .enumerate()
                .min_by_key(|&(i, &x)| (x, i))
                .expect("at least one eligible thread");
            counters[i] += 1;
            i
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreadDiscipline {
    MoveBigToFront { threshold: usize },
    RoundRobinWithholding,
}

#[derive(Debug, Clone)]
struct ThreadState {
    list: Vec<Station>,
    pos: usize,
    budget: Option<usize>,
    moved_in: Round,
}

#[derive(Debug, Clone, Default)]
struct StationState {
    inbox: PacketStore,
    threads: BTreeMap<usize, PacketStore>,
    /// `counters[w]`: packets for `w` allocated to each eligible thread.
    counters: Vec<Vec<u64>>,
    allocated_phase: Option<u64>,
}

pub struct KSubsets {
    layout: ThreadLayout,
    discipline: ThreadDiscipline,
    eligible: Vec<Vec<Vec<usize>>>,
    threads: Vec<ThreadState>,
    stations: Vec<StationState>,
    checks: Cell<u64>,
}

impl KSubsets {
    pub fn new(layout: ThreadLayout, discipline: ThreadDiscipline) -> Self {
        let n = layout.n;
        let eligible: Vec<Vec<Vec<usize>>> =
            (0..n).map(|v| (0..n).map(|w| if v == w { Vec::new() } else { layout.eligible(v, w) }).collect()).collect();
        let threads = layout
            .subsets
            .iter()
            .map(|s| ThreadState { list: s.clone(), pos: 0, budget: None, moved_in: 0 })
            .collect();
        let stations = (0..n)
            .map(|v| StationState {
                counters: eligible[v].iter().map(|e| vec![0; e.len()]).collect(),
                ..StationState::default()
            })
            .collect();
        Self { layout, discipline, eligible, threads, stations, checks: Cell::new(0) }
    }

    pub fn layout(&self) -> &ThreadLayout {
        &self.layout
    }

    /// Allocation counters of `v` for destination `w`, in eligible-thread order.
    pub fn counters(&self, v: Station, w: Station) -> &[u64] {
        &self.stations[v].counters[w]
    }

    fn phase_of(&self, round: Round) -> u64 {
        (round - 1) / self.layout.gamma() as u64
    }

    fn allocate(&mut self, v: Station, round: Round) {
        let phase = self.phase_of(round);
        let st = &mut self.stations[v];
        if st.allocated_phase == Some(phase) {
            return;
        }
        st.allocated_phase = Some(phase);
        let start = phase * self.layout.gamma() as u64 + 1;
        let ready: Vec<_> = st.inbox.iter().filter(|h| h.arrival < start).copied().collect();
        for h in ready {
            st.inbox.remove(h.header.id);
            let w = h.destination();
            let local = balanced_allocate(&mut st.counters[w], 1)[0];
            let thread = self.eligible[v][w][local];
            st.threads.entry(thread).or_default().push(h.header, h.arrival);
        }
    }

    fn thread_len(&self, v: Station, thread: usize) -> usize {
        self.stations[v].threads.get(&thread).map_or(0, PacketStore::len)
    }

    fn oldest(&self, v: Station, thread: usize) -> Option<PacketHeader> {
        self.stations[v].threads.get(&thread)?.iter().next().map(|h| h.header)
    }
}

impl Protocol for KSubsets {
    fn first_wake(&self, station: Station) -> Option<Round> {
        if self.layout.on_mask(1) >> station & 1 == 1 {
            Some(1)
        } else {
            self.layout.next_on(station, 1)
        }
    }

    fn inject(&mut self, round: Round, station: Station, packet: PacketHeader) {
        self.stations[station].inbox.push(packet, round);
    }

    fn act(&mut self, round: Round, station: Station) -> Result<Mode, String> {
        self.allocate(station, round);
        let i = self.layout.thread_of(round);
        let t = &self.threads[i];
        let holder = t.list[t.pos];
        if holder != station {
            return Ok(Mode::Listen);
        }
        let q = self.thread_len(station, i);
        let big = matches!(self.discipline, ThreadDiscipline::MoveBigToFront { threshold } if q >= threshold);
        let budget = if big { q } else { t.budget.unwrap_or(q) };
        self.threads[i].budget = (!big).then_some(budget);
        if budget == 0 {
            return Ok(Mode::Listen);
        }
        let packet = self.oldest(station, i).ok_or("thread budget exceeds queue")?;
        let mut control = ControlBits::new();
        control.push_bit(big);
        control.push_bit(!big && budget == 1);
        Ok(Mode::Transmit(Message::with_control(station, Some(packet), control)))
    }

    fn feedback(&mut self, round: Round, station: Station, feedback: &Feedback) -> Result<Response, String> {
        let i = self.layout.thread_of(round);
        let k = self.layout.k;
        match feedback {
            Feedback::Heard(msg) if msg.sender == station => {
                let p = msg.packet.ok_or("thread message without packet")?;
                self.stations[station].threads.get_mut(&i).and_then(|q| q.remove(p.id));
                let mut r = msg.control.reader();
                let (big, last) = (r.bit().ok_or("missing big bit")?, r.bit().ok_or("missing last bit")?);
                let t = &mut self.threads[i];
                if big {
                    let s = t.list.remove(t.pos);
                    t.list.insert(0, s);
                    t.pos = 0;
                    t.budget = None;
                } else if last {
                    t.pos = (t.pos + 1) % k;
                    t.budget = None;
                } else {
                    t.budget = t.budget.map(|b| b - 1);
                }
            }
            Feedback::Heard(_) => {}
            Feedback::Silent => {
                let t = &mut self.threads[i];
                if t.moved_in != round {
                    t.moved_in = round;
                    t.pos = (t.pos + 1) % k;
                    t.budget = None;
                }
            }
            Feedback::Collision => return Err("collision inside a thread".into()),
        }
        Ok(Response::sleep_until(round, self.layout.next_on(station, round)))
    }

    fn queue_len(&self, station: Station) -> usize {
        let st = &self.stations[station];
        st.inbox.len() + st.threads.values().map(PacketStore::len).sum::<usize>()
    }

    fn check(&self, round: Round) -> Result<(), String> {
        if !(round - 1).is_multiple_of(self.layout.gamma() as u64) {
            return Ok(());
        }
        self.checks.set(self.checks.get() + 1);
        for (v, st) in self.stations.iter().enumerate() {
            for (w, c) in st.counters.iter().enumerate() {
                let (lo, hi) = (c.iter().min(), c.iter().max());
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    if hi - lo > 1 {
                        return Err(format!("allocation of {v} for {w} unbalanced: {c:?}"));
                    }
                }
            }
        }
        Ok(())
    }

    fn stats(&self) -> ProtocolStats {
        ProtocolStats { invariant_checks: self.checks.get(), ..ProtocolStats::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Smallest achievable maximum when spreading `m` more packets.
    fn best_max(counters: &[u64], m: usize) -> u64 {
        fn go(c: &mut Vec<u64>, m: usize) -> u64 {
            if m == 0 {
                return *c.iter().max().unwrap();
            }
            let mut best = u64::MAX;
            for i in 0..c.len() {
                c[i] += 1;
                best = best.min(go(c, m - 1));
                c[i] -= 1;
            }
            best
        }
        go(&mut counters.to_vec(), m)
    }

    #[test]
    fn unique_thread() {
        let t = ThreadLayout::new(4, 2).unwrap();
        let e = t.eligible(0, 1);
        let mut c = vec![0; e.len()];
        assert_eq!(balanced_allocate(&mut c, 4), vec![0; 4]);
    }

    #[test]
    fn seven_over_three() {
        let mut c = vec![0; 3];
        balanced_allocate(&mut c, 7);
        assert_eq!(c, vec![3, 2, 2]);
        let mut z = vec![1, 1];
        assert!(balanced_allocate(&mut z, 0).is_empty());
        assert_eq!(z, vec![1, 1]);
    }

    proptest! {
        #[test]
        fn allocation_is_optimal_and_balanced(base in 0u64..3, len in 1usize..5, skew in proptest::collection::vec(0u64..2, 5), m in 0usize..6) {
            let mut c: Vec<u64> = (0..len).map(|i| base + skew[i]).collect();
            let before = c.clone();
            let best = best_max(&before, m);
            balanced_allocate(&mut c, m);
            prop_assert_eq!(*c.iter().max().unwrap(), best);
            prop_assert!(c.iter().max().unwrap() - c.iter().min().unwrap() <= 1);
            prop_assert_eq!(c.iter().sum::<u64>(), before.iter().sum::<u64>() + m as u64);
        }
    }
}

#[cfg(test)]
mod rotation {
    use super::*;
    use crate::engine::Engine;

    #[test]
    fn withholding_token_rotates_once_per_silent_round() {
        let layout = ThreadLayout::new(4, 3).unwrap();
        let mut e = Engine::new(4, 3, Box::new(KSubsets::new(layout, ThreadDiscipline::RoundRobinWithholding)));
        e.step(&[(1, 2), (2, 0)]).unwrap();
        let mut heard = Vec::new();
        for _ in 0..40 {
            let out = e.step(&[]).unwrap();
            if let Feedback::Heard(m) = &out.feedback {
                heard.push(m.sender);
            }
        }
        assert_eq!(heard, vec![1, 2]);
        assert!(e.packets().iter().all(|p| p.delivery_round.is_some()));
    }
}
