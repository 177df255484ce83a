//! Plain-packet indirect routing in doubling time windows.
//!
//! A window of `L` rounds runs Gossip, Main and Auxiliary stages. Large
//! stations describe their window-start queues by coded transfer during
//! Gossip, every station derives the same Main schedule from what it heard,
//! and Auxiliary round-robin clears relayed packets and small stations.

use crate::algorithms::store::PacketStore;
use crate::bits::{decode_fixed, encode_fixed};
use crate::engine::{Protocol, ProtocolStats};
use crate::model::{Feedback, Message, Mode, PacketHeader, Response, Round, Station};
use crate::rational::lg;

/// Stage lengths of one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowParams {
    pub start: Round,
    pub l: u64,
    pub lg: u32,
    pub gossip_phase: u64,
    pub l_g: u64,
    pub l_m: u64,
    pub l_a: u64,
}

impl WindowParams {
    pub fn new(n: usize, start: Round, l: u64) -> Self {
        let n = n as u64;
        let b = lg(l);
        let gossip_phase = 2 + 3 * b as u64;
        let l_g = n * n * gossip_phase;
        let l_a = 8 * n * n * n * b as u64;
        let l_m = l.checked_sub(l_g + l_a).filter(|&m| m > 0).expect("window too short for its stages");
        Self { start, l, lg: b, gossip_phase, l_g, l_m, l_a }
    }

    pub fn end(&self) -> Round {
        self.start + self.l
    }

    pub fn main_start(&self) -> Round {
        self.start + self.l_g
    }

    pub fn aux_start(&self) -> Round {
        self.start + self.l_g + self.l_m
    }

    /// Queue size at window start from which a station counts as large.
    pub fn large_threshold(&self, n: usize) -> u64 {
        4 * n as u64 * self.lg as u64
    }
}

/// Smallest `L` with `L - 9 n^3 lg L >= L / 2`.
pub fn initial_window(n: usize) -> u64 {
    let c = 18 * (n as u64).pow(3);
    for b in 1..64u32 {
        let lo = 1u64 << (b - 1);
        let hi = (1u64 << b) - 1;
        let candidate = lo.max(c * b as u64);
        if candidate <= hi {
            return candidate;
        }
    }
    unreachable!("initial window overflows u64")
}

/// Bits sent for `values` by coded transfer, `width` bits each, big-endian.
pub fn coded_transfer_bits(values: &[u64], width: u32) -> Vec<bool> {
    values.iter().flat_map(|&v| encode_fixed(v, width)).collect()
}

pub fn decode_coded_transfer(bits: &[bool], width: u32) -> Option<Vec<u64>> {
    if width == 0 || !bits.len().is_multiple_of(width as usize) {
        return None;
    }
    bits.chunks(width as usize).map(decode_fixed).collect()
}

/// What a listener learns about one station during Gossip.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GossipRecord {
    pub large: bool,
    pub exceeds: bool,
    pub queue: u64,
    pub to_j: u64,
    pub below_j: u64,
}

impl GossipRecord {
    fn bits(&self, width: u32) -> Vec<bool> {
        let mut bits = vec![self.large, self.exceeds];
        bits.extend(coded_transfer_bits(&[self.queue, self.to_j, self.below_j], width));
        bits
    }

    fn from_bits(bits: &[bool], width: u32) -> Option<Self> {
        if !bits[0] {
            return Some(Self::default());
        }
        let v = decode_coded_transfer(&bits[2..], width)?;
        Some(Self { large: true, exceeds: bits[1], queue: v[0], to_j: v[1], below_j: v[2] })
    }
}

/// Start of every large station's block in a canonical Main stage.
pub fn main_offsets(records: &[GossipRecord]) -> Vec<u64> {
    let mut acc = 0;
    records
        .iter()
        .map(|r| {
            let at = acc;
            if r.large {
                acc += r.queue;
            }
            at
        })
        .collect()
}

/// Main-stage rounds (relative, half-open) in which `listener` must listen,
/// given each station's record as seen by `listener`.
pub fn main_listen_intervals(records: &[GossipRecord], listener: Station, l_m: u64) -> Vec<(u64, u64)> {
    let offsets = main_offsets(records);
    records
        .iter()
        .enumerate()
        .filter(|&(i, r)| i != listener && r.large && r.to_j > 0)
        .filter_map(|(i, r)| {
            let from = offsets[i] + r.below_j;
            let to = (from + r.to_j).min(l_m);
            (from < to).then_some((from, to))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum MainMode {
    Dedicated(Station),
    Canonical { offsets: Vec<u64>, listen: Vec<(u64, u64)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Plan {
    mode: MainMode,
    double: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Duty {
    Listen,
    GossipBit(Station, bool),
    MainSend(usize),
    DedicatedSend(Station),
    AuxSend(Station),
}

#[derive(Debug, Clone)]
struct StationState {
    queue: PacketStore,
    win: WindowParams,
    entered: bool,
    snapshot: Vec<PacketHeader>,
    own: Vec<GossipRecord>,
    heard_bits: Vec<bool>,
    records: Vec<Option<GossipRecord>>,
    plan: Option<Plan>,
}

pub struct AdjustWindow {
    n: usize,
    stations: Vec<StationState>,
    windows: Vec<(Round, u64)>,
}

impl AdjustWindow {
    pub fn new(n: usize) -> Self {
        Self::with_window(n, initial_window(n))
    }

    pub fn with_window(n: usize, l: u64) -> Self {
        assert!((3..=64).contains(&n), "adjust-window needs 3..=64 stations");
        let win = WindowParams::new(n, 1, l);
        let st = StationState {
            queue: PacketStore::default(),
            win,
            entered: false,
            snapshot: Vec::new(),
            own: Vec::new(),
            heard_bits: Vec::new(),
            records: vec![None; n],
            plan: None,
        };
        Self { n, stations: vec![st; n], windows: vec![(1, l)] }
    }

    pub fn window_of(&self, station: Station) -> WindowParams {
        self.stations[station].win
    }

    fn first_row_phase(&self, v: Station) -> u64 {
        (v * self.n + usize::from(v == 0)) as u64
    }

    fn next_window(&self, v: Station) -> Option<WindowParams> {
        let st = &self.stations[v];
        let plan = st.plan.as_ref()?;
        let l = if plan.double { 2 * st.win.l } else { st.win.l };
        Some(WindowParams::new(self.n, st.win.end(), l))
    }

    /// Gossip duties known before the window's snapshot is taken.
    fn future_duty(&self, v: Station, w: &WindowParams, r: Round) -> Option<Duty> {
        let rel = r - w.start;
        if rel >= w.l_g {
            return None;
        }
        let phase = rel / w.gossip_phase;
        let (i, j) = ((phase as usize) / self.n, (phase as usize) % self.n);
        if i == j {
            None
        } else if j == v || (i == v && phase == self.first_row_phase(v) && rel.is_multiple_of(w.gossip_phase)) {
            Some(Duty::Listen)
        } else {
            None
        }
    }

    /// What `v` does in round `r` of its current, entered window.
    fn duty(&self, v: Station, r: Round, holds: impl Fn(Station) -> bool) -> Option<Duty> {
        let st = &self.stations[v];
        let w = &st.win;
        let n = self.n;
        let rel = r - w.start;
        if rel < w.l_g {
            let phase = rel / w.gossip_phase;
            let k = (rel % w.gossip_phase) as usize;
            let (i, j) = ((phase as usize) / n, (phase as usize) % n);
            if i == j {
                return None;
            }
            if j == v {
                return Some(Duty::Listen);
            }
            if i != v {
                return None;
            }
            let probe = phase == self.first_row_phase(v) && k == 0;
            let record = st.own[j];
            if record.large && record.bits(w.lg)[k] {
                return Some(Duty::GossipBit(j, true));
            }
            return probe.then_some(Duty::Listen);
        }
        let rel = rel - w.l_g;
        if rel < w.l_m {
            let plan = st.plan.as_ref()?;
            return match &plan.mode {
                MainMode::Dedicated(d) => {
                    let listener = (0..n).filter(|x| x != d).nth((rel % (n as u64 - 1)) as usize)?;
                    if listener == v {
                        Some(Duty::Listen)
                    } else if *d == v && holds(listener) {
                        Some(Duty::DedicatedSend(listener))
                    } else {
                        None
                    }
                }
                MainMode::Canonical { offsets, listen } => {
                    if listen.iter().any(|&(a, b)| (a..b).contains(&rel)) {
                        return Some(Duty::Listen);
                    }
                    if !st.own[v].large || rel < offsets[v] {
                        return None;
                    }
                    let p = (rel - offsets[v]) as usize;
                    let p_ok = st.snapshot.get(p).is_some_and(|h| st.queue.contains(h.id));
                    p_ok.then_some(Duty::MainSend(p))
                }
            };
        }
        let rel = rel - w.l_m;
        let pos = (rel % (n * n) as u64) as usize;
        let (i, j) = (pos / n, pos % n);
        if i == j {
            None
        } else if j == v {
            Some(Duty::Listen)
        } else if i == v && holds(j) {
            Some(Duty::AuxSend(j))
        } else {
            None
        }
    }

    fn next_wake(&self, v: Station, now: Round) -> Round {
        let st = &self.stations[v];
        let mask = st.queue.iter().fold(0u64, |m, h| m | 1 << h.destination());
        let holds = |d: Station| mask >> d & 1 == 1;
        let mut r = now + 1;
        while r < st.win.end() {
            if self.duty(v, r, holds).is_some() {
                return r;
            }
            r += 1;
        }
        let next = self.next_window(v).expect("plan known once gossip ends");
        loop {
            if self.future_duty(v, &next, r).is_some() {
                return r;
            }
            r += 1;
        }
    }

    fn enter(&mut self, v: Station, round: Round) {
        if round >= self.stations[v].win.end() {
            let next = self.next_window(v).expect("plan known once gossip ends");
            if v == 0 {
                self.windows.push((next.start, next.l));
            }
            let st = &mut self.stations[v];
            st.win = next;
            st.entered = false;
        }
        let n = self.n;
        let st = &mut self.stations[v];
        if st.entered {
            return;
        }
        let w = st.win;
        let mut snapshot: Vec<PacketHeader> =
            st.queue.iter().filter(|h| h.arrival < w.start).map(|h| h.header).collect();
        snapshot.sort_by_key(|h| h.destination);
        let q = snapshot.len() as u64;
        let large = q >= w.large_threshold(n);
        st.own = (0..n)
            .map(|j| {
                let to_j = snapshot.iter().filter(|h| h.destination == j).count() as u64;
                let below_j = snapshot.iter().filter(|h| h.destination < j).count() as u64;
                GossipRecord {
                    large,
                    exceeds: large && q > w.l,
                    queue: if large { q.min(w.l) } else { 0 },
                    to_j: if large { to_j.min(w.l) } else { 0 },
                    below_j: if large { below_j.min(w.l) } else { 0 },
                }
            })
            .collect();
        st.snapshot = snapshot;
        st.records = vec![None; n];
        st.records[v] = Some(st.own[v]);
        st.plan = None;
        st.heard_bits.clear();
        st.entered = true;
    }

    fn make_plan(&mut self, v: Station) {
        let st = &mut self.stations[v];
        let records: Vec<GossipRecord> = st.records.iter().map(|r| r.expect("all records heard")).collect();
        let dedicated = records.iter().position(|r| r.large && r.exceeds);
        let total: u64 = records.iter().filter(|r| r.large).map(|r| r.queue).sum();
        let double = dedicated.is_some() || total > st.win.l_m;
        let mode = match dedicated {
            Some(d) => MainMode::Dedicated(d),
            None => MainMode::Canonical {
                offsets: main_offsets(&records),
                listen: main_listen_intervals(&records, v, st.win.l_m),
            },
        };
        st.plan = Some(Plan { mode, double });
    }

    fn oldest_for(&self, v: Station, dest: Station) -> Option<PacketHeader> {
        self.stations[v].queue.first_where(|h| h.destination() == dest).map(|h| h.header)
    }
}

impl Protocol for AdjustWindow {
    fn first_wake(&self, station: Station) -> Option<Round> {
        let w = self.stations[station].win;
        (w.start..w.start + w.l_g).find(|&r| self.future_duty(station, &w, r).is_some())
    }

    fn inject(&mut self, round: Round, station: Station, packet: PacketHeader) {
        self.stations[station].queue.push(packet, round);
    }

    fn act(&mut self, round: Round, station: Station) -> Result<Mode, String> {
        self.enter(station, round);
        let st = &self.stations[station];
        let duty = self.duty(station, round, |d| st.queue.first_where(|h| h.destination() == d).is_some());
        let packet = match duty {
            None => return Err(format!("station {station} on without a duty")),
            Some(Duty::Listen) => return Ok(Mode::Listen),
            Some(Duty::GossipBit(j, _)) => self
                .oldest_for(station, j)
                .or_else(|| st.queue.iter().next().map(|h| h.header))
                .ok_or_else(|| format!("queue underflow at station {station} during coded transfer"))?,
            Some(Duty::MainSend(p)) => st.snapshot[p],
            Some(Duty::DedicatedSend(d) | Duty::AuxSend(d)) => {
                self.oldest_for(station, d).ok_or("no packet for the scheduled listener")?
            }
        };
        Ok(Mode::Transmit(Message::plain(station, packet)))
    }

    fn feedback(&mut self, round: Round, station: Station, feedback: &Feedback) -> Result<Response, String> {
        let w = self.stations[station].win;
        let mut adopt = false;
        match feedback {
            Feedback::Heard(msg) if msg.sender == station => {
                let p = msg.packet.ok_or("plain message without packet")?;
                self.stations[station].queue.remove(p.id);
            }
            Feedback::Heard(msg) => {
                let p = msg.packet.ok_or("plain message without packet")?;
                if p.destination != station {
                    adopt = true;
                    self.stations[station].queue.push(p, round);
                }
            }
            Feedback::Silent => {}
            Feedback::Collision => return Err("collision under a collision-free schedule".into()),
        }
        let rel = round - w.start;
        if rel < w.l_g {
            let phase = rel / w.gossip_phase;
            let k = rel % w.gossip_phase;
            let i = (phase as usize) / self.n;
            if (phase as usize) % self.n == station && i != station {
                let st = &mut self.stations[station];
                if k == 0 {
                    st.heard_bits.clear();
                }
                st.heard_bits.push(matches!(feedback, Feedback::Heard(_)));
                if k + 1 == w.gossip_phase {
                    let rec = GossipRecord::from_bits(&st.heard_bits, w.lg).ok_or("malformed gossip")?;
                    st.records[i] = Some(rec);
                    if st.records.iter().all(Option::is_some) {
                        self.make_plan(station);
                    }
                }
            }
        }
        let next = self.next_wake(station, round);
        Ok(Response { adopt, timer: crate::model::timer_until(round, Some(next)) })
    }

    fn queue_len(&self, station: Station) -> usize {
        self.stations[station].queue.len()
    }

    fn stats(&self) -> ProtocolStats {
        ProtocolStats { windows: self.windows.clone(), ..ProtocolStats::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn initial_window_for_four() {
        assert_eq!(initial_window(4), 16128);
        let w = WindowParams::new(4, 1, 16128);
        assert_eq!((w.lg, w.l_g, w.l_a, w.l_m), (14, 704, 7168, 8256));
    }

    #[test]
    fn initial_window_is_smallest() {
        for n in 3..=6 {
            let l = initial_window(n);
            let ok = |l: u64| 2 * (l - 9 * (n as u64).pow(3) * lg(l) as u64) >= l;
            assert!(ok(l));
            assert!((1..l).all(|m| 9 * (n as u64).pow(3) * (lg(m) as u64) > m || !ok(m)));
        }
    }

    #[test]
    fn coded_transfer_example() {
        assert_eq!(coded_transfer_bits(&[5], 4), vec![false, true, false, true]);
        assert_eq!(coded_transfer_bits(&[0, 0], 3), vec![false; 6]);
    }

    #[test]
    fn single_source_all_to_listener() {
        let mut recs = vec![GossipRecord::default(); 4];
        recs[2] = GossipRecord { large: true, exceeds: false, queue: 70, to_j: 70, below_j: 0 };
        assert_eq!(main_listen_intervals(&recs, 1, 1000), vec![(0, 70)]);
        assert!(main_listen_intervals(&[GossipRecord::default(); 4], 1, 1000).is_empty());
    }

    /// Replays the canonical transmission order and collects `j`'s slots.
    fn replay(queues: &[Vec<Station>], large: &[bool], j: Station, l_m: u64) -> Vec<u64> {
        let mut slot = 0u64;
        let mut out = Vec::new();
        for (i, q) in queues.iter().enumerate() {
            if !large[i] {
                continue;
            }
            let mut sorted = q.clone();
            sorted.sort();
            for d in sorted {
                if d == j && i != j && slot < l_m {
                    out.push(slot);
                }
                slot += 1;
            }
        }
        out
    }

    proptest! {
        #[test]
        fn coded_transfer_round_trip(x in 0u64..=17280) {
            let bits = coded_transfer_bits(&[x], lg(17280));
            prop_assert_eq!(decode_coded_transfer(&bits, lg(17280)), Some(vec![x]));
        }

        #[test]
        fn listen_intervals_match_replay(
            n in 3usize..=5,
            raw in proptest::collection::vec((0usize..5, 0usize..5), 0..30),
            large in proptest::collection::vec(any::<bool>(), 5),
            l_m in 1u64..40,
        ) {
            let mut queues = vec![Vec::new(); n];
            for (s, d) in raw {
                let (s, d) = (s % n, d % n);
                if s != d {
                    queues[s].push(d);
                }
            }
            for j in 0..n {
                let recs: Vec<_> = (0..n)
                    .map(|i| GossipRecord {
                        large: large[i],
                        exceeds: false,
                        queue: queues[i].len() as u64,
                        to_j: queues[i].iter().filter(|&&d| d == j).count() as u64,
                        below_j: queues[i].iter().filter(|&&d| d < j).count() as u64,
                    })
                    .collect();
                let got: Vec<u64> = main_listen_intervals(&recs, j, l_m)
                    .into_iter()
                    .flat_map(|(a, b)| a..b)
                    .collect();
                prop_assert_eq!(got, replay(&queues, &large[..n], j, l_m));
            }
        }
    }
}

#[cfg(test)]
mod runs {
    use super::*;
    use crate::adversary::{saturating_injector, AdversaryType, DestinationPattern};
    use crate::engine::Engine;
    use crate::rational::{int, Rational};

    #[test]
    fn low_rate_keeps_initial_window() {
        let n = 4;
        let l = initial_window(n);
        let horizon = 3 * l;
        let adv = AdversaryType::new(Rational::new(1, 4), int(2)).unwrap();
        let trace = saturating_injector(&adv, &DestinationPattern::RoundRobin, n, horizon);
        let mut e = Engine::new(n, 2, Box::new(AdjustWindow::new(n)));
        for r in 1..=horizon {
            let inj: Vec<_> = trace.at(r).iter().map(|i| (i.station, i.destination)).collect();
            let out = e.step(&inj).unwrap();
            assert_eq!(out.control_bits, 0);
        }
        let windows = e.protocol().stats().windows;
        assert!(windows.iter().all(|&(_, len)| len == l), "{windows:?}");
        for p in e.packets() {
            let age = p.delivery_round.unwrap_or(horizon) - p.injection_round;
            assert!(age <= 2 * l, "packet {} waited {age}", p.id);
        }
    }
}
