//! Greedy maximal injection under a leaky-bucket constraint.

use serde::{Deserialize, Serialize};

use super::trace::{AdversaryType, GreedyState, Injection, InjectionTrace};
use crate::model::{Round, Station};

/// Where the `m`-th injected packet (0-based, global) goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DestinationPattern {
    /// Sources cycle over all stations; each source cycles its destinations.
    RoundRobin,
    /// Everything is injected into `station`; destinations cycle over the rest.
    SingleTarget { station: Station },
    /// Everything goes from `source` to `destination`.
    SinglePair { source: Station, destination: Station },
    /// The injected station changes every `period` rounds, cycling over all
    /// stations; destinations cycle over the rest.
    AlternatingBig { period: u64 },
}

fn other_station(source: Station, m: u64, n: usize) -> Station {
    let offset = 1 + (m % (n as u64 - 1)) as usize;
    (source + offset) % n
}

impl DestinationPattern {
    pub fn pick(&self, round: Round, m: u64, n: usize) -> Injection {
        match *self {
            DestinationPattern::RoundRobin => {
                let station = (m % n as u64) as usize;
                Injection { station, destination: other_station(station, m / n as u64, n) }
            }
            DestinationPattern::SingleTarget { station } => {
                Injection { station, destination: other_station(station, m, n) }
            }
            DestinationPattern::SinglePair { source, destination } => {
                Injection { station: source, destination }
            }
            DestinationPattern::AlternatingBig { period } => {
                let station = ((round - 1) / period.max(1) % n as u64) as usize;
                Injection { station, destination: other_station(station, m, n) }
            }
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), String> {
        match *self {
            DestinationPattern::SingleTarget { station } if station >= n => {
                Err(format!("target station {station} outside [0, {n})"))
            }
            DestinationPattern::SinglePair { source, destination }
                if source >= n || destination >= n || source == destination =>
            {
                Err(format!("pair ({source}, {destination}) invalid for n = {n}"))
            }
            DestinationPattern::AlternatingBig { period: 0 } => Err("period must be positive".into()),
            _ => Ok(()),
        }
    }
}

/// Lexicographically earliest trace injecting the admissible maximum in every
/// round, greedily from round 1.
pub fn saturating_injector(
    adv: &AdversaryType,
    pattern: &DestinationPattern,
    n: usize,
    horizon: Round,
) -> InjectionTrace {
    let mut trace = InjectionTrace::empty(horizon);
    let mut state = GreedyState::new(adv);
    let mut m = 0u64;
    for round in 1..=horizon {
        let c = state.capacity();
        for _ in 0..c {
            trace.push(round, pattern.pick(round, m, n));
            m += 1;
        }
        state.commit(c);
    }
    trace
}
