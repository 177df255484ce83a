//! Leaky-bucket adversaries: validation, generators and worst-case strategies.

mod adaptive;
mod saturating;
mod schedule;
mod trace;
mod witness;

pub use adaptive::AdaptiveCap2;
pub use saturating::{saturating_injector, DestinationPattern};
pub use schedule::ObliviousSchedule;
pub use trace::{
    max_admissible_next, validate_counts, validate_trace, AdversaryType, GreedyState, Injection,
    InjectionTrace, ValidationResult,
};
pub use witness::{
    oblivious_pair_witness, oblivious_station_witness, pair_threshold, station_threshold, PairWitness,
    StationWitness, WitnessError,
};

use crate::model::Round;

/// Source of injections for a running simulation.
pub trait Injector: Send {
    /// Packets injected in `round`; `upcoming_on` is the round's on-set.
    fn injections(&mut self, round: Round, upcoming_on: u64) -> Vec<Injection>;
}

/// Replays a precomputed trace.
#[derive(Debug, Clone)]
pub struct TraceInjector {
    trace: InjectionTrace,
}

impl TraceInjector {
    pub fn new(trace: InjectionTrace) -> Self {
        Self { trace }
    }

    pub fn trace(&self) -> &InjectionTrace {
        &self.trace
    }
}

impl Injector for TraceInjector {
    fn injections(&mut self, round: Round, _upcoming_on: u64) -> Vec<Injection> {
        if round > self.trace.horizon() {
            return Vec::new();
        }
        self.trace.at(round).to_vec()
    }
}
