//! Drives one configured simulation from round 1 to the horizon.

use crate::adversary::{
    oblivious_pair_witness, oblivious_station_witness, saturating_injector, validate_counts, AdaptiveCap2,
    AdversaryType, GreedyState, Injection, InjectionTrace, Injector, TraceInjector, ValidationResult,
};
use crate::algorithms::extract_schedule;
use crate::config::{AdversaryId, EngineConfig};
use crate::engine::Engine;
use crate::error::{ConfigError, EngineError, SimError};
use crate::metrics::{stability_probe_queues, AdversaryReport, ExperimentReport, PacketRecord, RoundRecord, Stability};
use crate::model::Round;
use crate::rational::{format_rational, Rational};

/// Caps an online injector at the greedy leaky-bucket capacity.
struct Throttled<I> {
    inner: I,
    bucket: GreedyState,
}

impl<I: Injector> Injector for Throttled<I> {
    fn injections(&mut self, round: Round, upcoming_on: u64) -> Vec<Injection> {
        let mut batch = self.inner.injections(round, upcoming_on);
        batch.truncate(self.bucket.capacity());
        self.bucket.commit(batch.len());
        batch
    }
}

fn inadmissible(v: ValidationResult) -> Result<(), EngineError> {
    match v {
        ValidationResult::Pass => Ok(()),
        ValidationResult::Violation { start, end, count } => Err(EngineError::Adversary(format!(
            "{count} packets injected in rounds [{start}, {end}]"
        ))),
    }
}

enum Source {
    Trace(TraceInjector),
    Adaptive(Throttled<AdaptiveCap2>),
}

impl Source {
    fn next(&mut self, round: Round, upcoming_on: u64) -> Vec<Injection> {
        match self {
            Source::Trace(t) => t.injections(round, upcoming_on),
            Source::Adaptive(a) => a.injections(round, upcoming_on),
        }
    }
}

fn build_source(cfg: &EngineConfig, adv: &AdversaryType, info: &mut AdversaryReport) -> Result<Source, SimError> {
    let witness_err = |e: crate::adversary::WitnessError| SimError::Config(ConfigError::Inapplicable(e.to_string()));
    Ok(match &cfg.adversary {
        AdversaryId::Silent {} => Source::Trace(TraceInjector::new(InjectionTrace::empty(cfg.horizon))),
        AdversaryId::Saturating { pattern } => {
            Source::Trace(TraceInjector::new(saturating_injector(adv, pattern, cfg.n, cfg.horizon)))
        }
        AdversaryId::Scripted { injections } => {
            let mut sorted = injections.clone();
            sorted.sort_by_key(|i| i.round);
            let mut trace = InjectionTrace::empty(cfg.horizon);
            for i in sorted.iter().filter(|i| i.round <= cfg.horizon) {
                trace.push(i.round, Injection { station: i.station, destination: i.destination });
            }
            inadmissible(validate_counts(&trace.counts(), adv))?;
            Source::Trace(TraceInjector::new(trace))
        }
        AdversaryId::StationWitness { t } | AdversaryId::PairWitness { t } => {
            let t = t.unwrap_or(cfg.horizon);
            if t == 0 {
                return Ok(Source::Trace(TraceInjector::new(InjectionTrace::empty(0))));
            }
            let schedule = extract_schedule(cfg.layout()?.as_ref(), t);
            info.interval = Some(t);
            let trace = if matches!(cfg.adversary, AdversaryId::StationWitness { .. }) {
                let w = oblivious_station_witness(&schedule, adv, t).map_err(witness_err)?;
                info.station = Some(w.station);
                info.on_count = Some(w.on_count);
                info.residual = Some(format_rational(&w.residual));
                w.trace
            } else {
                let w = oblivious_pair_witness(&schedule, adv, t).map_err(witness_err)?;
                info.pair = Some((w.source, w.destination));
                info.on_count = Some(w.joint_on_count);
                info.residual = Some(format_rational(&w.residual));
                w.trace
            };
            Source::Trace(TraceInjector::new(trace))
        }
        AdversaryId::AdaptiveCap2 {} => Source::Adaptive(Throttled {
            inner: AdaptiveCap2::new(cfg.n, cfg.cap)?,
            bucket: GreedyState::new(adv),
        }),
    })
}

/// Executes `cfg.horizon` rounds and collects the full report.
pub fn run_simulation(cfg: &EngineConfig) -> Result<ExperimentReport, SimError> {
    let built = cfg.build()?;
    let adv = cfg.adversary_type()?;
    let mut info = AdversaryReport::default();
    let mut source = build_source(cfg, &adv, &mut info)?;
    let mut engine = Engine::new(cfg.n, cfg.cap, built.protocol);
    let mut rounds = Vec::with_capacity(cfg.horizon as usize);
    let mut counts = Vec::with_capacity(cfg.horizon as usize);
    for round in 1..=cfg.horizon {
        let batch = source.next(round, engine.upcoming_on_mask());
        counts.push(batch.len());
        let pairs: Vec<_> = batch.iter().map(|i| (i.station, i.destination)).collect();
        let out = engine.step(&pairs)?;
        rounds.push(RoundRecord {
            round,
            total_queued: engine.total_queued(),
            queues: engine.held().to_vec(),
            on_count: out.on_mask.count_ones() as usize,
            on_mask: out.on_mask,
            feedback: out.feedback.kind(),
            delivered: out.delivered,
            adopted_by: out.adopted_by.map(|(s, _)| s),
            control_bits: out.control_bits,
            events: out.events,
        });
    }
    inadmissible(validate_counts(&counts, &adv))?;
    if let Source::Adaptive(a) = &source {
        info.pair = Some(a.inner.pair());
        info.station = a.inner.tracked();
        info.iterations = Some(a.inner.completed_iterations());
    }
    let packets: Vec<PacketRecord> = engine
        .packets()
        .iter()
        .map(|p| PacketRecord {
            id: p.id,
            injection_round: p.injection_round,
            station: p.injection_station,
            destination: p.destination,
            delivery_round: p.delivery_round,
            hops: p.hops.len(),
        })
        .collect();
    let summary = ExperimentReport::summarize(&rounds, &packets, cfg.horizon);
    Ok(ExperimentReport {
        config: cfg.clone(),
        effective_k: built.effective_k,
        notes: built.notes,
        rounds,
        packets,
        summary,
        adversary: info,
        protocol: engine.protocol().stats(),
    })
}

/// Runs `cfg` at horizons `base * 2^i` for `i < steps` and probes the maximum queues.
pub fn probe_horizons(
    cfg: &EngineConfig,
    base: Round,
    steps: u32,
    factor: Rational,
) -> Result<(Vec<usize>, Stability), SimError> {
    let mut queues = Vec::new();
    for i in 0..steps {
        let mut c = cfg.clone();
        c.horizon = base << i;
        queues.push(run_simulation(&c)?.summary.max_queue);
    }
    let verdict = stability_probe_queues(&queues, factor);
    Ok((queues, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::DestinationPattern;
    use crate::config::{AlgorithmId, AlgorithmParams, ScriptedInjection};
    use crate::metrics::{conservation_audit, evaluate_bounds, Verdict};
    use crate::rational::int;

    fn cfg(algorithm: AlgorithmId, n: usize, cap: usize, rho: Rational, horizon: Round, adversary: AdversaryId) -> EngineConfig {
        EngineConfig {
            algorithm,
            n,
            cap,
            k: None,
            rho,
            beta: int(1),
            horizon,
            adversary,
            params: AlgorithmParams::default(),
            seed: 0,
            strict_control_bits: None,
            max_gamma: None,
        }
    }

    #[test]
    fn count_hop_latency_example() {
        let c = cfg(
            AlgorithmId::CountHop,
            4,
            2,
            Rational::new(1, 2),
            2000,
            AdversaryId::Saturating { pattern: DestinationPattern::RoundRobin },
        );
        let r = run_simulation(&c).unwrap();
        assert!(r.summary.max_latency_delivered.unwrap() <= 68);
        let checks = evaluate_bounds(&r);
        let latency = checks.iter().find(|c| c.name == "latency").unwrap();
        assert_eq!(latency.bound, int(68));
        assert_eq!(latency.verdict, Verdict::Pass);
        assert!(conservation_audit(&r).is_pass());
    }

    #[test]
    fn empty_horizon() {
        let c = cfg(AlgorithmId::CountHop, 4, 2, Rational::new(1, 2), 0, AdversaryId::Silent {});
        let r = run_simulation(&c).unwrap();
        assert!(r.rounds.is_empty() && r.packets.is_empty());
        assert_eq!(r.summary.max_queue, 0);
    }

    #[test]
    fn dormant_keeps_everything() {
        let injections = (1..=3).map(|round| ScriptedInjection { round, station: 0, destination: 1 }).collect();
        let c = cfg(AlgorithmId::Dormant, 5, 5, int(1), 10, AdversaryId::Scripted { injections });
        let r = run_simulation(&c).unwrap();
        assert_eq!(r.summary.final_queue, 3);
        assert_eq!(r.summary.delivered, 0);
    }

    #[test]
    fn inadmissible_script_rejected() {
        let injections = vec![ScriptedInjection { round: 1, station: 0, destination: 1 }; 3];
        let c = cfg(AlgorithmId::Dormant, 5, 5, Rational::new(1, 2), 10, AdversaryId::Scripted { injections });
        assert!(matches!(run_simulation(&c), Err(SimError::Engine(EngineError::Adversary(_)))));
    }

    #[test]
    fn orchestra_audit_with_remainder() {
        let c = cfg(
            AlgorithmId::Orchestra,
            4,
            3,
            int(1),
            5000,
            AdversaryId::Saturating { pattern: DestinationPattern::RoundRobin },
        );
        let r = run_simulation(&c).unwrap();
        assert!(conservation_audit(&r).is_pass());
        assert!(r.summary.final_queue > 0);
    }

    #[test]
    fn mutated_report_fails_audit() {
        let c = cfg(
            AlgorithmId::CountHop,
            4,
            2,
            Rational::new(1, 2),
            200,
            AdversaryId::Saturating { pattern: DestinationPattern::RoundRobin },
        );
        let mut r = run_simulation(&c).unwrap();
        let i = r.rounds.iter().position(|x| x.queues[0] > 0).unwrap();
        r.rounds[i].queues[1] += 1;
        assert_eq!(
            crate::metrics::conservation_audit(&r),
            crate::metrics::AuditResult::Fail {
                round: r.rounds[i].round,
                reason: "per-station queues disagree with the total".into()
            }
        );
        r.rounds[i].total_queued += 1;
        assert!(matches!(crate::metrics::conservation_audit(&r), crate::metrics::AuditResult::Fail { round, .. } if round == r.rounds[i].round));
    }

    #[test]
    fn count_hop_bounded_at_half() {
        let c = cfg(
            AlgorithmId::CountHop,
            4,
            2,
            Rational::new(1, 2),
            0,
            AdversaryId::Saturating { pattern: DestinationPattern::RoundRobin },
        );
        let (_, verdict) = probe_horizons(&c, 1000, 3, crate::metrics::default_growth_factor()).unwrap();
        assert_eq!(verdict, Stability::Bounded);
    }
}
