use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::Event;
use crate::metrics::ExperimentReport;
use crate::model::{PacketId, Round, Station};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum AuditResult {
    Pass,
    Fail { round: Round, reason: String },
}

impl AuditResult {
    pub fn is_pass(&self) -> bool {
        matches!(self, AuditResult::Pass)
    }
}

/// Replays the event log and checks it against the recorded queues:
/// `injected = delivered + queued` after every round, each packet delivered
/// at most once and held by exactly one station until then.
pub fn conservation_audit(report: &ExperimentReport) -> AuditResult {
    let n = report.config.n;
    let mut location: BTreeMap<PacketId, Station> = BTreeMap::new();
    let mut delivered: BTreeMap<PacketId, Round> = BTreeMap::new();
    let mut injected = 0usize;
    let fail = |round, reason: String| AuditResult::Fail { round, reason };
    for r in &report.rounds {
        for ev in &r.events {
            match *ev {
                Event::Injected { id, station } => {
                    if location.contains_key(&id) || delivered.contains_key(&id) {
                        return fail(r.round, format!("packet {id} injected twice"));
                    }
                    location.insert(id, station);
                    injected += 1;
                }
                Event::Delivered { id } => {
                    if let Some(first) = delivered.insert(id, r.round) {
                        return fail(r.round, format!("packet {id} delivered again after round {first}"));
                    }
                    location.remove(&id);
                }
                Event::Moved { id, from, to } => match location.get_mut(&id) {
                    Some(at) if *at == from => *at = to,
                    _ => return fail(r.round, format!("packet {id} moved from {from} which does not hold it")),
                },
            }
        }
        if injected != delivered.len() + r.total_queued {
            return fail(
                r.round,
                format!("{injected} injected, {} delivered, {} queued", delivered.len(), r.total_queued),
            );
        }
        let mut held = vec![0usize; n];
        for &s in location.values() {
            held[s] += 1;
        }
        if r.queues.len() != n || r.queues.iter().sum::<usize>() != r.total_queued {
            return fail(r.round, "per-station queues disagree with the total".into());
        }
        if let Some(s) = (0..n).find(|&s| held[s] != r.queues[s]) {
            return fail(r.round, format!("station {s} reports {} packets, events place {} there", r.queues[s], held[s]));
        }
    }
    AuditResult::Pass
}
