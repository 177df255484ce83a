use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::engine::{Event, ProtocolStats};
use crate::model::{FeedbackKind, PacketId, Round, Station};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: Round,
    pub total_queued: usize,
    pub queues: Vec<usize>,
    pub on_count: usize,
    pub on_mask: u64,
    pub feedback: FeedbackKind,
    pub delivered: Option<PacketId>,
    pub adopted_by: Option<Station>,
    pub control_bits: usize,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub id: PacketId,
    pub injection_round: Round,
    pub station: Station,
    pub destination: Station,
    pub delivery_round: Option<Round>,
    /// Stations that held the packet, the injection station included.
    pub hops: usize,
}

impl PacketRecord {
    pub fn latency(&self) -> Option<u64> {
        self.delivery_round.map(|d| d - self.injection_round)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub rounds: Round,
    pub injected: usize,
    pub delivered: usize,
    pub max_queue: usize,
    pub final_queue: usize,
    pub max_latency_delivered: Option<u64>,
    pub undelivered: usize,
    /// Age at the horizon of the oldest undelivered packet.
    pub max_undelivered_age: Option<u64>,
    pub max_on_count: usize,
    pub max_control_bits: usize,
    pub max_hops: usize,
}

/// What the adversary chose, for witnesses and the adaptive strategy.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub station: Option<Station>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<(Station, Station)>,
    /// Rounds in which the chosen station (or pair) was on within the witness interval.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub on_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<Round>,
    /// Lower bound on packets still queued at the end of the interval.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: EngineConfig,
    pub effective_k: Option<usize>,
    pub notes: Vec<String>,
    pub rounds: Vec<RoundRecord>,
    pub packets: Vec<PacketRecord>,
    pub summary: Summary,
    pub adversary: AdversaryReport,
    pub protocol: ProtocolStats,
}

pub const CSV_HEADER: [&str; 6] = ["round", "total_queued", "on_count", "feedback", "delivered_id", "control_bits"];

impl ExperimentReport {
    /// Recomputes the summary from the per-round and per-packet lists.
    pub fn summarize(rounds: &[RoundRecord], packets: &[PacketRecord], horizon: Round) -> Summary {
        let delivered: Vec<u64> = packets.iter().filter_map(PacketRecord::latency).collect();
        let undelivered: Vec<&PacketRecord> = packets.iter().filter(|p| p.delivery_round.is_none()).collect();
        Summary {
            rounds: rounds.len() as Round,
            injected: packets.len(),
            delivered: delivered.len(),
            max_queue: rounds.iter().map(|r| r.total_queued).max().unwrap_or(0),
            final_queue: rounds.last().map_or(0, |r| r.total_queued),
            max_latency_delivered: delivered.iter().copied().max(),
            undelivered: undelivered.len(),
            max_undelivered_age: undelivered.iter().map(|p| horizon - p.injection_round).max(),
            max_on_count: rounds.iter().map(|r| r.on_count).max().unwrap_or(0),
            max_control_bits: rounds.iter().map(|r| r.control_bits).max().unwrap_or(0),
            max_hops: packets.iter().filter(|p| p.delivery_round.is_some()).map(|p| p.hops).max().unwrap_or(0),
        }
    }

    /// Per-round trace in the fixed CSV layout.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rounds {
            w.write_record([
                r.round.to_string(),
                r.total_queued.to_string(),
                r.on_count.to_string(),
                r.feedback.as_str().to_string(),
                r.delivered.map(|d| d.to_string()).unwrap_or_default(),
                r.control_bits.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    config: &'a EngineConfig,
    effective_k: Option<usize>,
    notes: &'a [String],
    summary: &'a Summary,
    adversary: &'a AdversaryReport,
    windows: usize,
    invariant_checks: u64,
    big_seasons: u64,
    audit: crate::metrics::AuditResult,
    checks: Vec<crate::metrics::BoundCheck>,
}

impl ExperimentReport {
    /// Pretty JSON with the config echo, summary, audit and bound checks.
    pub fn summary_json(&self) -> String {
        let doc = SummaryDocument {
            config: &self.config,
            effective_k: self.effective_k,
            notes: &self.notes,
            summary: &self.summary,
            adversary: &self.adversary,
            windows: self.protocol.windows.len(),
            invariant_checks: self.protocol.invariant_checks,
            big_seasons: self.protocol.big_seasons,
            audit: crate::metrics::conservation_audit(self),
            checks: crate::metrics::evaluate_bounds(self),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("summary serializes");
        s.push('\n');
        s
    }
}
