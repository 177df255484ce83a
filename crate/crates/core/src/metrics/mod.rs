//! Run reports, audits and bound checks.

mod audit;
mod bounds;
mod probe;
mod report;

pub use audit::{conservation_audit, AuditResult};
pub use bounds::{ceil_log2, evaluate_bounds, BoundCheck, Verdict};
pub use probe::{default_growth_factor, stability_probe, stability_probe_queues, Stability};
pub use report::{AdversaryReport, ExperimentReport, PacketRecord, RoundRecord, Summary, CSV_HEADER};
