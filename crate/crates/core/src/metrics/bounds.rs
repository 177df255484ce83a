use serde::{Deserialize, Serialize};

use crate::config::{rational_str, AlgorithmId};
use crate::metrics::ExperimentReport;
use crate::rational::{binomial, format_rational, int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub n: usize,
    pub k: Option<usize>,
    #[serde(with = "rational_str")]
    pub rho: Rational,
    #[serde(with = "rational_str")]
    pub beta: Rational,
    #[serde(with = "rational_str")]
    pub bound: Rational,
    pub observed: u64,
    pub verdict: Verdict,
    /// Advisory checks are reported but never fail a run.
    pub advisory: bool,
}

impl BoundCheck {
    pub fn is_failure(&self) -> bool {
        self.verdict == Verdict::Fail && !self.advisory
    }

    pub fn describe(&self) -> String {
        format!(
            "{}: observed {} vs bound {} -> {:?}{}",
            self.name,
            self.observed,
            format_rational(&self.bound),
            self.verdict,
            if self.advisory { " (advisory)" } else { "" }
        )
    }
}

/// `ceil(log2 n)`.
pub fn ceil_log2(n: usize) -> u32 {
    usize::BITS - (n.max(1) - 1).leading_zeros()
}

/// Every check that applies to the report's algorithm.
pub fn evaluate_bounds(report: &ExperimentReport) -> Vec<BoundCheck> {
    let cfg = &report.config;
    let s = &report.summary;
    let n = cfg.n;
    let k = report.effective_k;
    let (rho, beta) = (cfg.rho, cfg.beta);
    let ni = n as i128;
    let one = int(1);
    let latency = s.max_latency_delivered.unwrap_or(0);
    let mut out = Vec::new();
    let mut push = |name: &str, bound: Rational, observed: u64, applies: bool, advisory: bool| {
        let verdict = if !applies {
            Verdict::NotApplicable
        } else if int(observed as i128) <= bound {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        out.push(BoundCheck { name: name.to_string(), n, k, rho, beta, bound, observed, verdict, advisory });
    };

    push("energy", int(cfg.cap as i128), s.max_on_count as u64, true, false);
    match cfg.algorithm {
        AlgorithmId::Orchestra => {
            push("queue", int(2 * ni * ni * ni) + beta, s.max_queue as u64, rho <= one, false);
        }
        AlgorithmId::CountHop => {
            let applies = rho < one;
            let bound = if applies { int(2) * (int(ni * ni) + beta) / (one - rho) } else { int(0) };
            push("latency", bound, latency, applies, false);
        }
        AlgorithmId::AdjustWindow => {
            let applies = rho < one;
            let lg = ceil_log2(n) as i128;
            let bound = if applies { (int(18 * ni * ni * ni * lg * lg) + int(2) * beta) / (one - rho) } else { int(0) };
            push("latency", bound, latency, applies, true);
        }
        AlgorithmId::KCycle => {
            let kk = k.unwrap_or(cfg.layout_k()) as i128;
            let applies = rho < Rational::new(kk - 1, ni - 1);
            push("latency", (int(32) + beta) * int(ni), latency, applies, false);
        }
        AlgorithmId::KClique => {
            let kk = k.unwrap_or(cfg.layout_k()) as i128;
            let applies = rho <= Rational::new(kk * kk, 2 * ni * (2 * ni - kk));
            let bound = int(8) * Rational::new(ni * ni, kk) * (one + beta / int(2 * kk));
            push("latency", bound, latency, applies, false);
        }
        AlgorithmId::KSubsets => {
            let kk = k.unwrap_or(cfg.layout_k());
            let gamma = binomial(n as u64, kk as u64) as i128;
            let kk = kk as i128;
            let applies = rho <= Rational::new(kk * (kk - 1), ni * (ni - 1));
            push("queue", int(2 * gamma) * (int(ni * ni) + beta), s.max_queue as u64, applies, false);
        }
        AlgorithmId::Dormant | AlgorithmId::ListeningPair => {}
    }
    if matches!(cfg.algorithm, AlgorithmId::AdjustWindow | AlgorithmId::KCycle | AlgorithmId::KClique) {
        push("plain-packets", int(0), s.max_control_bits as u64, true, false);
    }
    if matches!(
        cfg.algorithm,
        AlgorithmId::Orchestra | AlgorithmId::CountHop | AlgorithmId::KClique | AlgorithmId::KSubsets
    ) {
        push("direct-routing", int(1), s.max_hops as u64, true, false);
    }
    if let Some(c) = cfg.strict_control_bits {
        push("control-bits", int(c as i128 * ceil_log2(n) as i128), s.max_control_bits as u64, true, false);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_ceiling() {
        assert_eq!([1, 2, 3, 4, 5, 8, 9].map(ceil_log2), [0, 1, 2, 2, 3, 3, 4]);
    }
}
