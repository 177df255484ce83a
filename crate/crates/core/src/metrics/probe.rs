use serde::{Deserialize, Serialize};

use crate::metrics::ExperimentReport;
use crate::rational::{int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Bounded,
    Growing,
}

pub fn default_growth_factor() -> Rational {
    Rational::new(3, 2)
}

/// `Growing` iff the maximum queue rises by at least `factor` between
/// consecutive horizons twice in a row.
pub fn stability_probe_queues(max_queues: &[usize], factor: Rational) -> Stability {
    let grew = |a: usize, b: usize| b > a && int(b as i128) >= factor * int(a as i128);
    let mut run = 0;
    for w in max_queues.windows(2) {
        run = if grew(w[0], w[1]) { run + 1 } else { 0 };
        if run >= 2 {
            return Stability::Growing;
        }
    }
    Stability::Bounded
}

/// Reports are expected in increasing horizon order.
pub fn stability_probe(reports: &[ExperimentReport], factor: Rational) -> Stability {
    let queues: Vec<usize> = reports.iter().map(|r| r.summary.max_queue).collect();
    stability_probe_queues(&queues, factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn needs_two_consecutive_rises() {
        let f = default_growth_factor();
        assert_eq!(stability_probe_queues(&[10, 15, 23], f), Stability::Growing);
        assert_eq!(stability_probe_queues(&[10, 14, 30], f), Stability::Bounded);
        assert_eq!(stability_probe_queues(&[10, 20, 25, 40, 60], f), Stability::Growing);
        assert_eq!(stability_probe_queues(&[0, 0, 0], f), Stability::Bounded);
        assert_eq!(stability_probe_queues(&[], f), Stability::Bounded);
    }
}
