//! Worst-case traces against a fixed schedule.

use thiserror::Error;

use super::saturating::{saturating_injector, DestinationPattern};
use super::schedule::ObliviousSchedule;
use super::trace::{AdversaryType, InjectionTrace};
use crate::model::{Round, Station};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("injection rate {rho} does not exceed the threshold {threshold}")]
    RateTooLow { rho: Rational, threshold: Rational },
    #[error("interval length {t} outside [1, {horizon}]")]
    BadInterval { t: Round, horizon: Round },
    #[error("need at least {need} stations, have {n}")]
    TooFewStations { need: usize, n: usize },
}

#[derive(Debug, Clone)]
pub struct StationWitness {
    pub station: Station,
    pub on_count: u64,
    pub trace: InjectionTrace,
    /// Queue the station must still hold at round `t`.
    pub residual: Rational,
}

#[derive(Debug, Clone)]
pub struct PairWitness {
    pub source: Station,
    pub destination: Station,
    pub joint_on_count: u64,
    pub trace: InjectionTrace,
    pub residual: Rational,
}

fn check_interval(sched: &ObliviousSchedule, t: Round) -> Result<(), WitnessError> {
    if t == 0 || t > sched.horizon() {
        return Err(WitnessError::BadInterval { t, horizon: sched.horizon() });
    }
    Ok(())
}

pub fn station_threshold(n: usize, k: usize) -> Rational {
    Rational::new(k as i128, n as i128)
}

pub fn pair_threshold(n: usize, k: usize) -> Rational {
    Rational::new((k * k.saturating_sub(1)) as i128, (n * (n - 1)) as i128)
}

/// Saturates the least-on station within `[1, t]`.
pub fn oblivious_station_witness(
    sched: &ObliviousSchedule,
    adv: &AdversaryType,
    t: Round,
) -> Result<StationWitness, WitnessError> {
    let n = sched.n();
    if n < 2 {
        return Err(WitnessError::TooFewStations { need: 2, n });
    }
    let threshold = station_threshold(n, sched.cap());
    if adv.rho() <= threshold {
        return Err(WitnessError::RateTooLow { rho: adv.rho(), threshold });
    }
    check_interval(sched, t)?;
    let (station, on_count) = (0..n)
        .map(|v| (v, sched.on_count(v, t)))
        .min_by_key(|&(v, c)| (c, v))
        .expect("n >= 2");
    let trace = saturating_injector(adv, &DestinationPattern::SingleTarget { station }, n, t);
    let residual = int(t as i128) * (adv.rho() - threshold) - adv.beta();
    Ok(StationWitness { station, on_count, trace, residual })
}

/// Saturates the ordered pair least often jointly on within `[1, t]`.
/// Ties prefer a rarely-on source, then a rarely-on destination, then names.
pub fn oblivious_pair_witness(
    sched: &ObliviousSchedule,
    adv: &AdversaryType,
    t: Round,
) -> Result<PairWitness, WitnessError> {
    let n = sched.n();
    if n < 2 {
        return Err(WitnessError::TooFewStations { need: 2, n });
    }
    let threshold = pair_threshold(n, sched.cap());
    if adv.rho() <= threshold {
        return Err(WitnessError::RateTooLow { rho: adv.rho(), threshold });
    }
    check_interval(sched, t)?;
    let on: Vec<u64> = (0..n).map(|v| sched.on_count(v, t)).collect();
    let mut best: Option<(u64, u64, u64, Station, Station)> = None;
    for w in 0..n {
        for z in 0..n {
            if w == z {
                continue;
            }
            let key = (sched.joint_on_count(w, z, t), on[w], on[z], w, z);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    let (joint_on_count, _, _, source, destination) = best.expect("n >= 2");
    let pattern = DestinationPattern::SinglePair { source, destination };
    let trace = saturating_injector(adv, &pattern, n, t);
    let residual = int(t as i128) * (adv.rho() - threshold) - adv.beta();
    Ok(PairWitness { source, destination, joint_on_count, trace, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::trace::validate_trace;

    fn adv(p: i128, q: i128) -> AdversaryType {
        AdversaryType::new(Rational::new(p, q), int(1)).unwrap()
    }

    #[test]
    fn never_on_station() {
        let s = ObliviousSchedule::from_fn(4, 2, 50, |_| 0b0011).unwrap();
        let w = oblivious_station_witness(&s, &adv(3, 4), 50).unwrap();
        assert_eq!((w.station, w.on_count), (2, 0));
        assert!(w.trace.iter().all(|(_, i)| i.station == 2 && i.destination != 2));
        assert!(validate_trace(&w.trace, &adv(3, 4)).is_pass());
    }

    #[test]
    fn station_boundary() {
        let s = ObliviousSchedule::from_fn(4, 2, 10, |_| 0b0011).unwrap();
        assert!(matches!(
            oblivious_station_witness(&s, &adv(1, 2), 10),
            Err(WitnessError::RateTooLow { .. })
        ));
    }

    #[test]
    fn pair_never_jointly_on() {
        let s = ObliviousSchedule::from_fn(4, 2, 30, |_| 0b0011).unwrap();
        let w = oblivious_pair_witness(&s, &adv(1, 2), 30).unwrap();
        assert_eq!((w.source, w.destination, w.joint_on_count), (2, 3, 0));
    }

    #[test]
    fn pair_boundary() {
        let s = ObliviousSchedule::from_fn(5, 2, 10, |_| 0b00011).unwrap();
        assert!(matches!(
            oblivious_pair_witness(&s, &adv(1, 10), 10),
            Err(WitnessError::RateTooLow { .. })
        ));
        assert!(oblivious_pair_witness(&s, &adv(11, 100), 10).is_ok());
    }
}
