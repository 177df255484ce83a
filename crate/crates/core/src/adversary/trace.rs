//! Leaky-bucket adversary types and exact admissibility checking.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{Round, Station};
use crate::rational::{floor_to_i128, int, Rational};

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs()
}

fn lcm(a: i128, b: i128) -> i128 {
    a / gcd(a, b) * b
}

/// Injection rate and burstiness coefficient of a `(rho, beta)` adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdversaryType {
    rho: Rational,
    beta: Rational,
}

impl AdversaryType {
    pub fn new(rho: Rational, beta: Rational) -> Result<Self, ConfigError> {
        if rho <= int(0) || rho > int(1) {
            return Err(ConfigError::Invalid(format!("rho must lie in (0, 1], got {rho}")));
        }
        if beta < int(1) {
            return Err(ConfigError::Invalid(format!("beta must be at least 1, got {beta}")));
        }
        Ok(Self { rho, beta })
    }

    pub fn rho(&self) -> Rational {
        self.rho
    }

    pub fn beta(&self) -> Rational {
        self.beta
    }

    /// Most packets injectable in a single round.
    pub fn burstiness(&self) -> i128 {
        floor_to_i128(&(self.beta + self.rho))
    }

    /// Integer scaling that clears both denominators: returns
    /// `(scale, rho * scale, beta * scale)`.
    fn scaled(&self) -> (i128, i128, i128) {
        let scale = lcm(*self.rho.denom(), *self.beta.denom());
        (
            scale,
            self.rho.numer() * (scale / self.rho.denom()),
            self.beta.numer() * (scale / self.beta.denom()),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Injection {
    pub station: Station,
    pub destination: Station,
}

/// Injections per round over `[1, horizon]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InjectionTrace {
    rounds: Vec<Vec<Injection>>,
}

impl InjectionTrace {
    pub fn empty(horizon: Round) -> Self {
        Self { rounds: vec![Vec::new(); horizon as usize] }
    }

    pub fn horizon(&self) -> Round {
        self.rounds.len() as Round
    }

    pub fn push(&mut self, round: Round, injection: Injection) {
        assert!(round >= 1, "rounds start at 1");
        let idx = (round - 1) as usize;
        if idx >= self.rounds.len() {
            self.rounds.resize(idx + 1, Vec::new());
        }
        self.rounds[idx].push(injection);
    }

    pub fn at(&self, round: Round) -> &[Injection] {
        round
            .checked_sub(1)
            .and_then(|i| self.rounds.get(i as usize))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn counts(&self) -> Vec<usize> {
        self.rounds.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Round, &Injection)> {
        self.rounds
            .iter()
            .enumerate()
            .flat_map(|(i, v)| v.iter().map(move |inj| (i as Round + 1, inj)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationResult {
    Pass,
    /// Interval `[start, end]` carrying `count` injections exceeds
    /// `rho * (end - start + 1) + beta`.
    Violation { start: Round, end: Round, count: usize },
}

impl ValidationResult {
    pub fn is_pass(&self) -> bool {
        matches!(self, ValidationResult::Pass)
    }
}

/// Checks every interval of `counts` (per-round injection counts, round 1
/// first) against the adversary type.
///
/// With `h(x) = S(x) - rho * x` over prefix sums `S`, the interval `[a, b]`
/// is admissible iff `h(b) - h(a - 1) <= beta`, so for each end round only the
/// minimum of `h` over earlier prefixes matters. The first end round with a
/// violation is reported together with the start that maximises the excess.
pub fn validate_counts(counts: &[usize], adv: &AdversaryType) -> ValidationResult {
    let (scale, rho_s, beta_s) = adv.scaled();
    let mut prefix: i128 = 0;
    // h at x = 0
    let mut min_h: i128 = 0;
    let mut min_x: u64 = 0;
    for (i, &c) in counts.iter().enumerate() {
        let r = i as i128 + 1;
        prefix += c as i128;
        let h = scale * prefix - rho_s * r;
        if h - min_h > beta_s {
            let start = min_x + 1;
            let end = r as u64;
            let count = counts[min_x as usize..end as usize].iter().sum();
            return ValidationResult::Violation { start, end, count };
        }
        if h < min_h {
            min_h = h;
            min_x = r as u64;
        }
    }
    ValidationResult::Pass
}

pub fn validate_trace(trace: &InjectionTrace, adv: &AdversaryType) -> ValidationResult {
    validate_counts(&trace.counts(), adv)
}

/// Largest number of packets admissible in the round following `counts`,
/// given everything injected so far.
pub fn max_admissible_next(counts: &[usize], adv: &AdversaryType) -> usize {
    let mut state = GreedyState::new(adv);
    for &c in counts {
        state.commit(c);
    }
    state.capacity()
}

/// Incremental form of [`max_admissible_next`] for greedy generators.
#[derive(Debug, Clone)]
pub struct GreedyState {
    scale: i128,
    rho_s: i128,
    beta_s: i128,
    prefix: i128,
    rounds: i128,
    min_h: i128,
}

impl GreedyState {
    pub fn new(adv: &AdversaryType) -> Self {
        let (scale, rho_s, beta_s) = adv.scaled();
        Self { scale, rho_s, beta_s, prefix: 0, rounds: 0, min_h: 0 }
    }

    /// Packets that may still be injected in the upcoming round.
    pub fn capacity(&self) -> usize {
        let r = self.rounds + 1;
        // need: scale*(prefix + c) - rho_s*r - min_h <= beta_s
        let room = self.beta_s + self.min_h + self.rho_s * r - self.scale * self.prefix;
        if room < 0 {
            0
        } else {
            (room / self.scale) as usize
        }
    }

    pub fn commit(&mut self, count: usize) {
        self.rounds += 1;
        self.prefix += count as i128;
        let h = self.scale * self.prefix - self.rho_s * self.rounds;
        self.min_h = self.min_h.min(h);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;

    fn adv(rn: i128, rd: i128, b: i128) -> AdversaryType {
        AdversaryType::new(Rational::new(rn, rd), int(b)).unwrap()
    }

    #[test]
    fn burstiness_floor() {
        assert_eq!(adv(1, 2, 2).burstiness(), 2);
        assert_eq!(adv(1, 1, 1).burstiness(), 2);
        assert_eq!(adv(1, 3, 1).burstiness(), 1);
    }

    #[test]
    fn two_at_round_one_pass_three_fail() {
        let a = adv(1, 2, 2);
        assert_eq!(validate_counts(&[2], &a), ValidationResult::Pass);
        assert_eq!(
            validate_counts(&[3], &a),
            ValidationResult::Violation { start: 1, end: 1, count: 3 }
        );
    }

    #[test]
    fn rejects_out_of_range_types() {
        assert!(AdversaryType::new(int(0), int(1)).is_err());
        assert!(AdversaryType::new(Rational::new(3, 2), int(1)).is_err());
        assert!(AdversaryType::new(int(1), Rational::new(1, 2)).is_err());
    }

    #[test]
    fn greedy_capacity_tracks_validator() {
        let a = adv(1, 3, 1);
        let mut g = GreedyState::new(&a);
        let mut counts = Vec::new();
        for _ in 0..30 {
            let c = g.capacity();
            let mut probe = counts.clone();
            probe.push(c + 1);
            assert!(!validate_counts(&probe, &a).is_pass());
            counts.push(c);
            assert!(validate_counts(&counts, &a).is_pass());
            g.commit(c);
        }
    }

    #[test]
    fn fractional_beta() {
        let a = AdversaryType::new(Rational::new(1, 2), Rational::new(3, 2)).unwrap();
        assert_eq!(a.burstiness(), 2);
        assert!(validate_counts(&[2, 0, 1], &a).is_pass());
        assert!(!validate_counts(&[2, 1], &a).is_pass());
    }
}
