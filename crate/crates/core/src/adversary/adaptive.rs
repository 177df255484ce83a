//! Online adversary that defeats every algorithm running with two stations on.
//!
//! The tracked station `s` never holds packets and nothing is addressed to it.
//! Every round one packet is injected into `s1` for `s2`. Each time `s` is
//! seen switched on an iteration completes and tracking moves to the next
//! station other than `s1` and `s2`.
//!
//! The adversary only sees on-sets. It always commits to the single-pair
//! labelling, so an algorithm that never switches `s` on is not punished
//! through packets addressed to `s`; growth then comes from the pair alone.

use super::trace::Injection;
use super::Injector;
use crate::error::ConfigError;
use crate::model::{Round, Station};

#[derive(Debug, Clone)]
pub struct AdaptiveCap2 {
    n: usize,
    tracked: Option<Station>,
    s1: Station,
    s2: Station,
    iterations: Vec<Round>,
}

impl AdaptiveCap2 {
    pub fn new(n: usize, cap: usize) -> Result<Self, ConfigError> {
        if cap >= 3 {
            return Err(ConfigError::Inapplicable(format!(
                "adaptive adversary needs energy cap 2, configured cap is {cap}"
            )));
        }
        if n < 3 {
            return Err(ConfigError::Inapplicable(format!("adaptive adversary needs n >= 3, have {n}")));
        }
        Ok(Self { n, tracked: None, s1: 0, s2: 0, iterations: Vec::new() })
    }

    pub fn tracked(&self) -> Option<Station> {
        self.tracked
    }

    pub fn pair(&self) -> (Station, Station) {
        (self.s1, self.s2)
    }

    /// Rounds at which the tracked station was seen on.
    pub fn iteration_rounds(&self) -> &[Round] {
        &self.iterations
    }

    pub fn completed_iterations(&self) -> usize {
        self.iterations.len()
    }

    fn start(&mut self, on: u64) {
        let s = (0..self.n).find(|v| on >> v & 1 == 0).expect("cap 2 leaves a station off");
        let mut others = (0..self.n).filter(|&v| v != s);
        self.s1 = others.next().expect("n >= 3");
        self.s2 = others.next().expect("n >= 3");
        self.tracked = Some(s);
    }

    fn next_tracked(&self, s: Station) -> Station {
        (1..=self.n)
            .map(|d| (s + d) % self.n)
            .find(|&v| v != self.s1 && v != self.s2)
            .expect("n >= 3")
    }
}

impl Injector for AdaptiveCap2 {
    fn injections(&mut self, round: Round, upcoming_on: u64) -> Vec<Injection> {
        match self.tracked {
            None => self.start(upcoming_on),
            Some(s) if upcoming_on >> s & 1 == 1 => {
                self.iterations.push(round);
                self.tracked = Some(self.next_tracked(s));
            }
            Some(_) => {}
        }
        vec![Injection { station: self.s1, destination: self.s2 }]
    }
}
