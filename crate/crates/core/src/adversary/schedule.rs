//! Fixed on/off matrices for oblivious algorithms.

use crate::error::ConfigError;
use crate::model::{mask_members, Round, Station};

/// On-sets per round over `[1, horizon]`, fixed before any injection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObliviousSchedule {
    n: usize,
    cap: usize,
    masks: Vec<u64>,
}

impl ObliviousSchedule {
    /// `masks[r - 1]` is the on-set of round `r`.
    pub fn new(n: usize, cap: usize, masks: Vec<u64>) -> Result<Self, ConfigError> {
        for (i, &m) in masks.iter().enumerate() {
            if m.count_ones() as usize > cap {
                return Err(ConfigError::Invalid(format!(
                    "round {}: {} stations on, cap is {cap}",
                    i + 1,
                    m.count_ones()
                )));
            }
            if n < 64 && m >> n != 0 {
                return Err(ConfigError::Invalid(format!("round {}: station outside [0, {n})", i + 1)));
            }
        }
        Ok(Self { n, cap, masks })
    }

    pub fn from_fn(n: usize, cap: usize, horizon: Round, f: impl Fn(Round) -> u64) -> Result<Self, ConfigError> {
        Self::new(n, cap, (1..=horizon).map(f).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn horizon(&self) -> Round {
        self.masks.len() as Round
    }

    pub fn mask(&self, round: Round) -> u64 {
        self.masks[(round - 1) as usize]
    }

    pub fn is_on(&self, station: Station, round: Round) -> bool {
        self.mask(round) >> station & 1 == 1
    }

    pub fn on_set(&self, round: Round) -> Vec<Station> {
        mask_members(self.mask(round)).collect()
    }

    /// Rounds in `[1, t]` with `station` on.
    pub fn on_count(&self, station: Station, t: Round) -> u64 {
        self.masks[..t as usize].iter().filter(|m| *m >> station & 1 == 1).count() as u64
    }

    /// Rounds in `[1, t]` with both `w` and `z` on.
    pub fn joint_on_count(&self, w: Station, z: Station, t: Round) -> u64 {
        let both = (1u64 << w) | (1u64 << z);
        self.masks[..t as usize].iter().filter(|m| *m & both == both).count() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let s = ObliviousSchedule::from_fn(4, 2, 10, |r| if r % 2 == 0 { 0b0011 } else { 0b0110 }).unwrap();
        assert_eq!(s.on_count(1, 10), 10);
        assert_eq!(s.on_count(0, 10), 5);
        assert_eq!(s.on_count(3, 10), 0);
        assert_eq!(s.joint_on_count(0, 1, 10), 5);
        assert_eq!(s.joint_on_count(0, 2, 10), 0);
    }

    #[test]
    fn cap_enforced() {
        assert!(ObliviousSchedule::new(4, 2, vec![0b0111]).is_err());
        assert!(ObliviousSchedule::new(3, 2, vec![0b1000]).is_err());
    }
}
