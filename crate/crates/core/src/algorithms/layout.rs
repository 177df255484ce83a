//! Fixed activity layouts of the energy-oblivious algorithms.

use serde::Serialize;

use crate::adversary::ObliviousSchedule;
use crate::error::ConfigError;
use crate::model::{mask_of, Round, Station};
use crate::rational::binomial;

/// Largest number of threads accepted for a subsets layout.
pub const MAX_GAMMA: u64 = 10_000;

/// Any layout whose on-set depends on the round alone.
pub trait ActivityLayout {
    fn n(&self) -> usize;
    fn cap(&self) -> usize;
    fn on_mask(&self, round: Round) -> u64;

    /// First round after `now` in which `station` is on.
    fn next_on(&self, station: Station, now: Round) -> Option<Round> {
        let period = self.period();
        (now + 1..=now + period).find(|&r| self.on_mask(r) >> station & 1 == 1)
    }

    /// Length after which the on-sets repeat.
    fn period(&self) -> u64;
}

/// Materializes the on/off matrix over `[1, horizon]`.
pub fn extract_schedule(layout: &dyn ActivityLayout, horizon: Round) -> ObliviousSchedule {
    ObliviousSchedule::from_fn(layout.n(), layout.cap(), horizon, |r| layout.on_mask(r))
        .expect("layouts respect their cap")
}

fn check_n(n: usize) -> Result<(), ConfigError> {
    if !(3..=64).contains(&n) {
        return Err(ConfigError::Invalid(format!("need 3 <= n <= 64, got {n}")));
    }
    Ok(())
}

/// Overlapping groups chained by connectors, for the cycle algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupLayout {
    pub n: usize,
    pub requested_k: usize,
    pub k: usize,
    /// Members in name order; the last group may be short, the rest are dummies.
    pub groups: Vec<Vec<Station>>,
    pub dummies: usize,
    /// `connectors[i]` is shared by group `i` and the next group in the cycle.
    pub connectors: Vec<Station>,
    pub delta: u64,
}

impl GroupLayout {
    pub fn new(n: usize, k: usize) -> Result<Self, ConfigError> {
        check_n(n)?;
        if k < 2 || k >= n {
            return Err(ConfigError::Invalid(format!("need 2 <= k < n, got k = {k}")));
        }
        let eff = if 2 * k > n + 1 { n.div_ceil(2) } else { k };
        let seq: Vec<Station> = (0..n).chain([0]).collect();
        let mut groups = Vec::new();
        let mut connectors = Vec::new();
        let mut start = 0;
        loop {
            let end = (start + eff).min(seq.len());
            let group = &seq[start..end];
            connectors.push(*group.last().expect("non-empty group"));
            let mut sorted = group.to_vec();
            sorted.sort_unstable();
            groups.push(sorted);
            if end == seq.len() {
                break;
            }
            start += eff - 1;
        }
        let dummies = eff - groups.last().map_or(eff, Vec::len);
        let delta = (4 * (n - 1) * eff).div_ceil(n - eff) as u64;
        Ok(Self { n, requested_k: k, k: eff, groups, dummies, connectors, delta })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn active_group(&self, round: Round) -> usize {
        ((round - 1) / self.delta % self.groups.len() as u64) as usize
    }
}

impl ActivityLayout for GroupLayout {
    fn n(&self) -> usize {
        self.n
    }

    fn cap(&self) -> usize {
        self.k
    }

    fn on_mask(&self, round: Round) -> u64 {
        mask_of(self.groups[self.active_group(round)].iter().copied())
    }

    fn period(&self) -> u64 {
        self.delta * self.groups.len() as u64
    }
}

/// Disjoint half-size sets combined in pairs, for the clique algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairLayout {
    pub n: usize,
    pub requested_k: usize,
    pub k: usize,
    pub sets: Vec<Vec<Station>>,
    /// Set indices `(a, b)`, `a < b`, in lexicographic order.
    pub pairs: Vec<(usize, usize)>,
}

impl PairLayout {
    pub fn new(n: usize, k: usize) -> Result<Self, ConfigError> {
        check_n(n)?;
        let eff = (2..=k.min(2 * n / 3))
            .rev()
            .find(|&c| c % 2 == 0 && (2 * n).is_multiple_of(c))
            .ok_or_else(|| ConfigError::Invalid(format!("no even divisor of {} in [2, {k}]", 2 * n)))?;
        let half = eff / 2;
        let sets: Vec<Vec<Station>> = (0..2 * n / eff).map(|s| (s * half..(s + 1) * half).collect()).collect();
        let mut pairs = Vec::new();
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                pairs.push((a, b));
            }
        }
        Ok(Self { n, requested_k: k, k: eff, sets, pairs })
    }

    pub fn active_pair(&self, round: Round) -> usize {
        ((round - 1) % self.pairs.len() as u64) as usize
    }

    /// Stations of pair `p` in name order.
    pub fn members(&self, p: usize) -> Vec<Station> {
        let (a, b) = self.pairs[p];
        self.sets[a].iter().chain(&self.sets[b]).copied().collect()
    }

    pub fn set_of(&self, station: Station) -> usize {
        station / (self.k / 2)
    }
}

impl ActivityLayout for PairLayout {
    fn n(&self) -> usize {
        self.n
    }

    fn cap(&self) -> usize {
        self.k
    }

    fn on_mask(&self, round: Round) -> u64 {
        mask_of(self.members(self.active_pair(round)))
    }

    fn period(&self) -> u64 {
        self.pairs.len() as u64
    }
}

/// All `k`-subsets in lexicographic order, one thread each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThreadLayout {
    pub n: usize,
    pub k: usize,
    pub subsets: Vec<Vec<Station>>,
    #[serde(skip)]
    masks: Vec<u64>,
}

impl ThreadLayout {
    pub fn new(n: usize, k: usize) -> Result<Self, ConfigError> {
        Self::with_limit(n, k, MAX_GAMMA)
    }

    pub fn with_limit(n: usize, k: usize, max_gamma: u64) -> Result<Self, ConfigError> {
        check_n(n)?;
        if k < 2 || k >= n {
            return Err(ConfigError::Invalid(format!("need 2 <= k < n, got k = {k}")));
        }
        let gamma = binomial(n as u64, k as u64);
        if gamma > max_gamma {
            return Err(ConfigError::Invalid(format!("C({n}, {k}) = {gamma} threads exceeds the limit {max_gamma}")));
        }
        let mut subsets = Vec::with_capacity(gamma as usize);
        let mut cur: Vec<Station> = (0..k).collect();
        loop {
            subsets.push(cur.clone());
            let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else { break };
            cur[i] += 1;
            for j in i + 1..k {
                cur[j] = cur[j - 1] + 1;
            }
        }
        let masks = subsets.iter().map(|s| mask_of(s.iter().copied())).collect();
        Ok(Self { n, k, subsets, masks })
    }

    pub fn gamma(&self) -> usize {
        self.subsets.len()
    }

    pub fn thread_of(&self, round: Round) -> usize {
        ((round - 1) % self.subsets.len() as u64) as usize
    }

    pub fn mask(&self, thread: usize) -> u64 {
        self.masks[thread]
    }

    /// Threads whose subset contains both stations, in index order.
    pub fn eligible(&self, v: Station, w: Station) -> Vec<usize> {
        let both = (1u64 << v) | (1u64 << w);
        (0..self.gamma()).filter(|&i| self.masks[i] & both == both).collect()
    }
}

impl ActivityLayout for ThreadLayout {
    fn n(&self) -> usize {
        self.n
    }

    fn cap(&self) -> usize {
        self.k
    }

    fn on_mask(&self, round: Round) -> u64 {
        self.masks[self.thread_of(round)]
    }

    fn period(&self) -> u64 {
        self.subsets.len() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_seven_three() {
        let g = GroupLayout::new(7, 3).unwrap();
        assert_eq!(g.groups, vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 6], vec![0, 6]]);
        assert_eq!(g.connectors, vec![2, 4, 6, 0]);
        assert_eq!((g.k, g.dummies, g.delta), (3, 1, 18));
    }

    #[test]
    fn groups_six_four_reduced() {
        let g = GroupLayout::new(6, 4).unwrap();
        assert_eq!(g.k, 3);
        assert_eq!(g.groups, vec![vec![0, 1, 2], vec![2, 3, 4], vec![0, 4, 5]]);
        assert_eq!(g.connectors, vec![2, 4, 0]);
        assert_eq!(g.dummies, 0);
    }

    #[test]
    fn groups_five_two() {
        let g = GroupLayout::new(5, 2).unwrap();
        assert_eq!(g.groups, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 4], vec![0, 4]]);
        assert_eq!(g.connectors, vec![1, 2, 3, 4, 0]);
    }

    #[test]
    fn connectors_shared_by_neighbours() {
        for n in 3..12 {
            for k in 2..n {
                let g = GroupLayout::new(n, k).unwrap();
                assert!(2 * g.k <= n + 1);
                for (i, &c) in g.connectors.iter().enumerate() {
                    let next = &g.groups[(i + 1) % g.len()];
                    assert!(g.groups[i].contains(&c) && next.contains(&c));
                    let holders = g.groups.iter().filter(|grp| grp.contains(&c)).count();
                    assert_eq!(holders, 2, "n={n} k={k} connector {c}");
                }
                assert!((0..n).all(|v| g.groups.iter().any(|grp| grp.contains(&v))));
            }
        }
    }

    #[test]
    fn pairs_eight_four() {
        let p = PairLayout::new(8, 4).unwrap();
        assert_eq!(p.sets, vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]]);
        assert_eq!(p.pairs, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(p.members(4), vec![2, 3, 6, 7]);
    }

    #[test]
    fn pair_k_repair() {
        assert_eq!(PairLayout::new(6, 5).unwrap().k, 4);
        assert_eq!(PairLayout::new(7, 6).unwrap().k, 2);
        assert_eq!(PairLayout::new(9, 6).unwrap().k, 6);
    }

    #[test]
    fn subsets_lexicographic() {
        let t = ThreadLayout::new(4, 2).unwrap();
        assert_eq!(t.subsets, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(t.eligible(0, 1), vec![0]);
        let t = ThreadLayout::new(5, 3).unwrap();
        assert_eq!(t.gamma(), 10);
        assert_eq!(t.eligible(1, 3).len(), 3);
        assert!(ThreadLayout::new(30, 15).is_err());
    }

    #[test]
    fn extracted_schedule_has_active_members() {
        let g = GroupLayout::new(7, 3).unwrap();
        let s = extract_schedule(&g, 100);
        assert_eq!(s.on_set(1), vec![0, 1, 2]);
        assert_eq!(s.on_set(19), vec![2, 3, 4]);
        assert_eq!(s.on_set(55), vec![0, 6]);
        let t = ThreadLayout::new(5, 2).unwrap();
        let s = extract_schedule(&t, 30);
        assert_eq!(s.on_set(11), vec![0, 1]);
        assert_eq!(s.on_set(12), vec![0, 2]);
    }
}
