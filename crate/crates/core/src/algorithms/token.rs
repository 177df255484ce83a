//! Old-first round-robin withholding token shared by a group of stations.

use crate::model::{Round, Station};

/// Replicated token state; every member derives it from the same feedback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RrwToken {
    members: Vec<Station>,
    pos: usize,
    phase_start: Round,
    moved_in: Round,
}

impl RrwToken {
    pub fn new(members: Vec<Station>) -> Self {
        assert!(!members.is_empty());
        Self { members, pos: 0, phase_start: 1, moved_in: 0 }
    }

    pub fn holder(&self) -> Station {
        self.members[self.pos]
    }

    pub fn members(&self) -> &[Station] {
        &self.members
    }

    /// Packets that arrived before this round are old for the current phase.
    pub fn phase_start(&self) -> Round {
        self.phase_start
    }

    /// Applies a silent round: the token moves on, closing the phase after a
    /// full cycle. Repeated calls for the same round have no further effect.
    pub fn on_silent(&mut self, round: Round) {
        if self.moved_in == round {
            return;
        }
        self.moved_in = round;
        self.pos += 1;
        if self.pos == self.members.len() {
            self.pos = 0;
            self.phase_start = round + 1;
        }
    }
}
