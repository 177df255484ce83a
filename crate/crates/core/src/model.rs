//! Channel-level domain types: packets, messages, actions and feedback.

use serde::{Deserialize, Serialize};

use crate::bits::ControlBits;

/// Station name in `[0, n)`.
pub type Station = usize;
/// Round index, starting at 1.
pub type Round = u64;
pub type PacketId = u64;

/// Largest supported system; on-sets are stored as `u64` masks.
pub const MAX_STATIONS: usize = 64;

/// A routed unit as tracked by the engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packet {
    pub id: PacketId,
    pub destination: Station,
    pub injection_round: Round,
    pub injection_station: Station,
    /// Stations that have held the packet, starting with the injection station.
    pub hops: Vec<Station>,
    pub delivery_round: Option<Round>,
}

/// The view of a packet a station receives: what a real header carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PacketHeader {
    pub id: PacketId,
    pub destination: Station,
}

impl From<&Packet> for PacketHeader {
    fn from(p: &Packet) -> Self {
        Self { id: p.id, destination: p.destination }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub packet: Option<PacketHeader>,
    pub control: ControlBits,
    pub sender: Station,
}

impl Message {
    pub fn plain(sender: Station, packet: PacketHeader) -> Self {
        Self { packet: Some(packet), control: ControlBits::new(), sender }
    }

    pub fn with_control(sender: Station, packet: Option<PacketHeader>, control: ControlBits) -> Self {
        Self { packet, control, sender }
    }
}

/// What a switched-on station does with the channel in a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    Listen,
    Transmit(Message),
}

/// Channel feedback shared by every switched-on station.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feedback {
    Silent,
    Collision,
    Heard(Message),
}

impl Feedback {
    pub fn kind(&self) -> FeedbackKind {
        match self {
            Feedback::Silent => FeedbackKind::Silent,
            Feedback::Collision => FeedbackKind::Collision,
            Feedback::Heard(_) => FeedbackKind::Heard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackKind {
    Silent,
    Collision,
    Heard,
}

impl FeedbackKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeedbackKind::Silent => "silent",
            FeedbackKind::Collision => "collision",
            FeedbackKind::Heard => "heard",
        }
    }
}

/// A station's decision after hearing the round's feedback.
///
/// `timer = Some(c)` switches the station off for the next `c` rounds; it is
/// back on in the round after that. `None` keeps it on for the next round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Response {
    pub adopt: bool,
    pub timer: Option<u64>,
}

impl Response {
    pub fn sleep_until(now: Round, next_on: Option<Round>) -> Self {
        Self { adopt: false, timer: timer_until(now, next_on) }
    }
}

/// Timer value that keeps a station off until `next_on`; `None` as the target
/// means it never wakes again.
pub fn timer_until(now: Round, next_on: Option<Round>) -> Option<u64> {
    match next_on {
        Some(t) if t <= now + 1 => None,
        Some(t) => Some(t - now - 1),
        None => Some(u64::MAX),
    }
}

/// Bitmask helpers for on-sets.
pub fn mask_of(stations: impl IntoIterator<Item = Station>) -> u64 {
    stations.into_iter().fold(0u64, |m, s| m | (1u64 << s))
}

pub fn mask_members(mask: u64) -> impl Iterator<Item = Station> {
    (0..MAX_STATIONS).filter(move |s| mask >> s & 1 == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timer_arithmetic() {
        assert_eq!(timer_until(5, Some(6)), None);
        assert_eq!(timer_until(5, Some(9)), Some(3));
        assert_eq!(timer_until(5, None), Some(u64::MAX));
    }

    #[test]
    fn masks() {
        let m = mask_of([0, 3, 5]);
        assert_eq!(mask_members(m).collect::<Vec<_>>(), vec![0, 3, 5]);
    }
}
