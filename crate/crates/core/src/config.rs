//! Run configuration and the algorithm factory.

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryType, DestinationPattern};
use crate::algorithms::{
    AdjustWindow, CountHop, Dormant, GroupLayout, KClique, KCycle, KSubsets, ListeningPair, Orchestra, PairLayout,
    ThreadDiscipline, ThreadLayout, MAX_GAMMA,
};
use crate::engine::Protocol;
use crate::error::ConfigError;
use crate::model::{Round, Station, MAX_STATIONS};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmId {
    Orchestra,
    CountHop,
    AdjustWindow,
    KCycle,
    KClique,
    KSubsets,
    /// Every station off forever.
    Dormant,
    /// Stations 0 and 1 listen forever.
    ListeningPair,
}

impl AlgorithmId {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::Orchestra => "orchestra",
            AlgorithmId::CountHop => "count-hop",
            AlgorithmId::AdjustWindow => "adjust-window",
            AlgorithmId::KCycle => "k-cycle",
            AlgorithmId::KClique => "k-clique",
            AlgorithmId::KSubsets => "k-subsets",
            AlgorithmId::Dormant => "dormant",
            AlgorithmId::ListeningPair => "listening-pair",
        }
    }

    pub fn is_oblivious(self) -> bool {
        matches!(self, AlgorithmId::KCycle | AlgorithmId::KClique | AlgorithmId::KSubsets)
    }
}

/// One scripted injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedInjection {
    pub round: Round,
    pub station: Station,
    pub destination: Station,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdversaryId {
    /// No injections at all.
    Silent {},
    Saturating { pattern: DestinationPattern },
    Scripted { injections: Vec<ScriptedInjection> },
    /// Saturates the station least often on in the algorithm's schedule up to `t`
    /// (the horizon when absent).
    StationWitness {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<Round>,
    },
    /// Saturates the ordered pair least often jointly on up to `t`.
    PairWitness {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<Round>,
    },
    /// Watches on-sets and feeds one pair while the tracked station sleeps.
    AdaptiveCap2 {},
}

/// Algorithm knobs; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmParams {
    /// Thread queue size at which a k-subsets holder declares itself big.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mbtf_threshold: Option<usize>,
    /// Plain round-robin withholding in place of move-big-to-front.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub rrw: bool,
    /// Starting window length for adjust-window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_window: Option<u64>,
    /// Bit width of count-hop counts; derived from the horizon when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count_width: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub algorithm: AlgorithmId,
    pub n: usize,
    /// Energy cap.
    pub cap: usize,
    /// Layout size for the oblivious algorithms; defaults to `cap`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(with = "rational_str")]
    pub rho: Rational,
    #[serde(with = "rational_str")]
    pub beta: Rational,
    pub horizon: Round,
    pub adversary: AdversaryId,
    #[serde(default, skip_serializing_if = "is_default")]
    pub params: AlgorithmParams,
    #[serde(default)]
    pub seed: u64,
    /// Fail runs whose largest message exceeds `c * ceil(log2 n)` control bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict_control_bits: Option<u32>,
    /// Override of the largest accepted number of subsets threads.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_gamma: Option<u64>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

pub(crate) mod rational_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rational::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// A built algorithm plus the layout facts reports need.
pub struct Built {
    pub protocol: Box<dyn Protocol>,
    /// Layout size actually used, when it differs from the request.
    pub effective_k: Option<usize>,
    pub notes: Vec<String>,
}

impl EngineConfig {
    pub fn adversary_type(&self) -> Result<AdversaryType, ConfigError> {
        AdversaryType::new(self.rho, self.beta)
    }

    pub fn layout_k(&self) -> usize {
        self.k.unwrap_or(self.cap)
    }

    pub fn gamma_limit(&self) -> u64 {
        self.max_gamma.unwrap_or(MAX_GAMMA)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.n;
        if !(3..=MAX_STATIONS).contains(&n) {
            return Err(ConfigError::Invalid(format!("need 3 <= n <= {MAX_STATIONS}, got {n}")));
        }
        let cap_ok = match self.algorithm {
            AlgorithmId::Dormant => (2..=n).contains(&self.cap),
            _ => (2..n).contains(&self.cap),
        };
        if !cap_ok {
            return Err(ConfigError::Invalid(format!("need 2 <= cap < n, got cap = {} for n = {n}", self.cap)));
        }
        self.adversary_type()?;
        if self.algorithm == AlgorithmId::Orchestra && self.cap < 3 {
            return Err(ConfigError::Inapplicable(format!("orchestra needs energy cap 3, got {}", self.cap)));
        }
        if self.algorithm.is_oblivious() && self.layout_k() > self.cap {
            return Err(ConfigError::Invalid(format!("layout size {} exceeds cap {}", self.layout_k(), self.cap)));
        }
        match &self.adversary {
            AdversaryId::Saturating { pattern } => pattern.validate(n).map_err(ConfigError::Invalid)?,
            AdversaryId::Scripted { injections } => {
                for inj in injections {
                    if inj.round == 0 || inj.station >= n || inj.destination >= n {
                        return Err(ConfigError::Invalid(format!("scripted injection {inj:?} out of range")));
                    }
                }
            }
            AdversaryId::StationWitness { t } | AdversaryId::PairWitness { t } => {
                if !self.algorithm.is_oblivious() {
                    return Err(ConfigError::Inapplicable(format!(
                        "{} has no fixed schedule to attack",
                        self.algorithm.name()
                    )));
                }
                if t.is_some_and(|t| t == 0 || t > self.horizon) {
                    return Err(ConfigError::Invalid("witness interval must lie within the horizon".into()));
                }
            }
            AdversaryId::AdaptiveCap2 {} => {
                if self.cap != 2 {
                    return Err(ConfigError::Inapplicable(format!(
                        "the adaptive adversary targets cap 2, got {}",
                        self.cap
                    )));
                }
            }
            AdversaryId::Silent {} => {}
        }
        Ok(())
    }

    /// Instantiates the configured algorithm.
    pub fn build(&self) -> Result<Built, ConfigError> {
        self.validate()?;
        let n = self.n;
        let k = self.layout_k();
        let mut notes = Vec::new();
        let mut effective_k = None;
        let mut reduced = |requested: usize, actual: usize, notes: &mut Vec<String>| {
            if requested != actual {
                notes.push(format!("layout size reduced from {requested} to {actual}"));
            }
            effective_k = Some(actual);
        };
        let protocol: Box<dyn Protocol> = match self.algorithm {
            AlgorithmId::Orchestra => Box::new(Orchestra::new(n)),
            AlgorithmId::CountHop => {
                let width = self.params.count_width.unwrap_or_else(|| CountHop::width_for(self.horizon, self.beta));
                Box::new(CountHop::new(n, width))
            }
            AlgorithmId::AdjustWindow => match self.params.initial_window {
                Some(l) => Box::new(AdjustWindow::with_window(n, l)),
                None => Box::new(AdjustWindow::new(n)),
            },
            AlgorithmId::KCycle => {
                let layout = GroupLayout::new(n, k)?;
                reduced(k, layout.k, &mut notes);
                Box::new(KCycle::new(layout))
            }
            AlgorithmId::KClique => {
                let layout = PairLayout::new(n, k)?;
                reduced(k, layout.k, &mut notes);
                Box::new(KClique::new(layout))
            }
            AlgorithmId::KSubsets => {
                let layout = ThreadLayout::with_limit(n, k, self.gamma_limit())?;
                reduced(k, layout.k, &mut notes);
                let discipline = if self.params.rrw {
                    ThreadDiscipline::RoundRobinWithholding
                } else {
                    ThreadDiscipline::MoveBigToFront { threshold: self.params.mbtf_threshold.unwrap_or(n * n) }
                };
                Box::new(KSubsets::new(layout, discipline))
            }
            AlgorithmId::Dormant => Box::new(Dormant::new(n)),
            AlgorithmId::ListeningPair => Box::new(ListeningPair::new(n)),
        };
        Ok(Built { protocol, effective_k, notes })
    }

    /// Layout of an oblivious algorithm as an on-set function.
    pub fn layout(&self) -> Result<Box<dyn crate::algorithms::ActivityLayout>, ConfigError> {
        let k = self.layout_k();
        Ok(match self.algorithm {
            AlgorithmId::KCycle => Box::new(GroupLayout::new(self.n, k)?),
            AlgorithmId::KClique => Box::new(PairLayout::new(self.n, k)?),
            AlgorithmId::KSubsets => Box::new(ThreadLayout::with_limit(self.n, k, self.gamma_limit())?),
            other => return Err(ConfigError::Inapplicable(format!("{} has no fixed layout", other.name()))),
        })
    }
}
