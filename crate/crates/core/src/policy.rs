//! Tie-breaking among equally good choices.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::FairDivError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pick {
    #[default]
    Lowest,
    Highest,
}

impl Pick {
    pub fn choose(self, candidates: impl IntoIterator<Item = usize>) -> Option<usize> {
        let it = candidates.into_iter();
        match self {
            Pick::Lowest => it.min(),
            Pick::Highest => it.max(),
        }
    }
}

/// One [`Pick`] per decision point of the algorithms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TieBreakPolicy {
    /// Among unassigned goods of maximum base value.
    pub good: Pick,
    /// Among empty-handed agents who value the selected good.
    pub first_agent: Pick,
    /// Among an agent's favorite goods in the look-ahead set.
    pub favorite: Pick,
    /// Among sources of an acyclic envy graph.
    pub source: Pick,
}

impl TieBreakPolicy {
    pub fn lowest() -> Self {
        Self::default()
    }

    pub fn highest() -> Self {
        TieBreakPolicy {
            good: Pick::Highest,
            first_agent: Pick::Highest,
            favorite: Pick::Highest,
            source: Pick::Highest,
        }
    }

    /// Lowest-index goods and agents, highest-index sources. Reproduces the
    /// reference trace of the tight look-ahead instance.
    pub fn appendix_a() -> Self {
        TieBreakPolicy { source: Pick::Highest, ..Self::default() }
    }

    fn profile_name(&self) -> Option<&'static str> {
        [
            ("lowest", Self::lowest()),
            ("highest", Self::highest()),
            ("appendix-a", Self::appendix_a()),
        ]
        .into_iter()
        .find(|(_, p)| p == self)
        .map(|(name, _)| name)
    }
}

impl fmt::Display for TieBreakPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.profile_name() {
            Some(name) => f.write_str(name),
            None => write!(f, "{self:?}"),
        }
    }
}

impl FromStr for TieBreakPolicy {
    type Err = FairDivError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lowest" => Ok(Self::lowest()),
            "highest" => Ok(Self::highest()),
            "appendix-a" => Ok(Self::appendix_a()),
            other => Err(FairDivError::Malformed(format!(
                "unknown tie-break profile {other:?} (expected lowest, highest or appendix-a)"
            ))),
        }
    }
}
