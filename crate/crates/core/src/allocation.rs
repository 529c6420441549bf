use serde::{Deserialize, Serialize};

use crate::error::{FairDivError, Result};

/// `n` pairwise-disjoint bundles. Each bundle lists its goods in the order
/// they entered it; the order travels with the bundle when bundles are
/// reassigned between agents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    bundles: Vec<Vec<usize>>,
}

impl Allocation {
    pub fn empty(agents: usize) -> Self {
        Allocation { bundles: vec![Vec::new(); agents] }
    }

    /// Validates disjointness and that every good index is below `goods`.
    pub fn from_bundles(bundles: Vec<Vec<usize>>, goods: usize) -> Result<Self> {
        let mut seen = vec![false; goods];
        for (i, bundle) in bundles.iter().enumerate() {
            for &g in bundle {
                if g >= goods {
                    return Err(FairDivError::InvalidAllocation(format!(
                        "bundle {i} holds good {g}, but there are only {goods} goods"
                    )));
                }
                if std::mem::replace(&mut seen[g], true) {
                    return Err(FairDivError::InvalidAllocation(format!(
                        "good {g} appears in more than one place"
                    )));
                }
            }
        }
        Ok(Allocation { bundles })
    }

    /// Checks the allocation against an instance shape.
    pub fn validate(&self, agents: usize, goods: usize) -> Result<()> {
        if self.bundles.len() != agents {
            return Err(FairDivError::InvalidAllocation(format!(
                "{} bundles for {agents} agents",
                self.bundles.len()
            )));
        }
        Allocation::from_bundles(self.bundles.clone(), goods).map(|_| ())
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundle(&self, agent: usize) -> &[usize] {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    /// Goods of `agent` in ascending index order.
    pub fn sorted_bundle(&self, agent: usize) -> Vec<usize> {
        let mut b = self.bundles[agent].clone();
        b.sort_unstable();
        b
    }

    pub fn push(&mut self, agent: usize, good: usize) {
        debug_assert!(self.owner(good).is_none(), "good {good} assigned twice");
        self.bundles[agent].push(good);
    }

    pub fn owner(&self, good: usize) -> Option<usize> {
        self.bundles.iter().position(|b| b.contains(&good))
    }

    pub fn assigned_count(&self) -> usize {
        self.bundles.iter().map(Vec::len).sum()
    }

    pub fn is_complete(&self, goods: usize) -> bool {
        self.assigned_count() == goods
    }

    /// Each agent on the cycle takes its successor's bundle.
    pub fn rotate(&mut self, cycle: &[usize]) {
        if cycle.len() < 2 {
            return;
        }
        let first = std::mem::take(&mut self.bundles[cycle[0]]);
        for w in cycle.windows(2) {
            self.bundles[w[0]] = std::mem::take(&mut self.bundles[w[1]]);
        }
        self.bundles[*cycle.last().unwrap()] = first;
    }

    /// Bundles with goods sorted, then the list sorted; equal iff the two
    /// allocations hold the same multiset of bundles.
    pub fn bundle_multiset(&self) -> Vec<Vec<usize>> {
        let mut all: Vec<Vec<usize>> = (0..self.agents()).map(|i| self.sorted_bundle(i)).collect();
        all.sort();
        all
    }
}
