//! Envy graphs over agent subsets and envy-cycle elimination.

use crate::allocation::Allocation;
use crate::error::{FairDivError, Result};
use crate::instance::Valuations;
use crate::policy::Pick;

/// Directed graph on a subset of agents with an edge `i -> j` iff `i`
/// strictly prefers `j`'s bundle to its own.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvyGraph {
    members: Vec<usize>,
    succ: Vec<Vec<usize>>,
}

impl EnvyGraph {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn successors(&self, agent: usize) -> &[usize] {
        &self.succ[agent]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.succ[from].contains(&to)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.members
            .iter()
            .flat_map(|&i| self.succ[i].iter().map(move |&j| (i, j)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.members.iter().map(|&i| self.succ[i].len()).sum()
    }

    pub fn in_degree(&self, agent: usize) -> usize {
        self.members
            .iter()
            .filter(|&&i| self.succ[i].contains(&agent))
            .count()
    }

    /// First directed cycle found by depth-first search from members in
    /// ascending order, listed along its edges.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let mut mark = vec![Mark::New; self.succ.len()];
        for &root in &self.members {
            if mark[root] != Mark::New {
                continue;
            }
            // (vertex, next successor position)
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            mark[root] = Mark::Open;
            while let Some(top) = stack.last_mut() {
                let v = top.0;
                if let Some(&w) = self.succ[v].get(top.1) {
                    top.1 += 1;
                    match mark[w] {
                        Mark::New => {
                            mark[w] = Mark::Open;
                            stack.push((w, 0));
                        }
                        Mark::Open => {
                            let start = stack.iter().position(|&(u, _)| u == w).unwrap();
                            return Some(stack[start..].iter().map(|&(u, _)| u).collect());
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[v] = Mark::Done;
                    stack.pop();
                }
            }
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    pub fn sources(&self) -> Vec<usize> {
        let mut indeg = vec![0usize; self.succ.len()];
        for &i in &self.members {
            for &j in &self.succ[i] {
                indeg[j] += 1;
            }
        }
        self.members.iter().copied().filter(|&i| indeg[i] == 0).collect()
    }
}

/// Envy graph over `members` (any order, duplicates ignored).
pub fn build_graph<V: Valuations + ?Sized>(
    valuations: &V,
    alloc: &Allocation,
    members: &[usize],
) -> EnvyGraph {
    let n = alloc.agents();
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut succ = vec![Vec::new(); n];
    for &i in &sorted {
        let own = valuations.bundle_value(i, alloc.bundle(i));
        for &j in &sorted {
            if j == i {
                continue;
            }
            let other = valuations.bundle_value(i, alloc.bundle(j));
            if valuations.strictly_less(&own, &other) {
                succ[i].push(j);
            }
        }
    }
    EnvyGraph { members: sorted, succ }
}

/// Result of [`resolve_cycles`]: the reassigned allocation and the cycles
/// that were rotated, in order.
#[derive(Clone, Debug)]
pub struct CycleResolution {
    pub allocation: Allocation,
    pub rotated: Vec<Vec<usize>>,
}

/// Rotates bundles along envy cycles among `members` until the graph over
/// `members` is acyclic. Bundle values never decrease for any agent.
pub fn resolve_cycles<V: Valuations + ?Sized>(
    valuations: &V,
    alloc: &Allocation,
    members: &[usize],
) -> Result<CycleResolution> {
    let mut current = alloc.clone();
    let mut graph = build_graph(valuations, &current, members);
    let cap = alloc.agents() * graph.edge_count().max(1) + 1;
    let mut rotated = Vec::new();
    while let Some(cycle) = graph.find_cycle() {
        if rotated.len() >= cap {
            return Err(FairDivError::IterationCap(cap));
        }
        current.rotate(&cycle);
        rotated.push(cycle);
        graph = build_graph(valuations, &current, members);
    }
    Ok(CycleResolution { allocation: current, rotated })
}

/// An in-degree-zero member chosen by `pick`.
pub fn find_source(graph: &EnvyGraph, pick: Pick) -> Result<usize> {
    if !graph.is_acyclic() {
        return Err(FairDivError::CyclePresent);
    }
    pick.choose(graph.sources()).ok_or(FairDivError::CyclePresent)
}
