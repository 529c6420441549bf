//! Exhaustive ground truth for tiny instances.

use num_traits::Zero;
use serde::Serialize;

use crate::allocation::Allocation;
use crate::error::{FairDivError, Result};
use crate::exact::{FairRatio, Q};
use crate::fairness::{evaluate, Notion};
use crate::instance::Instance;

pub const DEFAULT_ENUMERATION_CAP: usize = 2_000_000;
pub const NAIVE_MU2_CAP: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct BestAlpha {
    pub notion: Notion,
    pub alpha: FairRatio,
    /// First maximizer in lexicographic order of the owner vector
    /// `(owner(g_0), owner(g_1), ...)`.
    pub witness: Allocation,
    pub explored: usize,
}

/// Maximum of the notion's ratio over all `n^m` complete allocations.
pub fn best_alpha(inst: &Instance, notion: Notion, cap: usize) -> Result<BestAlpha> {
    let (n, m) = (inst.n(), inst.m());
    let size = u32::try_from(m)
        .ok()
        .and_then(|m| n.checked_pow(m))
        .unwrap_or(usize::MAX);
    if size > cap {
        return Err(FairDivError::CapExceeded { size, cap });
    }
    let mut owners = vec![0usize; m];
    let mut best: Option<(FairRatio, Allocation)> = None;
    let mut explored = 0;
    loop {
        let mut bundles = vec![Vec::new(); n];
        for (g, &i) in owners.iter().enumerate() {
            bundles[i].push(g);
        }
        let alloc = Allocation::from_bundles(bundles, m)?;
        let alpha = evaluate(notion, inst, &alloc)?.alpha;
        explored += 1;
        if best.as_ref().is_none_or(|(b, _)| alpha > *b) {
            best = Some((alpha, alloc));
        }
        // odometer with the last good as the fastest digit
        let mut g = m;
        loop {
            if g == 0 {
                let (alpha, witness) = best.expect("at least one allocation");
                return Ok(BestAlpha { notion, alpha, witness, explored });
            }
            g -= 1;
            owners[g] += 1;
            if owners[g] < n {
                break;
            }
            owners[g] = 0;
        }
    }
}

/// 1-out-of-2 maximin share by plain enumeration of all bi-partitions.
pub fn mu2_naive(values: &[Q]) -> Result<Q> {
    if values.len() > NAIVE_MU2_CAP {
        return Err(FairDivError::CapExceeded { size: values.len(), cap: NAIVE_MU2_CAP });
    }
    let total: Q = values.iter().sum();
    let mut best = Q::zero();
    for mask in 0u32..(1u32 << values.len()) {
        let part: Q = values
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, v)| v)
            .sum();
        let rest = &total - &part;
        let worse = if part < rest { part } else { rest };
        if worse > best {
            best = worse;
        }
    }
    Ok(best)
}
