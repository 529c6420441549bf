//! Verifiers for approximate EFx, tEFx and PMMS, and the 1-out-of-2 maximin share.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::error::{FairDivError, Result};
use crate::exact::{FairRatio, Q};
use crate::instance::Valuations;

/// Largest number of positively valued items `mu2` will enumerate.
pub const DEFAULT_MU2_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Notion {
    Efx,
    Tefx,
    Pmms,
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Notion::Efx => "efx",
            Notion::Tefx => "tefx",
            Notion::Pmms => "pmms",
        })
    }
}

impl FromStr for Notion {
    type Err = FairDivError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "efx" => Ok(Notion::Efx),
            "tefx" => Ok(Notion::Tefx),
            "pmms" => Ok(Notion::Pmms),
            other => Err(FairDivError::Malformed(format!("unknown fairness notion {other:?}"))),
        }
    }
}

/// Which arithmetic produced a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Exact,
    /// Rendered square roots; ratios carry the rendering error.
    Approximate,
}

/// Worst ratio of `agent` against `other`. `good` is the removed or
/// transferred good attaining it (EFx/tEFx only).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairRatio {
    pub agent: usize,
    pub other: usize,
    pub ratio: FairRatio,
    pub good: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FairnessReport {
    pub notion: Notion,
    pub layer: Layer,
    /// Minimum over all ordered pairs; `inf` when every pair is vacuous.
    pub alpha: FairRatio,
    pub witness: Option<PairRatio>,
    pub pairs: Vec<PairRatio>,
}

impl FairnessReport {
    fn collect(notion: Notion, layer: Layer, pairs: Vec<PairRatio>) -> Self {
        let witness = pairs
            .iter()
            .fold(None::<&PairRatio>, |best, p| match best {
                Some(b) if b.ratio <= p.ratio => Some(b),
                _ => Some(p),
            })
            .cloned();
        let alpha = witness
            .as_ref()
            .map(|w| w.ratio.clone())
            .unwrap_or(FairRatio::Infinite);
        FairnessReport { notion, layer, alpha, witness, pairs }
    }
}

/// 1-out-of-2 maximin share: the best value of the poorer half over all
/// bi-partitions. Zero items are dropped, then the positive ones are split
/// in two halves whose subset sums are matched (meet in the middle).
pub fn mu2<T>(values: &[T], cap: usize) -> Result<T>
where
    T: Clone + Ord + Zero + Add<Output = T>,
{
    let zero = T::zero();
    let items: Vec<T> = values.iter().filter(|v| **v > zero).cloned().collect();
    if items.len() > cap {
        return Err(FairDivError::CapExceeded { size: items.len(), cap });
    }
    let total = items.iter().cloned().fold(T::zero(), |a, b| a + b);
    let (left, right) = items.split_at(items.len() / 2);
    let left_sums = subset_sums(left);
    let mut right_sums = subset_sums(right);
    right_sums.sort();
    right_sums.dedup();
    let mut best = T::zero();
    for a in left_sums {
        // largest b with 2(a + b) <= total
        let fits = right_sums.partition_point(|b| {
            let s = a.clone() + b.clone();
            s.clone() + s <= total
        });
        if fits > 0 {
            let s = a + right_sums[fits - 1].clone();
            if s > best {
                best = s;
            }
        }
    }
    Ok(best)
}

fn subset_sums<T: Clone + Zero + Add<Output = T>>(items: &[T]) -> Vec<T> {
    let mut sums = vec![T::zero()];
    for item in items {
        let extended: Vec<T> = sums.iter().map(|s| s.clone() + item.clone()).collect();
        sums.extend(extended);
    }
    sums
}

fn layer_of<V: Valuations + ?Sized>(valuations: &V) -> Layer {
    if valuations.is_exact() {
        Layer::Exact
    } else {
        Layer::Approximate
    }
}

fn pairwise<V, F>(valuations: &V, alloc: &Allocation, mut pair: F) -> Result<Vec<PairRatio>>
where
    V: Valuations + ?Sized,
    F: FnMut(usize, usize) -> Result<PairRatio>,
{
    alloc.validate(valuations.num_agents(), valuations.num_goods())?;
    let n = valuations.num_agents();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            out.push(pair(i, j)?);
        }
    }
    Ok(out)
}

/// Shared EFx/tEFx pair evaluation; `transfer` adds the good to the envier.
fn removal_pair<V: Valuations + ?Sized>(
    valuations: &V,
    alloc: &Allocation,
    i: usize,
    j: usize,
    transfer: bool,
) -> PairRatio {
    let own = valuations.bundle_value(i, alloc.bundle(i));
    let theirs = valuations.bundle_value(i, alloc.bundle(j));
    let mut worst: Option<(FairRatio, usize)> = None;
    for &g in alloc.bundle(j) {
        let vg = valuations.value(i, g);
        if !vg.is_positive() {
            continue;
        }
        let num = if transfer { &own + &vg } else { own.clone() };
        let ratio = FairRatio::of(num, &(&theirs - &vg));
        let better = match &worst {
            None => true,
            Some((r, h)) => ratio < *r || (ratio == *r && g < *h),
        };
        if better {
            worst = Some((ratio, g));
        }
    }
    match worst {
        Some((ratio, g)) => PairRatio { agent: i, other: j, ratio, good: Some(g) },
        None => PairRatio { agent: i, other: j, ratio: FairRatio::Infinite, good: None },
    }
}

/// Per pair: `min over g in A_j with v_i(g) > 0` of `v_i(A_i) / v_i(A_j - g)`.
pub fn efx_ratio<V: Valuations + ?Sized>(valuations: &V, alloc: &Allocation) -> Result<FairnessReport> {
    let pairs = pairwise(valuations, alloc, |i, j| Ok(removal_pair(valuations, alloc, i, j, false)))?;
    Ok(FairnessReport::collect(Notion::Efx, layer_of(valuations), pairs))
}

/// Per pair: `min over g in A_j with v_i(g) > 0` of `v_i(A_i + g) / v_i(A_j - g)`.
pub fn tefx_ratio<V: Valuations + ?Sized>(valuations: &V, alloc: &Allocation) -> Result<FairnessReport> {
    let pairs = pairwise(valuations, alloc, |i, j| Ok(removal_pair(valuations, alloc, i, j, true)))?;
    Ok(FairnessReport::collect(Notion::Tefx, layer_of(valuations), pairs))
}

/// Per pair: `v_i(A_i) / mu2_i(A_i + A_j)`.
pub fn pmms_ratio<V: Valuations + ?Sized>(
    valuations: &V,
    alloc: &Allocation,
    cap: usize,
) -> Result<FairnessReport> {
    let pairs = pairwise(valuations, alloc, |i, j| {
        let items: Vec<Q> = alloc
            .bundle(i)
            .iter()
            .chain(alloc.bundle(j))
            .map(|&g| valuations.value(i, g))
            .collect();
        let share = mu2(&items, cap)?;
        let own = valuations.bundle_value(i, alloc.bundle(i));
        Ok(PairRatio { agent: i, other: j, ratio: FairRatio::of(own, &share), good: None })
    })?;
    Ok(FairnessReport::collect(Notion::Pmms, layer_of(valuations), pairs))
}

pub fn evaluate<V: Valuations + ?Sized>(
    notion: Notion,
    valuations: &V,
    alloc: &Allocation,
) -> Result<FairnessReport> {
    match notion {
        Notion::Efx => efx_ratio(valuations, alloc),
        Notion::Tefx => tefx_ratio(valuations, alloc),
        Notion::Pmms => pmms_ratio(valuations, alloc, DEFAULT_MU2_CAP),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{frac, int};
    use crate::instance::Instance;

    fn qs(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn mu2_known_values() {
        assert_eq!(mu2(&qs(&[6, 6, 4, 4, 4]), 24).unwrap(), int(12));
        assert_eq!(mu2(&qs(&[5]), 24).unwrap(), int(0));
        assert_eq!(mu2(&qs(&[4, 3, 2]), 24).unwrap(), int(4));
        assert_eq!(mu2(&qs(&[]), 24).unwrap(), int(0));
        assert_eq!(mu2(&qs(&[0, 0, 3, 3]), 24).unwrap(), int(3));
    }

    #[test]
    fn mu2_cap_counts_positive_items_only() {
        let mut v = qs(&[1; 5]);
        v.extend(qs(&[0; 30]));
        assert_eq!(mu2(&v, 5).unwrap(), int(2));
        assert_eq!(
            mu2(&qs(&[1; 6]), 5),
            Err(FairDivError::CapExceeded { size: 6, cap: 5 })
        );
    }

    fn identical_pair() -> (Instance, Allocation) {
        let inst =
            Instance::from_integers(&[vec![6, 6, 4, 4, 4], vec![6, 6, 4, 4, 4]]).unwrap();
        let alloc = Allocation::from_bundles(vec![vec![0, 2, 4], vec![1, 3]], 5).unwrap();
        (inst, alloc)
    }

    #[test]
    fn identical_pair_is_efx_but_five_sixths_pmms() {
        let (inst, alloc) = identical_pair();
        assert_eq!(efx_ratio(&inst, &alloc).unwrap().alpha, FairRatio::Finite(int(1)));
        let pmms = pmms_ratio(&inst, &alloc, DEFAULT_MU2_CAP).unwrap();
        assert_eq!(pmms.alpha, FairRatio::Finite(frac(5, 6)));
        let w = pmms.witness.unwrap();
        assert_eq!((w.agent, w.other), (1, 0));
    }

    #[test]
    fn empty_allocation_is_vacuously_fair() {
        let inst = Instance::from_integers(&[vec![1, 2], vec![2, 1]]).unwrap();
        let alloc = Allocation::empty(2);
        for notion in [Notion::Efx, Notion::Tefx, Notion::Pmms] {
            let r = evaluate(notion, &inst, &alloc).unwrap();
            assert_eq!(r.alpha, FairRatio::Infinite);
        }
    }

    #[test]
    fn transfer_to_empty_agent() {
        let inst = Instance::from_integers(&[vec![3], vec![5]]).unwrap();
        let alloc = Allocation::from_bundles(vec![vec![0], vec![]], 1).unwrap();
        let r = tefx_ratio(&inst, &alloc).unwrap();
        // v_1(empty + g) >= v_1(empty)
        assert_eq!(r.alpha, FairRatio::Infinite);
        let e = efx_ratio(&inst, &alloc).unwrap();
        assert_eq!(e.alpha, FairRatio::Infinite);
    }

    #[test]
    fn zero_own_value_against_positive_target_is_zero() {
        let inst = Instance::from_integers(&[vec![1, 1], vec![1, 1]]).unwrap();
        let alloc = Allocation::from_bundles(vec![vec![0, 1], vec![]], 2).unwrap();
        let r = efx_ratio(&inst, &alloc).unwrap();
        assert_eq!(r.alpha, FairRatio::Finite(int(0)));
        assert_eq!(r.witness.unwrap().agent, 1);
    }

    #[test]
    fn worst_good_is_the_cheapest_positive_one() {
        let inst = Instance::from_integers(&[vec![5, 2, 1, 3], vec![1, 1, 1, 1]]).unwrap();
        let alloc = Allocation::from_bundles(vec![vec![1], vec![0, 2, 3]], 4).unwrap();
        let r = efx_ratio(&inst, &alloc).unwrap();
        let pair = r.pairs.iter().find(|p| p.agent == 0).unwrap();
        assert_eq!(pair.good, Some(2));
        assert_eq!(pair.ratio, FairRatio::Finite(frac(1, 4)));
    }

    #[test]
    fn identical_agents_even_split() {
        let inst = Instance::from_integers(&[vec![1, 1], vec![1, 1]]).unwrap();
        let alloc = Allocation::from_bundles(vec![vec![0], vec![1]], 2).unwrap();
        let r = pmms_ratio(&inst, &alloc, DEFAULT_MU2_CAP).unwrap();
        assert_eq!(r.alpha, FairRatio::Finite(int(1)));
    }

    #[test]
    fn verifier_rejects_bad_allocations() {
        let inst = Instance::from_integers(&[vec![1, 1], vec![1, 1]]).unwrap();
        let overlap: Allocation = serde_json::from_str(r#"{"bundles":[[0],[0]]}"#).unwrap();
        assert!(matches!(efx_ratio(&inst, &overlap), Err(FairDivError::InvalidAllocation(_))));
        let out_of_range: Allocation = serde_json::from_str(r#"{"bundles":[[5],[]]}"#).unwrap();
        assert!(matches!(pmms_ratio(&inst, &out_of_range, 24), Err(FairDivError::InvalidAllocation(_))));
    }

    #[test]
    fn notion_parsing() {
        assert_eq!("EFx".parse::<Notion>().unwrap(), Notion::Efx);
        assert!("ef1".parse::<Notion>().is_err());
    }
}
