//! PMMS pipeline: reduce to range parameter 1 by replacing every positive
//! value with the good's base value, then assign goods in decreasing base
//! value, each to a source of the envy graph restricted to the agents who
//! value it. The result is interpreted against the original instance.
//!
//! Base values are square roots of rationals. When every squared base value
//! is a perfect rational square the reduced instance is exact; otherwise
//! each root is rendered as a rational lower approximation with
//! `precision_bits` of relative accuracy, and strict comparisons between
//! bundle sums use a relative tolerance of `1e-25`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::allocation::Allocation;
use crate::envy_graph::{build_graph, find_source};
use crate::error::{FairDivError, Result};
use crate::exact::{exact_sqrt, frac, sqrt_floor, Q};
use crate::instance::{Instance, Valuations};
use crate::labase::argmax_base;
use crate::policy::TieBreakPolicy;

pub const DEFAULT_PRECISION_BITS: u32 = 128;
pub const MIN_PRECISION_BITS: u32 = 106;
const TOLERANCE_DIGITS: usize = 25;

#[derive(Clone, Debug)]
pub struct ReducedInstance {
    support: Vec<Vec<bool>>,
    base_sq: Vec<Q>,
    base: Vec<Q>,
    exact: bool,
    precision_bits: u32,
    tolerance_scale: Q,
}

impl ReducedInstance {
    pub fn base_sq(&self, good: usize) -> &Q {
        &self.base_sq[good]
    }

    /// Rendered base value (exact when [`Valuations::is_exact`]).
    pub fn base(&self, good: usize) -> &Q {
        &self.base[good]
    }

    pub fn is_positive(&self, agent: usize, good: usize) -> bool {
        self.support[agent][good]
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// Agents positively valuing `good`, ascending.
    pub fn supporters(&self, good: usize) -> Vec<usize> {
        (0..self.support.len())
            .filter(|&i| self.support[i][good])
            .collect()
    }

    pub fn range_parameter(&self) -> Q {
        (0..self.base.len())
            .map(|g| {
                let col: Vec<Q> = (0..self.support.len())
                    .map(|i| self.value(i, g))
                    .filter(Signed::is_positive)
                    .collect();
                let max = col.iter().max().cloned().unwrap_or_else(Q::one);
                let min = col.iter().min().cloned().unwrap_or_else(Q::one);
                min / max
            })
            .min()
            .unwrap_or_else(Q::one)
    }
}

impl Valuations for ReducedInstance {
    fn num_agents(&self) -> usize {
        self.support.len()
    }

    fn num_goods(&self) -> usize {
        self.base.len()
    }

    fn value(&self, agent: usize, good: usize) -> Q {
        if self.support[agent][good] {
            self.base[good].clone()
        } else {
            Q::zero()
        }
    }

    fn strictly_less(&self, a: &Q, b: &Q) -> bool {
        if self.exact {
            a < b
        } else {
            let scale = a.abs().max(b.abs());
            (b - a) * &self.tolerance_scale > scale
        }
    }

    fn is_exact(&self) -> bool {
        self.exact
    }
}

/// Replaces each positive `v_i(g)` by the base value of `g`; supports are kept.
pub fn reduce_instance(inst: &Instance, precision_bits: u32) -> Result<ReducedInstance> {
    if precision_bits < MIN_PRECISION_BITS {
        return Err(FairDivError::Precision(precision_bits));
    }
    let base_sq: Vec<Q> = (0..inst.m()).map(|g| inst.base_sq(g)).collect();
    let roots: Vec<Option<Q>> = base_sq.iter().map(exact_sqrt).collect();
    let exact = roots.iter().all(Option::is_some);
    let base = roots
        .into_iter()
        .zip(&base_sq)
        .map(|(r, sq)| r.unwrap_or_else(|| sqrt_floor(sq, precision_bits)))
        .collect();
    let support = (0..inst.n())
        .map(|i| (0..inst.m()).map(|g| inst.is_positive(i, g)).collect())
        .collect();
    Ok(ReducedInstance {
        support,
        base_sq,
        base,
        exact,
        precision_bits,
        tolerance_scale: Q::from_integer(num_traits::pow(BigInt::from(10), TOLERANCE_DIGITS)),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictedStep {
    pub good: usize,
    pub source: usize,
    pub supporters: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct RestrictedRun {
    pub allocation: Allocation,
    pub steps: Vec<RestrictedStep>,
}

/// A source of the envy graph restricted to the supporters of `good`.
/// Fails with [`FairDivError::CyclePresent`] if that graph has a cycle.
pub fn select_recipient(
    reduced: &ReducedInstance,
    alloc: &Allocation,
    good: usize,
    policy: &TieBreakPolicy,
) -> Result<usize> {
    let supporters = reduced.supporters(good);
    find_source(&build_graph(reduced, alloc, &supporters), policy.source)
}

pub fn run_restricted(reduced: &ReducedInstance, policy: &TieBreakPolicy) -> Result<RestrictedRun> {
    let mut unassigned = (0..reduced.num_goods()).collect();
    let mut alloc = Allocation::empty(reduced.num_agents());
    let mut steps = Vec::with_capacity(reduced.num_goods());
    while let Some(good) = argmax_base(&reduced.base_sq, &unassigned, policy) {
        let source = select_recipient(reduced, &alloc, good, policy)?;
        alloc.push(source, good);
        unassigned.remove(&good);
        debug_assert!(
            (0..reduced.num_agents()).all(|i| !reduced.is_positive(i, good)
                || alloc
                    .bundle(i)
                    .iter()
                    .chain(alloc.bundle(source))
                    .filter(|&&g| reduced.is_positive(i, g))
                    .all(|&g| reduced.base_sq(g) >= reduced.base_sq(good))),
            "assigned good must be the least valued in A_i + (A_s & P_i)"
        );
        steps.push(RestrictedStep { good, source, supporters: reduced.supporters(good) });
    }
    Ok(RestrictedRun { allocation: alloc, steps })
}

#[derive(Clone, Debug)]
pub struct PmmsRun {
    pub reduced: ReducedInstance,
    pub allocation: Allocation,
    pub steps: Vec<RestrictedStep>,
}

/// Full pipeline; the allocation is meant for the original instance.
pub fn run_pmms(inst: &Instance, policy: &TieBreakPolicy, precision_bits: u32) -> Result<PmmsRun> {
    let reduced = reduce_instance(inst, precision_bits)?;
    let run = run_restricted(&reduced, policy)?;
    Ok(PmmsRun { reduced, allocation: run.allocation, steps: run.steps })
}

/// `(5/6) * gamma`.
pub fn pmms_factor(gamma: &Q) -> Q {
    gamma * frac(5, 6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    #[test]
    fn gamma_one_reduction_is_identity_on_support() {
        let inst = Instance::from_integers(&[vec![5, 0, 2], vec![5, 7, 0]]).unwrap();
        let r = reduce_instance(&inst, DEFAULT_PRECISION_BITS).unwrap();
        assert!(r.is_exact());
        for i in 0..2 {
            for g in 0..3 {
                assert_eq!(&r.value(i, g), inst.value_ref(i, g));
            }
        }
    }

    #[test]
    fn irrational_bases_are_rendered_from_below() {
        // good 0: values {2, 1} -> base sqrt(2); good 1: only agent 1 -> base 3
        let inst = Instance::from_integers(&[vec![2, 0], vec![1, 3]]).unwrap();
        let r = reduce_instance(&inst, DEFAULT_PRECISION_BITS).unwrap();
        assert!(!r.is_exact());
        assert_eq!(r.value(0, 0), r.value(1, 0));
        let b = r.base(0);
        assert!(b * b <= int(2));
        assert!((crate::exact::to_f64(b) - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(r.value(1, 1), int(3));
        assert_eq!(r.value(0, 1), int(0));
        assert_eq!(r.range_parameter(), int(1));
    }

    #[test]
    fn precision_floor() {
        let inst = Instance::from_integers(&[vec![1]]).unwrap();
        assert_eq!(reduce_instance(&inst, 64).unwrap_err(), FairDivError::Precision(64));
    }

    #[test]
    fn tolerance_only_applies_to_rendered_layers() {
        let inst = Instance::from_integers(&[vec![2, 0], vec![1, 3]]).unwrap();
        let r = reduce_instance(&inst, DEFAULT_PRECISION_BITS).unwrap();
        let a = int(1);
        let tiny = &a + Q::new(BigInt::one(), num_traits::pow(BigInt::from(10), 30));
        assert!(!r.strictly_less(&a, &tiny));
        assert!(r.strictly_less(&a, &(&a + frac(1, 1_000_000))));
    }

    #[test]
    fn identical_pair_bundles_are_ten_and_fourteen() {
        let inst =
            Instance::from_integers(&[vec![6, 6, 4, 4, 4], vec![6, 6, 4, 4, 4]]).unwrap();
        let run = run_pmms(&inst, &TieBreakPolicy::default(), DEFAULT_PRECISION_BITS).unwrap();
        let mut values: Vec<Q> = (0..2)
            .map(|i| inst.bundle_value(i, run.allocation.bundle(i)))
            .collect();
        values.sort();
        assert_eq!(values, vec![int(10), int(14)]);
    }

    #[test]
    fn sole_valuer_gets_everything() {
        let inst = Instance::from_integers(&[vec![3, 1, 2], vec![0, 0, 1]]).unwrap();
        let run = run_pmms(&inst, &TieBreakPolicy::default(), DEFAULT_PRECISION_BITS).unwrap();
        assert_eq!(run.allocation.sorted_bundle(0), vec![0, 1, 2]);
        let inst = Instance::from_integers(&[vec![3, 1, 2], vec![3, 1, 2], vec![4, 0, 0]]).unwrap();
        let run = run_pmms(&inst, &TieBreakPolicy::default(), DEFAULT_PRECISION_BITS).unwrap();
        for i in 0..3 {
            assert!(run.allocation.bundle(i).iter().all(|&g| inst.is_positive(i, g)));
        }
    }

    #[test]
    fn corrupted_state_reports_cycle() {
        // agent 0 values only good 1, agent 1 values only good 0; holding
        // the wrong goods makes them envy each other.
        let inst = Instance::from_integers(&[vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        let r = reduce_instance(&inst, DEFAULT_PRECISION_BITS).unwrap();
        let alloc = Allocation::from_bundles(vec![vec![0], vec![1]], 3).unwrap();
        assert_eq!(
            select_recipient(&r, &alloc, 2, &TieBreakPolicy::default()),
            Err(FairDivError::CyclePresent)
        );
    }

    #[test]
    fn factor_is_five_sixths_gamma() {
        assert_eq!(pmms_factor(&int(1)), frac(5, 6));
        assert_eq!(pmms_factor(&frac(1, 2)), frac(5, 12));
    }
}
