//! Envy-cycle elimination in decreasing base-value order, which is
//! `min{1, 2*gamma}`-tEFx.

use std::collections::BTreeSet;

use num_traits::{One, Signed};
use serde::Serialize;

use crate::allocation::Allocation;
use crate::envy_graph::{build_graph, find_source, resolve_cycles};
use crate::error::{FairDivError, Result};
use crate::exact::{format_rational, int, to_f64, FairRatio, Q};
use crate::instance::Instance;
use crate::labase::{argmax_base, run_labase, EtaMode, LaBaseConfig, LaBaseRun};
use crate::policy::TieBreakPolicy;

/// Which tEFx procedure a guarantee refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TefxVariant {
    /// [`run_tefx`]: `min{1, 2*gamma}`.
    EnvyCycle,
    /// Look-ahead assignment with the tEFx `eta`: `5*gamma / (gamma + sqrt(5 - 4*gamma^2))`.
    LabaseEta,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TefxStep {
    pub good: usize,
    pub source: usize,
    pub rotations: usize,
}

#[derive(Clone, Debug)]
pub struct TefxRun {
    pub allocation: Allocation,
    pub steps: Vec<TefxStep>,
}

pub fn run_tefx(inst: &Instance, policy: &TieBreakPolicy) -> Result<TefxRun> {
    let base_sq: Vec<Q> = (0..inst.m()).map(|g| inst.base_sq(g)).collect();
    let everyone: Vec<usize> = (0..inst.n()).collect();
    let mut unassigned: BTreeSet<usize> = (0..inst.m()).collect();
    let mut alloc = Allocation::empty(inst.n());
    let mut steps = Vec::with_capacity(inst.m());
    while let Some(good) = argmax_base(&base_sq, &unassigned, policy) {
        let resolution = resolve_cycles(inst, &alloc, &everyone)?;
        alloc = resolution.allocation;
        let source = find_source(&build_graph(inst, &alloc, &everyone), policy.source)?;
        alloc.push(source, good);
        unassigned.remove(&good);
        steps.push(TefxStep { good, source, rotations: resolution.rotated.len() });
    }
    Ok(TefxRun { allocation: alloc, steps })
}

/// Look-ahead assignment run with the tEFx choice of `eta` (needs `gamma < 1`).
pub fn run_tefx_labase(inst: &Instance, policy: &TieBreakPolicy, trace: bool) -> Result<LaBaseRun> {
    run_labase(
        inst,
        &LaBaseConfig { eta: EtaMode::TefxVariant, policy: *policy, trace },
    )
}

fn check_gamma(gamma: &Q, variant: TefxVariant) -> Result<()> {
    let upper_ok = match variant {
        TefxVariant::EnvyCycle => gamma <= &Q::one(),
        TefxVariant::LabaseEta => gamma < &Q::one(),
    };
    if !gamma.is_positive() || !upper_ok {
        return Err(FairDivError::GammaOutOfRange(format_rational(gamma)));
    }
    Ok(())
}

pub fn tefx_factor(gamma: &Q, variant: TefxVariant) -> Result<f64> {
    check_gamma(gamma, variant)?;
    let g = to_f64(gamma);
    Ok(match variant {
        TefxVariant::EnvyCycle => (2.0 * g).min(1.0),
        TefxVariant::LabaseEta => 5.0 * g / (g + (5.0 - 4.0 * g * g).sqrt()),
    })
}

/// Exact test of `ratio >= tefx_factor(gamma, variant)`.
pub fn meets_tefx_factor(gamma: &Q, variant: TefxVariant, ratio: &FairRatio) -> Result<bool> {
    check_gamma(gamma, variant)?;
    let r = match ratio {
        FairRatio::Infinite => return Ok(true),
        FairRatio::Finite(r) => r,
    };
    Ok(match variant {
        TefxVariant::EnvyCycle => {
            let two_gamma = gamma * int(2);
            r >= &two_gamma.min(Q::one())
        }
        TefxVariant::LabaseEta => {
            // r*(gamma + s) >= 5*gamma with s = sqrt(5 - 4*gamma^2)
            // <=> r*s >= gamma*(5 - r)
            let rhs = gamma * (int(5) - r);
            !rhs.is_positive() || r * r * (int(5) - int(4) * gamma * gamma) >= &rhs * &rhs
        }
    })
}
