//! Look-ahead assignment guided by base values.
//!
//! Goods are considered in decreasing base value. While some empty-handed
//! agent positively values the current top good, that agent instead picks
//! its favorite among the look-ahead set of goods whose base value is at
//! least `eta` times the current maximum. Otherwise the top good goes to a
//! source of the envy graph over agents that already hold goods, after
//! envy cycles among them are eliminated.
//!
//! `eta` is irrational in general and is never evaluated numerically inside
//! the algorithm: it is kept as the positive root of `a*x^2 + x = b` and every
//! comparison against it is decided over the rationals.

use std::collections::BTreeSet;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::allocation::Allocation;
use crate::envy_graph::{build_graph, find_source, resolve_cycles};
use crate::error::{FairDivError, Result};
use crate::exact::{format_rational, parse_rational, to_f64, FairRatio, Q};
use crate::instance::Instance;
use crate::policy::TieBreakPolicy;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum EtaMode {
    /// `eta = (sqrt(5 + 4*gamma) - 1) / 2`, the root of `eta^2 + eta = 1 + gamma`.
    #[default]
    Default,
    /// `eta = (sqrt(5 - 4*gamma^2) - 1) / (2*(1 - gamma))`, the root of
    /// `(1 - gamma)*eta^2 + eta = 1 + gamma`. Requires `gamma < 1`.
    TefxVariant,
    /// A caller-supplied value of `eta^2` in `(0, 1]`.
    ExplicitSquared(Q),
}

impl FromStr for EtaMode {
    type Err = FairDivError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(EtaMode::Default),
            "tefx" => Ok(EtaMode::TefxVariant),
            other => parse_rational(other).map(EtaMode::ExplicitSquared),
        }
    }
}

/// A resolved look-ahead parameter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Eta {
    /// Positive root of `a*x^2 + x = b` with `a > 0`, `b > 0`.
    Quadratic {
        #[serde(with = "crate::exact::serde_q")]
        a: Q,
        #[serde(with = "crate::exact::serde_q")]
        b: Q,
    },
    /// `eta^2` itself.
    Squared(#[serde(with = "crate::exact::serde_q")] Q),
}

impl Eta {
    pub fn resolve(mode: &EtaMode, gamma: &Q) -> Result<Eta> {
        check_gamma(gamma)?;
        let one = Q::one();
        match mode {
            EtaMode::Default => Ok(Eta::Quadratic { a: one.clone(), b: one + gamma }),
            EtaMode::TefxVariant => {
                if gamma >= &one {
                    return Err(FairDivError::GammaOutOfRange(format!(
                        "{} (the tEFx look-ahead needs gamma < 1)",
                        format_rational(gamma)
                    )));
                }
                Ok(Eta::Quadratic { a: &one - gamma, b: one + gamma })
            }
            EtaMode::ExplicitSquared(sq) => {
                if !sq.is_positive() || sq > &one {
                    return Err(FairDivError::Malformed(format!(
                        "eta^2 = {} must lie in (0, 1]",
                        format_rational(sq)
                    )));
                }
                Ok(Eta::Squared(sq.clone()))
            }
        }
    }

    /// `eta >= c`, decided exactly.
    pub fn at_least(&self, c: &Q) -> bool {
        if !c.is_positive() {
            return true;
        }
        match self {
            // x -> a*x^2 + x - b is increasing on x >= 0 and vanishes at eta.
            Eta::Quadratic { a, b } => a * c * c + c - b <= Q::zero(),
            Eta::Squared(sq) => sq >= &(c * c),
        }
    }

    /// `eta^2 <= q`, decided exactly.
    pub fn squared_at_most(&self, q: &Q) -> bool {
        match self {
            // eta^2 = (b - eta) / a
            Eta::Quadratic { a, b } => self.at_least(&(b - a * q)),
            Eta::Squared(sq) => sq <= q,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Eta::Quadratic { a, b } => {
                let (a, b) = (to_f64(a), to_f64(b));
                ((1.0 + 4.0 * a * b).sqrt() - 1.0) / (2.0 * a)
            }
            Eta::Squared(sq) => to_f64(sq).sqrt(),
        }
    }
}

fn check_gamma(gamma: &Q) -> Result<()> {
    if !gamma.is_positive() || gamma > &Q::one() {
        return Err(FairDivError::GammaOutOfRange(format_rational(gamma)));
    }
    Ok(())
}

/// `2*gamma / (sqrt(5 + 4*gamma) - 1)`, the EFx guarantee, for reporting.
pub fn efx_factor(gamma: &Q) -> Result<f64> {
    check_gamma(gamma)?;
    let g = to_f64(gamma);
    Ok(2.0 * g / ((5.0 + 4.0 * g).sqrt() - 1.0))
}

/// Exact test of `ratio >= 2*gamma / (sqrt(5 + 4*gamma) - 1)`. The factor
/// equals `gamma / eta` for the default `eta`.
pub fn meets_efx_factor(gamma: &Q, ratio: &FairRatio) -> Result<bool> {
    let eta = Eta::resolve(&EtaMode::Default, gamma)?;
    Ok(match ratio {
        FairRatio::Infinite => true,
        FairRatio::Finite(r) if r.is_zero() => false,
        FairRatio::Finite(r) => eta.at_least(&(gamma / r)),
    })
}

#[derive(Clone, Debug, Default)]
pub struct LaBaseConfig {
    pub eta: EtaMode,
    pub policy: TieBreakPolicy,
    /// Record every decision in [`LaBaseRun::trace`].
    pub trace: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Branch {
    /// An empty-handed agent took its favorite good from the look-ahead set.
    FirstGood { agent: usize, good: usize, look_ahead: Vec<usize> },
    /// The selected good went to a source after cycle elimination.
    EnvyGraph { source: usize, rotated: Vec<Vec<usize>> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LaBaseStep {
    /// Unassigned good of maximum base value at the start of the step.
    pub selected: usize,
    pub unassigned: Vec<usize>,
    pub empty_handed: Vec<usize>,
    #[serde(flatten)]
    pub branch: Branch,
    /// Bundles at the end of the step.
    pub bundles: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct LaBaseRun {
    pub allocation: Allocation,
    pub gamma: Q,
    pub eta: Eta,
    pub trace: Option<Vec<LaBaseStep>>,
}

/// Membership of `good` in the look-ahead set, given that `top` maximizes
/// the base value over `unassigned`.
pub fn in_u_eta(
    inst: &Instance,
    eta: &Eta,
    unassigned: &[usize],
    good: usize,
    top: usize,
) -> Result<bool> {
    let top_sq = inst.base_sq(top);
    if unassigned.iter().any(|&h| inst.base_sq(h) > top_sq) {
        return Err(FairDivError::NotMaximal { good: top });
    }
    Ok(eta.squared_at_most(&(inst.base_sq(good) / top_sq)))
}

pub(crate) fn argmax_base(
    base_sq: &[Q],
    unassigned: &BTreeSet<usize>,
    policy: &TieBreakPolicy,
) -> Option<usize> {
    let best = unassigned.iter().map(|&g| &base_sq[g]).max()?;
    policy
        .good
        .choose(unassigned.iter().copied().filter(|&g| &base_sq[g] == best))
}

pub fn run_labase(inst: &Instance, config: &LaBaseConfig) -> Result<LaBaseRun> {
    let gamma = inst.range_parameter();
    let eta = Eta::resolve(&config.eta, &gamma)?;
    let policy = &config.policy;
    let base_sq: Vec<Q> = (0..inst.m()).map(|g| inst.base_sq(g)).collect();

    let mut alloc = Allocation::empty(inst.n());
    let mut unassigned: BTreeSet<usize> = (0..inst.m()).collect();
    let mut empty_handed: BTreeSet<usize> = (0..inst.n()).collect();
    let mut trace = config.trace.then(Vec::new);

    while let Some(top) = argmax_base(&base_sq, &unassigned, policy) {
        let before_u: Vec<usize> = unassigned.iter().copied().collect();
        let before_z: Vec<usize> = empty_handed.iter().copied().collect();
        let claimant = policy.first_agent.choose(
            empty_handed
                .iter()
                .copied()
                .filter(|&i| inst.is_positive(i, top)),
        );
        let branch = if let Some(agent) = claimant {
            let look_ahead: Vec<usize> = unassigned
                .iter()
                .copied()
                .filter(|&g| eta.squared_at_most(&(&base_sq[g] / &base_sq[top])))
                .collect();
            let best = look_ahead
                .iter()
                .map(|&g| inst.value_ref(agent, g))
                .max()
                .expect("look-ahead set contains the top good");
            let good = policy
                .favorite
                .choose(
                    look_ahead
                        .iter()
                        .copied()
                        .filter(|&g| inst.value_ref(agent, g) == best),
                )
                .expect("nonempty argmax");
            alloc.push(agent, good);
            empty_handed.remove(&agent);
            unassigned.remove(&good);
            Branch::FirstGood { agent, good, look_ahead }
        } else {
            let holders: Vec<usize> = (0..inst.n()).filter(|i| !empty_handed.contains(i)).collect();
            let resolution = resolve_cycles(inst, &alloc, &holders)?;
            alloc = resolution.allocation;
            let graph = build_graph(inst, &alloc, &holders);
            let source = find_source(&graph, policy.source)?;
            alloc.push(source, top);
            unassigned.remove(&top);
            Branch::EnvyGraph { source, rotated: resolution.rotated }
        };
        if let Some(steps) = trace.as_mut() {
            steps.push(LaBaseStep {
                selected: top,
                unassigned: before_u,
                empty_handed: before_z,
                branch,
                bundles: alloc.bundles().to_vec(),
            });
        }
    }

    Ok(LaBaseRun { allocation: alloc, gamma, eta, trace })
}
