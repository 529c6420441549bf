//! Per-agent scaling factors that maximize the range parameter.
//!
//! For a fixed `gamma` the feasibility program asks for `s > 0` with
//! `s_j v_j(g) >= gamma s_i v_i(g)` on every shared good. Written as
//! `s_i <= s_j * v_j(g) / (gamma v_i(g))` this is a difference-constraint
//! system in log space; it is solved here with Bellman-Ford over exact
//! multiplicative potentials, so infeasibility is a constraint cycle whose
//! weight product is below one.

use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{FairDivError, Result};
use crate::exact::{format_rational, Q};
use crate::instance::Instance;

/// Outcome of [`lp_feasible`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    /// Factors in `(0, 1]`, each connected component normalized to max 1.
    Feasible(Vec<Q>),
    /// `cycle[k]`'s constraint points at `cycle[k + 1]` (wrapping); the
    /// product of the tightest weights along it is `product < 1`.
    Infeasible { cycle: Vec<usize>, product: Q },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn factors(&self) -> Option<&[Q]> {
        match self {
            Feasibility::Feasible(f) => Some(f),
            Feasibility::Infeasible { .. } => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub cycle: Vec<usize>,
    #[serde(with = "crate::exact::serde_q")]
    pub product: Q,
    #[serde(with = "crate::exact::serde_q")]
    pub gamma: Q,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingResult {
    #[serde(with = "crate::exact::serde_q_vec")]
    pub factors: Vec<Q>,
    /// Largest `gamma` probed feasible.
    #[serde(with = "crate::exact::serde_q")]
    pub gamma: Q,
    /// Range parameter of the scaled instance (at least `gamma`).
    #[serde(with = "crate::exact::serde_q")]
    pub scaled_gamma: Q,
    #[serde(with = "crate::exact::serde_q")]
    pub width: Q,
    /// Smallest returned factor.
    #[serde(with = "crate::exact::serde_q")]
    pub beta: Q,
    pub probes: usize,
    /// Cycle refuting the smallest infeasible probe, if any was infeasible.
    pub certificate: Option<Certificate>,
}

/// `weight[i][j]`: tightest `min_g v_j(g) / v_i(g)` over shared goods,
/// before division by `gamma`.
fn pair_weights(inst: &Instance) -> Vec<Vec<Option<Q>>> {
    let n = inst.n();
    let mut w = vec![vec![None; n]; n];
    for g in 0..inst.m() {
        let holders: Vec<usize> = (0..n).filter(|&i| inst.is_positive(i, g)).collect();
        for &i in &holders {
            for &j in &holders {
                if i == j {
                    continue;
                }
                let r = inst.value_ref(j, g) / inst.value_ref(i, g);
                let slot: &mut Option<Q> = &mut w[i][j];
                if slot.as_ref().is_none_or(|cur| &r < cur) {
                    *slot = Some(r);
                }
            }
        }
    }
    w
}

fn components(w: &[Vec<Option<Q>>]) -> Vec<usize> {
    let n = w.len();
    let mut comp = vec![usize::MAX; n];
    for root in 0..n {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = root;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for u in 0..n {
                if comp[u] == usize::MAX && (w[v][u].is_some() || w[u][v].is_some()) {
                    comp[u] = root;
                    stack.push(u);
                }
            }
        }
    }
    comp
}

fn check_gamma(gamma: &Q) -> Result<()> {
    if !gamma.is_positive() || gamma > &Q::one() {
        return Err(FairDivError::GammaOutOfRange(format_rational(gamma)));
    }
    Ok(())
}

pub fn lp_feasible(inst: &Instance, gamma: &Q) -> Result<Feasibility> {
    check_gamma(gamma)?;
    let n = inst.n();
    let weights: Vec<Vec<Option<Q>>> = pair_weights(inst)
        .into_iter()
        .map(|row| row.into_iter().map(|w| w.map(|w| w / gamma)).collect())
        .collect();
    let mut pot = vec![Q::one(); n];
    let mut pred = vec![usize::MAX; n];
    let mut last_changed = None;
    for _ in 0..n {
        last_changed = None;
        for i in 0..n {
            for j in 0..n {
                if let Some(c) = &weights[i][j] {
                    let bound = &pot[j] * c;
                    if bound < pot[i] {
                        pot[i] = bound;
                        pred[i] = j;
                        last_changed = Some(i);
                    }
                }
            }
        }
        if last_changed.is_none() {
            break;
        }
    }
    if let Some(mut v) = last_changed {
        for _ in 0..n {
            v = pred[v];
        }
        let mut cycle = vec![v];
        let mut u = pred[v];
        while u != v {
            cycle.push(u);
            u = pred[u];
        }
        let mut product = Q::one();
        for k in 0..cycle.len() {
            let next = cycle[(k + 1) % cycle.len()];
            product *= weights[cycle[k]][next].as_ref().expect("predecessor edge");
        }
        debug_assert!(product < Q::one());
        return Ok(Feasibility::Infeasible { cycle, product });
    }
    let comp = components(&weights);
    let mut top: Vec<Option<Q>> = vec![None; n];
    for i in 0..n {
        let slot = &mut top[comp[i]];
        if slot.as_ref().is_none_or(|m| &pot[i] > m) {
            *slot = Some(pot[i].clone());
        }
    }
    let factors = (0..n)
        .map(|i| &pot[i] / top[comp[i]].as_ref().expect("component max"))
        .collect();
    Ok(Feasibility::Feasible(factors))
}

/// Binary search on `gamma` over `[range_parameter(inst), 1]` until the
/// bracket is narrower than `epsilon`.
pub fn max_range_scaling(inst: &Instance, epsilon: &Q) -> Result<ScalingResult> {
    if !epsilon.is_positive() {
        return Err(FairDivError::Malformed(format!(
            "epsilon must be positive, got {}",
            format_rational(epsilon)
        )));
    }
    let mut lo = inst.range_parameter();
    let mut hi = Q::one();
    let mut probes = 0;
    let mut certificate = None;
    let mut factors = match lp_feasible(inst, &lo)? {
        Feasibility::Feasible(f) => f,
        Feasibility::Infeasible { .. } => unreachable!("unscaled instance satisfies its own range"),
    };
    probes += 1;
    if lo < hi {
        probes += 1;
        match lp_feasible(inst, &hi)? {
            Feasibility::Feasible(f) => {
                factors = f;
                lo = hi.clone();
            }
            Feasibility::Infeasible { cycle, product } => {
                certificate = Some(Certificate { cycle, product, gamma: hi.clone() });
            }
        }
    }
    while &hi - &lo >= *epsilon {
        let mid = (&lo + &hi) / Q::from_integer(2.into());
        probes += 1;
        match lp_feasible(inst, &mid)? {
            Feasibility::Feasible(f) => {
                factors = f;
                lo = mid;
            }
            Feasibility::Infeasible { cycle, product } => {
                certificate = Some(Certificate { cycle, product, gamma: mid.clone() });
                hi = mid;
            }
        }
    }
    let scaled_gamma = apply_scaling(inst, &factors)?.range_parameter();
    let beta = factors.iter().min().cloned().unwrap_or_else(Q::one);
    Ok(ScalingResult {
        width: hi - &lo,
        factors,
        gamma: lo,
        scaled_gamma,
        beta,
        probes,
        certificate,
    })
}

/// `v'_i(g) = s_i * v_i(g)`.
pub fn apply_scaling(inst: &Instance, factors: &[Q]) -> Result<Instance> {
    if factors.len() != inst.n() {
        return Err(FairDivError::Malformed(format!(
            "expected {} factors, got {}",
            inst.n(),
            factors.len()
        )));
    }
    if let Some(i) = factors.iter().position(|s| !s.is_positive()) {
        return Err(FairDivError::NonPositiveFactor(i));
    }
    Instance::new(
        inst.rows()
            .iter()
            .zip(factors)
            .map(|(row, s)| row.iter().map(|v| v * s).collect())
            .collect(),
    )
}
