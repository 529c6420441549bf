//! Fair division instances with additive valuations over exact rationals.

mod generate;
mod parse;

pub use generate::{generate_random, ValueModel};
pub use parse::{parse_instance, parse_instance_with, IngestAction, ZeroPolicy};

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{FairDivError, Result};
use crate::exact::{format_rational, Q};

/// Read access to additive valuations. Implemented by [`Instance`] (exact)
/// and by the reduced instance of the PMMS pipeline (possibly rendered
/// square roots, compared with a tolerance).
pub trait Valuations {
    fn num_agents(&self) -> usize;
    fn num_goods(&self) -> usize;
    fn value(&self, agent: usize, good: usize) -> Q;

    fn bundle_value(&self, agent: usize, goods: &[usize]) -> Q {
        goods
            .iter()
            .fold(Q::zero(), |acc, &g| acc + self.value(agent, g))
    }

    /// Strict `a < b` as used for envy edges.
    fn strictly_less(&self, a: &Q, b: &Q) -> bool {
        a < b
    }

    /// `false` when values are rendered approximations of irrationals.
    fn is_exact(&self) -> bool {
        true
    }
}

/// `n` agents, `m` goods, nonnegative rational values. Every good and every
/// agent has at least one positive entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    values: Vec<Vec<Q>>,
    goods: usize,
}

/// Per-good range data: `gamma = min_positive / max` and
/// `base_sq = min_positive * max`, the square of the base value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoodStats {
    #[serde(with = "crate::exact::serde_q")]
    pub gamma: Q,
    #[serde(with = "crate::exact::serde_q")]
    pub base_sq: Q,
    #[serde(with = "crate::exact::serde_q")]
    pub min_positive: Q,
    #[serde(with = "crate::exact::serde_q")]
    pub max: Q,
}

impl Instance {
    pub fn new(values: Vec<Vec<Q>>) -> Result<Self> {
        let goods = validate_shape(&values)?;
        for g in 0..goods {
            if values.iter().all(|row| row[g].is_zero()) {
                return Err(FairDivError::ZeroGood(g));
            }
        }
        for (i, row) in values.iter().enumerate() {
            if row.iter().all(Zero::is_zero) {
                return Err(FairDivError::ZeroAgent(i));
            }
        }
        Ok(Instance { values, goods })
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| crate::exact::int(v)).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn m(&self) -> usize {
        self.goods
    }

    pub fn value_ref(&self, agent: usize, good: usize) -> &Q {
        &self.values[agent][good]
    }

    pub fn rows(&self) -> &[Vec<Q>] {
        &self.values
    }

    pub fn is_positive(&self, agent: usize, good: usize) -> bool {
        self.values[agent][good].is_positive()
    }

    /// `P_i`: goods positively valued by `agent`, ascending.
    pub fn support(&self, agent: usize) -> Vec<usize> {
        (0..self.goods).filter(|&g| self.is_positive(agent, g)).collect()
    }

    pub fn good_stats(&self, good: usize) -> GoodStats {
        assert!(good < self.goods, "good index {good} out of range");
        let column = self.values.iter().map(|row| &row[good]);
        let max = column.clone().max().cloned().unwrap_or_else(Q::zero);
        let min_positive = column
            .filter(|v| v.is_positive())
            .min()
            .cloned()
            .unwrap_or_else(Q::zero);
        if max.is_zero() {
            // Unreachable for validated instances; kept total for completeness.
            return GoodStats {
                gamma: Q::one(),
                base_sq: Q::zero(),
                min_positive,
                max,
            };
        }
        GoodStats {
            gamma: &min_positive / &max,
            base_sq: &min_positive * &max,
            min_positive,
            max,
        }
    }

    pub fn base_sq(&self, good: usize) -> Q {
        self.good_stats(good).base_sq
    }

    /// Minimum of the per-good range parameters.
    pub fn range_parameter(&self) -> Q {
        (0..self.goods)
            .map(|g| self.good_stats(g).gamma)
            .min()
            .unwrap_or_else(Q::one)
    }

    /// Orders goods by base value through their squares.
    pub fn compare_base(&self, g: usize, h: usize) -> Ordering {
        self.base_sq(g).cmp(&self.base_sq(h))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "agents": self.n(),
            "goods": self.m(),
            "values": self
                .values
                .iter()
                .map(|row| row.iter().map(format_rational).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.values {
            let line: Vec<String> = row.iter().map(format_rational).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

impl Valuations for Instance {
    fn num_agents(&self) -> usize {
        self.n()
    }

    fn num_goods(&self) -> usize {
        self.m()
    }

    fn value(&self, agent: usize, good: usize) -> Q {
        self.values[agent][good].clone()
    }

    fn bundle_value(&self, agent: usize, goods: &[usize]) -> Q {
        let row = &self.values[agent];
        goods.iter().fold(Q::zero(), |acc, &g| acc + &row[g])
    }
}

fn validate_shape(values: &[Vec<Q>]) -> Result<usize> {
    let goods = values.first().map(Vec::len).unwrap_or(0);
    if values.is_empty() || goods == 0 {
        return Err(FairDivError::EmptyInstance);
    }
    for (i, row) in values.iter().enumerate() {
        if row.len() != goods {
            return Err(FairDivError::Malformed(format!(
                "row {i} has {} entries, expected {goods}",
                row.len()
            )));
        }
        if let Some(g) = row.iter().position(Signed::is_negative) {
            return Err(FairDivError::NegativeValue { agent: i, good: g });
        }
    }
    Ok(goods)
}
