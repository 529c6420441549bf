use std::fmt;
use std::str::FromStr;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Instance;
use crate::error::{FairDivError, Result};
use crate::exact::{format_rational, int, parse_rational, Q};

const MAX_DRAWS: usize = 10_000;

/// Distribution of the valuation matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum ValueModel {
    /// Integers drawn uniformly from `lo..=hi`.
    UniformInteger { lo: u64, hi: u64 },
    /// Each entry is 0 with probability `p_zero`, otherwise `a` or `b` with equal odds.
    TwoValued { a: Q, b: Q, p_zero: f64 },
    /// Each good gets a level in `1..=10`; each agent values it at that level
    /// or, with probability `p_zero`, at 0.
    Restricted { p_zero: f64 },
}

impl ValueModel {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FairDivError::InvalidModel(msg));
        let check_p = |p: f64| {
            if (0.0..1.0).contains(&p) {
                Ok(())
            } else {
                Err(FairDivError::InvalidModel(format!("p_zero {p} must lie in [0, 1)")))
            }
        };
        match self {
            ValueModel::UniformInteger { lo, hi } => {
                if lo > hi || *hi == 0 {
                    return bad(format!("uniform range {lo}..={hi} has no positive values"));
                }
                Ok(())
            }
            ValueModel::TwoValued { a, b, p_zero } => {
                if !a.is_positive() || a >= b {
                    return bad(format!(
                        "two-valued model needs 0 < a < b, got a={}, b={}",
                        format_rational(a),
                        format_rational(b)
                    ));
                }
                check_p(*p_zero)
            }
            ValueModel::Restricted { p_zero } => check_p(*p_zero),
        }
    }

    fn draw(&self, n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Q>> {
        match self {
            ValueModel::UniformInteger { lo, hi } => (0..n)
                .map(|_| (0..m).map(|_| Q::from_integer(rng.gen_range(*lo..=*hi).into())).collect())
                .collect(),
            ValueModel::TwoValued { a, b, p_zero } => (0..n)
                .map(|_| {
                    (0..m)
                        .map(|_| {
                            if rng.gen_bool(*p_zero) {
                                int(0)
                            } else if rng.gen_bool(0.5) {
                                a.clone()
                            } else {
                                b.clone()
                            }
                        })
                        .collect()
                })
                .collect(),
            ValueModel::Restricted { p_zero } => {
                let levels: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=10)).collect();
                (0..n)
                    .map(|_| {
                        levels
                            .iter()
                            .map(|&l| if rng.gen_bool(*p_zero) { int(0) } else { int(l) })
                            .collect()
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for ValueModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueModel::UniformInteger { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            ValueModel::TwoValued { a, b, p_zero } => write!(
                f,
                "two-valued:{}:{}:{p_zero}",
                format_rational(a),
                format_rational(b)
            ),
            ValueModel::Restricted { p_zero } => write!(f, "restricted:{p_zero}"),
        }
    }
}

impl FromStr for ValueModel {
    type Err = FairDivError;

    /// `uniform:LO:HI`, `two-valued:A:B:P_ZERO`, or `restricted:P_ZERO`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || FairDivError::InvalidModel(format!("unrecognized model {s:?}"));
        let prob = |t: &str| t.parse::<f64>().map_err(|_| bad());
        let int = |t: &str| t.parse::<u64>().map_err(|_| bad());
        let model = match parts.as_slice() {
            ["uniform", lo, hi] => ValueModel::UniformInteger { lo: int(lo)?, hi: int(hi)? },
            ["two-valued", a, b, p] => ValueModel::TwoValued {
                a: parse_rational(a)?,
                b: parse_rational(b)?,
                p_zero: prob(p)?,
            },
            ["restricted", p] => ValueModel::Restricted { p_zero: prob(p)? },
            _ => return Err(bad()),
        };
        model.validate()?;
        Ok(model)
    }
}

/// Draws a valid instance; invalid matrices (a zero-only good or agent) are
/// discarded and redrawn in full. Deterministic for a fixed seed.
pub fn generate_random(n: usize, m: usize, model: &ValueModel, seed: u64) -> Result<Instance> {
    if n == 0 || m == 0 {
        return Err(FairDivError::InvalidModel("n and m must be at least 1".into()));
    }
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_DRAWS {
        if let Ok(inst) = Instance::new(model.draw(n, m, &mut rng)) {
            return Ok(inst);
        }
    }
    Err(FairDivError::InvalidModel(format!(
        "no valid {n}x{m} matrix after {MAX_DRAWS} draws of {model}"
    )))
}
