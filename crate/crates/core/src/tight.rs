//! Parameterized instances on which the guarantees are attained.

use num_traits::{One, Signed};

use crate::error::{FairDivError, Result};
use crate::exact::{exact_sqrt, format_rational, int, sqrt_floor, Q};
use crate::instance::Instance;

/// Three agents, five goods; look-ahead assignment under
/// [`TieBreakPolicy::appendix_a`](crate::policy::TieBreakPolicy::appendix_a)
/// returns `{g0}, {g1}, {g2, g3, g4}` and agent 1's EFx ratio towards agent 2
/// (removing g2) equals `2*gamma / (sqrt(5 + 4*gamma) - 1)`.
#[derive(Clone, Debug)]
pub struct TightInstance {
    pub instance: Instance,
    /// Range parameter of `instance`; equals the requested gamma unless
    /// `sqrt(gamma)` had to be rationalized.
    pub gamma: Q,
    /// Stand-in for `1/eta`, never above it.
    pub inv_eta: Q,
    /// No rounding happened anywhere.
    pub exact: bool,
}

pub fn appendix_a(gamma: &Q, bits: u32) -> Result<TightInstance> {
    if !gamma.is_positive() || gamma > &Q::one() {
        return Err(FairDivError::GammaOutOfRange(format_rational(gamma)));
    }
    let (r, mut exact) = match exact_sqrt(gamma) {
        Some(r) => (r, true),
        None => (sqrt_floor(gamma, bits), false),
    };
    let g = &r * &r;
    // 1/eta = (sqrt(5 + 4g) + 1) / (2 + 2g), from eta^2 + eta = 1 + g
    let disc = int(5) + int(4) * &g;
    let root = match exact_sqrt(&disc) {
        Some(s) => s,
        None => {
            exact = false;
            sqrt_floor(&disc, bits)
        }
    };
    let e = (root + int(1)) / (int(2) + int(2) * &g);
    let z = int(0);
    let values = vec![
        vec![int(10) * &e / &r, (int(1) + &e) / &r, int(1) / &r, &e / &r, &r * &e],
        vec![z.clone(), &r * (int(1) + &e), r.clone(), &r * &e, &e / &r],
        vec![z.clone(), z, int(1), &r * &e, int(0)],
    ];
    Ok(TightInstance { instance: Instance::new(values)?, gamma: g, inv_eta: e, exact })
}

/// Two identical agents with values 6, 6, 4, 4, 4.
pub fn appendix_b() -> Instance {
    Instance::from_integers(&[vec![6, 6, 4, 4, 4], vec![6, 6, 4, 4, 4]]).expect("valid instance")
}
