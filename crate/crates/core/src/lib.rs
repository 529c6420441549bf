//! Approximately fair allocation of indivisible goods under additive
//! valuations with bounded range parameter.
//!
//! Every value is an exact rational. Square roots that the algorithms need
//! (base values, the look-ahead threshold) are handled by squaring, except
//! in the PMMS reduction, which renders irrational base values at a
//! configurable precision.

pub mod allocation;
pub mod envy_graph;
pub mod error;
pub mod exact;
pub mod fairness;
pub mod instance;
pub mod labase;
pub mod oracle;
pub mod pmms;
pub mod policy;
pub mod scaling;
pub mod tefx;
pub mod tight;

pub use allocation::Allocation;
pub use error::{FairDivError, Result};
pub use exact::{FairRatio, Q};
pub use fairness::{FairnessReport, Notion};
pub use instance::{Instance, Valuations};
pub use policy::TieBreakPolicy;
