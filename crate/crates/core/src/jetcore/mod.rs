//! Truncated Taylor arithmetic, closed-form fields and jets.

mod expr;
mod field;
mod jet;
mod multiindex;
mod series;

pub use expr::{Expr, Primitive};
pub use field::{Component, Polynomial, SmoothField};
pub use jet::{finite_difference_jet, jet_extension, JetValue};
pub use multiindex::MultiIndex;
pub use series::{multi_indices, TruncatedSeries, MAX_ORDER};
