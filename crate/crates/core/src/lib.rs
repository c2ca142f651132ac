//! Exact measures of unions of parallelograms over the unit square.
//!
//! `T^n_σ` is the union of `n` parallelograms, the `j`-th joining the
//! bottom cell `[(j-1)/n, j/n] × {0}` to the top cell `[(σ(j)-1)/n, σ(j)/n] × {1}`.
//! This crate computes its area exactly, searches for the permutation
//! minimizing it, and checks the fractal machinery behind the base-3
//! digit-swap family: partial Cantor-type sets, projections of partial
//! Sierpinski gaskets, and Favard length.
//!
//! ```
//! use trapmeasure_core::{area, Permutation, TrapezoidSpec};
//!
//! let spec = TrapezoidSpec::new("1,3,2".parse::<Permutation>().unwrap()).unwrap();
//! assert_eq!(area(&spec).to_string(), "5/6");
//! ```

pub mod cantor;
pub mod error;
pub mod exact;
pub mod gasket;
pub mod permutations;
mod quad;
pub mod search;
pub mod trapezoid;

pub use error::{Error, Result};
pub use exact::{integrate_plp, Interval, IntervalUnion, PiecewiseLinearProfile, Rational};
pub use permutations::{
    canonical_class, composite_sigma, digit_swap_perm, CompositePlan, Permutation,
};
pub use trapezoid::{
    area, area_oracle, slice, slice_profile, weighted_sum_identity, TrapezoidSpec,
};
