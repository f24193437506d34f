//! Least squares with classical inference, dummy encoding and the within
//! (fixed-effects) estimator.

mod design;
mod fe;
mod ols;
mod qr;

pub use design::{encode_design, Design, TermSource, INTERCEPT};
pub use fe::{fit_fixed_effects, joint_category, FixedEffectsFit, JOINT_SEPARATOR, SMALL_GROUP};
pub use ols::{fit_ols, significance_stars, LinearFit};
