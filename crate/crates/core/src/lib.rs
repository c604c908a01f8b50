//! Exact analysis of digit-restricted s-adic fractal sets.
//!
//! The sets `S_(s,u)` collect the numbers in `[0, 1]` whose base-`s` digits
//! split into blocks `u^(c-1) c` with `c ∈ {1..s-1}`, `c ≠ u`. This crate
//! provides
//!
//! * an exact digit and block codec ([`digits`], [`blocks`]),
//! * cylinder endpoints, diameters, ordering and gaps ([`cylinder`]),
//! * general sets built from a finite alphabet of digit words ([`comboset`]),
//! * Moran-equation dimensions and a box-counting estimator ([`dimension`]),
//! * the stage-wise covering measure ([`measure`]),
//! * digit-frequency and normality analysis ([`normality`]),
//! * brute-force cross-checks ([`oracle`]) and the acceptance runner
//!   ([`reproduce`]).
//!
//! All numeric values are exact [`Rational`]s except dimensions, which are
//! roots of transcendental equations and are computed in `f64`.

pub mod blocks;
pub mod comboset;
pub mod cylinder;
pub mod digits;
pub mod dimension;
pub mod error;
pub mod measure;
pub mod normality;
pub mod oracle;
pub mod rational;
pub mod reproduce;

pub use blocks::{block_decode, block_encode, element_value, BlockSequence};
pub use digits::{digits_to_rational, rational_expansion, rational_to_digits, DigitString};
pub use error::{Error, MembershipViolation, Result};
pub use rational::Rational;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
