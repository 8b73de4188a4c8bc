//! Outage probability of a link assisted by an intelligent reflecting
//! surface with `N` passive elements plus a Rayleigh direct path.
//!
//! Two phase configurations are modelled: perfect co-phasing of every
//! element and one-bit (0/π) phase shifters. For each the crate offers
//! analytic CDFs, leading-order asymptotics, a Gaussian baseline, and a
//! Monte-Carlo estimator, plus diagnostics on the approximations involved.
//!
//! ```
//! use irslab_core::{cdf_h, CdfHMode, QuadratureSpec};
//!
//! let p = cdf_h(3.0, 2, 1.0, &QuadratureSpec::default(), CdfHMode::Auto).unwrap();
//! assert!(p > 0.0 && p < 1.0);
//! ```

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod asymptotics;
pub mod channel;
pub mod curve;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod montecarlo;
pub mod quad;
pub mod specfun;

pub use analytic::{
    cdf_g2, cdf_h, clt_cdf_h, lemma1_cdf, lemma2_closed_form, lemma2_integral, outage, prop1_terms, CdfHMode,
    GammaRayleighSum, Lemma2Mode, Prop1Terms,
};
pub use asymptotics::{
    cdf_g2_leading, cdf_h_leading, diversity_order, estimate_slope, f_s_leading, DiversityReport, Rational,
};
pub use channel::{PhaseMode, SystemConfig, SystemGeometry};
pub use curve::{evaluate, CurvePoint, Method, OutageCurve, SampleInfo};
pub use diagnostics::{KlSpec, KlValue, MutualInformation};
pub use error::{Error, Result};
pub use montecarlo::{mc_outage, McConfig, McEstimate};
pub use quad::QuadratureSpec;
pub use specfun::AccuracyBudget;
