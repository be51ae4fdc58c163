//! Optimal classification under the demographic parity constraint, computed
//! from group-labeled score data.
//!
//! The pipeline: per-group score laws are empirical univariate measures
//! ([`dist::WeightedSample1D`]); their Wasserstein-2 barycenter is a quantile
//! average ([`barycenter::GroupedScores`]); pushing each group onto the
//! barycenter gives the optimal fair score ([`fair_score::FairScoreModel`]),
//! whose 1/2-threshold is the accuracy-optimal fair classifier and whose
//! `theta*`-threshold optimizes any linear-fractional measure
//! ([`lin_frac::LFMeasure`]). The same classifiers arise from a Lagrangian
//! dual over group multipliers ([`dual::DualProblem`]), which also covers the
//! group-unaware case; for two groups the unaware problem reduces exactly to
//! an aware one ([`unaware::DiscreteJoint2`]). Brute-force reference solvers
//! live in [`oracle`].
//!
//! Everything is generic over the scalar type through [`scalar::Real`]
//! (f32 or f64); the aliases at the crate root fix `f64`, which is what the
//! documented tolerances refer to.
//!
//! ```
//! use parity_opt::{GroupedScores, FairScoreModel, WeightedSample1D};
//!
//! let gs = GroupedScores::new(
//!     vec![
//!         WeightedSample1D::from_samples(&[0.1, 0.3, 0.5, 0.7]).unwrap(),
//!         WeightedSample1D::from_samples(&[0.3, 0.5, 0.7, 0.9]).unwrap(),
//!     ],
//!     vec![0.5, 0.5],
//! ).unwrap();
//! let model = FairScoreModel::fit(gs).unwrap();
//! assert!(model.classify_half(0.5, 0).unwrap());  // rank 0.625 in group 1
//! assert!(!model.classify_half(0.3, 1).unwrap()); // rank 0.125 in group 2
//! ```

// Domain checks are written as !(x >= lo && x <= hi) so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barycenter;
pub mod dist;
pub mod dual;
pub mod error;
pub mod fair_score;
pub mod lin_frac;
mod numeric;
pub mod oracle;
pub mod scalar;
pub mod unaware;

pub use error::{Error, Result};
pub use scalar::Real;

/// f64 alias of [`dist::WeightedSample1D`].
pub type WeightedSample1D = dist::WeightedSample1D<f64>;
/// f64 alias of [`barycenter::GroupedScores`].
pub type GroupedScores = barycenter::GroupedScores<f64>;
/// f64 alias of [`fair_score::FairScoreModel`].
pub type FairScoreModel = fair_score::FairScoreModel<f64>;
/// f64 alias of [`fair_score::ModelDoc`].
pub type ModelDoc = fair_score::ModelDoc<f64>;
/// f64 alias of [`lin_frac::LFMeasure`].
pub type LFMeasure = lin_frac::LFMeasure<f64>;
/// f64 alias of [`lin_frac::ConfusionStats`].
pub type ConfusionStats = lin_frac::ConfusionStats<f64>;
/// f64 alias of [`dual::DualProblem`].
pub type DualProblem = dual::DualProblem<f64>;
/// f64 alias of [`dual::DualSolution`].
pub type DualSolution = dual::DualSolution<f64>;
/// f64 alias of [`unaware::DiscreteJoint2`].
pub type DiscreteJoint2 = unaware::DiscreteJoint2<f64>;
/// f64 alias of [`unaware::ReducedProblem`].
pub type ReducedProblem = unaware::ReducedProblem<f64>;
