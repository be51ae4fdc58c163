//! Linear-fractional performance measures and their optimal fair thresholds.
//!
//! A measure is a ratio of two affine functions of the pair
//! `(P(g=1, Y=1), P(g=1))`, given by coefficient triples `n = (n0, n1, n2)`
//! and `d = (d0, d1, d2)`:
//!
//! ```text
//!         n0 + n1 * P(g=1, Y=1) + n2 * P(g=1)
//! U(g) = -------------------------------------
//!         d0 + d1 * P(g=1, Y=1) + d2 * P(g=1)
//! ```
//!
//! Accuracy, F-scores, Jaccard, the AM measure and recall all fit this form.
//! For coefficients passing [`LFMeasure::validate`], the fair-optimal
//! classifier thresholds the fair score at a level `theta*` that is either an
//! explicit ratio of the coefficients or the unique root of a monotone
//! fixed-point equation in the expected excess score `E[(f - theta)_+]`.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fair_score::FairScoreModel;
use crate::numeric::compensated_sum;
use crate::scalar::{real, Real};

/// A linear-fractional measure: numerator/denominator coefficients plus the
/// label prior `P(Y = 1)` used by distribution-dependent coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LFMeasure<T> {
    n: [T; 3],
    d: [T; 3],
    label_prior: T,
}

/// The two operands a linear-fractional measure depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionStats<T> {
    /// `P(g = 1, Y = 1)`
    pub p_pos_joint: T,
    /// `P(g = 1)`
    pub p_pos: T,
}

impl<T: Real> ConfusionStats<T> {
    pub fn new(p_pos_joint: T, p_pos: T) -> Result<Self> {
        let ok = p_pos_joint >= T::zero() && p_pos_joint <= p_pos && p_pos <= T::one();
        if !ok {
            return Err(Error::InvalidMeasure(format!(
                "confusion stats require 0 <= joint <= positive-rate <= 1, got ({}, {})",
                p_pos_joint.to_f64().unwrap_or(f64::NAN),
                p_pos.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(Self { p_pos_joint, p_pos })
    }
}

/// Which of the two mutually exclusive coefficient conditions holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    /// Strict-inequality branch (`d2*n1 > n2*d1`): fixed-point threshold.
    C1,
    /// Equality branch (`d2*n1 = n2*d1`): explicit threshold.
    C2,
    /// Neither holds; the diagnostic names the first violated inequality.
    Invalid(String),
}

/// Output of [`LFMeasure::solve_threshold`].
#[derive(Debug, Clone)]
pub struct ThresholdSolution<T> {
    pub theta: T,
    pub branch: Validation,
    /// Fixed-point residual; `None` in the explicit branch.
    pub residual: Option<T>,
    /// Set when the root had to be clamped to a boundary of [0, 1].
    pub clamped: bool,
}

/// A fair classifier thresholding every group at the same within-group rank.
#[derive(Debug, Clone, Copy)]
pub struct CommonRankClassifier<T> {
    pub gamma: T,
}

impl<T: Real> CommonRankClassifier<T> {
    pub fn decide(&self, model: &FairScoreModel<T>, group: usize, score: T) -> Result<bool> {
        Ok(model.grouped().group(group)?.interp_cdf(score)? >= self.gamma)
    }
}

/// The optimal fair classifier for a measure, in both representations.
#[derive(Debug, Clone)]
pub struct ClassifierSpec<T> {
    pub theta_star: T,
    /// Per-group raw-score thresholds; `+inf` marks an unreachable level.
    pub group_thresholds: Vec<T>,
}

impl<T: Real> ClassifierSpec<T> {
    pub fn decide(&self, group: usize, score: T) -> Result<bool> {
        let t = self
            .group_thresholds
            .get(group)
            .ok_or(Error::GroupIndexOutOfRange {
                index: group,
                groups: self.group_thresholds.len(),
            })?;
        Ok(score >= *t)
    }
}

/// First condition set: strict cross-product inequality plus two bounds tying
/// the coefficients to the label prior.
pub fn c1_holds<T: Real>(n: &[T; 3], d: &[T; 3], label_prior: T) -> bool {
    let cross = n[2] * d[1] - d[2] * n[1];
    if !(d[2] * n[1] > n[2] * d[1]) {
        return false;
    }
    let ratio = (n[0] * d[2] - d[0] * n[2]) / cross;
    if !(ratio <= label_prior) {
        return false;
    }
    d[0] * n[1] - n[0] * d[1] >= (n[0] * d[2] - d[0] * n[2]).max(T::zero())
}

/// Second condition set: cross-product equality, positive orientation, and
/// the explicit threshold ratio landing in [0, 1].
pub fn c2_holds<T: Real>(n: &[T; 3], d: &[T; 3], _label_prior: T) -> bool {
    if d[2] * n[1] != n[2] * d[1] {
        return false;
    }
    if !(n[1] * d[0] > d[1] * n[0]) {
        return false;
    }
    let ratio = (d[0] * n[2] - n[0] * d[2]) / (n[0] * d[1] - d[0] * n[1]);
    ratio >= T::zero() && ratio <= T::one()
}

impl<T: Real> LFMeasure<T> {
    pub fn new(n: [T; 3], d: [T; 3], label_prior: T) -> Result<Self> {
        for v in n.iter().chain(d.iter()) {
            if !v.is_finite() {
                return Err(Error::InvalidMeasure("non-finite coefficient".into()));
            }
        }
        if !(label_prior >= T::zero() && label_prior <= T::one()) {
            return Err(Error::InvalidMeasure(format!(
                "label prior {} outside [0, 1]",
                label_prior.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(Self { n, d, label_prior })
    }

    fn prior_in_open_interval(label_prior: T) -> Result<T> {
        if !(label_prior > T::zero() && label_prior < T::one()) {
            return Err(Error::InvalidMeasure(format!(
                "preset requires a label prior strictly inside (0, 1), got {}",
                label_prior.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(label_prior)
    }

    /// `P(Y = g)`.
    pub fn accuracy(label_prior: T) -> Result<Self> {
        let p = Self::prior_in_open_interval(label_prior)?;
        let two = T::one() + T::one();
        Self::new(
            [T::one() - p, two, -T::one()],
            [T::one(), T::zero(), T::zero()],
            p,
        )
    }

    /// F-score with weight `b` on recall.
    pub fn f_beta(label_prior: T, b: T) -> Result<Self> {
        let p = Self::prior_in_open_interval(label_prior)?;
        if !(b > T::zero()) || !b.is_finite() {
            return Err(Error::InvalidMeasure("f_beta requires b > 0".into()));
        }
        let b2 = b * b;
        Self::new(
            [T::zero(), T::one() + b2, T::zero()],
            [b2 * p, T::zero(), T::one()],
            p,
        )
    }

    pub fn f1(label_prior: T) -> Result<Self> {
        Self::f_beta(label_prior, T::one())
    }

    /// Jaccard similarity of the positive sets.
    pub fn jaccard(label_prior: T) -> Result<Self> {
        let p = Self::prior_in_open_interval(label_prior)?;
        Self::new(
            [T::zero(), T::one(), T::zero()],
            [p, -T::one(), T::one()],
            p,
        )
    }

    /// Arithmetic mean of the class-conditional accuracies.
    pub fn am(label_prior: T) -> Result<Self> {
        let p = Self::prior_in_open_interval(label_prior)?;
        let q = T::one() - p;
        let half = real::<T>(0.5);
        Self::new(
            [half, half / p + half / q, -(half / q)],
            [T::one(), T::zero(), T::zero()],
            p,
        )
    }

    /// `P(g = 1 | Y = 1)`.
    pub fn recall(label_prior: T) -> Result<Self> {
        let p = Self::prior_in_open_interval(label_prior)?;
        Self::new(
            [T::zero(), T::one(), T::zero()],
            [p, T::zero(), T::zero()],
            p,
        )
    }

    pub fn numerator(&self) -> &[T; 3] {
        &self.n
    }

    pub fn denominator(&self) -> &[T; 3] {
        &self.d
    }

    pub fn label_prior(&self) -> T {
        self.label_prior
    }

    /// Checks the sign-fixing denominator condition, then which of the two
    /// coefficient conditions applies.
    pub fn validate(&self) -> Validation {
        let (n, d) = (&self.n, &self.d);
        let denom_floor = d[0] + (d[1].min(T::zero()) + d[2]).min(T::zero());
        if denom_floor < T::zero() {
            return Validation::Invalid(format!(
                "denominator condition fails: d0 + min(min(d1,0)+d2, 0) = {} < 0",
                denom_floor.to_f64().unwrap_or(f64::NAN)
            ));
        }
        if d[2] * n[1] == n[2] * d[1] {
            // Equality branch: only C2 can apply.
            if !(n[1] * d[0] > d[1] * n[0]) {
                return Validation::Invalid("C2 fails: n1*d0 > d1*n0 does not hold".into());
            }
            let ratio = (d[0] * n[2] - n[0] * d[2]) / (n[0] * d[1] - d[0] * n[1]);
            if !(ratio >= T::zero() && ratio <= T::one()) {
                return Validation::Invalid(format!(
                    "C2 fails: threshold ratio {} outside [0, 1]",
                    ratio.to_f64().unwrap_or(f64::NAN)
                ));
            }
            Validation::C2
        } else {
            if !(d[2] * n[1] > n[2] * d[1]) {
                return Validation::Invalid("C1 fails: d2*n1 > n2*d1 does not hold".into());
            }
            let cross = n[2] * d[1] - d[2] * n[1];
            let ratio = (n[0] * d[2] - d[0] * n[2]) / cross;
            if !(ratio <= self.label_prior) {
                return Validation::Invalid(format!(
                    "C1 fails: (n0*d2 - d0*n2)/(n2*d1 - d2*n1) = {} exceeds the label prior",
                    ratio.to_f64().unwrap_or(f64::NAN)
                ));
            }
            if !(d[0] * n[1] - n[0] * d[1] >= (n[0] * d[2] - d[0] * n[2]).max(T::zero())) {
                return Validation::Invalid(
                    "C1 fails: d0*n1 - n0*d1 >= (n0*d2 - d0*n2)_+ does not hold".into(),
                );
            }
            Validation::C1
        }
    }

    /// Evaluates the measure on classifier statistics.
    pub fn utility(&self, stats: ConfusionStats<T>) -> Result<T> {
        let num =
            self.n[0] + self.n[1] * stats.p_pos_joint + self.n[2] * stats.p_pos;
        let den =
            self.d[0] + self.d[1] * stats.p_pos_joint + self.d[2] * stats.p_pos;
        if den <= real::<T>(1e-15) {
            return Err(Error::OutsideDomain {
                denominator: den.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(num / den)
    }

    /// Optimal threshold on the fair score.
    ///
    /// Explicit ratio in the equality branch; otherwise the unique root of
    /// `phi(theta) = theta*A + B - E[(f - theta)_+]`, which is continuous and
    /// monotone increasing on [0, 1] under the validated conditions. The
    /// expectation runs over the model's empirical fair-score law.
    pub fn solve_threshold(&self, model: &FairScoreModel<T>) -> Result<ThresholdSolution<T>> {
        let branch = self.validate();
        if let Validation::Invalid(why) = branch {
            return Err(Error::InvalidMeasure(why));
        }
        let (n, d) = (&self.n, &self.d);
        if branch == Validation::C2 {
            let theta = (d[0] * n[2] - n[0] * d[2]) / (n[0] * d[1] - d[0] * n[1]);
            return Ok(ThresholdSolution {
                theta,
                branch,
                residual: None,
                clamped: false,
            });
        }
        let cross = n[2] * d[1] - d[2] * n[1];
        let a = (n[0] * d[1] - d[0] * n[1]) / cross;
        let b = (n[0] * d[2] - d[0] * n[2]) / cross;
        let law = model.fair_score_law();
        let phi = |theta: T| theta * a + b - law.positive_part_mean(theta);
        let (lo, hi) = (T::zero(), T::one());
        if phi(lo) > T::zero() {
            return Ok(ThresholdSolution {
                theta: lo,
                branch,
                residual: Some(phi(lo)),
                clamped: true,
            });
        }
        if phi(hi) < T::zero() {
            return Ok(ThresholdSolution {
                theta: hi,
                branch,
                residual: Some(phi(hi)),
                clamped: true,
            });
        }
        let r = crate::numeric::bisect_rising(lo, hi, phi, 200);
        Ok(ThresholdSolution {
            theta: r.root,
            branch,
            residual: Some(r.residual),
            clamped: false,
        })
    }

    /// Utility of the optimal fair classifier via the fixed-point identities:
    /// `(n2 + theta*n1)/(d2 + theta*d1)` in the strict branch, the
    /// excess-mean form in the equality branch.
    pub fn optimal_utility(&self, model: &FairScoreModel<T>, theta_star: T) -> Result<T> {
        let (n, d) = (&self.n, &self.d);
        let tiny = real::<T>(1e-15);
        if d[2] * n[1] == n[2] * d[1] {
            let excess = model.fair_score_law().positive_part_mean(theta_star);
            let den = d[0] + d[1] * excess;
            if den.abs() <= tiny {
                return Err(Error::OutsideDomain {
                    denominator: den.to_f64().unwrap_or(f64::NAN),
                });
            }
            Ok((n[0] + n[1] * excess) / den)
        } else {
            let den = d[2] + theta_star * d[1];
            if den.abs() <= tiny {
                return Err(Error::OutsideDomain {
                    denominator: den.to_f64().unwrap_or(f64::NAN),
                });
            }
            Ok((n[2] + theta_star * n[1]) / den)
        }
    }

    /// The coefficient `n1 - d1 * U(g*)` in closed form, case by case.
    pub fn excess_coefficient(&self, model: &FairScoreModel<T>, theta_star: T) -> Result<T> {
        let (n, d) = (&self.n, &self.d);
        if d[2] * n[1] == n[2] * d[1] {
            let excess = model.fair_score_law().positive_part_mean(theta_star);
            Ok((n[1] * d[0] - d[1] * n[0]) / (d[0] + d[1] * excess))
        } else {
            Ok((d[2] * n[1] - n[2] * d[1]) / (d[2] + theta_star * d[1]))
        }
    }

    /// Closed-form utility gap `U(g*) - U(g)` for a fair competitor `g`
    /// given as a common-rank threshold.
    ///
    /// The gap is the mean absolute score margin over the disagreement set,
    /// scaled by the case coefficient and the competitor's denominator. The
    /// competitor must be demographic-parity fair at rank level: group
    /// positive rates may differ by at most `2 / min group size`.
    pub fn excess_score(
        &self,
        model: &FairScoreModel<T>,
        theta_star: T,
        competitor: &CommonRankClassifier<T>,
    ) -> Result<T> {
        let gs = model.grouped();
        // fairness precondition on the competitor
        let mut rates = Vec::with_capacity(gs.k());
        for (s, g) in gs.groups().iter().enumerate() {
            let mut rate = T::zero();
            for (&atom, &w) in g.atoms().iter().zip(g.weights()) {
                if competitor.decide(model, s, atom)? {
                    rate += w;
                }
            }
            rates.push(rate);
        }
        let hi = rates.iter().fold(T::neg_infinity(), |m, &r| m.max(r));
        let lo = rates.iter().fold(T::infinity(), |m, &r| m.min(r));
        let spread = hi - lo;
        let allowed =
            (T::one() + T::one()) / T::from_usize(gs.min_group_len()).unwrap() + T::weight_tol();
        if spread > allowed {
            return Err(Error::NotFair {
                gap: spread.to_f64().unwrap_or(f64::NAN),
                allowed: allowed.to_f64().unwrap_or(f64::NAN),
            });
        }

        // Per-group margin thresholds t_s must represent the optimal
        // classifier and satisfy sum_s p_s t_s = theta*. The barycenter rank
        // inversion delivers both when theta* is interior; when it clamps to
        // a boundary rank (e.g. theta* = 0 below every fair score), constant
        // thresholds at theta* itself do.
        let beta = model.barycenter_rank_of(theta_star)?;
        let effective = gs.barycenter_quantile(beta)?;
        let thresholds: Vec<T> = if (effective - theta_star).abs() <= real::<T>(1e-11) {
            model.group_thresholds(theta_star)?
        } else {
            vec![theta_star; gs.k()]
        };
        let mut delta_terms = Vec::new();
        let mut ppj_terms = Vec::new();
        let mut pp_terms = Vec::new();
        for (s, (g, &prior)) in gs.groups().iter().zip(gs.priors()).enumerate() {
            let t_s = thresholds[s];
            for (&atom, &w) in g.atoms().iter().zip(g.weights()) {
                let g_star = atom >= t_s;
                let g_comp = competitor.decide(model, s, atom)?;
                if g_star != g_comp {
                    delta_terms.push(prior * w * (atom - t_s).abs());
                }
                if g_comp {
                    ppj_terms.push(prior * w * atom);
                    pp_terms.push(prior * w);
                }
            }
        }
        let delta = compensated_sum(delta_terms);
        let stats = ConfusionStats {
            p_pos_joint: compensated_sum(ppj_terms),
            p_pos: compensated_sum(pp_terms),
        };
        let competitor_den =
            self.d[0] + self.d[1] * stats.p_pos_joint + self.d[2] * stats.p_pos;
        if competitor_den.abs() <= real::<T>(1e-15) {
            return Err(Error::OutsideDomain {
                denominator: competitor_den.to_f64().unwrap_or(f64::NAN),
            });
        }
        let coeff = self.excess_coefficient(model, theta_star)?;
        Ok(coeff * delta / competitor_den)
    }

    /// The optimal fair classifier in both threshold representations.
    pub fn classifier(&self, model: &FairScoreModel<T>) -> Result<ClassifierSpec<T>> {
        let sol = self.solve_threshold(model)?;
        Ok(ClassifierSpec {
            theta_star: sol.theta,
            group_thresholds: model.group_thresholds(sol.theta)?,
        })
    }
}

/// Empirical classifier statistics on the model's training data, using the
/// scores as `E[Y | X, S]`.
pub fn empirical_stats<T: Real>(
    model: &FairScoreModel<T>,
    mut decide: impl FnMut(usize, T) -> Result<bool>,
) -> Result<ConfusionStats<T>> {
    let gs = model.grouped();
    let mut ppj = Vec::new();
    let mut pp = Vec::new();
    for (s, (g, &prior)) in gs.groups().iter().zip(gs.priors()).enumerate() {
        for (&atom, &w) in g.atoms().iter().zip(g.weights()) {
            if decide(s, atom)? {
                ppj.push(prior * w * atom);
                pp.push(prior * w);
            }
        }
    }
    Ok(ConfusionStats {
        p_pos_joint: compensated_sum(ppj),
        p_pos: compensated_sum(pp),
    })
}

/// JSON-facing measure description: explicit coefficients or a named preset.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    Explicit {
        n: [f64; 3],
        d: [f64; 3],
        label_prior: f64,
    },
    Preset {
        preset: PresetName,
        #[serde(default)]
        beta: Option<f64>,
        #[serde(default)]
        label_prior: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    Accuracy,
    FBeta,
    Jaccard,
    Am,
    Recall,
}

impl MeasureSpec {
    /// Instantiates the measure, taking the label prior from the spec itself
    /// when present and from `fallback_prior` (typically the model) otherwise.
    pub fn instantiate(&self, fallback_prior: f64) -> Result<LFMeasure<f64>> {
        match self {
            MeasureSpec::Explicit { n, d, label_prior } => {
                LFMeasure::new(*n, *d, *label_prior)
            }
            MeasureSpec::Preset {
                preset,
                beta,
                label_prior,
            } => {
                let prior = label_prior.unwrap_or(fallback_prior);
                match preset {
                    PresetName::Accuracy => LFMeasure::accuracy(prior),
                    PresetName::FBeta => LFMeasure::f_beta(prior, beta.unwrap_or(1.0)),
                    PresetName::Jaccard => LFMeasure::jaccard(prior),
                    PresetName::Am => LFMeasure::am(prior),
                    PresetName::Recall => LFMeasure::recall(prior),
                }
            }
        }
    }
}
