//! Group-unaware fair classification for two groups, by reduction to the
//! aware case.
//!
//! On a finite feature support the reduction is exact pointwise arithmetic:
//!
//! 1. Split the signed measure `P(x|1) - P(x|2)` into its positive and
//!    negative parts (Hahn split) and normalize each by the total variation
//!    `TV` to get two conditionals with disjoint supports.
//! 2. Give the two synthetic groups equal priors 1/2.
//! 3. Rescale the score into the pseudo-score
//!    `eta~ = 1/2 + (TV/2) (2 eta - 1) / |tau_1/p_1 - tau_2/p_2|` on the
//!    union of the two supports (it may leave [0, 1]; the dual objective
//!    only consumes `2 eta~ - 1`).
//!
//! Solving the reduced aware problem and falling back to the plain Bayes rule
//! on points where the two conditionals agree yields an optimal unaware fair
//! classifier. When `TV = 0` the features carry no group signal and the Bayes
//! rule is already fair.

use std::collections::HashSet;

use crate::dual::{DualProblem, DualSample, DualSolution};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::scalar::{real, Real};

/// A finite-support joint law of (X, S, eta) for two groups.
#[derive(Debug, Clone)]
pub struct DiscreteJoint2<T> {
    support: Vec<String>,
    cond: [Vec<T>; 2],
    priors: [T; 2],
    eta: Vec<T>,
}

/// The Hahn-split awareness problem.
#[derive(Debug, Clone)]
pub struct ReducedProblem<T> {
    /// `q_cond[s][i]`: conditional mass of point `i` in synthetic group `s`;
    /// the two supports are disjoint.
    pub q_cond: [Vec<T>; 2],
    /// Pseudo-score on the union of the supports, `None` on the Bayes region.
    pub eta_tilde: Vec<Option<T>>,
    /// Points where the two original conditionals agree.
    pub bayes_region: Vec<usize>,
    pub supp1: Vec<usize>,
    pub supp2: Vec<usize>,
    pub tv: T,
}

/// Assembled unaware classifier plus diagnostics.
#[derive(Debug, Clone)]
pub struct UnawareSolution<T> {
    /// Decision per support point.
    pub assignments: Vec<bool>,
    /// Set when `TV = 0` and the plain Bayes rule was used everywhere.
    pub bayes_everywhere: bool,
    pub tv: T,
    pub dual: Option<DualSolution<T>>,
    pub reduced: Option<ReducedProblem<T>>,
    /// `| P(g=1 | S=1) - P(g=1 | S=2) |` on the joint.
    pub dp_residual: T,
    /// Misclassification risk `P(g != Y)` on the joint.
    pub risk: T,
}

impl<T: Real> DiscreteJoint2<T> {
    pub fn new(
        support: Vec<String>,
        cond1: Vec<T>,
        cond2: Vec<T>,
        priors: [T; 2],
        eta: Vec<T>,
    ) -> Result<Self> {
        let m = support.len();
        if m == 0 {
            return Err(Error::InvalidJoint("empty support".into()));
        }
        if cond1.len() != m || cond2.len() != m || eta.len() != m {
            return Err(Error::InvalidJoint(format!(
                "length mismatch: support {m}, cond1 {}, cond2 {}, eta {}",
                cond1.len(),
                cond2.len(),
                eta.len()
            )));
        }
        let distinct: HashSet<&String> = support.iter().collect();
        if distinct.len() != m {
            return Err(Error::InvalidJoint("support ids must be distinct".into()));
        }
        let mut priors = priors;
        for &p in &priors {
            if !(p > T::zero()) || !p.is_finite() {
                return Err(Error::InvalidJoint("priors must be positive".into()));
            }
        }
        let psum = priors[0] + priors[1];
        let off = (psum - T::one()).abs();
        if off > T::weight_tol() {
            if off > T::renorm_tol() {
                return Err(Error::InvalidJoint(format!(
                    "priors sum to {}",
                    psum.to_f64().unwrap_or(f64::NAN)
                )));
            }
            priors[0] /= psum;
            priors[1] /= psum;
        }
        let mut cond = [cond1, cond2];
        for c in &mut cond {
            for (i, &v) in c.iter().enumerate() {
                if !(v >= T::zero()) || !v.is_finite() {
                    return Err(Error::InvalidJoint(format!(
                        "conditional mass at point {i} is negative or non-finite"
                    )));
                }
            }
            let sum = compensated_sum(c.iter().copied());
            let off = (sum - T::one()).abs();
            if off > T::weight_tol() {
                if off > T::renorm_tol() {
                    return Err(Error::InvalidJoint(format!(
                        "conditional sums to {}",
                        sum.to_f64().unwrap_or(f64::NAN)
                    )));
                }
                for v in c.iter_mut() {
                    *v /= sum;
                }
            }
        }
        for i in 0..m {
            if cond[0][i] == T::zero() && cond[1][i] == T::zero() {
                return Err(Error::InvalidJoint(format!(
                    "support point {i} carries no mass under either conditional"
                )));
            }
            if !(eta[i] >= T::zero() && eta[i] <= T::one()) {
                return Err(Error::InvalidJoint(format!(
                    "eta at point {i} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            support,
            cond,
            priors,
            eta,
        })
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn cond(&self, s: usize) -> &[T] {
        &self.cond[s]
    }

    pub fn priors(&self) -> [T; 2] {
        self.priors
    }

    pub fn eta(&self) -> &[T] {
        &self.eta
    }

    /// Feature marginal `P(X = x_i)`.
    pub fn marginal(&self, i: usize) -> T {
        self.priors[0] * self.cond[0][i] + self.priors[1] * self.cond[1][i]
    }

    /// Half the L1 distance between the conditionals.
    pub fn total_variation(&self) -> T {
        let two = T::one() + T::one();
        compensated_sum(
            self.cond[0]
                .iter()
                .zip(self.cond[1].iter())
                .map(|(&a, &b)| (a - b).abs()),
        ) / two
    }

    /// Posterior `(P(S=1 | x_i), P(S=2 | x_i))`.
    pub fn posterior(&self, i: usize) -> (T, T) {
        let m = self.marginal(i);
        (
            self.priors[0] * self.cond[0][i] / m,
            self.priors[1] * self.cond[1][i] / m,
        )
    }

    /// Hahn split of `P(.|1) - P(.|2)` plus the pseudo-score.
    pub fn hahn_reduce(&self) -> Result<ReducedProblem<T>> {
        let tv = self.total_variation();
        if tv == T::zero() {
            return Err(Error::ZeroTotalVariation);
        }
        let m = self.len();
        let two = T::one() + T::one();
        let half = real::<T>(0.5);
        let mut q1 = vec![T::zero(); m];
        let mut q2 = vec![T::zero(); m];
        let mut eta_tilde = vec![None; m];
        let mut supp1 = Vec::new();
        let mut supp2 = Vec::new();
        let mut bayes_region = Vec::new();
        for i in 0..m {
            let diff = self.cond[0][i] - self.cond[1][i];
            if diff == T::zero() {
                bayes_region.push(i);
                continue;
            }
            if diff > T::zero() {
                q1[i] = diff / tv;
                supp1.push(i);
            } else {
                q2[i] = -diff / tv;
                supp2.push(i);
            }
            // |tau_1/p_1 - tau_2/p_2| = |P(x|1) - P(x|2)| / P(x)
            let gap = diff.abs() / self.marginal(i);
            eta_tilde[i] = Some(half + tv / two * (two * self.eta[i] - T::one()) / gap);
        }
        Ok(ReducedProblem {
            q_cond: [q1, q2],
            eta_tilde,
            bayes_region,
            supp1,
            supp2,
            tv,
        })
    }

    /// Risk `P(g != Y)` of a decision vector on this joint.
    pub fn risk(&self, assignments: &[bool]) -> T {
        compensated_sum((0..self.len()).map(|i| {
            let e = self.eta[i];
            let err = if assignments[i] { T::one() - e } else { e };
            self.marginal(i) * err
        }))
    }

    /// `| P(g=1 | S=1) - P(g=1 | S=2) |`.
    pub fn dp_residual(&self, assignments: &[bool]) -> T {
        let r1 = compensated_sum(
            (0..self.len()).filter(|&i| assignments[i]).map(|i| self.cond[0][i]),
        );
        let r2 = compensated_sum(
            (0..self.len()).filter(|&i| assignments[i]).map(|i| self.cond[1][i]),
        );
        (r1 - r2).abs()
    }

    /// Optimal unaware fair classifier.
    ///
    /// With `TV = 0` every unaware classifier is fair and the Bayes rule is
    /// returned pointwise. Otherwise the reduced aware problem is solved with
    /// the dual solver and the decision is assembled per region.
    pub fn solve_unaware(&self, tol: T) -> Result<UnawareSolution<T>> {
        let half = real::<T>(0.5);
        let tv = self.total_variation();
        if tv == T::zero() {
            let assignments: Vec<bool> = self.eta.iter().map(|&e| e >= half).collect();
            let dp_residual = self.dp_residual(&assignments);
            let risk = self.risk(&assignments);
            return Ok(UnawareSolution {
                assignments,
                bayes_everywhere: true,
                tv,
                dual: None,
                reduced: None,
                dp_residual,
                risk,
            });
        }
        let reduced = self.hahn_reduce()?;
        let mut samples = Vec::new();
        for (&i, group) in reduced
            .supp1
            .iter()
            .map(|i| (i, 0usize))
            .chain(reduced.supp2.iter().map(|i| (i, 1usize)))
        {
            let mut tau = vec![T::zero(); 2];
            tau[group] = T::one();
            samples.push(DualSample {
                eta: reduced.eta_tilde[i].expect("pseudo-score on the support"),
                tau,
                weight: half * reduced.q_cond[group][i],
            });
        }
        let problem = DualProblem::new(samples, vec![half, half])?;
        let dual = problem.solve(tol)?;

        let mut assignments = vec![false; self.len()];
        for &i in &reduced.supp1 {
            assignments[i] = dual.classify(reduced.eta_tilde[i].unwrap(), &[T::one(), T::zero()]);
        }
        for &i in &reduced.supp2 {
            assignments[i] = dual.classify(reduced.eta_tilde[i].unwrap(), &[T::zero(), T::one()]);
        }
        for &i in &reduced.bayes_region {
            assignments[i] = self.eta[i] >= half;
        }
        let dp_residual = self.dp_residual(&assignments);
        let risk = self.risk(&assignments);
        Ok(UnawareSolution {
            assignments,
            bayes_everywhere: false,
            tv,
            dual: Some(dual),
            reduced: Some(reduced),
            dp_residual,
            risk,
        })
    }

    /// Both sides of the change-of-measure identity restricted to the reduced
    /// region: `E_P[g (1 - 2 eta); union]` and `2 E_Q[g (1 - 2 eta~)]`.
    pub fn reduced_objective_identity(
        &self,
        reduced: &ReducedProblem<T>,
        assignments: &[bool],
    ) -> (T, T) {
        let one = T::one();
        let two = one + one;
        let half = real::<T>(0.5);
        let lhs = compensated_sum(
            reduced
                .supp1
                .iter()
                .chain(reduced.supp2.iter())
                .filter(|&&i| assignments[i])
                .map(|&i| self.marginal(i) * (one - two * self.eta[i])),
        );
        let rhs_q = compensated_sum(
            reduced
                .supp1
                .iter()
                .map(|&i| (i, reduced.q_cond[0][i]))
                .chain(reduced.supp2.iter().map(|&i| (i, reduced.q_cond[1][i])))
                .filter(|&(i, _)| assignments[i])
                .map(|(i, q)| {
                    half * q * (one - two * reduced.eta_tilde[i].unwrap())
                }),
        );
        (lhs, two * rhs_q)
    }
}
