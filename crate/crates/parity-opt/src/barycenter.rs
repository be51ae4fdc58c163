//! Wasserstein-2 barycenter of group-wise univariate measures.
//!
//! In one dimension the barycenter quantile is the prior-weighted average of
//! the group quantiles, so everything here reduces to quantile arithmetic on
//! the interpolated (strictly increasing) group quantiles: the barycenter
//! quantile itself, a grid discretization, the group-to-barycenter transport
//! map, and the rank where the barycenter quantile crosses a level.

use crate::dist::WeightedSample1D;
use crate::error::{Error, Result};
use crate::numeric::{bisect_rising, compensated_sum};
use crate::scalar::{real, Real};

/// Cap for the bisection used in rank solving; the bracket collapses to one
/// ulp long before this.
const BISECT_CAP: usize = 200;

/// Per-group score laws plus group priors.
#[derive(Debug, Clone)]
pub struct GroupedScores<T> {
    groups: Vec<WeightedSample1D<T>>,
    priors: Vec<T>,
}

impl<T: Real> GroupedScores<T> {
    /// `groups[s]` is the score law conditional on group `s`; `priors[s]` its
    /// mass. Priors must be positive and sum to one (same renormalization
    /// policy as sample weights).
    pub fn new(groups: Vec<WeightedSample1D<T>>, priors: Vec<T>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::EmptySample);
        }
        if groups.len() != priors.len() {
            return Err(Error::GroupCountMismatch {
                expected: groups.len(),
                got: priors.len(),
            });
        }
        let mut priors = priors;
        for (i, &p) in priors.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFiniteInput { index: i });
            }
            if p <= T::zero() {
                return Err(Error::NonPositiveWeight {
                    weight: p.to_f64().unwrap_or(f64::NAN),
                    index: i,
                });
            }
        }
        let sum = compensated_sum(priors.iter().copied());
        let off = (sum - T::one()).abs();
        if off > T::weight_tol() {
            if off > T::renorm_tol() {
                return Err(Error::WeightSumOutOfTolerance {
                    sum: sum.to_f64().unwrap_or(f64::NAN),
                });
            }
            for p in &mut priors {
                *p /= sum;
            }
        }
        Ok(Self { groups, priors })
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[WeightedSample1D<T>] {
        &self.groups
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }

    pub fn group(&self, s: usize) -> Result<&WeightedSample1D<T>> {
        self.groups.get(s).ok_or(Error::GroupIndexOutOfRange {
            index: s,
            groups: self.groups.len(),
        })
    }

    /// Prior-weighted mean over all groups.
    pub fn weighted_mean(&self) -> T {
        compensated_sum(
            self.groups
                .iter()
                .zip(self.priors.iter())
                .map(|(g, &p)| p * g.mean()),
        )
    }

    /// Smallest group size; the granularity of empirical rank statements.
    pub fn min_group_len(&self) -> usize {
        self.groups.iter().map(|g| g.len()).min().unwrap()
    }

    /// Quantile of the barycenter at rank `p`: the prior-weighted average of
    /// the interpolated group quantiles.
    pub fn barycenter_quantile(&self, p: T) -> Result<T> {
        let mut acc = T::zero();
        for (g, &prior) in self.groups.iter().zip(self.priors.iter()) {
            acc += prior * g.interp_quantile(p)?;
        }
        Ok(acc)
    }

    /// Discretization of the barycenter: `m` atoms at the mid-cell ranks
    /// `(i - 1/2) / m`, uniform weights.
    pub fn barycenter_distribution(&self, m: usize) -> Result<WeightedSample1D<T>> {
        if m == 0 {
            return Err(Error::EmptySample);
        }
        let mf = T::from_usize(m).unwrap();
        let w = T::one() / mf;
        let half = real::<T>(0.5);
        let pairs: Result<Vec<(T, T)>> = (0..m)
            .map(|i| {
                let rank = (T::from_usize(i).unwrap() + half) / mf;
                Ok((self.barycenter_quantile(rank)?, w))
            })
            .collect();
        WeightedSample1D::from_pairs(pairs?)
    }

    /// Optimal transport of a group-`s` score to the barycenter:
    /// `barycenter_quantile(interp_cdf_s(t))`, with `t` clamped to the
    /// group's atom range first. Strictly increasing in `t` on that range.
    pub fn transport_map(&self, s: usize, t: T) -> Result<T> {
        let g = self.group(s)?;
        let t = t.max(g.min_atom()).min(g.max_atom());
        let rank = g.interp_cdf(t)?;
        self.barycenter_quantile(rank)
    }

    /// Smallest rank where the barycenter quantile reaches `level`; clamps to
    /// 0 or 1 when the quantile range does not straddle the level.
    pub fn barycenter_rank_of(&self, level: T) -> Result<T> {
        let at0 = self.barycenter_quantile(T::zero())?;
        if at0 >= level {
            return Ok(T::zero());
        }
        if self.barycenter_quantile(T::one())? < level {
            return Ok(T::one());
        }
        let r = bisect_rising(
            T::zero(),
            T::one(),
            |p| self.barycenter_quantile(p).expect("rank in [0,1]") - level,
            BISECT_CAP,
        );
        debug_assert!(r.residual.abs() <= T::root_tol());
        Ok(r.root)
    }

    /// The rank where the barycenter quantile crosses 1/2 (the common
    /// within-group rank of the half-threshold fair classifier).
    pub fn solve_gamma_star(&self) -> Result<T> {
        self.barycenter_rank_of(real::<T>(0.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(atoms: &[f64]) -> WeightedSample1D<f64> {
        WeightedSample1D::from_samples(atoms).unwrap()
    }

    /// Two uniform four-atom groups offset by 0.2, equal priors.
    fn asymmetric_pair() -> GroupedScores<f64> {
        GroupedScores::new(
            vec![
                uniform(&[0.1, 0.3, 0.5, 0.7]),
                uniform(&[0.3, 0.5, 0.7, 0.9]),
            ],
            vec![0.5, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn single_group_barycenter_is_itself() {
        let g = uniform(&[0.2, 0.4, 0.6, 0.8]);
        let gs = GroupedScores::new(vec![g.clone()], vec![1.0]).unwrap();
        for p in [0.0, 0.125, 0.4, 0.875, 1.0] {
            assert_eq!(
                gs.barycenter_quantile(p).unwrap(),
                g.interp_quantile(p).unwrap()
            );
        }
        let bary = gs.barycenter_distribution(4).unwrap();
        for (b, a) in bary.atoms().iter().zip(g.atoms()) {
            assert!((b - a).abs() <= 1e-12);
        }
    }

    #[test]
    fn quantile_average_at_matched_rank() {
        let gs = asymmetric_pair();
        // plotting rank of the first atom is 1/8; average of 0.1 and 0.3
        assert!((gs.barycenter_quantile(0.125).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn identical_groups_average_to_themselves() {
        let g = uniform(&[0.15, 0.45, 0.95]);
        let gs = GroupedScores::new(vec![g.clone(), g.clone()], vec![0.25, 0.75]).unwrap();
        for p in [0.1, 0.5, 0.77] {
            assert!(
                (gs.barycenter_quantile(p).unwrap() - g.interp_quantile(p).unwrap()).abs()
                    <= 1e-15
            );
        }
    }

    #[test]
    fn discretization_of_symmetric_pair() {
        let gs = asymmetric_pair();
        let bary = gs.barycenter_distribution(4).unwrap();
        let expected = [0.2, 0.4, 0.6, 0.8];
        for (b, e) in bary.atoms().iter().zip(expected.iter()) {
            assert!((b - e).abs() < 1e-15);
        }
    }

    #[test]
    fn barycenter_beats_input_measures_as_candidate() {
        // the discretized barycenter should have a lower weighted squared-W2
        // objective than any of the input measures used as the candidate
        let gs = asymmetric_pair();
        let bary = gs.barycenter_distribution(64).unwrap();
        let objective = |cand: &WeightedSample1D<f64>| -> f64 {
            gs.groups()
                .iter()
                .zip(gs.priors())
                .map(|(g, &p)| p * g.w2(cand).powi(2))
                .sum()
        };
        let at_bary = objective(&bary);
        for g in gs.groups() {
            assert!(at_bary <= objective(g) + 1e-12);
        }
    }

    #[test]
    fn transport_identity_cases() {
        let g = uniform(&[0.2, 0.4, 0.6, 0.8]);
        let gs = GroupedScores::new(vec![g.clone()], vec![1.0]).unwrap();
        for &a in g.atoms() {
            assert!((gs.transport_map(0, a).unwrap() - a).abs() <= 1e-12);
        }
        let twin = GroupedScores::new(vec![g.clone(), g.clone()], vec![0.5, 0.5]).unwrap();
        for &a in g.atoms() {
            assert!((twin.transport_map(1, a).unwrap() - a).abs() <= 1e-12);
        }
    }

    #[test]
    fn transport_asymmetric_example() {
        let gs = asymmetric_pair();
        assert!((gs.transport_map(0, 0.1).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn transport_clamps_out_of_range_scores() {
        let gs = asymmetric_pair();
        assert_eq!(
            gs.transport_map(0, -3.0).unwrap(),
            gs.transport_map(0, 0.1).unwrap()
        );
        assert_eq!(
            gs.transport_map(0, 2.0).unwrap(),
            gs.transport_map(0, 0.7).unwrap()
        );
    }

    #[test]
    fn gamma_star_symmetric_pair() {
        let gs = asymmetric_pair();
        assert!((gs.solve_gamma_star().unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn gamma_star_clamps_when_all_mass_above_half() {
        let gs =
            GroupedScores::new(vec![uniform(&[0.6, 0.7, 0.9])], vec![1.0]).unwrap();
        assert_eq!(gs.solve_gamma_star().unwrap(), 0.0);
        let gs = GroupedScores::new(vec![uniform(&[0.1, 0.2])], vec![1.0]).unwrap();
        assert_eq!(gs.solve_gamma_star().unwrap(), 1.0);
    }

    #[test]
    fn gamma_star_linear_segment_root() {
        let gs = GroupedScores::new(vec![uniform(&[0.0, 1.0])], vec![1.0]).unwrap();
        assert!((gs.solve_gamma_star().unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn degenerate_group_is_rejected_by_quantile_ops() {
        let gs = GroupedScores::new(
            vec![
                WeightedSample1D::from_pairs([(0.5, 1.0)]).unwrap(),
                uniform(&[0.1, 0.9]),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!(matches!(
            gs.barycenter_quantile(0.5),
            Err(Error::DegenerateDistribution)
        ));
    }

    #[test]
    fn mean_preservation_under_matched_ranks() {
        let gs = asymmetric_pair();
        let mut pushed = 0.0;
        for s in 0..gs.k() {
            let push = gs.groups()[s]
                .pushforward(|t| gs.transport_map(s, t).unwrap())
                .unwrap();
            pushed += gs.priors()[s] * push.mean();
        }
        assert!((pushed - gs.weighted_mean()).abs() <= 1e-10);
    }
}
