//! Univariate weighted empirical measures.
//!
//! [`WeightedSample1D`] is the carrier for every score law in the crate:
//! sorted distinct atoms with positive weights summing to one. It exposes the
//! step CDF/quantile pair, a strictly increasing piecewise-linear surrogate
//! (`interp_cdf` / `interp_quantile`, plotting-rank construction), the exact
//! Wasserstein-2 distance between step quantiles, the Kolmogorov-Smirnov
//! distance, and pushforward through a map.
//!
//! All values are immutable after construction and all operations are pure.

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::scalar::{real, Real};

/// A univariate empirical measure: sorted atoms with positive weights.
///
/// Duplicate atom values are merged (weights summed) at construction, so the
/// atom sequence is strictly increasing. Weight sums within `weight_tol` of 1
/// are kept as given; sums within `renorm_tol` are renormalized; anything
/// farther off is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample1D<T> {
    atoms: Vec<T>,
    weights: Vec<T>,
    /// Prefix sums of weights (compensated), `cum[i] = w_0 + .. + w_i`.
    cum: Vec<T>,
    /// Plotting ranks `r_i = cum_{i-1} + w_i / 2`; strictly increasing.
    ranks: Vec<T>,
    /// Prefix sums of `w_i * a_i` (compensated).
    prefix_wa: Vec<T>,
}

impl<T: Real> WeightedSample1D<T> {
    /// Builds a measure from `(value, weight)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        let mut pairs: Vec<(T, T)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        for (i, &(a, w)) in pairs.iter().enumerate() {
            if !a.is_finite() || !w.is_finite() {
                return Err(Error::NonFiniteInput { index: i });
            }
            if w <= T::zero() {
                return Err(Error::NonPositiveWeight {
                    weight: w.to_f64().unwrap_or(f64::NAN),
                    index: i,
                });
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite atoms"));

        // Merge exactly equal atoms so the sequence is strictly increasing.
        let mut atoms: Vec<T> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<T> = Vec::with_capacity(pairs.len());
        for (a, w) in pairs {
            match atoms.last() {
                Some(&last) if last == a => {
                    let n = weights.len();
                    weights[n - 1] += w;
                }
                _ => {
                    atoms.push(a);
                    weights.push(w);
                }
            }
        }

        let sum = compensated_sum(weights.iter().copied());
        let off = (sum - T::one()).abs();
        if off > T::weight_tol() {
            if off > T::renorm_tol() {
                return Err(Error::WeightSumOutOfTolerance {
                    sum: sum.to_f64().unwrap_or(f64::NAN),
                });
            }
            for w in &mut weights {
                *w /= sum;
            }
        }

        Self::from_sorted_merged(atoms, weights)
    }

    /// Builds a uniformly weighted measure from raw samples.
    pub fn from_samples(values: &[T]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        let w = T::one() / T::from_usize(values.len()).unwrap();
        Self::from_pairs(values.iter().map(|&v| (v, w)))
    }

    fn from_sorted_merged(atoms: Vec<T>, weights: Vec<T>) -> Result<Self> {
        let two = T::one() + T::one();
        let n = atoms.len();
        let mut cum = Vec::with_capacity(n);
        let mut prefix_wa = Vec::with_capacity(n);
        let mut ranks = Vec::with_capacity(n);
        let mut sum = T::zero();
        let mut comp = T::zero();
        let mut sum_wa = T::zero();
        let mut comp_wa = T::zero();
        for i in 0..n {
            ranks.push(sum + comp + weights[i] / two);
            let add = |s: &mut T, c: &mut T, v: T| {
                let t = *s + v;
                if s.abs() >= v.abs() {
                    *c += (*s - t) + v;
                } else {
                    *c += (v - t) + *s;
                }
                *s = t;
            };
            add(&mut sum, &mut comp, weights[i]);
            cum.push(sum + comp);
            add(&mut sum_wa, &mut comp_wa, weights[i] * atoms[i]);
            prefix_wa.push(sum_wa + comp_wa);
        }
        for i in 1..n {
            if ranks[i] <= ranks[i - 1] {
                // Weights too small to separate plotting ranks in this float type.
                return Err(Error::NonPositiveWeight {
                    weight: weights[i].to_f64().unwrap_or(f64::NAN),
                    index: i,
                });
            }
        }
        Ok(Self {
            atoms,
            weights,
            cum,
            ranks,
            prefix_wa,
        })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty samples
    }

    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Plotting ranks of the atoms, `r_i = sum_{j<i} w_j + w_i / 2`.
    pub fn plot_ranks(&self) -> &[T] {
        &self.ranks
    }

    pub fn min_atom(&self) -> T {
        self.atoms[0]
    }

    pub fn max_atom(&self) -> T {
        *self.atoms.last().unwrap()
    }

    /// Weighted mean of the atoms.
    pub fn mean(&self) -> T {
        *self.prefix_wa.last().unwrap()
    }

    /// Step CDF: mass of `(-inf, x]`, right-continuous. The stored prefix
    /// sums can overshoot 1 by an ulp, so the output is capped.
    pub fn cdf(&self, x: T) -> T {
        let k = self.atoms.partition_point(|&a| a <= x);
        if k == 0 {
            T::zero()
        } else {
            self.cum[k - 1].min(T::one())
        }
    }

    /// Generalized inverse of the step CDF: `min { x : cdf(x) >= p }`.
    pub fn quantile(&self, p: T) -> Result<T> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::RankOutOfRange {
                rank: p.to_f64().unwrap_or(f64::NAN),
            });
        }
        let k = self.cum.partition_point(|&c| c < p);
        Ok(self.atoms[k.min(self.atoms.len() - 1)])
    }

    fn require_nondegenerate(&self) -> Result<()> {
        if self.atoms.len() < 2 {
            return Err(Error::DegenerateDistribution);
        }
        Ok(())
    }

    /// Strictly increasing continuous surrogate of the CDF.
    ///
    /// Piecewise linear through the (atom, plotting rank) pairs; the input is
    /// clamped to `[min_atom, max_atom]`, so the range is
    /// `[w_0/2, 1 - w_{n-1}/2]`. Exact inverse of [`interp_quantile`] there.
    pub fn interp_cdf(&self, x: T) -> Result<T> {
        self.require_nondegenerate()?;
        let x = x.max(self.min_atom()).min(self.max_atom());
        match self
            .atoms
            .binary_search_by(|a| a.partial_cmp(&x).expect("finite atoms"))
        {
            Ok(i) => Ok(self.ranks[i]),
            Err(i) => {
                // x lies strictly between atoms[i-1] and atoms[i].
                let (a0, a1) = (self.atoms[i - 1], self.atoms[i]);
                let (r0, r1) = (self.ranks[i - 1], self.ranks[i]);
                Ok(r0 + (x - a0) / (a1 - a0) * (r1 - r0))
            }
        }
    }

    /// Inverse of [`interp_cdf`]: piecewise linear through the
    /// (plotting rank, atom) pairs, clamped to the boundary atoms on
    /// `[0, w_0/2]` and `[1 - w_{n-1}/2, 1]`.
    pub fn interp_quantile(&self, p: T) -> Result<T> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::RankOutOfRange {
                rank: p.to_f64().unwrap_or(f64::NAN),
            });
        }
        self.require_nondegenerate()?;
        if p <= self.ranks[0] {
            return Ok(self.atoms[0]);
        }
        if p >= *self.ranks.last().unwrap() {
            return Ok(*self.atoms.last().unwrap());
        }
        match self
            .ranks
            .binary_search_by(|r| r.partial_cmp(&p).expect("finite ranks"))
        {
            Ok(i) => Ok(self.atoms[i]),
            Err(i) => {
                let (r0, r1) = (self.ranks[i - 1], self.ranks[i]);
                let (a0, a1) = (self.atoms[i - 1], self.atoms[i]);
                Ok(a0 + (p - r0) / (r1 - r0) * (a1 - a0))
            }
        }
    }

    /// Wasserstein-2 distance, computed exactly on the common refinement of
    /// the two step-quantile partitions.
    pub fn w2(&self, other: &Self) -> T {
        let mut acc = T::zero();
        let mut lo = T::zero();
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let ci = self.cum[i];
            let cj = other.cum[j];
            let hi = ci.min(cj);
            if hi > lo {
                let d = self.atoms[i] - other.atoms[j];
                acc += d * d * (hi - lo);
                lo = hi;
            }
            let step_i = ci <= hi && i + 1 < self.atoms.len();
            let step_j = cj <= hi && j + 1 < other.atoms.len();
            if step_i {
                i += 1;
            }
            if step_j {
                j += 1;
            }
            if !step_i && !step_j {
                break;
            }
        }
        acc.max(T::zero()).sqrt()
    }

    /// Kolmogorov-Smirnov distance between the step CDFs: the supremum is
    /// attained at an atom of one of the measures.
    pub fn ks_distance(&self, other: &Self) -> T {
        let mut sup = T::zero();
        for &a in self.atoms.iter().chain(other.atoms.iter()) {
            let d = (self.cdf(a) - other.cdf(a)).abs();
            if d > sup {
                sup = d;
            }
        }
        sup
    }

    /// Image measure under `t`; equal images are merged. `t` is expected to
    /// be monotone nondecreasing, but any map yields a valid measure since
    /// the result is re-sorted.
    pub fn pushforward(&self, t: impl Fn(T) -> T) -> Result<Self> {
        Self::from_pairs(
            self.atoms
                .iter()
                .zip(self.weights.iter())
                .map(|(&a, &w)| (t(a), w)),
        )
    }

    /// `E[(X - theta)_+]`, exact via suffix sums.
    pub fn positive_part_mean(&self, theta: T) -> T {
        let k = self.atoms.partition_point(|&a| a <= theta);
        if k == self.atoms.len() {
            return T::zero();
        }
        let wa_below = if k == 0 { T::zero() } else { self.prefix_wa[k - 1] };
        let w_below = if k == 0 { T::zero() } else { self.cum[k - 1] };
        let wa_above = *self.prefix_wa.last().unwrap() - wa_below;
        let w_above = *self.cum.last().unwrap() - w_below;
        (wa_above - theta * w_above).max(T::zero())
    }
}

/// Convenience for tests and diagnostics: machine-tolerance equality.
pub fn approx_eq<T: Real>(a: T, b: T, tol: f64) -> bool {
    (a - b).abs() <= real::<T>(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(atoms: &[f64], weights: &[f64]) -> WeightedSample1D<f64> {
        WeightedSample1D::from_pairs(atoms.iter().copied().zip(weights.iter().copied())).unwrap()
    }

    fn uniform(atoms: &[f64]) -> WeightedSample1D<f64> {
        WeightedSample1D::from_samples(atoms).unwrap()
    }

    #[test]
    fn cdf_between_and_at_atoms() {
        let m = d(&[0.2, 0.8], &[0.5, 0.5]);
        assert_eq!(m.cdf(0.5), 0.5);
        assert_eq!(m.cdf(0.8), 1.0);
        assert_eq!(m.cdf(0.1), 0.0);
        // direct summation oracle: two of four atoms are <= 0.3
        let m = uniform(&[0.1, 0.3, 0.5, 0.7]);
        assert_eq!(m.cdf(0.3), 0.5);
    }

    #[test]
    fn quantile_generalized_inverse() {
        let m = d(&[0.2, 0.8], &[0.5, 0.5]);
        assert_eq!(m.quantile(0.5).unwrap(), 0.2);
        assert_eq!(m.quantile(0.51).unwrap(), 0.8);
        assert_eq!(m.quantile(0.0).unwrap(), 0.2);
        let point = d(&[1.0], &[1.0]);
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(point.quantile(p).unwrap(), 1.0);
        }
        assert!(m.quantile(1.5).is_err());
    }

    #[test]
    fn galois_inequality_at_atoms() {
        let m = d(&[0.1, 0.4, 0.9], &[0.2, 0.3, 0.5]);
        for &a in m.atoms() {
            assert_eq!(m.quantile(m.cdf(a)).unwrap(), a);
        }
    }

    #[test]
    fn interp_cdf_midpoint_of_segment() {
        let m = d(&[0.2, 0.8], &[0.5, 0.5]);
        assert!((m.interp_cdf(0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn interp_pair_inverse_roundtrip() {
        let m = d(&[0.2, 0.8], &[0.5, 0.5]);
        let x = 0.37;
        let back = m.interp_quantile(m.interp_cdf(x).unwrap()).unwrap();
        assert!((back - x).abs() <= 1e-12);
    }

    #[test]
    fn interp_quantile_lower_clamp() {
        let m = d(&[0.0, 1.0], &[0.5, 0.5]);
        assert_eq!(m.interp_quantile(0.25).unwrap(), 0.0);
        assert_eq!(m.interp_quantile(0.0).unwrap(), 0.0);
        assert_eq!(m.interp_quantile(1.0).unwrap(), 1.0);
    }

    #[test]
    fn interp_requires_two_atoms() {
        let point = d(&[1.0], &[1.0]);
        assert!(matches!(
            point.interp_cdf(0.5),
            Err(Error::DegenerateDistribution)
        ));
        assert!(matches!(
            point.interp_quantile(0.5),
            Err(Error::DegenerateDistribution)
        ));
    }

    #[test]
    fn duplicate_atoms_are_merged() {
        let m = d(&[0.3, 0.3, 0.7], &[0.25, 0.25, 0.5]);
        assert_eq!(m.len(), 2);
        assert_eq!(m.weights()[0], 0.5);
    }

    #[test]
    fn weight_normalization_policy() {
        // off by 1e-10: renormalized
        let m = WeightedSample1D::from_pairs([(0.0, 0.5 + 5e-11), (1.0, 0.5 + 5e-11)]).unwrap();
        let s: f64 = m.weights().iter().sum();
        assert!((s - 1.0).abs() <= 1e-12);
        // off by 1e-3: rejected
        assert!(matches!(
            WeightedSample1D::from_pairs([(0.0, 0.5), (1.0, 0.501)]),
            Err(Error::WeightSumOutOfTolerance { .. })
        ));
        assert!(matches!(
            WeightedSample1D::from_pairs([(0.0, -0.5), (1.0, 1.5)]),
            Err(Error::NonPositiveWeight { .. })
        ));
    }

    #[test]
    fn w2_point_masses_and_identity() {
        let a = d(&[0.3], &[1.0]);
        let b = d(&[0.9], &[1.0]);
        assert!((a.w2(&b) - 0.6).abs() < 1e-15);
        let m = uniform(&[0.1, 0.5, 0.9]);
        assert_eq!(m.w2(&m), 0.0);
    }

    #[test]
    fn w2_shifted_uniform_pair() {
        // exact piecewise integral oracle: both quantiles are steps two apart
        let a = uniform(&[0.0, 1.0]);
        let b = uniform(&[2.0, 3.0]);
        assert!((a.w2(&b) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn w2_unequal_partitions() {
        // refinement oracle computed by hand:
        // F1^{-1} = 0 on [0,.5), 1 on [.5,1); F2^{-1} = 0 on [0,.25), 2 on [.25,1)
        // integral = .25*0 + .25*4 + .5*1 = 1.5
        let a = uniform(&[0.0, 1.0]);
        let b = d(&[0.0, 2.0], &[0.25, 0.75]);
        assert!((a.w2(&b) - 1.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ks_examples() {
        let m = uniform(&[0.0, 1.0]);
        assert_eq!(m.ks_distance(&m), 0.0);
        let d0 = d(&[0.0], &[1.0]);
        let d1 = d(&[1.0], &[1.0]);
        assert_eq!(d0.ks_distance(&d1), 1.0);
        let a = uniform(&[0.0, 1.0]);
        let b = uniform(&[0.5, 1.0]);
        assert_eq!(a.ks_distance(&b), 0.5);
    }

    #[test]
    fn pushforward_identity_scaling_constant() {
        let m = d(&[1.0, 2.0], &[0.5, 0.5]);
        let id = m.pushforward(|x| x).unwrap();
        assert_eq!(id.atoms(), m.atoms());
        let twice = m.pushforward(|x| 2.0 * x).unwrap();
        assert_eq!(twice.atoms(), &[2.0, 4.0]);
        assert_eq!(twice.weights(), &[0.5, 0.5]);
        let c = m.pushforward(|_| 3.5).unwrap();
        assert_eq!(c.atoms(), &[3.5]);
        assert_eq!(c.weights(), &[1.0]);
    }

    #[test]
    fn positive_part_mean_piecewise() {
        let m = uniform(&[0.2, 0.4, 0.6, 0.8]);
        assert!((m.positive_part_mean(0.0) - 0.5).abs() < 1e-15);
        assert!((m.positive_part_mean(0.5) - 0.1).abs() < 1e-15);
        assert!((m.positive_part_mean(0.36) - (0.04 + 0.24 + 0.44) / 4.0).abs() < 1e-15);
        assert_eq!(m.positive_part_mean(0.9), 0.0);
    }

    #[test]
    fn interp_rank_domain_checked() {
        let m = d(&[0.2, 0.8], &[0.5, 0.5]);
        assert!(matches!(
            m.interp_quantile(-0.1),
            Err(Error::RankOutOfRange { .. })
        ));
        assert!(matches!(
            m.interp_quantile(1.1),
            Err(Error::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn f32_instantiation_smoke() {
        let m = WeightedSample1D::<f32>::from_samples(&[0.25f32, 0.75]).unwrap();
        assert!((m.cdf(0.5) - 0.5).abs() < 1e-6);
        assert!((m.interp_cdf(0.5).unwrap() - 0.5).abs() < 1e-6);

        let gs = crate::barycenter::GroupedScores::new(
            vec![
                WeightedSample1D::<f32>::from_samples(&[0.1, 0.3, 0.5, 0.7]).unwrap(),
                WeightedSample1D::<f32>::from_samples(&[0.3, 0.5, 0.7, 0.9]).unwrap(),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!((gs.solve_gamma_star().unwrap() - 0.5).abs() < 1e-5);
    }
}
