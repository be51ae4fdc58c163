//! Brute-force reference solvers. Deliberately simple and slow; used by the
//! test and acceptance suites as independent anchors for the analytic
//! solvers. None of them call the solver they validate.

use crate::barycenter::GroupedScores;
use crate::dist::WeightedSample1D;
use crate::error::{Error, Result};
use crate::lin_frac::LFMeasure;
use crate::scalar::Real;
use crate::unaware::DiscreteJoint2;

/// Enumeration cap for [`brute_force_unaware`].
pub const ENUMERATION_CAP: usize = 20;

fn utility_from_coeffs<T: Real>(n: &[T; 3], d: &[T; 3], ppj: T, pp: T) -> Option<T> {
    let den = d[0] + d[1] * ppj + d[2] * pp;
    if den <= crate::scalar::real::<T>(1e-15) {
        return None;
    }
    Some((n[0] + n[1] * ppj + n[2] * pp) / den)
}

/// Suffix sums of `w` and `w * a` keyed by the group's plotting ranks, so a
/// common-rank classifier's statistics come from one binary search per group.
struct GroupSuffix<T> {
    ranks: Vec<T>,
    suffix_w: Vec<T>,
    suffix_wa: Vec<T>,
}

impl<T: Real> GroupSuffix<T> {
    fn build(g: &WeightedSample1D<T>) -> Self {
        let n = g.len();
        let mut suffix_w = vec![T::zero(); n + 1];
        let mut suffix_wa = vec![T::zero(); n + 1];
        for i in (0..n).rev() {
            suffix_w[i] = suffix_w[i + 1] + g.weights()[i];
            suffix_wa[i] = suffix_wa[i + 1] + g.weights()[i] * g.atoms()[i];
        }
        GroupSuffix {
            ranks: g.plot_ranks().to_vec(),
            suffix_w,
            suffix_wa,
        }
    }

    /// Mass and score-mass of atoms with plotting rank >= gamma.
    fn at(&self, gamma: T) -> (T, T) {
        let i = self.ranks.partition_point(|&r| r < gamma);
        (self.suffix_w[i], self.suffix_wa[i])
    }
}

/// Sweeps common-rank classifiers over `grid` equispaced ranks plus every
/// atom's plotting rank and returns the utility maximizer (ties broken by the
/// smallest rank).
pub fn brute_force_fair_threshold<T: Real>(
    gs: &GroupedScores<T>,
    measure: &LFMeasure<T>,
    grid: usize,
) -> (T, T) {
    let suffixes: Vec<GroupSuffix<T>> = gs.groups().iter().map(GroupSuffix::build).collect();
    let mut candidates: Vec<T> = (0..=grid)
        .map(|i| T::from_usize(i).unwrap() / T::from_usize(grid).unwrap())
        .collect();
    for g in gs.groups() {
        candidates.extend_from_slice(g.plot_ranks());
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite ranks"));
    candidates.dedup();

    let (n, d) = (measure.numerator(), measure.denominator());
    let mut best: Option<(T, T)> = None;
    for &gamma in &candidates {
        let mut ppj = T::zero();
        let mut pp = T::zero();
        for (suffix, &prior) in suffixes.iter().zip(gs.priors()) {
            let (w, wa) = suffix.at(gamma);
            pp += prior * w;
            ppj += prior * wa;
        }
        let Some(u) = utility_from_coeffs(n, d, ppj, pp) else {
            continue;
        };
        match best {
            Some((_, bu)) if u <= bu => {}
            _ => best = Some((gamma, u)),
        }
    }
    best.expect("at least one candidate is in the measure's domain")
}

/// Sweeps raw-score thresholds for a single unconstrained group and returns
/// the utility maximizer (ties broken by the smallest threshold).
pub fn brute_force_threshold_unconstrained<T: Real>(
    scores: &WeightedSample1D<T>,
    measure: &LFMeasure<T>,
    grid: usize,
) -> (T, T) {
    let n_atoms = scores.len();
    let mut suffix_w = vec![T::zero(); n_atoms + 1];
    let mut suffix_wa = vec![T::zero(); n_atoms + 1];
    for i in (0..n_atoms).rev() {
        suffix_w[i] = suffix_w[i + 1] + scores.weights()[i];
        suffix_wa[i] = suffix_wa[i + 1] + scores.weights()[i] * scores.atoms()[i];
    }
    let mut candidates: Vec<T> = (0..=grid)
        .map(|i| T::from_usize(i).unwrap() / T::from_usize(grid).unwrap())
        .collect();
    candidates.extend_from_slice(scores.atoms());
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    candidates.dedup();

    let (n, d) = (measure.numerator(), measure.denominator());
    let mut best: Option<(T, T)> = None;
    for &theta in &candidates {
        let i = scores.atoms().partition_point(|&a| a < theta);
        let (pp, ppj) = (suffix_w[i], suffix_wa[i]);
        let Some(u) = utility_from_coeffs(n, d, ppj, pp) else {
            continue;
        };
        match best {
            Some((_, bu)) if u <= bu => {}
            _ => best = Some((theta, u)),
        }
    }
    best.expect("at least one candidate is in the measure's domain")
}

/// Enumerates all `2^m` decision vectors on the joint, keeps those with a
/// demographic-parity residual at most `eps`, and returns the risk minimizer
/// (first minimizer in mask order, i.e. the lexicographically smallest).
pub fn brute_force_unaware<T: Real>(
    joint: &DiscreteJoint2<T>,
    eps: T,
) -> Result<(Vec<bool>, T)> {
    let m = joint.len();
    if m > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            size: m,
            cap: ENUMERATION_CAP,
        });
    }
    // inline per-point quantities; the oracle stays independent of the
    // reduction machinery
    let marginal: Vec<T> = (0..m).map(|i| joint.marginal(i)).collect();
    let bayes_risk: T = (0..m).map(|i| marginal[i] * joint.eta()[i]).sum();
    let mut best: Option<(Vec<bool>, T)> = None;
    for mask in 0u64..(1u64 << m) {
        let decide = |i: usize| mask >> i & 1 == 1;
        let mut r1 = T::zero();
        let mut r2 = T::zero();
        let mut risk = bayes_risk;
        for (i, &pm) in marginal.iter().enumerate() {
            if decide(i) {
                r1 += joint.cond(0)[i];
                r2 += joint.cond(1)[i];
                risk += pm * (T::one() - (T::one() + T::one()) * joint.eta()[i]);
            }
        }
        if (r1 - r2).abs() > eps {
            continue;
        }
        let better = match &best {
            Some((_, br)) => risk < *br,
            None => true,
        };
        if better {
            best = Some(((0..m).map(decide).collect(), risk));
        }
    }
    best.ok_or(Error::NoFeasibleClassifier {
        tol: eps.to_f64().unwrap_or(f64::NAN),
    })
}
