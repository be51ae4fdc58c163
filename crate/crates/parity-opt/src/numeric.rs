//! Small numeric helpers shared across modules.

use crate::scalar::Real;

/// Compensated (Neumaier) summation; avoids the O(n·eps) drift of naive sums.
pub(crate) fn compensated_sum<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Outcome of [`bisect_rising`].
pub(crate) struct BisectionResult<T> {
    pub root: T,
    pub residual: T,
}

/// Bisection for a nondecreasing continuous `f` on `[lo, hi]` with
/// `f(lo) < 0 <= f(hi)`. Returns the smallest bracket endpoint where
/// `f >= 0`, refined until the bracket collapses to float resolution or the
/// iteration cap is hit. The caller is responsible for the sign checks at
/// the ends.
pub(crate) fn bisect_rising<T: Real>(
    mut lo: T,
    mut hi: T,
    f: impl Fn(T) -> T,
    cap: usize,
) -> BisectionResult<T> {
    let two = T::one() + T::one();
    let mut iterations = 0;
    while iterations < cap {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break; // bracket is one ulp wide
        }
        if f(mid) >= T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    BisectionResult {
        root: hi,
        residual: f(hi),
    }
}

/// Minimizer of `t -> sum_k mass_k * |t - kink_k|` (weighted median).
///
/// When the optimum is a flat interval between two kinks the midpoint of the
/// interval is returned, so that downstream threshold rules sit strictly
/// between data points instead of on them.
pub(crate) fn weighted_median<T: Real>(kinks_masses: &mut [(T, T)]) -> Option<T> {
    if kinks_masses.is_empty() {
        return None;
    }
    kinks_masses.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite kinks"));
    let total = compensated_sum(kinks_masses.iter().map(|&(_, m)| m));
    let flat_tol = crate::scalar::real::<T>(1e-12) * total.max(T::one());
    let two = T::one() + T::one();
    let mut cum = T::zero();
    for (j, &(kink, mass)) in kinks_masses.iter().enumerate() {
        cum += mass;
        let balance = two * cum - total;
        if balance.abs() <= flat_tol {
            // Exact balance at this kink: optimum is flat up to the next one.
            let next = kinks_masses.get(j + 1).map(|&(k, _)| k).unwrap_or(kink);
            return Some((kink + next) / two);
        }
        if balance > T::zero() {
            return Some(kink);
        }
    }
    Some(kinks_masses.last().unwrap().0)
}
