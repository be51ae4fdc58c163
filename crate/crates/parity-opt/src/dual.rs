//! Lagrangian dual of fair classification: a weighted least-absolute-deviations
//! fit over the zero-sum hyperplane.
//!
//! The optimal demographic-parity classifier is `1{ 2*eta - 1 >= sum_s
//! lambda_s * tau_s / p_s }` where `lambda` minimizes
//! `E | 2*eta - 1 - sum_s lambda_s * tau_s / p_s |` subject to
//! `sum_s lambda_s = 0`. With indicator `tau` this covers the group-aware
//! case; with posterior `tau` the group-unaware one.
//!
//! On a finite weighted sample the objective is piecewise linear and convex
//! in `lambda`, so an optimum lies on kink intersections. The solver runs
//! exact line minimizations (weighted medians) over a fixed direction set,
//! takes midpoints of flat optima so induced thresholds fall strictly between
//! data points, and certifies the result through one-sided directional
//! derivatives. For more than three groups a Polyak-averaged subgradient
//! warm start precedes the exact polishing.

use std::io::Read;

use crate::barycenter::GroupedScores;
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, weighted_median};
use crate::scalar::{real, Real};

/// One observation: a score, the posterior over groups, and a weight.
#[derive(Debug, Clone)]
pub struct DualSample<T> {
    pub eta: T,
    pub tau: Vec<T>,
    pub weight: T,
}

/// A weighted sample of `(eta, tau)` pairs plus group priors.
#[derive(Debug, Clone)]
pub struct DualProblem<T> {
    samples: Vec<DualSample<T>>,
    priors: Vec<T>,
}

/// Minimizer of the dual objective on the zero-sum hyperplane.
#[derive(Debug, Clone)]
pub struct DualSolution<T> {
    pub lambda: Vec<T>,
    pub objective: T,
    pub converged: bool,
    pub iterations: usize,
    priors: Vec<T>,
}

impl<T: Real> DualSolution<T> {
    /// `1 { 2*eta - 1 >= sum_s lambda_s * tau_s / p_s }`.
    pub fn classify(&self, eta: T, tau: &[T]) -> bool {
        let two = T::one() + T::one();
        let shift = compensated_sum(
            self.lambda
                .iter()
                .zip(tau.iter().zip(self.priors.iter()))
                .map(|(&l, (&t, &p))| l * t / p),
        );
        two * eta - T::one() >= shift
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }
}

impl<T: Real> DualProblem<T> {
    pub fn new(samples: Vec<DualSample<T>>, priors: Vec<T>) -> Result<Self> {
        if priors.is_empty() || samples.is_empty() {
            return Err(Error::InvalidDual("empty sample or prior vector".into()));
        }
        let k = priors.len();
        for (i, &p) in priors.iter().enumerate() {
            if !(p > T::zero()) || !p.is_finite() {
                return Err(Error::NonPositiveWeight {
                    weight: p.to_f64().unwrap_or(f64::NAN),
                    index: i,
                });
            }
        }
        let psum = compensated_sum(priors.iter().copied());
        if (psum - T::one()).abs() > T::renorm_tol() {
            return Err(Error::WeightSumOutOfTolerance {
                sum: psum.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mut samples = samples;
        for (i, s) in samples.iter().enumerate() {
            if s.tau.len() != k {
                return Err(Error::InvalidDual(format!(
                    "sample {i} has {} posterior entries, expected {k}",
                    s.tau.len()
                )));
            }
            if !s.eta.is_finite() || !s.weight.is_finite() || s.weight <= T::zero() {
                return Err(Error::InvalidDual(format!(
                    "sample {i} has a non-finite score or non-positive weight"
                )));
            }
            if s.tau.iter().any(|&t| t < T::zero()) {
                return Err(Error::InvalidDual(format!(
                    "sample {i} has a negative posterior entry"
                )));
            }
            let tsum = compensated_sum(s.tau.iter().copied());
            if (tsum - T::one()).abs() > T::weight_tol() {
                return Err(Error::InvalidDual(format!(
                    "sample {i} posterior sums to {}",
                    tsum.to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
        let wsum = compensated_sum(samples.iter().map(|s| s.weight));
        let off = (wsum - T::one()).abs();
        if off > T::weight_tol() {
            if off > T::renorm_tol() {
                return Err(Error::WeightSumOutOfTolerance {
                    sum: wsum.to_f64().unwrap_or(f64::NAN),
                });
            }
            for s in &mut samples {
                s.weight /= wsum;
            }
        }
        // posteriors must reproduce the priors on average
        for (s, &prior) in priors.iter().enumerate() {
            let marginal = compensated_sum(samples.iter().map(|r| r.weight * r.tau[s]));
            if (marginal - prior).abs() > real::<T>(1e-9) {
                return Err(Error::InvalidDual(format!(
                    "posterior marginal {} disagrees with prior {} for group {s}",
                    marginal.to_f64().unwrap_or(f64::NAN),
                    prior.to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
        Ok(Self { samples, priors })
    }

    /// Group-aware problem: one sample per atom, indicator posteriors.
    pub fn from_grouped(gs: &GroupedScores<T>) -> Result<Self> {
        let k = gs.k();
        let mut samples = Vec::new();
        for (s, (g, &prior)) in gs.groups().iter().zip(gs.priors()).enumerate() {
            for (&a, &w) in g.atoms().iter().zip(g.weights()) {
                let mut tau = vec![T::zero(); k];
                tau[s] = T::one();
                samples.push(DualSample {
                    eta: a,
                    tau,
                    weight: prior * w,
                });
            }
        }
        Self::new(samples, gs.priors().to_vec())
    }

    pub fn k(&self) -> usize {
        self.priors.len()
    }

    pub fn samples(&self) -> &[DualSample<T>] {
        &self.samples
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }

    /// Hyperplane-form objective `sum_k w_k |2 eta_k - 1 - lambda . tau_k/p|`.
    pub fn objective(&self, lambda: &[T]) -> T {
        let two = T::one() + T::one();
        compensated_sum(self.samples.iter().map(|r| {
            let shift = compensated_sum(
                lambda
                    .iter()
                    .zip(r.tau.iter().zip(self.priors.iter()))
                    .map(|(&l, (&t, &p))| l * t / p),
            );
            r.weight * (two * r.eta - T::one() - shift).abs()
        }))
    }

    /// Raw objective `sum_k w_k |2 eta_k - 1 + sum_s lambda_s (1 - tau_ks/p_s)|`,
    /// invariant under `lambda -> lambda + c * priors`.
    pub fn raw_objective(&self, lambda: &[T]) -> T {
        let two = T::one() + T::one();
        compensated_sum(self.samples.iter().map(|r| {
            let shift = compensated_sum(
                lambda
                    .iter()
                    .zip(r.tau.iter().zip(self.priors.iter()))
                    .map(|(&l, (&t, &p))| l * (T::one() - t / p)),
            );
            r.weight * (two * r.eta - T::one() + shift).abs()
        }))
    }

    /// Demographic-parity residuals of the induced classifier:
    /// `| E[tau_s/p_s 1{g=1}] - P(g=1) |` per group.
    pub fn check_foc(&self, sol: &DualSolution<T>) -> Vec<T> {
        let k = self.k();
        let mut rate = T::zero();
        let mut group_rates = vec![T::zero(); k];
        for r in &self.samples {
            if sol.classify(r.eta, &r.tau) {
                rate += r.weight;
                for ((g, &t), &p) in group_rates.iter_mut().zip(&r.tau).zip(&self.priors) {
                    *g += r.weight * t / p;
                }
            }
        }
        group_rates.iter().map(|&g| (g - rate).abs()).collect()
    }

    /// Minimizes the dual objective over the zero-sum hyperplane.
    pub fn solve(&self, tol: T) -> Result<DualSolution<T>> {
        let k = self.k();
        if k == 1 {
            let lambda = vec![T::zero()];
            let objective = self.objective(&lambda);
            return Ok(DualSolution {
                lambda,
                objective,
                converged: true,
                iterations: 0,
                priors: self.priors.clone(),
            });
        }
        Solver::new(self, tol).run()
    }
}

impl DualProblem<f64> {
    /// Reads `eta,tau_1..tau_K[,weight]` rows; priors are the weighted
    /// posterior marginals.
    pub fn from_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Malformed {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let mut tau_cols = Vec::new();
        let mut eta_col = None;
        let mut weight_col = None;
        for (i, h) in headers.iter().enumerate() {
            if h == "eta" {
                eta_col = Some(i);
            } else if let Some(idx) = h.strip_prefix("tau_") {
                let parsed: usize = idx.parse().map_err(|_| Error::Malformed {
                    line: 1,
                    message: format!("bad tau column name {h}"),
                })?;
                tau_cols.push((parsed, i));
            } else if h == "weight" {
                weight_col = Some(i);
            } else {
                return Err(Error::Malformed {
                    line: 1,
                    message: format!("unexpected column {h}"),
                });
            }
        }
        let eta_col = eta_col.ok_or(Error::Malformed {
            line: 1,
            message: "missing eta column".into(),
        })?;
        tau_cols.sort();
        for (want, &(got, _)) in tau_cols.iter().enumerate().map(|(i, c)| (i + 1, c)) {
            if want != got {
                return Err(Error::Malformed {
                    line: 1,
                    message: "tau columns must be tau_1..tau_K".into(),
                });
            }
        }
        if tau_cols.is_empty() {
            return Err(Error::Malformed {
                line: 1,
                message: "no tau_s columns".into(),
            });
        }

        let mut raw = Vec::new();
        for (row_idx, record) in rdr.records().enumerate() {
            let line = row_idx + 2;
            let record = record.map_err(|e| Error::Malformed {
                line,
                message: e.to_string(),
            })?;
            let field = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .ok_or(Error::Malformed {
                        line,
                        message: "missing field".into(),
                    })?
                    .parse::<f64>()
                    .map_err(|e| Error::Malformed {
                        line,
                        message: e.to_string(),
                    })
            };
            let eta = field(eta_col)?;
            let tau: Result<Vec<f64>> = tau_cols.iter().map(|&(_, i)| field(i)).collect();
            let weight = match weight_col {
                Some(i) => field(i)?,
                None => 1.0,
            };
            raw.push(DualSample {
                eta,
                tau: tau?,
                weight,
            });
        }
        if raw.is_empty() {
            return Err(Error::EmptySample);
        }
        let total: f64 = compensated_sum(raw.iter().map(|r| r.weight));
        for r in &mut raw {
            r.weight /= total;
        }
        let k = raw[0].tau.len();
        let priors: Vec<f64> = (0..k)
            .map(|s| compensated_sum(raw.iter().map(|r| r.weight * r.tau[s])))
            .collect();
        Self::new(raw, priors)
    }
}

/// Internal state for the exact piecewise-linear descent.
struct Solver<'a, T> {
    problem: &'a DualProblem<T>,
    tol: T,
    /// `a_k = 2 eta_k - 1`.
    a: Vec<T>,
    /// `b[k][j] = tau_kj/p_j - tau_kK/p_K` for the basis `lambda_j = xi_j`,
    /// `lambda_K = -sum xi`.
    b: Vec<Vec<T>>,
    xi: Vec<T>,
    res: Vec<T>,
    line_searches: usize,
    budget: usize,
}

impl<'a, T: Real> Solver<'a, T> {
    fn new(problem: &'a DualProblem<T>, tol: T) -> Self {
        let k = problem.k();
        let a: Vec<T> = problem
            .samples
            .iter()
            .map(|r| (T::one() + T::one()) * r.eta - T::one())
            .collect();
        let b: Vec<Vec<T>> = problem
            .samples
            .iter()
            .map(|r| {
                let last = r.tau[k - 1] / problem.priors[k - 1];
                (0..k - 1)
                    .map(|j| r.tau[j] / problem.priors[j] - last)
                    .collect()
            })
            .collect();
        let res = a.clone();
        let budget = 100 * k * problem.samples.len().max(1);
        Solver {
            problem,
            tol,
            a,
            b,
            xi: vec![T::zero(); k - 1],
            res,
            line_searches: 0,
            budget,
        }
    }

    fn refresh_residuals(&mut self) {
        for (kk, res) in self.res.iter_mut().enumerate() {
            let dot = compensated_sum(
                self.b[kk]
                    .iter()
                    .zip(self.xi.iter())
                    .map(|(&bj, &xj)| bj * xj),
            );
            *res = self.a[kk] - dot;
        }
    }

    fn objective(&self) -> T {
        compensated_sum(
            self.problem
                .samples
                .iter()
                .zip(self.res.iter())
                .map(|(r, &res)| r.weight * res.abs()),
        )
    }

    /// Exact minimization along `dir`; returns the improvement.
    fn line_minimize(&mut self, dir: &[T]) -> T {
        self.line_searches += 1;
        let before = self.objective();
        let mut kinks: Vec<(T, T)> = Vec::with_capacity(self.res.len());
        for ((bk, &res), r) in self
            .b
            .iter()
            .zip(self.res.iter())
            .zip(self.problem.samples.iter())
        {
            let slope = compensated_sum(bk.iter().zip(dir.iter()).map(|(&b, &d)| b * d));
            if slope.abs() > T::epsilon() {
                kinks.push((res / slope, r.weight * slope.abs()));
            }
        }
        let Some(step) = weighted_median(&mut kinks) else {
            return T::zero();
        };
        if step == T::zero() {
            return T::zero();
        }
        let candidate: Vec<T> = self
            .xi
            .iter()
            .zip(dir.iter())
            .map(|(&x, &d)| x + step * d)
            .collect();
        let saved = std::mem::replace(&mut self.xi, candidate);
        self.refresh_residuals();
        let after = self.objective();
        if after <= before {
            before - after
        } else {
            // numerically worse (flat optimum at float resolution): roll back
            self.xi = saved;
            self.refresh_residuals();
            T::zero()
        }
    }

    fn directions(&self) -> Vec<Vec<T>> {
        let dim = self.xi.len();
        let mut dirs = Vec::new();
        for j in 0..dim {
            let mut d = vec![T::zero(); dim];
            d[j] = T::one();
            dirs.push(d);
        }
        // pairwise group swaps e_i - e_j restricted to the hyperplane basis
        for i in 0..dim {
            for j in (i + 1)..dim {
                let mut d = vec![T::zero(); dim];
                d[i] = T::one();
                d[j] = -T::one();
                dirs.push(d);
            }
        }
        dirs
    }

    /// One-sided directional derivative at the current point.
    fn dir_derivative(&self, dir: &[T], act_eps: T) -> T {
        compensated_sum(
            self.b
                .iter()
                .zip(self.res.iter())
                .zip(self.problem.samples.iter())
                .map(|((bk, &res), r)| {
                    let slope =
                        compensated_sum(bk.iter().zip(dir.iter()).map(|(&b, &d)| b * d));
                    if res.abs() <= act_eps {
                        r.weight * slope.abs()
                    } else if res > T::zero() {
                        -r.weight * slope
                    } else {
                        r.weight * slope
                    }
                }),
        )
    }

    fn certified(&self, dirs: &[Vec<T>], act_eps: T) -> bool {
        let scale = T::one().max(self.objective());
        for d in dirs {
            let neg: Vec<T> = d.iter().map(|&x| -x).collect();
            if self.dir_derivative(d, act_eps) < -self.tol * scale
                || self.dir_derivative(&neg, act_eps) < -self.tol * scale
            {
                return false;
            }
        }
        true
    }

    fn subgradient_warmup(&mut self) {
        // Polyak-averaged projected subgradient; only a warm start for the
        // exact polishing, used when the direction set grows quadratically.
        let dim = self.xi.len();
        let cap = 100_000usize / self.problem.samples.len().max(1);
        let cap = cap.clamp(200, 5_000);
        let mut avg = vec![T::zero(); dim];
        let mut best = self.xi.clone();
        let mut best_obj = self.objective();
        let scale = best_obj.max(T::one());
        for t in 0..cap {
            let mut g = vec![T::zero(); dim];
            for ((bk, &res), r) in self
                .b
                .iter()
                .zip(self.res.iter())
                .zip(self.problem.samples.iter())
            {
                let sgn = if res > T::zero() {
                    T::one()
                } else if res < T::zero() {
                    -T::one()
                } else {
                    T::zero()
                };
                for (gj, &bj) in g.iter_mut().zip(bk.iter()) {
                    *gj -= r.weight * sgn * bj;
                }
            }
            let gnorm = g.iter().map(|&x| x * x).fold(T::zero(), |s, v| s + v).sqrt();
            if gnorm <= T::epsilon() {
                break;
            }
            let step = scale / (gnorm * T::from_usize(t + 1).unwrap().sqrt());
            for (x, &gj) in self.xi.iter_mut().zip(g.iter()) {
                *x -= step * gj;
            }
            self.refresh_residuals();
            let obj = self.objective();
            if obj < best_obj {
                best_obj = obj;
                best = self.xi.clone();
            }
            if t >= cap / 2 {
                for (aj, &xj) in avg.iter_mut().zip(self.xi.iter()) {
                    *aj += xj;
                }
            }
        }
        let tail = T::from_usize(cap - cap / 2).unwrap();
        for a in &mut avg {
            *a /= tail;
        }
        self.xi = avg;
        self.refresh_residuals();
        if self.objective() > best_obj {
            self.xi = best;
            self.refresh_residuals();
        }
    }

    fn run(mut self) -> Result<DualSolution<T>> {
        let k = self.problem.k();
        if k > 3 {
            self.subgradient_warmup();
        }
        let mut dirs = self.directions();
        let improve_tol = T::epsilon() * self.objective().max(T::one());

        loop {
            let mut improved = T::zero();
            for d in dirs.clone() {
                improved += self.line_minimize(&d);
                if self.line_searches > self.budget {
                    break;
                }
            }
            if improved <= improve_tol || self.line_searches > self.budget {
                break;
            }
        }
        // centering pass: midpoints of flat optima along every direction
        for d in dirs.clone() {
            self.line_minimize(&d);
        }

        let act_eps = real::<T>(1e-11)
            * self
                .a
                .iter()
                .fold(T::one(), |m, &v| m.max(v.abs()));
        // add seeded pseudo-random directions to the certificate set
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..64 {
            let mut d = Vec::with_capacity(self.xi.len());
            for _ in 0..self.xi.len() {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let u = ((state >> 11) as f64) / ((1u64 << 53) as f64);
                d.push(real::<T>(2.0 * u - 1.0));
            }
            if d.iter().any(|&x| x.abs() > T::epsilon()) {
                dirs.push(d);
            }
        }

        let mut converged = self.certified(&dirs, act_eps);
        if !converged {
            // escape attempts along the certificate directions
            for _ in 0..8 {
                let mut improved = T::zero();
                for d in dirs.clone() {
                    improved += self.line_minimize(&d);
                }
                if improved <= improve_tol {
                    break;
                }
            }
            converged = self.certified(&dirs, act_eps);
        }

        let mut lambda = self.xi.clone();
        lambda.push(-compensated_sum(self.xi.iter().copied()));
        let objective = self.objective();
        let solution = DualSolution {
            lambda,
            objective,
            converged,
            iterations: self.line_searches,
            priors: self.problem.priors.clone(),
        };
        if !converged {
            return Err(Error::NoConvergence {
                best_objective: objective.to_f64().unwrap_or(f64::NAN),
                iterations: self.line_searches,
            });
        }
        Ok(solution)
    }
}
