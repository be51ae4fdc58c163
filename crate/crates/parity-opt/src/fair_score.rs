//! The optimal fair score transform and its induced classifiers.
//!
//! Fitting pushes every group's score law onto the common barycenter through
//! its optimal transport map; the resulting score is independent of the group
//! by construction, strictly increasing within each group, and thresholding
//! it at 1/2 gives the accuracy-optimal classifier under demographic parity.
//! Thresholding at any other level stays fair, which is what the
//! linear-fractional threshold solver relies on.

use serde::{Deserialize, Serialize};

use crate::barycenter::GroupedScores;
use crate::dist::WeightedSample1D;
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::scalar::{real, Real};

/// Default barycenter discretization grid.
pub const DEFAULT_GRID: usize = 512;

/// Fit-time options.
#[derive(Debug, Clone)]
pub struct FitConfig<T> {
    /// Barycenter discretization grid size.
    pub grid_m: usize,
    /// Overrides the label prior (otherwise the weighted mean of all scores).
    pub label_prior: Option<T>,
}

impl<T> Default for FitConfig<T> {
    fn default() -> Self {
        Self {
            grid_m: DEFAULT_GRID,
            label_prior: None,
        }
    }
}

/// A fitted fair score transform.
#[derive(Debug, Clone)]
pub struct FairScoreModel<T> {
    gs: GroupedScores<T>,
    gamma_star: T,
    barycenter: WeightedSample1D<T>,
    /// Prior-weighted mixture of the transformed group laws; the empirical
    /// law of the fair score, used for all expectations over it.
    fair_law: WeightedSample1D<T>,
    label_prior: T,
    grid_m: usize,
}

impl<T: Real> FairScoreModel<T> {
    /// Fits with the default grid and the score-mean label prior.
    pub fn fit(gs: GroupedScores<T>) -> Result<Self> {
        Self::fit_with(gs, FitConfig::default())
    }

    pub fn fit_with(gs: GroupedScores<T>, config: FitConfig<T>) -> Result<Self> {
        for g in gs.groups() {
            if g.len() < 2 {
                return Err(Error::DegenerateDistribution);
            }
            if g.min_atom() < T::zero() || g.max_atom() > T::one() {
                let bad = if g.min_atom() < T::zero() {
                    g.min_atom()
                } else {
                    g.max_atom()
                };
                return Err(Error::ScoreOutOfRange {
                    score: bad.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let label_prior = match config.label_prior {
            Some(p) => {
                if !(p >= T::zero() && p <= T::one()) {
                    return Err(Error::ScoreOutOfRange {
                        score: p.to_f64().unwrap_or(f64::NAN),
                    });
                }
                p
            }
            None => gs.weighted_mean(),
        };
        let gamma_star = gs.solve_gamma_star()?;
        let barycenter = gs.barycenter_distribution(config.grid_m)?;
        let fair_law = Self::build_fair_law(&gs)?;
        Ok(Self {
            gs,
            gamma_star,
            barycenter,
            fair_law,
            label_prior,
            grid_m: config.grid_m,
        })
    }

    fn build_fair_law(gs: &GroupedScores<T>) -> Result<WeightedSample1D<T>> {
        let mut pairs = Vec::new();
        for (s, (g, &prior)) in gs.groups().iter().zip(gs.priors()).enumerate() {
            for (&a, &w) in g.atoms().iter().zip(g.weights()) {
                pairs.push((gs.transport_map(s, a)?, prior * w));
            }
        }
        WeightedSample1D::from_pairs(pairs)
    }

    pub fn grouped(&self) -> &GroupedScores<T> {
        &self.gs
    }

    /// Common within-group rank of the half-threshold classifier.
    pub fn gamma_star(&self) -> T {
        self.gamma_star
    }

    pub fn label_prior(&self) -> T {
        self.label_prior
    }

    pub fn grid_m(&self) -> usize {
        self.grid_m
    }

    /// Grid discretization of the barycenter (diagnostics, plots).
    pub fn barycenter(&self) -> &WeightedSample1D<T> {
        &self.barycenter
    }

    /// Empirical law of the fair score.
    pub fn fair_score_law(&self) -> &WeightedSample1D<T> {
        &self.fair_law
    }

    /// The fair score of a raw `score` from `group`.
    pub fn transform(&self, score: T, group: usize) -> Result<T> {
        self.gs.transport_map(group, score)
    }

    /// `1 { fair score >= 1/2 }` — the misclassification-optimal fair rule.
    pub fn classify_half(&self, score: T, group: usize) -> Result<bool> {
        self.classify_at(real::<T>(0.5), score, group)
    }

    /// `1 { fair score >= theta }`.
    pub fn classify_at(&self, theta: T, score: T, group: usize) -> Result<bool> {
        Ok(self.transform(score, group)? >= theta)
    }

    /// Rank of `theta` through the exact barycenter quantile. Shared by
    /// `group_thresholds` and the excess-score computation so the threshold
    /// and fair-score routes of a classifier agree atom for atom.
    pub fn barycenter_rank_of(&self, theta: T) -> Result<T> {
        self.gs.barycenter_rank_of(theta)
    }

    /// Per-group raw-score thresholds reproducing `classify_at(theta)`.
    ///
    /// Group `s` gets `interp_quantile_s(beta)` with `beta` the barycenter
    /// rank of `theta`; when `beta` exceeds the group's top plotting rank no
    /// raw score reaches `theta` and the threshold is `+inf`.
    pub fn group_thresholds(&self, theta: T) -> Result<Vec<T>> {
        let beta = self.barycenter_rank_of(theta)?;
        self.gs
            .groups()
            .iter()
            .map(|g| {
                let top = *g.plot_ranks().last().unwrap();
                if beta > top {
                    Ok(T::infinity())
                } else {
                    g.interp_quantile(beta)
                }
            })
            .collect()
    }

    /// Fraction of each group classified positive at level `theta`.
    pub fn group_positive_rates(&self, theta: T) -> Result<Vec<T>> {
        let mut rates = Vec::with_capacity(self.gs.k());
        for (s, g) in self.gs.groups().iter().enumerate() {
            let mut rate = T::zero();
            for (&a, &w) in g.atoms().iter().zip(g.weights()) {
                if self.classify_at(theta, a, s)? {
                    rate += w;
                }
            }
            rates.push(rate);
        }
        Ok(rates)
    }

    /// Largest Kolmogorov-Smirnov distance between the transformed group
    /// laws of `eval`: an empirical check that the fair score is independent
    /// of the group.
    pub fn dp_gap(&self, eval: &GroupedScores<T>) -> Result<T> {
        if eval.k() != self.gs.k() {
            return Err(Error::GroupCountMismatch {
                expected: self.gs.k(),
                got: eval.k(),
            });
        }
        let pushed: Result<Vec<WeightedSample1D<T>>> = (0..eval.k())
            .map(|s| eval.groups()[s].pushforward(|t| self.gs.transport_map(s, t).unwrap()))
            .collect();
        let pushed = pushed?;
        let mut gap = T::zero();
        for i in 0..pushed.len() {
            for j in (i + 1)..pushed.len() {
                gap = gap.max(pushed[i].ks_distance(&pushed[j]));
            }
        }
        Ok(gap)
    }

    /// `| E[f] - label_prior |`: the fair score preserves the mean score.
    pub fn average_stability_check(&self) -> T {
        (self.fair_law.mean() - self.label_prior).abs()
    }

    /// `| E[(f - eta) 1{f >= theta}] |` on the atom-level coupling pairing
    /// each raw score with its own transform.
    pub fn partial_stability_check(&self, theta: T) -> Result<T> {
        let mut terms = Vec::new();
        for (s, (g, &prior)) in self.gs.groups().iter().zip(self.gs.priors()).enumerate() {
            for (&a, &w) in g.atoms().iter().zip(g.weights()) {
                let f = self.transform(a, s)?;
                if f >= theta {
                    terms.push(prior * w * (f - a));
                }
            }
        }
        Ok(compensated_sum(terms).abs())
    }

    pub fn to_doc(&self) -> ModelDoc<T> {
        ModelDoc {
            priors: self.gs.priors().to_vec(),
            groups: self
                .gs
                .groups()
                .iter()
                .map(|g| GroupDoc {
                    atoms: g.atoms().to_vec(),
                    weights: g.weights().to_vec(),
                })
                .collect(),
            grid_m: self.grid_m,
            gamma_star: self.gamma_star,
            label_prior: self.label_prior,
        }
    }

    /// Rebuilds a model from its document form. `gamma_star` is recomputed
    /// from the data and checked against the stored value.
    pub fn from_doc(doc: ModelDoc<T>) -> Result<Self> {
        let groups: Result<Vec<WeightedSample1D<T>>> = doc
            .groups
            .into_iter()
            .map(|g| {
                WeightedSample1D::from_pairs(g.atoms.into_iter().zip(g.weights))
            })
            .collect();
        let gs = GroupedScores::new(groups?, doc.priors)?;
        let model = Self::fit_with(
            gs,
            FitConfig {
                grid_m: doc.grid_m,
                label_prior: Some(doc.label_prior),
            },
        )?;
        if (model.gamma_star - doc.gamma_star).abs() > T::weight_tol() {
            return Err(Error::InvalidMeasure(format!(
                "stored gamma_star {} disagrees with recomputed {}",
                doc.gamma_star.to_f64().unwrap_or(f64::NAN),
                model.gamma_star.to_f64().unwrap_or(f64::NAN),
            )));
        }
        Ok(model)
    }
}

/// Serializable form of a fitted model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDoc<T> {
    pub priors: Vec<T>,
    pub groups: Vec<GroupDoc<T>>,
    pub grid_m: usize,
    pub gamma_star: T,
    pub label_prior: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupDoc<T> {
    pub atoms: Vec<T>,
    pub weights: Vec<T>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(atoms: &[f64]) -> WeightedSample1D<f64> {
        WeightedSample1D::from_samples(atoms).unwrap()
    }

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
    fn single_group_transform_is_identity_at_atoms() {
        let g = uniform(&[0.2, 0.4, 0.6, 0.8]);
        let model =
            FairScoreModel::fit(GroupedScores::new(vec![g.clone()], vec![1.0]).unwrap()).unwrap();
        for &a in g.atoms() {
            assert!((model.transform(a, 0).unwrap() - a).abs() <= 1e-12);
        }
    }

    #[test]
    fn identical_groups_transform_is_identity() {
        let g = uniform(&[0.2, 0.4, 0.6, 0.8]);
        let model = FairScoreModel::fit(
            GroupedScores::new(vec![g.clone(), g.clone()], vec![0.5, 0.5]).unwrap(),
        )
        .unwrap();
        for &a in g.atoms() {
            assert!((model.transform(a, 0).unwrap() - a).abs() <= 1e-12);
            assert!((model.transform(a, 1).unwrap() - a).abs() <= 1e-12);
        }
    }

    #[test]
    fn asymmetric_transform_matches_transport() {
        let model = FairScoreModel::fit(asymmetric_pair()).unwrap();
        assert!((model.transform(0.1, 0).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn fit_rejects_bad_inputs() {
        let degenerate = GroupedScores::new(
            vec![WeightedSample1D::from_pairs([(0.5, 1.0)]).unwrap()],
            vec![1.0],
        )
        .unwrap();
        assert!(matches!(
            FairScoreModel::fit(degenerate),
            Err(Error::DegenerateDistribution)
        ));
        let out_of_range =
            GroupedScores::new(vec![uniform(&[0.5, 1.2])], vec![1.0]).unwrap();
        assert!(matches!(
            FairScoreModel::fit(out_of_range),
            Err(Error::ScoreOutOfRange { .. })
        ));
    }

    #[test]
    fn classify_half_bayes_for_single_group() {
        let g = uniform(&[0.1, 0.3, 0.7, 0.9]);
        let model =
            FairScoreModel::fit(GroupedScores::new(vec![g], vec![1.0]).unwrap()).unwrap();
        assert!(model.classify_half(0.7, 0).unwrap());
        assert!(!model.classify_half(0.3, 0).unwrap());
    }

    #[test]
    fn classify_half_rank_route_agreement() {
        let model = FairScoreModel::fit(asymmetric_pair()).unwrap();
        // group 1, third atom 0.5: rank 0.625 >= gamma* = 0.5 -> positive
        assert!(model.classify_half(0.5, 0).unwrap());
        // group 2, score 0.3: rank 0.125 < 0.5 -> negative
        assert!(!model.classify_half(0.3, 1).unwrap());
        // both routes agree on every atom
        let gamma = model.gamma_star();
        for (s, g) in model.grouped().groups().iter().enumerate() {
            for &a in g.atoms() {
                let by_value = model.classify_half(a, s).unwrap();
                let by_rank = g.interp_cdf(a).unwrap() >= gamma;
                assert_eq!(by_value, by_rank);
            }
        }
    }

    #[test]
    fn group_thresholds_examples() {
        // single symmetric group at theta = 1/2 -> threshold 0.5
        let g = uniform(&[0.2, 0.8]);
        let model =
            FairScoreModel::fit(GroupedScores::new(vec![g], vec![1.0]).unwrap()).unwrap();
        let th = model.group_thresholds(0.5).unwrap();
        assert!((th[0] - 0.5).abs() <= 1e-12);

        // identical groups get identical thresholds
        let g = uniform(&[0.1, 0.4, 0.6]);
        let model = FairScoreModel::fit(
            GroupedScores::new(vec![g.clone(), g], vec![0.3, 0.7]).unwrap(),
        )
        .unwrap();
        let th = model.group_thresholds(0.5).unwrap();
        assert!((th[0] - th[1]).abs() <= 1e-12);

        // asymmetric pair: rank 0.5 in each group
        let model = FairScoreModel::fit(asymmetric_pair()).unwrap();
        let th = model.group_thresholds(0.5).unwrap();
        assert!((th[0] - 0.4).abs() < 1e-12);
        assert!((th[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn thresholds_reproduce_classification() {
        let model = FairScoreModel::fit(asymmetric_pair()).unwrap();
        for theta in [0.05, 0.3, 0.5, 0.77, 0.95] {
            let th = model.group_thresholds(theta).unwrap();
            for (s, g) in model.grouped().groups().iter().enumerate() {
                for &a in g.atoms() {
                    assert_eq!(
                        model.classify_at(theta, a, s).unwrap(),
                        a >= th[s],
                        "theta={theta} group={s} atom={a}"
                    );
                }
            }
        }
    }

    #[test]
    fn dp_gap_cases() {
        let model = FairScoreModel::fit(asymmetric_pair()).unwrap();
        let gap = model.dp_gap(model.grouped()).unwrap();
        assert!(gap <= 2.0 / 4.0, "gap = {gap}");

        let g = uniform(&[0.2, 0.5, 0.8]);
        let single =
            FairScoreModel::fit(GroupedScores::new(vec![g.clone()], vec![1.0]).unwrap()).unwrap();
        assert_eq!(single.dp_gap(single.grouped()).unwrap(), 0.0);

        let twin = FairScoreModel::fit(
            GroupedScores::new(vec![g.clone(), g], vec![0.5, 0.5]).unwrap(),
        )
        .unwrap();
        assert!(twin.dp_gap(twin.grouped()).unwrap() <= 1e-12);
    }

    #[test]
    fn stability_checks() {
        let model = FairScoreModel::fit(asymmetric_pair()).unwrap();
        assert!(model.average_stability_check() <= 1e-10);
        assert!(model.partial_stability_check(0.5).unwrap() <= 1e-8);
        // theta = 0 reduces to the average stability residual
        let at_zero = model.partial_stability_check(0.0).unwrap();
        assert!((at_zero - model.average_stability_check()).abs() <= 1e-12);

        let g = uniform(&[0.2, 0.4, 0.9]);
        let single =
            FairScoreModel::fit(GroupedScores::new(vec![g], vec![1.0]).unwrap()).unwrap();
        for theta in [0.0, 0.3, 0.5, 0.95] {
            assert!(single.partial_stability_check(theta).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn monotone_within_group() {
        let model = FairScoreModel::fit(asymmetric_pair()).unwrap();
        for s in 0..2 {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..50 {
                let t = 0.05 + 0.9 * (i as f64) / 49.0;
                let f = model.transform(t, s).unwrap();
                assert!(f >= prev);
                prev = f;
            }
        }
    }

    #[test]
    fn label_prior_default_and_override() {
        let gs = asymmetric_pair();
        let mean = gs.weighted_mean();
        let model = FairScoreModel::fit(gs.clone()).unwrap();
        assert!((model.label_prior() - mean).abs() <= 1e-12);
        let with_labels = FairScoreModel::fit_with(
            gs,
            FitConfig {
                grid_m: 64,
                label_prior: Some(0.41),
            },
        )
        .unwrap();
        assert_eq!(with_labels.label_prior(), 0.41);
    }
}
