//! Model document round trips: serialize, parse, refit, compare bit-exactly.

use parity_opt::{FairScoreModel, GroupedScores, ModelDoc, WeightedSample1D};

fn model() -> FairScoreModel {
    let gs = GroupedScores::new(
        vec![
            WeightedSample1D::from_samples(&[0.12, 0.3, 0.44, 0.71, 0.93]).unwrap(),
            WeightedSample1D::from_pairs([(0.2, 0.25), (0.55, 0.5), (0.8, 0.25)]).unwrap(),
        ],
        vec![0.6, 0.4],
    )
    .unwrap();
    FairScoreModel::fit(gs).unwrap()
}

#[test]
fn json_round_trip_is_bit_exact() {
    let m = model();
    let doc = m.to_doc();
    let json = serde_json::to_string_pretty(&doc).unwrap();
    let parsed: ModelDoc = serde_json::from_str(&json).unwrap();
    let rebuilt = FairScoreModel::from_doc(parsed).unwrap();

    assert_eq!(m.gamma_star(), rebuilt.gamma_star());
    assert_eq!(m.label_prior(), rebuilt.label_prior());
    assert_eq!(m.grid_m(), rebuilt.grid_m());
    for (a, b) in m
        .grouped()
        .groups()
        .iter()
        .zip(rebuilt.grouped().groups().iter())
    {
        assert_eq!(a.atoms(), b.atoms());
        assert_eq!(a.weights(), b.weights());
    }
    assert_eq!(m.barycenter().atoms(), rebuilt.barycenter().atoms());
    // derived quantities recompute to the same bits
    for theta in [0.2, 0.5, 0.8] {
        assert_eq!(
            m.group_thresholds(theta).unwrap(),
            rebuilt.group_thresholds(theta).unwrap()
        );
    }
}

#[test]
fn corrupted_gamma_is_rejected() {
    let m = model();
    let mut doc = m.to_doc();
    doc.gamma_star += 0.2;
    assert!(FairScoreModel::from_doc(doc).is_err());
}
