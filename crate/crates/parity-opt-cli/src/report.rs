//! JSON report types and the 17-significant-digit number format.
//!
//! Every float in a report or model file is written as a decimal with 17
//! significant digits, which round-trips any f64 exactly. Unreachable
//! thresholds (`+inf`) are reported as `null` through `Option`.

use std::collections::BTreeMap;
use std::io::Write;

use parity_opt::ModelDoc;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Current report and model schema version.
pub const SCHEMA: u32 = 1;

struct SigFig17;

impl serde_json::ser::Formatter for SigFig17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{:.16e}", value as f64)
    }
}

/// Serializes with 17-significant-digit floats. Rejects non-finite values;
/// callers map those to `None` fields beforehand.
pub fn to_json_17<T: Serialize>(value: &T) -> CliResult<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFig17);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Validation(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| CliError::Io(e.to_string()))
}

/// On-disk model: schema, group names, and the model document.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: u32,
    pub group_names: Vec<String>,
    #[serde(flatten)]
    pub doc: ModelDoc,
}

#[derive(Debug, Serialize)]
pub struct ThresholdReport {
    pub schema: u32,
    pub theta_star: f64,
    pub branch: String,
    pub optimal_utility: f64,
    pub fixed_point_residual: Option<f64>,
    pub clamped: bool,
}

#[derive(Debug, Serialize)]
pub struct EvaluateReport {
    pub schema: u32,
    pub theta_star: f64,
    pub utility: f64,
    /// "labels" when the eval file carried labels, otherwise "scores".
    pub utility_basis: String,
    pub dp_gap: f64,
    pub positive_rates: BTreeMap<String, f64>,
    pub group_thresholds: BTreeMap<String, Option<f64>>,
    pub clamped_fraction: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize)]
pub struct ReducePoint {
    pub id: String,
    pub decision: u8,
    /// "q1", "q2", or "bayes".
    pub region: String,
    pub eta_tilde: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ReduceReport {
    pub schema: u32,
    pub tv: f64,
    pub bayes_everywhere: bool,
    pub lambda: Option<Vec<f64>>,
    pub dp_residual: f64,
    pub risk: f64,
    pub hahn_support_1: Vec<String>,
    pub hahn_support_2: Vec<String>,
    pub bayes_region: Vec<String>,
    pub classifier: Vec<ReducePoint>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        let values = vec![0.5f64, 1.0 / 3.0, 0.1 + 0.2, 1e-300, 123456.789];
        let json = to_json_17(&values).unwrap();
        assert!(json.contains("5.0000000000000000e0") || json.contains("5.0000000000000000e-1"));
        let parsed: Vec<f64> = serde_json::from_str(&json).unwrap();
        for (a, b) in values.iter().zip(parsed.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn model_file_round_trip() {
        use parity_opt::{FairScoreModel, GroupedScores, WeightedSample1D};
        let gs = GroupedScores::new(
            vec![
                WeightedSample1D::from_samples(&[0.1, 0.4, 0.9]).unwrap(),
                WeightedSample1D::from_samples(&[0.2, 0.5, 0.7]).unwrap(),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        let model = FairScoreModel::fit(gs).unwrap();
        let file = ModelFile {
            schema: SCHEMA,
            group_names: vec!["a".into(), "b".into()],
            doc: model.to_doc(),
        };
        let json = to_json_17(&file).unwrap();
        let parsed: ModelFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.schema, SCHEMA);
        let rebuilt = FairScoreModel::from_doc(parsed.doc).unwrap();
        assert_eq!(rebuilt.gamma_star(), model.gamma_star());
    }
}
