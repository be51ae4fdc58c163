//! JSON input format for two-group discrete joints.

use parity_opt::DiscreteJoint2;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
pub struct JointFile {
    pub points: Vec<String>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub priors: [f64; 2],
    pub eta: Vec<f64>,
}

pub fn parse_joint(json: &str) -> CliResult<DiscreteJoint2> {
    let file: JointFile =
        serde_json::from_str(json).map_err(|e| CliError::Validation(format!("joint: {e}")))?;
    Ok(DiscreteJoint2::new(
        file.points,
        file.p1,
        file.p2,
        file.priors,
        file.eta,
    )?)
}
