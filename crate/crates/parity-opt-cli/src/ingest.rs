//! CSV ingestion: `score,group[,label][,weight]` rows into grouped score laws.

use std::collections::BTreeMap;
use std::io::Read;

use parity_opt::{GroupedScores, WeightedSample1D};

use crate::error::{CliError, CliResult};

/// One input row.
#[derive(Debug, Clone)]
pub struct ScoreRecord {
    pub score: f64,
    pub group: String,
    pub label: Option<f64>,
    pub weight: f64,
}

/// Grouped form of the rows: group laws in the sorted order of `group_names`.
#[derive(Debug)]
pub struct IngestResult {
    pub gs: GroupedScores,
    pub group_names: Vec<String>,
    /// Weighted mean of the labels, when every row carries one.
    pub label_prior: Option<f64>,
    pub rows: Vec<ScoreRecord>,
}

struct Columns {
    score: usize,
    group: usize,
    label: Option<usize>,
    weight: Option<usize>,
}

fn parse_header(headers: &csv::StringRecord) -> CliResult<Columns> {
    let mut score = None;
    let mut group = None;
    let mut label = None;
    let mut weight = None;
    for (i, h) in headers.iter().enumerate() {
        match h {
            "score" => score = Some(i),
            "group" => group = Some(i),
            "label" => label = Some(i),
            "weight" => weight = Some(i),
            other => {
                return Err(CliError::Validation(format!(
                    "line 1: unexpected column `{other}` (expected score,group[,label][,weight])"
                )))
            }
        }
    }
    Ok(Columns {
        score: score
            .ok_or_else(|| CliError::Validation("line 1: missing `score` column".into()))?,
        group: group
            .ok_or_else(|| CliError::Validation("line 1: missing `group` column".into()))?,
        label,
        weight,
    })
}

/// Reads and validates the rows; malformed rows name their line.
pub fn read_rows(reader: impl Read) -> CliResult<Vec<ScoreRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Validation(format!("line 1: {e}")))?
        .clone();
    let cols = parse_header(&headers)?;

    let mut rows = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 2;
        let record =
            record.map_err(|e| CliError::Validation(format!("line {line}: {e}")))?;
        let raw = |i: usize| -> CliResult<&str> {
            record
                .get(i)
                .ok_or_else(|| CliError::Validation(format!("line {line}: missing field")))
        };
        let number = |i: usize| -> CliResult<f64> {
            raw(i)?
                .parse::<f64>()
                .map_err(|e| CliError::Validation(format!("line {line}: {e}")))
        };
        let score = number(cols.score)?;
        if !(0.0..=1.0).contains(&score) {
            return Err(CliError::Validation(format!(
                "line {line}: score {score} outside [0, 1]"
            )));
        }
        let group = raw(cols.group)?.to_string();
        if group.is_empty() {
            return Err(CliError::Validation(format!("line {line}: empty group id")));
        }
        let weight = match cols.weight {
            Some(i) => {
                let w = number(i)?;
                if w <= 0.0 || !w.is_finite() {
                    return Err(CliError::Validation(format!(
                        "line {line}: weight {w} must be positive"
                    )));
                }
                w
            }
            None => 1.0,
        };
        let label = match cols.label {
            Some(i) => {
                let l = number(i)?;
                if l != 0.0 && l != 1.0 {
                    return Err(CliError::Validation(format!(
                        "line {line}: label {l} must be 0 or 1"
                    )));
                }
                Some(l)
            }
            None => None,
        };
        rows.push(ScoreRecord {
            score,
            group,
            label,
            weight,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Validation("no data rows".into()));
    }
    Ok(rows)
}

/// Groups rows into per-group laws; priors come from the group weight totals.
pub fn group_rows(rows: Vec<ScoreRecord>) -> CliResult<IngestResult> {
    let mut by_group: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut label_mass = 0.0f64;
    let mut total_mass = 0.0f64;
    let mut all_labeled = true;
    for r in &rows {
        total_mass += r.weight;
        match r.label {
            Some(l) => label_mass += r.weight * l,
            None => all_labeled = false,
        }
        by_group
            .entry(r.group.clone())
            .or_default()
            .push((r.score, r.weight));
    }
    let group_names: Vec<String> = by_group.keys().cloned().collect();
    let mut groups = Vec::with_capacity(group_names.len());
    let mut priors = Vec::with_capacity(group_names.len());
    for name in &group_names {
        let pairs = &by_group[name];
        let group_mass: f64 = pairs.iter().map(|&(_, w)| w).sum();
        priors.push(group_mass / total_mass);
        groups.push(WeightedSample1D::from_pairs(
            pairs.iter().map(|&(s, w)| (s, w / group_mass)),
        )?);
    }
    let gs = GroupedScores::new(groups, priors)?;
    let label_prior = all_labeled.then_some(label_mass / total_mass);
    Ok(IngestResult {
        gs,
        group_names,
        label_prior,
        rows,
    })
}

pub fn ingest_csv(reader: impl Read) -> CliResult<IngestResult> {
    group_rows(read_rows(reader)?)
}
