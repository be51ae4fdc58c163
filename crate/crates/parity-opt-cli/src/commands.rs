//! Implementations of the CLI subcommands.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use parity_opt::fair_score::FitConfig;
use parity_opt::lin_frac::{MeasureSpec, Validation};
use parity_opt::{FairScoreModel, LFMeasure};

use crate::error::{CliError, CliResult};
use crate::ingest::{ingest_csv, IngestResult};
use crate::joint::parse_joint;
use crate::report::{
    to_json_17, EvaluateReport, ModelFile, ReducePoint, ReduceReport, ThresholdReport, SCHEMA,
};

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> CliResult<(FairScoreModel, Vec<String>)> {
    let text = read_file(path)?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    if file.schema != SCHEMA {
        return Err(CliError::Validation(format!(
            "unsupported model schema {} (expected {SCHEMA})",
            file.schema
        )));
    }
    if file.group_names.len() != file.doc.groups.len() {
        return Err(CliError::Validation(
            "model group_names and groups disagree in length".into(),
        ));
    }
    let model = FairScoreModel::from_doc(file.doc)?;
    Ok((model, file.group_names))
}

fn load_measure(path: &Path, fallback_prior: f64) -> CliResult<LFMeasure> {
    let text = read_file(path)?;
    let spec: MeasureSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(spec.instantiate(fallback_prior)?)
}

fn branch_name(v: &Validation) -> &'static str {
    match v {
        Validation::C1 => "C1",
        Validation::C2 => "C2",
        Validation::Invalid(_) => "invalid",
    }
}

pub fn cmd_fit(input: &Path, output: &Path, grid: usize) -> CliResult<()> {
    let data = read_file(input)?;
    let IngestResult {
        gs,
        group_names,
        label_prior,
        rows,
    } = ingest_csv(data.as_bytes())?;
    let model = FairScoreModel::fit_with(
        gs,
        FitConfig {
            grid_m: grid,
            label_prior,
        },
    )?;
    let file = ModelFile {
        schema: SCHEMA,
        group_names,
        doc: model.to_doc(),
    };
    write_file(output, &to_json_17(&file)?)?;
    eprintln!(
        "fitted {} groups from {} rows; gamma_star = {}",
        file.group_names.len(),
        rows.len(),
        model.gamma_star()
    );
    Ok(())
}

pub fn cmd_threshold(model_path: &Path, measure_path: &Path, output: &Path) -> CliResult<()> {
    let (model, _) = load_model(model_path)?;
    let measure = load_measure(measure_path, model.label_prior())?;
    let sol = measure.solve_threshold(&model)?;
    let report = ThresholdReport {
        schema: SCHEMA,
        theta_star: sol.theta,
        branch: branch_name(&sol.branch).to_string(),
        optimal_utility: measure.optimal_utility(&model, sol.theta)?,
        fixed_point_residual: sol.residual,
        clamped: sol.clamped,
    };
    write_file(output, &to_json_17(&report)?)
}

pub fn cmd_evaluate(model_path: &Path, input: &Path, measure_path: &Path) -> CliResult<String> {
    let (model, names) = load_model(model_path)?;
    let measure = load_measure(measure_path, model.label_prior())?;
    let theta = measure.solve_threshold(&model)?.theta;

    let data = read_file(input)?;
    let eval = ingest_csv(data.as_bytes())?;
    // map eval groups onto the model's groups by name; both lists are sorted,
    // so requiring the same name set aligns the indices
    let mut index_of = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        index_of.insert(n.clone(), i);
    }
    for n in &eval.group_names {
        if !index_of.contains_key(n) {
            return Err(CliError::Validation(format!(
                "eval group `{n}` is not part of the model"
            )));
        }
    }
    if eval.group_names.len() != names.len() {
        return Err(CliError::Validation(format!(
            "eval data has {} groups, the model {}",
            eval.group_names.len(),
            names.len()
        )));
    }

    // classifier statistics over the rows; labels take precedence over
    // scores as the Y variable when every row carries one
    let use_labels = eval.label_prior.is_some();
    let total_mass: f64 = eval.rows.iter().map(|r| r.weight).sum();
    let mut ppj = 0.0f64;
    let mut pp = 0.0f64;
    for r in &eval.rows {
        let idx = index_of[&r.group];
        if model.classify_at(theta, r.score, idx)? {
            let w = r.weight / total_mass;
            let y = if use_labels { r.label.unwrap() } else { r.score };
            ppj += w * y;
            pp += w;
        }
    }
    let stats = parity_opt::lin_frac::ConfusionStats::new(ppj, pp)?;
    let utility = measure.utility(stats)?;

    let mut positive_rates = BTreeMap::new();
    let mut clamped_fraction = BTreeMap::new();
    for (pos, name) in eval.group_names.iter().enumerate() {
        let idx = index_of[name];
        let law = &eval.gs.groups()[pos];
        let train = model.grouped().group(idx)?;
        let mut rate = 0.0;
        let mut clamped = 0.0;
        for (&a, &w) in law.atoms().iter().zip(law.weights()) {
            if model.classify_at(theta, a, idx)? {
                rate += w;
            }
            if a < train.min_atom() || a > train.max_atom() {
                clamped += w;
            }
        }
        positive_rates.insert(name.clone(), rate);
        clamped_fraction.insert(name.clone(), clamped);
    }

    let thresholds = model.group_thresholds(theta)?;
    let group_thresholds: BTreeMap<String, Option<f64>> = names
        .iter()
        .zip(thresholds.iter())
        .map(|(n, &t)| (n.clone(), t.is_finite().then_some(t)))
        .collect();

    let report = EvaluateReport {
        schema: SCHEMA,
        theta_star: theta,
        utility,
        utility_basis: if use_labels { "labels" } else { "scores" }.into(),
        dp_gap: model.dp_gap(&eval.gs)?,
        positive_rates,
        group_thresholds,
        clamped_fraction,
    };
    to_json_17(&report)
}

pub fn cmd_reduce_unaware(joint_path: &Path, output: &Path) -> CliResult<()> {
    let joint = parse_joint(&read_file(joint_path)?)?;
    let sol = joint.solve_unaware(1e-9)?;
    let (s1, s2, bayes, eta_tilde): (Vec<String>, Vec<String>, Vec<String>, Vec<Option<f64>>) =
        match &sol.reduced {
            Some(r) => (
                r.supp1.iter().map(|&i| joint.support()[i].clone()).collect(),
                r.supp2.iter().map(|&i| joint.support()[i].clone()).collect(),
                r.bayes_region
                    .iter()
                    .map(|&i| joint.support()[i].clone())
                    .collect(),
                r.eta_tilde.clone(),
            ),
            None => (
                vec![],
                vec![],
                joint.support().to_vec(),
                vec![None; joint.len()],
            ),
        };
    let classifier = (0..joint.len())
        .map(|i| {
            let id = joint.support()[i].clone();
            let region = if s1.contains(&id) {
                "q1"
            } else if s2.contains(&id) {
                "q2"
            } else {
                "bayes"
            };
            ReducePoint {
                id,
                decision: sol.assignments[i] as u8,
                region: region.into(),
                eta_tilde: eta_tilde[i],
            }
        })
        .collect();
    let report = ReduceReport {
        schema: SCHEMA,
        tv: sol.tv,
        bayes_everywhere: sol.bayes_everywhere,
        lambda: sol.dual.as_ref().map(|d| d.lambda.clone()),
        dp_residual: sol.dp_residual,
        risk: sol.risk,
        hahn_support_1: s1,
        hahn_support_2: s2,
        bayes_region: bayes,
        classifier,
    };
    write_file(output, &to_json_17(&report)?)
}

pub fn cmd_plot_data(model_path: &Path, output: &Path) -> CliResult<()> {
    let (model, names) = load_model(model_path)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["curve", "x", "y"])
        .map_err(|e| CliError::Io(e.to_string()))?;
    let mut row = |curve: &str, x: f64, y: f64| -> CliResult<()> {
        wtr.write_record([curve, &format!("{x}"), &format!("{y}")])
            .map_err(|e| CliError::Io(e.to_string()))
    };

    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    for g in model.grouped().groups() {
        x_lo = x_lo.min(g.min_atom());
        x_hi = x_hi.max(g.max_atom());
    }
    for (name, law) in names.iter().zip(model.grouped().groups()) {
        let curve = format!("cdf_{name}");
        for (&a, &r) in law.atoms().iter().zip(law.plot_ranks()) {
            row(&curve, a, r)?;
        }
    }
    let bary = model.barycenter();
    for (&a, &r) in bary.atoms().iter().zip(bary.plot_ranks()) {
        row("cdf_barycenter", a, r)?;
    }
    row("gamma_star", x_lo, model.gamma_star())?;
    row("gamma_star", x_hi, model.gamma_star())?;
    let thresholds = model.group_thresholds(0.5)?;
    for (name, &t) in names.iter().zip(thresholds.iter()) {
        if t.is_finite() {
            let curve = format!("threshold_{name}");
            row(&curve, t, 0.0)?;
            row(&curve, t, 1.0)?;
        }
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_file(
        output,
        std::str::from_utf8(&bytes).map_err(|e| CliError::Io(e.to_string()))?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("parity-opt-cmd-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn fit_threshold_evaluate_pipeline() {
        let data = "score,group\n0.1,a\n0.3,a\n0.5,a\n0.7,a\n0.3,b\n0.5,b\n0.7,b\n0.9,b\n";
        let input = write_temp("pipeline.csv", data);
        let model_path = write_temp("pipeline-model.json", "");
        cmd_fit(&input, &model_path, 64).unwrap();

        let (model, names) = load_model(&model_path).unwrap();
        assert_eq!(names, vec!["a", "b"]);
        assert!((model.gamma_star() - 0.5).abs() < 1e-12);

        let measure = write_temp("acc.json", r#"{"preset": "accuracy"}"#);
        let report_path = write_temp("threshold.json", "");
        cmd_threshold(&model_path, &measure, &report_path).unwrap();
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
        assert_eq!(report["theta_star"].as_f64().unwrap(), 0.5);
        assert_eq!(report["branch"], "C2");

        let out = cmd_evaluate(&model_path, &input, &measure).unwrap();
        let report: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(report["dp_gap"].as_f64().unwrap() <= 0.5);
        assert_eq!(report["schema"], 1);
    }
}
