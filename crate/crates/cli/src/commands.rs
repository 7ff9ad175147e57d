//! One function per subcommand. Each reads the artifacts it names, writes
//! its own, and prints a short `key=value` summary on stdout.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use grace_core::data::{
    group_split_by, load_dataset, synthesize_dataset, write_dataset, AnnotationRecord, Dataset,
    ExplanationCategory, ExplanationMode, SynthSpec,
};
use grace_core::eval::{
    aleatoric_uncertainty, cluster_reports, emit_report, fit_selected, nested_cv,
    regression_report, run_pipeline, PipelineConfig, PipelineInput, ReportRow, RoutedOutput,
};
use grace_core::llm::{
    denormalize_explanation, describe_scene, label_annotation, labeling_prompt, prompt_hash,
    scene_expected_scores, LabelingConfig, LlmClient, LlmProvider, MockFixture, MockProvider,
    ResponseCache, SceneTemplate,
};
use grace_core::net::{
    correct_scores, generate_explanation, predict_scores, train, train_baseline, GraceModel,
    ModelVariant, TrainingRow,
};
use grace_core::uncertainty::{
    kmeans_pp, variance_features, weak_labels, ClassifierKind, ClassifierModel, WeakLabel,
};
use serde::Serialize;

use crate::artifacts::{self, LlmScores, SplitFile};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::Preset;

fn load(cfg: &RunConfig) -> Result<Dataset> {
    let dir = cfg.dataset_dir();
    if !dir.is_dir() {
        return Err(CliError::missing("dataset directory", &dir));
    }
    Ok(load_dataset(&dir, &cfg.data.schema.schema())?)
}

fn mkdir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct DatasetSummary<'a> {
    scenes: usize,
    annotations: usize,
    explained: usize,
    actions: &'a [String],
    features: &'a [String],
}

fn summarize(ds: &Dataset) -> DatasetSummary<'_> {
    DatasetSummary {
        scenes: ds.scenes().len(),
        annotations: ds.annotations().len(),
        explained: ds.explained_indices().len(),
        actions: ds.action_names(),
        features: ds.feature_names(),
    }
}

fn print_summary(s: &DatasetSummary<'_>) {
    println!(
        "scenes={} annotations={} explained={}",
        s.scenes, s.annotations, s.explained
    );
    println!("actions={}", s.actions.join(","));
    println!("features={}", s.features.join(","));
}

pub fn synth_spec(preset: Preset, scenes: usize, annotators: usize) -> SynthSpec {
    match preset {
        Preset::ExplanationBenefit => SynthSpec::explanation_benefit(scenes, annotators),
        Preset::TwoRegime => SynthSpec::two_regime(scenes, annotators, 0.1, 0.8),
        Preset::ScoreDriven => {
            let mut spec = SynthSpec::explanation_benefit(scenes, annotators);
            spec.explanation_scale = 0.0;
            spec.explanation_mode = ExplanationMode::ScoreDriven {
                category: ExplanationCategory::RobotProximity.index(),
                low_action: 2,
                high_action: 6,
                gap: 2.0,
            };
            spec
        }
    }
}

/// Two adjacent levels whose expected value is `score`.
fn two_level_response(score: f64) -> Vec<(String, f64)> {
    let lo = score.floor().clamp(1.0, 5.0);
    let w = score - lo;
    if w <= 0.0 {
        return vec![(format!("{lo}"), 1.0)];
    }
    vec![(format!("{}", lo + 1.0), w), (format!("{lo}"), 1.0 - w)]
}

/// Offline provider that answers every scoring and labeling prompt of a
/// synthetic dataset with the generator's values.
pub fn synthetic_fixture(
    ds: &Dataset,
    llm: &LlmScores,
    template: &SceneTemplate,
    labeling: &LabelingConfig,
) -> Result<MockFixture> {
    let mut fixture = MockFixture {
        id: "mock-synthetic".into(),
        ..MockFixture::default()
    };
    for scene in ds.scenes() {
        let scores = llm.get(&scene.scene_id)?;
        for (action, &s) in ds.action_names().iter().zip(scores) {
            let prompt = describe_scene(template, scene, ds.feature_names(), action)?;
            fixture.exact.insert(prompt_hash(&prompt), two_level_response(s));
        }
    }
    for a in ds.annotations() {
        let Some(e) = &a.explanation else { continue };
        let raw = denormalize_explanation(e);
        for spec in &labeling.categories {
            let prompt = labeling_prompt(spec, &a.explanation_text);
            let answer = raw[spec.category.index()].to_string();
            fixture.exact.insert(prompt_hash(&prompt), vec![(answer, 1.0)]);
        }
    }
    Ok(fixture)
}

pub fn ingest(
    cfg: &RunConfig,
    synthetic: Option<(Preset, usize, usize)>,
) -> Result<()> {
    if let Some((preset, scenes, annotators)) = synthetic {
        let spec = synth_spec(preset, scenes, annotators);
        let (ds, truth) =
            synthesize_dataset(&spec, cfg.seed).map_err(|e| CliError::Validation(e.to_string()))?;
        mkdir(&cfg.out_dir)?;
        write_dataset(&ds, &cfg.dataset_dir())?;
        let llm = LlmScores {
            actions: ds.action_names().to_vec(),
            scores: truth
                .scene_ids
                .iter()
                .cloned()
                .zip(truth.llm_scores.iter().cloned())
                .collect(),
        };
        llm.write(&cfg.artifact(artifacts::LLM_SCORES))?;
        artifacts::write_json(&cfg.artifact(artifacts::SYNTH_TRUTH), &truth)?;
        let fixture = synthetic_fixture(&ds, &llm, &template(cfg)?, &labeling(cfg)?)?;
        artifacts::write_json(&cfg.artifact(artifacts::MOCK_FIXTURE), &fixture)?;
        println!("synthetic={} seed={}", preset.as_str(), cfg.seed);
    }
    let ds = load(cfg)?;
    let summary = summarize(&ds);
    print_summary(&summary);
    mkdir(&cfg.out_dir)?;
    artifacts::write_json(&cfg.artifact("ingest_summary.json"), &summary)
}

fn template(cfg: &RunConfig) -> Result<SceneTemplate> {
    match &cfg.llm.template {
        Some(p) => read_toml(p),
        None => Ok(SceneTemplate::default()),
    }
}

fn labeling(cfg: &RunConfig) -> Result<LabelingConfig> {
    match &cfg.llm.labeling {
        Some(p) => read_toml(p),
        None => Ok(LabelingConfig::default()),
    }
}

fn provider(cfg: &RunConfig) -> Result<Arc<dyn LlmProvider>> {
    if let Some(path) = &cfg.llm.mock_fixture {
        let fixture: MockFixture = artifacts::read_json(path, "mock provider fixture")?;
        return Ok(Arc::new(MockProvider::from_fixture(fixture)));
    }
    network_provider(cfg)
}

#[cfg(feature = "http")]
fn network_provider(cfg: &RunConfig) -> Result<Arc<dyn LlmProvider>> {
    grace_core::llm::OpenAiCompatibleProvider::new(cfg.llm.provider.clone())
        .map(|p| Arc::new(p) as Arc<dyn LlmProvider>)
        .map_err(|e| CliError::ProviderUnavailable(e.to_string()))
}

#[cfg(not(feature = "http"))]
fn network_provider(_cfg: &RunConfig) -> Result<Arc<dyn LlmProvider>> {
    Err(CliError::ProviderUnavailable(
        "built without the `http` feature; configure llm.mock_fixture or pass --mock".into(),
    ))
}

fn client(cfg: &RunConfig) -> Result<LlmClient> {
    let provider = provider(cfg)?;
    mkdir(&cfg.out_dir)?;
    let cache = ResponseCache::open(&cfg.cache_path())?;
    Ok(LlmClient::new(provider, cfg.llm.provider.clone(), cache))
}

pub fn label(cfg: &RunConfig) -> Result<()> {
    let ds = load(cfg)?;
    let labeling = labeling(cfg)?;
    let client = client(cfg)?;
    let mut explanations = Vec::with_capacity(ds.annotations().len());
    for a in ds.annotations() {
        explanations.push(label_annotation(&client, &labeling, &a.explanation_text)?);
    }
    let agree = ds
        .annotations()
        .iter()
        .zip(&explanations)
        .filter(|(a, e)| a.explanation.is_some() && e.is_some())
        .map(|(a, e)| (a.explanation == *e) as usize)
        .collect::<Vec<_>>();
    let labeled = explanations.iter().filter(|e| e.is_some()).count();
    let total = ds.annotations().len();
    let out = cfg.artifact("labeled");
    write_dataset(&ds.with_explanations(explanations), &out)?;
    println!(
        "labeled={labeled} unlabeled={} provider_calls={}",
        total - labeled,
        client.provider_requests()
    );
    if !agree.is_empty() {
        let rate = agree.iter().sum::<usize>() as f64 / agree.len() as f64;
        println!("agreement_with_existing={rate:.4}");
    }
    println!("dataset={}", out.display());
    Ok(())
}

pub fn llm_score(cfg: &RunConfig) -> Result<()> {
    let ds = load(cfg)?;
    let template = template(cfg)?;
    let client = client(cfg)?;
    let mut scores = BTreeMap::new();
    for scene in ds.scenes() {
        let s = scene_expected_scores(
            &client,
            &template,
            scene,
            ds.feature_names(),
            ds.action_names(),
        )?;
        scores.insert(scene.scene_id.clone(), s);
    }
    let llm = LlmScores {
        actions: ds.action_names().to_vec(),
        scores,
    };
    llm.write(&cfg.artifact(artifacts::LLM_SCORES))?;
    println!(
        "scenes={} provider_calls={} cache_entries={}",
        ds.scenes().len(),
        client.provider_requests(),
        client.cache().len()
    );
    Ok(())
}

#[derive(Serialize)]
struct ClusterSummary {
    seed: u64,
    k: usize,
    actions: Vec<String>,
    centroids: Vec<Vec<f64>>,
    certain_centroid: usize,
    sse: f64,
    certain: usize,
    uncertain: usize,
    skipped_scenes: usize,
}

pub fn cluster(cfg: &RunConfig) -> Result<()> {
    let ds = load(cfg)?;
    let (ids, vars) = variance_features(&ds);
    if ids.len() < 2 {
        return Err(CliError::Validation(
            "clustering needs at least two scenes with two or more annotations".into(),
        ));
    }
    let points: Vec<Vec<f64>> = vars.into_iter().map(|v| v.0).collect();
    let result = kmeans_pp(&points, 2, cfg.seed, &cfg.kmeans)?;
    let labels = weak_labels(&result, &ids)?;
    mkdir(&cfg.out_dir)?;
    artifacts::write_weak_labels(&cfg.artifact(artifacts::WEAK_LABELS), &labels)?;
    let uncertain = labels.values().filter(|l| **l == WeakLabel::Uncertain).count();
    let summary = ClusterSummary {
        seed: cfg.seed,
        k: 2,
        actions: ds.action_names().to_vec(),
        centroids: result.centroids.clone(),
        certain_centroid: result.certain_centroid,
        sse: result.sse,
        certain: labels.len() - uncertain,
        uncertain,
        skipped_scenes: ds.scenes().len() - ids.len(),
    };
    artifacts::write_json(&cfg.artifact(artifacts::CLUSTERS), &summary)?;
    println!(
        "certain={} uncertain={} skipped={} sse={:.6}",
        summary.certain, summary.uncertain, summary.skipped_scenes, summary.sse
    );
    Ok(())
}

pub fn train_uncertainty(cfg: &RunConfig) -> Result<()> {
    let ds = load(cfg)?;
    let labels = artifacts::read_weak_labels(&cfg.artifact(artifacts::WEAK_LABELS))?;
    let kind = cfg.uncertainty.classifier;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut groups = Vec::new();
    for (id, l) in &labels {
        let scene = ds.scene(id).ok_or_else(|| {
            CliError::Validation(format!("weak label for unknown scene `{id}`"))
        })?;
        x.push(scene.features.clone());
        y.push(l.as_u8());
        groups.push(id.clone());
    }
    let report = nested_cv(kind, &x, &y, &groups, &cfg.uncertainty.cv)?;
    let leaks: usize = report.audits.iter().map(|a| a.shared_groups).sum();
    artifacts::write_json(
        &cfg.artifact(&artifacts::cv_report_file(kind.as_str())),
        &report,
    )?;
    let model = fit_selected(&report, &x, &y, &cfg.uncertainty.cv)?;
    model.save(&cfg.artifact(&artifacts::classifier_file(kind.as_str())))?;
    println!(
        "classifier={kind} balanced_accuracy={:.4} (± {:.4}) macro_f1={:.4} (± {:.4}) macro_precision={:.4} (± {:.4})",
        report.mean.balanced_accuracy,
        report.std.balanced_accuracy,
        report.mean.macro_f1,
        report.std.macro_f1,
        report.mean.macro_precision,
        report.std.macro_precision,
    );
    println!("audited_splits={} shared_groups={leaks}", report.audits.len());
    Ok(())
}

/// Explained annotations paired with their scene's LLM scores.
struct Rows {
    scene_ids: Vec<String>,
    rows: Vec<TrainingRow>,
}

fn training_rows(ds: &Dataset, llm: &LlmScores) -> Result<Rows> {
    llm.check_actions(ds.action_names())?;
    let mut scene_ids = Vec::new();
    let mut rows = Vec::new();
    for i in ds.explained_indices() {
        let a: &AnnotationRecord = &ds.annotations()[i];
        let Some(e) = &a.explanation else { continue };
        rows.push(TrainingRow {
            s_llm: llm.get(&a.scene_id)?.to_vec(),
            s_human: a.scores.as_slice().to_vec(),
            e_human: e.as_slice().to_vec(),
        });
        scene_ids.push(a.scene_id.clone());
    }
    if rows.is_empty() {
        return Err(CliError::Validation(
            "no annotation carries an explanation label (run `grace label`)".into(),
        ));
    }
    Ok(Rows { scene_ids, rows })
}

fn pick<'a>(rows: &'a Rows, scenes: &HashSet<&str>) -> Vec<&'a TrainingRow> {
    rows.rows
        .iter()
        .zip(&rows.scene_ids)
        .filter(|(_, s)| scenes.contains(s.as_str()))
        .map(|(r, _)| r)
        .collect()
}

fn owned(rows: Vec<&TrainingRow>) -> Vec<TrainingRow> {
    rows.into_iter().cloned().collect()
}

pub fn train_grace(cfg: &RunConfig) -> Result<()> {
    let ds = load(cfg)?;
    let llm = LlmScores::read(&cfg.artifact(artifacts::LLM_SCORES))?;
    let rows = training_rows(&ds, &llm)?;
    let g = &cfg.grace;
    if g.test_fold >= g.folds {
        return Err(CliError::Validation(format!(
            "test_fold {} must be below folds {}",
            g.test_fold, g.folds
        )));
    }
    let splits = group_split_by(&rows.scene_ids, g.folds, cfg.seed)?;
    let s = &splits[g.test_fold];
    let scenes_of = |idx: &[usize]| -> Vec<String> {
        let set: std::collections::BTreeSet<&str> =
            idx.iter().map(|&i| rows.scene_ids[i].as_str()).collect();
        set.into_iter().map(String::from).collect()
    };
    let split = SplitFile {
        seed: cfg.seed,
        folds: g.folds,
        test_fold: g.test_fold,
        train: scenes_of(&s.train),
        validation: scenes_of(&s.validation),
        test: scenes_of(&s.test),
    };
    let train_rows: Vec<TrainingRow> = s.train.iter().map(|&i| rows.rows[i].clone()).collect();
    let val_rows: Vec<TrainingRow> = s.validation.iter().map(|&i| rows.rows[i].clone()).collect();
    mkdir(&cfg.out_dir)?;
    artifacts::write_json(&cfg.artifact(artifacts::SPLIT), &split)?;

    let mut net = g.net.clone();
    net.n = ds.n_actions();
    net.m = ExplanationCategory::COUNT;
    for &variant in &g.variants {
        let model = if variant.uses_explanations() {
            train(variant, &train_rows, &val_rows, &net)?
        } else {
            train_baseline(variant, &train_rows, &val_rows, &net)?
        };
        let path = cfg.artifact(&artifacts::model_file(variant.as_str()));
        model.save(&path)?;
        let t = model.training.as_ref().expect("trained model");
        println!(
            "variant={variant} epochs={} best_epoch={} best_val_loss={:.6} stopped_early={} model={}",
            t.epochs_run,
            t.best_epoch,
            t.best_val_loss,
            t.stopped_early,
            path.display()
        );
    }
    println!(
        "train_rows={} validation_rows={} test_rows={}",
        train_rows.len(),
        val_rows.len(),
        s.test.len()
    );
    Ok(())
}

fn model_label(v: ModelVariant) -> &'static str {
    if v.uses_explanations() {
        "Expl."
    } else {
        "No Expl."
    }
}

pub fn evaluate(cfg: &RunConfig) -> Result<()> {
    let ds = load(cfg)?;
    let llm = LlmScores::read(&cfg.artifact(artifacts::LLM_SCORES))?;
    let split: SplitFile = artifacts::read_json(
        &cfg.artifact(artifacts::SPLIT),
        "split (run `grace train-grace`)",
    )?;
    let rows = training_rows(&ds, &llm)?;
    let test_scenes: HashSet<&str> = split.test.iter().map(String::as_str).collect();
    let test = owned(pick(&rows, &test_scenes));
    let test_ids: Vec<&str> = rows
        .scene_ids
        .iter()
        .filter(|s| test_scenes.contains(s.as_str()))
        .map(String::as_str)
        .collect();
    if test.is_empty() {
        return Err(CliError::Validation("test split has no explained rows".into()));
    }
    let labels_path = cfg.artifact(artifacts::WEAK_LABELS);
    let labels = if labels_path.exists() {
        Some(artifacts::read_weak_labels(&labels_path)?)
    } else {
        None
    };
    let uncertain: Option<Vec<bool>> = labels.as_ref().map(|l| {
        test_ids
            .iter()
            .map(|s| l.get(*s) == Some(&WeakLabel::Uncertain))
            .collect()
    });

    let truth: Vec<Vec<f64>> = test.iter().map(|r| r.s_human.clone()).collect();
    let mut predictions: Vec<(&str, &str, Vec<Vec<f64>>)> = Vec::new();
    for &variant in &cfg.grace.variants {
        let path = cfg.artifact(&artifacts::model_file(variant.as_str()));
        if !path.exists() {
            return Err(CliError::missing(
                &format!("{variant} model (run `grace train-grace`)"),
                &path,
            ));
        }
        let model = GraceModel::load(&path)?;
        let pred = if variant.uses_explanations() {
            let inputs: Vec<(&[f64], &[f64])> = test
                .iter()
                .map(|r| (r.s_llm.as_slice(), r.e_human.as_slice()))
                .collect();
            correct_scores(&model, &inputs)?
        } else {
            let inputs: Vec<&[f64]> = test.iter().map(|r| r.s_llm.as_slice()).collect();
            predict_scores(&model, &inputs)?
        };
        predictions.push((
            variant.as_str(),
            model_label(variant),
            pred.into_iter().map(|s| s.into_inner()).collect(),
        ));
    }
    predictions.push((
        "LLM",
        "Passthrough",
        test.iter().map(|r| r.s_llm.clone()).collect(),
    ));

    let mode = cfg.grace.correlation;
    let mut report = Vec::new();
    for (model, variant, pred) in &predictions {
        match &uncertain {
            Some(u) => {
                for (cluster, r) in cluster_reports(pred, &truth, u, mode)? {
                    report.push(ReportRow::new(model, variant, cluster, &r));
                }
            }
            None => {
                let r = regression_report(pred, &truth, mode)?;
                report.push(ReportRow::new(model, variant, "WD", &r));
            }
        }
    }
    let (csv_path, table) = emit_report(&report, &cfg.out_dir)?;
    print!("{table}");
    if let Some(l) = &labels {
        aleatoric(cfg, &ds, l)?;
    }
    println!("report={}", csv_path.display());
    Ok(())
}

/// Mean log-variance per cluster, for scenes with at least two annotations.
fn aleatoric(cfg: &RunConfig, ds: &Dataset, labels: &BTreeMap<String, WeakLabel>) -> Result<()> {
    let mut by: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (id, l) in labels {
        by.entry("WD").or_default().push(id);
        let c = if *l == WeakLabel::Uncertain { "UC" } else { "CC" };
        by.entry(c).or_default().push(id);
    }
    let mut w = csv::Writer::from_path(cfg.artifact("aleatoric.csv"))
        .map_err(|e| CliError::Other(e.to_string()))?;
    w.write_record(["cluster", "mean", "std", "scenes"])
        .map_err(|e| CliError::Other(e.to_string()))?;
    for cluster in ["WD", "UC", "CC"] {
        let Some(ids) = by.get(cluster) else { continue };
        let (m, s) = aleatoric_uncertainty(ds, ids)?;
        println!("aleatoric cluster={cluster} mean={m:.4} std={s:.4}");
        w.write_record([
            cluster.to_string(),
            m.to_string(),
            s.to_string(),
            ids.len().to_string(),
        ])
        .map_err(|e| CliError::Other(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Other(e.to_string()))
}

pub fn parse_scores(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| (1.0..=5.0).contains(v))
                .ok_or_else(|| CliError::Validation(format!("`{t}` is not a score in [1, 5]")))
        })
        .collect()
}

pub fn explain(cfg: &RunConfig, model: &Path, scores: &[String], top_r: usize) -> Result<()> {
    if !model.exists() {
        return Err(CliError::missing("GRACE model (run `grace train-grace`)", model));
    }
    let model = GraceModel::load(model)?;
    let rows = scores
        .iter()
        .map(|s| parse_scores(s))
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(CliError::Validation("no --scores given".into()));
    }
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let ranked = generate_explanation(&model, &refs, top_r)?;
    let mut listing = String::new();
    for (row, expl) in rows.iter().zip(&ranked) {
        let s: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let e: Vec<String> = expl.iter().map(|g| g.to_string()).collect();
        listing.push_str(&format!("Scores: {}\nExpl.: {}\n", s.join(" "), e.join(", ")));
    }
    print!("{listing}");
    mkdir(&cfg.out_dir)?;
    artifacts::write_text(&cfg.artifact(artifacts::EXPLANATIONS), &listing)
}

#[derive(Serialize)]
struct RoutedRecord<'a> {
    scene_id: &'a str,
    annotator_id: &'a str,
    #[serde(flatten)]
    output: RoutedOutput,
}

/// Routes every annotation through the full system: certainty classifier,
/// then LLM passthrough, score correction or explanation generation.
pub fn route(cfg: &RunConfig, model: &Path) -> Result<()> {
    let ds = load(cfg)?;
    let llm = LlmScores::read(&cfg.artifact(artifacts::LLM_SCORES))?;
    llm.check_actions(ds.action_names())?;
    let kind = cfg.uncertainty.classifier;
    let cpath = cfg.artifact(&artifacts::classifier_file(kind.as_str()));
    if !cpath.exists() {
        return Err(CliError::missing(
            "certainty classifier (run `grace train-uncertainty`)",
            &cpath,
        ));
    }
    if !model.exists() {
        return Err(CliError::missing("GRACE model (run `grace train-grace`)", model));
    }
    let pipeline = PipelineConfig {
        classifier: Some(ClassifierModel::load(&cpath)?),
        grace: Some(GraceModel::load(model)?),
        top_r: cfg.grace.top_r,
    };
    let mut lines = String::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in ds.annotations() {
        let scene = ds.scene(&a.scene_id).expect("validated dataset");
        let input = PipelineInput {
            features: &scene.features,
            llm_scores: llm.get(&a.scene_id)?,
            explanation: a.explanation.as_ref(),
            human_scores: Some(a.scores.as_slice()),
        };
        let output = run_pipeline(&pipeline, &input)?;
        *counts.entry(output.route()).or_default() += 1;
        let rec = RoutedRecord {
            scene_id: &a.scene_id,
            annotator_id: &a.annotator_id,
            output,
        };
        lines.push_str(&serde_json::to_string(&rec).map_err(|e| CliError::Other(e.to_string()))?);
        lines.push('\n');
    }
    mkdir(&cfg.out_dir)?;
    artifacts::write_text(&cfg.artifact(artifacts::ROUTED), &lines)?;
    let summary: Vec<String> = counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("{}", summary.join(" "));
    Ok(())
}

pub fn classifier_kind(s: &str) -> std::result::Result<ClassifierKind, String> {
    ClassifierKind::parse(s).ok_or_else(|| format!("unknown classifier `{s}` (LR, KNN, MLP, RF)"))
}

pub fn model_variant(s: &str) -> std::result::Result<ModelVariant, String> {
    ModelVariant::parse(s)
        .ok_or_else(|| format!("unknown variant `{s}` (GRACE, GRACE_NOISED, AE, VAE, DAE)"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_response_has_the_right_mean() {
        for s in [1.0, 1.5, 2.25, 3.999, 4.0, 4.5, 5.0] {
            let r = two_level_response(s);
            let m: f64 = r.iter().map(|(a, p)| a.parse::<f64>().unwrap() * p).sum();
            assert!((m - s).abs() < 1e-12, "{s} -> {r:?}");
        }
        assert_eq!(two_level_response(3.0).len(), 1);
    }

    #[test]
    fn scores_parse_with_spaces_or_commas() {
        assert_eq!(parse_scores("5 5 5,4 4").unwrap(), vec![5.0, 5.0, 5.0, 4.0, 4.0]);
        assert!(parse_scores("5 6").is_err());
        assert!(parse_scores("five").is_err());
    }
}
