//! On-disk formats of the intermediate pipeline artifacts.

use std::collections::BTreeMap;
use std::path::Path;

use grace_core::uncertainty::WeakLabel;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const LLM_SCORES: &str = "llm_scores.csv";
pub const WEAK_LABELS: &str = "weak_labels.csv";
pub const CLUSTERS: &str = "clusters.json";
pub const SPLIT: &str = "split.json";
pub const SYNTH_TRUTH: &str = "synth_truth.json";
pub const MOCK_FIXTURE: &str = "mock_provider.json";
pub const REPORT_CSV: &str = "report.csv";
pub const EXPLANATIONS: &str = "explanations.txt";
pub const ROUTED: &str = "routed.jsonl";

pub fn model_file(variant: &str) -> String {
    format!("model_{variant}.json")
}

pub fn classifier_file(kind: &str) -> String {
    format!("uncertainty_{kind}.json")
}

pub fn cv_report_file(kind: &str) -> String {
    format!("cv_report_{kind}.json")
}

fn require(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::missing(what, path))
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}

/// Pretty JSON with sorted object keys and a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Other(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Other(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    require(path, what)?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Expected LLM scores per scene, in dataset action order.
#[derive(Debug, Clone, PartialEq)]
pub struct LlmScores {
    pub actions: Vec<String>,
    pub scores: BTreeMap<String, Vec<f64>>,
}

impl LlmScores {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        let mut header = vec!["scene_id".to_string()];
        header.extend(self.actions.iter().map(|a| format!("score_{a}")));
        w.write_record(&header).map_err(|e| csv_err(path, e))?;
        for (id, s) in &self.scores {
            let mut row = vec![id.clone()];
            row.extend(s.iter().map(|v| v.to_string()));
            w.write_record(&row).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        require(path, "LLM scores (run `grace llm-score`)")?;
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
        let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
        if header.get(0) != Some("scene_id") {
            return Err(CliError::Validation(format!(
                "{}: first column must be scene_id",
                path.display()
            )));
        }
        let actions: Vec<String> = header
            .iter()
            .skip(1)
            .map(|h| h.strip_prefix("score_").unwrap_or(h).to_string())
            .collect();
        let mut scores = BTreeMap::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            let line = i + 2;
            let values = rec
                .iter()
                .skip(1)
                .map(|v| {
                    v.trim().parse::<f64>().ok().filter(|x| (1.0..=5.0).contains(x)).ok_or_else(
                        || {
                            CliError::Validation(format!(
                                "{} line {line}: `{v}` is not a score in [1, 5]",
                                path.display()
                            ))
                        },
                    )
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != actions.len() {
                return Err(CliError::Validation(format!(
                    "{} line {line}: expected {} scores, found {}",
                    path.display(),
                    actions.len(),
                    values.len()
                )));
            }
            scores.insert(rec[0].to_string(), values);
        }
        Ok(LlmScores { actions, scores })
    }

    /// Checks the action list against the dataset's.
    pub fn check_actions(&self, actions: &[String]) -> Result<()> {
        if self.actions != actions {
            return Err(CliError::Validation(format!(
                "LLM score columns {:?} do not match dataset actions {:?}",
                self.actions, actions
            )));
        }
        Ok(())
    }

    pub fn get(&self, scene_id: &str) -> Result<&[f64]> {
        self.scores.get(scene_id).map(Vec::as_slice).ok_or_else(|| {
            CliError::Validation(format!("no LLM scores for scene `{scene_id}`"))
        })
    }
}

pub fn write_weak_labels(path: &Path, labels: &BTreeMap<String, WeakLabel>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["scene_id", "label"]).map_err(|e| csv_err(path, e))?;
    for (id, l) in labels {
        let name = match l {
            WeakLabel::Certain => "certain",
            WeakLabel::Uncertain => "uncertain",
        };
        w.write_record([id.as_str(), name]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_weak_labels(path: &Path) -> Result<BTreeMap<String, WeakLabel>> {
    require(path, "weak labels (run `grace cluster`)")?;
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut out = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let label = match rec.get(1) {
            Some("certain") => WeakLabel::Certain,
            Some("uncertain") => WeakLabel::Uncertain,
            other => {
                return Err(CliError::Validation(format!(
                    "{} line {}: bad label {:?}",
                    path.display(),
                    i + 2,
                    other
                )))
            }
        };
        out.insert(rec[0].to_string(), label);
    }
    Ok(out)
}

/// Scene-level train/validation/test partition for the score networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitFile {
    pub seed: u64,
    pub folds: usize,
    pub test_fold: usize,
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}
