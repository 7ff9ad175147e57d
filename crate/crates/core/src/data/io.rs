//! CSV ingestion and export.
//!
//! A dataset directory holds up to three files:
//!
//! * `scenes.csv`: `scene_id, robot_type, f_<feature_slug>...`
//! * `annotations.csv`: `scene_id, annotator_id, score_<action_slug>..., explanation_text`
//! * `explanation_labels.csv` (optional): `scene_id, annotator_id, <category_slug>...`
//!   with raw values in `{-1, 0, 1}`.
//!
//! Label rows are matched to annotations by `(scene_id, annotator_id)`; when a
//! pair repeats, the k-th label row goes to the k-th matching annotation.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use super::{
    AnnotationRecord, DataError, Dataset, DatasetSchema, ExplanationCategory, ExplanationVector,
    Result, RobotType, SceneRecord, ScoreVector, SCORE_MAX, SCORE_MIN,
};
use crate::llm::{denormalize_explanation, normalize_explanation};

pub const SCENES_FILE: &str = "scenes.csv";
pub const ANNOTATIONS_FILE: &str = "annotations.csv";
pub const LABELS_FILE: &str = "explanation_labels.csv";

const FEATURE_PREFIX: &str = "f_";
const SCORE_PREFIX: &str = "score_";

/// Loads and validates a dataset directory.
pub fn load_dataset(dir: &Path, schema: &DatasetSchema) -> Result<Dataset> {
    let (scenes, feature_names) = read_scenes(&dir.join(SCENES_FILE), schema)?;
    let (annotations, action_names) = read_annotations(&dir.join(ANNOTATIONS_FILE), schema)?;

    let index: HashMap<&str, ()> = scenes.iter().map(|s| (s.scene_id.as_str(), ())).collect();
    for (i, a) in annotations.iter().enumerate() {
        if !index.contains_key(a.scene_id.as_str()) {
            return Err(DataError::DanglingSceneReference {
                file: display(&dir.join(ANNOTATIONS_FILE)),
                line: i as u64 + 2,
                scene_id: a.scene_id.clone(),
            });
        }
    }

    let mut dataset = Dataset::new(scenes, annotations, action_names, feature_names)?;
    let labels_path = dir.join(LABELS_FILE);
    if labels_path.exists() {
        let explanations = read_labels(&labels_path, &dataset)?;
        dataset = dataset.with_explanations(explanations);
    }
    Ok(dataset)
}

/// Writes `scenes.csv`, `annotations.csv` and, when any annotation carries an
/// explanation, `explanation_labels.csv`.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    let path = dir.join(SCENES_FILE);
    let mut w = writer(&path)?;
    let mut header = vec!["scene_id".to_string(), "robot_type".to_string()];
    header.extend(dataset.feature_names().iter().map(|f| format!("{FEATURE_PREFIX}{f}")));
    w.write_record(&header).map_err(|e| csv_err(&path, e))?;
    for s in dataset.scenes() {
        let mut row = vec![s.scene_id.clone(), s.robot_type.to_string()];
        row.extend(s.features.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;

    let path = dir.join(ANNOTATIONS_FILE);
    let mut w = writer(&path)?;
    let mut header = vec!["scene_id".to_string(), "annotator_id".to_string()];
    header.extend(dataset.action_names().iter().map(|a| format!("{SCORE_PREFIX}{a}")));
    header.push("explanation_text".into());
    w.write_record(&header).map_err(|e| csv_err(&path, e))?;
    for a in dataset.annotations() {
        let mut row = vec![a.scene_id.clone(), a.annotator_id.clone()];
        row.extend(a.scores.as_slice().iter().map(|v| v.to_string()));
        row.push(a.explanation_text.clone());
        w.write_record(&row).map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;

    if dataset.annotations().iter().any(|a| a.explanation.is_some()) {
        write_labels(dataset, &dir.join(LABELS_FILE))?;
    }
    Ok(())
}

/// Writes the raw `{-1, 0, 1}` label file for annotations that have one.
pub(crate) fn write_labels(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["scene_id".to_string(), "annotator_id".to_string()];
    header.extend(ExplanationCategory::ALL.iter().map(|c| c.slug().to_string()));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for a in dataset.annotations() {
        let Some(e) = &a.explanation else { continue };
        let mut row = vec![a.scene_id.clone(), a.annotator_id.clone()];
        row.extend(denormalize_explanation(e).iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn read_scenes(path: &Path, schema: &DatasetSchema) -> Result<(Vec<SceneRecord>, Vec<String>)> {
    let file = display(path);
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let id_col = require(&headers, "scene_id", &file)?;
    let robot_col = require(&headers, "robot_type", &file)?;
    let feature_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_prefix(FEATURE_PREFIX).map(|n| (i, n.to_string())))
        .collect();
    if let Some(expected) = schema.feature_count {
        if feature_cols.len() != expected {
            return Err(DataError::WrongFeatureArity {
                context: format!("{file} header"),
                expected,
                found: feature_cols.len(),
            });
        }
    }

    let mut scenes = Vec::new();
    let mut seen = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        check_width(&rec, &headers, &file, line)?;
        let scene_id = rec[id_col].to_string();
        let robot_type: RobotType =
            rec[robot_col]
                .parse()
                .map_err(|value| DataError::UnknownRobotType {
                    file: file.clone(),
                    line,
                    value,
                })?;
        let features = feature_cols
            .iter()
            .map(|(i, name)| parse_num(&rec[*i], &file, line, &format!("{FEATURE_PREFIX}{name}")))
            .collect::<Result<Vec<_>>>()?;
        if seen.insert(scene_id.clone(), ()).is_some() {
            return Err(DataError::DuplicateScene {
                file: file.clone(),
                line,
                scene_id,
            });
        }
        scenes.push(SceneRecord {
            scene_id,
            robot_type,
            features,
        });
    }
    Ok((scenes, feature_cols.into_iter().map(|(_, n)| n).collect()))
}

fn read_annotations(
    path: &Path,
    schema: &DatasetSchema,
) -> Result<(Vec<AnnotationRecord>, Vec<String>)> {
    let file = display(path);
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let id_col = require(&headers, "scene_id", &file)?;
    let annotator_col = require(&headers, "annotator_id", &file)?;
    let text_col = require(&headers, "explanation_text", &file)?;
    let score_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_prefix(SCORE_PREFIX).map(|n| (i, n.to_string())))
        .collect();
    let expected = schema.action_count.unwrap_or(score_cols.len());
    if score_cols.len() != expected || expected == 0 {
        return Err(DataError::WrongFeatureArity {
            context: format!("{file} score columns"),
            expected,
            found: score_cols.len(),
        });
    }

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        check_width(&rec, &headers, &file, line)?;
        let mut scores = Vec::with_capacity(score_cols.len());
        for (i, name) in &score_cols {
            let column = format!("{SCORE_PREFIX}{name}");
            let v = parse_num(&rec[*i], &file, line, &column)?;
            if !(SCORE_MIN..=SCORE_MAX).contains(&v) {
                return Err(DataError::ScoreOutOfRange {
                    file: file.clone(),
                    line,
                    column,
                    value: v,
                });
            }
            scores.push(v);
        }
        out.push(AnnotationRecord {
            scene_id: rec[id_col].to_string(),
            annotator_id: rec[annotator_col].to_string(),
            scores: ScoreVector::new(scores)?,
            explanation_text: rec[text_col].to_string(),
            explanation: None,
        });
    }
    Ok((out, score_cols.into_iter().map(|(_, n)| n).collect()))
}

fn read_labels(path: &Path, dataset: &Dataset) -> Result<Vec<Option<ExplanationVector>>> {
    let file = display(path);
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let id_col = require(&headers, "scene_id", &file)?;
    let annotator_col = require(&headers, "annotator_id", &file)?;
    let cat_cols = ExplanationCategory::ALL
        .iter()
        .map(|c| require(&headers, c.slug(), &file))
        .collect::<Result<Vec<_>>>()?;

    // (scene, annotator) -> queue of annotation indices, consumed in order.
    let mut slots: HashMap<(String, String), std::collections::VecDeque<usize>> = HashMap::new();
    for (i, a) in dataset.annotations().iter().enumerate() {
        slots
            .entry((a.scene_id.clone(), a.annotator_id.clone()))
            .or_default()
            .push_back(i);
    }

    let mut out = vec![None; dataset.annotations().len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        check_width(&rec, &headers, &file, line)?;
        let mut raw = [0i8; ExplanationCategory::COUNT];
        for (slot, &col) in raw.iter_mut().zip(&cat_cols) {
            let v = parse_num(&rec[col], &file, line, &headers[col])?;
            if v != -1.0 && v != 0.0 && v != 1.0 {
                return Err(DataError::LabelOutOfDomain {
                    file: file.clone(),
                    line,
                    value: v,
                });
            }
            *slot = v as i8;
        }
        let key = (rec[id_col].to_string(), rec[annotator_col].to_string());
        let idx = slots
            .get_mut(&key)
            .and_then(|q| q.pop_front())
            .ok_or_else(|| DataError::UnmatchedLabel {
                file: file.clone(),
                line,
                scene_id: key.0.clone(),
                annotator_id: key.1.clone(),
            })?;
        let normalized =
            normalize_explanation(&raw).map_err(|_| DataError::LabelOutOfDomain {
                file: file.clone(),
                line,
                value: f64::NAN,
            })?;
        out[idx] = Some(normalized);
    }
    Ok(out)
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    Ok(ReaderBuilder::new().flexible(true).from_reader(f))
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let f = File::create(path).map_err(|e| io_err(path, e))?;
    Ok(WriterBuilder::new().from_writer(f))
}

fn require(headers: &StringRecord, column: &str, file: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| DataError::MissingColumn {
            file: file.to_string(),
            column: column.to_string(),
        })
}

fn check_width(rec: &StringRecord, headers: &StringRecord, file: &str, line: u64) -> Result<()> {
    if rec.len() != headers.len() {
        return Err(DataError::WrongFeatureArity {
            context: format!("{file} line {line}"),
            expected: headers.len(),
            found: rec.len(),
        });
    }
    Ok(())
}

fn parse_num(s: &str, file: &str, line: u64, column: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DataError::InvalidNumber {
            file: file.to_string(),
            line,
            column: column.to_string(),
            value: s.to_string(),
        })
}

fn line_of(rec: &StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io {
        path: display(path),
        source,
    }
}

fn csv_err(path: &Path, source: csv::Error) -> DataError {
    DataError::Csv {
        path: display(path),
        source,
    }
}
