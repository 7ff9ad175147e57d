use std::path::Path;

use serde::{Deserialize, Serialize};

use super::classify::ClassifierModel;
use super::{Result, UncertaintyError};

pub const CLASSIFIER_FORMAT: &str = "grace-classifier";
pub const CLASSIFIER_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ClassifierFile {
    format: String,
    version: u32,
    model: ClassifierModel,
}

impl ClassifierModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ClassifierFile {
            format: CLASSIFIER_FORMAT.into(),
            version: CLASSIFIER_VERSION,
            model: self.clone(),
        })
        .expect("classifier serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let head: serde_json::Value =
            serde_json::from_str(text).map_err(|e| UncertaintyError::Format(e.to_string()))?;
        if head.get("format").and_then(|v| v.as_str()) != Some(CLASSIFIER_FORMAT) {
            return Err(UncertaintyError::Format("missing or unexpected format tag".into()));
        }
        let version = head.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if version != CLASSIFIER_VERSION {
            return Err(UncertaintyError::UnsupportedVersion(version));
        }
        let file: ClassifierFile =
            serde_json::from_value(head).map_err(|e| UncertaintyError::Format(e.to_string()))?;
        if file.model.members.is_empty() {
            return Err(UncertaintyError::Format("classifier has no members".into()));
        }
        Ok(file.model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|source| UncertaintyError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| UncertaintyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn round_trip_every_kind() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let y: Vec<u8> = (0..30).map(|i| u8::from(i >= 15)).collect();
        for kind in ClassifierKind::ALL {
            let m = bagging_ensemble(&Hyperparams::default_for(kind), &x, &y, 2, 5).unwrap();
            let back = ClassifierModel::from_json(&m.to_json()).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.predict(&x).unwrap(), m.predict(&x).unwrap());
        }
        let m = train_classifier(&Hyperparams::default_for(ClassifierKind::Lr), &x, &y, 0).unwrap();
        let bumped = m.to_json().replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(
            ClassifierModel::from_json(&bumped),
            Err(UncertaintyError::UnsupportedVersion(9))
        ));
    }
}
