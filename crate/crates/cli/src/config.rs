//! Run configuration: one TOML file, overridable from the command line.
//!
//! Every command writes the configuration it actually ran with to
//! `<out_dir>/resolved_config.<command>.toml`.

use std::path::{Path, PathBuf};

use grace_core::data::DatasetSchema;
use grace_core::eval::{CorrelationMode, NestedCvConfig};
use grace_core::llm::ProviderConfig;
use grace_core::net::{ModelVariant, NetConfig};
use grace_core::uncertainty::{ClassifierKind, KMeansOptions};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaChoice {
    /// Take the action and feature lists from the CSV headers.
    #[default]
    Header,
    Mannersdb,
    MannersdbPlus,
}

impl SchemaChoice {
    pub fn schema(self) -> DatasetSchema {
        match self {
            SchemaChoice::Header => DatasetSchema::default(),
            SchemaChoice::Mannersdb => DatasetSchema::mannersdb(),
            SchemaChoice::MannersdbPlus => DatasetSchema::mannersdb_plus(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// Dataset directory; defaults to `<out_dir>/dataset`.
    pub dir: Option<PathBuf>,
    pub schema: SchemaChoice,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LlmConfig {
    /// Offline provider fixture (JSON). Without it the network provider is used.
    pub mock_fixture: Option<PathBuf>,
    /// Response cache; defaults to `<out_dir>/llm_cache.jsonl`.
    pub cache: Option<PathBuf>,
    /// Labeling prompts (TOML); defaults to the built-in pole assignment.
    pub labeling: Option<PathBuf>,
    /// Scene description template (TOML); defaults to the built-in one.
    pub template: Option<PathBuf>,
    pub provider: ProviderConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UncertaintyConfig {
    pub classifier: ClassifierKind,
    pub cv: NestedCvConfig,
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        UncertaintyConfig {
            classifier: ClassifierKind::Lr,
            cv: NestedCvConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraceConfig {
    pub variants: Vec<ModelVariant>,
    /// Group folds used to carve train/validation/test out of the scenes.
    pub folds: usize,
    /// Which fold serves as the test split.
    pub test_fold: usize,
    pub top_r: usize,
    pub correlation: CorrelationMode,
    pub net: NetConfig,
}

impl Default for GraceConfig {
    fn default() -> Self {
        GraceConfig {
            variants: vec![ModelVariant::Grace, ModelVariant::Ae],
            folds: 5,
            test_fold: 0,
            top_r: 3,
            correlation: CorrelationMode::Flattened,
            net: NetConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed; every stage derives its randomness from it.
    pub seed: u64,
    pub out_dir: PathBuf,
    pub data: DataConfig,
    pub llm: LlmConfig,
    pub kmeans: KMeansOptions,
    pub uncertainty: UncertaintyConfig,
    pub grace: GraceConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("grace-run"),
            data: DataConfig::default(),
            llm: LlmConfig::default(),
            kmeans: KMeansOptions::default(),
            uncertainty: UncertaintyConfig::default(),
            grace: GraceConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.data
            .dir
            .clone()
            .unwrap_or_else(|| self.out_dir.join("dataset"))
    }

    pub fn cache_path(&self) -> PathBuf {
        self.llm
            .cache
            .clone()
            .unwrap_or_else(|| self.out_dir.join("llm_cache.jsonl"))
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Pushes the master seed into every stage and fills defaulted paths.
    pub fn resolve(mut self) -> Self {
        self.grace.net.seed = self.seed;
        self.uncertainty.cv.seed = self.seed;
        self.data.dir = Some(self.dataset_dir());
        self.llm.cache = Some(self.cache_path());
        self
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Other(format!("config serialization: {e}")))
    }

    pub fn persist(&self, command: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))?;
        let path = self.artifact(&format!("resolved_config.{command}.toml"));
        std::fs::write(&path, self.to_toml()?).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
