use std::path::{Path, PathBuf};

use cubetto_core::blocklang::{Lexicon, DEFAULT_BOARD_SIZE, DEFAULT_CAPACITY};
use cubetto_core::catalog::{list_presets, load_presets, LengthVariant, PresetRow, PromptTemplate};
use cubetto_core::gateway::ModelSpec;
use cubetto_core::lint::DEFAULT_LENGTH_LIMIT;
use serde::Deserialize;

use crate::CliError;

/// `cubetto.toml`. Relative paths resolve against the file's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    template: Option<PathBuf>,
    presets: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    archive: Option<PathBuf>,
    length_limit: Option<usize>,
    capacity: Option<usize>,
    board_width: Option<u32>,
    board_height: Option<u32>,
    timeout_secs: Option<u64>,
    /// Name of the environment variable holding a bearer token.
    api_key_env: Option<String>,
    #[serde(default)]
    models: Vec<ModelSpec>,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub template: Option<PathBuf>,
    pub presets: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub archive: PathBuf,
    pub length_limit: usize,
    pub capacity: usize,
    pub board_width: u32,
    pub board_height: u32,
    pub timeout_secs: u64,
    pub api_key_env: Option<String>,
    pub models: Vec<ModelSpec>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            template: None,
            presets: None,
            lexicon: None,
            archive: PathBuf::from("archive"),
            length_limit: DEFAULT_LENGTH_LIMIT,
            capacity: DEFAULT_CAPACITY,
            board_width: DEFAULT_BOARD_SIZE,
            board_height: DEFAULT_BOARD_SIZE,
            timeout_secs: 600,
            api_key_env: None,
            models: Vec::new(),
        }
    }
}

/// `CUBETTO_ENDPOINT_<NAME>` with the model name upper-cased and every
/// character outside `[A-Z0-9]` replaced by '_'.
pub fn endpoint_env_var(model_name: &str) -> String {
    let name: String = model_name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_uppercase() } else { '_' })
        .collect();
    format!("CUBETTO_ENDPOINT_{name}")
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let file: ConfigFile = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::from_file(file, dir)
    }

    fn from_file(file: ConfigFile, dir: &Path) -> Result<Self, CliError> {
        let existing = |p: Option<PathBuf>, what: &str| -> Result<Option<PathBuf>, CliError> {
            let Some(p) = p else { return Ok(None) };
            let p = dir.join(p);
            if !p.is_file() {
                return Err(CliError::Usage(format!("{what} file {} does not exist", p.display())));
            }
            Ok(Some(p))
        };
        let defaults = Config::default();
        let config = Self {
            template: existing(file.template, "template")?,
            presets: existing(file.presets, "presets")?,
            lexicon: existing(file.lexicon, "lexicon")?,
            archive: dir.join(file.archive.unwrap_or(defaults.archive)),
            length_limit: file.length_limit.unwrap_or(defaults.length_limit),
            capacity: file.capacity.unwrap_or(defaults.capacity),
            board_width: file.board_width.unwrap_or(defaults.board_width),
            board_height: file.board_height.unwrap_or(defaults.board_height),
            timeout_secs: file.timeout_secs.unwrap_or(defaults.timeout_secs),
            api_key_env: file.api_key_env,
            models: file.models,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.capacity == 0 {
            return Err(CliError::Usage("capacity must be at least 1".into()));
        }
        if self.board_width == 0 || self.board_height == 0 {
            return Err(CliError::Usage("board dimensions must be at least 1".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for m in &self.models {
            m.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            if !names.insert(&m.name) {
                return Err(CliError::Usage(format!("model {} is configured twice", m.name)));
            }
        }
        Ok(())
    }

    /// Configured models with endpoint overrides from the environment.
    pub fn models(&self) -> Vec<ModelSpec> {
        self.models
            .iter()
            .cloned()
            .map(|mut m| {
                if let Ok(endpoint) = std::env::var(endpoint_env_var(&m.name)) {
                    m.endpoint = endpoint;
                }
                m
            })
            .collect()
    }

    pub fn presets(&self) -> Result<Vec<PresetRow>, CliError> {
        match &self.presets {
            Some(path) => load_presets(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
            None => Ok(list_presets()),
        }
    }

    pub fn template(&self, variant: LengthVariant) -> Result<PromptTemplate, CliError> {
        match &self.template {
            Some(path) => PromptTemplate::from_file(path, variant)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
            None => PromptTemplate::standard()
                .with_variant(variant)
                .map_err(|e| CliError::Usage(e.to_string())),
        }
    }

    pub fn lexicon(&self) -> Result<Lexicon, CliError> {
        match &self.lexicon {
            Some(path) => Lexicon::load(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
            None => Ok(Lexicon::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_var_names() {
        assert_eq!(endpoint_env_var("Qwen2.5-7B-Instruct"), "CUBETTO_ENDPOINT_QWEN2_5_7B_INSTRUCT");
        assert_eq!(endpoint_env_var("org/model"), "CUBETTO_ENDPOINT_ORG_MODEL");
    }

    #[test]
    fn parses_models_with_defaults() {
        let file: ConfigFile = toml::from_str(
            r#"
            archive = "out"
            [[models]]
            name = "qwen"
            endpoint = "http://localhost:8005"
            parallelism = 2
            "#,
        )
        .unwrap();
        let config = Config::from_file(file, Path::new("/tmp/cfg")).unwrap();
        assert_eq!(config.archive, PathBuf::from("/tmp/cfg/out"));
        assert_eq!(config.models[0].max_response_tokens, 1024);
        assert_eq!(config.models[0].parallelism, 2);
        assert_eq!(config.capacity, DEFAULT_CAPACITY);
    }

    #[test]
    fn rejects_missing_files_and_unknown_keys() {
        let file: ConfigFile = toml::from_str(r#"presets = "nope.json""#).unwrap();
        assert!(matches!(Config::from_file(file, Path::new("/nonexistent")), Err(CliError::Usage(_))));
        assert!(toml::from_str::<ConfigFile>("colour = 1").is_err());
    }

    #[test]
    fn rejects_duplicate_models() {
        let file: ConfigFile = toml::from_str(
            r#"
            [[models]]
            name = "a"
            endpoint = "http://x"
            [[models]]
            name = "a"
            endpoint = "http://y"
            "#,
        )
        .unwrap();
        assert!(Config::from_file(file, Path::new(".")).is_err());
    }
}
