use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

use dialdep::segment::SegmenterConfig;
use dialdep::selection::{Magnitude, DEFAULT_EPSILON};
use dialdep::transform::TransformConfig;

pub const DEFAULT_SEED: u64 = 42;

/// Contents of a `--config` TOML file. Every field is optional; command-line
/// flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub jobs: Option<usize>,
    pub magnitude: Option<Magnitude>,
    pub segmenter: Option<SegmenterConfig>,
    pub transform: Option<TransformConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
        toml::from_str(&text).with_context(|| format!("{}: invalid configuration", path.display()))
    }
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub epsilon: f64,
    pub jobs: Option<usize>,
    pub magnitude: Magnitude,
    pub segmenter: SegmenterConfig,
    pub transform: TransformConfig,
    pub verbose: bool,
}

pub struct Overrides {
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub k: Option<usize>,
    pub jobs: Option<usize>,
    pub verbose: bool,
}

impl Settings {
    pub fn resolve(file: FileConfig, flags: Overrides) -> anyhow::Result<Self> {
        let mut transform = file.transform.unwrap_or_default();
        if let Some(k) = flags.k {
            transform.min_span = k;
        }
        transform.check()?;
        Ok(Settings {
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            epsilon: flags.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON),
            jobs: flags.jobs.or(file.jobs),
            magnitude: file.magnitude.unwrap_or_default(),
            segmenter: file.segmenter.unwrap_or_default(),
            transform,
            verbose: flags.verbose,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dialdep::label::DependencyLabel;

    fn flags() -> Overrides {
        Overrides {
            seed: None,
            epsilon: None,
            k: None,
            jobs: None,
            verbose: false,
        }
    }

    #[test]
    fn defaults() {
        let s = Settings::resolve(FileConfig::default(), flags()).unwrap();
        assert_eq!(s.seed, 42);
        assert_eq!(s.epsilon, 0.98);
        assert_eq!(s.transform.min_span, 2);
    }

    #[test]
    fn file_then_flags() {
        let file: FileConfig = toml::from_str(
            "epsilon = 0.9\nmagnitude = \"mean\"\n[transform]\nmin_span = 3\nlabels = [\"root\", \"dfsubj\"]\n[segmenter]\npunctuation = [\"。\"]\n",
        )
        .unwrap();
        let s = Settings::resolve(
            file,
            Overrides {
                k: Some(4),
                ..flags()
            },
        )
        .unwrap();
        assert_eq!(s.epsilon, 0.9);
        assert_eq!(s.magnitude, Magnitude::Mean);
        assert_eq!(s.transform.min_span, 4);
        assert!(!s.transform.labels.contains(&DependencyLabel::Sasubj));
        assert_eq!(s.segmenter.punctuation.len(), 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("epsilonn = 1.0").is_err());
        assert!(toml::from_str::<FileConfig>("[transform]\nlabels = [\"nope\"]").is_err());
    }

    #[test]
    fn zero_k_is_rejected() {
        let r = Settings::resolve(
            FileConfig::default(),
            Overrides {
                k: Some(0),
                ..flags()
            },
        );
        assert!(r.is_err());
    }
}
