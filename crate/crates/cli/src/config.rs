//! Flat key-value config files with section headers.
//!
//! ```text
//! # lines starting with '#' are comments
//! [experiment]
//! study = neutrality_sweep
//! preset = desk
//! case = B
//! solutions = 100
//! generations = 256
//! seeds = 1..5          # or a comma list: 1,2,9
//!
//! [autoencoder]
//! latent_dims = 2,5,10
//! epochs = 100
//! batch_size = 32
//! learning_rate = 0.001
//! ```
//!
//! Unknown sections or keys are rejected with a message listing them, so a
//! config file always means what it says.

use std::str::FromStr;

use polyqd_core::geometry::BoundsCase;

use crate::experiments::{ExperimentConfig, Preset, Study};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Malformed { line: usize, text: String },
    #[error("unknown keys: {0}")]
    UnknownKeys(String),
    #[error("line {line}: {reason}")]
    BadValue { line: usize, reason: String },
    #[error("config sets no study and none was given on the command line")]
    MissingStudy,
}

const EXPERIMENT_KEYS: [&str; 6] = [
    "study",
    "preset",
    "case",
    "solutions",
    "generations",
    "seeds",
];
const AUTOENCODER_KEYS: [&str; 4] = ["latent_dims", "epochs", "batch_size", "learning_rate"];

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub study: Option<Study>,
    pub preset: Option<Preset>,
    pub case: Option<BoundsCase>,
    pub solutions: Option<usize>,
    pub generations: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub latent_dims: Option<Vec<usize>>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
}

pub fn parse_case(s: &str) -> Result<BoundsCase, String> {
    match s.trim() {
        "A" | "a" => Ok(BoundsCase::A),
        "B" | "b" => Ok(BoundsCase::B),
        "C" | "c" => Ok(BoundsCase::C),
        "D" | "d" => Ok(BoundsCase::D),
        "E" | "e" => Ok(BoundsCase::E),
        other => Err(format!("unknown bounds case '{other}' (expected A..E)")),
    }
}

/// `1..5` (inclusive range) or `1,2,9`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let s = s.trim();
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| format!("bad seed range '{s}'"))?;
        let hi: u64 = hi.trim().parse().map_err(|_| format!("bad seed range '{s}'"))?;
        if hi < lo {
            return Err(format!("empty seed range '{s}'"));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .map(|v| v.trim().parse::<u64>().map_err(|_| format!("bad seed '{v}'")))
        .collect()
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|_| format!("bad number '{v}'")))
        .collect()
}

pub fn parse(text: &str) -> Result<FileConfig, ConfigError> {
    let mut cfg = FileConfig::default();
    let mut section = String::new();
    let mut unknown: Vec<String> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            if section != "experiment" && section != "autoencoder" {
                unknown.push(format!("[{section}]"));
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Malformed {
                line,
                text: content.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let known = match section.as_str() {
            "experiment" => EXPERIMENT_KEYS.contains(&key),
            "autoencoder" => AUTOENCODER_KEYS.contains(&key),
            _ => false,
        };
        if !known {
            unknown.push(if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            });
            continue;
        }
        let bad = |reason: String| ConfigError::BadValue { line, reason };
        match key {
            "study" => cfg.study = Some(Study::from_str(value).map_err(bad)?),
            "preset" => cfg.preset = Some(Preset::from_str(value).map_err(bad)?),
            "case" => cfg.case = Some(parse_case(value).map_err(bad)?),
            "solutions" => {
                cfg.solutions = Some(value.parse().map_err(|_| bad(format!("bad count '{value}'")))?)
            }
            "generations" => {
                cfg.generations =
                    Some(value.parse().map_err(|_| bad(format!("bad count '{value}'")))?)
            }
            "seeds" => cfg.seeds = Some(parse_seeds(value).map_err(bad)?),
            "latent_dims" => cfg.latent_dims = Some(parse_usize_list(value).map_err(bad)?),
            "epochs" => {
                cfg.epochs = Some(value.parse().map_err(|_| bad(format!("bad count '{value}'")))?)
            }
            "batch_size" => {
                cfg.batch_size =
                    Some(value.parse().map_err(|_| bad(format!("bad count '{value}'")))?)
            }
            "learning_rate" => {
                cfg.learning_rate =
                    Some(value.parse().map_err(|_| bad(format!("bad number '{value}'")))?)
            }
            _ => unreachable!("key was checked against the schema"),
        }
    }
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown.join(", ")));
    }
    Ok(cfg)
}

/// Resolve a run configuration: file values override preset defaults,
/// command-line values override the file.
pub fn resolve(
    file: FileConfig,
    cli_study: Option<Study>,
    cli_preset: Option<Preset>,
    cli_case: Option<BoundsCase>,
    cli_seeds: Option<Vec<u64>>,
) -> Result<ExperimentConfig, ConfigError> {
    let study = cli_study.or(file.study).ok_or(ConfigError::MissingStudy)?;
    let preset = cli_preset.or(file.preset).unwrap_or(Preset::Desk);
    let mut cfg = ExperimentConfig::new(study, preset);
    if let Some(case) = cli_case.or(file.case) {
        cfg.bounds_case = case;
    }
    if let Some(solutions) = file.solutions {
        cfg.solutions = solutions;
    }
    if let Some(generations) = file.generations {
        cfg.generations = generations;
    }
    if let Some(seeds) = cli_seeds.or(file.seeds) {
        cfg.seeds = seeds;
    }
    if let Some(dims) = file.latent_dims {
        cfg.latent_dims = dims;
    }
    if let Some(epochs) = file.epochs {
        cfg.train_epochs = epochs;
    }
    if let Some(batch) = file.batch_size {
        cfg.train_batch = batch;
    }
    if let Some(lr) = file.learning_rate {
        cfg.train_learning_rate = lr;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_schema() {
        let text = "\
# a comment
[experiment]
study = neutrality_sweep
preset = desk
case = C
solutions = 64
generations = 32
seeds = 1..3

[autoencoder]
latent_dims = 2,10
epochs = 50
batch_size = 16
learning_rate = 0.002
";
        let cfg = parse(text).unwrap();
        assert_eq!(cfg.study, Some(Study::NeutralitySweep));
        assert_eq!(cfg.seeds, Some(vec![1, 2, 3]));
        assert_eq!(cfg.latent_dims, Some(vec![2, 10]));
        let resolved = resolve(cfg, None, None, None, None).unwrap();
        assert_eq!(resolved.solutions, 64);
        assert_eq!(resolved.bounds_case, BoundsCase::C);
        assert_eq!(resolved.train_learning_rate, 0.002);
    }

    #[test]
    fn rejects_unknown_keys_listing_them() {
        let err = parse("[experiment]\nstudy = bins\nbogus = 1\n[extra]\nx = 2\n").unwrap_err();
        match err {
            ConfigError::UnknownKeys(list) => {
                assert!(list.contains("experiment.bogus"));
                assert!(list.contains("[extra]"));
            }
            other => panic!("expected UnknownKeys, got {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(
            parse("[experiment]\nnot a pair\n"),
            Err(ConfigError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn seed_syntaxes() {
        assert_eq!(parse_seeds("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_seeds("7, 9, 11").unwrap(), vec![7, 9, 11]);
        assert!(parse_seeds("5..1").is_err());
    }
}
