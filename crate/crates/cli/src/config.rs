//! Flat `key = value` experiment configs with command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::registry::{self, ParamKind};
use crate::CliError;

/// A validated description of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Every parameter of the experiment's schema, defaults filled in.
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub output_dir: PathBuf,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", lineno + 1)));
        }
        out.insert(key.to_owned(), value.trim().to_owned());
    }
    Ok(out)
}

/// Turns `--key=value` arguments into pairs.
pub fn parse_overrides(args: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for arg in args {
        let body = arg
            .strip_prefix("--")
            .ok_or_else(|| CliError::Usage(format!("unexpected argument `{arg}`")))?;
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("parameter `{arg}` must be written --key=value")))?;
        out.insert(key.to_owned(), value.to_owned());
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Merges file values (which may also set `experiment`, `seed` and `out`),
    /// then command-line overrides, and validates against the experiment schema.
    pub fn resolve(
        experiment: Option<&str>,
        file: Option<&Path>,
        overrides: BTreeMap<String, String>,
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> Result<Self, CliError> {
        let mut merged = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        merged.extend(overrides);

        let name = match (experiment, merged.remove("experiment")) {
            (Some(n), _) => n.to_owned(),
            (None, Some(n)) => n,
            (None, None) => return Err(CliError::Usage("no experiment named".into())),
        };
        let entry = registry::find(&name)?;
        let seed = match (seed, merged.remove("seed")) {
            (Some(s), _) => s,
            (None, Some(s)) => s
                .parse()
                .map_err(|_| CliError::Usage(format!("seed `{s}` is not an unsigned integer")))?,
            (None, None) => 0,
        };
        let output_dir = match (out, merged.remove("out")) {
            (Some(p), _) => p,
            (None, Some(p)) => PathBuf::from(p),
            (None, None) => PathBuf::from("out").join(&name),
        };

        let mut params = BTreeMap::new();
        for spec in entry.params {
            let value = merged.remove(spec.key).unwrap_or_else(|| spec.default.to_owned());
            spec.kind.validate(spec.key, &value)?;
            params.insert(spec.key.to_owned(), value);
        }
        if let Some(unknown) = merged.keys().next() {
            let known: Vec<&str> = entry.params.iter().map(|p| p.key).collect();
            return Err(CliError::Usage(format!(
                "unknown parameter `{unknown}` for {name} (accepted: {})",
                known.join(", ")
            )));
        }
        Ok(Self {
            experiment: name,
            params,
            seed,
            output_dir,
        })
    }
}

impl ParamKind {
    pub(crate) fn validate(self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Usage(format!("parameter {key}=`{value}` is not {what}"));
        match self {
            ParamKind::Real => value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(|_| ())
                .ok_or_else(|| bad("a finite number")),
            ParamKind::RealOrAuto if value == "auto" => Ok(()),
            ParamKind::RealOrAuto => ParamKind::Real.validate(key, value),
            ParamKind::Count => value
                .parse::<usize>()
                .map(|_| ())
                .map_err(|_| bad("a non-negative integer")),
            ParamKind::RealList => parse_real_list(value)
                .map(|_| ())
                .ok_or_else(|| bad("a comma-separated list of numbers")),
            ParamKind::Intervals => parse_intervals(value)
                .map(|_| ())
                .ok_or_else(|| bad("a list of intervals a:b,c:d")),
            ParamKind::Choice(options) => {
                if options.contains(&value) {
                    Ok(())
                } else {
                    Err(bad(&format!("one of {}", options.join(", "))))
                }
            }
        }
    }
}

pub(crate) fn parse_real_list(value: &str) -> Option<Vec<f64>> {
    let list: Option<Vec<f64>> = value
        .split(',')
        .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();
    list.filter(|l| !l.is_empty())
}

pub(crate) fn parse_intervals(value: &str) -> Option<Vec<(f64, f64)>> {
    let list: Option<Vec<(f64, f64)>> = value
        .split(',')
        .map(|s| {
            let (a, b) = s.split_once(':')?;
            Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
        })
        .collect();
    list.filter(|l| !l.is_empty())
}
