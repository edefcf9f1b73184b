//! Scenario parameters: declarations, TOML config files and `key=value` overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Int(v) => write!(f, "{v}"),
            Self::Float(v) => write!(f, "{v:?}"),
            Self::Bool(v) => write!(f, "{v}"),
            Self::Text(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamKind {
    Int { min: i64, max: i64 },
    Float { min: f64, max: f64 },
    Bool,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: ParamValue,
    pub help: &'static str,
}

impl ParamSpec {
    pub fn int(name: &'static str, default: i64, min: i64, max: i64, help: &'static str) -> Self {
        Self { name, kind: ParamKind::Int { min, max }, default: ParamValue::Int(default), help }
    }

    pub fn float(name: &'static str, default: f64, min: f64, max: f64, help: &'static str) -> Self {
        Self { name, kind: ParamKind::Float { min, max }, default: ParamValue::Float(default), help }
    }

    pub fn flag(name: &'static str, default: bool, help: &'static str) -> Self {
        Self { name, kind: ParamKind::Bool, default: ParamValue::Bool(default), help }
    }

    pub fn choice(
        name: &'static str,
        default: &'static str,
        choices: &'static [&'static str],
        help: &'static str,
    ) -> Self {
        Self { name, kind: ParamKind::Choice(choices), default: ParamValue::Text(default.to_string()), help }
    }

    fn parse_toml(&self, value: &toml::Value) -> Result<ParamValue, String> {
        match (&self.kind, value) {
            (ParamKind::Int { .. }, toml::Value::Integer(v)) => Ok(ParamValue::Int(*v)),
            (ParamKind::Float { .. }, toml::Value::Float(v)) => Ok(ParamValue::Float(*v)),
            (ParamKind::Float { .. }, toml::Value::Integer(v)) => Ok(ParamValue::Float(*v as f64)),
            (ParamKind::Bool, toml::Value::Boolean(v)) => Ok(ParamValue::Bool(*v)),
            (ParamKind::Choice(_), toml::Value::String(v)) => Ok(ParamValue::Text(v.clone())),
            (kind, other) => Err(format!("expected {}, got {other}", kind_name(kind))),
        }
    }

    fn parse_text(&self, text: &str) -> Result<ParamValue, String> {
        let text = text.trim();
        let parsed = match &self.kind {
            ParamKind::Int { .. } => text.parse().map(ParamValue::Int).map_err(|e| e.to_string()),
            ParamKind::Float { .. } => text.parse().map(ParamValue::Float).map_err(|e| e.to_string()),
            ParamKind::Bool => text.parse().map(ParamValue::Bool).map_err(|e| e.to_string()),
            ParamKind::Choice(_) => Ok(ParamValue::Text(text.to_string())),
        };
        parsed.map_err(|e| format!("cannot read {text:?} as {}: {e}", kind_name(&self.kind)))
    }

    /// Range and choice checks.
    fn check(&self, value: &ParamValue) -> Option<String> {
        match (&self.kind, value) {
            (ParamKind::Int { min, max }, ParamValue::Int(v)) if v < min || v > max => {
                Some(format!("{} = {v} outside [{min}, {max}]", self.name))
            }
            (ParamKind::Float { min, max }, ParamValue::Float(v)) if !(v >= min && v <= max) => {
                Some(format!("{} = {v} outside [{min}, {max}]", self.name))
            }
            (ParamKind::Choice(choices), ParamValue::Text(v)) if !choices.contains(&v.as_str()) => {
                Some(format!("{} = {v:?} is not one of {choices:?}", self.name))
            }
            _ => None,
        }
    }
}

fn kind_name(kind: &ParamKind) -> &'static str {
    match kind {
        ParamKind::Int { .. } => "an integer",
        ParamKind::Float { .. } => "a number",
        ParamKind::Bool => "a boolean",
        ParamKind::Choice(_) => "a string",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, message: message.into() }
    }

    pub fn warning(message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, message: message.into() }
    }

    pub fn info(message: impl Into<String>) -> Self {
        Self { severity: Severity::Info, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Fully resolved parameters, ordered by name.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Params(BTreeMap<String, ParamValue>);

impl Params {
    pub fn iter(&self) -> impl Iterator<Item = (&String, &ParamValue)> {
        self.0.iter()
    }

    pub fn insert(&mut self, name: &str, value: ParamValue) {
        self.0.insert(name.to_string(), value);
    }

    fn get(&self, name: &str) -> &ParamValue {
        self.0.get(name).unwrap_or_else(|| panic!("parameter {name} is not declared by this scenario"))
    }

    pub fn int(&self, name: &str) -> i64 {
        match self.get(name) {
            ParamValue::Int(v) => *v,
            other => panic!("parameter {name} is not an integer: {other:?}"),
        }
    }

    pub fn usize(&self, name: &str) -> usize {
        usize::try_from(self.int(name)).unwrap_or_else(|_| panic!("parameter {name} is negative"))
    }

    pub fn float(&self, name: &str) -> f64 {
        match self.get(name) {
            ParamValue::Float(v) => *v,
            ParamValue::Int(v) => *v as f64,
            other => panic!("parameter {name} is not a number: {other:?}"),
        }
    }

    pub fn flag(&self, name: &str) -> bool {
        match self.get(name) {
            ParamValue::Bool(v) => *v,
            other => panic!("parameter {name} is not a boolean: {other:?}"),
        }
    }

    pub fn text(&self, name: &str) -> &str {
        match self.get(name) {
            ParamValue::Text(v) => v,
            other => panic!("parameter {name} is not a string: {other:?}"),
        }
    }
}

/// Contents of a TOML config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// What a run or validation is asked to do, before parameter resolution.
#[derive(Debug, Clone, Default)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub file_params: BTreeMap<String, toml::Value>,
    /// `key=value` overrides; applied after the file.
    pub overrides: Vec<(String, String)>,
}

impl ScenarioConfig {
    pub fn new(scenario: impl Into<String>) -> Self {
        Self { scenario: scenario.into(), ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_out(mut self, out: impl Into<PathBuf>) -> Self {
        self.out = Some(out.into());
        self
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.overrides.push((key.to_string(), value.to_string()));
        self
    }

    /// Merges a config file under command-line values: a field given on the
    /// command line wins.
    pub fn merge_file(mut self, file: ConfigFile) -> Self {
        if self.scenario.is_empty() {
            self.scenario = file.scenario.unwrap_or_default();
        }
        self.seed = self.seed.or(file.seed);
        self.out = self.out.take().or(file.out);
        self.file_params = file.params;
        self
    }
}

pub fn parse_override(text: &str) -> Result<(String, String), CliError> {
    match text.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.to_string())),
        _ => Err(CliError::Config(format!("expected key=value, got {text:?}"))),
    }
}

/// Merges defaults, file values and overrides; reports every problem found.
pub fn resolve(specs: &[ParamSpec], config: &ScenarioConfig) -> (Params, Vec<Diagnostic>) {
    let mut params = Params::default();
    let mut diagnostics = Vec::new();
    for spec in specs {
        params.insert(spec.name, spec.default.clone());
    }
    let find = |name: &str| specs.iter().find(|s| s.name == name);
    for (name, value) in &config.file_params {
        match find(name) {
            Some(spec) => match spec.parse_toml(value) {
                Ok(v) => params.insert(spec.name, v),
                Err(e) => diagnostics.push(Diagnostic::error(format!("{name}: {e}"))),
            },
            None => diagnostics.push(Diagnostic::error(format!("unknown parameter {name:?}"))),
        }
    }
    for (name, text) in &config.overrides {
        match find(name) {
            Some(spec) => match spec.parse_text(text) {
                Ok(v) => params.insert(spec.name, v),
                Err(e) => diagnostics.push(Diagnostic::error(format!("{name}: {e}"))),
            },
            None => diagnostics.push(Diagnostic::error(format!("unknown parameter {name:?}"))),
        }
    }
    for spec in specs {
        if let Some(problem) = spec.check(params.get(spec.name)) {
            diagnostics.push(Diagnostic::error(problem));
        }
    }
    (params, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn specs() -> Vec<ParamSpec> {
        vec![
            ParamSpec::int("n", 10, 1, 100, "count"),
            ParamSpec::float("g", 0.5, 0.0, 1.0, "coupling"),
            ParamSpec::choice("mode", "a", &["a", "b"], "mode"),
        ]
    }

    #[test]
    fn defaults_file_and_overrides_layer() {
        let file = ConfigFile::parse("scenario = \"x\"\nseed = 3\n[params]\nn = 20\ng = 1\n").unwrap();
        let config = ScenarioConfig::default().with_param("n", "30").merge_file(file);
        assert_eq!(config.scenario, "x");
        assert_eq!(config.seed, Some(3));
        let (params, diagnostics) = resolve(&specs(), &config);
        assert!(diagnostics.is_empty(), "{diagnostics:?}");
        assert_eq!(params.int("n"), 30);
        assert_eq!(params.float("g"), 1.0);
        assert_eq!(params.text("mode"), "a");
    }

    #[test]
    fn problems_are_reported_not_raised() {
        let config = ScenarioConfig::new("x")
            .with_param("n", "-4")
            .with_param("g", "abc")
            .with_param("mode", "c")
            .with_param("zzz", "1");
        let (_, diagnostics) = resolve(&specs(), &config);
        assert_eq!(diagnostics.len(), 4);
        assert!(diagnostics.iter().all(|d| d.severity == Severity::Error));
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        assert!(ConfigFile::parse("bogus = 1").is_err());
        assert!(parse_override("novalue").is_err());
        assert_eq!(parse_override("a=b=c").unwrap(), ("a".into(), "b=c".into()));
    }
}
