//! Skill documents: per-tool defaults, keyword routing and error directives.
//!
//! ```text
//! [tool.sem_fft]
//! default.particle_analysis = false
//!
//! [route]
//! when = analyze, general
//! set.particle_analysis = true
//!
//! [on_error]
//! FILE_NOT_FOUND = abort ask for the image again
//! ```

use std::collections::BTreeMap;

use serde_json::Value;
use thiserror::Error;

use super::ToolRegistry;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SkillError {
    #[error("SKILL_PARSE_ERROR: line {0}: {1}")]
    Parse(usize, String),
    #[error("SKILL_UNKNOWN_TOOL: line {0}: {1}")]
    UnknownTool(usize, String),
    #[error("SKILL_TYPE_MISMATCH: line {0}: {1}")]
    TypeMismatch(usize, String),
}

impl SkillError {
    pub fn code(&self) -> &'static str {
        match self {
            SkillError::Parse(..) => "SKILL_PARSE_ERROR",
            SkillError::UnknownTool(..) => "SKILL_UNKNOWN_TOOL",
            SkillError::TypeMismatch(..) => "SKILL_TYPE_MISMATCH",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorAction {
    Abort,
    Report,
}

impl ErrorAction {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorAction::Abort => "abort",
            ErrorAction::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDirective {
    pub action: ErrorAction,
    pub message: String,
}

/// Keyword rule for the mediator: if any keyword occurs in the request,
/// the listed parameters are set.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteRule {
    pub keywords: Vec<String>,
    pub set: Vec<(String, Value)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SkillDocument {
    defaults: BTreeMap<String, Vec<(String, Value)>>,
    routes: Vec<RouteRule>,
    on_error: BTreeMap<String, ErrorDirective>,
}

enum Section {
    None,
    Tool(String),
    Route,
    OnError,
}

/// Bare words are strings; `true`, numbers and quoted text are JSON.
fn parse_value(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

impl SkillDocument {
    /// Parses a skill and type-checks every override against `registry`.
    pub fn parse(text: &str, registry: &ToolRegistry) -> Result<Self, SkillError> {
        let mut doc = Self::default();
        let mut section = Section::None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') || content.starts_with(';') {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                section = match name {
                    "route" => Section::Route,
                    "on_error" => Section::OnError,
                    _ => match name.strip_prefix("tool.") {
                        Some(tool) => {
                            if registry.schema(tool).is_none() {
                                return Err(SkillError::UnknownTool(
                                    line,
                                    format!("no tool {tool:?}"),
                                ));
                            }
                            Section::Tool(tool.to_string())
                        }
                        None => {
                            return Err(SkillError::Parse(
                                line,
                                format!("unknown section [{name}]"),
                            ))
                        }
                    },
                };
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(SkillError::Parse(line, "expected `key = value`".into()));
            };
            let (key, value) = (key.trim(), value.trim());
            match &section {
                Section::None => {
                    return Err(SkillError::Parse(line, "entry outside any section".into()))
                }
                Section::Tool(tool) => {
                    let Some(param) = key.strip_prefix("default.") else {
                        return Err(SkillError::Parse(line, format!("unexpected key {key:?}")));
                    };
                    let v = check_override(registry, tool, param, value, line)?;
                    let list = doc.defaults.entry(tool.clone()).or_default();
                    list.retain(|(p, _)| p != param);
                    list.push((param.to_string(), v));
                }
                Section::Route => {
                    if key == "when" {
                        let keywords: Vec<String> = value
                            .split(',')
                            .map(|k| k.trim().to_lowercase())
                            .filter(|k| !k.is_empty())
                            .collect();
                        if keywords.is_empty() {
                            return Err(SkillError::Parse(line, "empty keyword list".into()));
                        }
                        doc.routes.push(RouteRule {
                            keywords,
                            set: Vec::new(),
                        });
                    } else if let Some(param) = key.strip_prefix("set.") {
                        let Some(rule) = doc.routes.last_mut() else {
                            return Err(SkillError::Parse(line, "`set.` before any `when`".into()));
                        };
                        let v = check_route_param(registry, param, value, line)?;
                        rule.set.push((param.to_string(), v));
                    } else {
                        return Err(SkillError::Parse(line, format!("unexpected key {key:?}")));
                    }
                }
                Section::OnError => {
                    let (action, message) = match value.split_once(char::is_whitespace) {
                        Some((a, m)) => (a, m.trim()),
                        None => (value, ""),
                    };
                    let action = match action {
                        "abort" => ErrorAction::Abort,
                        "report" => ErrorAction::Report,
                        other => {
                            return Err(SkillError::Parse(
                                line,
                                format!("action must be abort or report, got {other:?}"),
                            ))
                        }
                    };
                    doc.on_error.insert(
                        key.to_string(),
                        ErrorDirective {
                            action,
                            message: message.to_string(),
                        },
                    );
                }
            }
        }
        Ok(doc)
    }

    pub fn is_empty(&self) -> bool {
        self.defaults.is_empty() && self.routes.is_empty() && self.on_error.is_empty()
    }

    pub fn defaults_for(&self, tool: &str) -> &[(String, Value)] {
        self.defaults.get(tool).map_or(&[], Vec::as_slice)
    }

    pub fn routes(&self) -> &[RouteRule] {
        &self.routes
    }

    /// Parameters set by the first rule with a keyword in `request`
    /// (case-insensitive word match).
    pub fn route(&self, request: &str) -> &[(String, Value)] {
        let words: Vec<String> = request
            .split(|c: char| !c.is_alphanumeric() && c != '_')
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        self.routes
            .iter()
            .find(|r| r.keywords.iter().any(|k| words.contains(k)))
            .map_or(&[], |r| r.set.as_slice())
    }

    pub fn directive(&self, code: &str) -> Option<&ErrorDirective> {
        self.on_error.get(code)
    }
}

fn check_override(
    registry: &ToolRegistry,
    tool: &str,
    param: &str,
    value: &str,
    line: usize,
) -> Result<Value, SkillError> {
    let schema = registry.schema(tool).expect("section checked the tool");
    let spec = schema.param(param).ok_or_else(|| {
        SkillError::UnknownTool(line, format!("tool {tool} has no parameter {param:?}"))
    })?;
    if spec.required {
        return Err(SkillError::TypeMismatch(
            line,
            format!("{tool}.{param} is required and cannot take a default"),
        ));
    }
    spec.check(&parse_value(value))
        .map_err(|(_, msg)| SkillError::TypeMismatch(line, format!("{tool}.{param}: {msg}")))
}

fn check_route_param(
    registry: &ToolRegistry,
    param: &str,
    value: &str,
    line: usize,
) -> Result<Value, SkillError> {
    let v = parse_value(value);
    let mut found = None;
    for tool in registry.names() {
        if let Some(spec) = registry.schema(tool).and_then(|s| s.param(param)) {
            let checked = spec.check(&v).map_err(|(_, msg)| {
                SkillError::TypeMismatch(line, format!("{tool}.{param}: {msg}"))
            })?;
            found = Some(checked);
        }
    }
    found.ok_or_else(|| SkillError::UnknownTool(line, format!("no tool has parameter {param:?}")))
}
