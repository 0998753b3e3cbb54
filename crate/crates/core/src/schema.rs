//! Typed tool schemas and the validation gate every call passes before it
//! reaches a workflow.
//!
//! A [`TypedSchema`] lists the exact parameter names a tool accepts, their
//! kinds, and a table of known aliases that are explicitly rejected. The gate
//! never repairs a call: an alias is reported together with the canonical
//! name it stands for, and unknown names are rejected rather than dropped.
//! All failures are returned as data in a [`ValidationReport`].

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Parameter kinds understood by the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    String,
    Integer,
    Number,
    Boolean,
    Uuid,
    Enum,
}

impl ParamKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamKind::String => "string",
            ParamKind::Integer => "integer",
            ParamKind::Number => "number",
            ParamKind::Boolean => "boolean",
            ParamKind::Uuid => "uuid",
            ParamKind::Enum => "enum",
        }
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
    pub required: bool,
    pub allowed_values: Option<Vec<String>>,
    pub default: Option<Value>,
    pub description: String,
}

impl ParamSpec {
    pub fn required(name: &str, kind: ParamKind) -> Self {
        Self {
            name: name.to_string(),
            kind,
            required: true,
            allowed_values: None,
            default: None,
            description: String::new(),
        }
    }

    pub fn optional(name: &str, kind: ParamKind, default: Option<Value>) -> Self {
        Self {
            name: name.to_string(),
            kind,
            required: false,
            allowed_values: None,
            default,
            description: String::new(),
        }
    }

    pub fn with_allowed(mut self, values: &[&str]) -> Self {
        self.allowed_values = Some(values.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn with_description(mut self, text: &str) -> Self {
        self.description = text.to_string();
        self
    }

    /// Checks `value` against this parameter's kind and returns the stored
    /// (normalized) form.
    pub fn check(&self, value: &Value) -> Result<Value, (ViolationCode, String)> {
        let mismatch = || {
            (
                ViolationCode::TypeMismatch,
                format!(
                    "parameter `{}` expects {}, got {}",
                    self.name,
                    self.kind,
                    json_type_name(value)
                ),
            )
        };
        match self.kind {
            ParamKind::String => value.as_str().map(|_| value.clone()).ok_or_else(mismatch),
            ParamKind::Integer => match value {
                Value::Number(n) if n.is_i64() || n.is_u64() => Ok(value.clone()),
                _ => Err(mismatch()),
            },
            ParamKind::Number => match value {
                Value::Number(n) if n.as_f64().is_some_and(f64::is_finite) => Ok(value.clone()),
                _ => Err(mismatch()),
            },
            ParamKind::Boolean => value.as_bool().map(|_| value.clone()).ok_or_else(mismatch),
            ParamKind::Uuid => {
                let s = value.as_str().ok_or_else(mismatch)?;
                if is_uuid_text(s) {
                    Ok(Value::String(s.to_ascii_lowercase()))
                } else {
                    Err((
                        ViolationCode::TypeMismatch,
                        format!("parameter `{}` expects a uuid, got {:?}", self.name, s),
                    ))
                }
            }
            ParamKind::Enum => {
                let s = value.as_str().ok_or_else(mismatch)?;
                let allowed = self.allowed_values.as_deref().unwrap_or(&[]);
                if allowed.iter().any(|a| a == s) {
                    Ok(value.clone())
                } else {
                    Err((
                        ViolationCode::ValueNotAllowed,
                        format!(
                            "parameter `{}` must be one of [{}], got {:?}",
                            self.name,
                            allowed.join(", "),
                            s
                        ),
                    ))
                }
            }
        }
    }
}

fn json_type_name(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) if n.is_f64() => "number",
        Value::Number(_) => "integer",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// RFC-4122 textual layout: 8-4-4-4-12 hex digits, any case.
pub fn is_uuid_text(s: &str) -> bool {
    let bytes = s.as_bytes();
    if bytes.len() != 36 {
        return false;
    }
    bytes.iter().enumerate().all(|(i, b)| match i {
        8 | 13 | 18 | 23 => *b == b'-',
        _ => b.is_ascii_hexdigit(),
    })
}

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("tool name is empty")]
    EmptyToolName,
    #[error("duplicate parameter `{0}`")]
    DuplicateParam(String),
    #[error("enum parameter `{0}` has no allowed values")]
    EmptyEnum(String),
    #[error("allowed values given for non-enum parameter `{0}`")]
    AllowedOnNonEnum(String),
    #[error("required parameter `{0}` declares a default")]
    RequiredWithDefault(String),
    #[error("default for `{0}` does not match its kind: {1}")]
    BadDefault(String, String),
    #[error("alias `{0}` collides with a canonical parameter name")]
    AliasIsCanonical(String),
    #[error("alias `{0}` points at unknown parameter `{1}`")]
    AliasTargetUnknown(String, String),
    #[error("duplicate alias `{0}`")]
    DuplicateAlias(String),
    #[error("schema document: {0}")]
    Parse(String),
}

/// The contract for one tool: exact names, kinds and rejected aliases.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedSchema {
    tool_name: String,
    description: String,
    params: Vec<ParamSpec>,
    rejected_aliases: Vec<(String, String)>,
}

impl TypedSchema {
    pub fn new(
        tool_name: &str,
        params: Vec<ParamSpec>,
        rejected_aliases: Vec<(String, String)>,
    ) -> Result<Self, SchemaError> {
        if tool_name.is_empty() {
            return Err(SchemaError::EmptyToolName);
        }
        let mut names = HashSet::new();
        for p in &params {
            if !names.insert(p.name.as_str()) {
                return Err(SchemaError::DuplicateParam(p.name.clone()));
            }
            match (p.kind, &p.allowed_values) {
                (ParamKind::Enum, None) => return Err(SchemaError::EmptyEnum(p.name.clone())),
                (ParamKind::Enum, Some(v)) if v.is_empty() => {
                    return Err(SchemaError::EmptyEnum(p.name.clone()))
                }
                (ParamKind::Enum, _) | (_, None) => {}
                (_, Some(_)) => return Err(SchemaError::AllowedOnNonEnum(p.name.clone())),
            }
            if let Some(d) = &p.default {
                if p.required {
                    return Err(SchemaError::RequiredWithDefault(p.name.clone()));
                }
                p.check(d)
                    .map_err(|(_, msg)| SchemaError::BadDefault(p.name.clone(), msg))?;
            }
        }
        let mut seen = HashSet::new();
        for (alias, target) in &rejected_aliases {
            if names.contains(alias.as_str()) {
                return Err(SchemaError::AliasIsCanonical(alias.clone()));
            }
            if !names.contains(target.as_str()) {
                return Err(SchemaError::AliasTargetUnknown(
                    alias.clone(),
                    target.clone(),
                ));
            }
            if !seen.insert(alias.as_str()) {
                return Err(SchemaError::DuplicateAlias(alias.clone()));
            }
        }
        Ok(Self {
            tool_name: tool_name.to_string(),
            description: String::new(),
            params,
            rejected_aliases,
        })
    }

    pub fn with_description(mut self, text: &str) -> Self {
        self.description = text.to_string();
        self
    }

    /// Parses the declarative TOML form, one document per tool:
    ///
    /// ```toml
    /// tool = "sem_fft"
    /// description = "..."
    ///
    /// [[params]]
    /// name = "mag_label"
    /// kind = "string"
    /// required = true
    /// aliases = ["magnification", "mag"]
    /// ```
    pub fn from_toml(text: &str) -> Result<Self, SchemaError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            tool: String,
            #[serde(default)]
            description: String,
            #[serde(default)]
            params: Vec<ParamDoc>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct ParamDoc {
            name: String,
            kind: ParamKind,
            #[serde(default)]
            required: bool,
            allowed: Option<Vec<String>>,
            default: Option<Value>,
            #[serde(default)]
            description: String,
            #[serde(default)]
            aliases: Vec<String>,
        }

        let doc: Doc = toml::from_str(text).map_err(|e| SchemaError::Parse(e.to_string()))?;
        let mut aliases = Vec::new();
        let mut params = Vec::with_capacity(doc.params.len());
        for p in doc.params {
            for a in p.aliases {
                aliases.push((a, p.name.clone()));
            }
            params.push(ParamSpec {
                name: p.name,
                kind: p.kind,
                required: p.required,
                allowed_values: p.allowed,
                default: p.default,
                description: p.description,
            });
        }
        Ok(Self::new(&doc.tool, params, aliases)?.with_description(&doc.description))
    }

    pub fn tool_name(&self) -> &str {
        &self.tool_name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn rejected_aliases(&self) -> &[(String, String)] {
        &self.rejected_aliases
    }

    pub fn canonical_for_alias(&self, alias: &str) -> Option<&str> {
        self.rejected_aliases
            .iter()
            .find(|(a, _)| a == alias)
            .map(|(_, c)| c.as_str())
    }

    /// JSON rendering used by tool discovery.
    pub fn render(&self) -> Value {
        let params: Vec<Value> = self
            .params
            .iter()
            .map(|p| {
                let mut m = Map::new();
                m.insert("name".into(), Value::String(p.name.clone()));
                m.insert("kind".into(), Value::String(p.kind.to_string()));
                m.insert("required".into(), Value::Bool(p.required));
                if let Some(allowed) = &p.allowed_values {
                    m.insert(
                        "allowed".into(),
                        Value::Array(allowed.iter().cloned().map(Value::String).collect()),
                    );
                }
                if let Some(d) = &p.default {
                    m.insert("default".into(), d.clone());
                }
                let aliases: Vec<Value> = self
                    .rejected_aliases
                    .iter()
                    .filter(|(_, c)| *c == p.name)
                    .map(|(a, _)| Value::String(a.clone()))
                    .collect();
                m.insert("rejected_aliases".into(), Value::Array(aliases));
                if !p.description.is_empty() {
                    m.insert("description".into(), Value::String(p.description.clone()));
                }
                Value::Object(m)
            })
            .collect();
        let mut m = Map::new();
        m.insert("params".into(), Value::Array(params));
        m.insert("additional_params".into(), Value::Bool(false));
        Value::Object(m)
    }
}

/// A raw call as received. Argument order is the caller's.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolCall {
    pub tool_name: String,
    pub args: Map<String, Value>,
}

impl ToolCall {
    pub fn new(tool_name: &str, args: Map<String, Value>) -> Self {
        Self {
            tool_name: tool_name.to_string(),
            args,
        }
    }

    /// Builds a call from a JSON object literal; non-objects yield no args.
    pub fn from_json(tool_name: &str, args: Value) -> Self {
        let args = match args {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        Self::new(tool_name, args)
    }
}

/// Validated arguments in schema order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Args(Vec<(String, Value)>);

impl Args {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn get_str(&self, name: &str) -> Option<&str> {
        self.get(name).and_then(Value::as_str)
    }

    pub fn get_bool(&self, name: &str) -> Option<bool> {
        self.get(name).and_then(Value::as_bool)
    }

    pub fn get_f64(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(Value::as_f64)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.0.iter().map(|(n, v)| (n.as_str(), v))
    }

    pub fn names(&self) -> Vec<&str> {
        self.0.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.0.iter().cloned().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    UnknownParam,
    KnownAlias,
    TypeMismatch,
    MissingRequired,
    ValueNotAllowed,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::UnknownParam => "UNKNOWN_PARAM",
            ViolationCode::KnownAlias => "KNOWN_ALIAS",
            ViolationCode::TypeMismatch => "TYPE_MISMATCH",
            ViolationCode::MissingRequired => "MISSING_REQUIRED",
            ViolationCode::ValueNotAllowed => "VALUE_NOT_ALLOWED",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub param: String,
    pub code: ViolationCode,
    pub message: String,
    pub suggested_canonical: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    /// Arguments that matched a parameter, normalized and in schema order.
    /// Only meaningful when `valid` is set.
    pub args: Args,
}

impl ValidationReport {
    pub fn violations_json(&self) -> Value {
        serde_json::to_value(&self.violations).expect("violations serialize")
    }
}

/// Checks `call` against `schema`. Never fails; every problem is a violation.
///
/// Violations for supplied arguments come first, in caller order, followed by
/// missing required parameters in schema order.
pub fn validate_call(schema: &TypedSchema, call: &ToolCall) -> ValidationReport {
    let mut violations = Vec::new();
    let mut matched: Vec<Option<Value>> = vec![None; schema.params.len()];

    for (name, value) in &call.args {
        if let Some(idx) = schema.params.iter().position(|p| &p.name == name) {
            match schema.params[idx].check(value) {
                Ok(v) => matched[idx] = Some(v),
                Err((code, message)) => violations.push(Violation {
                    param: name.clone(),
                    code,
                    message,
                    suggested_canonical: None,
                }),
            }
        } else if let Some(canonical) = schema.canonical_for_alias(name) {
            violations.push(Violation {
                param: name.clone(),
                code: ViolationCode::KnownAlias,
                message: format!(
                    "`{name}` is not accepted by `{}`; the parameter is named `{canonical}`",
                    schema.tool_name
                ),
                suggested_canonical: Some(canonical.to_string()),
            });
        } else {
            violations.push(Violation {
                param: name.clone(),
                code: ViolationCode::UnknownParam,
                message: format!("`{}` has no parameter `{name}`", schema.tool_name),
                suggested_canonical: None,
            });
        }
    }

    for p in &schema.params {
        if p.required && !call.args.contains_key(&p.name) {
            violations.push(Violation {
                param: p.name.clone(),
                code: ViolationCode::MissingRequired,
                message: format!("`{}` requires `{}` ({})", schema.tool_name, p.name, p.kind),
                suggested_canonical: None,
            });
        }
    }

    let args = Args(
        schema
            .params
            .iter()
            .zip(matched)
            .filter_map(|(p, v)| v.map(|v| (p.name.clone(), v)))
            .collect(),
    );
    ValidationReport {
        valid: violations.is_empty(),
        violations,
        args,
    }
}

/// Fills every absent optional parameter that has a default; schema order.
pub fn apply_defaults(schema: &TypedSchema, validated: &Args) -> Args {
    Args(
        schema
            .params
            .iter()
            .filter_map(|p| {
                validated
                    .get(&p.name)
                    .cloned()
                    .or_else(|| p.default.clone())
                    .map(|v| (p.name.clone(), v))
            })
            .collect(),
    )
}
