//! Typed tools over newline-delimited JSON.
//!
//! Request: `{"id": "1", "method": "call_tool", "params": {"tool": "sem_fft", "args": {...}}}`.
//! Response: `{"id": "1", "result": ...}` or `{"id": "1", "error": {"code", "message", "data"}}`.
//! Calls pass skill defaults, then the schema gate, and only then reach a
//! handler.

mod registry;
mod skill;
mod tools;

use std::io::{BufRead, Write};

use serde_json::{json, Map, Value};

use crate::schema::{apply_defaults, validate_call, ToolCall};

pub use registry::{Handler, ToolError, ToolRegistry};
pub use skill::{ErrorAction, ErrorDirective, RouteRule, SkillDocument, SkillError};
pub use tools::{pl_schema, sem_schema, ServerContext, PL_SCHEMA_TOML, SEM_SCHEMA_TOML};

pub const PARSE_ERROR: i64 = -32700;
pub const INVALID_REQUEST: i64 = -32600;
pub const UNKNOWN_METHOD: i64 = -32601;
pub const INVALID_PARAMS: i64 = -32602;
pub const SCHEMA_VIOLATION: i64 = -32001;
pub const EXECUTION_ERROR: i64 = -32002;

#[derive(Debug, Clone, PartialEq)]
pub struct RpcError {
    pub code: i64,
    pub message: String,
    pub data: Value,
}

impl RpcError {
    fn new(code: i64, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            data: json!([]),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "code": self.code, "message": self.message, "data": self.data })
    }
}

pub struct Server {
    registry: ToolRegistry,
    skill: SkillDocument,
}

impl Server {
    pub fn new(registry: ToolRegistry, skill: SkillDocument) -> Self {
        Self { registry, skill }
    }

    pub fn registry(&self) -> &ToolRegistry {
        &self.registry
    }

    pub fn skill(&self) -> &SkillDocument {
        &self.skill
    }

    pub fn list_tools(&self) -> Value {
        self.registry.list_tools()
    }

    /// Skill defaults fill absent parameters, the gate validates, and the
    /// handler runs only on a clean call.
    pub fn dispatch(&self, call: &ToolCall) -> Result<Value, RpcError> {
        let schema = self.registry.schema(&call.tool_name).ok_or_else(|| {
            let mut e = RpcError::new(UNKNOWN_METHOD, format!("UNKNOWN_TOOL: {}", call.tool_name));
            e.data = json!([{ "code": "UNKNOWN_TOOL", "tool": call.tool_name }]);
            e
        })?;
        let mut effective = call.clone();
        for (param, value) in self.skill.defaults_for(&call.tool_name) {
            if !effective.args.contains_key(param) {
                effective.args.insert(param.clone(), value.clone());
            }
        }
        let report = validate_call(schema, &effective);
        if !report.valid {
            let codes: Vec<&str> = report.violations.iter().map(|v| v.code.as_str()).collect();
            let mut e = RpcError::new(
                SCHEMA_VIOLATION,
                format!(
                    "SCHEMA_VIOLATION: {} rejected ({})",
                    call.tool_name,
                    codes.join(", ")
                ),
            );
            e.data = report.violations_json();
            return Err(e);
        }
        let args = apply_defaults(schema, &report.args);
        match self
            .registry
            .invoke(&call.tool_name, &args)
            .expect("tool exists")
        {
            Ok(v) => Ok(v),
            Err(te) => {
                let mut detail = Map::new();
                detail.insert("code".into(), json!(te.code));
                if let Some(d) = self.skill.directive(&te.code) {
                    detail.insert("action".into(), json!(d.action.as_str()));
                    detail.insert("directive".into(), json!(d.message));
                }
                let mut e =
                    RpcError::new(EXECUTION_ERROR, format!("EXECUTION_ERROR: {}", te.message));
                e.data = Value::Array(vec![Value::Object(detail)]);
                Err(e)
            }
        }
    }

    fn handle_request(&self, req: &Value) -> Result<Value, RpcError> {
        let method = req
            .get("method")
            .and_then(Value::as_str)
            .ok_or_else(|| RpcError::new(INVALID_REQUEST, "method must be a string"))?;
        match method {
            "list_tools" => Ok(self.list_tools()),
            "call_tool" => {
                let params = req
                    .get("params")
                    .and_then(Value::as_object)
                    .ok_or_else(|| RpcError::new(INVALID_PARAMS, "params must be an object"))?;
                let tool = params
                    .get("tool")
                    .and_then(Value::as_str)
                    .ok_or_else(|| RpcError::new(INVALID_PARAMS, "params.tool must be a string"))?;
                let args = match params.get("args") {
                    None => Map::new(),
                    Some(Value::Object(m)) => m.clone(),
                    Some(_) => {
                        return Err(RpcError::new(
                            INVALID_PARAMS,
                            "params.args must be an object",
                        ))
                    }
                };
                self.dispatch(&ToolCall::new(tool, args))
            }
            other => {
                let mut e = RpcError::new(UNKNOWN_METHOD, format!("UNKNOWN_METHOD: {other}"));
                e.data = json!([{ "code": "UNKNOWN_METHOD", "method": other }]);
                Err(e)
            }
        }
    }

    /// One request line in, one response line out (without the newline).
    pub fn handle_line(&self, line: &str) -> String {
        let (id, outcome) = match serde_json::from_str::<Value>(line) {
            Err(e) => (
                Value::Null,
                Err(RpcError::new(PARSE_ERROR, format!("PARSE_ERROR: {e}"))),
            ),
            Ok(req) => match req.get("id") {
                Some(Value::String(id)) => (Value::String(id.clone()), self.handle_request(&req)),
                _ => (
                    req.get("id").cloned().unwrap_or(Value::Null),
                    Err(RpcError::new(INVALID_REQUEST, "id must be a string")),
                ),
            },
        };
        let response = match outcome {
            Ok(result) => json!({ "id": id, "result": result }),
            Err(e) => json!({ "id": id, "error": e.to_json() }),
        };
        serde_json::to_string(&response).expect("response serializes")
    }

    /// Serves requests sequentially until `input` is exhausted. Blank lines
    /// are skipped.
    pub fn serve(&self, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            writeln!(output, "{}", self.handle_line(&line))?;
            output.flush()?;
        }
        Ok(())
    }
}
