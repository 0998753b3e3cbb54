use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde_json::{json, Value};

use crate::schema::{Args, TypedSchema};

/// Failure raised by a handler after the gate has passed.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolError {
    pub code: String,
    pub message: String,
}

impl ToolError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

pub type Handler = Box<dyn Fn(&Args) -> Result<Value, ToolError> + Send + Sync>;

struct Entry {
    schema: TypedSchema,
    handler: Handler,
    invocations: AtomicU64,
}

/// Tools by name, each with its schema and handler.
#[derive(Default)]
pub struct ToolRegistry {
    tools: BTreeMap<String, Entry>,
}

impl std::fmt::Debug for ToolRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.tools.keys()).finish()
    }
}

impl ToolRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, schema: TypedSchema, handler: Handler) -> Result<(), String> {
        let name = schema.tool_name().to_string();
        if self.tools.contains_key(&name) {
            return Err(format!("tool {name} registered twice"));
        }
        self.tools.insert(
            name,
            Entry {
                schema,
                handler,
                invocations: AtomicU64::new(0),
            },
        );
        Ok(())
    }

    pub fn schema(&self, name: &str) -> Option<&TypedSchema> {
        self.tools.get(name).map(|e| &e.schema)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tools.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.tools.is_empty()
    }

    /// `{name, description, schema}` per tool, sorted by name.
    pub fn list_tools(&self) -> Value {
        let tools: Vec<Value> = self
            .tools
            .iter()
            .map(|(name, e)| {
                json!({
                    "name": name,
                    "description": e.schema.description(),
                    "schema": e.schema.render(),
                })
            })
            .collect();
        json!({ "tools": tools })
    }

    /// Runs a handler on already-validated arguments.
    pub(crate) fn invoke(&self, name: &str, args: &Args) -> Option<Result<Value, ToolError>> {
        let e = self.tools.get(name)?;
        e.invocations.fetch_add(1, Ordering::SeqCst);
        Some((e.handler)(args))
    }

    /// Number of times `name`'s handler has run.
    pub fn invocations(&self, name: &str) -> u64 {
        self.tools
            .get(name)
            .map_or(0, |e| e.invocations.load(Ordering::SeqCst))
    }

    pub fn total_invocations(&self) -> u64 {
        self.tools
            .values()
            .map(|e| e.invocations.load(Ordering::SeqCst))
            .sum()
    }
}
