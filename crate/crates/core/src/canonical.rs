//! Canonical text rendering shared by the report serializers.

use sha2::{Digest, Sha256};

/// Shortest decimal string that parses back to the same `f64`.
///
/// `Debug` formatting for `f64` already produces the shortest round-tripping
/// representation; it switches to exponent notation for very small and very
/// large magnitudes, which still round-trips.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:?}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Line-oriented `key = value` writer with LF separators.
#[derive(Debug, Default)]
pub struct KvWriter {
    buf: String,
}

impl KvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: &str) {
        self.buf.push_str("# ");
        self.buf.push_str(text);
        self.buf.push('\n');
    }

    pub fn str(&mut self, key: &str, value: &str) {
        self.buf.push_str(key);
        self.buf.push_str(" = ");
        self.buf.push_str(value);
        self.buf.push('\n');
    }

    pub fn f64(&mut self, key: &str, value: f64) {
        self.str(key, &fmt_f64(value));
    }

    pub fn opt_f64(&mut self, key: &str, value: Option<f64>) {
        match value {
            Some(v) => self.f64(key, v),
            None => self.str(key, "null"),
        }
    }

    pub fn int(&mut self, key: &str, value: impl Into<i128>) {
        self.str(key, &value.into().to_string());
    }

    pub fn bool(&mut self, key: &str, value: bool) {
        self.str(key, if value { "true" } else { "false" });
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Appends `canonical_hash = <sha256 of body>` and returns the full text.
pub fn seal(body: String) -> (String, String) {
    let hash = sha256_hex(body.as_bytes());
    let mut out = body;
    out.push_str("canonical_hash = ");
    out.push_str(&hash);
    out.push('\n');
    (out, hash)
}

/// Splits a sealed document into its body and embedded hash.
pub fn unseal(text: &str) -> Option<(&str, &str)> {
    let idx = text.rfind("canonical_hash = ")?;
    let (body, tail) = text.split_at(idx);
    let hash = tail
        .strip_prefix("canonical_hash = ")?
        .trim_end_matches('\n');
    Some((body, hash))
}
