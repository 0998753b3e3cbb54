use std::collections::BTreeMap;

use serde::Serialize;

use super::SemError;

/// `x40000` -> 40000.
pub fn parse_mag_label(label: &str) -> Result<u64, SemError> {
    let bad = || SemError::BadMagLabel(label.to_string());
    let digits = label.strip_prefix('x').ok_or_else(bad)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    digits.parse().map_err(|_| bad())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationEntry {
    pub nm_per_px: f64,
    pub info_bar_px: usize,
}

/// Per-instrument mapping from magnification label to pixel scale.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CalibrationTable {
    entries: BTreeMap<String, CalibrationEntry>,
}

impl CalibrationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: &str, entry: CalibrationEntry) -> Result<(), SemError> {
        parse_mag_label(label)?;
        if !(entry.nm_per_px > 0.0 && entry.nm_per_px.is_finite()) {
            return Err(SemError::CalibrationParse {
                line: 0,
                message: format!("nm_per_px for {label} must be finite and positive"),
            });
        }
        self.entries.insert(label.to_string(), entry);
        Ok(())
    }

    /// Lines of `<mag_label> <nm_per_px> <info_bar_px>`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, SemError> {
        let mut table = Self::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| SemError::CalibrationParse { line, message };
            let fields: Vec<&str> = content.split_whitespace().collect();
            let [label, scale, bar] = fields[..] else {
                return Err(err(format!("expected 3 fields, got {}", fields.len())));
            };
            parse_mag_label(label).map_err(|e| err(e.to_string()))?;
            let nm_per_px: f64 = scale
                .parse()
                .map_err(|_| err(format!("bad nm_per_px {scale:?}")))?;
            let info_bar_px: usize = bar
                .parse()
                .map_err(|_| err(format!("bad info_bar_px {bar:?}")))?;
            if table.entries.contains_key(label) {
                return Err(err(format!("duplicate label {label}")));
            }
            table
                .insert(
                    label,
                    CalibrationEntry {
                        nm_per_px,
                        info_bar_px,
                    },
                )
                .map_err(|e| match e {
                    SemError::CalibrationParse { message, .. } => err(message),
                    other => other,
                })?;
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Exact-match lookup; magnifications are never interpolated.
pub fn pixel_scale(table: &CalibrationTable, label: &str) -> Result<CalibrationEntry, SemError> {
    parse_mag_label(label)?;
    table
        .entries
        .get(label)
        .copied()
        .ok_or_else(|| SemError::UnknownMagnification(label.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "\
# field of view 2540 nm over 1024 px
x40000 2.48046875 64

x10000 9.921875 64   # 10160 nm / 1024 px
";

    #[test]
    fn labels() {
        assert_eq!(parse_mag_label("x40000").unwrap(), 40000);
        assert_eq!(parse_mag_label("x1").unwrap(), 1);
        for bad in ["40000", "x", "X40000", "x40k", "x-1", " x1"] {
            assert_eq!(
                parse_mag_label(bad).unwrap_err().code(),
                "BAD_MAG_LABEL",
                "{bad}"
            );
        }
    }

    #[test]
    fn fixture_lookup() {
        let t = CalibrationTable::parse(FIXTURE).unwrap();
        assert_eq!(t.len(), 2);
        let e = pixel_scale(&t, "x40000").unwrap();
        assert_eq!(e.nm_per_px, 2540.0 / 1024.0);
        assert_eq!(e.info_bar_px, 64);
        assert_eq!(
            pixel_scale(&t, "x20000").unwrap_err().code(),
            "UNKNOWN_MAGNIFICATION"
        );
        assert_eq!(
            pixel_scale(&t, "20000").unwrap_err().code(),
            "BAD_MAG_LABEL"
        );
    }

    #[test]
    fn tables_are_per_instrument() {
        let a = CalibrationTable::parse("x40000 2.48046875 64").unwrap();
        let b = CalibrationTable::parse("x40000 2.5 40").unwrap();
        assert_ne!(
            pixel_scale(&a, "x40000").unwrap().nm_per_px,
            pixel_scale(&b, "x40000").unwrap().nm_per_px
        );
    }

    #[test]
    fn parse_errors_carry_line() {
        let e = CalibrationTable::parse("x1 1 0\nx2 oops 0\n").unwrap_err();
        assert!(matches!(e, SemError::CalibrationParse { line: 2, .. }));
        let e = CalibrationTable::parse("x1 1 0\nx1 2 0\n").unwrap_err();
        assert!(matches!(e, SemError::CalibrationParse { line: 2, .. }));
        let e = CalibrationTable::parse("x1 0 0\n").unwrap_err();
        assert!(matches!(e, SemError::CalibrationParse { line: 1, .. }));
        assert!(CalibrationTable::parse("x1 1\n").is_err());
        assert!(CalibrationTable::parse("mag 1 0\n").is_err());
    }
}
