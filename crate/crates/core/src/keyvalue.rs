//! Line-oriented `key = value` text format shared by crystal data files and
//! run configurations.
//!
//! ```text
//! # comment
//! version = 1
//! [crystal "BBO"]
//! formula_o = pole_quadratic
//! coeffs_o = 2.7359, 0.01878, 0.01822, 0.01354
//! ```
//!
//! Numbers use `.` as the decimal separator and are parsed with
//! [`str::parse::<f64>`], which does not depend on the process locale.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub kind: String,
    pub name: Option<String>,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    /// Label used in diagnostics (usually the file path).
    pub origin: String,
    /// Entries that appear before the first section header.
    pub preamble: Vec<Entry>,
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(origin: &str, text: &str) -> Result<Self> {
        let mut doc = Document {
            origin: origin.to_string(),
            preamble: Vec::new(),
            sections: Vec::new(),
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if let Some(header) = content.strip_prefix('[') {
                let header = header
                    .strip_suffix(']')
                    .ok_or_else(|| doc.error(line, "unterminated section header"))?
                    .trim();
                let (kind, name) = match header.split_once(char::is_whitespace) {
                    None => (header.to_string(), None),
                    Some((kind, rest)) => {
                        let rest = rest.trim();
                        let name = rest
                            .strip_prefix('"')
                            .and_then(|r| r.strip_suffix('"'))
                            .ok_or_else(|| doc.error(line, "section name must be double-quoted"))?;
                        (kind.to_string(), Some(name.to_string()))
                    }
                };
                if kind.is_empty() {
                    return Err(doc.error(line, "empty section header"));
                }
                doc.sections.push(Section {
                    kind,
                    name,
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| doc.error(line, "expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(doc.error(line, format!("invalid key `{key}`")));
            }
            let target = match doc.sections.last_mut() {
                Some(section) => &mut section.entries,
                None => &mut doc.preamble,
            };
            if target.iter().any(|e| e.key == key) {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            target.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line,
            });
        }
        Ok(doc)
    }

    pub fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.origin.clone(),
            line,
            message: message.into(),
        }
    }

    pub fn sections<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Section> + 'a {
        self.sections.iter().filter(move |s| s.kind == kind)
    }
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

/// Parses a finite decimal number.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let ok_chars = s
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
    if s.is_empty() || !ok_chars {
        return Err(format!("`{s}` is not a decimal number"));
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{s}` is not a decimal number"))
}

/// Parses a comma-separated list of numbers.
pub fn parse_number_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(parse_number).collect()
}
