//! Strict sectioned `key = value` files.
//!
//! Lines starting with `#` or `;` are comments, as is anything after ` #`.
//! Values may be wrapped in double quotes. Keys are case-sensitive.

use std::collections::BTreeMap;

use crate::ConfigError;

pub const SECTIONS: [&str; 5] = ["plant", "operator", "controller", "reference", "sim"];

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ini {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

impl Ini {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut ini = Ini::default();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(line_no, format!("malformed section header '{line}'")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::at(line_no, format!("unknown section [{name}]")));
                }
                if ini.sections.contains_key(name) {
                    return Err(ConfigError::at(line_no, format!("section [{name}] appears twice")));
                }
                ini.sections.insert(name.to_string(), BTreeMap::new());
                current = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::at(line_no, format!("expected 'key = value', got '{line}'")));
            };
            let section =
                current.as_ref().ok_or_else(|| ConfigError::at(line_no, "key outside of any section".to_string()))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::at(line_no, "empty key".to_string()));
            }
            let value = unquote(value.trim()).map_err(|m| ConfigError::at(line_no, m))?;
            let entries = ini.sections.get_mut(section).expect("section was inserted");
            if entries.contains_key(key) {
                return Err(ConfigError::at(line_no, format!("duplicate key '{key}' in [{section}]")));
            }
            entries.insert(key.to_string(), Entry { value, line: line_no });
        }
        Ok(ini)
    }

    /// Removes and returns `section.key`, so that leftovers can be reported.
    pub fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        self.sections.get_mut(section)?.remove(key).map(|e| (e.value, e.line))
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.sections.get(section).is_some_and(|s| s.contains_key(key))
    }

    /// Fails on the first key nobody took.
    pub fn finish(self) -> Result<(), ConfigError> {
        let leftover = self
            .sections
            .iter()
            .flat_map(|(s, keys)| keys.iter().map(move |(k, e)| (s, k, e.line)))
            .min_by_key(|x| x.2);
        match leftover {
            Some((section, key, line)) => Err(ConfigError::at(line, format!("unknown key '{key}' in [{section}]"))),
            None => Ok(()),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'"' => in_quotes = !in_quotes,
            b'#' if !in_quotes && i > 0 && bytes[i - 1].is_ascii_whitespace() => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(v: &str) -> Result<String, String> {
    match v.strip_prefix('"') {
        Some(rest) => rest.strip_suffix('"').map(str::to_string).ok_or_else(|| format!("unterminated quote in {v}")),
        None => Ok(v.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let mut ini = Ini::parse("# top\n[plant]\ngamma = 2 # inline\n\n[operator]\natoms = \"0:1, 1:2\"\n").unwrap();
        assert_eq!(ini.take("plant", "gamma").unwrap().0, "2");
        assert_eq!(ini.take("operator", "atoms").unwrap().0, "0:1, 1:2");
        ini.finish().unwrap();
    }

    #[test]
    fn strictness() {
        assert!(Ini::parse("[nope]\n").is_err());
        assert!(Ini::parse("x = 1\n").is_err());
        assert!(Ini::parse("[sim]\ndt = 1\ndt = 2\n").is_err());
        assert!(Ini::parse("[sim]\n[sim]\n").is_err());
        assert!(Ini::parse("[sim]\njunk\n").is_err());
        let err = Ini::parse("[sim]\nbogus = 1\n").unwrap().finish().unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }
}
