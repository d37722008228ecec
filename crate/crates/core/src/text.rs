//! Small text utilities shared by the domains and the harness.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use sha2::{Digest, Sha256};

/// Approximate token count used for offline models.
///
/// Every maximal run of alphanumeric characters is one token and every other
/// non-whitespace character is one token. Only relative growth is meaningful.
pub fn approx_tokens(text: &str) -> u64 {
    let mut count = 0u64;
    let mut in_word = false;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if !in_word {
                count += 1;
                in_word = true;
            }
        } else {
            in_word = false;
            if !c.is_whitespace() {
                count += 1;
            }
        }
    }
    count
}

/// Lowercase hex SHA-256 of `text`.
pub fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template references unknown placeholder {{{0}}}")]
    UnknownPlaceholder(String),
    #[error("unterminated placeholder starting at byte {0}")]
    Unterminated(usize),
}

/// A text template with `{name}` placeholders. `{{` and `}}` escape braces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    source: String,
}

impl Template {
    pub fn new(source: impl Into<String>) -> Self {
        Self { source: source.into() }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Names of all placeholders, in order of appearance.
    pub fn placeholders(&self) -> Result<Vec<String>, TemplateError> {
        let mut names = Vec::new();
        self.walk(|piece| {
            if let Piece::Slot(name) = piece {
                names.push(name.to_string());
            }
            Ok(())
        })?;
        Ok(names)
    }

    /// Substitute every placeholder. A placeholder without a value is an error.
    pub fn render(&self, values: &BTreeMap<&str, &str>) -> Result<String, TemplateError> {
        let mut out = String::with_capacity(self.source.len());
        self.walk(|piece| {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(name) => match values.get(name) {
                    Some(v) => out.push_str(v),
                    None => return Err(TemplateError::UnknownPlaceholder(name.to_string())),
                },
            }
            Ok(())
        })?;
        Ok(out)
    }

    fn walk<'a>(
        &'a self,
        mut f: impl FnMut(Piece<'a>) -> Result<(), TemplateError>,
    ) -> Result<(), TemplateError> {
        let s = self.source.as_str();
        let bytes = s.as_bytes();
        let mut i = 0;
        let mut start = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'{' if bytes.get(i + 1) == Some(&b'{') => {
                    f(Piece::Text(&s[start..i + 1]))?;
                    i += 2;
                    start = i;
                }
                b'}' if bytes.get(i + 1) == Some(&b'}') => {
                    f(Piece::Text(&s[start..i + 1]))?;
                    i += 2;
                    start = i;
                }
                b'{' => {
                    f(Piece::Text(&s[start..i]))?;
                    let close = s[i..].find('}').ok_or(TemplateError::Unterminated(i))?;
                    f(Piece::Slot(&s[i + 1..i + close]))?;
                    i += close + 1;
                    start = i;
                }
                _ => i += 1,
            }
        }
        f(Piece::Text(&s[start..]))
    }
}

enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_count_splits_words_and_punctuation() {
        assert_eq!(approx_tokens(""), 0);
        assert_eq!(approx_tokens("hello world"), 2);
        assert_eq!(approx_tokens("(1+1)*(6+6)"), 11);
        assert_eq!(approx_tokens("foo"), 1);
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn template_substitutes_and_escapes() {
        let t = Template::new("a {x} b {{lit}} {y}");
        let mut v = BTreeMap::new();
        v.insert("x", "1");
        v.insert("y", "2");
        assert_eq!(t.render(&v).unwrap(), "a 1 b {lit} 2");
        assert_eq!(t.placeholders().unwrap(), ["x", "y"]);
    }

    #[test]
    fn template_missing_value_is_error() {
        let t = Template::new("{nope}");
        assert_eq!(
            t.render(&BTreeMap::new()),
            Err(TemplateError::UnknownPlaceholder("nope".into()))
        );
        assert!(Template::new("{open").placeholders().is_err());
    }
}
