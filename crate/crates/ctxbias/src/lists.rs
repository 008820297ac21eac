//! JSON word-list files.
//!
//! Accepted shapes:
//!
//! * `["nurse", "surgeon"]`: plain words
//! * `[["woman", "man"], ["she", "he"]]`: definitional pairs, female first
//! * `[["accountant", 0.0, 0.4], ...]`: scored words; the last number is the
//!   original bias, positive meaning male-leaning
//! * `{"female": [...], "male": [...]}`: gender-labelled words

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use ctxbias_core::corpus::{DefinitionalPair, Gender, WordEntry, WordList};
use serde_json::Value;

use crate::error::{AuditError, Result};

fn list_err(path: &Path, message: impl Into<String>) -> AuditError {
    AuditError::WordList {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| AuditError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AuditError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn normalize(word: &str, lowercase: bool) -> String {
    if lowercase {
        word.to_lowercase()
    } else {
        word.to_string()
    }
}

/// Parses any accepted list shape. Pair files become a flat list of both
/// members with their gender labels.
pub fn parse_word_list(value: &Value, name: &str, lowercase: bool, path: &Path) -> Result<WordList> {
    let mut entries: Vec<WordEntry> = Vec::new();
    match value {
        Value::Object(map) => {
            for (key, gender) in [("female", Gender::Female), ("male", Gender::Male)] {
                let Some(words) = map.get(key) else { continue };
                let words = words
                    .as_array()
                    .ok_or_else(|| list_err(path, format!("`{key}` must be an array")))?;
                for w in words {
                    let w = w
                        .as_str()
                        .ok_or_else(|| list_err(path, format!("`{key}` entries must be strings")))?;
                    entries.push(WordEntry {
                        word: normalize(w, lowercase),
                        label: Some(gender),
                        score: None,
                    });
                }
            }
            if let Some(other) = map.keys().find(|k| *k != "female" && *k != "male") {
                return Err(list_err(path, format!("unexpected key `{other}`")));
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                match item {
                    Value::String(w) => entries.push(WordEntry::plain(normalize(w, lowercase))),
                    Value::Array(fields) => {
                        let strings: Vec<&str> = fields.iter().filter_map(Value::as_str).collect();
                        let numbers: Vec<f64> = fields.iter().filter_map(Value::as_f64).collect();
                        if strings.len() == 2 && fields.len() == 2 {
                            let pair = DefinitionalPair::new(
                                normalize(strings[0], true),
                                normalize(strings[1], true),
                            )
                            .map_err(|e| list_err(path, format!("entry {i}: {e}")))?;
                            entries.push(WordEntry {
                                word: pair.female().into(),
                                label: Some(Gender::Female),
                                score: None,
                            });
                            entries.push(WordEntry {
                                word: pair.male().into(),
                                label: Some(Gender::Male),
                                score: None,
                            });
                        } else if strings.len() == 1
                            && fields.first().is_some_and(Value::is_string)
                            && !numbers.is_empty()
                            && strings.len() + numbers.len() == fields.len()
                        {
                            entries.push(WordEntry {
                                word: normalize(strings[0], lowercase),
                                label: None,
                                score: numbers.last().copied(),
                            });
                        } else {
                            return Err(list_err(path, format!("entry {i} has an unsupported shape")));
                        }
                    }
                    _ => return Err(list_err(path, format!("entry {i} has an unsupported shape"))),
                }
            }
        }
        _ => return Err(list_err(path, "expected a JSON array or object")),
    }
    let mut seen = HashSet::new();
    entries.retain(|e| {
        let fresh = seen.insert(e.word.clone());
        if !fresh {
            log::warn!("{}: duplicate word `{}` ignored", path.display(), e.word);
        }
        fresh
    });
    WordList::new(name, entries).map_err(|e| list_err(path, e.to_string()))
}

pub fn load_word_list(path: &Path, name: &str, lowercase: bool) -> Result<WordList> {
    parse_word_list(&read_json(path)?, name, lowercase, path)
}

/// Loads a definitional pair file (`[[female, male], ...]`). Pair words are
/// always lowercased.
pub fn load_pairs(path: &Path) -> Result<Vec<DefinitionalPair>> {
    parse_pairs(&read_json(path)?, path)
}

pub fn parse_pairs(value: &Value, path: &Path) -> Result<Vec<DefinitionalPair>> {
    let items = value
        .as_array()
        .ok_or_else(|| list_err(path, "expected an array of [female, male] pairs"))?;
    let mut pairs = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let fields = item.as_array().filter(|f| f.len() == 2);
        let words = fields.and_then(|f| Some((f[0].as_str()?, f[1].as_str()?)));
        let (female, male) =
            words.ok_or_else(|| list_err(path, format!("entry {i} is not a [female, male] pair")))?;
        let pair = DefinitionalPair::new(female.to_lowercase(), male.to_lowercase())
            .map_err(|e| list_err(path, format!("entry {i}: {e}")))?;
        pairs.push(pair);
    }
    Ok(pairs)
}

pub fn pairs_to_json(pairs: &[DefinitionalPair]) -> Value {
    Value::Array(
        pairs
            .iter()
            .map(|p| Value::Array(vec![p.female().into(), p.male().into()]))
            .collect(),
    )
}

/// `[[word, score, score], ...]`, repeating the score in both numeric slots.
pub fn scored_to_json(list: &WordList) -> Value {
    Value::Array(
        list.entries()
            .iter()
            .map(|e| {
                let s = e.score.unwrap_or(0.0);
                serde_json::json!([e.word, s, s])
            })
            .collect(),
    )
}

pub fn labelled_to_json(list: &WordList) -> Value {
    let pick = |g: Gender| -> Vec<Value> {
        list.entries()
            .iter()
            .filter(|e| e.label == Some(g))
            .map(|e| Value::String(e.word.clone()))
            .collect()
    };
    serde_json::json!({ "female": pick(Gender::Female), "male": pick(Gender::Male) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn p() -> &'static Path {
        Path::new("list.json")
    }

    #[test]
    fn plain_strings() {
        let l = parse_word_list(&json!(["Nurse", "surgeon"]), "p", true, p()).unwrap();
        assert_eq!(l.words().collect::<Vec<_>>(), vec!["nurse", "surgeon"]);
        assert!(l.entries()[0].label.is_none());
    }

    #[test]
    fn triples_take_last_number() {
        let l = parse_word_list(&json!([["accountant", 0.0, 0.4], ["nanny", -0.1, -0.8]]), "p", true, p())
            .unwrap();
        assert_eq!(l.entries()[0].score, Some(0.4));
        assert_eq!(l.entries()[1].score, Some(-0.8));
    }

    #[test]
    fn labelled_object() {
        let l = parse_word_list(&json!({"female": ["bridal"], "male": ["cigar", "hero"]}), "b", true, p())
            .unwrap();
        assert_eq!(l.len(), 3);
        assert_eq!(l.get("cigar").unwrap().label, Some(Gender::Male));
        assert!(parse_word_list(&json!({"other": []}), "b", true, p()).is_err());
    }

    #[test]
    fn pairs_are_lowercased() {
        let pairs = parse_pairs(&json!([["woman", "man"], ["Mary", "John"]]), p()).unwrap();
        assert_eq!(pairs[1].female(), "mary");
        assert!(parse_pairs(&json!([["she", "she"]]), p()).is_err());
        assert!(parse_pairs(&json!([["she"]]), p()).is_err());
        let flat = parse_word_list(&json!([["woman", "man"]]), "d", true, p()).unwrap();
        assert_eq!(flat.get("man").unwrap().label, Some(Gender::Male));
    }

    #[test]
    fn duplicates_keep_first() {
        let l = parse_word_list(&json!(["a", "A", "b"]), "x", true, p()).unwrap();
        assert_eq!(l.len(), 2);
    }

    #[test]
    fn bad_shapes() {
        assert!(parse_word_list(&json!(3), "x", true, p()).is_err());
        assert!(parse_word_list(&json!([[1, 2]]), "x", true, p()).is_err());
        assert!(parse_word_list(&json!([{"a": 1}]), "x", true, p()).is_err());
    }
}
