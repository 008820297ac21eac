//! File-backed loaders and writers.

use std::fs;
use std::path::Path;

use ctxbias_core::corpus::Corpus;
use ctxbias_core::embformat::{self, EmbeddingStore, StaticTable};

use crate::error::{AuditError, Result};

/// Reads a one-sentence-per-line UTF-8 corpus.
pub fn load_corpus(path: &Path, lowercase: bool) -> Result<Corpus> {
    let bytes = fs::read(path).map_err(|e| AuditError::io(path, e))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| AuditError::Utf8 {
        path: path.to_path_buf(),
        offset: e.valid_up_to(),
    })?;
    Ok(Corpus::from_text(text, lowercase, path.display().to_string()))
}

pub fn write_cemb(store: &EmbeddingStore, path: &Path) -> Result<()> {
    let bytes = embformat::encode(store).map_err(|source| AuditError::Format {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, bytes).map_err(|e| AuditError::io(path, e))
}

pub fn read_cemb(path: &Path) -> Result<EmbeddingStore> {
    let bytes = fs::read(path).map_err(|e| AuditError::io(path, e))?;
    embformat::decode(&bytes).map_err(|source| AuditError::Format {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses word2vec text vectors: an optional `count dim` header line, then
/// `word v1 .. vd` rows. A repeated word replaces the earlier row.
pub fn parse_word2vec_text(text: &str, path: &Path) -> Result<StaticTable> {
    let parse_err = |line: usize, message: String| AuditError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut table: Option<StaticTable> = None;
    let mut declared: Option<(usize, usize)> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else {
            continue;
        };
        let rest: Vec<&str> = fields.collect();
        if i == 0 && rest.len() == 1 {
            if let (Ok(count), Ok(dim)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                declared = Some((count, dim));
                continue;
            }
        }
        let values = rest
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| parse_err(line_no, format!("bad number: {e}")))?;
        if values.is_empty() {
            return Err(parse_err(line_no, format!("no values for `{word}`")));
        }
        let t = match &mut table {
            Some(t) => t,
            None => {
                let dim = declared.map_or(values.len(), |(_, d)| d);
                table.insert(StaticTable::new(dim).map_err(|e| parse_err(line_no, e.to_string()))?)
            }
        };
        if values.len() != t.dimension() {
            return Err(parse_err(
                line_no,
                format!("{} values, expected {}", values.len(), t.dimension()),
            ));
        }
        if t.insert(word, values).map_err(|e| parse_err(line_no, e.to_string()))?.is_some() {
            log::warn!("{}:{line_no}: duplicate word `{word}`, keeping the last row", path.display());
        }
    }
    let table = table.ok_or_else(|| parse_err(0, "no vectors".into()))?;
    if let Some((count, _)) = declared {
        if count != table.len() {
            log::warn!(
                "{}: header declares {count} words, found {}",
                path.display(),
                table.len()
            );
        }
    }
    Ok(table)
}

pub fn load_word2vec_text(path: &Path) -> Result<StaticTable> {
    let text = fs::read_to_string(path).map_err(|e| AuditError::io(path, e))?;
    parse_word2vec_text(&text, path)
}

/// Writes a table in word2vec text form with a header line.
pub fn write_word2vec_text(table: &StaticTable, path: &Path) -> Result<()> {
    use std::fmt::Write as _;
    let mut out = format!("{} {}\n", table.len(), table.dimension());
    for (word, v) in table.iter() {
        out.push_str(word);
        for x in v {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| AuditError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctxbias_core::embformat::EmbeddingProvider;

    fn p() -> &'static Path {
        Path::new("t.txt")
    }

    #[test]
    fn headerless_and_header_agree() {
        let a = parse_word2vec_text("she 1 2 3\nhe 4 5 6\n", p()).unwrap();
        let b = parse_word2vec_text("2 3\nshe 1 2 3\nhe 4 5 6\n", p()).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a, b);
        assert_eq!(a.embed_word("he").unwrap(), vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn ragged_row_names_line() {
        let err = parse_word2vec_text("a 1 2 3\nb 1 2 3 4\n", p()).unwrap_err();
        assert!(matches!(err, AuditError::Parse { line: 2, .. }), "{err}");
        let err = parse_word2vec_text("2 3\na 1 2\n", p()).unwrap_err();
        assert!(matches!(err, AuditError::Parse { line: 2, .. }));
    }

    #[test]
    fn duplicate_last_wins() {
        let t = parse_word2vec_text("a 1 2\na 3 4\n", p()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get("a").unwrap(), &[3.0, 4.0]);
    }

    #[test]
    fn corpus_reports_utf8_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        fs::write(&path, b"ok line\nbad \xff here\n").unwrap();
        match load_corpus(&path, true) {
            Err(AuditError::Utf8 { offset, .. }) => assert_eq!(offset, 12),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&path, "She is a doctor .\n\nHe works .\n").unwrap();
        let c = load_corpus(&path, true).unwrap();
        assert_eq!(c.len(), 2);
        assert!(matches!(
            load_corpus(&dir.path().join("missing.txt"), true),
            Err(AuditError::Io { .. })
        ));
    }
}
