//! The JSON-lines manifest handed to external embedding exporters.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use ctxbias_core::corpus::{
    index_occurrences, sample_occurrences, swap_pair, Corpus, DefinitionalPair, WordList,
};
use ctxbias_core::seed::child_rng;
use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

pub const TAG_ORIG: &str = "orig";
pub const TAG_SWAP: &str = "swap";

/// One embedding request: the vector of `tokens[tid]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub sid: usize,
    pub tid: usize,
    pub word: String,
    pub tokens: Vec<String>,
    pub tag: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extraction {
    pub records: Vec<ManifestRecord>,
    /// Records emitted per list name.
    pub counts: BTreeMap<String, usize>,
    pub missing: BTreeMap<String, Vec<String>>,
}

/// Samples up to `cap` occurrences per listed word. Definitional words get an
/// `orig` record followed by its gender-swapped `swap` twin; other lists get
/// `orig` records only. A (sentence, token, tag) triple is emitted once.
pub fn extract(
    corpus: &Corpus,
    pairs: &[DefinitionalPair],
    lists: &[WordList],
    cap: usize,
    seed: u64,
) -> Result<Extraction> {
    let mut out = Extraction::default();
    let mut emitted: HashSet<(usize, usize, &'static str)> = HashSet::new();
    let def_words: Vec<&str> = pairs.iter().flat_map(|p| [p.female(), p.male()]).collect();
    let def_index = index_occurrences(corpus, def_words.iter().copied());
    let mut count = 0;
    for pair in pairs {
        for word in [pair.female(), pair.male()] {
            let mut rng = child_rng(seed, &format!("extract:{word}"), 0);
            let sample = sample_occurrences(&def_index, word, cap, &mut rng)?;
            if sample.is_empty() {
                out.missing.entry("definitional".into()).or_default().push(word.into());
            }
            for occ in sample {
                if !emitted.insert((occ.sentence_id, occ.token_index, TAG_ORIG)) {
                    continue;
                }
                let tokens = corpus.sentences()[occ.sentence_id].clone();
                let swapped = swap_pair(corpus, &occ, pair)?;
                out.records.push(ManifestRecord {
                    sid: occ.sentence_id,
                    tid: occ.token_index,
                    word: occ.word.clone(),
                    tokens,
                    tag: TAG_ORIG.into(),
                });
                emitted.insert((occ.sentence_id, occ.token_index, TAG_SWAP));
                out.records.push(ManifestRecord {
                    sid: occ.sentence_id,
                    tid: occ.token_index,
                    word: swapped[occ.token_index].clone(),
                    tokens: swapped,
                    tag: TAG_SWAP.into(),
                });
                count += 1;
            }
        }
    }
    if !pairs.is_empty() {
        out.counts.insert("definitional".into(), count);
    }
    for list in lists {
        let index = index_occurrences(corpus, list.words());
        let mut count = 0;
        for word in list.words() {
            let mut rng = child_rng(seed, &format!("extract:{word}"), 0);
            let sample = sample_occurrences(&index, word, cap, &mut rng)?;
            if sample.is_empty() {
                out.missing.entry(list.name().into()).or_default().push(word.into());
            }
            for occ in sample {
                if !emitted.insert((occ.sentence_id, occ.token_index, TAG_ORIG)) {
                    continue;
                }
                out.records.push(ManifestRecord {
                    sid: occ.sentence_id,
                    tid: occ.token_index,
                    word: occ.word.clone(),
                    tokens: corpus.sentences()[occ.sentence_id].clone(),
                    tag: TAG_ORIG.into(),
                });
                count += 1;
            }
        }
        out.counts.insert(list.name().into(), count);
    }
    Ok(out)
}

pub fn write_manifest(records: &[ManifestRecord], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r).expect("manifest records serialize");
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| AuditError::io(path, e))?;
    f.write_all(&buf).map_err(|e| AuditError::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let text = fs::read_to_string(path).map_err(|e| AuditError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| AuditError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Corpus {
        Corpus::from_text(
            "she is a nurse\nhe said he left\nthe nurse arrived\nman bites dog\na woman smiled",
            true,
            "c",
        )
    }

    #[test]
    fn swap_records_pair_with_orig() {
        let pairs = vec![
            DefinitionalPair::new("she", "he").unwrap(),
            DefinitionalPair::new("woman", "man").unwrap(),
        ];
        let ex = extract(&corpus(), &pairs, &[], 100, 1).unwrap();
        let orig = ex.records.iter().filter(|r| r.tag == TAG_ORIG).count();
        let swap = ex.records.iter().filter(|r| r.tag == TAG_SWAP).count();
        assert_eq!(orig, 5);
        assert_eq!(orig, swap);
        for w in ex.records.chunks(2) {
            assert_eq!((w[0].sid, w[0].tid), (w[1].sid, w[1].tid));
            assert_eq!(w[0].tokens[w[0].tid], w[0].word);
            assert_eq!(w[1].tokens[w[1].tid], w[1].word);
            assert_ne!(w[0].word, w[1].word);
        }
        let he = ex.records.iter().find(|r| r.sid == 1 && r.tid == 2 && r.tag == TAG_SWAP).unwrap();
        assert_eq!(he.tokens, vec!["he", "said", "she", "left"]);
    }

    #[test]
    fn missing_list_gives_empty_manifest() {
        let list = WordList::from_words("professions", ["astronaut"]).unwrap();
        let ex = extract(&corpus(), &[], &[list], 10, 1).unwrap();
        assert!(ex.records.is_empty());
        assert_eq!(ex.missing["professions"], vec!["astronaut"]);
    }

    #[test]
    fn cap_limits_records() {
        let text = vec!["the nurse works"; 50].join("\n");
        let c = Corpus::from_text(&text, true, "c");
        let list = WordList::from_words("professions", ["nurse"]).unwrap();
        let ex = extract(&c, &[], &[list], 10, 7).unwrap();
        assert_eq!(ex.records.len(), 10);
        assert_eq!(ex.counts["professions"], 10);
    }

    #[test]
    fn manifest_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let pairs = vec![DefinitionalPair::new("she", "he").unwrap()];
        let ex = extract(&corpus(), &pairs, &[], 100, 1).unwrap();
        write_manifest(&ex.records, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("{\"sid\":0,\"tid\":0,\"word\":\"she\",\"tokens\":[\"she\",\"is\",\"a\",\"nurse\"],\"tag\":\"orig\"}\n"));
        assert_eq!(read_manifest(&path).unwrap(), ex.records);
    }
}
