//! Tokenized corpora, word lists and occurrence bookkeeping.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    sentences: Vec<Vec<String>>,
    source_path: String,
}

impl Corpus {
    /// Splits `text` into one sentence per nonempty line and whitespace tokens.
    pub fn from_text(text: &str, lowercase: bool, source_path: impl Into<String>) -> Self {
        let sentences = text
            .lines()
            .filter_map(|line| {
                let tokens: Vec<String> = line
                    .split_whitespace()
                    .map(|t| if lowercase { t.to_lowercase() } else { t.to_string() })
                    .collect();
                (!tokens.is_empty()).then_some(tokens)
            })
            .collect();
        Corpus {
            sentences,
            source_path: source_path.into(),
        }
    }

    pub fn sentences(&self) -> &[Vec<String>] {
        &self.sentences
    }

    pub fn sentence(&self, id: usize) -> Option<&[String]> {
        self.sentences.get(id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    /// The token an occurrence points at, if it is in range.
    pub fn token_at(&self, sentence_id: usize, token_index: usize) -> Option<&str> {
        self.sentences
            .get(sentence_id)
            .and_then(|s| s.get(token_index))
            .map(String::as_str)
    }
}

/// A word located in its sentence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occurrence {
    pub sentence_id: usize,
    pub token_index: usize,
    pub word: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }

    pub fn opposite(self) -> Gender {
        match self {
            Gender::Female => Gender::Male,
            Gender::Male => Gender::Female,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DefinitionalPair {
    female: String,
    male: String,
}

impl DefinitionalPair {
    pub fn new(female: impl Into<String>, male: impl Into<String>) -> Result<Self> {
        let female = female.into();
        let male = male.into();
        if female.is_empty() || male.is_empty() {
            return Err(Error::InvalidParameter("definitional words must be nonempty".into()));
        }
        if female != female.to_lowercase() || male != male.to_lowercase() {
            return Err(Error::InvalidParameter(alloc::format!(
                "definitional pair {female}/{male} must be lowercase"
            )));
        }
        if female == male {
            return Err(Error::InvalidParameter(alloc::format!(
                "definitional pair repeats `{female}`"
            )));
        }
        Ok(DefinitionalPair { female, male })
    }

    pub fn female(&self) -> &str {
        &self.female
    }

    pub fn male(&self) -> &str {
        &self.male
    }

    /// The opposite-gender element, or `None` if `word` is not in the pair.
    pub fn partner(&self, word: &str) -> Option<&str> {
        if word == self.female {
            Some(&self.male)
        } else if word == self.male {
            Some(&self.female)
        } else {
            None
        }
    }

    pub fn gender_of(&self, word: &str) -> Option<Gender> {
        if word == self.female {
            Some(Gender::Female)
        } else if word == self.male {
            Some(Gender::Male)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordEntry {
    pub word: String,
    pub label: Option<Gender>,
    pub score: Option<f64>,
}

impl WordEntry {
    pub fn plain(word: impl Into<String>) -> Self {
        WordEntry {
            word: word.into(),
            label: None,
            score: None,
        }
    }
}

/// A named list of unique words, optionally labelled or scored.
#[derive(Debug, Clone, PartialEq)]
pub struct WordList {
    name: String,
    entries: Vec<WordEntry>,
}

impl WordList {
    pub fn new(name: impl Into<String>, entries: Vec<WordEntry>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for e in &entries {
            if e.word.is_empty() {
                return Err(Error::InvalidParameter("empty word in list".into()));
            }
            if !seen.insert(e.word.as_str()) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "duplicate word `{}` in list",
                    e.word
                )));
            }
        }
        Ok(WordList {
            name: name.into(),
            entries,
        })
    }

    pub fn from_words<I, S>(name: impl Into<String>, words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(name, words.into_iter().map(WordEntry::plain).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[WordEntry] {
        &self.entries
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.word.as_str())
    }

    pub fn get(&self, word: &str) -> Option<&WordEntry> {
        self.entries.iter().find(|e| e.word == word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Occurrences per listed word, in (sentence, token) order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OccurrenceIndex {
    map: BTreeMap<String, Vec<Occurrence>>,
}

impl OccurrenceIndex {
    pub fn get(&self, word: &str) -> Option<&[Occurrence]> {
        self.map.get(word).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Occurrence])> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Words with no occurrences, sorted.
    pub fn missing(&self) -> Vec<String> {
        self.map
            .iter()
            .filter(|(_, v)| v.is_empty())
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn total(&self) -> usize {
        self.map.values().map(Vec::len).sum()
    }
}

/// Exact-token index of every listed word.
pub fn index_occurrences<'a, I>(corpus: &Corpus, words: I) -> OccurrenceIndex
where
    I: IntoIterator<Item = &'a str>,
{
    let mut map: BTreeMap<String, Vec<Occurrence>> =
        words.into_iter().map(|w| (w.to_string(), Vec::new())).collect();
    for (sid, sentence) in corpus.sentences.iter().enumerate() {
        for (tid, token) in sentence.iter().enumerate() {
            if let Some(list) = map.get_mut(token.as_str()) {
                list.push(Occurrence {
                    sentence_id: sid,
                    token_index: tid,
                    word: token.clone(),
                });
            }
        }
    }
    OccurrenceIndex { map }
}

/// Uniform sample of `min(n, available)` occurrences without replacement,
/// returned in corpus order. An unknown word yields an empty sample.
pub fn sample_occurrences<R: Rng + ?Sized>(
    index: &OccurrenceIndex,
    word: &str,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Occurrence>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let Some(all) = index.get(word) else {
        return Ok(Vec::new());
    };
    if all.len() <= n {
        return Ok(all.to_vec());
    }
    let mut picks = rand::seq::index::sample(rng, all.len(), n).into_vec();
    picks.sort_unstable();
    Ok(picks.into_iter().map(|i| all[i].clone()).collect())
}

/// Copy of the occurrence's sentence with only that token replaced by its
/// partner in `pair`.
pub fn swap_pair(corpus: &Corpus, occ: &Occurrence, pair: &DefinitionalPair) -> Result<Vec<String>> {
    let sentence = corpus
        .sentence(occ.sentence_id)
        .filter(|s| occ.token_index < s.len())
        .ok_or(Error::BadOccurrence {
            sentence_id: occ.sentence_id,
            token_index: occ.token_index,
        })?;
    let token = &sentence[occ.token_index];
    let partner = pair.partner(token).ok_or_else(|| Error::NotInPair {
        sentence_id: occ.sentence_id,
        token_index: occ.token_index,
        found: token.clone(),
        female: pair.female.clone(),
        male: pair.male.clone(),
    })?;
    let mut out = sentence.to_vec();
    out[occ.token_index] = partner.to_string();
    Ok(out)
}

/// Drops every occurrence whose sentence contains any definitional word.
pub fn filter_cooccurrence(
    corpus: &Corpus,
    index: &OccurrenceIndex,
    definitional: &[DefinitionalPair],
) -> OccurrenceIndex {
    let gendered: BTreeSet<&str> = definitional
        .iter()
        .flat_map(|p| [p.female.as_str(), p.male.as_str()])
        .collect();
    let clean = |sid: usize| {
        corpus
            .sentence(sid)
            .is_some_and(|s| !s.iter().any(|t| gendered.contains(t.as_str())))
    };
    let map = index
        .map
        .iter()
        .map(|(word, occs)| {
            let kept = occs.iter().filter(|o| clean(o.sentence_id)).cloned().collect();
            (word.clone(), kept)
        })
        .collect();
    OccurrenceIndex { map }
}
