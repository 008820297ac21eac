//! Embedding sources resolved into per-word token vectors.
//!
//! Every source is reduced to the same shape: for each listed word, the
//! vectors of its sampled occurrences, and for each definitional word, the
//! matching `orig - swap` difference vectors. Context-free sources expose one
//! vector per word and build differences from the pair partner's vector.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use ctxbias_core::corpus::{
    index_occurrences, sample_occurrences, swap_pair, Corpus, DefinitionalPair, WordList,
};
use ctxbias_core::embformat::{EmbeddingProvider, EmbeddingStore, ToyContextual};
use ctxbias_core::seed::child_rng;
use ctxbias_core::Error as CoreError;

use crate::config::{EmbeddingSpec, ExperimentConfig};
use crate::error::{AuditError, Result};
use crate::io;
use crate::manifest::TAG_SWAP;

pub const DEFINITIONAL: &str = "definitional";

/// One embedded occurrence. Context-free vectors use position `(-1, -1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub sentence_id: i64,
    pub token_index: i32,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Toy,
    ContextualCemb,
    StaticCemb,
    Word2vec,
}

impl SourceKind {
    pub fn name(self) -> &'static str {
        match self {
            SourceKind::Toy => "toy",
            SourceKind::ContextualCemb => "cemb-contextual",
            SourceKind::StaticCemb => "cemb-static",
            SourceKind::Word2vec => "word2vec-text",
        }
    }

    pub fn is_contextual(self) -> bool {
        matches!(self, SourceKind::Toy | SourceKind::ContextualCemb)
    }
}

/// The word lists of an audit, loaded and normalized.
#[derive(Debug, Clone, Default)]
pub struct Lists {
    pub pairs: Vec<DefinitionalPair>,
    pub professions: Option<WordList>,
    pub biased: Option<WordList>,
    pub extended_biased: Option<WordList>,
}

impl Lists {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let l = &cfg.lists;
        let word_list = |p: &Option<std::path::PathBuf>, name: &str| {
            p.as_ref()
                .map(|p| crate::lists::load_word_list(&cfg.resolve(p), name, cfg.lowercase))
                .transpose()
        };
        Ok(Lists {
            pairs: match &l.definitional {
                Some(p) => crate::lists::load_pairs(&cfg.resolve(p))?,
                None => Vec::new(),
            },
            professions: word_list(&l.professions, "professions")?,
            biased: word_list(&l.biased, "biased")?,
            extended_biased: word_list(&l.extended_biased, "extended_biased")?,
        })
    }

    pub fn word_lists(&self) -> impl Iterator<Item = &WordList> {
        [&self.professions, &self.biased, &self.extended_biased]
            .into_iter()
            .flatten()
    }

    fn pair_of(&self) -> BTreeMap<&str, &DefinitionalPair> {
        let mut map = BTreeMap::new();
        for p in &self.pairs {
            map.entry(p.female()).or_insert(p);
            map.entry(p.male()).or_insert(p);
        }
        map
    }

    fn definitional_words(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.pairs
            .iter()
            .flat_map(|p| [p.female(), p.male()])
            .filter(|w| seen.insert(*w))
            .collect()
    }
}

/// Token vectors for every listed word.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub kind: SourceKind,
    pub dimension: usize,
    /// Records in the underlying file or table.
    pub records: usize,
    tokens: BTreeMap<String, Vec<Token>>,
    diffs: BTreeMap<String, Vec<Vec<f64>>>,
    /// Sentences holding a definitional word, when a corpus is available.
    gendered: Option<BTreeSet<i64>>,
    pool: Vec<Vec<f64>>,
    /// Definitional occurrences whose swapped twin was absent.
    pub unpaired: usize,
}

impl Prepared {
    pub fn load(cfg: &ExperimentConfig, lists: &Lists, cap: usize) -> Result<Self> {
        let corpus = cfg
            .corpus
            .as_ref()
            .map(|p| io::load_corpus(&cfg.resolve(p), cfg.lowercase))
            .transpose()?;
        match &cfg.embeddings {
            EmbeddingSpec::Toy {
                table,
                alpha,
                window,
            } => {
                let corpus = corpus.ok_or_else(|| {
                    AuditError::Config("the toy provider needs a `corpus`".into())
                })?;
                let provider = ToyContextual {
                    table: io::load_word2vec_text(&cfg.resolve(table))?,
                    alpha: *alpha,
                    window: *window,
                };
                from_provider(&provider, &corpus, lists, cap, cfg.seed)
            }
            EmbeddingSpec::Word2vec { path } => {
                let table = io::load_word2vec_text(&cfg.resolve(path))?;
                let vectors: BTreeMap<String, Vec<f64>> =
                    table.iter().map(|(w, v)| (w.to_string(), v.to_vec())).collect();
                Ok(from_static(SourceKind::Word2vec, table.dimension(), vectors, lists))
            }
            EmbeddingSpec::Cemb { path } => {
                let store = io::read_cemb(&cfg.resolve(path))?;
                if store.is_static() && !store.is_empty() {
                    let mut vectors = BTreeMap::new();
                    for r in store.records() {
                        vectors.entry(r.word.clone()).or_insert_with(|| r.to_f64());
                    }
                    let mut p = from_static(SourceKind::StaticCemb, store.dimension(), vectors, lists);
                    p.records = store.len();
                    Ok(p)
                } else {
                    Ok(from_store(&store, corpus.as_ref(), lists))
                }
            }
        }
    }

    pub fn tokens(&self, word: &str) -> &[Token] {
        self.tokens.get(word).map_or(&[], Vec::as_slice)
    }

    pub fn diffs(&self, word: &str) -> &[Vec<f64>] {
        self.diffs.get(word).map_or(&[], Vec::as_slice)
    }

    /// Whether occurrences can be screened for definitional co-occurrence.
    pub fn can_filter(&self) -> bool {
        self.gendered.is_some()
    }

    /// False for tokens whose sentence also holds a definitional word.
    pub fn survives_filter(&self, t: &Token) -> bool {
        self.gendered
            .as_ref()
            .is_none_or(|g| !g.contains(&t.sentence_id))
    }

    /// Vectors available for the random baseline spectrum.
    pub fn pool(&self) -> &[Vec<f64>] {
        &self.pool
    }

    /// Words of each list without any embedded occurrence, in list order.
    pub fn missing(&self, lists: &Lists) -> BTreeMap<String, Vec<String>> {
        let mut out = BTreeMap::new();
        let def: Vec<String> = lists
            .definitional_words()
            .into_iter()
            .filter(|w| self.diffs(w).is_empty())
            .map(String::from)
            .collect();
        if !def.is_empty() {
            out.insert(DEFINITIONAL.to_string(), def);
        }
        for list in lists.word_lists() {
            let m: Vec<String> = list
                .words()
                .filter(|w| self.tokens(w).is_empty())
                .map(String::from)
                .collect();
            if !m.is_empty() {
                out.insert(list.name().to_string(), m);
            }
        }
        out
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn from_provider<P: EmbeddingProvider>(
    provider: &P,
    corpus: &Corpus,
    lists: &Lists,
    cap: usize,
    seed: u64,
) -> Result<Prepared> {
    let pair_of = lists.pair_of();
    let mut words: Vec<&str> = lists.definitional_words();
    let mut seen: BTreeSet<&str> = words.iter().copied().collect();
    for list in lists.word_lists() {
        words.extend(list.words().filter(|w| seen.insert(w)));
    }
    let index = index_occurrences(corpus, words.iter().copied());
    let mut tokens = BTreeMap::new();
    let mut diffs = BTreeMap::new();
    let mut pool = Vec::new();
    for word in words {
        let mut rng = child_rng(seed, &format!("extract:{word}"), 0);
        let sample = sample_occurrences(&index, word, cap, &mut rng)?;
        let mut toks = Vec::with_capacity(sample.len());
        let mut word_diffs = Vec::new();
        for occ in sample {
            let sentence = &corpus.sentences()[occ.sentence_id];
            let v = match provider.embed(sentence, occ.token_index) {
                Ok(v) => v,
                Err(CoreError::MissingWord(_)) => break,
                Err(e) => return Err(e.into()),
            };
            if let Some(pair) = pair_of.get(word) {
                let swapped = swap_pair(corpus, &occ, pair)?;
                match provider.embed(&swapped, occ.token_index) {
                    Ok(s) => word_diffs.push(sub(&v, &s)),
                    Err(CoreError::MissingWord(_)) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            pool.push(v.clone());
            toks.push(Token {
                sentence_id: occ.sentence_id as i64,
                token_index: occ.token_index as i32,
                vector: v,
            });
        }
        if !toks.is_empty() {
            tokens.insert(word.to_string(), toks);
        }
        if !word_diffs.is_empty() {
            diffs.insert(word.to_string(), word_diffs);
        }
    }
    let gendered_words: BTreeSet<&str> = pair_of.keys().copied().collect();
    let gendered = corpus
        .sentences()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.iter().any(|t| gendered_words.contains(t.as_str())))
        .map(|(i, _)| i as i64)
        .collect();
    Ok(Prepared {
        kind: SourceKind::Toy,
        dimension: provider.dimension(),
        records: pool.len(),
        tokens,
        diffs,
        gendered: Some(gendered),
        pool,
        unpaired: 0,
    })
}

fn from_static(
    kind: SourceKind,
    dimension: usize,
    vectors: BTreeMap<String, Vec<f64>>,
    lists: &Lists,
) -> Prepared {
    let token = |v: &Vec<f64>| Token {
        sentence_id: -1,
        token_index: -1,
        vector: v.clone(),
    };
    let mut tokens = BTreeMap::new();
    for word in lists.word_lists().flat_map(WordList::words).chain(lists.definitional_words()) {
        if let Some(v) = vectors.get(word) {
            tokens.insert(word.to_string(), vec![token(v)]);
        }
    }
    let mut diffs = BTreeMap::new();
    for (word, pair) in lists.pair_of() {
        let partner = pair.partner(word).expect("pair member");
        if let (Some(a), Some(b)) = (vectors.get(word), vectors.get(partner)) {
            diffs.insert(word.to_string(), vec![sub(a, b)]);
        }
    }
    Prepared {
        kind,
        dimension,
        records: vectors.len(),
        tokens,
        diffs,
        gendered: None,
        pool: vectors.into_values().collect(),
        unpaired: 0,
    }
}

fn from_store(store: &EmbeddingStore, corpus: Option<&Corpus>, lists: &Lists) -> Prepared {
    let pair_of = lists.pair_of();
    let mut swaps: HashMap<(i64, i32), &[f32]> = HashMap::new();
    let mut tokens: BTreeMap<String, Vec<Token>> = BTreeMap::new();
    let mut pool = Vec::new();
    for r in store.records() {
        if r.base_tag() == TAG_SWAP {
            swaps.entry((r.sentence_id, r.token_index)).or_insert(&r.values);
        } else {
            let v = r.to_f64();
            pool.push(v.clone());
            tokens.entry(r.word.clone()).or_default().push(Token {
                sentence_id: r.sentence_id,
                token_index: r.token_index,
                vector: v,
            });
        }
    }
    for toks in tokens.values_mut() {
        toks.sort_by_key(|t| (t.sentence_id, t.token_index));
        toks.dedup_by_key(|t| (t.sentence_id, t.token_index));
    }
    let mut diffs = BTreeMap::new();
    let mut unpaired = 0;
    for word in pair_of.keys() {
        let mut d = Vec::new();
        for t in tokens.get(*word).map_or(&[][..], Vec::as_slice) {
            match swaps.get(&(t.sentence_id, t.token_index)) {
                Some(s) => {
                    let s: Vec<f64> = s.iter().map(|&x| f64::from(x)).collect();
                    d.push(sub(&t.vector, &s));
                }
                None => unpaired += 1,
            }
        }
        if !d.is_empty() {
            diffs.insert(word.to_string(), d);
        }
    }
    if unpaired > 0 {
        log::warn!("{unpaired} definitional records have no `swap` twin and were skipped");
    }
    let gendered = corpus.map(|c| {
        c.sentences()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.iter().any(|t| pair_of.contains_key(t.as_str())))
            .map(|(i, _)| i as i64)
            .collect()
    });
    Prepared {
        kind: SourceKind::ContextualCemb,
        dimension: store.dimension(),
        records: store.len(),
        tokens,
        diffs,
        gendered,
        pool,
        unpaired,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctxbias_core::embformat::{ContextualVector, StaticTable};

    fn lists() -> Lists {
        Lists {
            pairs: vec![DefinitionalPair::new("she", "he").unwrap()],
            professions: Some(WordList::from_words("professions", ["nurse", "pilot"]).unwrap()),
            ..Lists::default()
        }
    }

    fn table() -> StaticTable {
        let mut t = StaticTable::new(2).unwrap();
        t.insert("she", vec![-1.0, 0.0]).unwrap();
        t.insert("he", vec![1.0, 0.0]).unwrap();
        t.insert("nurse", vec![0.0, 1.0]).unwrap();
        t.insert("is", vec![0.0, 0.5]).unwrap();
        t
    }

    #[test]
    fn toy_source_diffs_and_filter() {
        let corpus = Corpus::from_text("she is a nurse\nthe nurse is here\nhe is", true, "c");
        let p = from_provider(&ToyContextual::new(table()), &corpus, &lists(), 100, 1).unwrap();
        assert_eq!(p.tokens("nurse").len(), 2);
        let she = p.diffs("she");
        assert_eq!(she.len(), 1);
        // the context is unchanged by the swap, so only the own vector differs
        assert_eq!(she[0], vec![-1.0, 0.0]);
        let kept: Vec<i64> = p
            .tokens("nurse")
            .iter()
            .filter(|t| p.survives_filter(t))
            .map(|t| t.sentence_id)
            .collect();
        assert_eq!(kept, vec![1]);
        let missing = p.missing(&lists());
        assert_eq!(missing["professions"], vec!["pilot"]);
        assert!(!missing.contains_key(DEFINITIONAL));
    }

    #[test]
    fn static_source_pairs_both_ways() {
        let vectors = table().iter().map(|(w, v)| (w.to_string(), v.to_vec())).collect();
        let p = from_static(SourceKind::Word2vec, 2, vectors, &lists());
        assert_eq!(p.diffs("she"), &[vec![-2.0, 0.0]]);
        assert_eq!(p.diffs("he"), &[vec![2.0, 0.0]]);
        assert!(!p.can_filter());
        assert_eq!(p.pool().len(), 4);
    }

    #[test]
    fn store_source_matches_swaps_by_position() {
        let rec = |word: &str, sid, tag: &str, v: [f32; 2]| ContextualVector {
            word: word.into(),
            sentence_id: sid,
            token_index: 0,
            tag: tag.into(),
            values: v.to_vec(),
        };
        let store = EmbeddingStore::with_records(
            2,
            vec![
                rec("she", 0, "orig", [1.0, 1.0]),
                rec("he", 0, "swap:top", [0.0, 1.0]),
                rec("he", 1, "orig", [3.0, 0.0]),
                rec("nurse", 2, "orig", [0.0, 2.0]),
            ],
        )
        .unwrap();
        let p = from_store(&store, None, &lists());
        assert_eq!(p.diffs("she"), &[vec![1.0, 0.0]]);
        assert!(p.diffs("he").is_empty());
        assert_eq!(p.unpaired, 1);
        assert_eq!(p.pool().len(), 3);
        assert!(p.survives_filter(&p.tokens("nurse")[0]));
    }
}
