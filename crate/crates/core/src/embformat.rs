//! The CEMB1 embedding interchange format and embedding providers.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! header   "CEMB" | version u32 = 1 | dimension u32 | record count u64
//! record   word len u16 | word utf-8 | sentence id i64 | token index i32
//!          | tag len u8 | tag utf-8 | dimension x f32
//! ```
//!
//! Context-free records use `-1` for both the sentence id and token index.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"CEMB";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic {found:?}, expected \"CEMB\"")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("file truncated in header")]
    TruncatedHeader,
    #[error("file truncated in record {record}")]
    Truncated { record: u64 },
    #[error("record {record}: {what} is not valid UTF-8")]
    InvalidUtf8 { record: u64, what: &'static str },
    #[error("record {record}: component {component} is not finite")]
    NonFinite { record: u64, component: usize },
    #[error("{extra} trailing bytes after {count} records")]
    TrailingBytes { count: u64, extra: usize },
    #[error("record {record}: dimension {found}, store dimension {expected}")]
    Dimension {
        record: u64,
        expected: usize,
        found: usize,
    },
    #[error("record {record}: {what} is {len} bytes, limit {limit}")]
    FieldTooLong {
        record: u64,
        what: &'static str,
        len: usize,
        limit: usize,
    },
}

/// One embedding bound to its context.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualVector {
    pub word: String,
    /// `-1` for context-free vectors.
    pub sentence_id: i64,
    /// `-1` for context-free vectors.
    pub token_index: i32,
    pub tag: String,
    pub values: Vec<f32>,
}

impl ContextualVector {
    pub fn is_static(&self) -> bool {
        self.sentence_id < 0
    }

    /// The tag up to its first `:`; exporters may append a suffix such as
    /// the layer policy.
    pub fn base_tag(&self) -> &str {
        base_tag(&self.tag)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| f64::from(v)).collect()
    }
}

pub fn base_tag(tag: &str) -> &str {
    tag.split(':').next().unwrap_or(tag)
}

/// An in-memory collection of records with a uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dimension: usize,
    records: Vec<ContextualVector>,
    by_word: BTreeMap<String, Vec<usize>>,
    by_position: BTreeMap<(i64, i32), Vec<usize>>,
}

impl EmbeddingStore {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(EmbeddingStore {
            dimension,
            records: Vec::new(),
            by_word: BTreeMap::new(),
            by_position: BTreeMap::new(),
        })
    }

    pub fn with_records(dimension: usize, records: Vec<ContextualVector>) -> Result<Self> {
        let mut store = Self::new(dimension)?;
        for r in records {
            store.push(r)?;
        }
        Ok(store)
    }

    pub fn push(&mut self, record: ContextualVector) -> Result<()> {
        if record.values.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: record.values.len(),
            });
        }
        if record.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: self.records.len(),
            });
        }
        let i = self.records.len();
        self.by_word.entry(record.word.clone()).or_default().push(i);
        self.by_position
            .entry((record.sentence_id, record.token_index))
            .or_default()
            .push(i);
        self.records.push(record);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn records(&self) -> &[ContextualVector] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn by_word(&self, word: &str) -> impl Iterator<Item = &ContextualVector> {
        self.by_word
            .get(word)
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
    }

    /// Records of `word` whose base tag equals `tag`.
    pub fn by_word_tag<'a>(
        &'a self,
        word: &'a str,
        tag: &'a str,
    ) -> impl Iterator<Item = &'a ContextualVector> + 'a {
        self.by_word(word).filter(move |r| r.base_tag() == tag)
    }

    pub fn by_position(&self, sentence_id: i64, token_index: i32) -> impl Iterator<Item = &ContextualVector> {
        self.by_position
            .get(&(sentence_id, token_index))
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.by_word.keys().map(String::as_str)
    }

    /// True when every record is context-free.
    pub fn is_static(&self) -> bool {
        self.records.iter().all(ContextualVector::is_static)
    }
}

/// Exact byte length of the CEMB1 encoding of `store`.
pub fn encoded_len(store: &EmbeddingStore) -> usize {
    HEADER_LEN
        + store
            .records
            .iter()
            .map(|r| 2 + r.word.len() + 8 + 4 + 1 + r.tag.len() + 4 * store.dimension)
            .sum::<usize>()
}

pub fn encode(store: &EmbeddingStore) -> Result<Vec<u8>, FormatError> {
    let mut out = Vec::with_capacity(encoded_len(store));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(store.dimension as u32).to_le_bytes());
    out.extend_from_slice(&(store.records.len() as u64).to_le_bytes());
    for (i, r) in store.records.iter().enumerate() {
        let record = i as u64;
        if r.word.len() > u16::MAX as usize {
            return Err(FormatError::FieldTooLong {
                record,
                what: "word",
                len: r.word.len(),
                limit: u16::MAX as usize,
            });
        }
        if r.tag.len() > u8::MAX as usize {
            return Err(FormatError::FieldTooLong {
                record,
                what: "tag",
                len: r.tag.len(),
                limit: u8::MAX as usize,
            });
        }
        out.extend_from_slice(&(r.word.len() as u16).to_le_bytes());
        out.extend_from_slice(r.word.as_bytes());
        out.extend_from_slice(&r.sentence_id.to_le_bytes());
        out.extend_from_slice(&r.token_index.to_le_bytes());
        out.push(r.tag.len() as u8);
        out.extend_from_slice(r.tag.as_bytes());
        for v in &r.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    record: u64,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or(FormatError::Truncated { record: self.record })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], FormatError> {
        let mut a = [0u8; N];
        a.copy_from_slice(self.take(N)?);
        Ok(a)
    }

    fn text(&mut self, n: usize, what: &'static str) -> Result<String, FormatError> {
        let record = self.record;
        let bytes = self.take(n)?;
        core::str::from_utf8(bytes)
            .map(ToString::to_string)
            .map_err(|_| FormatError::InvalidUtf8 { record, what })
    }
}

/// Parses and fully validates a CEMB1 byte buffer.
pub fn decode(bytes: &[u8]) -> Result<EmbeddingStore, FormatError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            let mut found = [0u8; 4];
            found.copy_from_slice(&bytes[..4]);
            return Err(FormatError::BadMagic { found });
        }
        return Err(FormatError::TruncatedHeader);
    }
    let mut found = [0u8; 4];
    found.copy_from_slice(&bytes[..4]);
    if found != MAGIC {
        return Err(FormatError::BadMagic { found });
    }
    let le32 = |at: usize| u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]]);
    let version = le32(4);
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let dimension = le32(8) as usize;
    if dimension == 0 {
        return Err(FormatError::ZeroDimension);
    }
    let mut count_bytes = [0u8; 8];
    count_bytes.copy_from_slice(&bytes[12..20]);
    let count = u64::from_le_bytes(count_bytes);

    let mut rd = Reader {
        buf: bytes,
        pos: HEADER_LEN,
        record: 0,
    };
    // every record needs at least 15 bytes plus its vector
    let min_record = 15 + 4 * dimension as u64;
    let capacity = count.min((bytes.len() as u64) / min_record) as usize;
    let mut records = Vec::with_capacity(capacity);
    for record in 0..count {
        rd.record = record;
        let word_len = u16::from_le_bytes(rd.array()?) as usize;
        let word = rd.text(word_len, "word")?;
        let sentence_id = i64::from_le_bytes(rd.array()?);
        let token_index = i32::from_le_bytes(rd.array()?);
        let tag_len = rd.array::<1>()?[0] as usize;
        let tag = rd.text(tag_len, "tag")?;
        let raw = rd.take(4 * dimension)?;
        let mut values = vec![0f32; dimension];
        for (component, (v, chunk)) in values.iter_mut().zip(raw.chunks_exact(4)).enumerate() {
            *v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            if !v.is_finite() {
                return Err(FormatError::NonFinite { record, component });
            }
        }
        records.push(ContextualVector {
            word,
            sentence_id,
            token_index,
            tag,
            values,
        });
    }
    if rd.pos != bytes.len() {
        return Err(FormatError::TrailingBytes {
            count,
            extra: bytes.len() - rd.pos,
        });
    }
    let mut store = EmbeddingStore::new(dimension).map_err(|_| FormatError::ZeroDimension)?;
    for (i, r) in records.into_iter().enumerate() {
        store.push(r).map_err(|_| FormatError::Dimension {
            record: i as u64,
            expected: dimension,
            found: dimension,
        })?;
    }
    Ok(store)
}

/// Yields fixed-dimension vectors for words in context.
///
/// Implementations are deterministic: the same input always produces the
/// same vector.
pub trait EmbeddingProvider {
    fn dimension(&self) -> usize;

    /// Vector of `tokens[index]` in the context of `tokens`.
    fn embed(&self, tokens: &[String], index: usize) -> Result<Vec<f64>>;

    /// Context-free vector of a bare word.
    fn embed_word(&self, word: &str) -> Result<Vec<f64>>;
}

/// A context-free word-vector table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StaticTable {
    dimension: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl StaticTable {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(StaticTable {
            dimension,
            vectors: BTreeMap::new(),
        })
    }

    /// Inserts or replaces a vector, returning the previous one.
    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<Option<Vec<f64>>> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: self.vectors.len() });
        }
        Ok(self.vectors.insert(word.into(), vector))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Context-free store records, tagged `static`, in word order.
    pub fn to_store(&self) -> Result<EmbeddingStore> {
        let records = self
            .vectors
            .iter()
            .map(|(w, v)| ContextualVector {
                word: w.clone(),
                sentence_id: -1,
                token_index: -1,
                tag: "static".into(),
                values: v.iter().map(|&x| x as f32).collect(),
            })
            .collect();
        EmbeddingStore::with_records(self.dimension, records)
    }
}

impl EmbeddingProvider for StaticTable {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, tokens: &[String], index: usize) -> Result<Vec<f64>> {
        let word = tokens.get(index).ok_or(Error::BadOccurrence {
            sentence_id: 0,
            token_index: index,
        })?;
        self.embed_word(word)
    }

    fn embed_word(&self, word: &str) -> Result<Vec<f64>> {
        self.get(word)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| Error::MissingWord(word.to_string()))
    }
}

/// Mixes a word's static vector with the mean static vector of its window.
///
/// Returns `(1 - alpha) * v(word) + alpha * mean(v(t))` over the tokens within
/// `window` positions of `index`, excluding the target. Context tokens absent
/// from the table count as zero vectors. With no context tokens at all the
/// static vector is returned unchanged.
pub fn toy_contextual(
    table: &StaticTable,
    tokens: &[String],
    index: usize,
    alpha: f64,
    window: usize,
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(alloc::format!(
            "alpha {alpha} outside [0, 1]"
        )));
    }
    let word = tokens.get(index).ok_or(Error::BadOccurrence {
        sentence_id: 0,
        token_index: index,
    })?;
    let own = table
        .get(word)
        .ok_or_else(|| Error::MissingWord(word.clone()))?;
    let lo = index.saturating_sub(window);
    let hi = index.saturating_add(window).min(tokens.len() - 1);
    let mut mean = vec![0.0; table.dimension];
    let mut count = 0usize;
    for (i, t) in tokens.iter().enumerate().take(hi + 1).skip(lo) {
        if i == index {
            continue;
        }
        count += 1;
        if let Some(v) = table.get(t) {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
    }
    if count == 0 {
        return Ok(own.to_vec());
    }
    let inv = 1.0 / count as f64;
    Ok(own
        .iter()
        .zip(&mean)
        .map(|(v, m)| (1.0 - alpha) * v + alpha * m * inv)
        .collect())
}

/// The toy contextual embedder as a provider.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyContextual {
    pub table: StaticTable,
    pub alpha: f64,
    pub window: usize,
}

impl ToyContextual {
    pub const DEFAULT_ALPHA: f64 = 0.5;
    pub const DEFAULT_WINDOW: usize = 2;

    pub fn new(table: StaticTable) -> Self {
        ToyContextual {
            table,
            alpha: Self::DEFAULT_ALPHA,
            window: Self::DEFAULT_WINDOW,
        }
    }
}

impl EmbeddingProvider for ToyContextual {
    fn dimension(&self) -> usize {
        self.table.dimension
    }

    fn embed(&self, tokens: &[String], index: usize) -> Result<Vec<f64>> {
        toy_contextual(&self.table, tokens, index, self.alpha, self.window)
    }

    fn embed_word(&self, word: &str) -> Result<Vec<f64>> {
        self.table.embed_word(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(word: &str, sid: i64, tid: i32, tag: &str, values: Vec<f32>) -> ContextualVector {
        ContextualVector {
            word: word.into(),
            sentence_id: sid,
            token_index: tid,
            tag: tag.into(),
            values,
        }
    }

    fn strings(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    fn table() -> StaticTable {
        let mut t = StaticTable::new(2).unwrap();
        t.insert("queen", vec![1.0, 0.0]).unwrap();
        t.insert("king", vec![0.0, 1.0]).unwrap();
        t.insert("the", vec![0.5, 0.5]).unwrap();
        t
    }

    #[test]
    fn empty_store_encodes_header_only() {
        let store = EmbeddingStore::new(3).unwrap();
        let bytes = encode(&store).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(&bytes[..4], b"CEMB");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &[3, 0, 0, 0]);
        assert_eq!(&bytes[12..20], &[0; 8]);
        assert_eq!(decode(&bytes).unwrap(), store);
    }

    #[test]
    fn single_record_round_trip() {
        let store =
            EmbeddingStore::with_records(2, vec![rec("she", 4, 1, "orig", vec![1.0, -2.0])]).unwrap();
        let bytes = encode(&store).unwrap();
        assert_eq!(bytes.len(), encoded_len(&store));
        let back = decode(&bytes).unwrap();
        assert_eq!(back, store);
        assert_eq!(back.records()[0].values[1].to_bits(), (-2.0f32).to_bits());
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let store = EmbeddingStore::with_records(
            2,
            vec![
                rec("a", 0, 0, "orig", vec![1.0, 2.0]),
                rec("b", 0, 1, "orig", vec![3.0, 4.0]),
            ],
        )
        .unwrap();
        let mut bytes = encode(&store).unwrap();
        let good = bytes.clone();
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(FormatError::BadMagic { .. })));
        let cut = &good[..good.len() - 3];
        assert_eq!(decode(cut), Err(FormatError::Truncated { record: 1 }));
        assert_eq!(decode(&good[..10]), Err(FormatError::TruncatedHeader));
        let mut extra = good.clone();
        extra.push(0);
        assert!(matches!(decode(&extra), Err(FormatError::TrailingBytes { .. })));
    }

    #[test]
    fn rejects_nan_naming_record() {
        let store = EmbeddingStore::with_records(
            1,
            vec![rec("a", 0, 0, "t", vec![1.0]), rec("b", 0, 1, "t", vec![2.0])],
        )
        .unwrap();
        let mut bytes = encode(&store).unwrap();
        let n = bytes.len();
        bytes[n - 4..].copy_from_slice(&f32::NAN.to_le_bytes());
        assert_eq!(
            decode(&bytes),
            Err(FormatError::NonFinite {
                record: 1,
                component: 0
            })
        );
    }

    #[test]
    fn rejects_version_and_zero_dim() {
        let mut bytes = encode(&EmbeddingStore::new(1).unwrap()).unwrap();
        bytes[4] = 2;
        assert_eq!(decode(&bytes), Err(FormatError::UnsupportedVersion(2)));
        bytes[4] = 1;
        bytes[8] = 0;
        assert_eq!(decode(&bytes), Err(FormatError::ZeroDimension));
    }

    #[test]
    fn store_indexes() {
        let store = EmbeddingStore::with_records(
            1,
            vec![
                rec("she", 0, 0, "orig", vec![1.0]),
                rec("he", 0, 0, "swap:top", vec![2.0]),
                rec("she", 3, 2, "orig", vec![3.0]),
            ],
        )
        .unwrap();
        assert_eq!(store.by_word("she").count(), 2);
        assert_eq!(store.by_word_tag("he", "swap").count(), 1);
        assert_eq!(store.by_position(0, 0).count(), 2);
        assert!(!store.is_static());
        assert!(EmbeddingStore::with_records(2, vec![rec("x", 0, 0, "t", vec![1.0])]).is_err());
    }

    #[test]
    fn toy_alpha_zero_is_static() {
        let t = table();
        let v = toy_contextual(&t, &strings(&["the", "queen", "king"]), 1, 0.0, 2).unwrap();
        assert_eq!(v, vec![1.0, 0.0]);
    }

    #[test]
    fn toy_alpha_one_single_neighbor() {
        let t = table();
        let v = toy_contextual(&t, &strings(&["queen", "king", "the"]), 0, 1.0, 1).unwrap();
        assert_eq!(v, vec![0.0, 1.0]);
    }

    #[test]
    fn toy_half_mix_hand_computed() {
        let t = table();
        // target "king" at 2, window 2 covers "the" and "queen"
        // mean = ((0.5,0.5) + (1,0)) / 2 = (0.75, 0.25)
        // 0.5 * (0,1) + 0.5 * (0.75,0.25) = (0.375, 0.625)
        let v = toy_contextual(&t, &strings(&["the", "queen", "king"]), 2, 0.5, 2).unwrap();
        assert!((v[0] - 0.375).abs() < 1e-12);
        assert!((v[1] - 0.625).abs() < 1e-12);
    }

    #[test]
    fn toy_unknown_context_counts_as_zero() {
        let t = table();
        // mean over {"zzz"} is zero: 0.5 * (1,0)
        let v = toy_contextual(&t, &strings(&["queen", "zzz"]), 0, 0.5, 2).unwrap();
        assert_eq!(v, vec![0.5, 0.0]);
        assert!(matches!(
            toy_contextual(&t, &strings(&["zzz", "queen"]), 0, 0.5, 2),
            Err(Error::MissingWord(_))
        ));
        assert!(toy_contextual(&t, &strings(&["queen"]), 0, 1.5, 2).is_err());
    }

    #[test]
    fn toy_depends_on_context() {
        let p = ToyContextual::new(table());
        let a = p.embed(&strings(&["queen", "king"]), 0).unwrap();
        let b = p.embed(&strings(&["queen", "the"]), 0).unwrap();
        assert_ne!(a, b);
        assert_eq!(p.embed_word("queen").unwrap(), vec![1.0, 0.0]);
    }
}
