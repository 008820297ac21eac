use ctxbias_core::corpus::{
    filter_cooccurrence, index_occurrences, swap_pair, Corpus, DefinitionalPair, Occurrence,
};
use ctxbias_core::embformat::{decode, encode, encoded_len, ContextualVector, EmbeddingStore, HEADER_LEN};
use proptest::prelude::*;

fn record(d: usize) -> impl Strategy<Value = ContextualVector> {
    (
        "[a-zé]{1,12}",
        any::<i64>(),
        any::<i32>(),
        "(orig|swap|static)(:[a-z0-9]{1,5})?",
        prop::collection::vec(any::<f32>().prop_filter("finite", |x| x.is_finite()), d),
    )
        .prop_map(|(word, sentence_id, token_index, tag, values)| ContextualVector {
            word,
            sentence_id,
            token_index,
            tag,
            values,
        })
}

fn store() -> impl Strategy<Value = EmbeddingStore> {
    (1usize..10).prop_flat_map(|d| {
        prop::collection::vec(record(d), 0..20)
            .prop_map(move |r| EmbeddingStore::with_records(d, r).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cemb_round_trip_bit_exact(s in store()) {
        let bytes = encode(&s).unwrap();
        prop_assert_eq!(bytes.len(), encoded_len(&s));
        let back = decode(&bytes).unwrap();
        prop_assert_eq!(back.dimension(), s.dimension());
        for (a, b) in s.records().iter().zip(back.records()) {
            prop_assert_eq!(&a.word, &b.word);
            prop_assert_eq!(&a.tag, &b.tag);
            prop_assert_eq!((a.sentence_id, a.token_index), (b.sentence_id, b.token_index));
            let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a.values), bits(&b.values));
        }
        prop_assert_eq!(encode(&back).unwrap(), bytes);
    }

    #[test]
    fn any_truncation_is_rejected(s in store(), cut in any::<prop::sample::Index>()) {
        let bytes = encode(&s).unwrap();
        let n = cut.index(bytes.len());
        prop_assert!(decode(&bytes[..n]).is_err());
    }

    #[test]
    fn swap_is_an_involution(words in prop::collection::vec(prop::sample::select(vec!["she", "he", "nurse", "the", "a"]), 1..12)) {
        let text = words.join(" ");
        let corpus = Corpus::from_text(&text, true, "c");
        let pair = DefinitionalPair::new("she", "he").unwrap();
        for (i, w) in words.iter().enumerate() {
            if pair.gender_of(w).is_none() {
                continue;
            }
            let occ = Occurrence { sentence_id: 0, token_index: i, word: w.to_string() };
            let once = swap_pair(&corpus, &occ, &pair).unwrap();
            let again = Corpus::from_text(&once.join(" "), true, "c");
            let twice = swap_pair(&again, &Occurrence { word: once[i].clone(), ..occ }, &pair).unwrap();
            prop_assert_eq!(&twice, &corpus.sentences()[0]);
            let changed = once.iter().zip(&words).filter(|(a, b)| a != *b).count();
            prop_assert_eq!(changed, 1);
        }
    }

    #[test]
    fn filtered_index_is_a_clean_subset(
        lines in prop::collection::vec(prop::collection::vec(prop::sample::select(vec!["she", "he", "nurse", "pilot", "the"]), 1..6), 1..20),
    ) {
        let text: Vec<String> = lines.iter().map(|l| l.join(" ")).collect();
        let corpus = Corpus::from_text(&text.join("\n"), true, "c");
        let index = index_occurrences(&corpus, ["nurse", "pilot"]);
        let pairs = [DefinitionalPair::new("she", "he").unwrap()];
        let filtered = filter_cooccurrence(&corpus, &index, &pairs);
        for (word, occs) in filtered.iter() {
            let all = index.get(word).unwrap();
            for o in occs {
                prop_assert!(all.contains(o));
                let s = &corpus.sentences()[o.sentence_id];
                prop_assert!(!s.iter().any(|t| t == "she" || t == "he"));
            }
            let expected = all
                .iter()
                .filter(|o| !corpus.sentences()[o.sentence_id].iter().any(|t| t == "she" || t == "he"))
                .count();
            prop_assert_eq!(occs.len(), expected);
        }
    }
}

#[test]
fn thousand_record_store_size_formula() {
    let d = 7;
    let records: Vec<ContextualVector> = (0..1000)
        .map(|i| ContextualVector {
            word: format!("w{i}"),
            sentence_id: i,
            token_index: (i % 13) as i32,
            tag: "orig".into(),
            values: (0..d).map(|j| (i as f32) * 0.5 + j as f32).collect(),
        })
        .collect();
    let expected: usize = HEADER_LEN
        + records
            .iter()
            .map(|r| 2 + r.word.len() + 8 + 4 + 1 + r.tag.len() + 4 * d)
            .sum::<usize>();
    let s = EmbeddingStore::with_records(d, records).unwrap();
    let bytes = encode(&s).unwrap();
    assert_eq!(bytes.len(), expected);
    assert_eq!(decode(&bytes).unwrap(), s);
}
