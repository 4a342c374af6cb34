//! Lemma index and concordance pages checked against brute-force scans of
//! generated ground truth.

mod common;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use readforge_core::{
    band_for_count, build_all_concordances, build_index, extend_index, BandThresholds, LemmaIndex, ReadingHistory,
};

const CORPORA: u64 = 100;

fn history_of(corpus: &[common::TruthText]) -> ReadingHistory {
    ReadingHistory::new(corpus.iter().map(|t| t.text_id.clone())).unwrap()
}

#[test]
fn counts_match_brute_force() {
    for seed in 0..CORPORA {
        let mut rng = common::seeded(seed);
        let corpus = common::random_corpus(&mut rng);
        let texts = common::parse_corpus(&corpus, &mut rng);
        let index = build_index(&history_of(&corpus), &texts).unwrap();

        assert_eq!(index.counts, common::brute_counts(&corpus), "seed {seed}");
        assert!(index.check_consistency());
        let words: usize = corpus.iter().map(|t| t.word_count()).sum();
        assert_eq!(index.total(), words);
    }
}

#[test]
fn concordances_match_brute_force() {
    for seed in 0..CORPORA {
        let mut rng = common::seeded(seed);
        let corpus = common::random_corpus(&mut rng);
        let texts = common::parse_corpus(&corpus, &mut rng);
        let history = history_of(&corpus);
        let index = build_index(&history, &texts).unwrap();
        let pages = build_all_concordances(&index, &history, &texts, 10).unwrap();
        assert_eq!(pages.keys().collect::<Vec<_>>(), index.counts.keys().collect::<Vec<_>>());

        for (lemma, page) in &pages {
            let brute = common::brute_segments(&corpus, lemma);
            assert_eq!(page.total_segment_count, brute.len());
            assert_eq!(page.entries.len(), brute.len().min(10));
            let got: Vec<_> = page
                .entries
                .iter()
                .map(|e| (e.text_id.clone(), e.segment_index, e.highlight_token_indices.clone()))
                .collect();
            assert_eq!(got, brute[..brute.len().min(10)], "seed {seed} lemma {lemma}");
            for e in &page.entries {
                let seg = &texts[&e.text_id].segments[e.segment_index];
                for &i in &e.highlight_token_indices {
                    assert!(seg.tokens[i].is_word() && seg.tokens[i].lemma == *lemma);
                }
            }
        }
    }
}

#[test]
fn incremental_equals_batch() {
    for seed in 0..CORPORA {
        let mut rng = common::seeded(seed);
        let corpus = common::random_corpus(&mut rng);
        let texts = common::parse_corpus(&corpus, &mut rng);

        let mut index = LemmaIndex::default();
        let mut history = ReadingHistory::default();
        for t in &corpus {
            let previous = index.clone();
            (index, history) = extend_index(&index, &history, &texts[&t.text_id]).unwrap();
            let batch = build_index(&history, &texts).unwrap();
            assert_eq!(index, batch, "seed {seed}");

            // Counts and bands never decrease as the history grows.
            for (lemma, &before) in &previous.counts {
                let after = index.counts[lemma];
                assert!(after >= before);
                let t = BandThresholds::default();
                assert!(band_for_count(after, &t).unwrap() >= band_for_count(before, &t).unwrap());
            }
        }
    }
}

#[test]
fn permutation_changes_only_occurrence_order() {
    for seed in 0..CORPORA {
        let mut rng = common::seeded(seed);
        let corpus = common::random_corpus(&mut rng);
        let texts = common::parse_corpus(&corpus, &mut rng);
        let original = build_index(&history_of(&corpus), &texts).unwrap();

        let mut shuffled = corpus.clone();
        shuffled.shuffle(&mut rng);
        let permuted = build_index(&history_of(&shuffled), &texts).unwrap();

        assert_eq!(original.counts, permuted.counts);
        for (lemma, occ) in &original.occurrences {
            let mut a = occ.clone();
            let mut b = permuted.occurrences[lemma].clone();
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn new_text_keeps_existing_entry_order() {
    for seed in 0..CORPORA {
        let mut rng = common::seeded(seed);
        let corpus = common::random_corpus(&mut rng);
        if corpus.len() < 2 {
            continue;
        }
        let texts = common::parse_corpus(&corpus, &mut rng);
        let (head, _) = corpus.split_at(corpus.len() - 1);
        let short = history_of(head);
        let full = history_of(&corpus);
        let before = build_all_concordances(&build_index(&short, &texts).unwrap(), &short, &texts, 10).unwrap();
        let after = build_all_concordances(&build_index(&full, &texts).unwrap(), &full, &texts, 10).unwrap();

        for (lemma, page) in &before {
            let keys = |p: &readforge_core::ConcordancePage| -> Vec<(String, usize)> {
                p.entries.iter().map(|e| (e.text_id.clone(), e.segment_index)).collect()
            };
            let old = keys(page);
            let new = keys(&after[lemma]);
            // Earliest exposures stay first; new ones can only append.
            let kept: Vec<_> = new.iter().filter(|k| old.contains(k)).cloned().collect();
            assert_eq!(kept, old[..kept.len()]);
            assert_eq!(&new[..old.len().min(new.len())], &old[..old.len().min(new.len())]);
        }
    }
}

#[test]
fn fixed_examples() {
    let texts: BTreeMap<_, _> = [("t1", "runs#run# run#run#"), ("t2", "ran#run#")]
        .into_iter()
        .map(|(id, src)| (id.to_string(), readforge_core::parse_text(src, id, id, "en", None).unwrap().0))
        .collect();
    let h = ReadingHistory::new(["t1", "t2"]).unwrap();
    let index = build_index(&h, &texts).unwrap();
    assert_eq!(index.counts, BTreeMap::from([("run".to_string(), 3)]));
}
