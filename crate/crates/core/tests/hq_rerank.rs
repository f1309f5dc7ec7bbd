//! Entailment re-ranking on a question whose most similar evidence sentence
//! is not the one that best supports the answer.

use qlfact_core::evidence::{extract_hq_support, retrieve_hq_evidence, EvidenceMatch, HqIndex, HqPost, HqVariant};
use qlfact_core::retrieval::{generate_query, whole_text_query, QueryOrigin};
use qlfact_core::textproc::{build_index, tokenize};
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    question: String,
    answer: String,
    correct_post: String,
    posts: Vec<HqPost>,
}

fn case() -> Case {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/hq_rerank.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run(case: &Case, variant: HqVariant, k: usize) -> Vec<EvidenceMatch> {
    let q = tokenize(&case.question);
    let a = tokenize(&case.answer);
    let mut docs = vec![q.clone(), a.clone()];
    docs.extend(case.posts.iter().map(|p| tokenize(&p.text)));
    let index = build_index(&docs).unwrap();
    let query = if variant.generated_query() {
        generate_query(&[&q, &a], QueryOrigin::QaPair, &index).unwrap()
    } else {
        whole_text_query(&a, QueryOrigin::Answer).unwrap()
    };
    let hq = HqIndex::build(&case.posts).unwrap();
    let mut m = retrieve_hq_evidence(&query.words(), &a, &hq, k);
    if !variant.reranks() {
        m.sort_by_key(|m| m.rank_by_similarity);
    }
    m
}

#[test]
fn reranking_puts_the_supporting_sentence_first() {
    let c = case();
    for k in [5, 11] {
        let s1 = run(&c, HqVariant::S1, k);
        assert_eq!(s1[0].post_id, c.correct_post);
        assert_eq!(s1[0].rank_by_entailment, 1);
        assert!(s1[0].rank_by_similarity > 1);

        let s4 = run(&c, HqVariant::S4, k);
        assert_ne!(s4[0].post_id, c.correct_post);
        assert!(s4[0].retrieval_cosine > s4.iter().find(|m| m.post_id == c.correct_post).unwrap().retrieval_cosine);
    }
}

#[test]
fn similarity_winner_has_lower_entailment() {
    let c = case();
    let m = run(&c, HqVariant::S2, 11);
    let top = &m[0];
    let correct = m.iter().find(|m| m.post_id == c.correct_post).unwrap();
    assert!(top.retrieval_cosine > correct.retrieval_cosine);
    assert!(top.entailment_score < correct.entailment_score);
}

#[test]
fn variants_give_different_features() {
    let c = case();
    let f1 = extract_hq_support(&run(&c, HqVariant::S1, 5), true);
    let f4 = extract_hq_support(&run(&c, HqVariant::S4, 5), false);
    assert_eq!(f1.values().len(), 10);
    assert_ne!(f1.values()[0], f4.values()[0]);
}

#[test]
fn k_bounds_the_number_of_matches() {
    let c = case();
    assert_eq!(run(&c, HqVariant::S1, 3).len(), 3);
    let r1: Vec<usize> = run(&c, HqVariant::S1, 11).iter().map(|m| m.rank_by_entailment).collect();
    assert_eq!(r1, (1..=r1.len()).collect::<Vec<_>>());
}
