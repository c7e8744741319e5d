use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use apr_core::ekdb::{ingest_posts, LsiIndex, PostKind};
use apr_core::{
    evaluate, recommend, AprError, EvalCase, KnowledgeBase, PipelineConfig, RequirementsSpec,
    SentimentLabel, StopWords,
};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn spec(name: &str) -> RequirementsSpec {
    RequirementsSpec::load(fixtures().join("specs").join(name)).unwrap()
}

fn knowledge_base() -> KnowledgeBase {
    let corpus = ingest_posts(
        fixtures().join("ekdb_posts.xml"),
        &apr_core::ekdb::default_tag_filter(),
    )
    .unwrap();
    let index = LsiIndex::build(&corpus.posts, 100, &StopWords::bundled()).unwrap();
    KnowledgeBase::bundled(Some(index))
}

fn filter(tags: &[&str]) -> BTreeSet<String> {
    tags.iter().map(|t| t.to_string()).collect()
}

#[test]
fn small_dump_filters_to_twelve_documents() {
    let path = fixtures().join("posts_small.xml");
    let got = ingest_posts(&path, &filter(&["model-view-controller", "architecture"])).unwrap();
    let questions = got.posts.iter().filter(|p| p.kind == PostKind::Question).count();
    assert_eq!((questions, got.posts.len()), (3, 12));
    assert_eq!(got.skipped_rows, 0);
    for answer in got.posts.iter().filter(|p| p.kind == PostKind::Answer) {
        let parent = got.posts.iter().find(|p| Some(p.id) == answer.parent_id).unwrap();
        assert_eq!(answer.tags, parent.tags);
    }
    // Markup and code are gone.
    let with_code = got.posts.iter().find(|p| p.id == 4).unwrap();
    assert!(!with_code.body.contains('<') && !with_code.body.contains("NotNull"));
    assert!(with_code.body.contains("validators & annotations"));
    // Same input, same corpus.
    let again = ingest_posts(&path, &filter(&["model-view-controller", "architecture"])).unwrap();
    assert_eq!(got, again);
    assert!(ingest_posts(&path, &filter(&["haskell"])).unwrap().posts.is_empty());
}

#[test]
fn small_corpus_index_properties() {
    let path = fixtures().join("posts_small.xml");
    let posts = ingest_posts(&path, &filter(&["model-view-controller", "architecture"]))
        .unwrap()
        .posts;
    let index = LsiIndex::build(&posts, 2, &StopWords::bundled()).unwrap();
    let s = index.singular_values();
    assert!(s[0] >= s[1] && s[1] >= 0.0);

    let full = LsiIndex::build(&posts, 12, &StopWords::bundled()).unwrap();
    let fourth = &full.documents()[3];
    let hits = full.query(&fourth.indexed_text(), 12, -1.0);
    assert_eq!(hits[0].post.id, fourth.id);
    assert!(full.query("zzzz qqqq", 5, -1.0).is_empty());
    assert!(full.query("model view controller", 2, -1.0).len() <= 2);
}

#[test]
fn single_document_rank_one() {
    let posts = ingest_posts(
        fixtures().join("posts_small.xml"),
        &filter(&["model-view-controller"]),
    )
    .unwrap()
    .posts;
    let one = &posts[..1];
    let index = LsiIndex::build(one, 1, &StopWords::bundled()).unwrap();
    let tfidf_norm = index
        .tfidf_column(0)
        .iter()
        .map(|(_, w)| w * w)
        .sum::<f64>()
        .sqrt();
    assert!((index.doc_norms()[0] - tfidf_norm).abs() < 1e-12);
}

#[test]
fn cms_recommends_mvc_with_positive_sentiment() {
    let kb = knowledge_base();
    let set = recommend(&spec("cms.json"), &kb, &PipelineConfig::default(), &BTreeMap::new())
        .unwrap();
    assert_eq!(set.recommendations.len(), 3);
    let top = &set.recommendations[0];
    assert_eq!(top.pattern_name, "MVC");
    assert!(top.sentiment_label.is_positive());
    assert_eq!(top.sentiment_label, SentimentLabel::StronglyPositive);
    assert!(top.evidence_count > 0);
    // Ranks increase, confidences do not.
    for (i, w) in set.recommendations.windows(2).enumerate() {
        assert_eq!(w[0].rank, i + 1);
        assert!(w[0].confidence >= w[1].confidence);
    }
    let max = set.confidences.iter().map(|(_, c)| c).fold(f64::MIN, f64::max);
    assert_eq!(set.confidences.get("MVC"), Some(max));
}

#[test]
fn shell_and_environment_tool_fixtures() {
    let kb = knowledge_base();
    let cfg = PipelineConfig::default();
    let shell = recommend(&spec("shell_emulator.json"), &kb, &cfg, &BTreeMap::new()).unwrap();
    assert_eq!(shell.recommendations[0].pattern_name, "Pipes-and-Filters");
    assert_eq!(
        shell.recommendations[0].sentiment_label,
        SentimentLabel::StronglyPositive
    );
    let env = recommend(&spec("environment_tool.json"), &kb, &cfg, &BTreeMap::new()).unwrap();
    assert_eq!(env.recommendations[0].pattern_name, "Microkernel");
    assert!(env.recommendations[0].sentiment_label.is_positive());
}

#[test]
fn disjoint_vocabulary_ties_alphabetically() {
    let kb = knowledge_base();
    let set = recommend(
        &spec("disjoint_vocabulary.json"),
        &kb,
        &PipelineConfig::default(),
        &BTreeMap::new(),
    )
    .unwrap();
    let names: Vec<&str> = set
        .recommendations
        .iter()
        .map(|r| r.pattern_name.as_str())
        .collect();
    assert_eq!(names, ["Blackboard", "Broker", "Layers"]);
    assert!(set.recommendations.iter().all(|r| r.confidence == 0.0));
}

#[test]
fn conflicting_nfrs_need_priorities() {
    let kb = knowledge_base();
    let cfg = PipelineConfig::default();
    let s = spec("cms_conflicting_nfrs.json");
    match recommend(&s, &kb, &cfg, &BTreeMap::new()) {
        Err(AprError::ResolutionRequired { pairs }) => {
            assert_eq!(pairs, vec![("performance".into(), "security".into())])
        }
        other => panic!("expected resolution error, got {other:?}"),
    }
    let priorities = BTreeMap::from([("performance".to_string(), 2), ("security".to_string(), 1)]);
    let set = recommend(&s, &kb, &cfg, &priorities).unwrap();
    assert_eq!(set.removed_nfrs, ["performance"]);
}

#[test]
fn missing_index_is_a_configuration_error() {
    let kb = KnowledgeBase::bundled(None);
    let err = recommend(&spec("cms.json"), &kb, &PipelineConfig::default(), &BTreeMap::new())
        .unwrap_err();
    assert!(matches!(err, AprError::Config(_)));
}

#[test]
fn snapshot_reproduces_the_set() {
    let kb = knowledge_base();
    let cfg = PipelineConfig {
        include_flow_term: true,
        alpha: 0.7,
        ..Default::default()
    };
    let s = spec("cms.json");
    let first = recommend(&s, &kb, &cfg, &BTreeMap::new()).unwrap();
    let replay = recommend(&s, &kb, &first.config, &BTreeMap::new()).unwrap();
    assert_eq!(first.to_machine_format(), replay.to_machine_format());
    let parsed: serde_json::Value = serde_json::from_str(&first.to_machine_format()).unwrap();
    assert_eq!(parsed["trace"]["patterns"].as_array().unwrap().len(), 8);
}

#[test]
fn top_limits_the_number_of_recommendations() {
    let kb = knowledge_base();
    let cfg = PipelineConfig {
        top: 1,
        ..Default::default()
    };
    let set = recommend(&spec("cms.json"), &kb, &cfg, &BTreeMap::new()).unwrap();
    assert_eq!(set.recommendations.len(), 1);
}

#[test]
fn evaluation_tallies_sum_to_case_count() {
    let kb = knowledge_base();
    let cases = EvalCase::load_dir(fixtures().join("cases")).unwrap();
    let report = evaluate(&cases, &kb, &PipelineConfig::default()).unwrap();
    let hits: usize = report.rows.iter().map(|r| r.expected_output).sum();
    assert_eq!(hits + report.misses, report.valid_cases);
    assert_eq!(report.valid_cases + report.invalid_cases, cases.len());
    for row in &report.rows {
        assert_eq!(
            row.positive_sentiment + row.neutral_sentiment + row.negative_sentiment,
            report.valid_cases
        );
    }
    assert!(evaluate(&[], &kb, &PipelineConfig::default()).is_err());
}

#[test]
fn invalid_case_is_reported_not_fatal() {
    let kb = knowledge_base();
    let mut cases = EvalCase::load_dir(fixtures().join("cases")).unwrap();
    let mut bad = cases[0].clone();
    bad.name = "broken".into();
    bad.spec.use_cases.clear();
    cases.push(bad);
    let report = evaluate(&cases, &kb, &PipelineConfig::default()).unwrap();
    assert_eq!(report.invalid_cases, 1);
    let broken = report.cases.iter().find(|c| c.name == "broken").unwrap();
    assert!(broken.error.as_deref().unwrap().contains("use_cases"));
}

#[test]
fn example_config_is_the_default() {
    let cfg = PipelineConfig::load(fixtures().join("apr.toml")).unwrap();
    assert_eq!(cfg, PipelineConfig::default());
}
