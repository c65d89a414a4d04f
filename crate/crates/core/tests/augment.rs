mod common;

use std::fs;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use common::StubServer;
use lenie_core::augment::{
    augment_contexts, build_prompt, generate_description, prompt_for, AugmentationStore, BackendKind, ChatBackend,
    LlmBackend, LlmBackendConfig, MockBackend, Prompt, PromptTemplate, StoreRecord, DEFAULT_TASK_INSTRUCTION,
    LLM_API_KEY_ENV,
};
use lenie_core::embedding::HashEncoder;
use lenie_core::sampler::{sample_triplets, SampledContext, SamplerConfig, SamplingStrategy};
use lenie_core::{Entity, Error, KnowledgeGraph, Relation, RetryPolicy, Triplet};
use serde_json::json;

fn context(node: usize, sentences: &[&str]) -> SampledContext {
    SampledContext {
        node,
        strategy: SamplingStrategy::Cluster,
        k_requested: 10,
        sentences: sentences.iter().map(|s| s.to_string()).collect(),
    }
}

#[test]
fn prompt_layout_example() {
    let t = PromptTemplate::default();
    let c = context(0, &["Avatar's director is James Cameron.", "Avatar's genre is Science Fiction."]);
    let p = build_prompt(&t, " Avatar ", Some("A 2009 film."), &c).unwrap();
    let expected = format!(
        "Facts about the entity from the knowledge graph:\n\
         Avatar's director is James Cameron. Avatar's genre is Science Fiction.\n\n\
         Existing description:\nA 2009 film.\n\n{DEFAULT_TASK_INSTRUCTION}"
    );
    assert_eq!(p.text, expected);
    assert_eq!(p.node_name, "Avatar");
    let digest = sha2::Digest::finalize(sha2::Digest::chain_update(sha2::Sha256::default(), expected.as_bytes()));
    assert_eq!(p.prompt_hash, hex::encode(digest));

    let blank = build_prompt(&t, "Avatar", Some("   "), &c).unwrap();
    assert_eq!(blank.description, "Avatar");
    assert!(matches!(build_prompt(&t, "  ", None, &c), Err(Error::Prompt(_))));
}

#[test]
fn prompt_drops_trailing_facts_to_fit() {
    let t = PromptTemplate {
        max_prompt_chars: DEFAULT_TASK_INSTRUCTION.len() + 260,
        ..PromptTemplate::default()
    };
    let facts: Vec<String> = (0..6).map(|i| format!("Fact number {i} is about {}.", "z".repeat(20))).collect();
    let refs: Vec<&str> = facts.iter().map(String::as_str).collect();
    let p = build_prompt(&t, "N", None, &context(0, &refs)).unwrap();
    assert!(p.text.chars().count() <= t.max_prompt_chars);
    assert!(p.dropped > 0 && p.dropped < 6);
    assert_eq!(p.sentences, facts[..6 - p.dropped]);
    // One more fact would not have fit.
    let one_more = build_prompt(
        &PromptTemplate {
            max_prompt_chars: usize::MAX,
            ..t.clone()
        },
        "N",
        None,
        &context(0, &refs[..7 - p.dropped]),
    )
    .unwrap();
    assert!(one_more.text.chars().count() > t.max_prompt_chars);
}

#[test]
fn mock_restates_the_prompt_inputs() {
    let t = PromptTemplate::default();
    let p = build_prompt(&t, "Gob", Some("A band."), &context(4, &["Gob's genre is punk."])).unwrap();
    assert_eq!(
        MockBackend.complete(&p).unwrap(),
        "Summary of Gob: A band. Known facts: Gob's genre is punk."
    );
    let d = generate_description(&MockBackend, &p).unwrap();
    assert_eq!((d.node, d.backend_id.as_str()), (4, "mock"));
    assert_eq!(d.prompt_hash, p.prompt_hash);
}

fn chat_config(url: &str) -> LlmBackendConfig {
    LlmBackendConfig {
        kind: BackendKind::ChatHttp,
        endpoint: Some(url.to_string()),
        model: Some("tiny".into()),
        temperature: 0.0,
        max_tokens: 64,
        retries: 2,
        max_inflight: 2,
    }
}

fn policy(retries: u32) -> RetryPolicy {
    RetryPolicy {
        retries,
        base_backoff: Duration::from_millis(5),
        timeout: Duration::from_secs(5),
    }
}

fn reply(text: &str) -> String {
    json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
}

fn sample_prompt() -> Prompt {
    build_prompt(&PromptTemplate::default(), "Gob", None, &context(1, &["Gob's genre is punk."])).unwrap()
}

#[test]
fn chat_backend_sends_the_prompt_and_reads_the_reply() {
    std::env::set_var(LLM_API_KEY_ENV, "llm-key");
    let server = StubServer::start(|_, _| (200, reply("  X  ")));
    let backend = ChatBackend::with_policy(&chat_config(&server.url), policy(0)).unwrap();
    let p = sample_prompt();
    let d = generate_description(&backend, &p).unwrap();
    assert_eq!(d.text, "X");
    assert_eq!(d.backend_id, "chat_http:tiny:t=0:max_tokens=64");
    let reqs = server.requests.lock().unwrap();
    assert_eq!(reqs.len(), 1);
    assert_eq!(reqs[0].path, "/v1/chat/completions");
    assert_eq!(reqs[0].authorization.as_deref(), Some("Bearer llm-key"));
    assert_eq!(reqs[0].body["model"], "tiny");
    assert_eq!(reqs[0].body["max_tokens"], 64);
    assert_eq!(reqs[0].body["messages"][0]["content"], p.text);
}

#[test]
fn chat_backend_retries_transient_errors() {
    let server = StubServer::start(|n, _| if n < 3 { (503, "{}".into()) } else { (200, reply("ok")) });
    let backend = ChatBackend::with_policy(&chat_config(&server.url), policy(2)).unwrap();
    assert_eq!(backend.complete(&sample_prompt()).unwrap(), "ok");
    assert_eq!(server.count(), 3);
}

#[test]
fn chat_backend_reports_status_after_exhausting_retries() {
    let server = StubServer::start(|_, _| (500, "{}".into()));
    let backend = ChatBackend::with_policy(&chat_config(&server.url), policy(2)).unwrap();
    match backend.complete(&sample_prompt()) {
        Err(Error::Backend { status, .. }) => assert_eq!(status, Some(500)),
        other => panic!("{other:?}"),
    }
    assert_eq!(server.count(), 3);

    let denied = StubServer::start(|_, _| (401, "{}".into()));
    let backend = ChatBackend::with_policy(&chat_config(&denied.url), policy(2)).unwrap();
    assert!(matches!(backend.complete(&sample_prompt()), Err(Error::Backend { status: Some(401), .. })));
    assert_eq!(denied.count(), 1);

    let malformed = StubServer::start(|_, _| (200, "{\"choices\": []}".into()));
    let backend = ChatBackend::with_policy(&chat_config(&malformed.url), policy(0)).unwrap();
    assert!(matches!(backend.complete(&sample_prompt()), Err(Error::Backend { status: None, .. })));
}

#[test]
fn backend_config_validation() {
    assert!(LlmBackendConfig::mock().validate().is_ok());
    let mut c = chat_config("http://x");
    c.model = None;
    assert!(matches!(c.validate(), Err(Error::Config(_))));
    let mut c = chat_config("http://x");
    c.max_inflight = 0;
    assert!(matches!(c.validate(), Err(Error::Config(_))));
    let c: LlmBackendConfig = serde_json::from_value(json!({"kind": "mock"})).unwrap();
    assert_eq!(c, LlmBackendConfig::mock());
    assert!(serde_json::from_value::<LlmBackendConfig>(json!({"kind": "mock", "colour": 1})).is_err());
}

fn kg(n: usize) -> KnowledgeGraph {
    let entities = (0..n)
        .map(|id| Entity {
            id,
            name: format!("Entity {id}"),
            description: (id % 3 != 0).then(|| format!("Entity {id} is a thing.")),
            raw_score: Some(id as f64),
        })
        .collect();
    let relations = vec![
        Relation { id: 0, name: "genre".into() },
        Relation { id: 1, name: "member_of".into() },
    ];
    let triplets = (0..n)
        .flat_map(|i| {
            [
                Triplet { head: i, relation: 0, tail: (i + 1) % n },
                Triplet { head: i, relation: 1, tail: (i * 7 + 3) % n },
            ]
        })
        .collect();
    KnowledgeGraph::new(entities, relations, triplets).unwrap()
}

fn contexts(kg: &KnowledgeGraph) -> Vec<SampledContext> {
    let enc = HashEncoder::new(16).unwrap();
    let cfg = SamplerConfig::new(SamplingStrategy::Cluster, 2, 5);
    (0..kg.num_entities()).map(|v| sample_triplets(kg, v, &enc, &cfg).unwrap()).collect()
}

/// Counts calls; answers with `text` unless `text` is "fail on odd".
struct Scripted {
    calls: AtomicUsize,
    text: &'static str,
}

impl LlmBackend for Scripted {
    fn backend_id(&self) -> String {
        "scripted".into()
    }
    fn complete(&self, prompt: &Prompt) -> lenie_core::Result<String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if self.text == "fail on odd" && prompt.node % 2 == 1 {
            return Err(Error::Backend {
                status: Some(500),
                message: "boom".into(),
            });
        }
        Ok(format!("{} #{}", self.text, prompt.node))
    }
}

fn scripted(text: &'static str) -> Scripted {
    Scripted {
        calls: AtomicUsize::new(0),
        text,
    }
}

#[test]
fn interrupted_runs_resume_without_regenerating() {
    let g = kg(10);
    let ctx = contexts(&g);
    let t = PromptTemplate::default();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("augment.jsonl");

    let first = scripted("desc");
    let mut store = AugmentationStore::open(&path).unwrap();
    let out = augment_contexts(&g, &ctx[..3], &t, &first, 2, &mut store).unwrap();
    assert_eq!((out.generated, out.skipped), (3, 0));
    drop(store);

    let second = scripted("desc");
    let mut store = AugmentationStore::open(&path).unwrap();
    assert_eq!(store.records().len(), 3);
    let out = augment_contexts(&g, &ctx, &t, &second, 4, &mut store).unwrap();
    assert_eq!((out.generated, out.skipped), (7, 3));
    assert_eq!(second.calls.load(Ordering::SeqCst), 7);

    let nodes: Vec<usize> = store.records().iter().map(|r| r.node).collect();
    assert_eq!(nodes, (0..10).collect::<Vec<_>>());
    for c in &ctx {
        let p = prompt_for(&g, &t, c).unwrap();
        assert_eq!(store.lookup(c.node, &p.prompt_hash, "scripted"), Some(format!("desc #{}", c.node).as_str()));
    }

    // A fresh single-pass run writes the same bytes.
    let whole = dir.path().join("whole.jsonl");
    let mut store = AugmentationStore::open(&whole).unwrap();
    augment_contexts(&g, &ctx, &t, &scripted("desc"), 3, &mut store).unwrap();
    assert_eq!(fs::read(&whole).unwrap(), fs::read(&path).unwrap());
}

#[test]
fn empty_generations_fall_back_to_the_description() {
    let g = kg(6);
    let ctx = contexts(&g);
    let dir = tempfile::tempdir().unwrap();
    let mut store = AugmentationStore::open(dir.path().join("a.jsonl")).unwrap();

    struct Silent;
    impl LlmBackend for Silent {
        fn backend_id(&self) -> String {
            "silent".into()
        }
        fn complete(&self, _: &Prompt) -> lenie_core::Result<String> {
            Ok(" \n ".into())
        }
    }
    let out = augment_contexts(&g, &ctx, &PromptTemplate::default(), &Silent, 2, &mut store).unwrap();
    assert_eq!((out.generated, out.fallbacks), (0, 6));
    let texts = store.texts("silent");
    assert_eq!(texts[&0], "Entity 0");
    assert_eq!(texts[&1], "Entity 1 is a thing.");
}

#[test]
fn failures_are_counted_and_retried_next_time() {
    let g = kg(8);
    let ctx = contexts(&g);
    let t = PromptTemplate::default();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.jsonl");
    let mut store = AugmentationStore::open(&path).unwrap();
    let flaky = scripted("fail on odd");
    let out = augment_contexts(&g, &ctx, &t, &flaky, 3, &mut store).unwrap();
    assert_eq!(out.generated, 4);
    assert_eq!(out.failures.iter().map(|f| f.0).collect::<Vec<_>>(), vec![1, 3, 5, 7]);
    assert_eq!(store.records().len(), 4);

    let again = Scripted {
        calls: AtomicUsize::new(0),
        text: "fail on odd",
    };
    // Same backend id, still failing: the four missing nodes are attempted again.
    let out = augment_contexts(&g, &ctx, &t, &again, 3, &mut store).unwrap();
    assert_eq!((out.skipped, out.failures.len()), (4, 4));
    assert_eq!(again.calls.load(Ordering::SeqCst), 4);
}

#[test]
fn store_rejects_corrupt_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    let good = serde_json::to_string(&StoreRecord {
        node: 1,
        prompt_hash: "h".into(),
        backend: "mock".into(),
        text: "t".into(),
    })
    .unwrap();
    fs::write(&path, format!("{good}\n{{not json\n")).unwrap();
    match AugmentationStore::open(&path) {
        Err(Error::Format(msg)) => assert!(msg.contains(":2:"), "{msg}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn mock_augmentation_is_deterministic() {
    let g = kg(12);
    let ctx = contexts(&g);
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, inflight: usize| {
        let path = dir.path().join(name);
        let mut store = AugmentationStore::open(&path).unwrap();
        augment_contexts(&g, &ctx, &PromptTemplate::default(), &MockBackend, inflight, &mut store).unwrap();
        fs::read(path).unwrap()
    };
    let a = run("a.jsonl", 1);
    assert_eq!(a, run("b.jsonl", 1));
    assert_eq!(a, run("c.jsonl", 5));
}
