use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use newsdesk_core::classifiers::{train_propaganda_model, train_section_model, StanceClassifier, StanceConfig, TrainConfig};
use newsdesk_core::ingest::{FeedSource, MemoryStore, ParagraphBlockExtractor, RawDocument};
use newsdesk_core::profiles::Claim;
use newsdesk_core::synthetic::{propaganda_corpus, section_corpus};
use newsdesk_core::{ClaimId, Language};
use newsdesk_pipeline::replay::{replay_documents, synthetic_documents};
use newsdesk_pipeline::topics::{self, RAW_DOCUMENTS};
use newsdesk_pipeline::{
    dead_letter_topic, step, Analyzers, DeadLetter, FaultPoint, FileQueue, FixtureFetcher, KillOnce, Pipeline, Queue,
    QueueOpener, StageContext, StageDescriptor, StagePolicy, StepOutcome,
};

fn analyzers() -> Analyzers {
    let sections: Vec<_> = section_corpus(40, 3).into_iter().map(|(t, s)| (t, Language::En, s)).collect();
    let (section, _) = train_section_model(&sections, 2, Language::En, &TrainConfig::default()).unwrap();
    let (propaganda, _) = train_propaganda_model(&propaganda_corpus(60, 4), &TrainConfig::default()).unwrap();
    Analyzers {
        section: Some(section),
        propaganda: Some(propaganda),
        stance: StanceClassifier::baseline(StanceConfig::default()),
        claims: vec![Claim {
            claim_id: ClaimId::from("c1"),
            text: "officials confirmed the report".into(),
            topic_id: "t1".into(),
        }],
        ..Analyzers::default()
    }
}

fn context(feeds: HashMap<String, FeedSource>, analyzers: Arc<Analyzers>) -> StageContext {
    StageContext {
        store: Arc::new(MemoryStore::new()),
        extractor: Arc::new(ParagraphBlockExtractor),
        feeds: Arc::new(feeds),
        fetcher: Arc::new(FixtureFetcher::new([])),
        analyzers,
        clock: Arc::new(|| Utc.with_ymd_and_hms(2024, 4, 1, 0, 0, 0).unwrap()),
    }
}

fn opener(dir: &std::path::Path) -> QueueOpener {
    let dir = dir.to_owned();
    Arc::new(move || Ok(Arc::new(FileQueue::open(&dir)?) as Arc<dyn Queue>))
}

#[test]
fn panicking_handler_is_retried_then_dead_lettered() {
    let dir = tempfile::tempdir().unwrap();
    let q = FileQueue::open(dir.path()).unwrap();
    for t in ["in", "out"] {
        q.create_topic(t).unwrap();
    }
    q.create_topic(&dead_letter_topic("flaky")).unwrap();
    for p in [&b"ok"[..], b"boom", b"ok2"] {
        q.publish("in", p).unwrap();
    }
    let calls = Arc::new(AtomicUsize::new(0));
    let c = calls.clone();
    let desc = StageDescriptor {
        name: "flaky".into(),
        input: "in".into(),
        output: Some("out".into()),
        handler: Arc::new(move |p: &[u8]| {
            c.fetch_add(1, Ordering::Relaxed);
            if p == b"boom" {
                panic!("cannot handle boom");
            }
            Ok(vec![p.to_vec()])
        }),
        parallelism: 1,
    };
    let out = step(&q, &desc, &StagePolicy::default(), None).unwrap();
    assert_eq!(out, StepOutcome::Processed { messages: 3, dead_lettered: 1 });
    // 1 + 4 attempts + 1
    assert_eq!(calls.load(Ordering::Relaxed), 6);
    let outputs: Vec<_> = q.read("out", 0, 10).unwrap().into_iter().map(|m| m.payload).collect();
    assert_eq!(outputs, vec![b"ok".to_vec(), b"ok2".to_vec()]);
    let dead = q.read(&dead_letter_topic("flaky"), 0, 10).unwrap();
    let letter: DeadLetter = serde_json::from_slice(&dead[0].payload).unwrap();
    assert_eq!((letter.offset, letter.attempts, letter.payload.as_str()), (1, 4, "boom"));
    assert!(letter.error.contains("cannot handle boom"), "{}", letter.error);
    assert_eq!(q.committed("flaky", "in").unwrap(), 3);
    assert_eq!(step(&q, &desc, &StagePolicy::default(), None).unwrap(), StepOutcome::Idle);
}

#[test]
fn empty_topic_idles() {
    let dir = tempfile::tempdir().unwrap();
    let (_, feeds) = synthetic_documents(1, 1, 0, 0, 0);
    let ctx = context(feeds, Arc::new(Analyzers::default()));
    let stages = newsdesk_pipeline::article_stages(&ctx, &BTreeMap::new());
    let mut p = Pipeline::new(opener(dir.path()), stages, StagePolicy::default()).unwrap();
    let report = p.run_until_idle().unwrap();
    assert_eq!(report.messages, 0);
    assert!(p.lag().unwrap().iter().all(|(_, _, lag)| *lag == 0));
}

#[test]
fn parallel_stage_preserves_order() {
    let dir = tempfile::tempdir().unwrap();
    let q = FileQueue::open(dir.path()).unwrap();
    q.create_topic("in").unwrap();
    q.create_topic("out").unwrap();
    for i in 0..100u32 {
        q.publish("in", &i.to_le_bytes()).unwrap();
    }
    let desc = StageDescriptor {
        name: "double".into(),
        input: "in".into(),
        output: Some("out".into()),
        handler: Arc::new(|p: &[u8]| {
            let n = u32::from_le_bytes(p.try_into().unwrap());
            Ok(vec![(n * 2).to_le_bytes().to_vec()])
        }),
        parallelism: 4,
    };
    let policy = StagePolicy { batch_size: 64, ..Default::default() };
    while step(&q, &desc, &policy, None).unwrap() != StepOutcome::Idle {}
    let got: Vec<u32> = q
        .read("out", 0, 1000)
        .unwrap()
        .iter()
        .map(|m| u32::from_le_bytes(m.payload[..].try_into().unwrap()))
        .collect();
    assert_eq!(got, (0..100).map(|i| i * 2).collect::<Vec<_>>());
}

#[test]
fn double_delivery_stores_one_article() {
    let (docs, feeds) = synthetic_documents(1, 3, 0, 0, 7);
    let twice: Vec<RawDocument> = docs.iter().chain(docs.iter()).cloned().collect();
    let ctx = context(feeds, Arc::new(analyzers()));
    let dir = tempfile::tempdir().unwrap();
    let out = replay_documents(dir.path(), &twice, &ctx, StagePolicy::default(), None).unwrap();
    assert_eq!(out.articles, 3);
    assert_eq!(out.dead_letters, 0);
    for a in ctx.store.snapshot().unwrap() {
        assert!(a.section.is_some() && a.propaganda.is_some() && a.frame_distribution.is_some());
        assert_eq!(a.stances.len(), 1);
    }
}

/// Kills every stage once, each at a different point and step, and checks
/// that the store ends up byte-identical to a fault-free run.
#[test]
fn store_survives_a_kill_in_every_stage() {
    let (docs, feeds) = synthetic_documents(10, 100, 40, 20, 11);
    assert_eq!(docs.len(), 1060);
    let analyzers = Arc::new(analyzers());
    let policy = StagePolicy { batch_size: 25, ..Default::default() };

    let clean_ctx = context(feeds.clone(), analyzers.clone());
    let clean_dir = tempfile::tempdir().unwrap();
    let clean = replay_documents(clean_dir.path(), &docs, &clean_ctx, policy.clone(), None).unwrap();
    assert_eq!(clean.articles, 1000);
    assert_eq!(clean.dead_letters, 0);

    let points = [FaultPoint::AfterHandle, FaultPoint::MidPublish, FaultPoint::BeforeCommit];
    let plan: Vec<_> = topics::STAGES
        .iter()
        .filter(|(s, _, _)| *s != topics::STAGE_FETCH)
        .enumerate()
        .map(|(i, (s, _, _))| (s.to_string(), points[i % 3], 2 + (i as u32 * 3) % 7))
        .collect();
    let faults = Arc::new(KillOnce::new(plan.clone()));
    let ctx = context(feeds, analyzers);
    let dir = tempfile::tempdir().unwrap();
    let faulty = replay_documents(dir.path(), &docs, &ctx, policy, Some(faults.clone())).unwrap();

    assert_eq!(faults.pending(), 0, "every planned kill fired");
    assert_eq!(faulty.report.restarts, plan.len());
    assert_eq!(faulty.articles, 1000);
    assert_eq!(faulty.dead_letters, 0);
    assert!(faulty.export == clean.export, "stores differ after crash-restarts");

    let q = FileQueue::open(dir.path()).unwrap();
    assert_eq!(q.committed(topics::STAGE_EXTRACT, RAW_DOCUMENTS).unwrap(), docs.len() as u64);
}
