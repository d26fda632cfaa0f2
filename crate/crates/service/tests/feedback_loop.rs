use linematch::corpus::{generate_products, product_triples, ProductParams, ProductVocabulary};
use linematch::vectorizer::NgramConfig;
use linematch_service::{
    parse_log, replay, tasks_from_triples, FeedbackEvent, FeedbackKind, Models, PoolState, Service, ServiceConfig,
    SimulatedAgent,
};

#[test]
fn worked_triple_through_the_service() {
    let pool = PoolState::build_with(
        vec![("a".into(), "alpha".into()), ("b".into(), "beta".into())],
        NgramConfig::words(1, 1),
    )
    .unwrap();
    assert_eq!(pool.dim(), 2);
    let svc = Service::open(pool, ServiceConfig { c: 10.0, ..Default::default() }).unwrap();
    let served = svc.serve_next("alpha").unwrap();
    assert_eq!(served.best.id, "a");
    let out = svc
        .submit_feedback(FeedbackEvent {
            event_id: "1".into(),
            timestamp: 0,
            query_id: served.query_id,
            candidate_id: "a".into(),
            kind: FeedbackKind::PreferAlternate,
            alternate_id: Some("b".into()),
            agent_id: String::new(),
        })
        .unwrap();
    assert_eq!(out.step.unwrap().tau(), 1.0);
    let models = svc.models();
    assert_eq!(models.ranker().to_dense_matrix(), vec![0.0, 1.0, 0.0, 1.0]);
    let s = svc.pool().encode("alpha").unwrap();
    let b = svc.pool().encode("beta").unwrap();
    let margin = models.ranker().score(&s, &b).unwrap() - models.ranker().score(&s, &s).unwrap();
    assert_eq!(margin, 1.0);
}

#[test]
fn simulated_session_replays_exactly() {
    let vocab = ProductVocabulary::default();
    let items = generate_products(60, &vocab, 4).unwrap();
    let triples = product_triples(&items, &vocab.lexicons().unwrap(), &ProductParams::default(), 4);
    let (entries, tasks) = tasks_from_triples(&triples);
    let svc = Service::open(PoolState::build(entries.clone()).unwrap(), ServiceConfig::default()).unwrap();
    let report = SimulatedAgent::new("sim", 0.3, 7).run(&svc, &tasks, 120).unwrap();
    assert_eq!(report.events, 120);
    assert!(report.triples > 0 && report.pairs > 0);

    let records = parse_log(&svc.log_text().unwrap()).unwrap();
    let pool = PoolState::build(entries).unwrap();
    let live = svc.models().to_bytes(&pool);
    let full = replay(&pool, &records, None, svc.config().c).unwrap();
    assert_eq!(full.to_bytes(&pool), live);
    for k in [0, 1, 60, 119] {
        let head = replay(&pool, &records[..k], None, svc.config().c).unwrap();
        let base = Models::from_bytes(&head.to_bytes(&pool), &pool).unwrap();
        let resumed = replay(&pool, &records, Some(base), svc.config().c).unwrap();
        assert_eq!(resumed.to_bytes(&pool), live, "k = {k}");
    }
    let metrics = svc.metrics();
    assert_eq!(metrics.ranker.n as usize, report.triples);
    assert_eq!(metrics.ranker.history.len(), report.triples);
}
