use std::sync::Arc;
use std::time::Duration;

use tivi_core::model::{Difficulty, Frame, Task};
use tivi_core::modelio::{
    ClientError, Embedder, GeneratorClient, Grounder, HttpConfig, HttpEmbedder, HttpGenerator, HttpGrounder, HttpJudge,
    JudgeClient, OracleGenerator, PatchHistogramEmbedder,
};
use tivi_core::modelio::stub::{StubOptions, StubServer};
use tivi_core::taskgen;

fn cfg(server: &StubServer, path: &str) -> HttpConfig {
    HttpConfig {
        backoff_base_ms: 5,
        timeout_secs: 10.0,
        ..HttpConfig::new(&server.url(path), "")
    }
}

fn frames(n: usize) -> Vec<Frame> {
    (0..n).map(|i| Frame::filled(6, 5, [i as u8 * 40, 10, 200])).collect()
}

#[test]
fn chat_round_trip() {
    let server = StubServer::start(
        0,
        StubOptions {
            chat_replies: vec!["first".into(), "second".into()],
            ..Default::default()
        },
    )
    .unwrap();
    let judge = HttpJudge::new(cfg(&server, "/chat")).unwrap();
    assert_eq!(judge.chat(&frames(3), "describe video 1").unwrap(), "first");
    assert_eq!(judge.chat(&[], "text only").unwrap(), "second");
    let log = server.requests();
    assert_eq!(log.len(), 2);
    assert_eq!((log[0].path.as_str(), log[0].text.as_str(), log[0].images), ("/chat", "describe video 1", 3));
    assert_eq!(log[1].images, 0);
    assert_eq!(log[0].authorization, None);
}

#[test]
fn bearer_key_from_environment() {
    let server = StubServer::start(0, StubOptions::default()).unwrap();
    std::env::set_var("TIVI_WIRE_TEST_KEY", "s3cret");
    let judge = HttpJudge::new(HttpConfig {
        api_key_env: "TIVI_WIRE_TEST_KEY".into(),
        ..cfg(&server, "/chat")
    })
    .unwrap();
    judge.chat(&[], "hi").unwrap();
    assert_eq!(server.requests()[0].authorization.as_deref(), Some("Bearer s3cret"));

    // A named but unset variable fails before any request.
    let r = HttpJudge::new(HttpConfig {
        api_key_env: "TIVI_WIRE_TEST_UNSET".into(),
        ..cfg(&server, "/chat")
    });
    assert!(matches!(r, Err(ClientError::Config(_))));
    assert_eq!(server.hits(), 1);
}

#[test]
fn transient_failures_are_retried() {
    let server = StubServer::start(
        0,
        StubOptions {
            fail_first: 2,
            chat_replies: vec!["ok".into()],
            ..Default::default()
        },
    )
    .unwrap();
    let judge = HttpJudge::new(cfg(&server, "/chat")).unwrap();
    assert_eq!(judge.chat(&[], "x").unwrap(), "ok");
    assert_eq!(server.hits(), 3);

    let server = StubServer::start(
        0,
        StubOptions {
            fail_first: 10,
            ..Default::default()
        },
    )
    .unwrap();
    let judge = HttpJudge::new(HttpConfig {
        retries: 2,
        ..cfg(&server, "/chat")
    })
    .unwrap();
    let err = judge.chat(&[], "x").unwrap_err();
    assert!(matches!(err, ClientError::Status { status: 500, .. }), "{err}");
    assert_eq!(server.hits(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let server = StubServer::start(0, StubOptions::default()).unwrap();
    let judge = HttpJudge::new(cfg(&server, "/nowhere")).unwrap();
    assert!(matches!(judge.chat(&[], "x"), Err(ClientError::Status { status: 404, .. })));
    assert_eq!(server.hits(), 1);
}

#[test]
fn in_flight_requests_are_bounded() {
    let server = StubServer::start(
        0,
        StubOptions {
            delay: Duration::from_millis(60),
            ..Default::default()
        },
    )
    .unwrap();
    let judge = Arc::new(
        HttpJudge::new(HttpConfig {
            max_in_flight: 2,
            ..cfg(&server, "/chat")
        })
        .unwrap(),
    );
    let handles: Vec<_> = (0..6)
        .map(|_| {
            let j = Arc::clone(&judge);
            std::thread::spawn(move || j.chat(&[], "x").unwrap())
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert_eq!(server.hits(), 6);
    assert!(server.peak_in_flight() <= 2, "{}", server.peak_in_flight());
}

#[test]
fn embed_and_ground_endpoints() {
    let server = StubServer::start(0, StubOptions::default()).unwrap();
    let s = taskgen::generate(Task::MazeSolving, Difficulty::Easy, 1).unwrap();
    let remote = HttpEmbedder::new(cfg(&server, "/embed")).unwrap();
    let a = remote.embed(&s.initial).unwrap();
    let b = PatchHistogramEmbedder.embed(&s.initial).unwrap();
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9));

    let grounder = HttpGrounder::new(cfg(&server, "/ground")).unwrap();
    let dets = grounder.ground(&s.initial, "red").unwrap();
    let local = tivi_core::modelio::HsvGrounder::default().ground(&s.initial, "red").unwrap();
    assert_eq!(dets, local);
    assert_eq!(server.requests()[1].text, "red");
}

#[test]
fn generate_endpoint_proxies_a_generator() {
    let s = taskgen::generate(Task::SudokuCompletion, Difficulty::Easy, 2).unwrap();
    let oracle: Arc<dyn GeneratorClient> = Arc::new(OracleGenerator::new(std::slice::from_ref(&s), None));
    let server = StubServer::start(
        0,
        StubOptions {
            generator: Some(oracle),
            ..Default::default()
        },
    )
    .unwrap();
    let gen = HttpGenerator::new(cfg(&server, "/generate")).unwrap();
    let clip = gen.generate(&s.initial, &s.prompt, 7).unwrap();
    let gt = taskgen::render_gt_video(&s).unwrap();
    assert_eq!(clip.len(), gt.len());
    assert_eq!(clip.last().content_hash(), s.target.content_hash());
    assert_eq!(server.requests()[0].text, s.prompt);
}
