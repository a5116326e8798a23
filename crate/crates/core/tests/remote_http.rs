//! The HTTP backend against a throwaway local server.

#![cfg(feature = "remote")]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use kpforge_core::expander::remote::{ProposeRequestBody, RemoteModel};
use kpforge_core::expander::{BackendError, ExpanderBackend, ProposalRequest, SearchRequest};
use kpforge_core::fixtures::football;
use kpforge_core::Constant;

/// Serves one request with `status` and `body`, returning the request body.
fn serve_once(status: u16, body: &'static str) -> (String, thread::JoinHandle<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/propose", listener.local_addr().unwrap());
    let handle = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut length = 0;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if line == "\r\n" || line.is_empty() {
                break;
            }
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                length = v.trim().parse().unwrap();
            }
        }
        let mut request = vec![0; length];
        reader.read_exact(&mut request).unwrap();
        let mut stream = stream;
        write!(
            stream,
            "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        String::from_utf8(request).unwrap()
    });
    (url, handle)
}

#[test]
fn proposals_come_from_the_model() {
    let g = football();
    let (url, server) =
        serve_once(200, r#"{"triplets": [["V@X", "foundIn", "C@{1966}"], ["V@X", "isA", "C@{East German football team}"]]}"#);
    let model = RemoteModel::new(&g, url).with_timeout(Duration::from_secs(5));
    let c = Constant::of(["Berliner_FC_Dynamo"]).unwrap();
    let facts = model.search(&SearchRequest { queries: vec!["Berliner_FC_Dynamo".into()], filter_year: None }).unwrap();
    let proposals = model.propose(ProposalRequest { constant: &c, facts: &facts, goal: "pin it", seed: 0 }).unwrap();
    assert_eq!(proposals.len(), 2);
    assert_eq!(proposals[1].sources[0].single().unwrap().as_str(), "East German football team");
    let sent: ProposeRequestBody = serde_json::from_str(&server.join().unwrap()).unwrap();
    assert_eq!(sent.constant, "C@{Berliner_FC_Dynamo}");
    assert_eq!(sent.goal, "pin it");
    assert_eq!(sent.facts.len(), facts.len());
}

#[test]
fn error_status_is_a_transport_failure() {
    let g = football();
    let (url, server) = serve_once(500, "{}");
    let model = RemoteModel::new(&g, url).with_timeout(Duration::from_secs(5));
    let c = Constant::of(["Berliner_FC_Dynamo"]).unwrap();
    let err = model.propose(ProposalRequest { constant: &c, facts: &[], goal: "", seed: 0 }).unwrap_err();
    assert!(matches!(err, BackendError::Transport(_)), "{err:?}");
    server.join().unwrap();
}

#[test]
fn malformed_reply_is_a_bad_response() {
    let g = football();
    let (url, server) = serve_once(200, r#"{"triplets": [["V@X", "foundIn", "V@Y"]]}"#);
    let model = RemoteModel::new(&g, url).with_timeout(Duration::from_secs(5));
    let c = Constant::of(["Berliner_FC_Dynamo"]).unwrap();
    let err = model.propose(ProposalRequest { constant: &c, facts: &[], goal: "", seed: 0 }).unwrap_err();
    assert!(matches!(err, BackendError::BadResponse(_)), "{err:?}");
    server.join().unwrap();
}

#[test]
fn search_filters_later_years() {
    let g = football();
    let model = RemoteModel::new(&g, "http://127.0.0.1:9/unused");
    let all = model.search(&SearchRequest { queries: vec!["Robert_Rudwaleit".into()], filter_year: None }).unwrap();
    let early = model.search(&SearchRequest { queries: vec!["Robert_Rudwaleit".into()], filter_year: Some(2000) }).unwrap();
    assert_eq!(all.len(), 3);
    // The 2004 appearance is dropped; the club and the 1991 birth year stay.
    assert_eq!(early.len(), 2);
}

#[test]
fn unreachable_endpoint_fails_cleanly() {
    let g = football();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    drop(listener);
    let model = RemoteModel::new(&g, url).with_timeout(Duration::from_secs(2));
    let c = Constant::of(["a"]).unwrap();
    let err = model.propose(ProposalRequest { constant: &c, facts: &[], goal: "", seed: 0 }).unwrap_err();
    assert!(matches!(err, BackendError::Transport(_)));
}
