mod support;

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use support::*;
use tilt_core::graph::*;
use tilt_core::model::Recipient;
use tilt_core::TiltDocument;

fn doc(id: &str, controller: &str, country: &str, recipients: &[(&str, &str)]) -> TiltDocument {
    let mut d = golden();
    d.meta.id = id.into();
    d.controller.name = controller.into();
    d.controller.country = country.into();
    d.data_disclosed[0].recipients = recipients
        .iter()
        .map(|(name, cc)| Recipient {
            name: Some(name.to_string()),
            division: None,
            address: None,
            country: Some(cc.to_string()),
            category: "Affiliates".into(),
        })
        .collect();
    d
}

#[test]
fn single_document_counts() {
    let g = build_graph(&[golden()]);
    assert_eq!(g.nodes.len(), 4);
    assert_eq!(g.edges.len(), 3);
    let kinds: BTreeSet<_> = g.edges.iter().map(|e| e.kind).collect();
    assert_eq!(kinds.len(), 3);
    for e in &g.edges {
        assert!(g.nodes.contains_key(&e.from) && g.nodes.contains_key(&e.to));
        assert_eq!(e.source_document_id, "f1424f86-ca0f-4f0c-9438-43cc00509931");
        let (from, to) = (g.nodes[&e.from].kind, g.nodes[&e.to].kind);
        match e.kind {
            EdgeKind::DisclosesTo => assert_eq!((from, to), (NodeKind::Controller, NodeKind::Recipient)),
            EdgeKind::Processes => assert_eq!((from, to), (NodeKind::Controller, NodeKind::DataCategory)),
            EdgeKind::ForPurpose => assert_eq!((from, to), (NodeKind::DataCategory, NodeKind::Purpose)),
        }
    }
}

#[test]
fn recipient_merges_with_controller() {
    let a = doc("a", "Alpha GmbH", "DE", &[("Beta Ltd", "GB")]);
    let b = doc("b", "beta  ltd", "GB", &[]);
    let g = build_graph(&[a, b]);
    let beta = g.node("entity:beta ltd|GB").unwrap();
    assert_eq!(beta.kind, NodeKind::Controller);
    assert!(g.edges.iter().any(|e| e.kind == EdgeKind::DisclosesTo
        && e.from == "entity:alpha gmbh|DE"
        && e.to == "entity:beta ltd|GB"));
    assert_eq!(g.controllers().count(), 2);
}

#[test]
fn strict_resolution_keeps_spellings_apart() {
    let a = doc("a", "Alpha GmbH", "DE", &[("Beta Ltd", "GB")]);
    let b = doc("b", "beta  ltd", "GB", &[]);
    let exact = GraphOptions { resolution: Resolution { case_fold: false, collapse_whitespace: false }, ..Default::default() };
    let g = build_graph_with(&[a, b], exact);
    assert_eq!(g.node("entity:Beta Ltd|GB").unwrap().kind, NodeKind::Recipient);
}

#[test]
fn classification_examples() {
    let lone = doc("a", "A", "DE", &[("R", "DE")]);
    assert_eq!(classify_controllers(&build_graph(&[lone])).values().collect::<Vec<_>>(), [&Relationship::Isolated]);

    let pair = [doc("a", "A", "DE", &[("B", "DE")]), doc("b", "B", "DE", &[])];
    let c = classify_controllers(&build_graph(&pair));
    assert!(c.values().all(|r| *r == Relationship::Linked), "{c:?}");

    let shared = [
        doc("a", "A", "DE", &[("R", "DE")]),
        doc("b", "B", "DE", &[("R", "DE")]),
        doc("c", "C", "DE", &[("R", "DE")]),
    ];
    let c = classify_controllers(&build_graph(&shared));
    assert_eq!(c.len(), 3);
    assert!(c.values().all(|r| *r == Relationship::Networked), "{c:?}");
}

#[test]
fn category_only_recipients_never_link() {
    let mut a = doc("a", "A", "DE", &[]);
    let mut b = doc("b", "B", "DE", &[]);
    for d in [&mut a, &mut b] {
        d.data_disclosed[0].recipients = vec![Recipient {
            name: None,
            division: None,
            address: None,
            country: None,
            category: "Payment providers".into(),
        }];
    }
    let g = build_graph(&[a, b]);
    assert!(classify_controllers(&g).values().all(|r| *r == Relationship::Isolated));
    assert_eq!(g.nodes.values().filter(|n| n.label == "Payment providers").count(), 2);
}

#[test]
fn chains() {
    let mut a = golden();
    let mut b = golden();
    let mut c = golden();
    for (i, d) in [&mut a, &mut b, &mut c].into_iter().enumerate() {
        d.meta.id = format!("v{i}");
        d.meta.url = format!("https://greencomp.de/privacypolicy/{i}");
    }
    a.changes_of_purpose = vec![change_to("https://greencomp.de/privacypolicy/1")];
    b.changes_of_purpose = vec![change_to("https://greencomp.de/privacypolicy/2")];
    c.changes_of_purpose.clear();
    let corpus = vec![a.clone(), b.clone(), c];
    let ids = |chain: Vec<&TiltDocument>| chain.into_iter().map(|d| d.meta.id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(follow_chain(&corpus, "v0").unwrap()), ["v0", "v1", "v2"]);
    assert_eq!(ids(follow_chain(&corpus, "v2").unwrap()), ["v2"]);
    assert_eq!(follow_chain(&corpus, "nope"), Err(ChainError::NotFound("nope".into())));

    b.changes_of_purpose = vec![change_to("https://greencomp.de/privacypolicy/0")];
    let cycle = vec![a, b];
    assert_eq!(ids(follow_chain(&cycle, "v0").unwrap()), ["v0", "v1"]);
}

/// Minimal DOT reader covering the statement forms of the grammar used by
/// the exporter: node statements and edge statements with attribute lists.
mod dot {
    use std::collections::BTreeMap;

    #[derive(Debug, Clone, PartialEq)]
    enum Tok {
        Id(String),
        Punct(&'static str),
    }

    fn lex(text: &str) -> Result<Vec<Tok>, String> {
        let mut out = Vec::new();
        let mut chars = text.chars().peekable();
        while let Some(&c) = chars.peek() {
            match c {
                c if c.is_whitespace() => {
                    chars.next();
                }
                '{' | '}' | '[' | ']' | ';' | ',' | '=' => {
                    chars.next();
                    out.push(Tok::Punct(match c {
                        '{' => "{",
                        '}' => "}",
                        '[' => "[",
                        ']' => "]",
                        ';' => ";",
                        ',' => ",",
                        _ => "=",
                    }));
                }
                '-' => {
                    chars.next();
                    match chars.next() {
                        Some('>') => out.push(Tok::Punct("->")),
                        other => return Err(format!("bad edge operator near {other:?}")),
                    }
                }
                '"' => {
                    chars.next();
                    let mut s = String::new();
                    loop {
                        match chars.next() {
                            None => return Err("unterminated string".into()),
                            Some('"') => break,
                            Some('\\') => match chars.next() {
                                Some('"') => s.push('"'),
                                Some(c) => {
                                    s.push('\\');
                                    s.push(c);
                                }
                                None => return Err("dangling escape".into()),
                            },
                            Some(c) => s.push(c),
                        }
                    }
                    out.push(Tok::Id(s));
                }
                c if c.is_alphanumeric() || c == '_' => {
                    let mut s = String::new();
                    while let Some(&c) = chars.peek() {
                        if c.is_alphanumeric() || c == '_' {
                            s.push(c);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    out.push(Tok::Id(s));
                }
                other => return Err(format!("unexpected character {other:?}")),
            }
        }
        Ok(out)
    }

    pub type Attrs = BTreeMap<String, String>;

    #[derive(Debug, Default)]
    pub struct Parsed {
        pub nodes: BTreeMap<String, Attrs>,
        pub edges: Vec<(String, String, Attrs)>,
    }

    pub fn parse(text: &str) -> Result<Parsed, String> {
        let toks = lex(text)?;
        let mut i = 0;
        let id = |i: &mut usize| match toks.get(*i) {
            Some(Tok::Id(s)) => {
                *i += 1;
                Ok(s.clone())
            }
            other => Err(format!("expected id, got {other:?}")),
        };
        let punct = |i: &mut usize, p: &str| match toks.get(*i) {
            Some(Tok::Punct(q)) if *q == p => {
                *i += 1;
                true
            }
            _ => false,
        };
        if id(&mut i)? != "digraph" {
            return Err("not a digraph".into());
        }
        id(&mut i)?;
        if !punct(&mut i, "{") {
            return Err("missing {".into());
        }
        let mut parsed = Parsed::default();
        loop {
            if punct(&mut i, "}") {
                break;
            }
            let from = id(&mut i)?;
            let to = if punct(&mut i, "->") { Some(id(&mut i)?) } else { None };
            let mut attrs = Attrs::new();
            if punct(&mut i, "[") {
                while !punct(&mut i, "]") {
                    let k = id(&mut i)?;
                    if !punct(&mut i, "=") {
                        return Err("missing =".into());
                    }
                    attrs.insert(k, id(&mut i)?);
                    punct(&mut i, ",");
                }
            }
            punct(&mut i, ";");
            match to {
                Some(to) => parsed.edges.push((from, to, attrs)),
                None => {
                    parsed.nodes.insert(from, attrs);
                }
            }
        }
        if i != toks.len() {
            return Err("trailing tokens".into());
        }
        Ok(parsed)
    }
}

#[test]
fn dot_export_parses() {
    let g = build_graph(&[golden()]);
    let text = String::from_utf8(export(&g, ExportFormat::Dot)).unwrap();
    let parsed = dot::parse(&text).unwrap();
    assert_eq!(parsed.nodes.keys().cloned().collect::<Vec<_>>(), g.nodes.keys().cloned().collect::<Vec<_>>());
    assert_eq!(parsed.edges.len(), g.edges.len());
    let shapes: BTreeSet<&str> = parsed.nodes.values().map(|a| a["shape"].as_str()).collect();
    assert_eq!(shapes, BTreeSet::from(["box", "diamond", "ellipse", "note"]));
    assert_eq!(export(&SharingGraph::default(), ExportFormat::Dot), b"digraph tilt {\n}\n");
}

#[test]
fn dot_escapes_awkward_labels() {
    let g = build_graph(&[doc("a", "A \"quoted\" {co}", "DE", &[("B -> C; [x]", "DE")])]);
    let parsed = dot::parse(&to_dot(&g)).unwrap();
    assert!(parsed.nodes.values().any(|a| a["label"] == "A \"quoted\" {co}"));
    assert!(parsed.nodes.values().any(|a| a["label"] == "B -> C; [x]"));
}

/// Rebuilds node and edge sets from exported JSON using only serde_json.
fn import(bytes: &[u8]) -> (BTreeMap<String, Value>, BTreeSet<String>) {
    let v: Value = serde_json::from_slice(bytes).unwrap();
    let nodes = v["nodes"].as_array().unwrap().iter().map(|n| (n["id"].as_str().unwrap().to_string(), n.clone())).collect();
    let edges = v["edges"].as_array().unwrap().iter().map(|e| e.to_string()).collect();
    (nodes, edges)
}

#[test]
fn json_export_reimports() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let corpus: Vec<TiltDocument> = (0..12).map(|i| synthetic(i, &mut rng)).collect();
    let g = build_graph(&corpus);
    let bytes = export(&g, ExportFormat::Json);
    let (nodes, edges) = import(&bytes);
    assert_eq!(nodes.len(), g.nodes.len());
    assert_eq!(edges.len(), g.edges.len());
    for (id, node) in &g.nodes {
        assert_eq!(nodes[id], serde_json::to_value(node).unwrap());
    }
    for e in &g.edges {
        assert!(edges.contains(&serde_json::to_value(e).unwrap().to_string()));
    }
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    let ids: Vec<&str> = v["nodes"].as_array().unwrap().iter().map(|n| n["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn edge_provenance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let corpus: Vec<TiltDocument> = (0..15).map(|i| synthetic(i, &mut rng)).collect();
    let g = build_graph(&corpus);
    for e in &g.edges {
        let source = corpus.iter().find(|d| d.meta.id == e.source_document_id).expect("source present");
        assert!(source.data_disclosed.iter().any(|d| d.category == e.data_category));
    }
}
