mod support;

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use support::*;

struct Case {
    subcommand: &'static str,
    input: &'static str,
    args: Vec<String>,
    expected: i32,
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn healthy(addr: &str) -> bool {
    let Ok(mut stream) = TcpStream::connect(addr) else { return false };
    let _ = stream.write_all(b"GET /health HTTP/1.1\r\nHost: hub\r\nConnection: close\r\n\r\n");
    let mut reply = String::new();
    let _ = stream.read_to_string(&mut reply);
    reply.starts_with("HTTP/1.1 200") && reply.contains("\"ok\"")
}

/// Starts `tilt serve`, waits for /health, interrupts it and returns the
/// exit code.
fn serve_and_interrupt(data: &str) -> Result<i32, String> {
    let addr = format!("127.0.0.1:{}", free_port());
    let mut child = Command::new(env!("CARGO_BIN_EXE_tilt"))
        .args(["serve", "--addr", &addr, "--data", data])
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let deadline = Instant::now() + Duration::from_secs(10);
    while !healthy(&addr) {
        if Instant::now() > deadline {
            let _ = child.kill();
            return Err("hub never became healthy".into());
        }
        if let Some(status) = child.try_wait().map_err(|e| e.to_string())? {
            return Err(format!("serve exited early with {status}"));
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    Command::new("kill").args(["-INT", &child.id().to_string()]).status().map_err(|e| e.to_string())?;
    let status = child.wait().map_err(|e| e.to_string())?;
    status.code().ok_or_else(|| format!("serve ended by signal: {status}"))
}

fn main() {
    let f = Fixtures::new();
    let out = f.arg("graph.dot");
    let new_out = f.arg("new.json");
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let cases = vec![
        Case { subcommand: "validate", input: "valid", args: s(&["validate", &f.arg("golden.json")]), expected: 0 },
        Case { subcommand: "validate", input: "invalid", args: s(&["validate", &f.arg("ccpa.json")]), expected: 1 },
        Case { subcommand: "validate", input: "unparsable", args: s(&["validate", &f.arg("broken.json")]), expected: 1 },
        Case {
            subcommand: "validate",
            input: "vocabulary",
            args: s(&[
                "validate",
                &f.arg("golden.json"),
                "--vocab",
                &f.arg("vocab.json"),
                "--vocab-field",
                "dataDisclosed[*].purposes[*].purpose",
            ]),
            expected: 0,
        },
        Case { subcommand: "validate", input: "usage", args: s(&["validate", "--bogus", &f.arg("golden.json")]), expected: 2 },
        Case { subcommand: "validate", input: "unreadable", args: s(&["validate", &f.arg("absent.json")]), expected: 2 },
        Case {
            subcommand: "new",
            input: "valid",
            args: s(&["new", "--name", "GreenCompany AG", "--country", "DE", "--language", "de", "-o", &new_out]),
            expected: 0,
        },
        Case {
            subcommand: "new",
            input: "invalid",
            args: s(&["new", "--name", "GreenCompany AG", "--country", "de", "--language", "de"]),
            expected: 1,
        },
        Case { subcommand: "new", input: "usage", args: s(&["new", "--country", "DE", "--language", "de"]), expected: 2 },
        Case { subcommand: "hash", input: "valid", args: s(&["hash", &f.arg("golden.json")]), expected: 0 },
        Case { subcommand: "hash", input: "invalid", args: s(&["hash", &f.arg("broken.json")]), expected: 1 },
        Case { subcommand: "hash", input: "usage", args: s(&["hash"]), expected: 2 },
        Case {
            subcommand: "diff",
            input: "valid",
            args: s(&["diff", &f.arg("golden.json"), &f.arg("changed.json")]),
            expected: 0,
        },
        Case {
            subcommand: "diff",
            input: "invalid",
            args: s(&["diff", &f.arg("golden.json"), &f.arg("missing.json")]),
            expected: 1,
        },
        Case { subcommand: "diff", input: "usage", args: s(&["diff", &f.arg("golden.json")]), expected: 2 },
        Case { subcommand: "report", input: "valid", args: s(&["report", &f.arg("golden.json")]), expected: 0 },
        Case { subcommand: "report", input: "invalid", args: s(&["report", &f.arg("missing.json")]), expected: 1 },
        Case {
            subcommand: "report",
            input: "usage",
            args: s(&["report", &f.arg("golden.json"), "--format", "xml"]),
            expected: 2,
        },
        Case {
            subcommand: "graph",
            input: "valid",
            args: s(&["graph", &f.arg("corpus"), "--out", &out, "--format", "dot", "--classify"]),
            expected: 0,
        },
        Case {
            subcommand: "graph",
            input: "invalid",
            args: s(&["graph", &f.arg("bad-corpus"), "--out", &out]),
            expected: 1,
        },
        Case { subcommand: "graph", input: "usage", args: s(&["graph", &f.arg("corpus")]), expected: 2 },
        Case { subcommand: "serve", input: "usage", args: s(&["serve", "--addr", "not-an-address"]), expected: 2 },
        Case { subcommand: "(none)", input: "usage", args: s(&["frobnicate"]), expected: 2 },
        Case { subcommand: "(none)", input: "help", args: s(&["--help"]), expected: 0 },
    ];

    let mut failures = Vec::new();
    for case in &cases {
        let args: Vec<&str> = case.args.iter().map(String::as_str).collect();
        let got = tilt(&args).status.code();
        if got != Some(case.expected) {
            failures.push(format!("{} {}: exit {got:?}, expected {}", case.subcommand, case.input, case.expected));
        }
    }

    let data = tempfile::tempdir().unwrap();
    match serve_and_interrupt(&data.path().to_string_lossy()) {
        Ok(0) => {}
        other => failures.push(format!("serve valid: {other:?}, expected Ok(0)")),
    }
    let bad = tempfile::tempdir().unwrap();
    corrupt_data_dir(bad.path());
    let got = tilt(&["serve", "--addr", &format!("127.0.0.1:{}", free_port()), "--data", &bad.path().to_string_lossy()]);
    if got.status.code() != Some(1) {
        failures.push(format!("serve invalid: exit {:?}, expected 1", got.status.code()));
    }

    let total = cases.len() + 2;
    if failures.is_empty() {
        println!("PASS CLI exit-code matrix: {total} cases over 7 subcommands match 0/1/2");
    } else {
        println!("FAIL CLI exit-code matrix: {}", failures.join("; "));
        std::process::exit(1);
    }
}
