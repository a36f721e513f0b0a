use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn design(name: &str) -> String {
    root().join("designs").join(name).to_string_lossy().into_owned()
}

fn tlc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tlc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tlc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

const GAPPY: &str = "fsm gappy\ninputs a\noutputs y\ninitial A\nstate A { y=1 }\ntrans A -> A when a\n";

#[test]
fn check_exit_codes() {
    let ok = tlc(&["check", &design("itlc.fsm")]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert_eq!(stdout(&ok), "");

    let gappy = scratch("gappy.fsm", GAPPY);
    let bad = tlc(&["check", gappy.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).lines().any(|l| l.starts_with("gap state=A valuation={a=0}")), "{}", stdout(&bad));

    let missing = tlc(&["check", "/nonexistent/x.fsm"]);
    assert_eq!(missing.status.code(), Some(2));

    let broken = scratch("broken.fsm", "fsm x\ninitial A\nstate A { $ }\n");
    let parse = tlc(&["check", broken.to_str().unwrap()]);
    assert_eq!(parse.status.code(), Some(2));
    assert!(stderr(&parse).contains(":3:"), "{}", stderr(&parse));
}

#[test]
fn simulate_idle_log() {
    let stim = scratch("idle.stim", "horizon 10\n0 c=0\n");
    let out = tlc(&["simulate", &design("itlc.fsm"), stim.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().all(|l| l.contains(" S0 ") && l.ends_with("100001")), "{text}");
    assert_eq!(text, stdout(&tlc(&["simulate", &design("itlc.fsm"), stim.to_str().unwrap()])));
}

#[test]
fn simulate_writes_scenario_vcd() {
    let dir = std::env::temp_dir().join(format!("tlc-cli-vcd-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let vcd = dir.join("scenario.vcd");
    let out = tlc(&[
        "simulate",
        &design("itlc.fsm"),
        &design("paper_fig7_10.stim"),
        "--vcd",
        vcd.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let golden = std::fs::read(root().join("golden/paper_fig7_10.vcd")).unwrap();
    assert_eq!(std::fs::read(&vcd).unwrap(), golden);
}

#[test]
fn simulate_rejects_bad_timer() {
    let out = tlc(&[
        "simulate",
        &design("itlc.fsm"),
        &design("paper_fig7_10.stim"),
        "--short",
        "16",
        "--long",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("short_ticks must be < long_ticks"), "{}", stderr(&out));
}

#[test]
fn emit_outputs() {
    let ucf = tlc(&["emit", &design("itlc.fsm"), "--format", "ucf"]);
    assert_eq!(ucf.status.code(), Some(0));
    assert_eq!(stdout(&ucf).lines().count(), 9);

    let pins = tlc(&["emit", &design("itlc.fsm"), "--format", "ucf", "--pins", &design("itlc.pins")]);
    assert_eq!(stdout(&pins), stdout(&ucf));

    let v = tlc(&["emit", &design("itlc.fsm")]);
    assert_eq!(v.status.code(), Some(0));
    let golden = std::fs::read_to_string(root().join("golden/itlc.v")).unwrap();
    assert_eq!(stdout(&v), golden);

    let gappy = scratch("gappy_emit.fsm", GAPPY);
    let bad = tlc(&["emit", gappy.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("gap"));
    assert_eq!(stdout(&bad), "");
}

#[test]
fn bench_idle_and_determinism() {
    let args = ["bench", &design("itlc.fsm"), "--arrival", "0", "--seeds", "3", "--horizon", "1000"];
    let out = tlc(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    let agg = text.lines().last().unwrap();
    assert!(agg.starts_with("aggregate seeds=3"), "{agg}");
    assert!(agg.contains("main_green_share=1.000"), "{agg}");

    let busy = ["bench", &design("itlc.fsm"), "--arrival", "0.4", "--seeds", "4", "--record"];
    let a = stdout(&tlc(&busy));
    assert_eq!(a, stdout(&tlc(&busy)));
    assert!(a.starts_with("seed,"));
    assert_eq!(a.lines().count(), 6);
}

#[test]
fn bench_rejects_bad_probability() {
    let out = tlc(&["bench", &design("itlc.fsm"), "--arrival", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(tlc(&["frobnicate"]).status.code(), Some(2));
}
