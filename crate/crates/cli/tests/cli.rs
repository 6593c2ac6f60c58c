use std::path::PathBuf;
use std::process::{Command, Output};

fn example(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(name);
    p.to_string_lossy().into_owned()
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("ttdef-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn ttdef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttdef"))
        .args(args)
        .env_remove("TTDEF_CONFIG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn decide_a2_json_is_yes_and_reloads() {
    let out = scratch("a2");
    let o = ttdef(&["decide", &example("a2.att"), "--json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["answer"]["kind"], "Yes");
    let spec = out.join(v["answer"]["spec"].as_str().unwrap());
    // the persisted spec evaluates like the source on the worked example
    let tree = "f(f(f(d,d),d),f(d,e))";
    let a = ttdef(&["eval", &example("a2.att"), tree]);
    let b = ttdef(&["eval", spec.to_str().unwrap(), tree]);
    assert_eq!(stdout(&a), "g(f(f(d)))\n");
    assert_eq!(stdout(&a), stdout(&b));
    // second run gives the same bytes
    let again = ttdef(&["decide", &example("a2.att"), "--json", "--out", out.to_str().unwrap()]);
    assert_eq!(stdout(&o), stdout(&again));
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn decide_a1_is_no() {
    let out = scratch("a1");
    let o = ttdef(&["decide", &example("a1.att"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("answer: No, single-path-fails"));
    assert!(!stdout(&o).contains("associate"));
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn zero_budget_exits_2() {
    let o = ttdef(&["definable", &example("rev.att"), "--budget-words", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn certificate_replay_roundtrip() {
    let dir = scratch("rev");
    let o = ttdef(&["definable", &example("rev.att"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "NotDefinable");
    let cert = dir.join("cert.json");
    std::fs::write(&cert, serde_json::to_string(&v["certificate"]).unwrap()).unwrap();
    let r = ttdef(&["definable", &example("rev.att"), "--replay", cert.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    let mut forged = v["certificate"].clone();
    forged["outputs"][0] = serde_json::json!([]);
    std::fs::write(&cert, serde_json::to_string(&forged).unwrap()).unwrap();
    let r = ttdef(&["definable", &example("rev.att"), "--replay", cert.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn usage_errors_exit_1_with_synopsis() {
    let o = ttdef(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = ttdef(&["decide"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_and_env() {
    let dir = scratch("cfg");
    let cfg = dir.join("budget.conf");
    std::fs::write(&cfg, "equivalence_depth = 3\n").unwrap();
    let out = dir.join("out");
    let o = ttdef(&["decide", &example("a2.att"), "--json", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["equivalence_depth"], 3);

    std::fs::write(&cfg, "equivalence_depth = 0\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ttdef"))
        .args(["validate", &example("a2.att")])
        .env("TTDEF_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn small_subcommands() {
    let o = ttdef(&["validate", &example("a1.att"), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kind"], "att");
    assert_eq!(v["monadic_output"], true);

    let o = ttdef(&["eval", &example("a1.att"), "f(f(e,e),f(e,e))"]);
    assert_eq!(stdout(&o), "g(g(g(g(e))))\n");

    let o = ttdef(&["analyze", &example("a1.att"), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["single_path"]["verdict"], "No");

    let o = ttdef(&["functional", &example("n1.att"), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "NotFunctional");

    let dir = scratch("emit");
    let h = dir.join("h.spec");
    let o = ttdef(&["associate", &example("a2.att"), "--emit", h.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(ttdef(&["validate", h.to_str().unwrap()]).status.code(), Some(0));

    let tw = dir.join("tw.spec");
    assert_eq!(ttdef(&["to-two-way", &example("a2.att"), "--emit", tw.to_str().unwrap()]).status.code(), Some(0));
    let o = ttdef(&["synthesize", tw.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("dt "));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn compose_rejects_mismatched_alphabets() {
    let out = scratch("compose");
    let o = ttdef(&["decide", &example("a2.att"), "--json", "--out", out.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let spec = out.join(v["answer"]["spec"].as_str().unwrap());
    let c = ttdef(&["compose", spec.to_str().unwrap(), spec.to_str().unwrap()]);
    // output alphabet of the first is not the input of the second
    assert_eq!(c.status.code(), Some(1));
    std::fs::remove_dir_all(&out).ok();
}
