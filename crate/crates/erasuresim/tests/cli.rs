use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn erasuresim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erasuresim")).args(args).output().expect("spawn erasuresim")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_with_trace(dir: &Path, scheme: &str, noise: &str) -> (Output, String) {
    let path = dir.join(format!("{scheme}.jsonl"));
    let p = path.to_str().unwrap().to_owned();
    let o = erasuresim(&[
        "run",
        "--scheme",
        scheme,
        "--protocol",
        "builtin:string-exchange:4",
        "--x",
        "10",
        "--y",
        "01",
        "--noise",
        noise,
        "--trace",
        &p,
    ]);
    (o, p)
}

#[test]
fn clean_run_and_verify_pass() {
    let dir = tempfile::tempdir().unwrap();
    for scheme in ["basic4", "basic2", "ecc3", "ags4", "ags1"] {
        let (o, trace) = run_with_trace(dir.path(), scheme, "none");
        assert_eq!(code(&o), 0, "{scheme}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["alice_output"], "1001");
        let o = erasuresim(&["verify", &trace]);
        assert_eq!(code(&o), 0, "{scheme}: {}", stdout(&o));
    }
}

#[test]
fn mutated_trace_names_failing_check() {
    let dir = tempfile::tempdir().unwrap();
    let (o, trace) = run_with_trace(dir.path(), "basic4", "burst:start=3,len=2");
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let mut record: serde_json::Value = serde_json::from_str(&lines[2]).unwrap();
    record["ledger"]["c_a"] = serde_json::json!(99);
    lines[2] = record.to_string();
    fs::write(&trace, lines.join("\n")).unwrap();
    let o = erasuresim(&["verify", &trace]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL ledger-consistent"), "{}", stdout(&o));
}

#[test]
fn ags_erased_final_answer_fails_unadjusted_bound() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run_with_trace(dir.path(), "ags4", "burst:start=4,len=1");
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metrics"]["cc_sym"], 6);
    assert_eq!(v["metrics"]["erased_final_answers"], 1);
}

#[test]
fn bad_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    assert_eq!(code(&erasuresim(&["verify", empty.to_str().unwrap()])), 2);
    assert_eq!(code(&erasuresim(&["verify", dir.path().join("missing").to_str().unwrap()])), 2);

    let noise = dir.path().join("noise.json");
    fs::write(&noise, "{\"erase\": [1, 2,").unwrap();
    let spec = format!("file:{}", noise.display());
    let o = erasuresim(&["run", "--scheme", "basic4", "--protocol", "builtin:string-exchange:4", "--noise", &spec]);
    assert_eq!(code(&o), 2);
    fs::write(&noise, "{\"erase\": [0]}").unwrap();
    let o = erasuresim(&["run", "--scheme", "basic4", "--protocol", "builtin:string-exchange:4", "--noise", &spec]);
    assert_eq!(code(&o), 2);

    let o = erasuresim(&["run", "--scheme", "basic4", "--protocol", "builtin:string-exchange:3"]);
    assert_eq!(code(&o), 2);
    let o = erasuresim(&["run", "--scheme", "basic5", "--protocol", "builtin:string-exchange:4"]);
    assert_eq!(code(&o), 2);
    let o = erasuresim(&[
        "search",
        "--scheme",
        "basic4",
        "--protocol",
        "builtin:string-exchange:8",
        "--budget",
        "8",
        "--horizon",
        "400",
        "--limit",
        "1000",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_csv_and_unsync() {
    let o = erasuresim(&["sweep", "--n", "20", "--t-max", "2"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("scheme,n_bits,delta,t,transmissions"));
    assert!(rows[3].starts_with("basic4,20,,2,24,"), "{}", rows[3]);

    let o = erasuresim(&["unsync", "--protocol", "builtin:string-exchange:8", "--gap", "5"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["gap"], 5);
    assert_eq!(v["erasures"], 4);
}

#[test]
fn search_reports_excess_as_check_failure() {
    let base = [
        "search",
        "--protocol",
        "builtin:string-exchange:4",
        "--x",
        "10",
        "--y",
        "01",
        "--budget",
        "2",
        "--horizon",
        "12",
    ];
    let o = erasuresim(&[&base[..], &["--scheme", "basic4"]].concat());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = erasuresim(&[&base[..], &["--scheme", "ags4"]].concat());
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}
