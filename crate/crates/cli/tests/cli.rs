use std::fs;
use std::process::{Command, Output};

fn nearsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nearsq"))
        .args(args)
        .env_remove(nearsq_cli::CHECKPOINT_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

#[test]
fn verify_sixty_as_json() {
    let o = nearsq(&["--format", "json", "verify", "--n", "60", "--c", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["N"], "60");
    assert_eq!(v["census_size"], 8);
    assert_eq!(v["r"], 3);
    assert_eq!(v["mu_list"], serde_json::json!(["1", "6", "10"]));
    assert_eq!(v["pell_system"]["terms"][1]["base"], "9");
}

#[test]
fn census_lists_window_divisors() {
    let o = nearsq(&["--format", "json", "census", "--n", "60", "--c", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(
        v["divisors"],
        serde_json::json!(["40", "45", "48", "50", "60", "72", "75", "80"])
    );
    assert_eq!(v["unpaired_low"], serde_json::json!(["40"]));
    assert_eq!(v["window"], serde_json::json!(["37", "83"]));
}

#[test]
fn census_csv_marks_sides() {
    let o = nearsq(&["--format", "csv", "census", "--n", "96", "--c", "5"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("q,side,paired"));
    assert!(text.contains("\n96,center,-\n"));
}

#[test]
fn pell_family_three_lines() {
    let o = nearsq(&["pell-family", "--k-max", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "k=1 X=10 Y=7 n=9216 window=[96, 144, 128]");
    assert!(lines[1].starts_with("k=2 X=58 Y=41 n=11289600 "));
}

#[test]
fn pell_family_cross_check_reports_extra_divisor() {
    let o = nearsq(&["--format", "jsonl", "pell-family", "--k-max", "3", "--cross-check"]);
    // k = 2 has a fourth divisor in the upper half-window.
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let rows: Vec<serde_json::Value> =
        text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["cross_check"]["matches"], true);
    assert_eq!(rows[1]["cross_check"]["extra"], serde_json::json!(["3584"]));
}

#[test]
fn bounds_values() {
    let o = nearsq(&["--format", "json", "bounds", "--c", "3"]);
    let v = json(&o);
    let turk = v["ln_turk_bound"].as_f64().unwrap();
    let thr = v["ln_theorem_threshold"].as_f64().unwrap();
    assert!((turk / 37391290.309257075 - 1.0).abs() < 1e-9);
    assert!((thr / 1166.6747298577476 - 1.0).abs() < 1e-9);

    let o = nearsq(&["--format", "json", "bounds", "--c", "1"]);
    assert!(json(&o)["ln_theorem_threshold"].is_null());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(nearsq(&["verify", "--n", "60", "--c", "1/2"]).status.code(), Some(2));
    assert_eq!(nearsq(&["verify", "--n", "1", "--c", "3"]).status.code(), Some(2));
    assert_eq!(nearsq(&["scan", "--from", "10", "--to", "5", "--c", "3"]).status.code(), Some(2));
    assert_eq!(nearsq(&["bounds", "--c", "3", "--constant", "-1"]).status.code(), Some(2));
    assert_eq!(nearsq(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(nearsq(&["--help"]).status.code(), Some(0));
}

#[test]
fn oversized_n_suggests_factors_file() {
    // A 50-digit product of two 25-digit primes is beyond the default budget.
    let n = "30000000000000000000000277000000000000000000000469";
    let o = nearsq(&["census", "--n", n, "--c", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("--factors"), "{err}");
}

#[test]
fn factors_file_is_used_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.txt");
    fs::write(&good, "# 60\n2 2\n3 1\n\n5 1\n").unwrap();
    let o = nearsq(&[
        "--format",
        "json",
        "census",
        "--n",
        "60",
        "--c",
        "3",
        "--factors",
        good.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["census_size"], 8);

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "2 2\n3 1\n").unwrap();
    let o = nearsq(&["census", "--n", "60", "--c", "3", "--factors", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let composite = dir.path().join("composite.txt");
    fs::write(&composite, "4 1\n15 1\n").unwrap();
    let o = nearsq(&["census", "--n", "60", "--c", "3", "--factors", composite.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_output_is_byte_deterministic() {
    let args = ["--format", "jsonl", "scan", "--from", "2", "--to", "3000", "--c", "3", "--min-pairs", "2"];
    let one = nearsq(&args);
    let mut parallel = args.to_vec();
    parallel.extend(["--jobs", "4", "--batch-size", "97"]);
    let many = nearsq(&parallel);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let text = stdout(&one);
    let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["kind"], "scan_report");
    assert_eq!(last["instances"], 2999);
}

#[test]
fn scan_checkpoint_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nearsq"))
        .args(["scan", "--from", "2", "--to", "500", "--c", "3", "--batch-size", "100"])
        .env(nearsq_cli::CHECKPOINT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let written: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(written.len(), 1);
    let path = written[0].as_ref().unwrap().path();
    assert_eq!(path.file_name().unwrap(), "scan-2-500-c3_1.json");
    let cp: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(cp["next_n"], 501);
}
