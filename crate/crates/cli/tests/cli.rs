use std::fs;
use std::path::Path;

use knpoly_cli::commands::replay_args;
use knpoly_cli::report::read_csv;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn knpoly(cache: &Path, args: &[&str]) -> Run {
    let mut argv = vec!["knpoly".to_string(), "--cache".into(), cache.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = knpoly_cli::run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn classify_exit_codes() {
    let dir = tmp();
    let c = dir.path().join("c.json");
    let r = knpoly(&c, &["classify", "--q", "11", "--n", "15", "--r", "2", "--k", "2"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(r.stdout.contains("PROVEN"));
    assert_eq!(knpoly(&c, &["classify", "--q", "3", "--n", "9"]).code, 2);
    assert_eq!(knpoly(&c, &["classify", "--q", "3", "--n", "3"]).code, 3);
    let even = knpoly(&c, &["classify", "--q", "4", "--n", "10"]);
    assert_eq!(even.code, 64);
    assert!(even.stderr.contains("even"));
    assert_eq!(knpoly(&c, &["classify", "--q", "11"]).code, 64);
    assert_eq!(knpoly(&c, &["classify", "--q", "11", "--n", "15", "--g", "7,x"]).code, 64);
    assert_eq!(knpoly(&c, &["--help"]).code, 0);
    assert_eq!(knpoly(&c, &["classify", "--q", "3", "--n", "9", "--brute", "--ceiling", "20000"]).code, 0);
}

#[test]
fn classify_json_is_parseable() {
    let dir = tmp();
    let r = knpoly(&dir.path().join("c.json"), &["classify", "--q", "13", "--n", "20", "--format", "json"]);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["status"], "PROVEN_BASELINE");
}

#[test]
fn brute_ceiling_and_table() {
    let dir = tmp();
    let c = dir.path().join("c.json");
    let over = knpoly(&c, &["brute", "--q", "3", "--n", "9", "--ceiling", "1000"]);
    assert_eq!(over.code, 65);
    assert!(over.stderr.contains("19683"));
    let r = knpoly(&c, &["brute", "--q", "3", "--n", "6", "--r", "2", "--k", "2"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.lines().filter(|l| l.split('\t').count() == 4).count(), 10);
}

#[test]
fn threshold_modes() {
    let dir = tmp();
    let c = dir.path().join("c.json");
    let r = knpoly(&c, &["threshold", "smallq", "--q", "5", "--nu", "8.4"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("n >= 192"));
    let r = knpoly(&c, &["threshold", "reduce", "--n", "14", "--form", "7,1"]);
    assert_eq!(r.code, 0);
    let last = r.stdout.lines().last().unwrap();
    let b: f64 = last.trim_start_matches("final: ").parse().unwrap();
    assert!(b <= 30.0, "{last}");
    assert_eq!(knpoly(&c, &["threshold", "ineq7", "--nu", "1.5", "--n", "20"]).code, 64);
    assert_eq!(knpoly(&c, &["threshold", "reduce", "--n", "30"]).code, 64);
}

fn scan_args<'a>(out: &'a str, jobs: &'a str) -> Vec<&'a str> {
    vec!["scan", "--q-min", "3", "--q-max", "31", "--n-min", "5", "--n-max", "24", "--jobs", jobs, "--out", out]
}

#[test]
fn scan_is_deterministic_across_jobs() {
    let dir = tmp();
    let c = dir.path().join("c.json");
    let one = dir.path().join("one");
    let four = dir.path().join("four");
    assert_eq!(knpoly(&c, &scan_args(one.to_str().unwrap(), "1")).code, 0);
    assert_eq!(knpoly(&c, &scan_args(four.to_str().unwrap(), "4")).code, 0);
    for ext in ["csv", "json"] {
        let a = fs::read(one.with_extension(ext)).unwrap();
        let b = fs::read(four.with_extension(ext)).unwrap();
        assert_eq!(a, b, "{ext}");
    }
}

#[test]
fn scan_resumes_from_truncated_checkpoint() {
    let dir = tmp();
    let c = dir.path().join("c.json");
    let cp = dir.path().join("cp");
    let full = dir.path().join("full");
    let resumed = dir.path().join("resumed");
    let mut args = scan_args(full.to_str().unwrap(), "2");
    args.extend(["--resume", cp.to_str().unwrap()]);
    assert_eq!(knpoly(&c, &args).code, 0);
    // drop the last half of the records, as if interrupted
    let text = fs::read_to_string(&cp).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let keep = 2 + (lines.len() - 2) / 2;
    fs::write(&cp, lines[..keep].join("\n") + "\n").unwrap();
    let mut args = scan_args(resumed.to_str().unwrap(), "3");
    args.extend(["--resume", cp.to_str().unwrap()]);
    assert_eq!(knpoly(&c, &args).code, 0);
    assert_eq!(fs::read(full.with_extension("csv")).unwrap(), fs::read(resumed.with_extension("csv")).unwrap());
}

#[test]
fn scan_refuses_foreign_checkpoint() {
    let dir = tmp();
    let c = dir.path().join("c.json");
    let cp = dir.path().join("cp");
    fs::write(&cp, "knpoly-checkpoint 0\njob x\n").unwrap();
    let out = dir.path().join("r");
    let mut args = scan_args(out.to_str().unwrap(), "1");
    args.extend(["--resume", cp.to_str().unwrap()]);
    let r = knpoly(&c, &args);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("version"));
}

#[test]
fn scan_rejects_unwritable_output() {
    let dir = tmp();
    let r = knpoly(&dir.path().join("c.json"), &scan_args("/nonexistent/dir/r", "1"));
    assert_eq!(r.code, 1);
}

#[test]
fn report_evidence_replays() {
    let dir = tmp();
    let c = dir.path().join("c.json");
    let out = dir.path().join("r");
    let mut args = scan_args(out.to_str().unwrap(), "2");
    args.extend(["--format", "both"]);
    assert_eq!(knpoly(&c, &args).code, 0);
    let rows = read_csv(&fs::read_to_string(out.with_extension("csv")).unwrap()).unwrap();
    let mut replayed = 0;
    for row in rows.iter().filter(|r| r.status == "PROVEN_SIEVE" || r.status == "PROVEN_BASELINE") {
        for class in 0..2 {
            let Some(argv) = replay_args(row, class) else { continue };
            let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
            let r = knpoly(&c, &argv);
            assert_eq!(r.code, 0, "{argv:?}\n{}{}", r.stdout, r.stderr);
            assert!(r.stdout.contains("outcome: proven"));
            replayed += 1;
        }
    }
    assert!(replayed > 20);
}

#[test]
fn cache_import_export_verify() {
    let dir = tmp();
    let c = dir.path().join("c.json");
    let good = dir.path().join("good.txt");
    fs::write(&good, "19682 = 2·13·757\n59048 = 2^3*11^2*61\n").unwrap();
    let r = knpoly(&c, &["cache", "import", good.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "19682 = 2·9841\n").unwrap();
    let r = knpoly(&c, &["cache", "import", bad.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("9841"));
    let r = knpoly(&c, &["cache", "verify"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("2 valid"));
    let r = knpoly(&c, &["cache", "export"]);
    let entries: Vec<serde_json::Value> = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(entries[0]["integer"], "19682");
    assert_eq!(entries[0]["provenance"], "user_supplied");

    // a tampered entry is reported and never trusted
    let tampered = fs::read_to_string(&c).unwrap().replace("\"757\"", "\"761\"");
    fs::write(&c, tampered).unwrap();
    let r = knpoly(&c, &["cache", "verify"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("19682"));

    let empty = dir.path().join("empty.json");
    fs::write(&empty, "[]").unwrap();
    let r = knpoly(&c, &["cache", "verify", empty.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("0 valid"));
}

#[test]
fn classify_populates_cache() {
    let dir = tmp();
    let c = dir.path().join("c.json");
    let r = knpoly(&c, &["classify", "--q", "11", "--n", "15"]);
    assert_eq!(r.code, 0);
    let r = knpoly(&c, &["cache", "verify"]);
    assert_eq!(r.code, 0);
    assert!(!r.stdout.starts_with("0 valid"));
}
