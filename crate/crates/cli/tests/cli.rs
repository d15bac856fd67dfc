use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin(out: &Path) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_authsignal"));
    for (k, _) in std::env::vars() {
        if k.starts_with("AUTHSIGNAL_") {
            cmd.env_remove(k);
        }
    }
    cmd.arg("--out-dir").arg(out);
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|_| panic!("stderr is not a JSON error line: {text}"))
}

fn write_registry(dir: &Path) -> PathBuf {
    let path = dir.join("registry.json");
    let reg = json!([
        {"institution_id": "alpha", "canonical_name": "Alpha University", "country": "SA", "aliases": ["Alpha Univ"]},
        {"institution_id": "beta", "canonical_name": "Beta Institute", "country": "US", "aliases": []}
    ]);
    std::fs::write(&path, reg.to_string()).unwrap();
    path
}

fn record(i: usize) -> String {
    json!({
        "record_id": format!("r{i:02}"),
        "year": 2019 + (i % 5) as i32,
        "doc_type": "article",
        "subject_categories": ["Engineering"],
        "authors": [
            {"author_id": format!("x{}", i % 3), "affiliations": [{"institution_id": "alpha", "country": "SA"}]},
            {"author_id": "y", "affiliations": [{"institution_id": "beta", "country": "US"}]}
        ],
        "corresponding_author_ids": []
    })
    .to_string()
}

fn dir_snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn ingest_accepts_valid_file() {
    let tmp = tempfile::tempdir().unwrap();
    let registry = write_registry(tmp.path());
    let input = tmp.path().join("raw.jsonl");
    std::fs::write(&input, (0..10).map(record).collect::<Vec<_>>().join("\n")).unwrap();
    let out = tmp.path().join("out");
    let o = run(bin(&out).args(["ingest", "--input"]).arg(&input).arg("--registry").arg(&registry));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let corpus = std::fs::read_to_string(out.join("corpus.jsonl")).unwrap();
    assert_eq!(corpus.lines().count(), 10);
    assert_eq!(std::fs::read_to_string(out.join("rejects.jsonl")).unwrap(), "");
}

#[test]
fn ingest_keeps_good_lines_and_reports_the_bad_one() {
    let tmp = tempfile::tempdir().unwrap();
    let registry = write_registry(tmp.path());
    let input = tmp.path().join("raw.jsonl");
    let mut lines: Vec<String> = (0..9).map(record).collect();
    lines.insert(4, "{\"record_id\": \"broken\", ".to_string());
    std::fs::write(&input, lines.join("\n")).unwrap();
    let out = tmp.path().join("out");
    let o = run(bin(&out).args(["ingest", "--input"]).arg(&input).arg("--registry").arg(&registry));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(out.join("corpus.jsonl")).unwrap().lines().count(), 9);
    let rejects = std::fs::read_to_string(out.join("rejects.jsonl")).unwrap();
    let rejects: Vec<Value> = rejects.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rejects.len(), 1);
    assert_eq!(rejects[0]["line_number"], 5);
}

#[test]
fn missing_registry_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("raw.jsonl");
    std::fs::write(&input, record(0)).unwrap();
    let out = tmp.path().join("out");
    let o = run(bin(&out).args(["ingest", "--input"]).arg(&input).args(["--registry", "/nonexistent/registry.json"]));
    assert_ne!(code(&o), 0);
    assert_eq!(stderr_json(&o)["exit_code"], code(&o));
    assert!(!out.exists(), "output directory was created");
}

#[test]
fn exit_codes_separate_config_from_data_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    // no corpus artifact yet
    let o = run(bin(&out).arg("metrics"));
    assert_eq!(code(&o), 2);
    assert_eq!(stderr_json(&o)["kind"], "data");

    let o = run(bin(&out).args(["network", "--format", "dot"]));
    assert_eq!(code(&o), 1);
    assert_eq!(stderr_json(&o)["kind"], "config");

    let o = run(bin(&out).arg("metrics").env("AUTHSIGNAL_CFG_FUNNEL__TOP_K_RANK", "0"));
    assert_eq!(code(&o), 1);

    let o = run(bin(&out).arg("no-such-command"));
    assert_eq!(code(&o), 1);
    assert!(!out.exists());
}

#[test]
fn planted_sixteen_screen_and_idempotent_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let steps: [&[&str]; 6] = [
        &["synth", "--institutions", "60", "--planted", "16", "--base-output", "60", "--no-author-plants"],
        &["metrics"],
        &["flags"],
        &["screen"],
        &["network"],
        &["report"],
    ];
    let mut screen_stdout = String::new();
    for step in steps {
        let o = run(bin(&out).args(["--seed", "3"]).args(step));
        assert_eq!(code(&o), 0, "{step:?}: {}", String::from_utf8_lossy(&o.stderr));
        if step[0] == "screen" {
            screen_stdout = String::from_utf8(o.stdout).unwrap();
        }
    }
    assert!(screen_stdout.trim_end().ends_with("final: 16"), "{screen_stdout}");
    let truth = std::fs::read_to_string(out.join("ground_truth.jsonl")).unwrap();
    let planted: Vec<String> = truth
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|v| v["kind"] == "output_surge")
        .map(|v| v["targets"][0].as_str().unwrap().to_string())
        .collect();
    let funnel: Value = serde_json::from_slice(&std::fs::read(out.join("funnel.json")).unwrap()).unwrap();
    let flagged: Vec<String> =
        funnel["final_flagged"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    let mut sorted = planted.clone();
    sorted.sort();
    assert_eq!(flagged, sorted);

    let before = dir_snapshot(&out);
    for step in steps {
        let o = run(bin(&out).args(["--seed", "3"]).args(step));
        assert_eq!(code(&o), 0);
    }
    let after = dir_snapshot(&out);
    assert_eq!(before.keys().collect::<Vec<_>>(), after.keys().collect::<Vec<_>>());
    for (path, bytes) in &before {
        assert!(after[path] == *bytes, "{} changed on rerun", path.display());
    }
}

#[test]
fn fixture_report_cells_match_fixtures() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(bin(&out).args(["report", "--fixtures"]));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let md = std::fs::read_to_string(out.join("report.md")).unwrap();
    assert!(md.contains("| Al-Mustaqbal University | study | 91 | 1432 | 1474 |"), "{md}");
    assert!(md.contains("27 -> 254"));

    let fixtures = authsignal_core::synth::published_fixture().unwrap();
    let mut reader = csv::Reader::from_path(out.join("tables/output.csv")).unwrap();
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let mut seen = 0;
    for row in reader.records() {
        let row = row.unwrap();
        let inst = fixtures.institutions.iter().find(|i| i.name == row[col("Institution")]).unwrap();
        let fixture = fixtures.output_counts.rows.iter().find(|r| r.institution_id == inst.institution_id).unwrap();
        assert_eq!(row[col("2019")].parse::<u64>().unwrap(), fixture.articles[&2019]);
        assert_eq!(row[col("2023")].parse::<u64>().unwrap(), fixture.articles[&2023]);
        assert_eq!(row[col("Change")].parse::<i64>().unwrap(), fixture.change_pct);
        seen += 1;
    }
    assert_eq!(seen, 23);
}

#[test]
fn config_file_and_flags_compose() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "seed = 11\n[funnel]\ntop_k_rank = 20\n[network]\nformat = \"csv\"\n").unwrap();
    let o = run(bin(&out).arg("--config").arg(&cfg).args(["synth", "--institutions", "8", "--planted", "1", "--no-author-plants"]));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let spec: Value = serde_json::from_slice(&std::fs::read(out.join("spec.json")).unwrap()).unwrap();
    assert_eq!(spec["seed"], 11);
    let o = run(bin(&out).arg("--config").arg(&cfg).args(["network", "--min-articles", "1"]));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("network_2023.csv")).unwrap();
    assert!(csv.starts_with("source,target,strength\n"));
}
