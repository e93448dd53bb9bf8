mod common;

use common::{faultlab, stderr, stdout, write_tiny_config};
use faultlab::csv_io::read_csv;
use faultlab::files::parse_report_csv;

fn summary_value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
}

#[test]
fn gen_normal_writes_the_requested_rows_without_faults() {
    let dir = tempfile::tempdir().unwrap();
    let out = faultlab(dir.path(), &["gen", "--regime", "normal", "--len", "1000", "--seed", "1", "--out", "n.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(summary_value(&text, "rows"), "1000");
    assert_eq!(summary_value(&text, "fault fraction"), "0.0000");
    assert_eq!(summary_value(&text, "classes present"), "12");
    let ds = read_csv(&dir.path().join("n.csv"), None).unwrap();
    assert_eq!(ds.len(), 1000);
    assert!(ds.records.iter().all(|r| !r.anomaly));
}

#[test]
fn gen_mixed_hits_the_fault_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = faultlab(dir.path(), &["gen", "--regime", "mixed", "--rate", "0.01", "--out", "m.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let fraction: f64 = summary_value(&text, "fault fraction").parse().unwrap();
    assert!((fraction - 0.01).abs() < 0.002, "{fraction}");
    assert_eq!(summary_value(&text, "rows"), "50000");
}

#[test]
fn gen_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    for (name, seed) in [("a.csv", "3"), ("b.csv", "3"), ("c.csv", "4")] {
        let out = faultlab(dir.path(), &["gen", "--regime", "mixed", "--len", "2000", "--seed", seed, "--out", name]);
        assert!(out.status.success());
    }
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));
}

#[test]
fn seed_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, args: &[&str]| {
        let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_faultlab"));
        cmd.args(args).current_dir(dir.path()).env_remove("FAULTLAB_SEED");
        if let Some(v) = env {
            cmd.env("FAULTLAB_SEED", v);
        }
        cmd.output().unwrap()
    };
    let base = ["gen", "--regime", "normal", "--len", "300"];
    assert!(run(Some("9"), &[&base[..], &["--out", "env.csv"]].concat()).status.success());
    assert!(run(None, &[&base[..], &["--seed", "9", "--out", "flag.csv"]].concat()).status.success());
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("env.csv"), read("flag.csv"));
    let bad = run(Some("nine"), &[&base[..], &["--out", "x.csv"]].concat());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn usage_and_config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing_out = faultlab(dir.path(), &["gen", "--regime", "normal"]);
    assert_eq!(missing_out.status.code(), Some(2));
    assert!(stderr(&missing_out).contains("--out"));

    assert_eq!(faultlab(dir.path(), &["gen", "--regime", "weekly", "--out", "x.csv"]).status.code(), Some(2));
    assert_eq!(
        faultlab(dir.path(), &["gen", "--regime", "mixed", "--rate", "1.5", "--out", "x.csv"]).status.code(),
        Some(2)
    );
    assert_eq!(faultlab(dir.path(), &["frobnicate"]).status.code(), Some(2));

    std::fs::write(dir.path().join("bad.toml"), "[eval]\nfolds = \"ten\"\n").unwrap();
    let bad = faultlab(dir.path(), &["pipeline", "--config", "bad.toml"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("bad.toml"));
    let absent = faultlab(dir.path(), &["pipeline", "--config", "absent.toml"]);
    assert_eq!(absent.status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_with_1_and_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = faultlab(dir.path(), &["gen", "--regime", "normal", "--len", "200", "--out", "n.csv"]);
    assert!(out.status.success());
    let infer = faultlab(dir.path(), &["infer", "--models", "nowhere", "--in", "n.csv", "--out", "p.csv"]);
    assert_eq!(infer.status.code(), Some(1));
    assert!(stderr(&infer).contains("manifest.json"), "{}", stderr(&infer));

    let wrong_regime = faultlab(dir.path(), &["train-seg", "--kind", "dt", "--in", "n.csv", "--out", "s.json"]);
    assert_eq!(wrong_regime.status.code(), Some(1));
    assert!(stderr(&wrong_regime).contains("n.csv"));
}

#[test]
fn stage_commands_write_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    write_tiny_config(dir.path());
    let c = ["--config", "run.toml"];
    let run = |args: &[&str]| {
        let out = faultlab(dir.path(), &[args, &c[..]].concat());
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
        stdout(&out)
    };
    run(&["gen", "--regime", "normal", "--out", "normal.csv"]);
    run(&["gen", "--regime", "anomaly", "--out", "anomaly.csv"]);
    run(&["gen", "--regime", "mixed", "--out", "mixed.csv"]);

    let cpd = run(&["train-cpd", "--in", "normal.csv", "--out", "cpd.json", "--k", "3"]);
    assert!(cpd.contains("k 3"), "{cpd}");
    let text = std::fs::read_to_string(dir.path().join("cpd.json")).unwrap();
    assert!(text.contains("\"kind\": \"changepoint\""));

    let seg = run(&["train-seg", "--kind", "nb", "--in", "anomaly.csv", "--out", "seg.json", "--crossval"]);
    assert!(seg.contains("kind: nb") && seg.contains("10-fold accuracy"), "{seg}");

    run(&["train-smtcnn", "--mixed", "mixed.csv", "--normal", "normal.csv", "--anomaly", "anomaly.csv", "--out", "models"]);
    for f in ["manifest.json", "changepoint.json", "segclass.json", "task2.json", "task3.json"] {
        assert!(dir.path().join("models").join(f).exists(), "{f}");
    }
    let infer = faultlab(
        dir.path(),
        &["infer", "--models", "models", "--in", "mixed.csv", "--out", "preds.csv", "--segments-out", "segments.csv"],
    );
    assert!(infer.status.success(), "{}", stderr(&infer));
    let preds = std::fs::read_to_string(dir.path().join("preds.csv")).unwrap();
    let mixed = read_csv(&dir.path().join("mixed.csv"), None).unwrap();
    let mut lines = preds.lines();
    assert_eq!(lines.next(), Some("index,class,p_anomaly"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), mixed.len());
    for (i, row) in rows.iter().enumerate() {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0], i.to_string());
        let class: u8 = f[1].parse().unwrap();
        let p: f64 = f[2].parse().unwrap();
        assert!((1..=12).contains(&class) && (0.0..=1.0).contains(&p));
    }
    let segs = std::fs::read_to_string(dir.path().join("segments.csv")).unwrap();
    assert!(segs.starts_with("start,end\n"));

    run(&["train-smtcnn", "--mixed", "mixed.csv", "--normal", "normal.csv", "--anomaly", "anomaly.csv", "--out", "b2", "--ablation", "b2"]);
    assert!(!dir.path().join("b2/changepoint.json").exists());
    std::fs::remove_file(dir.path().join("models/task3.json")).unwrap();
    let broken = faultlab(dir.path(), &["infer", "--models", "models", "--in", "mixed.csv", "--out", "p.csv"]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(stderr(&broken).contains("task3.json"));
}

#[test]
fn single_ablation_pipeline_gives_a_one_row_report() {
    let dir = tempfile::tempdir().unwrap();
    write_tiny_config(dir.path());
    let out = faultlab(dir.path(), &["pipeline", "--config", "run.toml", "--ablation", "b2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let md = std::fs::read_to_string(dir.path().join("reports/report.md")).unwrap();
    let lines: Vec<&str> = md.lines().collect();
    assert_eq!(lines.len(), 3, "{md}");
    assert!(lines[0].contains("Accuracy") && lines[2].contains("B2"));
    let csv = std::fs::read_to_string(dir.path().join("reports/report.csv")).unwrap();
    let rows = parse_report_csv(&csv).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(dir.path().join("models/b2/manifest.json").exists());
    assert!(!dir.path().join("models/full").exists());
    assert_eq!(stdout(&out), md);
}

#[test]
fn eval_reads_the_pipeline_datasets() {
    let dir = tempfile::tempdir().unwrap();
    write_tiny_config(dir.path());
    let gen = |regime: &str, file: &str| {
        let out = faultlab(dir.path(), &["gen", "--config", "run.toml", "--regime", regime, "--out", file]);
        assert!(out.status.success());
    };
    std::fs::create_dir(dir.path().join("data")).unwrap();
    gen("normal", "data/normal.csv");
    gen("anomaly", "data/anomaly.csv");
    gen("mixed", "data/mixed.csv");
    let out = faultlab(
        dir.path(),
        &["eval", "--config", "run.toml", "--variant", "full", "--variant", "b3", "--plan-seed", "7", "--out", "r.csv", "--json", "r.json"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = parse_report_csv(&std::fs::read_to_string(dir.path().join("r.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].variant, "SMTCNN");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 2);

    // the generated files are what the pipeline would write, so reading or regenerating agrees
    let regen = faultlab(
        dir.path(),
        &["eval", "--config", "run.toml", "--variant", "full", "--variant", "b3", "--plan-seed", "7", "--out", "r2.csv"],
    );
    assert!(regen.status.success());
    std::fs::remove_dir_all(dir.path().join("data")).unwrap();
    let fresh = faultlab(
        dir.path(),
        &["eval", "--config", "run.toml", "--variant", "full", "--variant", "b3", "--plan-seed", "7", "--out", "r3.csv"],
    );
    assert!(fresh.status.success());
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("r.csv"), read("r2.csv"));
    assert_eq!(read("r.csv"), read("r3.csv"));
}
