use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use textclf::corpus;
use textclf::pipeline::PipelineConfig;
use textclf::{model_io, FeatureConfig, Pipeline};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_textclf"))
        .args(args)
        .env_remove("TEXTCLF_DATA_DIR")
        .output()
        .unwrap()
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "textclf {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Vec<u8> {
    let mut child = Command::new(env!("CARGO_BIN_EXE_textclf"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    out.stdout
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fit_toy(out: &Path) {
    run_ok(&[
        "fit",
        "--data",
        s(&fixture("toy")),
        "--min-df",
        "1",
        "--output",
        s(out),
    ]);
}

#[test]
fn fit_round_trip_reproduces_in_memory_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("toy.json");
    let stdout = run_ok(&[
        "fit",
        "--data",
        s(&fixture("toy")),
        "--min-df",
        "1",
        "--output",
        s(&model_path),
    ]);
    assert!(stdout.starts_with("fit toy-3:"), "{stdout}");
    assert!(
        stdout.contains("classes=3") && stdout.contains("converged=3/3"),
        "{stdout}"
    );

    let corpus = corpus::load_dir_per_class(fixture("toy")).unwrap();
    let config = PipelineConfig {
        features: FeatureConfig {
            min_df: 1,
            ..FeatureConfig::default()
        },
        ..PipelineConfig::default()
    };
    let in_memory = Pipeline::fit(&corpus, &config, "toy", None).unwrap();
    let loaded = model_io::load(&model_path).unwrap();
    assert!(stdout.contains(&format!("V={}", in_memory.tfidf().dimension())));
    for doc in corpus.documents() {
        assert_eq!(
            in_memory.predict(&doc.text).unwrap(),
            loaded.predict(&doc.text).unwrap()
        );
        assert_eq!(
            in_memory.decision_scores(&doc.text).unwrap(),
            loaded.decision_scores(&doc.text).unwrap()
        );
    }
}

#[test]
fn repeated_fits_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    fit_toy(&a);
    run_ok(&[
        "--threads",
        "4",
        "fit",
        "--data",
        s(&fixture("toy")),
        "--min-df",
        "1",
        "--output",
        s(&b),
    ]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn evaluate_reports_are_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let data = fixture("tickets.jsonl");
    run_ok(&[
        "fit",
        "--data",
        s(&data),
        "--split",
        "--output",
        s(&model),
        "--dataset-name",
        "Tickets",
    ]);
    let prefix = dir.path().join("reports/eval");
    let stdout = run_ok(&[
        "evaluate",
        "--model",
        s(&model),
        "--data",
        s(&data),
        "--held-out",
        "--report",
        s(&prefix),
    ]);

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("reports/eval.json")).unwrap())
            .unwrap();
    let accuracy = json["accuracy"].as_f64().unwrap();
    assert_eq!(json["dataset_name_with_class_count"], "Tickets-4");
    assert_eq!(json["split_seed"], 42);
    assert_eq!(json["train_fraction"], 0.8);
    assert_eq!(json["config_digest"].as_str().unwrap().len(), 64);
    assert!(
        stdout.contains(&format!("accuracy={accuracy} ")),
        "{stdout}"
    );

    // Recompute accuracy from the emitted confusion matrix.
    let confusion = fs::read_to_string(dir.path().join("reports/eval.confusion.csv")).unwrap();
    let rows: Vec<Vec<String>> = confusion
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    let mut trace = 0u64;
    let mut total = 0u64;
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row[1..].iter().enumerate() {
            let v: u64 = v.parse().unwrap();
            total += v;
            if i == j {
                trace += v;
            }
        }
    }
    assert_eq!(total, json["n_test"].as_u64().unwrap());
    assert_eq!(accuracy, trace as f64 / total as f64);

    let csv = fs::read_to_string(dir.path().join("reports/eval.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("dataset,model,accuracy"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "Tickets-4");
    assert_eq!(row[2].parse::<f64>().unwrap(), accuracy);
    let md = fs::read_to_string(dir.path().join("reports/eval.md")).unwrap();
    assert!(md.contains("Tickets-4"));
}

#[test]
fn held_out_needs_a_split_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    fit_toy(&model);
    let out = run(&[
        "evaluate",
        "--model",
        s(&model),
        "--data",
        s(&fixture("toy")),
        "--held-out",
        "--report",
        s(&dir.path().join("r")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn predict_prints_one_line_per_document() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    fit_toy(&model);
    let stdout = run_ok(&[
        "predict",
        "--model",
        s(&model),
        "--text",
        "the football team won the match",
    ]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 1);
    let fields: Vec<&str> = lines[0].split('\t').collect();
    assert_eq!(fields[0], "0");
    assert_eq!(fields[1], "sports");
    fields[2].parse::<f64>().unwrap();

    let input = dir.path().join("docs.txt");
    fs::write(&input, "bake the bread\nnew laptop software\n\n").unwrap();
    let stdout = run_ok(&["predict", "--model", s(&model), "--input", s(&input)]);
    let predicted: Vec<&str> = stdout
        .lines()
        .map(|l| l.split('\t').nth(1).unwrap())
        .collect();
    assert_eq!(predicted.len(), 3);
    assert_eq!(&predicted[..2], ["cooking", "tech"]);
}

#[test]
fn predict_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    fit_toy(&model);
    let input = "garlic olive oil\nthe team captain\nprocessor memory\nunrelated words here\n";
    let args = [
        "predict",
        "--model",
        s(&model),
        "--explain",
        "--all-classes",
    ];
    let first = run_stdin(&args, input);
    let second = run_stdin(&args, input);
    assert!(!first.is_empty());
    assert_eq!(first, second);
    let json_args = ["predict", "--model", s(&model), "--json", "--explain"];
    assert_eq!(run_stdin(&json_args, input), run_stdin(&json_args, input));
}

#[test]
fn explain_output_sums_to_the_score() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    fit_toy(&model);
    let stdout = run_ok(&[
        "predict",
        "--model",
        s(&model),
        "--explain",
        "--k",
        "2",
        "--text",
        "the team won the football match with a late goal",
    ]);
    let mut lines = stdout.lines();
    let score: f64 = lines
        .next()
        .unwrap()
        .split('\t')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    let mut total = 0.0;
    let mut terms = 0;
    for line in lines {
        let fields: Vec<&str> = line.trim_start().split('\t').collect();
        match fields[0] {
            "class" => assert_eq!(fields[2].parse::<f64>().unwrap(), score),
            "bias" => total += fields[1].parse::<f64>().unwrap(),
            "term" => {
                terms += 1;
                total += fields[4].parse::<f64>().unwrap();
            }
            "rest" => total += fields[2].parse::<f64>().unwrap(),
            other => panic!("unexpected line kind {other}"),
        }
    }
    assert_eq!(terms, 2);
    assert!((total - score).abs() <= 1e-9, "{total} vs {score}");

    let json = run_ok(&[
        "predict",
        "--model",
        s(&model),
        "--explain",
        "--json",
        "--text",
        "bake bread in the oven",
    ]);
    let record: serde_json::Value = serde_json::from_str(json.trim()).unwrap();
    let ex = &record["explanations"][0];
    let mut total =
        ex["bias_contribution"].as_f64().unwrap() + ex["other_contributions"].as_f64().unwrap();
    for c in ex["contributions"].as_array().unwrap() {
        total += c["product"].as_f64().unwrap();
    }
    assert_eq!(record["predicted"], "cooking");
    assert!((total - record["score"].as_f64().unwrap()).abs() <= 1e-9);
}

/// Writes a tiny 5-class corpus with the BBC class names.
fn bbc_like(root: &Path) {
    let topics = [
        ("business", "shares market profit bank economy"),
        ("entertainment", "film music award actor album"),
        ("politics", "election minister party vote labour"),
        ("sport", "match team cup goal player"),
        ("tech", "software phone internet computer mobile"),
    ];
    for (class, words) in topics {
        let words: Vec<&str> = words.split(' ').collect();
        fs::create_dir_all(root.join(class)).unwrap();
        for d in 0..8 {
            let text: Vec<&str> = (0..6).map(|i| words[(d + i * 3) % words.len()]).collect();
            fs::write(root.join(class).join(format!("{d:03}.txt")), text.join(" ")).unwrap();
        }
    }
}

#[test]
fn benchmark_table_lists_published_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data/bbc");
    bbc_like(&data);
    let out = dir.path().join("out");
    let stdout = run_ok(&[
        "benchmark",
        "--bbc",
        s(&data),
        "--min-df",
        "1",
        "--seed",
        "7",
        "--out",
        s(&out),
    ]);
    assert!(stdout.contains("BBCNews-5: accuracy="), "{stdout}");
    let table = fs::read_to_string(out.join("benchmark.md")).unwrap();
    assert!(table.contains("## BBCNews-5"));
    assert!(table.contains("(this run)") && table.contains("| reproduced |"));
    assert!(table.contains("| BERT | 98.2 |"), "{table}");
    assert!(table.contains("| SVM+TFIDF | 98.0 |"), "{table}");
    assert!(table.contains("reported, not reproduced"));
    assert!(out.join("BBCNews-5.model.json").is_file());
    assert!(out.join("BBCNews-5.json").is_file());

    // Same seed again: identical outputs. The data directory is also found
    // through the environment when no dataset flag is given.
    let again = dir.path().join("again");
    let status = Command::new(env!("CARGO_BIN_EXE_textclf"))
        .args([
            "benchmark",
            "--min-df",
            "1",
            "--seed",
            "7",
            "--out",
            s(&again),
        ])
        .env("TEXTCLF_DATA_DIR", dir.path().join("data"))
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    for name in [
        "benchmark.md",
        "BBCNews-5.json",
        "BBCNews-5.csv",
        "BBCNews-5.model.json",
    ] {
        assert_eq!(
            fs::read(out.join(name)).unwrap(),
            fs::read(again.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn missing_dataset_names_the_expected_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "benchmark",
        "--bbc",
        s(&dir.path().join("nowhere")),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("one subdirectory per class"), "{stderr}");

    let out = run(&["benchmark", "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["fit"]).status.code(), Some(1));
    assert_eq!(
        run(&["fit", "--data", "x", "--output", "y", "--loss", "cubic"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["--threads", "0", "fit", "--data", "x", "--output", "y"])
            .status
            .code(),
        Some(1)
    );
    let model = dir.path().join("m.json");
    let out = run(&[
        "fit",
        "--data",
        s(&dir.path().join("missing")),
        "--output",
        s(&model),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: load:"));
    let out = run(&[
        "fit",
        "--data",
        s(&fixture("toy")),
        "--c",
        "-1",
        "--output",
        s(&model),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // Non-convergence is a warning unless requested otherwise.
    let tickets = fixture("tickets.jsonl");
    let stalled = [
        "fit",
        "--data",
        s(&tickets),
        "--max-epochs",
        "1",
        "--tolerance",
        "1e-12",
    ];
    let mut args = stalled.to_vec();
    args.extend(["--output", s(&model)]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: solver did not converge"));
    args.push("--fail-on-nonconvergence");
    assert_eq!(run(&args).status.code(), Some(3));
    assert!(model.is_file());

    let corrupt = dir.path().join("corrupt.json");
    let mut bytes = fs::read(&model).unwrap();
    let at = bytes.len() / 2;
    bytes[at] = if bytes[at] == b'1' { b'2' } else { b'1' };
    fs::write(&corrupt, bytes).unwrap();
    let out = run(&["predict", "--model", s(&corrupt), "--text", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn split_writes_disjoint_id_lists() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        run_ok(&[
            "split",
            "--data",
            s(&fixture("tickets.jsonl")),
            "--train-fraction",
            "0.75",
            "--out",
            s(out),
        ]);
    }
    let read = |p: PathBuf| fs::read_to_string(p).unwrap();
    let train = read(a.join("train_ids.txt"));
    let test = read(a.join("test_ids.txt"));
    assert_eq!(train, read(b.join("train_ids.txt")));
    assert_eq!(test, read(b.join("test_ids.txt")));
    let mut all: Vec<u32> = train
        .lines()
        .chain(test.lines())
        .map(|l| l.parse().unwrap())
        .collect();
    // Four classes of 50: round(0.75 * 50) = 38 each go to train.
    assert_eq!(train.lines().count(), 152);
    all.sort();
    assert_eq!(all, (0..200).collect::<Vec<_>>());
}
