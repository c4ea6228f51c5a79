use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const WORDS: [&str; 10] = ["the", "cat", "dog", "sat", "ran", "on", "a", "mat", "big", "small"];
const HEADER: &str = "id\tsrc_lang\ttgt_lang\tsource\treference\thypothesis\tjudgements\n";

fn regemt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regemt")).args(args).output().unwrap()
}

/// Small linear congruential stream so fixtures need no RNG crate.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self, bound: usize) -> usize {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 33) % bound as u64) as usize
    }

    fn sentence(&mut self) -> String {
        let len = 2 + self.next(5);
        (0..len).map(|_| WORDS[self.next(WORDS.len())]).collect::<Vec<_>>().join(" ")
    }
}

/// Writes a dataset, vectors, vocabulary and an external score column equal
/// to the gold judgement.
fn fixture(dir: &Path, name: &str, pair: &str, n: usize, seed: u64) {
    let mut rng = Lcg(seed);
    let mut data = String::from(HEADER);
    let mut ext = String::from("segment_id\toracle\n");
    for i in 0..n {
        let reference = rng.sentence();
        let hypothesis = if i % 3 == 0 { reference.clone() } else { rng.sentence() };
        let gold = rng.next(1000) as f64 / 10.0;
        data.push_str(&format!("{pair}{i}\t{pair}\ten\tsrc {}\t{reference}\t{hypothesis}\t{gold},{gold}\n", i / 2));
        ext.push_str(&format!("{pair}{i}\t{gold}\n"));
    }
    fs::write(dir.join(format!("{name}.tsv")), data).unwrap();
    fs::write(dir.join(format!("{name}-ext.tsv")), ext).unwrap();

    let mut vectors = format!("{} 3\n", WORDS.len());
    for (k, w) in WORDS.iter().enumerate() {
        let t = k as f64;
        vectors.push_str(&format!("{w} {} {} {}\n", t.sin(), t.cos(), 0.1 * t));
    }
    fs::write(dir.join("vectors.txt"), vectors).unwrap();
    let mut vocab: Vec<String> = WORDS.iter().map(|s| s.to_string()).collect();
    vocab.extend(["src", "[UNK]"].map(String::from));
    vocab.extend((0..10).map(|d| d.to_string()));
    vocab.extend((0..10).map(|d| format!("##{d}")));
    fs::write(dir.join("vocab.txt"), vocab.join("\n") + "\n").unwrap();
}

fn write_config(dir: &Path, file: &str, body: &str) -> String {
    let path = dir.join(file);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn config_body(name: &str, metrics: &str, extra: &str) -> String {
    format!(
        r#"{{
  "dataset": "{name}.tsv",
  "metrics": [{metrics}],
  "resources": {{
    "static_vectors": "vectors.txt",
    "wordpiece_vocab": "vocab.txt",
    "external_scores": "{name}-ext.tsv"
  }},
  "training": {{ "max_epochs": 30 }},
  "split": {{ "seed": 11 }}{extra}
}}"#
    )
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn score_is_deterministic_and_identity_rows_are_exact() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "toy", "de", 30, 1);
    let cfg = write_config(dir.path(), "run.json", &config_body("toy", r#""SCM", "WMD", "BLEU""#, ""));
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let o = regemt(&["score", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let t1 = read(&out1.join("scores.tsv"));
    assert_eq!(t1, read(&out2.join("scores.tsv")));
    let mut lines = t1.lines();
    assert_eq!(lines.next().unwrap(), "segment_id\tSCM\tWMD\tBLEU\toracle\tunscorable");
    // every third hypothesis copies its reference
    let first: Vec<&str> = lines.next().unwrap().split('\t').collect();
    assert_eq!(&first[..4], &["de0", "1.000000", "0.000000", "1.000000"]);
}

#[test]
fn missing_resource_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "toy", "de", 10, 2);
    let body = r#"{ "dataset": "toy.tsv", "metrics": ["WMD", "Reg-base"], "split": { "seed": 1 } }"#;
    let cfg = write_config(dir.path(), "run.json", body);
    let o = regemt(&["score", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`WMD`") && err.contains("`Reg-base`"), "{err}");
}

#[test]
fn seed_is_mandatory() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "toy", "de", 10, 2);
    let cfg = write_config(dir.path(), "run.json", r#"{ "dataset": "toy.tsv", "metrics": ["BLEU"], "split": {} }"#);
    let o = regemt(&["score", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn malformed_data_exits_with_2() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "toy", "de", 10, 2);
    fs::write(dir.path().join("toy.tsv"), format!("{HEADER}x\tde\ten\tsrc\tref\thyp\tnot-a-number\n")).unwrap();
    let cfg = write_config(dir.path(), "run.json", r#"{ "dataset": "toy.tsv", "metrics": ["BLEU"], "split": { "seed": 1 } }"#);
    let o = regemt(&["score", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn evaluate_reports_every_table() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "toy", "de", 60, 3);
    let cfg = write_config(dir.path(), "run.json", &config_body("toy", r#""SCM", "BLEU""#, ",\n  \"output_dir\": \"report\""));
    let o = regemt(&["--threads", "2", "evaluate", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = dir.path().join("report");
    let results = read(&report.join("results.tsv"));
    let mut lines = results.lines();
    let header: Vec<&str> = lines.next().unwrap().split('\t').collect();
    assert_eq!(header, ["dataset", "SCM", "BLEU", "oracle", "RegEMT", "Reg-base"]);
    let row: Vec<&str> = lines.next().unwrap().split('\t').collect();
    assert_eq!(row[0], "toy");
    assert_eq!(row[3], "1.000000");

    let corr = read(&report.join("correlations.tsv"));
    assert!(corr.starts_with("metric\tSCM\tBLEU\tReg-base:ref-chars"), "{corr}");
    assert!(corr.lines().next().unwrap().ends_with("\toracle\tgold"));
    assert!(corr.lines().all(|l| !l.contains("\r")));
    assert!(read(&report.join("model.json")).contains("\"feature_names\""));
    assert!(report.join("reg-base-model.json").is_file());
    assert!(report.join("scores.tsv").is_file());
}

#[test]
fn ablate_writes_curve() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "toy", "de", 60, 4);
    let cfg = write_config(dir.path(), "run.json", &config_body("toy", r#""SCM", "WMD", "BLEU""#, ""));
    let out = dir.path().join("abl");
    let o = regemt(&["ablate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out.join("ablation.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,eliminated,remaining,test_rho");
    assert!(lines[1].starts_with("0,,4,"));
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("3,") && lines[4].contains(",1,"));
}

#[test]
fn crosslingual_runs_and_checks_metric_agreement() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "fit", "de", 60, 5);
    fixture(dir.path(), "eval", "cs", 60, 6);
    let fit = write_config(dir.path(), "fit.json", &config_body("fit", r#""BLEU""#, ""));
    let eval = write_config(dir.path(), "eval.json", &config_body("eval", r#""BLEU""#, ""));
    let out = dir.path().join("x");
    let o = regemt(&["crosslingual", "--config", &fit, "--eval-config", &eval, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = read(&out.join("crosslingual.tsv"));
    assert!(table.starts_with("fit\teval\tRegEMT-X\nfit\teval\t"), "{table}");

    let other = write_config(dir.path(), "other.json", &config_body("eval", r#""SCM""#, ""));
    let o = regemt(&["crosslingual", "--config", &fit, "--eval-config", &other]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_lists_defaults() {
    let o = regemt(&["evaluate", "--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for needle in ["--config", "--out", "--threads", "split.seed", "default: 0.8", "default: 100"] {
        assert!(text.contains(needle), "missing {needle}");
    }
}
