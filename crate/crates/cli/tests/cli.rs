use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use orbit_census::census::{best_census, moments, read_census_csv};
use orbit_census::Level;
use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbit-census"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("ORBIT_CENSUS_WORKERS", "2")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn census_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["census", "--n", "3", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("clusters=4 |C_max|=3 Z_2=20"),
        "{}",
        stdout(&o)
    );
    let text = fs::read_to_string(dir.path().join("census_n3_p2.csv")).unwrap();
    assert!(text.starts_with("# orbit-census v1\n"));
    assert!(text.contains("# workers=2\n"));

    let o = run(dir.path(), &["census", "--n", "1", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("clusters=2 "));
}

#[test]
fn engines_agree_apart_from_the_label() {
    let dir = tempfile::tempdir().unwrap();
    for engine in ["brute", "best"] {
        let o = run(
            dir.path(),
            &["census", "--n", "12", "--p", "3", "--engine", engine],
        );
        assert_eq!(o.status.code(), Some(0));
        let text = fs::read_to_string(dir.path().join("census_n12_p3.csv")).unwrap();
        fs::write(dir.path().join(engine), text.replace(engine, "ENGINE")).unwrap();
    }
    let brute = fs::read(dir.path().join("brute")).unwrap();
    assert_eq!(brute, fs::read(dir.path().join("best")).unwrap());
}

#[test]
fn census_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["census", "--n", "15", "--p", "3"]);
    let table =
        read_census_csv(fs::File::open(dir.path().join("census_n15_p3.csv")).unwrap()).unwrap();
    let direct = best_census(15, 3).unwrap();
    for k in 1..=5 {
        assert_eq!(
            moments(&table, k, Level::Word).unwrap(),
            moments(&direct, k, Level::Word).unwrap()
        );
    }
}

#[test]
fn output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["moments", "--n", "16", "--p", "3", "--k", "2,3"];
    run(a.path(), &args);
    run(b.path(), &args);
    let name = "moments_n16_p3.csv";
    assert_eq!(
        fs::read(a.path().join(name)).unwrap(),
        fs::read(b.path().join(name)).unwrap()
    );
}

#[test]
fn prime_necklace_moments() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "moments", "--n", "7", "--p", "2", "--k", "1,2,3", "--level", "necklace", "--format",
            "json",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let doc: Value =
        serde_json::from_slice(&fs::read(dir.path().join("moments_n7_p2.json")).unwrap()).unwrap();
    assert_eq!(doc["schema"], "orbit-census v1");
    let words = best_census(7, 2).unwrap();
    for row in doc["rows"].as_array().unwrap() {
        let k = row["k"].as_u64().unwrap() as u32;
        let zk = moments(&words, k, Level::Word).unwrap();
        let expected = (zk - 2u32) / 7u32.pow(k) + 2u32;
        assert_eq!(row["exact"].as_str().unwrap(), expected.to_string());
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| run(dir.path(), args).status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["--version"]), Some(0));
    assert_eq!(code(&["census", "--n", "3"]), Some(1));
    assert_eq!(
        code(&["census", "--n", "3", "--p", "2", "--engine", "magic"]),
        Some(1)
    );
    assert_eq!(
        code(&["moments", "--n", "30", "--p", "2", "--level", "necklace"]),
        Some(1)
    );
    let o = run(
        dir.path(),
        &["census", "--n", "40", "--p", "2", "--engine", "brute"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hint"));
    assert_eq!(code(&["baker-check", "--n", "8", "--p", "2"]), Some(3));
    assert_eq!(
        code(&["baker-check", "--n", "10", "--p", "2", "--doubled"]),
        Some(0)
    );
    assert_eq!(
        code(&["fourier", "--n", "16", "--p", "2", "--k", "5"]),
        Some(2)
    );
}

#[test]
fn validate_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["validate", "--p", "3", "--format", "json"]);
    let doc: Value =
        serde_json::from_slice(&fs::read(dir.path().join("validate_p3.json")).unwrap()).unwrap();
    let checks = doc["checks"].as_array().unwrap();
    assert!(checks.len() > 20);
    for c in checks {
        for key in ["check", "params", "residual", "tolerance", "pass"] {
            assert!(c.get(key).is_some(), "{c}");
        }
    }
    let failed: Vec<&str> = doc["failed"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(failed, ["det_B"]);
    assert_eq!(doc["pass"], false);
    assert_eq!(o.status.code(), Some(3));
    assert!(checks
        .iter()
        .any(|c| c["check"] == "saddle_z2" && c["pass"] == true));
}

#[test]
fn fourier_matches_census() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["fourier", "--n", "10", "--p", "2"]);
    let fourier = fs::read_to_string(dir.path().join("fourier_n10_p2.csv")).unwrap();
    let sizes: Vec<String> = best_census(10, 2)
        .unwrap()
        .records()
        .iter()
        .map(|r| format!("{},{}", r.vector, r.size_words))
        .collect();
    let rows: Vec<String> = fourier
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.splitn(4, ',').nth(3).unwrap().to_string())
        .collect();
    assert_eq!(rows, sizes);
}

#[test]
fn artifacts_for_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 5] = [
        (
            &["distribution", "--n", "14", "--p", "2", "--bins", "10"],
            "distribution_n14_p2.csv",
        ),
        (
            &["anisotropy", "--n", "12", "--p", "3", "--k", "1,2"],
            "anisotropy_n12_p3.csv",
        ),
        (
            &[
                "anisotropy",
                "--n",
                "12",
                "--p",
                "3",
                "--thresholds",
                "0.1,0.5",
            ],
            "anisotropy_n12_p3.csv",
        ),
        (
            &["max-cluster", "--n", "13", "--p", "2"],
            "max-cluster_n13_p2.csv",
        ),
        (
            &["count-clusters", "--n", "50", "--p", "2"],
            "count-clusters_n50_p2.csv",
        ),
    ];
    for (args, file) in cases {
        assert_eq!(run(dir.path(), args).status.code(), Some(0), "{args:?}");
        let text = fs::read_to_string(dir.path().join(file)).unwrap();
        assert!(
            text.lines().filter(|l| !l.starts_with('#')).count() >= 2,
            "{file}"
        );
    }
    let count = fs::read_to_string(dir.path().join("count-clusters_n50_p2.csv")).unwrap();
    assert!(count.contains("\n50,2,627,"));
}
