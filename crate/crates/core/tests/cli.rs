// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn segflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segflow"))
        .args(args)
        .current_dir(dir)
        .env_remove("SEGFLOW_SEED")
        .output()
        .unwrap()
}

const DATA: [&str; 10] = [
    "--neighborhoods", "city/neighborhoods.csv",
    "--purchases", "city/purchases.csv",
    "--mentions", "city/mentions.csv",
    "--posts", "city/posts.csv",
    "--geometry", "city/geometry.json",
];

fn small_city(dir: &Path) {
    let out = segflow(
        dir,
        &["synth", "--preset", "homophilous", "--n-neighborhoods", "30", "--purchase-events", "15000", "--mention-events", "6000", "--seed", "2", "--out", "city"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn run(dir: &Path, cmd: &str, out: &str, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--out", out];
    args.extend_from_slice(&DATA);
    args.extend_from_slice(extra);
    segflow(dir, &args)
}

#[test]
fn every_command_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    small_city(dir.path());
    for (cmd, extra) in [
        ("ingest", &[][..]),
        ("diversity", &[][..]),
        ("network", &[][..]),
        ("mixing", &[][..]),
        ("sweep", &["--jackknife-replicates", "10"][..]),
        ("asymmetry", &["--null-replicates", "10"][..]),
        ("gravity", &[][..]),
        ("null", &["--replicates", "10"][..]),
        ("jackknife", &["--replicates", "10"][..]),
        ("gini-report", &["--replicates", "3"][..]),
    ] {
        let out = run(dir.path(), cmd, cmd, extra);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(cmd).join("manifest.json").exists(), "{cmd}");
    }
}

#[test]
fn sweep_has_one_row_per_step_and_channel() {
    let dir = tempfile::tempdir().unwrap();
    small_city(dir.path());
    let out = run(dir.path(), "sweep", "s", &["--kind", "extremes", "--k", "10", "--jackknife-replicates", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rows = 0;
    for ch in ["purchase", "mention"] {
        let csv = fs::read_to_string(dir.path().join(format!("s/sweep_extremes_{ch}.csv"))).unwrap();
        rows += csv.lines().count() - 1;
    }
    assert_eq!(rows, 5 * 2);
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = segflow(dir.path(), &["mixing", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = run(dir.path(), "mixing", "m", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("neighborhoods.csv"));

    small_city(dir.path());
    let out = run(dir.path(), "sweep", "s", &["--k", "7"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["--version"][..], &["sweep", "--help"][..]] {
        assert_eq!(segflow(dir.path(), args).status.code(), Some(0), "{args:?}");
    }
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    small_city(dir.path());
    fs::write(dir.path().join("run.cfg"), "# mixing settings\nk = 4\nseed = 9\n").unwrap();
    let out = run(dir.path(), "mixing", "a", &["--config", "run.cfg", "--k", "6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cfg = fs::read_to_string(dir.path().join("a/run_config.txt")).unwrap();
    assert!(cfg.contains("k = 6"), "{cfg}");
    assert!(cfg.contains("seed = 9"), "{cfg}");

    fs::write(dir.path().join("bad.cfg"), "no-such-key = 1\n").unwrap();
    let out = run(dir.path(), "mixing", "b", &["--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rerun_reproduces_and_detects_changes() {
    let dir = tempfile::tempdir().unwrap();
    small_city(dir.path());
    assert!(run(dir.path(), "null", "n", &["--replicates", "10"]).status.success());
    let out = segflow(dir.path(), &["rerun", "--manifest", "n/manifest.json", "--out", "n2", "--verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["null_purchase.csv", "null_mention.json"] {
        assert_eq!(fs::read(dir.path().join("n").join(f)).unwrap(), fs::read(dir.path().join("n2").join(f)).unwrap());
    }

    let path = dir.path().join("city/neighborhoods.csv");
    let mut text = fs::read_to_string(&path).unwrap();
    text.push('\n');
    fs::write(&path, text).unwrap();
    let out = segflow(dir.path(), &["rerun", "--manifest", "n/manifest.json", "--out", "n3"]);
    assert_eq!(out.status.code(), Some(1));
}
