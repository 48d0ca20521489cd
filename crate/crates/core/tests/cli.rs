use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cbtr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbtr"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn cbtr")
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing in\n{text}"))
        .to_string()
}

#[test]
fn synth_cluster_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(cbtr(&["synth", "--out", "s1.csv"], d));
    let printed = ok(cbtr(&["cluster", "s1.csv", "--out", "run", "--print-config"], d));
    assert!(printed.contains("cbtr.window_s = 1000"));
    for f in ["assignment.csv", "tracks.geojson", "timeline.svg", "manifest.txt"] {
        assert!(d.join("run").join(f).is_file(), "{f}");
    }
    let manifest = fs::read_to_string(d.join("run/manifest.txt")).unwrap();
    let jumps: usize = value(&manifest, "jumps").parse().unwrap();
    let merges: usize = value(&manifest, "merges").parse().unwrap();
    assert!(jumps + merges <= 5, "{manifest}");
    assert!(!manifest.contains("runtime_s"));
    assert_eq!(value(&manifest, "input_sha256").len(), 64);

    let header = fs::read_to_string(d.join("run/assignment.csv")).unwrap();
    assert!(header.starts_with("index,t,lat,lon,cluster,endpoint,abnormal,next\n"));

    let eval = ok(cbtr(&["eval", "run/assignment.csv", "s1.csv"], d));
    for key in ["correct_neighbor_rate", "jumps", "merges", "n_vessels_estimated"] {
        assert_eq!(value(&eval, key), value(&manifest, key), "{key}");
    }

    let geo: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("run/tracks.geojson")).unwrap()).unwrap();
    let n_clusters: usize = value(&manifest, "n_clusters").parse().unwrap();
    assert_eq!(geo["features"].as_array().unwrap().len(), n_clusters);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(cbtr(&["synth", "--out", "s1.csv"], d));
    for algo in ["cbtr", "npc"] {
        ok(cbtr(&["cluster", "s1.csv", "--algo", algo, "--threads", "1", "--out", "one"], d));
        ok(cbtr(&["cluster", "s1.csv", "--algo", algo, "--threads", "4", "--out", "four"], d));
        for f in ["assignment.csv", "tracks.geojson", "timeline.svg", "manifest.txt"] {
            assert_eq!(fs::read(d.join("one").join(f)).unwrap(), fs::read(d.join("four").join(f)).unwrap(), "{algo} {f}");
        }
    }
}

#[test]
fn unlabeled_input_omits_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(cbtr(&["synth", "--no-labels", "--out", "raw.csv"], d));
    assert!(fs::read_to_string(d.join("raw.csv")).unwrap().starts_with("timestamp,"));
    let out = ok(cbtr(&["cluster", "raw.csv", "--out", "run"], d));
    assert!(out.contains("clusters = "));
    assert!(!out.contains("correct_neighbor_rate"));
    assert!(!fs::read_to_string(d.join("run/manifest.txt")).unwrap().contains("[eval]"));
}

#[test]
fn shorter_window_jumps_more_on_gappy_fleet() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(cbtr(&["synth", "--scenario", "s1-gaps", "--out", "gaps.csv"], d));
    let jumps = |w: &str| -> usize {
        let out = ok(cbtr(&["cluster", "gaps.csv", "--window-s", w, "--out", w], d));
        value(&out, "jumps").parse().unwrap()
    };
    assert!(jumps("300") > jumps("1000"));
}

#[test]
fn classify_and_downsample() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(cbtr(&["synth", "--out", "s1.csv"], d));
    let out = ok(cbtr(&["downsample", "s1.csv", "--pattern", "every-2nd", "--out", "half.csv"], d));
    let kept: usize = value(&out, "kept").parse().unwrap();
    let removed: usize = value(&out, "removed").parse().unwrap();
    assert!(kept >= removed && kept - removed <= 20);

    let report = ok(cbtr(&["classify", "s1.csv", "s1.csv", "--out", "labels.csv"], d));
    assert_eq!(value(&report, "accuracy"), "1.000000");
    let labels = fs::read_to_string(d.join("labels.csv")).unwrap();
    assert!(labels.starts_with("vid,timestamp,lat,lon,sog,cog\n"));
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = cbtr(&["cluster", "missing.csv", "--out", "x"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));

    fs::write(d.join("bad.csv"), "timestamp,lat,lon,sog,cog\n1,37,-76,1,1\n2,137,-76,1,1\n").unwrap();
    let out = cbtr(&["cluster", "bad.csv", "--out", "x"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    fs::write(d.join("good.csv"), "timestamp,lat,lon,sog,cog\n1,37,-76,1,1\n2,37,-76,1,1\n").unwrap();
    let out = cbtr(&["cluster", "good.csv", "--out", "x", "--window-s", "0"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("window_s"));

    let out = cbtr(&["downsample", "bad.csv", "--pattern", "every-3rd", "--out", "y"], d);
    assert_eq!(out.status.code(), Some(2));
}
