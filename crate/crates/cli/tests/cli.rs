use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn eddy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eddy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn synth(dir: &Path, preset: &str) -> Vec<PathBuf> {
    let out = eddy(&["synth", "--preset", preset, "-o", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    stdout(&out).lines().map(PathBuf::from).collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn detect_oracle_scene() {
    let dir = tempfile::tempdir().unwrap();
    let frames = synth(dir.path(), "oracle");
    let report = dir.path().join("report.json");
    let rings = dir.path().join("rings");
    let out = eddy(&["detect", s(&frames[0]), "-o", s(&report), "--rings", s(&rings)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["method"], "hybrid");
    assert_eq!(v["eddies"].as_array().unwrap().len(), 3);
    assert!(v["timing"]["total_s"].is_number());
    let accepted = v["eddies"].as_array().unwrap().len() as u64;
    let rejected: u64 = v["rejections"].as_object().unwrap().values().map(|x| x.as_u64().unwrap()).sum();
    assert_eq!(accepted + rejected, v["candidates_total"].as_u64().unwrap());
    assert_eq!(fs::read_dir(&rings).unwrap().count(), 3);
}

#[test]
fn stable_report_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let frames = synth(dir.path(), "oracle");
    let a = eddy(&["detect", s(&frames[0]), "--stable", "--threads", "1"]);
    let b = eddy(&["detect", s(&frames[0]), "--stable", "--threads", "8"]);
    let c = eddy(&["detect", s(&frames[0]), "--stable"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert!(!stdout(&a).contains("timing"));
}

#[test]
fn baseline_methods_report() {
    let dir = tempfile::tempdir().unwrap();
    let frames = synth(dir.path(), "two-bump");
    for m in ["ow", "wa"] {
        let out = eddy(&["detect", s(&frames[0]), "--method", m]);
        assert!(out.status.success(), "{}", stderr(&out));
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["method"], m);
        let centers: Vec<(f64, f64)> = v["eddies"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| {
                let c = if m == "ow" { &e["core"] } else { &e["center"] };
                (c[0].as_f64().unwrap(), c[1].as_f64().unwrap())
            })
            .collect();
        for bump in [(35.0, 35.0), (65.0, 35.0)] {
            assert!(
                centers.iter().any(|c| (c.0 - bump.0).hypot(c.1 - bump.1) < 6.0),
                "{m} misses {bump:?}: {centers:?}"
            );
        }
    }
}

#[test]
fn all_masked_frame_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let fill = (-9999.0f32).to_le_bytes();
    let blob: Vec<u8> = fill.iter().copied().cycle().take(4 * 30 * 20).collect();
    for v in ["ssh", "u", "v"] {
        fs::write(dir.path().join(format!("{v}.bin")), &blob).unwrap();
    }
    let header = dir.path().join("masked.toml");
    fs::write(
        &header,
        "nx = 30\nny = 20\nnz = 1\ndx = 1.0\ndy = 1.0\ndz = [1.0]\nfill_value = -9999.0\n\
         [[variables]]\nname = \"ssh\"\nfile = \"ssh.bin\"\n\
         [[variables]]\nname = \"u\"\nfile = \"u.bin\"\n\
         [[variables]]\nname = \"v\"\nfile = \"v.bin\"\n",
    )
    .unwrap();
    let out = eddy(&["detect", s(&header), "--stable"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["candidates_total"], 0);
    assert_eq!(v["accepted"], 0);
}

#[test]
fn failure_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let frames = synth(dir.path(), "two-bump");

    let bad_sv = eddy(&["detect", s(&frames[0]), "--sv", "0.5"]);
    assert_eq!(bad_sv.status.code(), Some(2));
    assert!(stderr(&bad_sv).starts_with("error[config]: "));
    assert_eq!(stderr(&bad_sv).lines().count(), 1);

    let missing = eddy(&["detect", s(&dir.path().join("nope.toml"))]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(stderr(&missing).starts_with("error[io]: "));

    // header with SSH only: loads, then detection lacks velocity
    let text = fs::read_to_string(&frames[0]).unwrap();
    let ssh_only: String = text.split("[[variables]]").take(2).collect::<Vec<_>>().join("[[variables]]");
    assert!(ssh_only.contains("\"ssh\"") && !ssh_only.contains("\"u\""));
    let header = dir.path().join("ssh_only.toml");
    fs::write(&header, ssh_only).unwrap();
    let out = eddy(&["detect", s(&header)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("error[data]: ") && stderr(&out).contains("\"u\""));

    let truncated = dir.path().join("frame_000_v.bin");
    fs::write(&truncated, [0u8; 12]).unwrap();
    let out = eddy(&["detect", s(&frames[0])]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("load v"));

    let unknown = eddy(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(stderr(&unknown).starts_with("error[config]: "));

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[verify]\nsvv = 1.0\n").unwrap();
    let out = eddy(&["detect", s(&frames[0]), "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let frames = synth(dir.path(), "oracle");
    let cfg = dir.path().join("run.toml");
    let report = dir.path().join("from_config.json");
    fs::write(
        &cfg,
        format!("method = \"hybrid\"\n[verify]\nsd = 1.0\n[output]\nreport = {:?}\n", s(&report)),
    )
    .unwrap();
    let out = eddy(&["detect", s(&frames[0]), "--config", s(&cfg)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["eddies"].as_array().unwrap().len(), 0);

    fs::write(&cfg, "[verify]\nsd = 1.0\n").unwrap();
    for flag in [["--sd", "24"], ["--set", "sd=24"]] {
        let out = eddy(&["detect", s(&frames[0]), "--config", s(&cfg), flag[0], flag[1], "--stable"]);
        assert!(out.status.success(), "{}", stderr(&out));
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["accepted"], 3);
    }
    let bad = eddy(&["detect", s(&frames[0]), "--set", "sd"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sweep_tables() {
    let dir = tempfile::tempdir().unwrap();
    let frames = synth(dir.path(), "two-bump");
    let out = eddy(&["sweep", s(&frames[0]), "--param", "re", "--values", "3,5,7,31,61"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("parameter,value,candidates,verified,accepted,C1"));
    let counts: Vec<usize> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(counts.len(), 5);
    assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");

    let empty = eddy(&["sweep", s(&frames[0]), "--param", "re", "--values", ""]);
    assert!(empty.status.success(), "{}", stderr(&empty));
    let empty = eddy(&["sweep", s(&frames[0]), "--param", "re"]);
    assert!(empty.status.success(), "{}", stderr(&empty));
    assert!(stdout(&empty).trim().is_empty());

    let bad = eddy(&["sweep", s(&frames[0]), "--param", "zeta", "--values", "1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bench_table() {
    let dir = tempfile::tempdir().unwrap();
    let frames = synth(dir.path(), "two-bump");
    let csv = dir.path().join("bench.csv");
    let out = eddy(&["bench", s(&frames[0]), "--methods", "hybrid", "--repetitions", "1", "-o", s(&csv)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("method,repetitions,median_s,min_s,max_s,detections"));
    assert!(text.lines().nth(1).unwrap().starts_with("hybrid,1,"));

    let all = eddy(&["bench", s(&frames[0]), "--repetitions", "1"]);
    assert!(all.status.success());
    assert_eq!(stdout(&all).lines().count(), 4);
}

#[test]
fn track_advected_scene_in_any_order() {
    let dir = tempfile::tempdir().unwrap();
    let frames = synth(dir.path(), "advected");
    assert_eq!(frames.len(), 5);
    let sorted = eddy(&["track", s(&frames[0]), s(&frames[1]), s(&frames[2]), s(&frames[3]), s(&frames[4])]);
    assert!(sorted.status.success(), "{}", stderr(&sorted));
    let shuffled = eddy(&["track", s(&frames[3]), s(&frames[0]), s(&frames[4]), s(&frames[2]), s(&frames[1])]);
    assert_eq!(sorted.stdout, shuffled.stdout);
    let text = stdout(&sorted);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[0] == "1"));
    let xs: Vec<i64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(xs.windows(2).all(|w| (w[1] - w[0] - 2).abs() <= 1), "{xs:?}");

    let top = eddy(&["track", s(&frames[0]), s(&frames[1]), "--top", "0"]);
    assert_eq!(stdout(&top).trim(), "");

    let single = eddy(&["track", s(&frames[0])]);
    assert_eq!(single.status.code(), Some(2));
}

#[test]
fn synth_from_scene_file_with_truth() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.toml");
    fs::write(
        &scene,
        "frames = 2\n[grid]\nnx = 40\nny = 40\nnz = 1\ndx = 1.0\ndy = 1.0\ndz = [1.0]\n\
         [[eddies]]\ncenter = [20.0, 20.0]\ncore_radius = 4.0\npeak_speed = 1.0\npolarity = \"anticyclonic\"\nadvection = [1.0, 0.0]\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = eddy(&["synth", "--scene", s(&scene), "-o", s(&out_dir), "--stem", "t", "--truth"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out_dir.join("t_000.toml").exists() && out_dir.join("t_001.toml").exists());
    let truth: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("t_truth.json")).unwrap()).unwrap();
    assert_eq!(truth[1][0][0][0], 21.0);

    let bad = eddy(&["synth", "--preset", "nope", "-o", s(&out_dir)]);
    assert_eq!(bad.status.code(), Some(2));
}
