use eddy_core::harness::{run_method, sweep, MethodOutput};
use eddy_core::io::{load_config, load_frame, save_frame, write_text};
use eddy_core::synth::compose_scene;
use eddy_core::track::associate;
use eddy_core::{detect_hybrid, presets, DetectionReport, Method, RunConfig};

fn hybrid(out: MethodOutput) -> DetectionReport {
    match out {
        MethodOutput::Hybrid(r) => r,
        _ => panic!("expected a hybrid report"),
    }
}

#[test]
fn frame_files_round_trip_into_identical_detections() {
    let dir = tempfile::tempdir().unwrap();
    let frame = &compose_scene(&presets::oracle()).unwrap()[0];
    let header = save_frame(frame, dir.path(), "oracle").unwrap();
    let loaded = load_frame(&header).unwrap();
    assert_eq!(&loaded.spec, &frame.spec);

    let cfg = RunConfig::default();
    let direct = detect_hybrid(frame, &cfg.search, &cfg.verify).unwrap();
    let via_disk = hybrid(run_method(&loaded, &cfg, Method::Hybrid).unwrap());
    // payloads are float32, so only profile statistics may drift
    assert_eq!(direct.rejections, via_disk.rejections);
    assert_eq!(direct.eddies.len(), via_disk.eddies.len());
    for (a, b) in direct.eddies.iter().zip(&via_disk.eddies) {
        assert_eq!((a.id, a.polarity, &a.layers), (b.id, b.polarity, &b.layers));
        for (pa, pb) in a.profiles.iter().zip(&b.profiles) {
            let (ta, tb) = (pa.temperature.unwrap(), pb.temperature.unwrap());
            assert_eq!(ta.count, tb.count);
            assert!((ta.mean - tb.mean).abs() < 1e-4);
        }
    }
    assert_eq!(via_disk.eddies.len(), 3);
    assert!(via_disk.eddies.iter().all(|e| e.profiles.iter().all(|p| p.temperature.is_some())));
}

#[test]
fn config_file_drives_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let frame = &compose_scene(&presets::two_bump()).unwrap()[0];
    for m in Method::ALL {
        let mut cfg = RunConfig::default();
        cfg.method = m;
        let path = dir.path().join(format!("{m}.toml"));
        write_text(&path, &cfg.to_toml()).unwrap();
        let back = load_config(&path).unwrap();
        assert_eq!(back, cfg);
        let out = run_method(frame, &back, back.method).unwrap();
        assert!(out.detections() >= 2, "{m}");
    }
}

#[test]
fn advected_scene_links_into_one_track() {
    let frames = compose_scene(&presets::advected()).unwrap();
    let cfg = RunConfig::default();
    let reports: Vec<_> = frames
        .iter()
        .map(|f| detect_hybrid(f, &cfg.search, &cfg.verify).unwrap())
        .collect();
    let tracks = associate(&reports, &cfg.track).unwrap();
    assert_eq!(tracks.len(), 1);
    assert_eq!(tracks[0].len(), frames.len());
    for d in tracks[0].displacements() {
        assert!((d.0 - 2.0).abs() <= 1.0 && d.1.abs() <= 1.0, "{d:?}");
    }
}

#[test]
fn sweep_rows_match_individual_runs() {
    let frame = &compose_scene(&presets::two_bump()).unwrap()[0];
    let cfg = RunConfig::default();
    let rows = sweep(frame, &cfg, "sv", &[1.5, 3.0]).unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let mut c = cfg.clone();
        c.set("sv", row.value).unwrap();
        let r = detect_hybrid(frame, &c.search, &c.verify).unwrap();
        assert_eq!(row.accepted, r.accepted());
        assert_eq!(row.candidates, r.candidates_total);
    }
}
