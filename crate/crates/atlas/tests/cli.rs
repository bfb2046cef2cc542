use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use varifold_atlas::RunReport;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn atlas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varifold-atlas")).args(args).output().expect("binary runs")
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn arrange_lens_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("lens.svg");
    let o = atlas(&["arrange", &cfg("lens.json"), "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    assert_eq!(r["arrangement"]["crossings"], 2);
    assert_eq!(r["arrangement"]["faces"], 4);
    assert_eq!(r["upper_bound"], 3);
    assert!(r["varifolds"].is_null());
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("<circle"));
}

#[test]
fn arrange_disjoint() {
    let o = atlas(&["arrange", &cfg("disjoint.json")]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["arrangement"]["crossings"], 0);
    assert_eq!(r["upper_bound"], 2);
}

#[test]
fn input_errors_exit_with_two() {
    let o = atlas(&["arrange", &cfg("tangent.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tangential contact"), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", r#"{"curves_a": [{"points": [[0, 0], [1, 0]]}]}"#);
    assert_eq!(atlas(&["enumerate", &bad]).status.code(), Some(2));
    let junk = write_config(dir.path(), "junk.json", "{ not json");
    assert_eq!(atlas(&["arrange", &junk]).status.code(), Some(2));
    assert_eq!(atlas(&["arrange", "/nonexistent/config.json"]).status.code(), Some(2));
    // `t` is needed to build.
    let no_t = write_config(dir.path(), "no_t.json", r#"{"curves_a": [{"points": [[0, 0], [1, 0], [0, 1]]}]}"#);
    assert_eq!(atlas(&["build", &no_t, "--out", dir.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn enumerate_lens_and_disjoint() {
    let r = json(&atlas(&["enumerate", &cfg("lens.json")]));
    let vs = r["varifolds"].as_array().unwrap();
    assert_eq!(vs.len(), 2);
    let chis: Vec<i64> = vs.iter().map(|v| v["stats"]["chi"].as_i64().unwrap()).collect();
    assert_eq!(chis, [0, 2]);
    assert_eq!(vs[0]["least_area"], true);
    assert_eq!(vs[1]["least_area"], false);

    let r = json(&atlas(&["enumerate", &cfg("disjoint.json")]));
    let vs = r["varifolds"].as_array().unwrap();
    assert_eq!(vs.len(), 1);
    assert_eq!(vs[0]["stats"]["chi"], 2);
}

#[test]
fn build_all_and_single() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = atlas(&["build", &cfg("lens.json"), "--all", "--out", out, "--csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut objs: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".obj"))
        .collect();
    objs.sort();
    assert_eq!(objs, ["lens_0_0.obj", "lens_1_0.obj", "lens_1_1.obj"]);
    assert!(dir.path().join("lens_report.json").exists());
    assert!(dir.path().join("lens_0_0_relax.csv").exists());
    let r = json(&o);
    for v in r["varifolds"].as_array().unwrap() {
        let b = &v["build"];
        let tol = b["params"]["tol_h"].as_f64().unwrap();
        for c in b["components"].as_array().unwrap() {
            assert!(c["relax"]["residual"].as_f64().unwrap() <= tol);
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let o = atlas(&["build", &cfg("lens.json"), "--varifold", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let objs = std::fs::read_dir(dir.path()).unwrap().filter(|e| {
        e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".obj")
    });
    assert_eq!(objs.count(), 1);
    let r = json(&o);
    assert!(r["varifolds"][1]["build"].is_null());
}

#[test]
fn large_t_warns_but_runs() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("lens.json")).unwrap().replace("\"t\": 0.06", "\"t\": 1.6");
    let c = write_config(dir.path(), "wide.json", &text);
    let o = atlas(&["build", &c, "--varifold", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(stderr(&o).contains("asymptotic regime not guaranteed"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn verify_lens_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let o = atlas(&["verify", &cfg("lens.json"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = dir.path().join("lens_report.json");
    let ok = atlas(&["enumerate", &cfg("lens.json"), "--replay", report.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    v["varifolds"][1]["stats"]["chi"] = 1.into();
    let bad = dir.path().join("corrupt.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let o = atlas(&["enumerate", &cfg("lens.json"), "--replay", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("chi mismatch"), "{}", stderr(&o));
}

#[test]
fn verify_skips_oracle_beyond_sixteen_faces() {
    // Seventeen disjoint triangles: seventeen bounded faces, one varifold.
    let tris: Vec<String> = (0..17)
        .map(|k| {
            let x = 3.0 * k as f64;
            format!("{{\"points\": [[{x}, 0], [{}, 0], [{x}, 1]]}}", x + 1.0)
        })
        .collect();
    let text = format!(r#"{{"curves_a": [{}], "t": 0.1, "mesh": {{"h": 0.2}}}}"#, tris.join(", "));
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(dir.path(), "many.json", &text);
    let o = atlas(&["verify", &c]);
    assert!(stderr(&o).contains("oracle skipped"), "{}", stderr(&o));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(!names.contains(&"oracle"));
    assert!(names.contains(&"euler") && names.contains(&"stability"));
}

#[test]
fn thread_cap_is_honoured_and_validated() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_varifold-atlas"))
            .args(["enumerate", &cfg("lens.json")])
            .env("VARIFOLD_ATLAS_THREADS", v)
            .output()
            .unwrap()
    };
    assert_eq!(run("1").status.code(), Some(0));
    assert_eq!(run("zero").status.code(), Some(2));
}

#[test]
fn printed_report_round_trips() {
    let o = atlas(&["verify", &cfg("lens.json")]);
    let text = String::from_utf8(o.stdout).unwrap();
    let report = RunReport::from_json(&text).unwrap();
    assert_eq!(format!("{}\n", report.to_json()), text);
}
