use std::path::Path;
use std::process::{Command, Output};

use qmap_cones::matcore::{matrix_to_json, ChoiMat};
use serde_json::Value;

fn qmap(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmap"))
        .arg("--quiet")
        .arg("--cache-dir")
        .arg(cache)
        .args(args)
        .output()
        .expect("spawn qmap")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("report JSON on stdout")
}

fn isotropic(p: f64) -> ChoiMat {
    let mut d = ChoiMat::depolarizing(2).mat().scale(1.0 - p);
    d.axpy(p, ChoiMat::max_entangled(2).mat());
    ChoiMat::new(2, d).unwrap()
}

fn drop_wall_time(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("wall_time");
            m.values_mut().for_each(drop_wall_time);
        }
        Value::Array(a) => a.iter_mut().for_each(drop_wall_time),
        _ => {}
    }
}

#[test]
fn entangling_isotropic_map_is_outside_the_ppt_cone() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("iso.json");
    std::fs::write(&input, matrix_to_json(isotropic(0.4).mat())).unwrap();
    let o = qmap(
        &dir.path().join("cache"),
        &[
            "membership",
            "--cone",
            "T",
            "--json",
            "--input",
            input.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let verdict = &v["result"]["verdict"];
    assert_eq!(verdict["status"], "Out", "{verdict}");
    assert!(
        verdict.to_string().contains("\"kind\":\"eigenvector\""),
        "{verdict}"
    );

    let o = qmap(
        &dir.path().join("cache"),
        &[
            "membership",
            "--cone",
            "CP",
            "--json",
            "--input",
            input.to_str().unwrap(),
        ],
    );
    assert_eq!(json(&o)["result"]["verdict"]["status"], "In");
}

#[test]
fn membership_rejects_wrong_n() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("iso.json");
    std::fs::write(&input, matrix_to_json(isotropic(0.2).mat())).unwrap();
    let o = qmap(
        dir.path(),
        &["membership", "--n", "3", "--input", input.to_str().unwrap()],
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn oversized_volume_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmap(dir.path(), &["volume", "--n", "3"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension 80"));
}

#[test]
fn usage_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&qmap(dir.path(), &["volume", "--bogus"])), 3);
    assert_eq!(code(&qmap(dir.path(), &["width", "--cone", "XYZ"])), 3);
    assert_eq!(code(&qmap(dir.path(), &["--help"])), 0);
}

#[test]
fn duality_pairs_stay_below_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmap(
        dir.path(),
        &["duality", "--pairs", "500", "--json", "--no-cache"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["pass"], true);
}

#[test]
fn section_bounds_default_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmap(dir.path(), &["section-bounds", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let lo = v["result"]["lower"].as_f64().unwrap();
    let hi = v["result"]["upper"].as_f64().unwrap();
    assert!(
        (lo - 0.573775).abs() < 1e-5 && (hi - 1.257544).abs() < 1e-5,
        "{lo} {hi}"
    );

    assert_eq!(
        code(&qmap(dir.path(), &["section-bounds", "--check", "0.8"])),
        0
    );
    assert_eq!(
        code(&qmap(dir.path(), &["section-bounds", "--check", "2.0"])),
        2
    );
}

#[test]
fn explicit_section_inputs() {
    let dir = tempfile::tempdir().unwrap();
    // the unit ball as its own section
    let o = qmap(
        dir.path(),
        &[
            "section-bounds",
            "--json",
            "--vrad",
            "1",
            "--r",
            "1",
            "--big-r",
            "1",
            "--m",
            "4",
            "--k",
            "2",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let lo = v["result"]["lower"].as_f64().unwrap();
    let hi = v["result"]["upper"].as_f64().unwrap();
    assert!(lo <= 1.0 && 1.0 <= hi, "{lo} {hi}");
}

#[test]
fn cache_hit_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = ["no-duality", "--probes", "200", "--json"];
    let a = qmap(&cache, &args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    let b = qmap(&cache, &args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs/sq");
    let run = |tag: &str| {
        let o = qmap(
            &dir.path().join(tag),
            &[
                "width",
                "--dirs",
                "300",
                "--seed",
                "7",
                "--out",
                out.to_str().unwrap(),
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (
            std::fs::read(out.with_extension("csv")).unwrap(),
            std::fs::read(out.with_extension("json")).unwrap(),
        )
    };
    let (csv_a, json_a) = run("c1");
    let (csv_b, json_b) = run("c2");
    assert_eq!(csv_a, csv_b);
    let strip = |b: &[u8]| {
        let mut v: Value = serde_json::from_slice(b).unwrap();
        drop_wall_time(&mut v);
        v
    };
    assert_eq!(strip(&json_a), strip(&json_b));
    assert!(String::from_utf8(csv_a).unwrap().lines().count() >= 2);
}

#[test]
fn config_file_defaults_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let ini = dir.path().join("qmap.ini");
    std::fs::write(&ini, "n = 3\nseed = 5\n\n[section-bounds]\nn = 2\n").unwrap();
    let o = qmap(
        dir.path(),
        &[
            "--config",
            ini.to_str().unwrap(),
            "section-bounds",
            "--json",
        ],
    );
    let v = json(&o);
    assert_eq!(v["config"]["n"], 2);
    assert_eq!(v["seed"], 5);
    let o = qmap(
        dir.path(),
        &[
            "--config",
            ini.to_str().unwrap(),
            "section-bounds",
            "--json",
            "--seed",
            "9",
        ],
    );
    assert_eq!(json(&o)["seed"], 9);
}

#[test]
fn tables_list_pending_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let o = qmap(
        dir.path(),
        &["tables", "--json", "--out", out.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 6, "{csv}");
    assert!(csv
        .lines()
        .next()
        .unwrap()
        .starts_with("set,lower,estimate"));
    assert!(json(&o)["warnings"].to_string().contains("pending"));
}

#[test]
fn small_volume_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "volume", "--steps", "40", "--chains", "2", "--seed", "11", "--json",
    ];
    let a = qmap(&dir.path().join("a"), &args);
    let b = qmap(&dir.path().join("b"), &args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let (mut va, mut vb) = (json(&a), json(&b));
    drop_wall_time(&mut va);
    drop_wall_time(&mut vb);
    assert_eq!(va, vb);
    let est = va["bounds"][0]["value"].as_f64().unwrap();
    assert!((0.5..=1.0).contains(&est), "{est}");
}
